import math

import numpy as np
import pytest

from statboard.spc import (
    ControlConstants,
    SpcError,
    SubgroupData,
    control_constants,
    detect_violations,
    xbar_r_chart,
)


def monte_carlo_range_moments(n: int, subgroups: int = 1_000_000, seed: int = 8675309):
    """Independent oracle: mean and sd of the range of n standard normals."""
    rng = np.random.default_rng(seed)
    ranges = np.ptp(rng.standard_normal((subgroups, n)), axis=1)
    return float(ranges.mean()), float(ranges.std(ddof=1))


class TestControlConstants:
    def test_d2_n2_against_monte_carlo(self):
        d2_mc, _ = monte_carlo_range_moments(2)
        c = control_constants(2)
        assert abs(c.d2 - d2_mc) < 0.01
        assert abs(c.d2 - 1.128) < 0.001  # published table value

    def test_n4_factors_against_monte_carlo(self):
        d2_mc, d3_mc = monte_carlo_range_moments(4)
        c = control_constants(4)
        assert abs(c.d2 - d2_mc) < 0.01
        assert abs(c.d3 - d3_mc) < 0.01
        assert abs(c.a2 - 0.729) < 0.001
        assert abs(c.d4_factor - 2.282) < 0.001
        assert c.d3_factor == 0.0  # 1 - 3 d3/d2 < 0 at n=4

    def test_d4_minus_one_identity(self):
        c = control_constants(4)
        assert math.isclose(c.d4_factor - 1.0, 3.0 * c.d3 / c.d2, rel_tol=1e-12)

    def test_published_three_decimal_table(self):
        # d2 and derived factors from the standard factor tables
        expected = {
            2: (1.128, 1.880, 0.0, 3.267),
            3: (1.693, 1.023, 0.0, 2.574),
            4: (2.059, 0.729, 0.0, 2.282),
            5: (2.326, 0.577, 0.0, 2.114),
            6: (2.534, 0.483, 0.0, 2.004),
            7: (2.704, 0.419, 0.076, 1.924),
            10: (3.078, 0.308, 0.223, 1.777),
            15: (3.472, 0.223, 0.347, 1.653),
            25: (3.931, 0.153, 0.459, 1.541),
        }
        for n, (d2, a2, d3f, d4f) in expected.items():
            c = control_constants(n)
            assert abs(c.d2 - d2) < 0.001, f"d2({n})"
            assert abs(c.a2 - a2) < 0.001, f"a2({n})"
            assert abs(c.d3_factor - d3f) < 0.001, f"D3({n})"
            assert abs(c.d4_factor - d4f) < 0.001, f"D4({n})"

    def test_out_of_range_sizes(self):
        for n in (0, 1, 26):
            with pytest.raises(SpcError):
                control_constants(n)


def reference_chart(rows):
    """Step-by-step oracle computation, independent of the implementation."""
    m = len(rows)
    n = len(rows[0])
    xbars = [sum(r) / n for r in rows]
    ranges = [max(r) - min(r) for r in rows]
    xbb = sum(xbars) / m
    rbar = sum(ranges) / m
    c = control_constants(n)
    return {
        "xbars": xbars,
        "ranges": ranges,
        "xbar_limits": (xbb - c.a2 * rbar, xbb, xbb + c.a2 * rbar),
        "r_limits": (c.d3_factor * rbar, rbar, c.d4_factor * rbar),
    }


class TestXbarRChart:
    def test_forty_subgroups_of_four(self):
        rng = np.random.default_rng(44)
        rows = rng.normal(74.0, 0.01, size=(40, 4)).tolist()
        result = xbar_r_chart(SubgroupData.from_rows(rows))
        assert len(result.xbar_points) == 40
        assert len(result.r_points) == 40

    def test_constant_subgroups(self):
        result = xbar_r_chart(SubgroupData.from_rows([[7.0] * 4] * 5))
        assert result.grand_mean == 7.0
        assert result.mean_range == 0.0
        assert result.xbar_lcl == result.xbar_cl == result.xbar_ucl == 7.0
        assert result.xbar_violations == () and result.r_violations == ()

    def test_matches_step_by_step_oracle(self):
        rng = np.random.default_rng(907)
        rows = rng.normal(50.0, 2.0, size=(40, 4)).tolist()
        result = xbar_r_chart(SubgroupData.from_rows(rows))
        ref = reference_chart(rows)
        for got, want in zip(result.xbar_points, ref["xbars"]):
            assert abs(got - want) < 1e-9
        lcl, cl, ucl = ref["xbar_limits"]
        assert abs(result.xbar_lcl - lcl) < 1e-9
        assert abs(result.xbar_cl - cl) < 1e-9
        assert abs(result.xbar_ucl - ucl) < 1e-9
        rlcl, rcl, rucl = ref["r_limits"]
        assert abs(result.r_lcl - rlcl) < 1e-9
        assert abs(result.r_cl - rcl) < 1e-9
        assert abs(result.r_ucl - rucl) < 1e-9

    def test_limits_symmetric_about_center(self):
        rng = np.random.default_rng(11)
        rows = rng.normal(0, 1, size=(25, 5)).tolist()
        result = xbar_r_chart(SubgroupData.from_rows(rows))
        assert abs((result.xbar_ucl - result.xbar_cl) - (result.xbar_cl - result.xbar_lcl)) < 1e-10
        assert result.r_lcl >= 0.0

    def test_size_mismatch_rejected(self):
        with pytest.raises(SpcError, match="size"):
            SubgroupData.from_rows([[1.0, 2.0], [1.0, 2.0, 3.0]])

    def test_non_finite_rejected(self):
        with pytest.raises(SpcError):
            SubgroupData.from_rows([[1.0, float("nan")]])

    def test_no_subgroups_rejected(self):
        with pytest.raises(SpcError):
            SubgroupData.from_rows([])


class TestViolations:
    def test_all_inside(self):
        assert detect_violations([1.0, 2.0, 3.0], 0.0, 4.0) == ()

    def test_point_on_limit_is_in_control(self):
        assert detect_violations([4.0, 0.0], 0.0, 4.0) == ()

    def test_strictly_outside_flagged(self):
        assert detect_violations([4.0000001, -0.1, 2.0], 0.0, 4.0) == (0, 1)

    def test_shifted_subgroup_detected(self):
        rng = np.random.default_rng(2)
        rows = rng.normal(10.0, 1.0, size=(40, 4))
        base = xbar_r_chart(SubgroupData.from_rows(rows.tolist()))
        rows[17] += 10.0 * base.mean_range
        shifted = xbar_r_chart(SubgroupData.from_rows(rows.tolist()))
        assert 17 in shifted.xbar_violations


class TestEquivariance:
    def _random_dataset(self, rng):
        m = int(rng.integers(5, 30))
        n = int(rng.integers(2, 9))
        return rng.normal(rng.uniform(-50, 50), rng.uniform(0.5, 5), size=(m, n))

    def test_shift_and_scale_over_seeded_datasets(self):
        rng = np.random.default_rng(31337)
        for _ in range(100):
            rows = self._random_dataset(rng)
            shift = float(rng.uniform(-100, 100))
            scale = float(rng.uniform(0.1, 10))
            base = xbar_r_chart(SubgroupData.from_rows(rows.tolist()))
            mag = max(1.0, abs(base.grand_mean), abs(shift))

            shifted = xbar_r_chart(SubgroupData.from_rows((rows + shift).tolist()))
            assert abs(shifted.grand_mean - (base.grand_mean + shift)) < 1e-9 * mag
            assert abs(shifted.xbar_ucl - (base.xbar_ucl + shift)) < 1e-9 * mag
            assert abs(shifted.xbar_lcl - (base.xbar_lcl + shift)) < 1e-9 * mag
            for a, b in zip(shifted.r_points, base.r_points):
                assert abs(a - b) < 1e-9 * mag
            assert abs(shifted.r_ucl - base.r_ucl) < 1e-9 * mag
            assert shifted.xbar_violations == base.xbar_violations
            assert shifted.r_violations == base.r_violations

            scaled = xbar_r_chart(SubgroupData.from_rows((rows * scale).tolist()))
            smag = mag * scale
            assert abs(scaled.grand_mean - base.grand_mean * scale) < 1e-9 * smag
            assert abs(scaled.xbar_ucl - base.xbar_ucl * scale) < 1e-9 * smag
            assert abs(scaled.mean_range - base.mean_range * scale) < 1e-9 * smag
            assert abs(scaled.r_ucl - base.r_ucl * scale) < 1e-9 * smag
            assert scaled.xbar_violations == base.xbar_violations
            assert scaled.r_violations == base.r_violations


def test_known_parameter_false_alarm_rate():
    """With mu +/- 3 sigma/sqrt(n) limits, in-control alarms near 0.0027."""
    rng = np.random.default_rng(424242)
    n = 4
    means = rng.standard_normal((100_000, n)).mean(axis=1)
    limit = 3.0 / math.sqrt(n)
    rate = float(np.mean((means > limit) | (means < -limit)))
    assert 0.0015 <= rate <= 0.0045
