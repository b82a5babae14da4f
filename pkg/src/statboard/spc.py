"""Shewhart X-bar and R control charts over rational subgroups.

Control-chart factors are computed once per subgroup size by numerical
evaluation of the distribution of the range of n standard normal draws:

    d2 = E[R]   from  E[R] = integral of 1 - F(x)^n - (1 - F(x))^n
    d3 = sd(R)  from  E[R^2] via the joint density of (min, max)

from which a2 = 3 / (d2 sqrt(n)), and the R-chart factors
D3 = max(0, 1 - 3 d3/d2) and D4 = 1 + 3 d3/d2. Values agree with the
published factor tables to 3 decimals for n = 2..25.

Boundary convention: a point exactly on a control limit is IN control;
violations require strictly exceeding a limit. This is fixed so chart
output is deterministic and testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy import integrate

MIN_SUBGROUP = 2
MAX_SUBGROUP = 25

_INF = 10.0  # standard normal support is numerically exhausted well inside +/-10


class SpcError(ValueError):
    """Invalid subgroup data or unsupported subgroup size."""


@dataclass(frozen=True)
class ControlConstants:
    n: int
    d2: float
    d3: float
    a2: float
    d3_factor: float
    d4_factor: float


@dataclass(frozen=True)
class SubgroupData:
    samples: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.samples) < 1:
            raise SpcError("need at least 1 subgroup")
        size = len(self.samples[0])
        if size < 2:
            raise SpcError("subgroup size must be >= 2")
        for i, group in enumerate(self.samples):
            if len(group) != size:
                raise SpcError(f"subgroup {i} has size {len(group)}, expected {size}")
            for v in group:
                if not math.isfinite(v):
                    raise SpcError(f"subgroup {i} contains non-finite value {v!r}")

    @property
    def subgroup_size(self) -> int:
        return len(self.samples[0])

    @classmethod
    def from_rows(cls, rows) -> SubgroupData:
        return cls(samples=tuple(tuple(float(v) for v in row) for row in rows))


@dataclass(frozen=True)
class ControlChartResult:
    n: int
    xbar_points: tuple[float, ...]
    r_points: tuple[float, ...]
    grand_mean: float
    mean_range: float
    xbar_lcl: float
    xbar_cl: float
    xbar_ucl: float
    r_lcl: float
    r_cl: float
    r_ucl: float
    xbar_violations: tuple[int, ...]
    r_violations: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "m": len(self.xbar_points),
            "xbar_points": list(self.xbar_points),
            "r_points": list(self.r_points),
            "grand_mean": self.grand_mean,
            "mean_range": self.mean_range,
            "xbar_limits": {"lcl": self.xbar_lcl, "cl": self.xbar_cl, "ucl": self.xbar_ucl},
            "r_limits": {"lcl": self.r_lcl, "cl": self.r_cl, "ucl": self.r_ucl},
            "xbar_violations": list(self.xbar_violations),
            "r_violations": list(self.r_violations),
        }


def _phi(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _mean_range(n: int) -> float:
    def integrand(x):
        f = _cdf(x)
        return 1.0 - f**n - (1.0 - f) ** n

    value, _ = integrate.quad(integrand, -_INF, _INF, limit=200)
    return value


def _second_moment_range(n: int) -> float:
    # E[R^2] over the joint density of (min, max):
    #   n(n-1) f(x) f(y) [F(y) - F(x)]^(n-2),  x < y
    coeff = n * (n - 1)

    def inner(y, x):
        return (y - x) ** 2 * _phi(x) * _phi(y) * (_cdf(y) - _cdf(x)) ** (n - 2)

    value, _ = integrate.dblquad(inner, -_INF, _INF, lambda x: x, _INF, epsabs=1e-10)
    return coeff * value


@lru_cache(maxsize=None)
def control_constants(n: int) -> ControlConstants:
    """Chart factors for subgroup size n (2..25)."""
    if not MIN_SUBGROUP <= n <= MAX_SUBGROUP:
        raise SpcError(f"subgroup size {n} outside supported range {MIN_SUBGROUP}..{MAX_SUBGROUP}")
    d2 = _mean_range(n)
    var = _second_moment_range(n) - d2 * d2
    d3 = math.sqrt(var)
    ratio = 3.0 * d3 / d2
    return ControlConstants(
        n=n,
        d2=d2,
        d3=d3,
        a2=3.0 / (d2 * math.sqrt(n)),
        d3_factor=max(0.0, 1.0 - ratio),
        d4_factor=1.0 + ratio,
    )


def detect_violations(points, lcl: float, ucl: float) -> tuple[int, ...]:
    """Indices of points strictly outside [lcl, ucl]."""
    return tuple(i for i, v in enumerate(points) if v < lcl or v > ucl)


def xbar_r_chart(data: SubgroupData) -> ControlChartResult:
    """Estimated-parameters Shewhart chart: limits computed from the data itself."""
    n = data.subgroup_size
    consts = control_constants(n)
    xbar_points = tuple(math.fsum(g) / n for g in data.samples)
    r_points = tuple(max(g) - min(g) for g in data.samples)
    m = len(data.samples)
    grand_mean = math.fsum(xbar_points) / m
    mean_range = math.fsum(r_points) / m
    half = consts.a2 * mean_range
    xbar_lcl, xbar_ucl = grand_mean - half, grand_mean + half
    r_lcl = consts.d3_factor * mean_range
    r_ucl = consts.d4_factor * mean_range
    return ControlChartResult(
        n=n,
        xbar_points=xbar_points,
        r_points=r_points,
        grand_mean=grand_mean,
        mean_range=mean_range,
        xbar_lcl=xbar_lcl,
        xbar_cl=grand_mean,
        xbar_ucl=xbar_ucl,
        r_lcl=r_lcl,
        r_cl=mean_range,
        r_ucl=r_ucl,
        xbar_violations=detect_violations(xbar_points, xbar_lcl, xbar_ucl),
        r_violations=detect_violations(r_points, r_lcl, r_ucl),
    )
