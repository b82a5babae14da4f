"""Acceptance suite: every numbered criterion at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion (a failed assertion surfaces as the pytest failure for that
criterion instead).
"""

import json
import math
import threading
import time
from collections import Counter

import numpy as np
from fastapi.testclient import TestClient

from statboard import survey
from statboard.cli import main as cli_main
from statboard.defaults import import_default
from statboard.descriptive import cross_tab, frequency_table, summary_stats
from statboard.charts import render_chart_svg
from statboard.notify import CaptureTransport, Notifier
from statboard.pca import DataMatrix, eigen_sym, pca
from statboard.report import ReportEngine, serialize_report
from statboard.service import ServiceConfig, create_app
from statboard.spc import SubgroupData, control_constants, xbar_r_chart
from statboard.store import Store


def ok(criterion: str, detail: str = ""):
    print(f"ACCEPTANCE PASS {criterion}" + (f" ({detail})" if detail else ""))


def test_criterion_1_spc_constants_monte_carlo():
    started = time.monotonic()
    rng = np.random.default_rng(112263)

    ranges2 = np.ptp(rng.standard_normal((1_000_000, 2)), axis=1)
    d2_2_mc = float(ranges2.mean())
    assert abs(d2_2_mc - 1.128) < 0.01

    ranges4 = np.ptp(rng.standard_normal((1_000_000, 4)), axis=1)
    d2_4_mc = float(ranges4.mean())
    d3_4_mc = float(ranges4.std(ddof=1))
    assert abs(d2_4_mc - 2.059) < 0.01
    a2_4_mc = 3.0 / (d2_4_mc * math.sqrt(4))
    assert abs(a2_4_mc - 0.729) < 0.01
    d4_4_mc = 1.0 + 3.0 * d3_4_mc / d2_4_mc
    assert abs(d4_4_mc - 2.282) < 0.01

    c2, c4 = control_constants(2), control_constants(4)
    assert abs(c2.d2 - d2_2_mc) < 0.01
    assert abs(c4.d2 - d2_4_mc) < 0.01
    assert abs(c4.a2 - a2_4_mc) < 0.01
    assert abs(c4.d4_factor - d4_4_mc) < 0.01
    assert c4.d3_factor == 0.0

    elapsed = time.monotonic() - started
    assert elapsed < 30.0
    ok("1: SPC constants vs 1e6-subgroup Monte Carlo", f"{elapsed:.1f}s")


def test_criterion_2_spc_equivariance_and_false_alarm():
    rng = np.random.default_rng(31337)
    for _ in range(100):
        m = int(rng.integers(5, 30))
        n = int(rng.integers(2, 9))
        rows = rng.normal(rng.uniform(-50, 50), rng.uniform(0.5, 5), size=(m, n))
        shift = float(rng.uniform(-100, 100))
        scale = float(rng.uniform(0.1, 10))
        base = xbar_r_chart(SubgroupData.from_rows(rows.tolist()))
        mag = max(1.0, abs(base.grand_mean), abs(shift), base.mean_range)

        shifted = xbar_r_chart(SubgroupData.from_rows((rows + shift).tolist()))
        assert abs(shifted.grand_mean - (base.grand_mean + shift)) < 1e-9 * mag
        assert abs(shifted.xbar_ucl - (base.xbar_ucl + shift)) < 1e-9 * mag
        assert abs(shifted.xbar_lcl - (base.xbar_lcl + shift)) < 1e-9 * mag
        assert max(abs(a - b) for a, b in zip(shifted.r_points, base.r_points)) < 1e-9 * mag
        assert abs(shifted.r_ucl - base.r_ucl) < 1e-9 * mag
        assert shifted.xbar_violations == base.xbar_violations
        assert shifted.r_violations == base.r_violations

        scaled = xbar_r_chart(SubgroupData.from_rows((rows * scale).tolist()))
        smag = mag * max(scale, 1.0)
        assert abs(scaled.grand_mean - base.grand_mean * scale) < 1e-9 * smag
        assert abs(scaled.xbar_ucl - base.xbar_ucl * scale) < 1e-9 * smag
        assert abs(scaled.xbar_lcl - base.xbar_lcl * scale) < 1e-9 * smag
        assert abs(scaled.mean_range - base.mean_range * scale) < 1e-9 * smag
        assert abs(scaled.r_ucl - base.r_ucl * scale) < 1e-9 * smag
        assert scaled.xbar_violations == base.xbar_violations
        assert scaled.r_violations == base.r_violations

    # known-parameter limits mu +/- 3 sigma / sqrt(n), in-control data
    rng = np.random.default_rng(424242)
    means = rng.standard_normal((100_000, 4)).mean(axis=1)
    limit = 3.0 / math.sqrt(4)
    rate = float(np.mean((means > limit) | (means < -limit)))
    assert 0.0015 <= rate <= 0.0045
    ok("2: SPC equivariance over 100 datasets + false-alarm rate", f"rate={rate:.4f}")


def test_criterion_3_pca_identities():
    rng = np.random.default_rng(20260810)
    for _ in range(200):
        p = int(rng.integers(2, 9))
        m = rng.normal(size=(p, p)) * float(rng.uniform(0.1, 50))
        m = (m + m.T) / 2.0
        norm = float(np.linalg.norm(m, "fro")) or 1.0
        vals, vecs = eigen_sym(m)
        for k in range(p):
            residual = np.max(np.abs(m @ vecs[:, k] - vals[k] * vecs[:, k]))
            assert residual <= 1e-8 * norm
        assert np.max(np.abs(vecs @ np.diag(vals) @ vecs.T - m)) <= 1e-8 * norm
        assert abs(float(vals.sum()) - float(np.trace(m))) <= 1e-9 * max(norm, 1.0)
        assert np.max(np.abs(vecs.T @ vecs - np.eye(p))) <= 1e-9

        n_obs = int(rng.integers(p + 2, 40))
        data = DataMatrix.from_rows(
            [f"v{j}" for j in range(p)], rng.normal(size=(n_obs, p))
        )
        result = pca(data, "covariance")
        analyzed_trace = float(np.trace(np.cov(data.values, rowvar=False, ddof=1)))
        assert abs(float(result.eigenvalues.sum()) - analyzed_trace) <= 1e-9 * abs(analyzed_trace)
        assert np.max(np.abs(result.loadings.T @ result.loadings - np.eye(p))) <= 1e-9
        score_cov = np.cov(result.scores, rowvar=False, ddof=1)
        assert np.max(np.abs(score_cov - np.diag(result.eigenvalues))) <= 1e-8

    for a, b, c in [(2.0, 1.0, 2.0), (4.0, 1.5, 1.0), (0.0, 2.0, 0.0), (-1.0, 0.25, -2.0)]:
        vals, _ = eigen_sym(np.array([[a, b], [b, c]]))
        disc = math.sqrt((a - c) ** 2 + 4 * b * b)
        assert abs(vals[0] - (a + c + disc) / 2) <= 1e-12
        assert abs(vals[1] - (a + c - disc) / 2) <= 1e-12
    ok("3: PCA identities over 200 seeded matrices + closed-form 2x2")


def test_criterion_4_descriptive_oracle_equivalence():
    rng = np.random.default_rng(40404)
    checked = 0
    for _ in range(1000):
        xs = rng.normal(rng.uniform(-100, 100), rng.uniform(0.01, 20),
                        size=int(rng.integers(2, 80)))
        s = summary_stats(xs.tolist())
        scale = max(1.0, float(np.max(np.abs(xs))))
        assert abs(s.mean - float(np.mean(xs))) < 1e-9 * scale
        assert abs(s.sd - float(np.std(xs, ddof=1))) < 1e-9 * scale
        for got, p in ((s.q1, 0.25), (s.median, 0.5), (s.q3, 0.75)):
            assert abs(got - float(np.quantile(xs, p))) < 1e-9 * scale
        assert s.min == float(xs.min()) and s.max == float(xs.max())

        cats = [int(v) for v in rng.integers(0, 6, size=int(rng.integers(0, 50)))]
        ft = frequency_table(cats)
        assert dict(zip(ft.categories, ft.counts)) == dict(Counter(cats))
        if ft.total:
            assert abs(sum(ft.proportions) - 1.0) < 1e-12

        pairs = [(int(a), int(b)) for a, b in
                 zip(rng.integers(0, 4, size=30), rng.integers(0, 3, size=30))]
        ct = cross_tab(pairs)
        brute: dict = {}
        for a, b in pairs:
            brute[(a, b)] = brute.get((a, b), 0) + 1
        for i, r in enumerate(ct.row_categories):
            for j, col in enumerate(ct.col_categories):
                assert ct.cells[i][j] == brute.get((r, col), 0)
        assert ct.total == 30
        checked += 1
    assert checked == 1000
    ok("4: descriptive stats vs brute-force oracles on 1000 seeded inputs")


def test_criterion_5_end_to_end_reproduction(tmp_path):
    started = time.monotonic()
    store_dir = str(tmp_path / "store")
    assert cli_main(["--store", store_dir, "import-default", "event"]) == 0
    assert cli_main(["--store", store_dir, "import-default", "spc"]) == 0
    assert cli_main(["--store", store_dir, "import-default", "pca"]) == 0

    store = Store(store_dir)
    assert len(store.load_questionnaire("event").questions) == 11

    engine = ReportEngine(store)
    spc_block = engine.get_report("spc-report").blocks[0]
    assert spc_block["status"] == "ok"
    assert len(spc_block["result"]["xbar_points"]) == 40
    limits = spc_block["result"]["xbar_limits"]
    assert abs((limits["ucl"] - limits["cl"]) - (limits["cl"] - limits["lcl"])) < 1e-10
    assert spc_block["charts"]["xbar"].count('class="pt"') == 40

    pca_block = engine.get_report("pca-report").blocks[0]
    assert pca_block["status"] == "ok"
    assert len(pca_block["result"]["eigenvalues"]) == 4
    assert abs(sum(pca_block["result"]["explained"]) - 1.0) < 1e-9

    client = TestClient(create_app(ServiceConfig(store_root=store_dir, transport="disabled"),
                                   store=store))
    raws, records = survey.issue_tokens(1, 0)
    store.record_tokens("event", records)
    session = client.post("/api/auth", json={"token": raws[0]}).json()["session"]
    answers = {f"q{i}": ((i * 2) % 5) + 1 for i in range(1, 12)}
    post = client.post("/api/questionnaires/event/responses", json={"answers": answers},
                       headers={"Authorization": f"Bearer {session}"})
    assert post.status_code == 201 and post.json()["version"] == 1
    report = client.get("/api/questionnaires/event/report",
                        headers={"Authorization": f"Bearer {session}"}).json()
    assert report["data_version"] == 1  # read-your-writes
    assert report["blocks"][0]["result"]["table"]["counts"][answers["q1"] - 1] == 1

    elapsed = time.monotonic() - started
    assert elapsed < 5.0
    ok("5: end-to-end demo reproduction", f"{elapsed:.2f}s")


def test_criterion_6_token_lifecycle_concurrent(tmp_path, likert_questionnaire):
    store = Store(tmp_path / "store")
    store.store_questionnaire(likert_questionnaire)
    raws, records = survey.issue_tokens(165, 0)
    store.record_tokens("event", records)

    successes = Counter()
    lock = threading.Lock()
    barrier = threading.Barrier(16)

    def worker(worker_id: int):
        barrier.wait()
        for i, raw in enumerate(raws):
            # every worker races for every token
            try:
                store.redeem_token(raw, "event")
            except survey.TokenError:
                continue
            with lock:
                successes[i] += 1

    threads = [threading.Thread(target=worker, args=(w,)) for w in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    assert sum(successes.values()) == 165
    assert all(successes[i] == 1 for i in range(165))

    blobs = [p.read_bytes() for p in store.root.rglob("*") if p.is_file()]
    for raw in raws:
        needle = raw.encode()
        assert not any(needle in blob for blob in blobs)
    ok("6: 165 tokens redeem exactly once under 16-way stress; no raw token on disk")


def test_criterion_7_notification_counts_and_outage(tmp_path):
    root = tmp_path / "store"
    store = Store(root)
    import_default(store, "event")
    transport = CaptureTransport()
    notifier = Notifier(transport, max_queue=2048, backoff=0.001)
    client = TestClient(create_app(ServiceConfig(store_root=root, transport="capture"),
                                   store=store, notifier=notifier))

    raws, records = survey.issue_tokens(500, 0)
    store.record_tokens("event", records)
    answers = {f"q{i}": 3 for i in range(1, 12)}
    accepted = 0
    for raw in raws:
        session = client.post("/api/auth", json={"token": raw}).json()["session"]
        response = client.post("/api/questionnaires/event/responses",
                               json={"answers": answers},
                               headers={"Authorization": f"Bearer {session}"})
        assert response.status_code == 201
        accepted += 1
    notifier.drain(timeout=30.0)
    assert accepted == 500
    assert len(transport.messages) == 500
    notifier.close()

    # transport outage never changes an HTTP status
    class DeadTransport:
        def send(self, notification):
            raise ConnectionError("down")

    dead_notifier = Notifier(DeadTransport(), attempts=2, backoff=0.001)
    dead_client = TestClient(create_app(ServiceConfig(store_root=root, transport="capture"),
                                        store=store, notifier=dead_notifier))
    extra, extra_records = survey.issue_tokens(3, 0)
    store.record_tokens("event", extra_records)
    for raw in extra:
        session = dead_client.post("/api/auth", json={"token": raw}).json()["session"]
        response = dead_client.post("/api/questionnaires/event/responses",
                                    json={"answers": answers},
                                    headers={"Authorization": f"Bearer {session}"})
        assert response.status_code == 201
    dead_notifier.drain()
    assert dead_notifier.stats.failed == 3
    dead_notifier.close()
    ok("7: capture count == accepted count over 500 submissions; outage changes no status")


def test_criterion_8_determinism(tmp_path):
    store = Store(tmp_path / "store")
    import_default(store, "event")
    import_default(store, "spc")
    import_default(store, "pca")
    answers = [{f"q{i}": ((i + k) % 5) + 1 for i in range(1, 12)} for k in range(5)]
    for k, a in enumerate(answers):
        store.append_response("event", survey.ResponseRecord(
            questionnaire_id="event", token_fingerprint=f"fp{k}", answers=a,
            submitted_at=f"2026-08-10T03:00:{k:02d}.000000Z",
        ))

    for spec_id in ("event-report", "spc-report", "pca-report"):
        first = serialize_report(ReportEngine(store).compose_at(spec_id))
        second = serialize_report(ReportEngine(store).compose_at(spec_id))
        assert first.encode() == second.encode()

    rng = np.random.default_rng(88)
    chart_result = xbar_r_chart(SubgroupData.from_rows(rng.normal(5, 1, (40, 4)).tolist()))
    assert render_chart_svg("xbar_r", chart_result) == render_chart_svg("xbar_r", chart_result)
    pca_result = pca(DataMatrix.from_rows(list("abcd"), rng.normal(size=(21, 4))))
    assert render_chart_svg("pca", pca_result) == render_chart_svg("pca", pca_result)
    ok("8: report serialization and SVG rendering byte-identical across runs")
