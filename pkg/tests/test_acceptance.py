"""Acceptance criteria, one test each, at the stated tolerances and time limits.

Each test prints a single ``criterion N: PASS|FAIL`` line (visible even under
captured output) before asserting.
"""
import time

import numpy as np
import pytest

from mahlerlim.experiments import (ExperimentSpec, MatrixFamily, VectorFamily, matrix_convergence,
                                   property_suite, reference_value, run_convergence)
from mahlerlim.laurent import parse
from mahlerlim.measures import (CLASSIC, MeasureKind, QmcConfig, boyd_lawton_estimate, circle_measure,
                                torus_qmc)
from mahlerlim.torushom import TorusHom, base_b_family, boyd_height

from oracles import brute_height

pytestmark = pytest.mark.slow

QMC = QmcConfig(samples=1 << 22, shifts=8, seed=0)


@pytest.fixture
def report(capsys):
    def emit(number, ok, seconds, limit, detail):
        ok = bool(ok) and seconds <= limit
        line = (f"criterion {number}: {'PASS' if ok else 'FAIL'}  "
                f"({seconds:.1f} s of {limit:.0f} s)  {detail}")
        with capsys.disabled():
            print("\n" + line)
        return ok, line
    return emit


def test_criterion_1_classic_linear_3(report):
    ref = reference_value("classic-linear-3")
    p = parse("Z1 + Z2 + Z3 + 1")
    t0 = time.perf_counter()
    bl = boyd_lawton_estimate(CLASSIC, [p], 50)
    qmc = torus_qmc(CLASSIC, [p], QMC)
    secs = time.perf_counter() - t0
    d_bl, d_qmc = abs(bl.value - ref), abs(qmc.value - ref)
    ok, line = report(1, bl.detail["degree"] <= 2551 and d_bl < 1e-2 and d_qmc < 2e-2, secs, 180,
                      f"boyd-lawton b=50 {bl.value:.7f} (dev {d_bl:.2g}, tol 1e-2), "
                      f"qmc {qmc.value:.7f} (dev {d_qmc:.2g}, tol 2e-2), ref {ref:.7f}")
    assert ok, line


def test_criterion_2_prod_z_minus_1(report):
    ref = reference_value("prod-(z-1)^3")
    z = parse("Z1 - 1")
    t0 = time.perf_counter()
    est = circle_measure(MeasureKind.prod(3), [z, z, z])
    secs = time.perf_counter() - t0
    dev = abs(est.value - ref)
    ok, line = report(2, dev < 1e-4, secs, 5, f"circle {est.value:.10f} vs {ref:.10f} (dev {dev:.2g}, tol 1e-4)")
    assert ok, line


def test_criterion_3_prod_linear_2(report):
    ref = reference_value("prod-linear-2")
    q = parse("Z1 + Z2 + 2")
    kind = MeasureKind.prod(3)
    t0 = time.perf_counter()
    qmc = torus_qmc(kind, [q, q, q], QMC)
    recs = matrix_convergence(ExperimentSpec(kind, [q, q, q], MatrixFamily(2), (4, 8, 16), ref, QMC))
    secs = time.perf_counter() - t0
    d_qmc, d_mat = abs(qmc.value - ref), recs[-1].deviation
    ok, line = report(3, d_qmc < 3e-2 and d_mat < 3e-2, secs, 240,
                      f"qmc {qmc.value:.7f} +- {qmc.error_estimate:.1g} (dev {d_qmc:.3g}, tol 3e-2), "
                      f"matrix b=16 {recs[-1].estimate.value:.7f} (dev {d_mat:.3g}, tol 3e-2), ref {ref:.7f}")
    assert ok, line


def test_criterion_4_max_linear_4(report):
    ref = reference_value("max-4-linear")
    lin = [parse(f"Z{i} + 1", 4) for i in range(1, 5)]
    t0 = time.perf_counter()
    est = boyd_lawton_estimate(MeasureKind.max(4), lin, 20)
    secs = time.perf_counter() - t0
    dev = abs(est.value - ref)
    ok, line = report(4, dev < 2e-2, secs, 120,
                      f"boyd-lawton b=20 {est.value:.7f} vs {ref:.7f} (dev {dev:.3g}, tol 2e-2)")
    assert ok, line


def test_criterion_5_height_suite(report):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    base_bad = [(n, m, b) for n in range(2, 5) for m in range(1, 4) for b in range(1, 11)
                if boyd_height(base_b_family(n, m, b)).value != b]
    zero_bad = 0
    for n in range(2, 6):
        for _ in range(10):
            r = [int(x) for x in rng.integers(-20, 21, size=n)]
            r[int(rng.integers(n))] = 0
            zero_bad += boyd_height(TorusHom.column(r)).value != 1
    brute_bad = 0
    for _ in range(200):
        n = int(rng.integers(2, 4))
        m = int(rng.integers(1, n + 1))
        rows = [tuple(int(x) for x in rng.integers(-3, 4, size=m)) for _ in range(n)]
        h = boyd_height(TorusHom(tuple(rows)))
        limit = 4 if h.is_infinite else h.value
        expected = brute_height(rows, limit)
        brute_bad += (expected is not None) if h.is_infinite else expected != h.value
    secs = time.perf_counter() - t0
    ok, line = report(5, not base_bad and not zero_bad and not brute_bad, secs, 30,
                      f"base-b {90 - len(base_bad)}/90, zero-component {40 - zero_bad}/40, "
                      f"brute force {200 - brute_bad}/200")
    assert ok, line


def test_criterion_6_property_suites(report):
    t0 = time.perf_counter()
    results = property_suite(full=True, seed=0)
    secs = time.perf_counter() - t0
    failed = [r.name for r in results if not r.passed]
    ok, line = report(6, not failed, secs, 120,
                      f"{len(results) - len(failed)}/{len(results)} properties hold"
                      + (f"; failed: {', '.join(failed)}" if failed else ""))
    assert ok, line


def test_criterion_7_convergence_trend(report):
    ref = reference_value("classic-linear-2")
    p = parse("Z1 + Z2 + 1")
    t0 = time.perf_counter()
    vec = run_convergence(ExperimentSpec(CLASSIC, [p], VectorFamily(), (5, 10, 20, 40), ref))
    mat = matrix_convergence(ExperimentSpec(CLASSIC, [p], MatrixFamily(2), (5, 10, 20, 40), ref,
                                            QmcConfig(samples=1 << 18, shifts=8, seed=0)))
    secs = time.perf_counter() - t0
    devs = [r.deviation for r in vec]
    trend = devs[-1] <= min(devs[:2])
    v, w = vec[-1].estimate, mat[-1].estimate
    gap = abs(v.value - w.value)
    band = 3 * (v.error_estimate + w.error_estimate) + 1e-2
    ok, line = report(7, trend and gap < band, secs, 60,
                      "vector deviations " + ", ".join(f"{d:.2g}" for d in devs)
                      + f"; |vector - matrix| at b=40 {gap:.2g} (band {band:.2g})")
    assert ok, line
