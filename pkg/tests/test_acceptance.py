"""Acceptance criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -s`` (lines are also repeated in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""
import time
from functools import lru_cache

import numpy as np
import pytest

from frobpencil import cli
from frobpencil import elliptic as ell
from frobpencil.engine import (chart_metric, chart_structure_constants,
                               chart_structure_constants_via_section, fiber_algebra)
from frobpencil.errors import NonSemisimplePoint
from frobpencil.flat import (antidiagonal_reference, c_derivatives, flat_data_at, potentiality_defect,
                             wdvv_tensor_residual)
from frobpencil.model import critical_data, genus0, genus1
from frobpencil.report import dumps
from frobpencil.verify import cech_engine_delta, elliptic_checks, pencil_consistency, suite_passed

RESULTS = []


def _record(num, title, ok, detail, elapsed, limit):
    ok = bool(ok) and (limit is None or elapsed < limit)
    budget = "" if limit is None else f" (limit {limit:.0f} s)"
    line = f"[criterion {num}] {'PASS' if ok else 'FAIL'}  {title}: {detail}; {elapsed:.2f} s{budget}"
    RESULTS.append(line)
    print(line)
    return ok


def _random_genus0(rng, n, scale=0.5):
    while True:
        m = genus0(scale * (rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)), n)
        try:
            critical_data(m)
            return m
        except NonSemisimplePoint:
            continue


# --------------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    rows = []
    for g, n in [(0, 3), (0, 4), (0, 6), (1, 2), (1, 3)]:
        if g == 0:
            m = genus0(np.linspace(0.3, 0.9, n - 1) + 0.2j, n)
        else:
            m = genus1(0.3 + 1.1j, [0.3 - 0.1j] * (n - 2) + [1.0], 0.1, 1.0, 2 + 1j)
        expected = 2 * g + n - 1
        rows.append((len(critical_data(m).points), len(m.chart()), expected))
    ok = all(a == e and b == e for a, b, e in rows)
    return _record(1, "fiber dimension law", ok, f"(critical, chart, 2g+n-1) = {rows}",
                   time.perf_counter() - t0, 1.0)


def criterion_2():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    base = genus0([0.3, -1.0, 0.5 + 0.2j])
    reference = antidiagonal_reference(4)
    eta_dev = pot = wdvv = 0.0
    for _ in range(20):
        pt = base.chart() + 0.3 * (rng.normal(size=3) + 1j * rng.normal(size=3))
        m = genus0(pt)
        # numerically integrated frame, independent of the closed-form coordinates
        _, chart, c = flat_data_at(m, exact_genus0=False)
        eta_dev = max(eta_dev, float(np.max(np.abs(chart.eta - reference))))
        dc = c_derivatives(m)
        pot = max(pot, potentiality_defect(dc) / max(1.0, float(np.max(np.abs(dc)))))
        wdvv = max(wdvv, wdvv_tensor_residual(c, chart.eta) / max(1.0, float(np.max(np.abs(c)))) ** 2)
    ok = eta_dev < 1e-8 and pot < 1e-9 and wdvv < 1e-9
    return _record(2, "genus-0 pipeline (n=4)", ok,
                   f"eta deviation {eta_dev:.2e}, potentiality {pot:.2e}, WDVV {wdvv:.2e}",
                   time.perf_counter() - t0, 5.0)


def criterion_3():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        m = _random_genus0(rng, int(rng.integers(3, 7)))
        worst = max(worst, cech_engine_delta(m, rng)["delta"])
    return _record(3, "Cech cocycle product vs componentwise product", worst < 1e-8,
                   f"max relative gap {worst:.2e} over 50 instances", time.perf_counter() - t0, 30.0)


def criterion_4():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    fit = res = 0.0
    for _ in range(10):
        m = _random_genus0(rng, int(rng.integers(3, 6)))
        rep = pencil_consistency(m)
        fit, res = max(fit, rep.fit_residual), max(res, rep.residue_delta)
    return _record(4, "pencil shape", fit < 1e-6 and res < 1e-6,
                   f"1/z fit residual {fit:.2e}, residue vs Phi {res:.2e}", time.perf_counter() - t0, 60.0)


def criterion_5():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    gap, metric_gap, count = 0.0, np.inf, 0
    while count < 10:
        m = _random_genus0(rng, int(rng.integers(3, 6)))
        crit = critical_data(m)
        FA2, FA3 = fiber_algebra(m, 2, crit), fiber_algebra(m, 3, crit)
        if not (FA2.rho.primitive and FA3.rho.primitive):
            continue
        C2 = chart_structure_constants_via_section(FA2)
        C3 = chart_structure_constants_via_section(FA3)
        direct = chart_structure_constants(FA2)
        scale = max(1.0, float(np.max(np.abs(direct))))
        gap = max(gap, float(np.max(np.abs(C2 - C3))) / scale, float(np.max(np.abs(C2 - direct))) / scale)
        g2, g3 = chart_metric(FA2), chart_metric(FA3)
        metric_gap = min(metric_gap, float(np.max(np.abs(g2 - g3))) / max(1.0, float(np.max(np.abs(g2)))))
        count += 1
    ok = gap < 1e-8 and metric_gap > 1e-3
    return _record(5, "k-independence of the product", ok,
                   f"structure constant gap {gap:.2e}, smallest metric gap {metric_gap:.2e}",
                   time.perf_counter() - t0, 10.0)


def criterion_6():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst = {}
    passed = True
    for _ in range(10):
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.7, 2.0))
        for rec in elliptic_checks(tau, rng, count=100, tol=1e-10):
            worst[rec.name] = max(worst.get(rec.name, 0.0), rec.residual)
            passed &= rec.passed
    detail = ", ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items()))
    return _record(6, "elliptic identities", passed, detail, time.perf_counter() - t0, 10.0)


GENUS1_ARGS = dict(mode="verify", genus=1, n=3, tau=0.3 + 1.1j, Pa=1 + 0j, Pb=2 + 1j, seed=7)


@lru_cache(maxsize=None)
def _genus1_run(tag):
    """Tag distinguishes the two independent runs used by the determinism check."""
    t0 = time.perf_counter()
    report, status = cli.run(cli.RunConfig(**GENUS1_ARGS).validate())
    return report, status, time.perf_counter() - t0


def criterion_7():
    report, status, elapsed = _genus1_run("first")
    checks = {r["name"]: r for r in report["checks"]}
    wanted = ["leaf_periods", "commutativity", "associativity", "unit", "compatibility", "eta_symmetry",
              "eta_nondegenerate", "jumps_vs_levi_civita"]
    missing = [w for w in wanted if w not in checks]
    periods = checks.get("leaf_periods", {}).get("residual", np.inf)
    transport = checks.get("jumps_vs_levi_civita", {}).get("residual", np.inf)
    ok = status == 0 and not missing and periods < 1e-8 and transport < 1e-5
    return _record(7, "genus-1 leaf P=(1, 2+i)", ok,
                   f"{sum(r['passed'] for r in report['checks'])}/{len(report['checks'])} checks, "
                   f"periods {periods:.1e}, jumps vs transport {transport:.1e}"
                   + (f", missing {missing}" if missing else ""), elapsed, 300.0)


def criterion_8():
    t0 = time.perf_counter()
    L = ell.lattice_init(0.3 + 1.1j)
    # Legendre determinant of the period system: eta1*tau - eta2 = 2 pi i, never zero
    det = L.eta1 * L.tau - L.eta2
    cfg = cli.RunConfig(mode="verify", genus=1, n=3, tau=0.3 + 1.1j, seed=8).validate()
    m = cli.default_point(cfg)
    report, status = cli.run(cfg)
    ok = m.alpha == 0 and m.beta == 0 and abs(det) > 1 and status == 0
    return _record(8, "Hurwitz reduction P=(0,0)", ok,
                   f"alpha={m.alpha}, beta={m.beta}, |det|={abs(det):.4f}, "
                   f"{sum(r['passed'] for r in report['checks'])}/{len(report['checks'])} checks",
                   time.perf_counter() - t0, 120.0)


def criterion_9():
    t0 = time.perf_counter()
    cfg = cli.RunConfig(mode="sweep", genus=1, n=3, tau=0.3 + 1.1j, grid="Pa=0:1:5;Pb=0:2+1i:5",
                        seed=9, tol=1e-5).validate()
    report, status = cli.run(cfg)
    cells = report["artifacts"].get("cells", [])
    lip = report["artifacts"].get("lipschitz_bound", np.inf)
    ok = status == 0 and len(cells) == 25 and all(c["passed"] for c in cells) and np.isfinite(lip)
    return _record(9, "5x5 period sweep", ok,
                   f"{sum(c['passed'] for c in cells)}/25 cells pass, Lipschitz bound {lip:.3g}",
                   time.perf_counter() - t0, 1200.0)


def criterion_10():
    a, _, ta = _genus1_run("first")
    b, _, tb = _genus1_run("second")
    same = dumps(a) == dumps(b)
    return _record(10, "determinism", same, f"byte-identical reports: {same} ({len(dumps(a))} bytes)",
                   ta + tb, None)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i + 1}" for i in range(len(CRITERIA))])
def test_acceptance(criterion):
    assert criterion()


if __name__ == "__main__":
    outcomes = [c() for c in CRITERIA]
    print(f"{sum(outcomes)}/{len(outcomes)} acceptance criteria pass")
    raise SystemExit(0 if all(outcomes) else 1)
