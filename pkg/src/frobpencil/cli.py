"""Command line: compute | verify | sweep | oracle.

Settings come from defaults, then an optional ``key = value`` config file,
then command-line flags. The report is canonical JSON; exit status is 0 when
every check passes, 1 when any check fails and 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .engine import chart_structure_constants, fiber_algebra, unit_field
from .errors import ConfigError, FrobPencilError
from .flat import (flat_data_at, potential, potential_by_paths,
                   wdvv_residual, wdvv_tensor_residual)
from .model import AbelianIntegral, critical_data, genus0, genus1
from .report import SCHEMA_VERSION, dumps, format_complex, parse_complex
from .verify import (THRESHOLDS, Z_SAMPLES, CheckRecord, axiom_suite, cech_engine_delta, check,
                     elliptic_checks, jumps_flatness_check, pencil_consistency, suite_passed)

MODES = ("compute", "verify", "sweep", "oracle")
EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    mode: str = "compute"
    genus: int = 0
    n: int = 4
    k: int = 2
    coeffs: Optional[Tuple[complex, ...]] = None
    gamma: Optional[Tuple[complex, ...]] = None
    c0: complex = 0.1 + 0j
    tau: complex = 0.3 + 1.1j
    Pa: complex = 0j
    Pb: complex = 0j
    grid: str = "Pa=0:1:5;Pb=0:2+1i:5"
    seed: int = 0
    tol: Optional[float] = None
    samples: int = 10
    out: Optional[str] = None

    def validate(self) -> "RunConfig":
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.genus not in (0, 1):
            raise ConfigError("genus must be 0 or 1")
        if self.n < 2 or self.n > 64:
            raise ConfigError("n out of range")
        if not 2 <= self.k <= self.n:
            raise ConfigError("k must satisfy 2 <= k <= n")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("tolerances must be positive")
        if self.samples < 1:
            raise ConfigError("samples must be positive")
        if self.genus == 0 and self.coeffs is not None and len(self.coeffs) != self.n - 1:
            raise ConfigError(f"genus 0 needs n-1 = {self.n - 1} coefficients")
        if self.genus == 1:
            if self.tau.imag <= 0:
                raise ConfigError("tau must lie in the upper half plane")
            if self.gamma is not None and len(self.gamma) != self.n - 1:
                raise ConfigError(f"genus 1 needs n-1 = {self.n - 1} gamma coefficients")
        if self.mode == "sweep":
            parse_grid(self.grid)
        return self


_FIELD_TYPES = {"genus": int, "n": int, "k": int, "seed": int, "samples": int, "tol": float,
                "c0": complex, "tau": complex, "Pa": complex, "Pb": complex,
                "coeffs": tuple, "gamma": tuple, "grid": str, "out": str, "mode": str}


def _convert(key: str, value):
    kind = _FIELD_TYPES.get(key)
    if kind is None:
        raise ConfigError(f"unknown setting {key!r}")
    if value is None or not isinstance(value, str):
        return value
    try:
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
        if kind is complex:
            return parse_complex(value)
        if kind is tuple:
            return tuple(parse_complex(v) for v in value.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value.strip()


def read_config_file(path: str) -> Dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def parse_grid(spec: str) -> Dict[str, np.ndarray]:
    """``Pa=0:1:5;Pb=0:2+1i:5`` (or ``tau=...``): linear complex ranges per axis."""
    axes = {}
    for part in filter(None, (p.strip() for p in spec.split(";"))):
        if "=" not in part:
            raise ConfigError(f"grid axis {part!r} needs name=start:stop:count")
        name, rng = (s.strip() for s in part.split("=", 1))
        if name not in ("Pa", "Pb", "tau"):
            raise ConfigError(f"grid axis must be Pa, Pb or tau, got {name!r}")
        bits = rng.split(":")
        if len(bits) != 3:
            raise ConfigError(f"grid axis {name} needs start:stop:count")
        try:
            count = int(bits[2])
        except ValueError as exc:
            raise ConfigError(f"grid count for {name} must be an integer") from exc
        if count < 1:
            raise ConfigError("grid specs must be nonempty")
        axes[name] = np.linspace(parse_complex(bits[0]), parse_complex(bits[1]), count)
    if not axes:
        raise ConfigError("grid specs must be nonempty")
    return axes


def build_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in _FIELD_TYPES:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    values["mode"] = args.mode
    converted = {k: _convert(k, v) for k, v in values.items()}
    return RunConfig(**converted).validate()


# --------------------------------------------------------------------------
# model construction

def default_point(cfg: RunConfig) -> AbelianIntegral:
    """Model from the config; unspecified moduli are drawn from the seed."""
    rng = np.random.default_rng(cfg.seed)
    if cfg.genus == 0:
        coeffs = cfg.coeffs
        if coeffs is None:
            coeffs = tuple(0.5 * (rng.normal(size=cfg.n - 1) + 1j * rng.normal(size=cfg.n - 1)))
        return genus0(coeffs, cfg.n)
    gamma = cfg.gamma
    if gamma is None:
        lower = 0.4 * (rng.normal(size=cfg.n - 2) + 1j * rng.normal(size=cfg.n - 2))
        gamma = tuple(lower) + (1.0 + 0j,)
    return genus1(cfg.tau, gamma, cfg.c0, cfg.Pa, cfg.Pb)


def _thresholds(cfg: RunConfig) -> Optional[dict]:
    return None if cfg.tol is None else {"default": cfg.tol}


def _failure(exc: Exception) -> CheckRecord:
    return CheckRecord(type(exc).__name__, float("inf"), 0.0, False, str(exc))


def _critical_block(m: AbelianIntegral) -> dict:
    crit = critical_data(m)
    return {"points": crit.points, "values": crit.values, "omega_derivative": crit.omega_deriv}


# --------------------------------------------------------------------------
# modes

def run_compute(cfg: RunConfig, m: AbelianIntegral):
    checks: List[CheckRecord] = []
    art: dict = {}
    thr = THRESHOLDS[m.genus]
    crit = critical_data(m)
    checks.append(check("critical_count", abs(len(crit.points) - m.dimension), 0.0))
    art["critical"] = _critical_block(m)
    FA, chart, c = flat_data_at(m, cfg.k, exact_genus0=(m.genus == 0 and cfg.k == 2))
    art["eta_flat"] = chart.eta
    art["structure_constants"] = c
    art["unit_flat"] = chart.jacobian @ unit_field(FA).chart
    scale = max(1.0, float(np.max(np.abs(c)))) ** 2
    checks.append(check("wdvv", wdvv_tensor_residual(c, chart.eta) / scale, cfg.tol or thr["wdvv"]))
    if m.genus == 0 and cfg.k == 2:
        art["flat_coordinates"] = chart.coords
        rng = np.random.default_rng(cfg.seed)
        base = m.chart()
        family = [base + 0.3 * (rng.normal(size=len(base)) + 1j * rng.normal(size=len(base)))
                  for _ in range(max(cfg.samples, 2 * m.dimension))]
        fit = potential(m, family, cfg.k)
        art["potential"] = {"coefficients": [[list(mo), cf] for mo, cf in sorted(fit.coefficients.items())],
                            "fit_residual": fit.fit_residual}
        checks.append(check("potentiality", fit.potentiality_defect, cfg.tol or thr["potentiality"]))
        checks.append(check("potential_fit", fit.fit_residual, cfg.tol or thr["default"]))
        checks.append(check("wdvv_on_family", wdvv_residual(fit), cfg.tol or thr["wdvv"]))
    else:
        fit = potential_by_paths(m, cfg.k)
        art["flat_coordinates"] = {"base": chart.coords, "corner": fit.grid_values["corner_coords"]}
        art["potential"] = {"F": fit.grid_values["F"], "dF": fit.grid_values["dF"],
                            "d2F": fit.grid_values["d2F"], "path_closure": fit.closure_defect}
        checks.append(check("potentiality", fit.potentiality_defect, cfg.tol or thr["potentiality"]))
        checks.append(check("potential_path_closure", fit.closure_defect, cfg.tol or thr["default"]))
    return checks, art


def run_verify(cfg: RunConfig, m: AbelianIntegral):
    checks = axiom_suite(m, cfg.k, cfg.seed, thresholds=_thresholds(cfg), with_curvature=(m.genus == 1))
    art: dict = {}
    if any(np.isinf(r.residual) for r in checks):
        return checks, art
    rng = np.random.default_rng(cfg.seed + 1)
    tol = cfg.tol or THRESHOLDS[m.genus]["default"]
    if m.genus == 0:
        rep = pencil_consistency(m)
        checks.append(check("pencil_fit_residual", rep.fit_residual, 1e-6))
        checks.append(check("pencil_residue_vs_phi", rep.residue_delta, 1e-6))
        d = cech_engine_delta(m, rng, trials=5)
        checks.append(check("cech_oracle_vs_engine", d["delta"], 1e-8))
        checks.append(check("cech_cocycle_relation", d["cocycle_defect"], 1e-9))
    else:
        N = m.dimension
        direction = np.zeros(N, complex)
        direction[1:] = 0.02 * (rng.normal(size=N - 1) + 1j * rng.normal(size=N - 1))
        invariants = rng.normal(size=N) + 1j * rng.normal(size=N)
        rep = jumps_flatness_check(m, direction, invariants, cfg.k)
        checks.append(check("jumps_relation", rep.max_jump_defect, 1e-8))
        checks.append(check("jumps_vs_flat_frame", rep.route_delta_flat, tol))
        checks.append(check("jumps_vs_levi_civita", rep.route_delta_levi_civita, tol))
        art["jumps"] = {"direction": direction, "invariants": invariants}
    return checks, art


def _sweep_cell(args):
    cfg, overrides = args
    cell = replace(cfg, **overrides)
    m = default_point(cell)
    try:
        recs = axiom_suite(m, cfg.k, cfg.seed, thresholds=_thresholds(cfg))
        FA = fiber_algebra(m, cfg.k)
        C = chart_structure_constants(FA)
    except FrobPencilError as exc:
        return [_failure(exc)], None, m
    return recs, C, m


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("FROBPENCIL_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(cfg: RunConfig, m: AbelianIntegral):
    if cfg.genus != 1:
        raise ConfigError("sweep varies periods or tau and needs genus 1")
    axes = parse_grid(cfg.grid)
    names = sorted(axes)
    shape = tuple(len(axes[a]) for a in names)
    # fix the seeded moduli so every cell shares the same gamma and c0
    cfg = replace(cfg, gamma=tuple(m.gamma), c0=m.c0)
    cells = [dict(zip(names, (axes[a][i] for a, i in zip(names, idx)))) for idx in np.ndindex(*shape)]
    jobs = [(cfg, c) for c in cells]
    workers = min(_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, jobs))
    else:
        results = [_sweep_cell(j) for j in jobs]
    checks: List[CheckRecord] = []
    records = []
    fields = {}
    for idx, cell, (recs, C, mm) in zip(np.ndindex(*shape), cells, results):
        ok = suite_passed(recs)
        label = ",".join(f"{k}={format_complex(v)}" for k, v in sorted(cell.items()))
        worst = max((r.residual for r in recs if not r.name.endswith("nondegenerate")
                     and not r.name.startswith("metrics_differ")), default=0.0)
        checks.append(CheckRecord(f"suite[{label}]", worst, cfg.tol or THRESHOLDS[1]["default"], ok,
                                  "; ".join(r.name for r in recs if not r.passed)))
        records.append({"cell": {k: v for k, v in cell.items()}, "alpha": mm.alpha, "beta": mm.beta,
                        "passed": ok, "structure_constants": C})
        fields[idx] = C
    # finite-difference Lipschitz bound of the structure constants between grid neighbours
    lip = 0.0
    for idx, C in fields.items():
        for ax in range(len(shape)):
            nb = list(idx)
            nb[ax] += 1
            nb = tuple(nb)
            if C is None or nb not in fields or fields[nb] is None:
                continue
            step = abs(axes[names[ax]][nb[ax]] - axes[names[ax]][idx[ax]])
            if step > 0:
                lip = max(lip, float(np.max(np.abs(fields[nb] - C))) / step)
    art = {"grid": {a: axes[a] for a in names}, "cells": records, "lipschitz_bound": lip}
    checks.append(check("structure_constants_lipschitz_finite", lip, float("inf")))
    return checks, art


def run_oracle(cfg: RunConfig, m: AbelianIntegral):
    rng = np.random.default_rng(cfg.seed)
    checks: List[CheckRecord] = []
    art: dict = {}
    if m.genus == 0:
        worst, cocycle = 0.0, 0.0
        for _ in range(cfg.samples):
            n = int(rng.integers(3, 7))
            inst = genus0(0.5 * (rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)), n)
            try:
                d = cech_engine_delta(inst, rng)
            except FrobPencilError as exc:
                checks.append(_failure(exc))
                continue
            worst = max(worst, d["delta"])
            cocycle = max(cocycle, d["cocycle_defect"])
        checks.append(check("cech_oracle_vs_engine", worst, cfg.tol or 1e-8, f"{cfg.samples} instances"))
        checks.append(check("cech_cocycle_relation", cocycle, 1e-9))
        rep = pencil_consistency(m)
        checks.append(check("pencil_fit_residual", rep.fit_residual, 1e-6))
        checks.append(check("pencil_residue_vs_phi", rep.residue_delta, 1e-6))
        art["pencil"] = {"z_samples": list(rep.z_samples), "B": rep.B}
    else:
        checks.extend(elliptic_checks(m.tau, rng, count=100, tol=cfg.tol or 1e-10))
        L = m.lattice
        art["lattice"] = {"g2": L.g2, "g3": L.g3, "eta1": L.eta1, "eta2": L.eta2}
    return checks, art


RUNNERS = {"compute": run_compute, "verify": run_verify, "sweep": run_sweep, "oracle": run_oracle}


def conventions(m: Optional[AbelianIntegral]) -> dict:
    return {
        "branch": "critical values along the straight path from the base point; "
                  "critical points lifted to the standard period parallelogram",
        "root_branch": "x = f^(-1/n) with principal branch on gamma_{n-1} (genus 1) or on the monic "
                       "leading term (genus 0)",
        "basepoint": "(1+tau)/2 at genus 1; f normalized monic and depressed at genus 0",
        "z_samples": list(Z_SAMPLES),
        "normalizations": "a-cycle [0,1]; metric from rho_k with unit scalar; eta = sum rho^2/omega'",
    }


def run(cfg: RunConfig) -> Tuple[dict, int]:
    """Execute the configured pipeline; returns (report, exit status)."""
    m = None
    checks: List[CheckRecord] = []
    art: dict = {}
    try:
        m = default_point(cfg)
        checks, art = RUNNERS[cfg.mode](cfg, m)
    except ConfigError:
        raise
    except FrobPencilError as exc:
        checks.append(_failure(exc))
    except (ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        checks.append(_failure(exc))
    echo = {k: v for k, v in asdict(cfg).items() if k != "out"}
    if m is not None:
        echo["chart"] = m.chart()
        echo["chart_names"] = m.chart_names()
    report = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "config": echo,
        "conventions": conventions(m),
        "checks": [asdict(r) for r in checks],
        "artifacts": art,
        "passed": bool(checks) and suite_passed(checks),
    }
    return report, EXIT_OK if report["passed"] else EXIT_FAILED


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frobpencil",
                                     description="Frobenius structures on spaces of abelian integrals")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--genus", type=str)
        p.add_argument("--n", type=str)
        p.add_argument("--k", type=str)
        p.add_argument("--coeffs", help="genus 0: a_0,...,a_{n-2}")
        p.add_argument("--gamma", help="genus 1: gamma_1,...,gamma_{n-1}")
        p.add_argument("--c0", help="genus 1: value of f at the base point")
        p.add_argument("--tau")
        p.add_argument("--Pa")
        p.add_argument("--Pb")
        p.add_argument("--grid", help="sweep axes, e.g. 'Pa=0:1:5;Pb=0:2+1i:5'")
        p.add_argument("--seed", type=str)
        p.add_argument("--tol", type=str)
        p.add_argument("--samples", type=str)
        p.add_argument("--out")
    return parser


def _summary(report: dict, out) -> None:
    for r in report["checks"]:
        flag = "PASS" if r["passed"] else "FAIL"
        print(f"{flag}  {r['name']}  residual={r['residual']:.3e}  threshold={r['threshold']:.1e}", file=out)
    print(f"{'passed' if report['passed'] else 'FAILED'}: {sum(r['passed'] for r in report['checks'])}"
          f"/{len(report['checks'])} checks", file=out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        report, status = run(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = dumps(report)
    if cfg.out:
        try:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"configuration error: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        _summary(report, sys.stdout)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
