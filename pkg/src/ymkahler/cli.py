"""Experiment orchestration: `ymk check | spectrum | deform | flow | cutoff
| continuity | gap`.

Configuration is a flat key = value text file with dotted section keys
(see DEFAULTS below); every record echoes the fully resolved config, so a
run is reproducible from its own output.  Records are JSONL, plot data is
CSV, field snapshots use the YMK1 binary format.  The environment
variable YMK_THREADS bounds the gap worker pool.

Exit codes: 0 ok, 1 check-suite failure, 2 config/usage error,
3 near-reducible connection, 4 no contraction, 5 solver stagnation.
"""
from __future__ import annotations

import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import io as ymio
from .algebra import group
from .checks import run_identity_suite
from .deform import (
    DeformConfig,
    FlowConfig,
    deform_to_trace_free,
    harmonicity_report,
    ym_gradient_flow,
)
from .errors import (
    NearReducible,
    NoContraction,
    SolverStagnation,
    StepRejectionLimit,
    UnresolvableCutoff,
    UsageError,
    YmkError,
)
from .gauge import Connection, random_connection
from .lattice import CutoffProfile, Torus4, cutoff_beta, radial_cutoff_norms
from .spectral import SpectralConfig, continuity_sweep, lambda_A, mu_A

EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NEAR_REDUCIBLE = 3
EXIT_NO_CONTRACTION = 4
EXIT_STAGNATION = 5

DEFAULTS = {
    "grid.n": 8,
    "group": "su2",
    "seed": 7,
    "amplitude": 0.05,
    "smoothness": 2,
    "spectral.tol": 1e-8,
    "spectral.max_iter": 400,
    "spectral.cg_tol": 1e-10,
    "spectral.cg_max_iter": 800,
    "spectral.restarts": 8,
    "spectral.lambda_floor": 1e-3,
    "deform.mode": "residual",
    "deform.tol": 1e-8,
    "deform.max_outer": 60,
    "deform.rho_max": 0.5,
    "flow.dt": 0.0,
    "flow.max_steps": 200000,
    "flow.grad_tol": 1e-6,
    "cutoff.ratios": [4.0, 16.0, 64.0],
    "cutoff.radius": 0.25,
    "continuity.amplitudes": [0.01, 0.02, 0.04, 0.08, 0.16, 0.32],
    "continuity.base_amplitude": 0.3,
    "continuity.direction_seed": 101,
    "gap.seeds": [1, 2, 3],
    "gap.amplitudes": [0.0, 0.05, 0.1],
    "gap.grad_tol": 1e-5,
    "check.corrupt": False,
}


def _as_list(v):
    return v if isinstance(v, list) else [v]


def _parse_value(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if "," in text:
        return [_parse_value(t) for t in text.split(",") if t.strip()]
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def load_config(path: str | None, seed: int | None = None) -> dict:
    cfg = dict(DEFAULTS)
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise UsageError(f"config file not found: {path}")
        for lineno, line in enumerate(p.read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            cfg[key] = _parse_value(val)
    if seed is not None:
        cfg["seed"] = int(seed)
    return cfg


def _spectral_config(cfg: dict) -> SpectralConfig:
    return SpectralConfig(
        tol=float(cfg["spectral.tol"]),
        max_iter=int(cfg["spectral.max_iter"]),
        cg_tol=float(cfg["spectral.cg_tol"]),
        cg_max_iter=int(cfg["spectral.cg_max_iter"]),
        restarts=int(cfg["spectral.restarts"]),
        lambda_floor=float(cfg["spectral.lambda_floor"]),
        seed=int(cfg["seed"]),
    )


def _deform_config(cfg: dict) -> DeformConfig:
    return DeformConfig(
        mode=str(cfg["deform.mode"]),
        tol=float(cfg["deform.tol"]),
        max_outer=int(cfg["deform.max_outer"]),
        rho_max=float(cfg["deform.rho_max"]),
        lambda_floor=float(cfg["spectral.lambda_floor"]),
        spectral=_spectral_config(cfg),
    )


def _flow_config(cfg: dict, grad_tol: float | None = None) -> FlowConfig:
    return FlowConfig(
        dt=float(cfg["flow.dt"]),
        max_steps=int(cfg["flow.max_steps"]),
        grad_tol=float(grad_tol if grad_tol is not None else cfg["flow.grad_tol"]),
    )


def _base_connection(cfg: dict) -> Connection:
    grid = Torus4(int(cfg["grid.n"]))
    g = group(str(cfg["group"]))
    return random_connection(grid, g, int(cfg["seed"]), float(cfg["amplitude"]),
                             int(cfg["smoothness"]))


def _emit(out: Path, command: str, cfg: dict, payload: dict, status: str = "ok") -> dict:
    record = ymio.make_record(command, cfg, payload, status)
    ymio.append_record(out / "records.jsonl", record)
    return record


def _exit_for(exc: YmkError) -> int:
    if isinstance(exc, NearReducible):
        return EXIT_NEAR_REDUCIBLE
    if isinstance(exc, NoContraction):
        return EXIT_NO_CONTRACTION
    if isinstance(exc, (SolverStagnation, StepRejectionLimit)):
        return EXIT_STAGNATION
    return EXIT_CONFIG


def _run_guarded(out: Path, command: str, cfg: dict, fn):
    try:
        payload = fn()
    except (NearReducible, NoContraction, SolverStagnation, StepRejectionLimit) as exc:
        _emit(out, command, cfg, {"error": str(exc), "error_kind": type(exc).__name__},
              status="error")
        click.echo(f"{command}: {type(exc).__name__}: {exc}", err=True)
        sys.exit(_exit_for(exc))
    _emit(out, command, cfg, payload)
    return payload


common_options = [
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="Flat key = value config file with dotted keys."),
    click.option("--out", "out_dir", type=click.Path(), default="runs",
                 help="Output directory for records, CSV tables, snapshots."),
    click.option("--seed", type=int, default=None, help="Override config seed."),
    click.option("--snapshots", is_flag=True, default=False,
                 help="Write YMK1 field snapshots next to the records."),
]


def _with_common(fn):
    for opt in reversed(common_options):
        fn = opt(fn)
    return fn


def _setup(config_path, out_dir, seed):
    try:
        cfg = load_config(config_path, seed)
    except UsageError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


@click.group()
def main():
    """Numerical experiments for Yang-Mills fields on the flat Kahler 4-torus."""


@main.command()
@_with_common
def check(config_path, out_dir, seed, snapshots):
    """Run the exact-identity and convergence-order suite at n and n/2.

    Exits 1 if any exact identity exceeds 1e-10 (relative) or any
    convergence order falls below 0.8.
    """
    cfg, out = _setup(config_path, out_dir, seed)
    results = run_identity_suite(int(cfg["grid.n"]), str(cfg["group"]), int(cfg["seed"]),
                                 corrupt=bool(cfg["check.corrupt"]))
    failed = [r for r in results if not r["passed"]]
    for r in results:
        mark = "ok " if r["passed"] else "FAIL"
        click.echo(f"[{mark}] {r['name']}: {r['value']:.3e} ({r['kind']})")
    _emit(out, "check", cfg, {"results": results, "failed": len(failed)},
          status="ok" if not failed else "failed")
    sys.exit(0 if not failed else EXIT_CHECK_FAILED)


@main.command()
@_with_common
def spectrum(config_path, out_dir, seed, snapshots):
    """Least eigenvalues lambda(A) and mu(A) of a random connection."""
    cfg, out = _setup(config_path, out_dir, seed)

    def work():
        A = _base_connection(cfg)
        scfg = _spectral_config(cfg)
        lam = lambda_A(A, scfg)
        mu = mu_A(A, scfg)
        payload = {
            "lambda": lam.value, "lambda_residual": lam.residual,
            "lambda_iterations": lam.iterations,
            "mu_constrained": mu.constrained.value,
            "mu_unconstrained": mu.unconstrained.value,
            "mu_residual": mu.constrained.residual,
        }
        if snapshots:
            from .lattice import LatticeForm
            wit = LatticeForm(A.grid, A.group, 0, lam.witness[None])
            ymio.write_snapshot(out / "lambda_witness.ymk", wit)
            payload["lambda_witness_snapshot"] = "lambda_witness.ymk"
        return payload

    _run_guarded(out, "spectrum", cfg, work)
    sys.exit(0)


@main.command()
@_with_common
def deform(config_path, out_dir, seed, snapshots):
    """Deform a random connection to vanishing omega-trace curvature."""
    cfg, out = _setup(config_path, out_dir, seed)

    def work():
        A = _base_connection(cfg)
        res = deform_to_trace_free(A, _deform_config(cfg))
        payload = {
            "mode": res.mode,
            "trace_norms": res.trace_norms,
            "final_residual": res.final_residual,
            "s_norm_ratio": res.s_norm_ratio,
            "iterations": res.iterations,
            "lambda": res.lam,
        }
        if snapshots:
            from .lattice import LatticeForm
            ymio.write_snapshot(out / "deform_s.ymk",
                                LatticeForm(A.grid, A.group, 0, res.s[None]))
            ymio.write_snapshot(out / "deform_a_inf.ymk", res.a_inf)
            payload["snapshots"] = ["deform_s.ymk", "deform_a_inf.ymk"]
        return payload

    _run_guarded(out, "deform", cfg, work)
    sys.exit(0)


@main.command()
@_with_common
def flow(config_path, out_dir, seed, snapshots):
    """Yang-Mills gradient flow with monotone energy descent."""
    cfg, out = _setup(config_path, out_dir, seed)

    def work():
        A = _base_connection(cfg)
        res = ym_gradient_flow(A, _flow_config(cfg))
        payload = {
            "steps": res.steps,
            "initial_energy": res.initial_energy,
            "final_energy": res.energy,
            "final_grad_norm": res.grad_norm,
            "trace": [list(t) for t in res.trace],
        }
        if snapshots:
            ymio.write_snapshot(out / "flow_final.ymk", res.connection)
            payload["snapshot"] = "flow_final.ymk"
        return payload

    _run_guarded(out, "flow", cfg, work)
    sys.exit(0)


@main.command()
@_with_common
def cutoff(config_path, out_dir, seed, snapshots):
    """Logarithmic cutoff norms across the configured ratio ladder.

    CSV columns: ratio, radius, grad_l4_radial, hess_l2_radial,
    grad_l4_lattice, hess_l2_lattice, scaled_sum (radial norm sum times
    sqrt(log ratio)).  Lattice columns are empty when the inner plateau is
    below two lattice spacings.
    """
    cfg, out = _setup(config_path, out_dir, seed)

    def work():
        grid = Torus4(int(cfg["grid.n"]))
        radius = float(cfg["cutoff.radius"])
        rows = []
        for ratio in _as_list(cfg["cutoff.ratios"]):
            profile = CutoffProfile(ratio=float(ratio), radius=radius)
            g4, h2 = radial_cutoff_norms(profile)
            row = {
                "ratio": float(ratio), "radius": radius,
                "grad_l4_radial": g4, "hess_l2_radial": h2,
                "grad_l4_lattice": None, "hess_l2_lattice": None,
                "scaled_sum": (g4 + h2) * float(np.sqrt(np.log(float(ratio)))),
            }
            try:
                _, rep = cutoff_beta(grid, profile)
                row["grad_l4_lattice"] = rep["grad_l4_lattice"]
                row["hess_l2_lattice"] = rep["hess_l2_lattice"]
            except UnresolvableCutoff:
                pass
            rows.append(row)
        _write_csv(out / "cutoff.csv", rows)
        return {"rows": rows, "csv": "cutoff.csv"}

    _run_guarded(out, "cutoff", cfg, work)
    sys.exit(0)


@main.command()
@_with_common
def continuity(config_path, out_dir, seed, snapshots):
    """Eigenvalue continuity along a shrinking perturbation ladder.

    CSV columns: t, a_l4, lambda, mu, mu_unconstrained.
    """
    cfg, out = _setup(config_path, out_dir, seed)

    def work():
        grid = Torus4(int(cfg["grid.n"]))
        g = group(str(cfg["group"]))
        base = random_connection(grid, g, int(cfg["seed"]),
                                 float(cfg["continuity.base_amplitude"]),
                                 int(cfg["smoothness"]))
        direction = random_connection(grid, g, int(cfg["continuity.direction_seed"]),
                                      1.0, int(cfg["smoothness"])).a
        rows = continuity_sweep(base, direction,
                                [float(t) for t in _as_list(cfg["continuity.amplitudes"])],
                                _spectral_config(cfg))
        _write_csv(out / "continuity.csv",
                   [{k: r[k] for k in ("t", "a_l4", "lambda", "mu", "mu_unconstrained")}
                    for r in rows])
        return {"rows": rows, "csv": "continuity.csv"}

    _run_guarded(out, "continuity", cfg, work)
    sys.exit(0)


@main.command()
@_with_common
def gap(config_path, out_dir, seed, snapshots):
    """Property experiment across seeds x amplitudes: flow to a near
    critical point, measure harmonicity residuals and least eigenvalues,
    then deform the flowed connection to vanishing trace.

    CSV columns (gap_summary.csv): seed, amplitude, status, energy_before,
    energy_after, fplus_before, fplus_after, trace_after_flow,
    trace_after_deform, dbar_star_f02, ym_residual, lambda, mu,
    mu_unconstrained.  Exits 0 when at least 90% of the cells complete
    (controlled per-cell failures count as complete).
    """
    cfg, out = _setup(config_path, out_dir, seed)
    grid = Torus4(int(cfg["grid.n"]))
    g = group(str(cfg["group"]))
    scfg = _spectral_config(cfg)
    dcfg = _deform_config(cfg)
    cells = [(int(s), float(a))
             for s in _as_list(cfg["gap.seeds"]) for a in _as_list(cfg["gap.amplitudes"])]

    def run_cell(cell):
        cell_seed, amplitude = cell
        row = {"seed": cell_seed, "amplitude": amplitude, "status": "ok"}
        try:
            A = random_connection(grid, g, cell_seed, amplitude, int(cfg["smoothness"]))
            from .gauge import ym_energy
            from .lattice import l2_norm, sd_asd_project
            from .gauge import curvature
            F0 = curvature(A)
            row["energy_before"] = l2_norm(F0) ** 2
            row["fplus_before"] = l2_norm(sd_asd_project(F0)[0])
            res = ym_gradient_flow(A, _flow_config(cfg, grad_tol=float(cfg["gap.grad_tol"])))
            rep = harmonicity_report(res.connection)
            row.update({
                "energy_after": res.energy,
                "fplus_after": rep["f_plus_norm"],
                "trace_after_flow": rep["trace_norm"],
                "dbar_star_f02": rep["dbar_star_f02"],
                "ym_residual": rep["ym_residual"],
            })
            lam = lambda_A(res.connection, scfg)
            mu = mu_A(res.connection, scfg)
            row.update({"lambda": lam.value, "mu": mu.constrained.value,
                        "mu_unconstrained": mu.unconstrained.value})
            if lam.value < scfg.lambda_floor:
                row["status"] = "reducible"
                row["trace_after_deform"] = None
            else:
                dres = deform_to_trace_free(res.connection, dcfg)
                row["trace_after_deform"] = dres.final_residual
        except (NearReducible,) as exc:
            row["status"] = "reducible"
            row["error"] = str(exc)
        except NoContraction as exc:
            row["status"] = "no_contraction"
            row["error"] = str(exc)
        except (SolverStagnation, StepRejectionLimit) as exc:
            row["status"] = "stagnation"
            row["error"] = str(exc)
        except Exception as exc:  # crash: cell is incomplete
            row["status"] = "error"
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    workers = max(int(os.environ.get("YMK_THREADS", "1")), 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(c) for c in cells]
    _write_csv(out / "gap_summary.csv", rows)
    complete = sum(1 for r in rows if r["status"] != "error")
    _emit(out, "gap", cfg, {"rows": rows, "complete": complete, "cells": len(cells),
                            "csv": "gap_summary.csv"})
    sys.exit(0 if complete >= 0.9 * len(cells) else EXIT_CHECK_FAILED)


def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        return
    keys: list[str] = []
    for row in rows:
        for k in row:
            if k not in keys:
                keys.append(k)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in keys})


if __name__ == "__main__":
    main()
