"""Command-line entry point.

    ghlab classify|solve|witness|diophantine|conjugate CONFIG [--jmax N] [--grid N] [--out DIR] [--seed S]

The JSON report goes to standard output (and to DIR/report.json with
--out).  Exit codes: 0 GH / success, 1 NotGH / witness check failed,
2 Inconclusive, 11 configuration error, 12 precondition error,
13 any other package error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
import traceback
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .classifier import Decision, Verdict, classify_gh, classify_gh_general
from .config import RunConfig, load_config
from .decay import MIN_MODES, SeriesProfile, classify_sequence
from .diophantine import (liouville_exponent_fit, liouville_witness_sequence, resonance_set)
from .errors import ConfigError, GhlabError, NotFound, PreconditionError, ResonantIndexPresent, ResonantMode
from .mode_solver import solve_mode
from .normal_form import conjugation_check, growth_class
from .operator_model import mode_symbol
from .report import FLOAT_FORMAT, dumps
from .trig import uniform_grid
from .witness import (build_witness_cspil, build_witness_liouville, build_witness_resonant,
                      build_witness_signchange, export_witness, verify_witness)

EXIT_OK = 0
EXIT_NOT_GH = 1
EXIT_INCONCLUSIVE = 2
EXIT_CONFIG = 11
EXIT_PRECONDITION = 12
EXIT_INTERNAL = 13

_DECISION_CODES = {Decision.GH: EXIT_OK, Decision.NOT_GH: EXIT_NOT_GH, Decision.INCONCLUSIVE: EXIT_INCONCLUSIVE}


class CommandResult:
    def __init__(self, payload: dict, code: int = EXIT_OK, files: Optional[dict] = None):
        self.payload = payload
        self.code = code
        self.files = files or {}


def _provenance(cfg: RunConfig) -> dict:
    return {"config_hash": cfg.hash(), "version": __version__, "seed": cfg.seed}


# ----------------------------------------------------------------- commands

def _verdict(cfg: RunConfig) -> Verdict:
    if cfg.family is not None and cfg.operator is None:
        return classify_gh_general(cfg.mode_family(), jmax=min(cfg.jmax, 128))
    return classify_gh(cfg.operator_spec(), cfg.a0_spec(), jmax=cfg.jmax)


def run_classify(cfg: RunConfig, out: Optional[Path]) -> CommandResult:
    v = _verdict(cfg)
    return CommandResult({"verdict": v.to_dict()}, _DECISION_CODES[v.decision])


def run_solve(cfg: RunConfig, out: Optional[Path]) -> CommandResult:
    op = cfg.operator_spec()
    if op.rhs is None:
        raise PreconditionError("solve needs operator.rhs")
    j_lo = cfg.solve["j_min"]
    j_hi = cfg.solve.get("j_max") or cfg.jmax
    if j_hi > op.eigen.jmax or j_lo > j_hi:
        raise PreconditionError(f"mode range {j_lo}..{j_hi} is outside 1..{op.eigen.jmax}")
    grid = uniform_grid(cfg.grid_points)
    rows, skipped, solutions = [], [], {}
    for j in range(j_lo, j_hi + 1):
        sym = mode_symbol(op, j)
        try:
            sol = solve_mode(sym, op.rhs.values(j, grid), grid, cfg.tolerances["resonance"])
        except ResonantMode:
            skipped.append(j)
            continue
        log_sup = float(np.max(sol.log_values.log_mag)) if sol.log_values is not None else math.log(sol.sup_norm())
        rows.append({"j": j, "theta": sol.theta, "log_sup_u": log_sup, "sup_u": math.exp(min(log_sup, 700.0)),
                     "residual": sol.residual, "branch": sol.branch.value})
        solutions[j] = sol
    if not rows:
        raise PreconditionError("every mode in range is resonant")
    payload = {"modes": len(rows), "resonant_skipped": skipped,
               "max_residual": max(r["residual"] for r in rows), "rows": rows}
    if len(rows) >= MIN_MODES:
        logs = np.full(rows[-1]["j"], -np.inf)
        for r in rows:
            logs[r["j"] - 1] = r["log_sup_u"]
        payload["decay"] = classify_sequence(SeriesProfile.from_logs({0: logs})).kind.value
    files = {}
    if out is not None:
        files["modes.csv"] = _write_rows(out / "modes.csv", ["j", "theta", "sup_u", "log_sup_u", "residual", "branch"], rows)
        sol_dir = out / "solutions"
        sol_dir.mkdir(parents=True, exist_ok=True)
        for j, sol in solutions.items():
            vals = sol.values
            _write_rows(sol_dir / f"mode_{j:05d}.csv", ["t", "re_u", "im_u"],
                        [{"t": t, "re_u": z.real, "im_u": z.imag} for t, z in zip(sol.grid, vals)])
    return CommandResult(payload, EXIT_OK, files)


def _liouville_pairs(a0, mu, depth: int, budget: int):
    try:
        return liouville_witness_sequence(a0, mu, depth, budget), depth
    except NotFound as exc:
        if exc.depth == 0:
            raise PreconditionError(f"no Liouville pairs within {budget} indices") from None
        return liouville_witness_sequence(a0, mu, exc.depth, budget), exc.depth


def run_witness(cfg: RunConfig, out: Optional[Path]) -> CommandResult:
    v = _verdict(cfg)
    if v.decision is not Decision.NOT_GH:
        raise PreconditionError(f"classifier returned {v.decision.value}; no singular solution to construct")
    kind = cfg.witness["kind"]
    if kind == "auto":
        kind = _witness_kind(v)
    if cfg.operator is None:
        if kind != "cspil":
            raise PreconditionError(f"witness kind {kind!r} needs an operator section")
        w = build_witness_cspil(cfg.mode_family(), jmax=min(cfg.jmax, 128))
    else:
        op = cfg.operator_spec()
        a0 = cfg.a0_spec()
        if kind == "sign-change":
            w = build_witness_signchange(op, jmax=min(cfg.jmax, op.eigen.jmax))
        elif kind in ("resonant", "liouville"):
            if not op.b.is_zero():
                raise PreconditionError("resonance witnesses are built for b = 0; the log-growth case goes through the normal form")
            if a0 is None:
                from .diophantine import float_spec, rational
                a0 = rational(0) if op.a.mean == 0 else float_spec(op.a.mean)
            if kind == "resonant":
                w = build_witness_resonant(a0, op.eigen, jmax=op.eigen.jmax, a=op.a)
            else:
                pairs, _ = _liouville_pairs(a0, op.eigen, cfg.witness["depth"], cfg.witness["budget"])
                w = build_witness_liouville(a0, op.eigen, pairs, a=op.a)
        else:
            raise PreconditionError(f"witness kind {kind!r} does not apply to an operator section")
    rep = verify_witness(w, residual_tol=cfg.tolerances["residual"])
    files = {}
    if out is not None:
        for p in export_witness(w, rep, out / "witness"):
            files[p.name] = str(p)
    payload = {"kind": w.kind, "indices": list(w.indices), "verdict_rule": v.rule, "report": rep.to_dict()}
    return CommandResult(payload, EXIT_OK if rep.passed else EXIT_NOT_GH, files)


def _witness_kind(v: Verdict) -> str:
    if v.rule == "sign-change-superlog":
        return "sign-change"
    if v.rule == "general-sign-change-shrinking-intervals":
        return "cspil"
    if v.rule == "zero-imaginary-part":
        resonance = next((s for s in v.trace if s.check == "resonance-set"), None)
        if resonance is not None and resonance.outcome.startswith("infinite"):
            return "resonant"
        return "liouville"
    raise PreconditionError(f"rule {v.rule!r} has no constructive singular solution")


def run_diophantine(cfg: RunConfig, out: Optional[Path]) -> CommandResult:
    d = cfg.diophantine
    if d.get("a0") is None:
        a0 = cfg.a0_spec()
        if a0 is None:
            raise ConfigError("diophantine needs diophantine.a0 or operator.a0", "diophantine.a0")
    else:
        from .diophantine import parse_real
        a0 = parse_real(d["a0"])
    mu = "j" if d["mu"] == "j" else cfg.operator_spec().eigen
    rep = resonance_set(a0, mu, cfg.jmax)
    payload = {"a0": str(a0), "resonance": {"indices": list(rep.resonant_indices), "count": len(rep.resonant_indices),
                                           "exact": rep.exact, "jmax": rep.jmax}}
    jrange = d["jrange"]
    try:
        fit = liouville_exponent_fit(a0, mu, jrange)
        fit_on = "all"
    except ResonantIndexPresent:
        hits = set(resonance_set(a0, mu, jrange).resonant_indices)
        rest = [j for j in range(1, jrange + 1) if j not in hits]
        fit = liouville_exponent_fit(a0, mu, rest) if rest else None
        fit_on = "non-resonant"
    if fit is None:
        payload["fit"] = {"skipped": "every index is resonant", "jrange": jrange}
    else:
        payload["fit"] = {"delta_hat": fit.delta_hat, "C_hat": fit.C_hat, "fit_failed": fit.fit_failed,
                          "exact": fit.exact, "violations": fit.violations, "indices": fit_on, "jrange": jrange}
    if d.get("witness_depth"):
        try:
            pairs = liouville_witness_sequence(a0, mu, d["witness_depth"], d["budget"])
            payload["witness_pairs"] = {"pairs": [list(p) for p in pairs], "depth": len(pairs), "complete": True}
        except NotFound as exc:
            payload["witness_pairs"] = {"pairs": [], "depth": exc.depth, "complete": False}
    return CommandResult(payload, EXIT_OK)


def run_conjugate(cfg: RunConfig, out: Optional[Path]) -> CommandResult:
    op = cfg.operator_spec()
    g = growth_class(op.eigen, "nu")
    if not g.tame:
        raise PreconditionError(f"nu-growth is {g.kind.value} (witness indices {list(g.witnesses)}); "
                                "the conjugation is not an automorphism")
    n = cfg.conjugate.get("grid_points") or cfg.grid_points
    jmax = min(cfg.jmax, op.eigen.jmax)
    t = uniform_grid(n)
    if cfg.conjugate["u"] == "ones":
        U = np.ones((jmax, n), dtype=complex)
    else:
        rng = np.random.default_rng(cfg.seed)
        k = np.arange(-3, 4)
        coef = rng.normal(size=(jmax, k.size)) + 1j * rng.normal(size=(jmax, k.size))
        U = coef @ np.exp(1j * np.outer(k, t))
    rep = conjugation_check(op, U, jmax, n)
    payload = {"kappa": g.kappa, "growth": g.kind.value, "growth_source": g.source.value,
               "residual": rep.residual, "relative_residual": rep.relative_residual,
               "automorphism": True, "jmax": jmax, "grid_points": n}
    return CommandResult(payload, EXIT_OK)


COMMANDS = {"classify": run_classify, "solve": run_solve, "witness": run_witness,
            "diophantine": run_diophantine, "conjugate": run_conjugate}


# --------------------------------------------------------------------- main

def _write_rows(path: Path, columns: list[str], rows: list[dict]) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([format(r[c], FLOAT_FORMAT) if isinstance(r[c], float) else r[c] for c in columns])
    return str(path)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ghlab", description="Global hypoellipticity laboratory")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("config", help="YAML run configuration")
    p.add_argument("--jmax", type=int, help="number of modes (overrides the config)")
    p.add_argument("--grid", type=int, help="time grid points (overrides the config)")
    p.add_argument("--out", type=Path, help="directory for CSV/JSON output")
    p.add_argument("--seed", type=int, help="random seed (overrides the config)")
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    cfg = None
    try:
        cfg = load_config(args.config).with_overrides(args.jmax, args.grid, args.seed)
        result = COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        return _fail(stdout, stderr, args.command, cfg, EXIT_CONFIG, "config", exc)
    except PreconditionError as exc:
        return _fail(stdout, stderr, args.command, cfg, EXIT_PRECONDITION, "precondition", exc)
    except GhlabError as exc:
        return _fail(stdout, stderr, args.command, cfg, EXIT_INTERNAL, "error", exc)
    except Exception as exc:  # anything unexpected still honours the exit-code contract
        traceback.print_exc(file=stderr)
        return _fail(stdout, stderr, args.command, cfg, EXIT_INTERNAL, "internal", exc)
    report = {"command": args.command, "exit_code": result.code, "payload": result.payload,
              "provenance": _provenance(cfg), "files": result.files,
              "timings": {"seconds": time.perf_counter() - started}}
    text = dumps(report)
    stdout.write(text + "\n")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "report.json").write_text(text + "\n")
    return result.code


def _fail(stdout, stderr, command, cfg, code, kind, exc) -> int:
    stderr.write(f"ghlab {command}: {kind} error: {exc}\n")
    report = {"command": command, "exit_code": code, "error": {"kind": kind, "message": str(exc),
                                                                "location": getattr(exc, "location", "")}}
    if cfg is not None:
        report["provenance"] = _provenance(cfg)
    stdout.write(dumps(report) + "\n")
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))
