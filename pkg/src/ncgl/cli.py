"""Experiment runner: configure an instance family, run a verification suite,
emit a deterministic report.

Usage:
    ncgl --suite goodlambda-core --trials 100 --seed 7 --out core.csv
    ncgl config.json --p 3 --p 4 --format json --out report.json

A configuration JSON may carry any of the fields of ExperimentConfig; command
line flags override it.  Exit code 0 means every emitted row passed, 1 means
at least one verification row failed, 2 signals a configuration error.
Reports are byte-identical across runs for a fixed config and seed; wall
times only enter the emitted rows with --timing.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from . import applications as apps
from . import goodlambda as gl
from .cuculescu import fubini_identity_gap
from .errors import NCGLError
from .filtration import make_filtration
from .instances import (
    adapted_psd_sequence,
    arrow_martingale_pair,
    classical_tangent_positive_pair,
    gaussian_psd,
    random_martingale,
    stream,
    strong_triple_parts,
    triple_family,
)
from .reports import VerifyReport
from .schur import (
    reversed_l_bound,
    reversed_l_pattern,
    schur_norm_lower,
    triangular_pattern,
    verify_reversed_L,
)

__all__ = ["ExperimentConfig", "ReportRow", "run", "emit", "main", "SUITES"]

_DEFAULT_P = {
    "goodlambda-core": (),
    "goodlambda-tail": (),
    "moment": (3.0, 4.0, 8.0),
    "bg": (3.0, 4.0, 8.0),
    "transform": (3.0, 4.0),
    "doob": (3.0, 4.0),
    "stein": (3.0, 4.0),
    "tangent-counterexample": (1.5,),
    "dominated": (3.0, 4.0),
    "positive-tangent": (3.0, 4.0),
    "refined-doob": (3.0, 4.0),
    "schur-reversed-l": (4.0,),
    "schur-norms": (4.0, 8.0, 16.0),
}


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str
    p_grid: tuple[float, ...] = ()
    dims: dict = field(default_factory=dict)
    trials: int = 10
    seed: int = 0
    B: float | None = None
    beta_grid: tuple[float, ...] = (1.5, 2.0, 4.0)
    tolerances: dict = field(default_factory=dict)
    timing: bool = False

    def __post_init__(self):
        if self.suite not in SUITES:
            raise NCGLError(f"unknown suite {self.suite!r}")
        if self.trials < 1:
            raise NCGLError("trials must be at least 1")
        ps = tuple(float(p) for p in self.p_grid) or _DEFAULT_P[self.suite]
        object.__setattr__(self, "p_grid", ps)
        _check_p_domain(self.suite, ps)


def _check_p_domain(suite: str, ps) -> None:
    strict = {"moment": 2.0, "transform": 1.0, "schur-norms": 1.0}
    inclusive = {"bg": 2.0, "stein": 2.0, "dominated": 2.0,
                 "schur-reversed-l": 2.0, "doob": 1.0, "refined-doob": 1.0,
                 "positive-tangent": 1.0, "tangent-counterexample": 1.0}
    for p in ps:
        if suite in strict and p <= strict[suite]:
            raise NCGLError(f"suite {suite} needs p > {strict[suite]}")
        if suite in inclusive and p < inclusive[suite]:
            raise NCGLError(f"suite {suite} needs p >= {inclusive[suite]}")
        if suite == "schur-norms" and not math.isfinite(p):
            raise NCGLError("schur-norms needs finite p")


@dataclass(frozen=True)
class ReportRow:
    suite: str
    instance: str
    seed: int
    lhs: float
    rhs: float
    constant: float
    margin: float
    passed: bool
    ms: int = 0


def _row(cfg: ExperimentConfig, instance: str, rep: VerifyReport,
         ms: int = 0) -> ReportRow:
    return ReportRow(cfg.suite, instance, cfg.seed, rep.lhs, rep.rhs,
                     rep.constant, rep.margin, rep.passed, ms)


# ---------------------------------------------------------------------------
# suite implementations (each maps one trial index to rows)
# ---------------------------------------------------------------------------


def _suite_goodlambda_core(cfg, trial):
    filt = triple_family(trial)
    x, y, z = strong_triple_parts(filt, stream(cfg.seed, 1, trial))
    t = gl.Triple(x, y, z)
    rep = gl.verify_core(t)
    return [_row(cfg, f"t{trial}:{filt.label}", rep)]

def _suite_goodlambda_tail(cfg, trial):
    filt = triple_family(trial)
    x, y, z = strong_triple_parts(filt, stream(cfg.seed, 2, trial))
    t = gl.Triple(x, y, z)
    hyp = gl.hypothesis_status(t)
    return [
        _row(cfg, f"t{trial}:beta={beta}", gl.verify_tail(t, beta, hypothesis=hyp))
        for beta in cfg.beta_grid
    ]

def _suite_moment(cfg, trial):
    from .filtration import square_function

    filt = triple_family(trial)
    rng = stream(cfg.seed, 3, trial)
    y = random_martingale(filt, rng, sup_norm=float(rng.uniform(0.5, 4.0)))
    s = square_function(y)
    t = gl.Triple(s, y, s)
    hyp = gl.hypothesis_status(t)
    rows = []
    for p in cfg.p_grid:
        B = cfg.B if cfg.B is not None else 1.0 + 1.0 / p
        reps = gl.verify_moment(t, p, B, hypothesis=hyp)
        tag = f"t{trial}:p={p}"
        rows += [
            _row(cfg, f"{tag}:max+", reps.max_plus),
            _row(cfg, f"{tag}:max-", reps.max_minus),
            _row(cfg, f"{tag}:moment", reps.moment),
            _row(cfg, f"{tag}:moment12p", reps.moment_simplified),
        ]
        if p > 2:
            gap = fubini_identity_gap(reps.weak_plus, p)
            tol = cfg.tolerances.get("fubini", 1e-6)
            rows.append(ReportRow(cfg.suite, f"{tag}:fubini", cfg.seed,
                                  gap, tol, 0.0, tol - gap, gap <= tol))
    return rows

def _suite_bg(cfg, trial):
    dim = int(cfg.dims.get("dim", 5))
    filt = make_filtration("corner", dim=dim)
    m = random_martingale(filt, stream(cfg.seed, 4, trial))
    rows = []
    for p in cfg.p_grid:
        reps = apps.verify_bg(m, p)
        tag = f"t{trial}:p={p}"
        rows += [
            _row(cfg, f"{tag}:norm<=C*S", reps.norm_by_square),
            _row(cfg, f"{tag}:S<=C*norm", reps.square_by_norm),
            _row(cfg, f"{tag}:interp", reps.interpolation),
        ]
    return rows

def _suite_transform(cfg, trial):
    dim = int(cfg.dims.get("dim", 5))
    filt = make_filtration("corner", dim=dim)
    rng = stream(cfg.seed, 5, trial)
    m = random_martingale(filt, rng)
    kind = trial % 3
    if kind == 0:
        v = [(-1.0) ** n for n in range(m.N + 1)]
    elif kind == 1:
        v = [float(c) for c in rng.uniform(-1.0, 1.0, size=m.N + 1)]
    else:
        v = [float(c) for c in rng.choice((-1.0, 1.0), size=m.N + 1)]
    return [
        _row(cfg, f"t{trial}:p={p}", apps.verify_transform(m, v, p, seed=cfg.seed))
        for p in cfg.p_grid
    ]

def _suite_doob(cfg, trial, stein=False):
    dim = int(cfg.dims.get("dim", 3))
    steps = int(cfg.dims.get("steps", dim + 1))
    filt = make_filtration("corner", dim=dim)
    rng = stream(cfg.seed, 6 if not stein else 7, trial)
    u = [gaussian_psd(filt.algebra, rng) for _ in range(steps)]
    rows = []
    for p in cfg.p_grid:
        if stein:
            rep = apps.verify_stein(u, filt, p)
        else:
            rep = apps.verify_dual_doob(u, filt, p)
        rows.append(_row(cfg, f"t{trial}:p={p}", rep))
    return rows

def _suite_counterexample(cfg, trial):
    n_list = cfg.dims.get("N_list", (3, 5, 7, 9, 11, 13))
    n_values = [int(n) for n in (n_list if hasattr(n_list, "__iter__") else (n_list,))]
    N = n_values[trial % len(n_values)]
    rows = []
    for p in cfg.p_grid:
        r = apps.tangent_counterexample(N, p)
        tol_w = cfg.tolerances.get("weak", 1e-8)
        tol_l1 = cfg.tolerances.get("l1", 1e-9)
        ok = (abs(r.weak_y - r.expected_weak) <= tol_w
              and abs(r.l1_x - r.expected_l1) <= tol_l1)
        rows.append(ReportRow(cfg.suite, f"N={N}:tau", cfg.seed, r.weak_y,
                              r.l1_x, r.ratio, r.l1_x - r.weak_y, ok))
        rows.append(ReportRow(cfg.suite, f"N={N}:p={p}:lp", cfg.seed,
                              (N + 1) ** (1.0 / p), r.p_norm_y, 0.0,
                              r.p_norm_y - (N + 1) ** (1.0 / p),
                              r.p_norm_y >= (N + 1) ** (1.0 / p) - 1e-9))
    return rows

def _suite_dominated(cfg, trial):
    dim = int(cfg.dims.get("dim", 6))
    x, y, _ = arrow_martingale_pair(dim, stream(cfg.seed, 8, trial))
    return [
        _row(cfg, f"t{trial}:p={p}", apps.verify_dominated(x, y, p))
        for p in cfg.p_grid
    ]

def _suite_positive_tangent(cfg, trial):
    depth = int(cfg.dims.get("depth", 4))
    mdim = int(cfg.dims.get("matrix_dim", 2))
    u, v, filt = classical_tangent_positive_pair(depth, mdim,
                                                 stream(cfg.seed, 9, trial))
    return [
        _row(cfg, f"t{trial}:p={p}", apps.verify_positive_tangent(u, v, filt, p))
        for p in cfg.p_grid
    ]

def _suite_refined_doob(cfg, trial):
    dim = int(cfg.dims.get("dim", 4))
    filt = make_filtration("corner", dim=dim)
    u = adapted_psd_sequence(filt, stream(cfg.seed, 10, trial))
    return [
        _row(cfg, f"t{trial}:p={p}", apps.refined_doob(u, filt, p))
        for p in cfg.p_grid
    ]

def _suite_schur_reversed_l(cfg, trial):
    dim = int(cfg.dims.get("dim", 8))
    rng = stream(cfg.seed, 11, trial)
    pat = reversed_l_pattern(rng.integers(0, 2, size=dim - 1),
                             rng.integers(0, 2, size=dim))
    return [
        _row(cfg, f"t{trial}:p={p}",
             verify_reversed_L(pat, p, trials=1, seed=cfg.seed + trial))
        for p in cfg.p_grid
    ]

def _suite_schur_norms(cfg, trial):
    # one trial covers the whole warm-started p sweep
    if trial > 0:
        return []
    dim = int(cfg.dims.get("dim", 32))
    budget = int(cfg.dims.get("budget", 20))
    pat = triangular_pattern(dim)
    rows = []
    prev = None
    prev_val = 0.0
    for p in sorted(cfg.p_grid):
        starts = [prev] if prev is not None else None
        val, arg = schur_norm_lower(pat, p, budget=budget, restarts=2,
                                    seed=cfg.seed, starts=starts,
                                    return_argmax=True)
        ub = reversed_l_bound(p)
        ok = val <= ub + 1e-9 and val >= prev_val - 1e-9
        rows.append(ReportRow(cfg.suite, f"triangular-{dim}:p={p}", cfg.seed,
                              val, ub, ub, ub - val, ok))
        prev, prev_val = arg, val
    return rows


SUITES = {
    "goodlambda-core": _suite_goodlambda_core,
    "goodlambda-tail": _suite_goodlambda_tail,
    "moment": _suite_moment,
    "bg": _suite_bg,
    "transform": _suite_transform,
    "doob": lambda cfg, t: _suite_doob(cfg, t, stein=False),
    "stein": lambda cfg, t: _suite_doob(cfg, t, stein=True),
    "tangent-counterexample": _suite_counterexample,
    "dominated": _suite_dominated,
    "positive-tangent": _suite_positive_tangent,
    "refined-doob": _suite_refined_doob,
    "schur-reversed-l": _suite_schur_reversed_l,
    "schur-norms": _suite_schur_norms,
}


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------


def _pool_size() -> int:
    cap = os.environ.get("NCGL_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(int(cap), 1))
    return min(n, 8)


def run(config: ExperimentConfig) -> tuple[list[ReportRow], dict]:
    """Execute a suite; returns rows in trial order and a summary."""
    suite = SUITES[config.suite]

    def one(trial: int) -> list[ReportRow]:
        t0 = time.perf_counter()
        rows = suite(config, trial)
        if config.timing:
            ms = int(round((time.perf_counter() - t0) * 1000.0))
            rows = [replace(r, ms=ms) for r in rows]
        return rows

    t_start = time.perf_counter()
    workers = _pool_size()
    if workers > 1 and config.trials > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(one, range(config.trials)))
    else:
        chunks = [one(t) for t in range(config.trials)]
    rows = [r for chunk in chunks for r in chunk]
    failures = sum(not r.passed for r in rows)
    summary = {
        "suite": config.suite,
        "rows": len(rows),
        "failures": failures,
        "min_margin": min((r.margin for r in rows), default=0.0),
        "seed": config.seed,
        "p_grid": list(config.p_grid),
        "elapsed_s": round(time.perf_counter() - t_start, 3),
        "constants": _constant_formulas(config.suite),
    }
    return rows, summary


def _constant_formulas(suite: str) -> str:
    table = {
        "goodlambda-core": "2",
        "goodlambda-tail": "4/(beta-1)^2",
        "moment": "C_{p,B} = (2p B^{p-1}(B-1)/(1-B^-p))^{1/p} "
                  "* 2 B^{p/2}/((B-1) sqrt(1-B^{2-p})); simplified "
                  "12p/sqrt(1-(1+1/p)^{2-p})",
        "bg": "sqrt(2)*12p/sqrt(1-(1+1/p)^{2-p}) and "
              "12p sqrt(1+2^{2-4/p}) (1+2^{p-2})^{1/p} / sqrt(1-(1+1/p)^{2-p})",
        "transform": "12p sqrt(1+2^{2-4/p}) / sqrt(1-(1+1/p)^{2-p})",
        "doob": "(sqrt(2) * 24p/sqrt(1-(1+1/(2p))^{2-2p}) * 2^{1/(2p)})^2",
        "stein": "sqrt(dual-Doob constant at p/2)",
        "tangent-counterexample": "(N+1)/(2 sqrt(N))",
        "dominated": "kappa * 12p sqrt(1+2^{2-4/p}) / sqrt(1-(1+1/p)^{2-p})",
        "positive-tangent": "1 + (1+kappa) C_p (p>2); BG-squared route (p<=2)",
        "refined-doob": "(1 + 3(1 + 2 C_p))/2",
        "schur-reversed-l": "(1 + C_p)/2",
        "schur-norms": "(1 + C_p)/2 as upper reference",
    }
    return table[suite]


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

_CSV_HEADER = "suite,instance,seed,lhs,rhs,constant,margin,pass,ms"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def emit(rows: list[ReportRow], format: str, path: str) -> None:
    """Write rows to a CSV or JSON file; floats carry 17 significant digits."""
    if format == "csv":
        lines = [_CSV_HEADER]
        for r in rows:
            lines.append(",".join([
                r.suite, r.instance, str(r.seed), _fmt(r.lhs), _fmt(r.rhs),
                _fmt(r.constant), _fmt(r.margin), str(r.passed), str(r.ms),
            ]))
        text = "\n".join(lines) + "\n"
    elif format == "json":
        payload = [
            {"suite": r.suite, "instance": r.instance, "seed": r.seed,
             "lhs": float(_fmt(r.lhs)), "rhs": float(_fmt(r.rhs)),
             "constant": float(_fmt(r.constant)),
             "margin": float(_fmt(r.margin)), "pass": r.passed, "ms": r.ms}
            for r in rows
        ]
        text = json.dumps(payload, indent=1) + "\n"
    else:
        raise NCGLError(f"unknown format {format!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def rows_from_json(path: str) -> list[ReportRow]:
    """Parse a JSON report back into rows (suite name set from the file)."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return [
        ReportRow(d["suite"], d["instance"], d["seed"], d["lhs"], d["rhs"],
                  d["constant"], d["margin"], d["pass"], d["ms"])
        for d in payload
    ]


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_config(args) -> ExperimentConfig:
    base: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = json.load(fh)
    if args.suite:
        base["suite"] = args.suite
    if "suite" not in base:
        raise NCGLError("a suite must be given (config file or --suite)")
    if args.p:
        base["p_grid"] = tuple(args.p)
    if args.trials is not None:
        base["trials"] = args.trials
    if args.seed is not None:
        base["seed"] = args.seed
    if args.dim is not None:
        base.setdefault("dims", {})
        base["dims"] = dict(base["dims"], dim=args.dim)
    if args.B is not None:
        base["B"] = args.B
    if args.beta:
        base["beta_grid"] = tuple(args.beta)
    if args.timing:
        base["timing"] = True
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    extra = set(base) - known
    if extra:
        raise NCGLError(f"unknown config fields: {sorted(extra)}")
    if "p_grid" in base:
        base["p_grid"] = tuple(base["p_grid"])
    if "beta_grid" in base:
        base["beta_grid"] = tuple(base["beta_grid"])
    return ExperimentConfig(**base)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ncgl",
        description="Run a martingale-inequality verification suite.")
    parser.add_argument("config", nargs="?", help="JSON config file")
    parser.add_argument("--suite", choices=sorted(SUITES))
    parser.add_argument("--p", action="append", type=float,
                        help="exponent (repeatable)")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--dim", type=int)
    parser.add_argument("--B", type=float)
    parser.add_argument("--beta", action="append", type=float)
    parser.add_argument("--out", help="report file path")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--timing", action="store_true",
                        help="record wall time per trial (breaks byte-level "
                             "reproducibility of the report)")
    args = parser.parse_args(argv)

    try:
        config = _build_config(args)
    except (NCGLError, OSError, json.JSONDecodeError, TypeError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    try:
        rows, summary = run(config)
    except NCGLError as e:
        print(f"run error: {e}", file=sys.stderr)
        return 2

    if args.out:
        try:
            emit(rows, args.format, args.out)
        except (OSError, NCGLError) as e:
            print(f"output error: {e}", file=sys.stderr)
            return 2

    print(f"suite {summary['suite']}: {summary['rows']} rows, "
          f"{summary['failures']} failures, min margin "
          f"{summary['min_margin']:.6g}, elapsed {summary['elapsed_s']}s")
    print(f"constants: {summary['constants']}")
    return 0 if summary["failures"] == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
