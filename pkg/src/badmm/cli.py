"""Command-line front end: build the benchmark, run solvers, emit traces.

Outputs per run directory:

* one CSV per solver (``hadmm.csv`` for the l1/2 penalty, ``sadmm.csv`` for
  l1) with a ``#``-prefixed metadata header followed by one row per
  iteration, every float printed with 17 significant digits (lossless for
  64-bit floats),
* ``summary.txt`` with final statistics and, for ``--reg both``, the
  head-to-head comparison of the two solvers,
* ``mse_x.png`` / ``mse_y.png`` unless ``--no-plot`` is given.

Exit codes: 0 success, 1 usage, 2 I/O failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import datetime
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

from .bregman import squared_norm_generator
from .errors import BadmmError, IoError, UsageError
from .problems import RegKind, make_tv_problem
from .report import render_error_figures
from .solver import IterationRecord, SolveResult, SolverConfig, Strategy, solve

CSV_COLUMNS = [
    "k",
    "L_alpha",
    "L_hat",
    "primal_residual",
    "dx",
    "dy",
    "dp",
    "mse_x",
    "mse_y",
    "m10",
    "m11",
    "mAux",
    "stat_grad_x",
    "stat_subdiff_y",
    "stat_primal",
]

_REG_CHOICES = ("l1", "lhalf", "both")
_STRATEGY_CHOICES = ("closed_form", "prox_linear")

# Solver nickname -> penalty kind; the l1/2 run uses half shrinkage, the l1
# run soft shrinkage.
_SOLVER_KINDS = (("hadmm", RegKind.LHALF), ("sadmm", RegKind.L1))


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved experiment configuration (flags > file > defaults)."""

    n: int = 512
    m: int = 256
    lam: float = 0.015
    alpha: float = 10.0
    mu: float = 10.0
    reg: str = "both"
    seed: int = 1
    jumps: int = 20
    noise_sigma: float = 0.0
    max_iters: int = 5000
    tol: float = 1e-8
    strategy: str = "closed_form"
    output: str = "badmm_out"
    diagnostics: bool = True
    timestamp: bool = True
    quiet: bool = False
    plot: bool = True


_DEFAULTS = RunConfig()

_INT_KEYS = {"n", "m", "seed", "jumps", "max_iters"}
_FLOAT_KEYS = {"lam", "alpha", "mu", "noise_sigma", "tol"}
_BOOL_KEYS = {"diagnostics", "timestamp", "quiet", "plot"}
_STR_KEYS = {"reg", "strategy", "output"}

# Accepted config-file spellings -> RunConfig field.
_FILE_KEY_ALIASES = {"lambda": "lam"}
for _f in fields(RunConfig):
    _FILE_KEY_ALIASES[_f.name] = _f.name
    _FILE_KEY_ALIASES[_f.name.replace("_", "-")] = _f.name


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(
        prog="badmm",
        description=(
            "Run the 1-d total-variation sparse recovery benchmark with the "
            "half-shrinkage (hadmm) and/or soft-shrinkage (sadmm) solvers and "
            "write per-iteration diagnostic traces."
        ),
    )
    p.add_argument("--n", type=int, default=None, help="signal length (default 512)")
    p.add_argument("--m", type=int, default=None, help="number of measurements (default 256)")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="regularization weight (default 0.015)")
    p.add_argument("--alpha", type=float, default=None, help="penalty parameter (default 10)")
    p.add_argument("--mu", type=float, default=None,
                   help="x-step proximal weight; also the prox-linear y weight (default 10)")
    p.add_argument("--reg", choices=_REG_CHOICES, default=None,
                   help="which penalty to run (default both)")
    p.add_argument("--seed", type=int, default=None, help="data seed (default 1)")
    p.add_argument("--jumps", type=int, default=None,
                   help="change points in the ground-truth signal (default 20)")
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float, default=None,
                   help="measurement noise level (default 0)")
    p.add_argument("--max-iters", dest="max_iters", type=int, default=None,
                   help="iteration cap (default 5000)")
    p.add_argument("--tol", type=float, default=None,
                   help="relative step-norm stopping tolerance (default 1e-8)")
    p.add_argument("--strategy", choices=_STRATEGY_CHOICES, default=None,
                   help="y-step strategy (default closed_form)")
    p.add_argument("--output", default=None, help="output directory (default badmm_out)")
    p.add_argument("--config", default=None, help="key=value configuration file")
    p.add_argument("--no-timestamp", dest="no_timestamp", action="store_true", default=None,
                   help="omit the timestamp metadata line (byte-reproducible output)")
    p.add_argument("--no-plot", dest="no_plot", action="store_true", default=None,
                   help="skip rendering the error figures")
    p.add_argument("--quiet", action="store_true", default=None, help="suppress stdout chatter")
    return p


def _parse_bool(raw: str, key: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise UsageError(f"config value for {key!r} must be a boolean, got {raw!r}")


def _read_config_file(path: str) -> dict:
    """Parse flat key=value lines; '#' starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from exc
    values: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw_line!r}")
        raw_key, raw_value = (part.strip() for part in line.split("=", 1))
        key = _FILE_KEY_ALIASES.get(raw_key)
        if key is None:
            raise UsageError(f"{path}:{lineno}: unknown key {raw_key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(raw_value)
            elif key in _FLOAT_KEYS:
                values[key] = float(raw_value)
            elif key in _BOOL_KEYS:
                values[key] = _parse_bool(raw_value, key)
            else:
                values[key] = raw_value
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {raw_key!r}: {exc}") from exc
    return values


def _validate(cfg: RunConfig) -> RunConfig:
    def bad(msg: str) -> None:
        raise UsageError(msg)

    if cfg.n < 2:
        bad(f"--n must be >= 2, got {cfg.n}")
    if cfg.m < 1:
        bad(f"--m must be >= 1, got {cfg.m}")
    if not (math.isfinite(cfg.lam) and cfg.lam > 0):
        bad(f"--lambda must be > 0, got {cfg.lam}")
    if not (math.isfinite(cfg.alpha) and cfg.alpha > 0):
        bad(f"--alpha must be > 0, got {cfg.alpha}")
    if not (math.isfinite(cfg.mu) and cfg.mu > 0):
        bad(f"--mu must be > 0, got {cfg.mu}")
    if cfg.reg not in _REG_CHOICES:
        bad(f"--reg must be one of {_REG_CHOICES}, got {cfg.reg!r}")
    if not 1 <= cfg.jumps < cfg.n:
        bad(f"--jumps must satisfy 1 <= jumps < n, got {cfg.jumps}")
    if not (math.isfinite(cfg.noise_sigma) and cfg.noise_sigma >= 0):
        bad(f"--noise-sigma must be >= 0, got {cfg.noise_sigma}")
    if cfg.max_iters < 1:
        bad(f"--max-iters must be >= 1, got {cfg.max_iters}")
    if not (math.isfinite(cfg.tol) and cfg.tol >= 0):
        bad(f"--tol must be >= 0, got {cfg.tol}")
    if cfg.strategy not in _STRATEGY_CHOICES:
        bad(f"--strategy must be one of {_STRATEGY_CHOICES}, got {cfg.strategy!r}")
    return cfg


def parse_config(args: Sequence[str], file: Optional[str] = None) -> RunConfig:
    """Resolve a run configuration: flags override file values override defaults."""
    ns = _build_parser().parse_args(list(args))
    values = {f.name: getattr(_DEFAULTS, f.name) for f in fields(RunConfig)}
    config_path = ns.config if ns.config is not None else file
    if config_path is not None:
        values.update(_read_config_file(config_path))
    for key in (
        "n", "m", "lam", "alpha", "mu", "reg", "seed", "jumps",
        "noise_sigma", "max_iters", "tol", "strategy", "output",
    ):
        flag_value = getattr(ns, key)
        if flag_value is not None:
            values[key] = flag_value
    if ns.no_timestamp:
        values["timestamp"] = False
    if ns.no_plot:
        values["plot"] = False
    if ns.quiet:
        values["quiet"] = True
    return _validate(RunConfig(**values))


def _fmt(value) -> str:
    if value is None:
        return ""
    return format(float(value), ".17g")


def _record_row(rec: IterationRecord) -> str:
    stat = rec.stationarity
    cells = [
        str(rec.k),
        _fmt(rec.L_alpha),
        _fmt(rec.L_hat),
        _fmt(rec.primal_residual),
        _fmt(rec.dx),
        _fmt(rec.dy),
        _fmt(rec.dp),
        _fmt(rec.mse_x),
        _fmt(rec.mse_y),
        _fmt(rec.m10),
        _fmt(rec.m11),
        _fmt(rec.m_aux),
        _fmt(stat.grad_x if stat is not None else None),
        _fmt(stat.subdiff_y if stat is not None else None),
        _fmt(stat.primal if stat is not None else None),
    ]
    return ",".join(cells)


def emit_csv(trace: Sequence[IterationRecord], meta: dict, path) -> None:
    """Write metadata header lines, the column header, and one row per iteration."""
    lines = [f"# {key} = {value}" for key, value in meta.items()]
    lines.append(",".join(CSV_COLUMNS))
    lines.extend(_record_row(rec) for rec in trace)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _run_meta(cfg: RunConfig, name: str, result: SolveResult) -> dict:
    c = result.constants
    meta: dict = {}
    if cfg.timestamp:
        meta["timestamp"] = datetime.datetime.now().isoformat(timespec="seconds")
    meta.update(
        solver=name,
        strategy=cfg.strategy,
        n=cfg.n,
        m=cfg.m,
        **{"lambda": _fmt(cfg.lam)},
        alpha=_fmt(cfg.alpha),
        mu=_fmt(cfg.mu),
        reg=cfg.reg,
        seed=cfg.seed,
        jumps=cfg.jumps,
        noise_sigma=_fmt(cfg.noise_sigma),
        max_iters=cfg.max_iters,
        tol=_fmt(cfg.tol),
        diagnostics=cfg.diagnostics,
        mu0=_fmt(c.mu0),
        mu_B=_fmt(c.mu_B),
        ell_f=_fmt(c.ell_f),
        ell_phi=_fmt(c.ell_phi),
        sigma0=_fmt(c.sigma0),
        sigma1=_fmt(c.sigma1),
        alpha_lower_bound=_fmt(result.alpha_bound),
        alpha_rule_ok=result.alpha_bound_ok,
        termination=result.reason,
        iterations=len(result.trace),
    )
    return meta


def _summary_lines(cfg: RunConfig, results: dict[str, SolveResult]) -> list[str]:
    lines = ["badmm experiment summary", "========================"]
    lines.append(
        f"n={cfg.n} m={cfg.m} lambda={cfg.lam:g} alpha={cfg.alpha:g} mu={cfg.mu:g} "
        f"seed={cfg.seed} jumps={cfg.jumps} noise_sigma={cfg.noise_sigma:g} "
        f"strategy={cfg.strategy} max_iters={cfg.max_iters} tol={cfg.tol:g}"
    )
    lines.append("")
    for name, result in results.items():
        last = result.trace[-1]
        bound = result.alpha_bound
        lines.append(
            f"{name}: iterations={len(result.trace)} termination={result.reason} "
            f"final_step_norm={last.dz:.6e} final_L_alpha={last.L_alpha:.6e}"
        )
        if last.mse_x is not None:
            lines.append(
                f"{name}: final_mse_x={last.mse_x:.6e} final_mse_y={last.mse_y:.6e}"
            )
        lines.append(
            f"{name}: alpha_lower_bound={bound:.6e} alpha_rule_ok={result.alpha_bound_ok}"
        )
    if len(results) == 2 and all(r.trace[-1].mse_y is not None for r in results.values()):
        lines.append("")
        lines.append("comparison at the final iteration (per-iteration traces in the CSVs):")
        finals = {name: res.trace[-1].mse_y for name, res in results.items()}
        for name, value in finals.items():
            lines.append(f"  {name} final mse_y = {value:.6e}")
        winner = min(finals, key=finals.get)
        lines.append(f"  lower final mse_y: {winner}")
    return lines


def run_experiment(cfg: RunConfig) -> int:
    """Build the instance, run the requested solver(s), write all artifacts."""
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {out}: {exc}") from exc

    wanted = [
        (name, kind)
        for name, kind in _SOLVER_KINDS
        if cfg.reg == "both" or kind.value == cfg.reg
    ]
    results: dict[str, SolveResult] = {}
    for name, kind in wanted:
        problem, truth = make_tv_problem(
            cfg.n, cfg.m, cfg.lam, kind, cfg.seed,
            noise_sigma=cfg.noise_sigma, jump_count=cfg.jumps,
        )
        if cfg.strategy == "prox_linear":
            strategy = Strategy.PROX_LINEAR_Y
            prox_mu = cfg.mu
        else:
            strategy = (
                Strategy.CLOSED_FORM_HALF if kind is RegKind.LHALF else Strategy.CLOSED_FORM_SOFT
            )
            prox_mu = None
        config = SolverConfig(
            alpha=cfg.alpha,
            phi=squared_norm_generator(cfg.mu),
            strategy=strategy,
            max_iters=cfg.max_iters,
            tol=cfg.tol,
            record_diagnostics=cfg.diagnostics,
            prox_mu=prox_mu,
        )
        result = solve(problem, config, ground_truth=truth)
        results[name] = result
        emit_csv(result.trace, _run_meta(cfg, name, result), out / f"{name}.csv")
        if not cfg.quiet:
            last = result.trace[-1]
            print(
                f"{name}: {len(result.trace)} iterations ({result.reason}), "
                f"final step norm {last.dz:.3e}, final mse_y {last.mse_y:.3e}"
            )

    summary = _summary_lines(cfg, results)
    try:
        (out / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write summary: {exc}") from exc

    if cfg.plot:
        render_error_figures({name: res.trace for name, res in results.items()}, out)

    if not cfg.quiet:
        print(f"artifacts written to {out}/")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse_config(args)
    except UsageError as exc:
        print(f"badmm: usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return run_experiment(cfg)
    except IoError as exc:
        print(f"badmm: i/o error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"badmm: i/o error: {exc}", file=sys.stderr)
        return 2
    except BadmmError as exc:
        print(f"badmm: solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
