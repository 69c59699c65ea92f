"""Command-line interface: ``copula-tailrisk {fit,simulate,plot-data,fisher}``.

Exit codes: 0 success, 2 configuration/argument error, 3 input-data error,
4 numerical failure.

Any flag can also come from ``--config FILE``: one ``key=value`` per line,
``#`` starts a comment, keys are long flag names without the leading dashes
(``grid-size=2000``). Flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .copula_core import CopulaModel, Family, Functional, TailSpec
from .inference import (
    FisherTable,
    JeffreysPrior,
    PriorSpec,
    TailRiskReport,
    compute_fisher_table,
    fit_posterior,
    fit_tail_risk,
    restricted_jeffreys_prior,
)
from .ingest import InputError, InputTable, ingest_csv
from .plotdata import risk_posterior_density
from .pseudo_obs import PseudoSample, clamp_unit, to_pseudo_observations
from .sim_harness import SimConfig, coverage_study

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4

REPORT_SCHEMA_VERSION = "1"


class ConfigError(Exception):
    pass


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse the ``key=value`` config grammar."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _families(value: str) -> list[Family]:
    if value == "both":
        return [Family.CLAYTON, Family.GUMBEL]
    return [Family.parse(value)]


def _columns(value: str) -> tuple[str, str, str | None]:
    parts = [p.strip() for p in value.split(",") if p.strip()]
    if len(parts) not in (2, 3):
        raise ConfigError(f"--columns expects x,y[,id], got {value!r}")
    return parts[0], parts[1], parts[2] if len(parts) == 3 else None


def _prior_spec(args, family: Family) -> PriorSpec:
    overrides = {
        "fisher_draws": args.fisher_draws,
        "fisher_grid_size": args.fisher_nodes,
        "fd_step": args.fd_step,
        "prior_seed": args.seed,
    }
    if args.theta_min is not None:
        overrides["theta_min"] = args.theta_min
    if args.theta_max is not None:
        overrides["theta_max"] = args.theta_max
    try:
        return PriorSpec.for_family(family, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_fisher_table(spec: PriorSpec, cache_dir: str | Path | None) -> FisherTable:
    """Reuse a cached table when its key matches ``spec``; otherwise compute (and store)."""
    path = Path(cache_dir) / f"fisher_{spec.family.value}.txt" if cache_dir else None
    if path is not None and path.exists():
        try:
            table = FisherTable.read(path)
        except (ValueError, KeyError) as exc:
            _note(f"note: ignoring unreadable Fisher cache {path} ({exc}); recomputing")
        else:
            if table.matches(spec):
                return table
            _note(f"note: Fisher cache {path} does not match the requested settings; recomputing")
    table = compute_fisher_table(spec)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        table.write(path)
    return table


# ---------------------------------------------------------------------------
# shared argument groups
# ---------------------------------------------------------------------------


def _add_prior_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--theta-min", type=float, default=None, help="lower truncation (family default if omitted)")
    p.add_argument("--theta-max", type=float, default=None, help="upper truncation (default 50)")
    p.add_argument("--seed", type=int, default=20180917, help="seed for Monte-Carlo Fisher information")
    p.add_argument("--fisher-draws", type=int, default=20_000, help="Monte-Carlo draws per Fisher node")
    p.add_argument("--fisher-nodes", type=int, default=60, help="number of Fisher-table nodes")
    p.add_argument("--fd-step", type=float, default=1e-4, help="base finite-difference step for the score")
    p.add_argument("--cache-dir", default=None, help="directory holding fisher_<family>.txt caches")


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--columns", default="x,y", help="column names x,y[,id] (default x,y)")
    p.add_argument("--strict-parse", action="store_true", help="fail on malformed numeric cells instead of dropping")
    p.add_argument(
        "--copula-scale",
        action="store_true",
        help="treat columns as already uniform (clamped to [1e-12, 1-1e-12]) instead of ranking",
    )
    p.add_argument("--family", default="both", choices=["clayton", "gumbel", "both"])
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--grid-size", type=int, default=2000)
    p.add_argument("--refine-size", type=int, default=1000)
    _add_prior_args(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="copula-tailrisk",
        description="Bayesian joint tail-risk estimation with Clayton/Gumbel copulas.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit copulas to paired data and report tail risks")
    fit.add_argument("--config", default=None, help="key=value config file")
    _add_data_args(fit)
    fit.add_argument("--output", default=None, help="JSON report path (stdout if omitted)")
    fit.add_argument("--emit-plot-data", default=None, metavar="DIR", help="also write plot data to DIR")

    sim = sub.add_parser("simulate", help="run the seeded coverage study")
    sim.add_argument("--config", default=None)
    sim.add_argument("--family", required=True, choices=["clayton", "gumbel"])
    sim.add_argument("--theta", type=float, required=True, help="true copula parameter")
    sim.add_argument("--n", type=int, default=500)
    sim.add_argument("--replicates", type=int, default=50)
    sim.add_argument("--alpha", type=float, default=0.05)
    sim.add_argument("--level", type=float, default=0.95)
    sim.add_argument("--sim-seed", type=int, default=2025, help="base seed for replicate substreams")
    sim.add_argument("--rerank", action="store_true", help="convert each simulated sample to pseudo-observations")
    sim.add_argument("--grid-size", type=int, default=2000)
    sim.add_argument("--refine-size", type=int, default=1000)
    sim.add_argument("--jobs", type=int, default=1)
    sim.add_argument("--output", required=True, help="JSON report path; per-replicate CSV goes next to it")
    sim.add_argument("--csv", default=None, help="per-replicate CSV path (default: OUTPUT with .csv suffix)")
    _add_prior_args(sim)

    plot = sub.add_parser("plot-data", help="write posterior densities of R_L, R_U, R_C as CSV")
    plot.add_argument("--config", default=None)
    _add_data_args(plot)
    plot.add_argument("--output", required=True, metavar="DIR", help="output directory")
    plot.add_argument("--scatter", action="store_true", help="also write raw and pseudo-observation columns")

    fisher = sub.add_parser("fisher", help="compute and cache a Fisher-information table")
    fisher.add_argument("--config", default=None)
    fisher.add_argument("--family", required=True, choices=["clayton", "gumbel"])
    fisher.add_argument("--output", default=None, help="table path (default: CACHE_DIR/fisher_<family>.txt)")
    _add_prior_args(fisher)
    return parser


def _config_path(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    command = next((tok for tok in argv if not tok.startswith("-")), None)
    config = _config_path(argv)
    subparsers = parser._subparsers._group_actions[0].choices
    if config and command in subparsers:
        values = read_config_file(config)
        sub = subparsers[command]
        actions = {a.dest: a for a in sub._actions}
        unknown = sorted(set(values) - set(actions) - {"config"})
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        for dest, raw in values.items():
            action = actions.get(dest)
            if action is None:
                continue
            if isinstance(action, argparse._StoreTrueAction):
                action.default = raw.lower() in {"1", "true", "yes", "on"}
            else:
                # argparse applies the action's type to string defaults
                action.default = raw
                action.required = False
    return parser.parse_args(argv)


# ---------------------------------------------------------------------------
# data
# ---------------------------------------------------------------------------


def _load_sample(args) -> tuple[InputTable, PseudoSample, int]:
    x, y, idc = _columns(args.columns)
    table = ingest_csv(args.input, (x, y), idc, strict=args.strict_parse)
    for w in table.warnings:
        _note(f"warning: {w}")
    if args.copula_scale:
        data, clamped = clamp_unit(table.x, table.y)
        if clamped:
            _note(f"warning: clamped {clamped} coordinate(s) into [1e-12, 1-1e-12]")
        return table, data, clamped
    return table, to_pseudo_observations(table.x, table.y), 0


def _check_levels(args) -> None:
    if not 0 < args.alpha < 1:
        raise ConfigError(f"--alpha must lie in (0, 1), got {args.alpha}")
    if not 0 < args.level < 1:
        raise ConfigError(f"--level must lie in (0, 1), got {args.level}")
    if args.grid_size < 200:
        raise ConfigError("--grid-size must be at least 200")


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------


def _fmt(x: float, digits: int = 6) -> str:
    return f"{x:.{digits}f}"


def format_report_table(reports: list[TailRiskReport]) -> str:
    """Side-by-side posterior summary table, one column per family."""
    names = [r.family.value.capitalize() for r in reports]
    rows: list[tuple[str, list[str]]] = [
        ("theta (posterior mean)", [_fmt(r.theta.mean, 4) for r in reports]),
        ("theta (CrI)", [f"[{_fmt(r.theta.ci.lo, 4)}, {_fmt(r.theta.ci.hi, 4)}]" for r in reports]),
        ("theta MLE (diagnostic)", [_fmt(r.mle.theta, 4) for r in reports]),
    ]
    for key, label in (("L", "R_L"), ("U", "R_U"), ("C", "R_C")):
        rows.append((f"{label} mean", [_fmt(r.risks[key].mean) for r in reports]))
        rows.append(
            (f"{label} CrI", [f"[{_fmt(r.risks[key].ci.lo)}, {_fmt(r.risks[key].ci.hi)}]" for r in reports])
        )
    width = max(len(label) for label, _ in rows) + 2
    colw = max(max(len(c) for _, cells in rows for c in cells), max(len(n) for n in names)) + 2
    level = reports[0].level
    lines = [f"Posterior summaries at alpha={reports[0].alpha:g}, {100 * level:g}% credible intervals (n={reports[0].n})"]
    lines.append("Quantity".ljust(width) + "".join(n.rjust(colw) for n in names))
    lines.append("-" * (width + colw * len(names)))
    for label, cells in rows:
        lines.append(label.ljust(width) + "".join(c.rjust(colw) for c in cells))
    for r in reports:
        lines.append(
            f"{r.family.value.capitalize()}: joint upper-tail risk {r.risks['U'].mean:.6f} is about "
            f"{r.independence_ratio_upper:.2f} times larger than under independence "
            f"(alpha^2 = {r.independence_baseline:g})."
        )
        if r.diagnostics:
            lines.append(f"  diagnostics: {', '.join(r.diagnostics)}")
    return "\n".join(lines)


def _priors(args) -> list[tuple[Family, PriorSpec, JeffreysPrior]]:
    out = []
    for family in _families(args.family):
        spec = _prior_spec(args, family)
        out.append((family, spec, restricted_jeffreys_prior(family, spec, load_fisher_table(spec, args.cache_dir))))
    return out


def _input_block(table: InputTable, clamped: int, args) -> dict:
    return {
        "path": table.provenance,
        "columns": list(table.columns),
        "n": table.n,
        "dropped_missing": table.dropped_missing,
        "dropped_malformed": table.dropped_malformed,
        "clamped": clamped,
        "scale": "copula" if args.copula_scale else "ranked",
    }


def fit_payload(table: InputTable, clamped: int, args, reports: list[TailRiskReport]) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "fit",
        "software": {"name": "copula-tailrisk", "version": __version__},
        "input": _input_block(table, clamped, args),
        "config": {
            "family": args.family,
            "alpha": args.alpha,
            "level": args.level,
            "grid_size": args.grid_size,
            "refine_size": args.refine_size,
            "seed": args.seed,
        },
        "reports": {r.family.value: r.to_dict() for r in reports},
    }


def _dump(obj: dict) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def cmd_fit(args) -> int:
    _check_levels(args)
    start = time.perf_counter()
    table, data, clamped = _load_sample(args)
    priors = _priors(args)
    reports = [
        fit_tail_risk(family, data, spec, prior, args.alpha, args.level, args.grid_size, args.refine_size)
        for family, spec, prior in priors
    ]
    payload = fit_payload(table, clamped, args, reports)
    payload["run_info"] = {
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_seconds": round(time.perf_counter() - start, 3),
    }
    text = format_report_table(reports)
    if args.output:
        Path(args.output).write_text(_dump(payload), encoding="utf-8")
        print(text)
    else:
        print(text, file=sys.stderr)
        sys.stdout.write(_dump(payload))
    if args.emit_plot_data:
        _write_plot_data(args, data, table, Path(args.emit_plot_data), priors)
    return EXIT_OK


# ---------------------------------------------------------------------------
# plot data
# ---------------------------------------------------------------------------


def _write_plot_data(args, data: PseudoSample, table: InputTable, outdir: Path, priors) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for family, spec, prior in priors:
        post = fit_posterior(family, data, spec, prior, args.grid_size, args.refine_size)
        annotations = {"family": family.value, "alpha": args.alpha, "level": args.level, "functionals": {}}
        for f in Functional:
            dens = risk_posterior_density(post, TailSpec(args.alpha, f), args.level)
            if dens.warning:
                _note(f"warning: {family.value} R_{f.value}: {dens.warning}")
            path = outdir / f"{family.value}_R{f.value}_density.csv"
            lines = ["value,density"] + [f"{v!r},{d!r}" for v, d in zip(dens.values.tolist(), dens.density.tolist())]
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            annotations["functionals"][f.value] = {
                "mean": dens.summary.mean,
                "ci_lo": dens.summary.ci.lo,
                "ci_hi": dens.summary.ci.hi,
                "method": dens.method,
                "file": path.name,
            }
        (outdir / f"{family.value}_annotations.json").write_text(_dump(annotations), encoding="utf-8")
    if getattr(args, "scatter", False):
        lines = ["x,y,u,v"] + [
            f"{a!r},{b!r},{c!r},{d!r}"
            for a, b, c, d in zip(table.x.tolist(), table.y.tolist(), data.u.tolist(), data.v.tolist())
        ]
        (outdir / "scatter.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_plot_data(args) -> int:
    _check_levels(args)
    table, data, _ = _load_sample(args)
    _write_plot_data(args, data, table, Path(args.output), _priors(args))
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate / fisher
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    family = Family.parse(args.family)
    try:
        CopulaModel(family, args.theta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.replicates < 1:
        raise ConfigError("--replicates must be >= 1")
    _check_levels(args)
    spec = _prior_spec(args, family)
    cfg = SimConfig(
        family=family,
        theta_true=args.theta,
        n=args.n,
        replicates=args.replicates,
        alpha=args.alpha,
        level=args.level,
        base_seed=args.sim_seed,
        prior=spec,
        apply_reranking=args.rerank,
        grid_size=args.grid_size,
        refine_size=args.refine_size,
    )
    prior = restricted_jeffreys_prior(family, spec, load_fisher_table(spec, args.cache_dir))
    report = coverage_study(cfg, n_jobs=args.jobs, prior=prior)
    out = Path(args.output)
    report.write_json(out)
    csv_path = Path(args.csv) if args.csv else out.with_suffix(".csv")
    report.write_csv(csv_path)
    t = report.true_values
    print(f"{family.value} theta={args.theta:g} n={args.n} R={args.replicates}")
    for f in ("L", "U", "C"):
        print(
            f"  R_{f}: true {t[f]:.6f}  avg posterior mean {report.mean_posterior_mean[f]:.6f}"
            f"  coverage {report.coverage[f]:.2f}"
        )
    return EXIT_OK


def cmd_fisher(args) -> int:
    family = Family.parse(args.family)
    spec = _prior_spec(args, family)
    if args.output:
        path = Path(args.output)
        if path.exists():
            try:
                existing = FisherTable.read(path)
            except (ValueError, KeyError):
                existing = None
            if existing is not None and existing.matches(spec):
                print(f"{path}: cached table matches; nothing to do")
                return EXIT_OK
            _note(f"note: {path} does not match the requested settings; recomputing")
        table = compute_fisher_table(spec)
        path.parent.mkdir(parents=True, exist_ok=True)
        table.write(path)
    elif args.cache_dir:
        table = load_fisher_table(spec, args.cache_dir)
        path = Path(args.cache_dir) / f"fisher_{family.value}.txt"
    else:
        raise ConfigError("fisher needs --output or --cache-dir")
    print(f"wrote {path} ({len(table.nodes)} nodes, M={spec.fisher_draws})")
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "simulate": cmd_simulate, "plot-data": cmd_plot_data, "fisher": cmd_fisher}


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        _note(f"error: {exc}")
        return EXIT_CONFIG
    except InputError as exc:
        _note(f"error: {exc}")
        return EXIT_INPUT
    except (FloatingPointError, ArithmeticError, RuntimeError) as exc:
        _note(f"numerical failure: {exc}")
        return EXIT_NUMERIC
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
