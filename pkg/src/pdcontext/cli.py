"""Command-line front end: ``pdcontext <command> [flags]``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .atlas import REGION_SAMPLES, Portrait, atlas_sweep, classify_region, params_for, portrait
from .equilibrium import flatten_reports, fixed_points_3, fixed_points_4
from .errors import NumericalError, PdContextError, UnknownSignature, ValidationError
from .game_model import (
    GameParams,
    check_params,
    closed_form_matrix,
    compile_payoff_matrix,
    parse_config,
    params_from_mapping,
    strategy_set,
)
from .invariant import audit
from .replicator import IntegrationConfig, integrate
from .svg import atlas_svg, portrait_svg

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
DEFAULT_FORMAT = {
    "payoff": "json",
    "fixed-points": "json",
    "integrate": "csv",
    "atlas": "csv",
    "portrait": "json",
    "invariant-check": "csv",
}
SUPPORTED_FORMATS = {
    "payoff": ("json", "csv"),
    "fixed-points": ("json", "csv"),
    "integrate": ("csv", "json", "svg"),
    "atlas": ("csv", "json", "svg"),
    "portrait": ("json", "svg"),
    "invariant-check": ("csv", "json"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _shared() -> argparse.ArgumentParser:
    sh = argparse.ArgumentParser(add_help=False)
    g = sh.add_argument_group("game")
    for name in ("t", "r", "p", "s", "z", "beta"):
        g.add_argument(f"--{name}", type=float, help=f"game parameter {name}")
    g.add_argument("--config", type=Path, help="key=value file with game parameters; flags override it")
    g.add_argument("--set", dest="nset", type=int, choices=(3, 4), default=3, help="strategy set size")
    o = sh.add_argument_group("output")
    o.add_argument("--out", type=Path, help="output file (default: stdout)")
    o.add_argument("--format", choices=("csv", "json", "svg"))
    i = sh.add_argument_group("integration")
    i.add_argument("--step", type=float)
    i.add_argument("--max-time", type=float)
    i.add_argument("--seed", help="initial shares x1,x2[,x3]")
    return sh


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdcontext", description="Prisoner's dilemma with an outside option: replicator analysis.")
    parser.add_argument("--version", action="version", version=f"pdcontext {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sh = _shared()
    sub.add_parser("payoff", parents=[sh], help="repeated-game payoff matrix")
    sub.add_parser("fixed-points", parents=[sh], help="fixed points with eigenvalues and stability")
    integ = sub.add_parser("integrate", parents=[sh], help="integrate one trajectory")
    integ.add_argument("--audit", type=Path, help="also write the t,x1,x2,logC invariant audit here")
    at = sub.add_parser("atlas", parents=[sh], help="classify a grid of (beta, z) values")
    at.add_argument("--resolution", type=int, default=200)
    at.add_argument("--beta-range", default="0,1")
    at.add_argument("--z-range", default="0,4")
    at.add_argument("--workers", type=int, default=1)
    po = sub.add_parser("portrait", parents=[sh], help="fixed points and trajectories from a seed lattice")
    po.add_argument("--region", choices=sorted(REGION_SAMPLES), help="use the sample parameters of a region")
    po.add_argument("--density", type=int, default=4, help="seed lattice density (>= 2)")
    po.add_argument("--workers", type=int, default=1)
    inv = sub.add_parser("invariant-check", parents=[sh], help="audit the conserved quantity along a trajectory")
    inv.add_argument("--tol", type=float, default=1e-6, help="largest accepted drift of ln C")
    return parser


def _pair(text: str, what: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise ValidationError(f"{what} must be 'lo,hi', got {text!r}") from None
    return lo, hi


def _seed(text: str | None, n: int) -> np.ndarray:
    if text is None:
        raise ValidationError("--seed is required for this command")
    try:
        vals = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ValidationError(f"--seed must be comma-separated numbers, got {text!r}") from None
    if vals.size != n - 1:
        raise ValidationError(f"--seed needs {n - 1} shares for a {n}-strategy set, got {vals.size}")
    return vals


def resolve_params(args) -> GameParams:
    values: dict[str, float] = {}
    if args.config is not None:
        try:
            values.update(parse_config(args.config.read_text()))
        except OSError as exc:
            raise ValidationError(f"cannot read config file: {exc}") from None
    for name in ("t", "r", "p", "s", "z", "beta"):
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    p = params_from_mapping(values)
    check_params(p)
    return p


def _cfg(args, step: float, max_time: float) -> IntegrationConfig:
    return IntegrationConfig(
        step=args.step if args.step is not None else step,
        max_time=args.max_time if args.max_time is not None else max_time,
    )


def _params_dict(p: GameParams) -> dict:
    return {"t": p.pd.t, "r": p.pd.r, "p": p.pd.p, "s": p.pd.s, "z": p.z, "beta": p.beta}


def _meta(command: str) -> dict:
    return {"program": "pdcontext", "version": __version__, "command": command}


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv_row(values) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(
        [v if isinstance(v, str) else format(float(v), ".17g") for v in values]
    )
    return buf.getvalue()


def cmd_payoff(args, p: GameParams, fmt: str, notes: list[str]) -> str:
    compiled = compile_payoff_matrix(strategy_set(args.nset), p)
    closed = closed_form_matrix(p, args.nset)
    delta = float(np.max(np.abs(compiled.entries - closed.entries)))
    if fmt == "csv":
        out = _csv_row(["strategy", *compiled.strategies])
        for name, row in zip(compiled.strategies, compiled.entries):
            out += _csv_row([name, *row])
        return out
    doc = {"meta": _meta("payoff"), "params": _params_dict(p)}
    doc.update(compiled.to_dict())
    doc["closed_form"] = closed.to_dict()
    doc["max_abs_delta"] = delta
    return _json(doc)


def cmd_fixed_points(args, p: GameParams, fmt: str, notes: list[str]) -> str:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        reports = fixed_points_3(p) if args.nset == 3 else fixed_points_4(p)
    notes.extend(str(w.message) for w in caught)
    if fmt == "csv":
        n = args.nset - 1
        eig_cols = [f"{part}{i + 1}" for i in range(n) for part in ("re", "im")]
        out = _csv_row(["name", "kind", "in_simplex", *[f"x{i + 1}" for i in range(n)], "stability", *eig_cols])
        for r in flatten_reports(reports):
            vals = [r.point.name, r.point.kind, str(r.point.exists_in_simplex).lower(), *r.point.location,
                    r.stability.value]
            for v in r.eigenvalues:
                vals += [v.real, v.imag]
            out += _csv_row(vals)
        return out
    return _json(
        {
            "meta": _meta("fixed-points"),
            "params": _params_dict(p),
            "strategies": args.nset,
            "fixed_points": [r.to_dict() for r in reports],
            "warnings": notes,
        }
    )


def _field_for(p: GameParams, n: int) -> str:
    return "reduced3" if n == 3 else "reduced4"


def cmd_integrate(args, p: GameParams, fmt: str, notes: list[str]) -> str:
    x0 = _seed(args.seed, args.nset)
    cfg = _cfg(args, 1e-2, 1000.0)
    if args.nset == 4 and not p.pd.is_default:
        matrix = compile_payoff_matrix(strategy_set(4), p)
        tr = integrate(np.append(x0, 1.0 - x0.sum()), "general", cfg, p, matrix=matrix)
        tr = type(tr)(tr.times, tr.points[:, :3].copy(), tr.terminal, "general", tr.rescaled)
    else:
        tr = integrate(x0, _field_for(p, args.nset), cfg, p)
    if args.audit is not None:
        if args.nset != 3:
            raise ValidationError("the invariant audit exists for the three-strategy set only")
        rep = audit(x0, p, cfg)
        _write(args.audit, rep.to_csv())
        notes.append(f"invariant drift {rep.drift:.3e}")
    if fmt == "csv":
        return tr.to_csv()
    if fmt == "svg":
        fps = fixed_points_3(p) if args.nset == 3 else fixed_points_4(p)
        return portrait_svg(Portrait(p, args.nset, _region_or_none(p), fps, [x0], [tr]))
    return _json({"meta": _meta("integrate"), "params": _params_dict(p), "seed": x0.tolist(), **tr.to_dict()})


def _region_or_none(p: GameParams):
    if not (p.pd.is_default and 0.0 < p.beta < 1.0):
        return None
    try:
        return classify_region(p.beta, p.z)
    except UnknownSignature:
        return None


def cmd_atlas(args, p: GameParams, fmt: str, notes: list[str]) -> str:
    grid = atlas_sweep(_pair(args.beta_range, "--beta-range"), _pair(args.z_range, "--z-range"),
                       args.resolution, workers=args.workers)
    if fmt == "csv":
        return grid.to_csv()
    if fmt == "svg":
        return atlas_svg(grid)
    return _json(
        {
            "meta": _meta("atlas"),
            "betas": grid.betas.tolist(),
            "zs": grid.zs.tolist(),
            "labels": [[str(lab) for lab in row] for row in grid.labels],
            "distinct": sorted(grid.distinct()),
        }
    )


def cmd_portrait(args, p: GameParams, fmt: str, notes: list[str]) -> str:
    target = params_for(args.region) if args.region else p
    cfg = _cfg(args, 1e-2, 1000.0)
    seeds = [_seed(args.seed, args.nset)] if args.seed else None
    pt = portrait(target, args.density, cfg, n_strategies=args.nset, seeds=seeds, workers=args.workers)
    if fmt == "svg":
        return portrait_svg(pt)
    return _json({"meta": _meta("portrait"), **pt.to_dict(), "warnings": notes})


def cmd_invariant_check(args, p: GameParams, fmt: str, notes: list[str]) -> str:
    if args.nset != 3:
        raise ValidationError("the conserved quantity exists for the three-strategy set only")
    x0 = _seed(args.seed, 3)
    rep = audit(x0, p, _cfg(args, 1e-3, 50.0))
    if rep.drift >= args.tol:
        raise _DriftExceeded(rep, fmt)
    notes.append(f"invariant drift {rep.drift:.3e} (tolerance {args.tol:g})")
    return _audit_output(rep, fmt, p)


def _audit_output(rep, fmt, p) -> str:
    if fmt == "csv":
        return rep.to_csv()
    return _json(
        {
            "meta": _meta("invariant-check"),
            "params": _params_dict(p),
            "drift": rep.drift,
            "terminal": rep.trajectory.terminal,
            "t": rep.trajectory.times.tolist(),
            "logC": rep.log_c.tolist(),
        }
    )


class _DriftExceeded(NumericalError):
    def __init__(self, rep, fmt):
        super().__init__(f"invariant drift {rep.drift:.3e} exceeds the tolerance")
        self.rep = rep
        self.fmt = fmt


COMMANDS = {
    "payoff": cmd_payoff,
    "fixed-points": cmd_fixed_points,
    "integrate": cmd_integrate,
    "atlas": cmd_atlas,
    "portrait": cmd_portrait,
    "invariant-check": cmd_invariant_check,
}


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format or DEFAULT_FORMAT[args.command]
    notes: list[str] = []
    try:
        if fmt not in SUPPORTED_FORMATS[args.command]:
            raise ValidationError(f"{args.command} does not write {fmt}; choose from {SUPPORTED_FORMATS[args.command]}")
        p = resolve_params(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            text = COMMANDS[args.command](args, p, fmt, notes)
        notes.extend(str(w.message) for w in caught)
        _write(args.out, text)
    except _DriftExceeded as exc:
        if args.out is not None:
            _write(args.out, _audit_output(exc.rep, exc.fmt, p))
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValidationError as exc:
        print(f"invalid input ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PdContextError as exc:  # pragma: no cover - every subclass is one of the above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
