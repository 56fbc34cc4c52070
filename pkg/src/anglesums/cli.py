"""Command-line entry point: ``anglesums <subcommand> ...``.

Exit codes: 0 pass, 1 statistical failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .cones import solid_angle_mc
from .errors import AngleSumsError, DegenerateInput, GeneralPositionViolation, GPViolation
from .geometry import f_vector, normal_cone, polytope_from_json, tangent_cone
from .harness import (
    MODELS,
    QUANTITIES,
    ExperimentConfig,
    emit_tables,
    format_rows,
    format_table,
    row_to_dict,
    run_affine_invariance,
    run_experiment,
    run_projection_theorem,
    verify_identities,
)
from .models import FIXTURES
from .rng import stream

EXIT_OK, EXIT_STAT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

_CFG_FLAGS = {"model": "model", "n": "n", "d": "d", "j": "j", "k": "k", "quantity": "quantity",
              "trials": "trials", "samples": "samples_per_angle", "seed": "seed", "tol": "tol",
              "fixture": "fixture", "walk_kind": "walk_kind"}


class ConfigError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    """``"3"``, ``"1,2,5"`` or ``"1-10"``."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def _matrix(text: str, d: int) -> np.ndarray:
    presets = {"identity": np.eye(d), "shear": np.eye(d) + np.eye(d, k=1)}
    if text in presets:
        return presets[text]
    if text.startswith("diag:"):
        return np.diag([float(x) for x in text[5:].split(",")])
    return np.array([[float(x) for x in row.split(",")] for row in text.split(";")])


def _add_config_flags(p: argparse.ArgumentParser, quantity_required: bool = True):
    p.add_argument("--config", type=Path, help="JSON file with experiment settings; flags override it")
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--fixture", choices=FIXTURES)
    p.add_argument("--walk-kind", dest="walk_kind", choices=("iid-gaussian",))
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--quantity", choices=QUANTITIES)
    p.add_argument("--trials", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--threshold", type=float, default=3.0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", type=Path)


def _config(args, **defaults) -> ExperimentConfig:
    data = dict(defaults)
    if args.config is not None:
        try:
            loaded = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if "samples" in loaded:
            loaded["samples_per_angle"] = loaded.pop("samples")
        data.update(loaded)
    for flag, key in _CFG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value
    missing = [key for key in ("model", "n", "d", "j", "quantity") if key not in data]
    if missing:
        raise ConfigError(f"missing settings: {', '.join(missing)}")
    try:
        return ExperimentConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _write(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _cmd_tables(args) -> int:
    ks = _int_list(args.k) if args.k is not None else [None]
    rows = emit_tables(args.quantity, args.model, _int_list(args.n), _int_list(args.d),
                       _int_list(args.j), ks, args.fixture, args.tol)
    if not rows:
        raise ConfigError("no valid index combination in the requested grid")
    _write(format_table(rows, args.format), args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = _config(args)
    row = run_experiment(cfg, workers=args.workers)
    text = format_rows([row], args.format) if args.format == "csv" else json.dumps(row_to_dict(row), indent=2) + "\n"
    _write(text, args.out)
    return EXIT_OK if row.passed(args.threshold) else EXIT_STAT


def _cmd_project_theorem(args) -> int:
    cfg = _config(args, model="projection", quantity="grassmann_sum")
    if args.k is None:
        raise ConfigError("--k is required")
    row = run_projection_theorem(cfg, args.k)
    if args.format == "csv":
        text = format_rows([row])
    else:
        text = json.dumps(row_to_dict(row), indent=2) + "\n"
    _write(text, args.out)
    return EXIT_OK if row.passed(args.threshold) else EXIT_STAT


def _cmd_affine(args) -> int:
    cfg = _config(args)
    try:
        A = _matrix(args.matrix, cfg.d)
    except ValueError as exc:
        raise ConfigError(f"bad --matrix: {exc}") from exc
    try:
        res = run_affine_invariance(cfg, A, workers=args.workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.format == "csv":
        text = format_rows([res.base, res.transformed])
        text += f"# paired difference {res.difference!r} stderr {res.stderr!r} z {res.z_score!r}\n"
    else:
        text = json.dumps({"base": row_to_dict(res.base), "transformed": row_to_dict(res.transformed),
                           "difference": res.difference, "stderr": res.stderr, "z": res.z_score},
                          indent=2) + "\n"
    _write(text, args.out)
    return EXIT_OK if res.passed(args.threshold) else EXIT_STAT


def _cmd_verify(args) -> int:
    rep = verify_identities(perturbation=args.perturb, seed=args.seed, crofton_samples=args.samples)
    _write("\n".join(rep.lines()) + "\n", args.out)
    return EXIT_OK if rep.ok else EXIT_STAT


def _cmd_angles(args) -> int:
    try:
        P = polytope_from_json(Path(args.polytope).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {args.polytope}: {exc}") from exc
    rng = stream(args.seed, 0)
    faces = []
    for dim, group in sorted(P.lattice.items()):
        if dim == P.dim_ambient:
            continue
        for F in group:
            inner = solid_angle_mc(tangent_cone(P, F), args.samples, rng)
            outer = solid_angle_mc(normal_cone(P, F), args.samples, rng)
            faces.append({"dim": dim, "vertices": list(F.vertex_indices),
                          "internal": inner.mean, "internal_stderr": inner.stderr,
                          "external": outer.mean, "external_stderr": outer.stderr})
    sums = {}
    for dim in range(P.dim_ambient):
        group = [f for f in faces if f["dim"] == dim]
        sums[dim] = {"internal": math.fsum(f["internal"] for f in group),
                     "external": math.fsum(f["external"] for f in group)}
    out = {"f_vector": list(f_vector(P)), "samples": args.samples, "seed": args.seed,
           "angle_sums": sums, "faces": faces}
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anglesums",
                                     description="Angle sums of random polytopes: theory and simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", help="theory-only tables over an index grid")
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--quantity", choices=QUANTITIES, required=True)
    p.add_argument("--fixture", choices=FIXTURES)
    p.add_argument("--n", required=True, help="e.g. 6, 1-10 or 3,5,7")
    p.add_argument("--d", required=True)
    p.add_argument("--j", default="0")
    p.add_argument("--k")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=_cmd_tables)

    p = sub.add_parser("simulate", help="Monte Carlo estimate against theory")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("project-theorem", help="gamma-sums versus face survival under random projection")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_project_theorem)

    p = sub.add_parser("affine-invariance", help="compare P with A P on identical draws")
    _add_config_flags(p)
    p.add_argument("--matrix", default="identity",
                   help="identity, shear, diag:3,1 or rows like '3,0;0,1'")
    p.set_defaults(func=_cmd_affine)

    p = sub.add_parser("verify-identities", help="exact, quadrature and Monte Carlo self-checks")
    p.add_argument("--perturb", type=float, default=0.0, help="added to every internal simplex sum")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("angles", help="per-face internal and external angles of a polytope")
    p.add_argument("polytope", help="JSON file with a 'vertices' list")
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=_cmd_angles)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GPViolation, GeneralPositionViolation, DegenerateInput) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except AngleSumsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
