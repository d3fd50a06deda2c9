"""Command line front end: ``slconifold compute|check|spectrum|stability|verify``."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import mesh as M
from .errors import ConifoldError, InconsistentTopologyError, InvalidInputError
from .moduli import ConeData, stability_check
from .scenario import (
    build_topology,
    load_config,
    render,
    resolve_ends,
    run,
    verify_report,
)
from .spectra import sphere_spectrum, torus_spectrum
from .topology import validate

EXIT_OK = 0


def _parse_basis(text: str) -> list[list[float]]:
    try:
        rows = [[float(x) for x in r.replace(",", " ").split()] for r in text.split(";")]
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse basis {text!r}: {exc}") from exc
    if not rows or any(len(r) != len(rows) for r in rows):
        raise InvalidInputError(f"basis {text!r} must be a square matrix written as 'a b; c d'")
    return rows


def cmd_compute(args) -> int:
    cfg = load_config(args.config, strict=args.strict)
    sys.stdout.write(render(run(cfg), args.format))
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = load_config(args.config, strict=args.strict)
    problems = validate(build_topology(cfg))
    for w in cfg.warnings:
        print(f"warning: {w}")
    if problems:
        for p in problems:
            print(f"violation: {p}")
        raise InconsistentTopologyError("; ".join(problems), problems)
    print(f"ok: m = {cfg.m}, case {cfg.case}, s = {len(cfg.cs_ends)}, l = {len(cfg.ac_ends)}")
    return EXIT_OK


def cmd_stability(args) -> int:
    cfg = load_config(args.config, strict=args.strict)
    if not cfg.cs_ends:
        raise InvalidInputError("stability needs at least one CS end")
    notes: list[str] = []
    out = []
    for i, r in enumerate(x for x in resolve_ends(cfg, notes) if x.config.kind == "CS"):
        cone = ConeData(r.spectrum, cfg.m, r.config.sym_dim, r.config.link.is_sphere)
        out.append({"cs_end": i, **stability_check(cone, cfg.tol).as_dict()})
    if args.format == "machine":
        sys.stdout.write(json.dumps({"stability": out, "warnings": notes}, indent=2) + "\n")
    else:
        for v in out:
            verdict = "stable" if v["stable"] else "unstable"
            print(f"cone {v['cs_end']}: {verdict}")
            for g in v["expected"]:
                print(f"  gamma={g}: found {v['found'][g]}, expected {v['expected'][g]}  {v['flags'][g]}")
            for g, k in v["extra_weights"]:
                print(f"  extra weight gamma={g:.12g} with multiplicity {k}")
        for n in notes:
            print(f"warning: {n}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    residuals = None
    if args.link == "sphere":
        spec = sphere_spectrum(args.dim, args.cutoff)
    elif args.link == "torus":
        spec = torus_spectrum(np.array(_parse_basis(args.basis)), args.cutoff)
    else:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = M.eigensolve(M.load_off(args.path), args.cutoff, tol=args.tol, strict=args.strict)
        spec, residuals = res.spectrum, max(res.residuals, default=0.0)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    if args.format == "machine":
        d = {
            "source": spec.source,
            "cutoff": float(f"{spec.cutoff:.12g}"),
            "entries": [[float(f"{e:.12g}"), k] for e, k in spec.entries],
        }
        if residuals is not None:
            d["max_residual"] = float(f"{residuals:.12g}")
        sys.stdout.write(json.dumps(d, indent=2) + "\n")
    else:
        print(f"{spec.source} spectrum up to {spec.cutoff:.12g}")
        for e, k in spec.entries:
            print(f"  {e:>16.12g}  x{k}")
        if residuals is not None:
            print(f"max residual {residuals:.3g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    path = Path(args.report)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read report {path}: {exc}") from exc
    problems = verify_report(data, base_dir=path.parent)
    if problems:
        for p in problems:
            print(f"mismatch: {p}")
        return 6
    print("ok: every dimension reproduced")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="slconifold",
        description="Exceptional weights, cone stability and moduli dimensions of SL conifolds.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(name, helptext, fn):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("config", help="scenario JSON file")
        sp.add_argument("--strict", action="store_true", help="reject unknown keys and incomplete spectra")
        sp.set_defaults(func=fn)
        return sp

    sp = with_config("compute", "run the full pipeline", cmd_compute)
    sp.add_argument("--format", choices=("text", "machine"), default="text")
    with_config("check", "validate config and topology only", cmd_check)
    sp = with_config("stability", "stability verdicts of CS cones", cmd_stability)
    sp.add_argument("--format", choices=("text", "machine"), default="text")

    sp = sub.add_parser("spectrum", help="dump a link spectrum")
    sp.add_argument("--format", choices=("text", "machine"), default="text")
    links = sp.add_subparsers(dest="link", required=True)
    s = links.add_parser("sphere")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--cutoff", type=float, required=True)
    s = links.add_parser("torus")
    s.add_argument("--basis", required=True, help="rows separated by ';', e.g. '1 0; 0.3 1'")
    s.add_argument("--cutoff", type=float, required=True)
    s = links.add_parser("mesh")
    s.add_argument("path", help="closed oriented triangle mesh in OFF format")
    s.add_argument("--cutoff", type=float, required=True)
    s.add_argument("--tol", type=float, default=M.DEFAULT_TOL)
    s.add_argument("--strict", action="store_true", help="reject badly shaped triangles")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("verify", help="recompute a machine report and compare")
    sp.add_argument("report")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except ConifoldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
