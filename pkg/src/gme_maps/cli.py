"""Command line front end: detect, threshold, scan, mu, verify, witness.

Every run is determined by its flags and seed; reports are emitted as
canonical JSON (CSV for scans) so identical invocations produce identical
bytes.  Exit code 2 signals a configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import criteria, maps, serialize, states
from .detect import (ScanRow, detect, lambda_scan, noise_threshold,
                     verify_biseparable_positivity, white_noise_threshold)
from .operators import MpOperator, SiteDims
from .states import PureState

DEFAULT_TOL = 1e-9


def _threads_default() -> int:
    env = os.environ.get("GME_MAPS_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _add_map_args(p: argparse.ArgumentParser, with_witness: bool = False) -> None:
    p.add_argument("--map", choices=criteria.MAP_IDS, help="cataloged map id")
    p.add_argument("--map-file", help="map expression JSON (mapexpr-v1); used instead of --map")
    if with_witness:
        p.add_argument("--witness-file", help="witness JSON (mpop-v1); used instead of --map")
    p.add_argument("--n", type=int, default=3, help="number of parties (default 3)")
    p.add_argument("--d", type=int, default=None,
                   help="local dimension (default 2, or 3 for mu-choi)")


def _add_state_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--state", choices=("ghz", "w", "ppt", "mixed"),
                   help="named state family")
    p.add_argument("--state-file", help="state JSON (mpop-v1)")
    p.add_argument("--noise", type=float, default=None,
                   help="visibility p for ghz/w, white-noise fraction for ppt")
    p.add_argument("--lam", default="0.1111111111111111",
                   help="ppt family parameter(s): one value or l1,l2,l3")


def _parse_lam(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in str(text).split(",")]
    if len(parts) == 1:
        return (parts[0],) * 3
    if len(parts) == 3:
        return tuple(parts)  # type: ignore[return-value]
    raise ValueError("--lam takes one value or three comma-separated values")


def _resolve_d(args) -> int:
    if args.d is not None:
        return args.d
    return 3 if getattr(args, "map", None) == "mu-choi" else 2


def _dims_of_expr(expr: maps.MapExpr, args) -> SiteDims:
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, maps.Lift):
            return node.dims
        for attr in ("child", "outer", "inner"):
            if hasattr(node, attr):
                stack.append(getattr(node, attr))
        if isinstance(node, maps.Sum):
            stack.extend(node.children)
    dims = SiteDims((_resolve_d(args),) * args.n)
    if dims.total != expr.dim:
        raise ValueError(
            f"map file dimension {expr.dim} does not match --n/--d ({dims.dims})")
    return dims


def _build_gme_map(args) -> criteria.GmeMap:
    if getattr(args, "witness_file", None):
        w = serialize.load_state(args.witness_file)
        if isinstance(w, PureState):
            raise ValueError("witness file must hold a matrix, not a pure state")
        return criteria.witness_to_map(w)
    if getattr(args, "map_file", None):
        with open(args.map_file, encoding="utf-8") as fh:
            expr = serialize.mapexpr_from_json(json.load(fh))
        return criteria.GmeMap("map-file", expr, _dims_of_expr(expr, args))
    if not args.map:
        raise ValueError("either --map, --map-file or --witness-file is required")
    return criteria.build_map(args.map, args.n, _resolve_d(args))


def _build_state(args, m: criteria.GmeMap) -> MpOperator:
    if args.state_file:
        obj = serialize.load_state(args.state_file)
        return obj.density() if isinstance(obj, PureState) else obj
    n, d = m.dims.n, m.dims.dims[0]
    if args.state == "ghz":
        psi = states.ghz(n, d)
        return states.depolarized(psi, 1.0 if args.noise is None else args.noise)
    if args.state == "w":
        if d != 2:
            raise ValueError("the w state is defined for qubits")
        psi = states.w_state(n)
        return states.depolarized(psi, 1.0 if args.noise is None else args.noise)
    if args.state == "ppt":
        if m.dims.dims != (3, 3, 3):
            raise ValueError("the ppt family is a 3-qutrit family (n=3, d=3)")
        rho = states.ppt_family(_parse_lam(args.lam))
        if args.noise:
            mm = states.maximally_mixed(rho.dims).mat
            rho = MpOperator(rho.dims, args.noise * mm + (1 - args.noise) * rho.mat)
        return rho
    if args.state == "mixed":
        return states.maximally_mixed(m.dims)
    raise ValueError("either --state or --state-file is required")


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


@dataclass(frozen=True)
class RunConfig:
    command: str
    map_id: str
    n: int
    d: int
    state: str
    tolerance: float
    seed: int | None = None
    samples: int | None = None


def _config(args, command: str, m: criteria.GmeMap, state_desc: str) -> RunConfig:
    return RunConfig(command, m.label, m.dims.n, m.dims.dims[0], state_desc,
                     args.tol, getattr(args, "seed", None),
                     getattr(args, "samples", None))


def _cmd_detect(args) -> int:
    m = _build_gme_map(args)
    rho = _build_state(args, m)
    verdict = detect(m, rho, args.tol)
    if args.export_map:
        with open(args.export_map, "w", encoding="utf-8") as fh:
            json.dump(serialize.mapexpr_to_json(m.expr), fh)
            fh.write("\n")
    report = {
        "config": _config(args, "detect", m, args.state or args.state_file or ""),
        "min_eig": verdict.min_eig,
        "detected": verdict.detected,
        "tolerance": verdict.tolerance,
        "eigvec": verdict.eigvec,
    }
    _emit(serialize.dumps_report(report), args.output)
    return 0


def _cmd_threshold(args) -> int:
    m = _build_gme_map(args)
    if args.state == "ppt":
        rho = states.ppt_family(_parse_lam(args.lam))
        res = white_noise_threshold(m, rho, args.tol)
        kind = "white-noise"
    else:
        n, d = m.dims.n, m.dims.dims[0]
        psi = states.ghz(n, d) if args.state in (None, "ghz") else states.w_state(n)
        res = noise_threshold(m, psi, args.tol)
        kind = "visibility"
    report = {
        "config": _config(args, "threshold", m, args.state or "ghz"),
        "kind": kind,
        "p_star": res.p_star,
        "bracket": list(res.bracket),
        "iterations": res.iterations,
        "residual": res.residual,
        "warning": res.warning,
    }
    _emit(serialize.dumps_report(report), args.output)
    return 0


def _parse_grid(text: str) -> list[float]:
    """start:stop:step, inclusive of start, exclusive of stop."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise ValueError("--grid expects start:stop:step") from exc
    if step <= 0 or stop <= start:
        raise ValueError("--grid needs step > 0 and stop > start")
    count = int(np.ceil((stop - start) / step - 1e-12))
    return [start + i * step for i in range(count)]


def _cmd_scan(args) -> int:
    m = _build_gme_map(args)
    grid = _parse_grid(args.grid)
    if args.family == "ppt-qutrit":
        rows = lambda_scan(m, grid, noise=args.noise or 0.0, tol=args.tol,
                               threads=args.threads)
    else:
        psi = (states.ghz(m.dims.n, m.dims.dims[0]) if args.family == "noisy-ghz"
               else states.w_state(m.dims.n))

        def row(p: float) -> ScanRow:
            v = detect(m, states.depolarized(psi, p), args.tol)
            return ScanRow(p, v.min_eig, v.detected)

        rows = [row(p) for p in grid]
    _emit(serialize.scan_csv(rows), args.output)
    return 0


def _cmd_mu(args) -> int:
    d = args.d if args.d is not None else {"transpose": 2, "reduction": 2,
                                           "breuer-hall": 4}[args.primitive]
    if args.primitive == "transpose":
        prim = maps.transpose_map(d)
    elif args.primitive == "reduction":
        prim = maps.reduction_map(d)
    else:
        prim = maps.breuer_hall_map(d)
    estimate = maps.estimate_mu(prim, d, args.samples, args.seed)
    constant = maps.mu_constant(prim)
    report = {
        "primitive": args.primitive,
        "d": d,
        "samples": args.samples,
        "seed": args.seed,
        "estimate": estimate,
        "constant": constant,
        "within_tolerance": bool(abs(estimate - float(constant)) <= 1e-9),
    }
    _emit(serialize.dumps_report(report), args.output)
    return 0


def _cmd_verify(args) -> int:
    m = _build_gme_map(args)
    report = verify_biseparable_positivity(m, args.samples, args.mixtures,
                                               args.seed, args.tol,
                                               threads=args.threads)
    _emit(serialize.dumps_report(report), args.output)
    return 0 if report.passed else 1


def _cmd_witness(args) -> int:
    m = _build_gme_map(args)
    rho = _build_state(args, m)
    verdict = detect(m, rho, args.tol)
    psi = PureState(m.dims, verdict.eigvec)
    w = criteria.map_to_witness(m, psi)
    serialize.save_state(args.output, w)
    summary = {
        "config": _config(args, "witness", m, args.state or args.state_file or ""),
        "min_eig": verdict.min_eig,
        "detected": verdict.detected,
        "witness_expectation": float(np.trace(w.mat @ rho.mat).real),
        "output": args.output,
    }
    sys.stdout.write(serialize.dumps_report(summary))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gme-maps",
        description="Detect genuine multipartite entanglement with lifted positive maps.")
    parser.add_argument("--threads", type=int, default=_threads_default(),
                        help="worker threads for scans and verification "
                             "(default: GME_MAPS_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="apply a map to a state and report the verdict")
    _add_map_args(p, with_witness=True)
    _add_state_args(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--output", help="write the JSON report here instead of stdout")
    p.add_argument("--export-map", help="also write the map expression (mapexpr-v1) here")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("threshold", help="bisect the noise threshold of a state family")
    _add_map_args(p)
    _add_state_args(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("scan", help="scan a parameter grid, emitting CSV")
    _add_map_args(p)
    p.add_argument("--family", choices=("ppt-qutrit", "noisy-ghz", "noisy-w"),
                   default="ppt-qutrit")
    p.add_argument("--grid", required=True, help="start:stop:step (stop exclusive)")
    p.add_argument("--noise", type=float, default=0.0,
                   help="extra white-noise fraction for ppt-qutrit rows")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("mu", help="estimate a primitive's minimal output eigenvalue")
    p.add_argument("--primitive", choices=("transpose", "reduction", "breuer-hall"),
                   required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_mu)

    p = sub.add_parser("verify", help="fuzz biseparable positivity of a map")
    _add_map_args(p)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--mixtures", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("witness", help="export the witness extracted from a detection")
    _add_map_args(p)
    _add_state_args(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--output", required=True, help="witness JSON path")
    p.set_defaults(func=_cmd_witness)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
