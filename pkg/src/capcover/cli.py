"""Command line entry point.

Subcommands:
  approximate  build an inner eps-approximation and write its summary
  pack         greedy boundary packing of shrunken Macbeath regions
  polar-check  per-direction cap / polar-cap volume products
  experiment   grid sweep over bodies x eps x methods x seeds
  verify       witness-collector stress report (exit 2 on violation)

Exit codes: 0 success, 2 verification invariant violated, 3 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bodies import body_from_spec
from .caps import boundary_packing, make_cap, polytopal_proxy, volume_histogram
from .construction import ConstructionConfig, approximate
from .errors import CapCoverError, ConfigError
from .polar import pi_map
from .sampling import unit_directions

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_CONFIG = 3


def _load_body(path: str):
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read body spec {path}: {exc}")
    return body_from_spec(spec), spec


def _write_json(payload: dict, out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _cmd_approximate(args) -> int:
    K, spec = _load_body(args.body)
    res = approximate(K, args.eps, ConstructionConfig(seed=args.seed))
    payload = res.to_json_dict()
    payload["body_spec"] = spec
    if args.format == "json":
        path = _write_json(payload, args.out, "approximate.json")
    elif args.format == "csv":
        from .metrics import CSV_COLUMNS
        import csv as _csv
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "approximate.csv")
        with open(path, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            w.writerow([res.body_desc, res.dim, repr(res.eps), "layered",
                        res.seed, res.profile.f_vector[0], res.profile.total,
                        repr(res.hausdorff_est), repr(res.runtime_ms)])
    else:
        raise ConfigError(f"unknown format {args.format!r}")
    print(path)
    return EXIT_OK


def _cmd_pack(args) -> int:
    K, spec = _load_body(args.body)
    P = polytopal_proxy(K, args.eps)
    pack = boundary_packing(P, args.eps, seed=args.seed, n_dirs=args.dirs)
    payload = {
        "body_spec": spec,
        "eps": args.eps,
        "seed": args.seed,
        "n_dirs": args.dirs,
        "entries": pack.to_records(),
        "coverage": pack.coverage,
        "histogram": {str(k): v for k, v in
                      sorted(volume_histogram(pack).items())},
    }
    path = _write_json(payload, args.out, "pack.json")
    print(path)
    return EXIT_OK


def _cmd_polar_check(args) -> int:
    K, spec = _load_body(args.body)
    P = polytopal_proxy(K, args.eps).polytope
    d = P.dim
    records = []
    for u in unit_directions(d, args.dirs):
        C = make_cap(P, u, args.eps)
        pc = pi_map(P, C, c=args.c)
        prod = C.volume * pc.volume
        records.append({
            "direction": [float(v) for v in u],
            "cap_volume": C.volume,
            "polar_cap_volume": pc.volume,
            "normalized_product": prod / args.eps ** (d + 1),
        })
    vals = np.array([r["normalized_product"] for r in records])
    payload = {
        "body_spec": spec,
        "eps": args.eps,
        "c": args.c,
        "records": records,
        "band": {"min": float(vals.min()), "max": float(vals.max()),
                 "median": float(np.median(vals)),
                 "ratio": float(vals.max() / vals.min())},
    }
    path = _write_json(payload, args.out, "polar_check.json")
    print(path)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    from . import metrics
    try:
        with open(args.grid) as fh:
            grid = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read grid {args.grid}: {exc}")
    records, fits = metrics.run_experiment(grid)
    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    written = metrics.emit(records, fits, args.out, formats or ("json",))
    for path in written.values():
        print(path)
    return EXIT_OK


def _cmd_verify(args) -> int:
    K, spec = _load_body(args.body)
    cfg = ConstructionConfig(seed=args.seed, verify_halfspaces=args.halfspaces)
    res = approximate(K, args.eps, cfg)
    rep = dict(res.stats["verification"])
    rep["hausdorff_est"] = res.hausdorff_est
    rep["hausdorff_bound"] = 1.05 * args.eps
    ok = (rep["fail_both"] == 0
          and rep["own_point_fail"] == 0
          and rep["width_eps_witness_fail"] == 0
          and res.hausdorff_est <= 1.05 * args.eps)
    rep["ok"] = ok
    rep["body_spec"] = spec
    json.dump(rep, sys.stdout, indent=2, sort_keys=True)
    print()
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="capcover")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("approximate", help="inner eps-approximation")
    p.add_argument("--body", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(func=_cmd_approximate)

    p = sub.add_parser("pack", help="boundary Macbeath packing histogram")
    p.add_argument("--body", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--dirs", type=int, default=2048)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_pack)

    p = sub.add_parser("polar-check", help="cap/polar-cap volume product sweep")
    p.add_argument("--body", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--dirs", type=int, default=256)
    p.add_argument("--c", type=float, default=8.0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_polar_check)

    p = sub.add_parser("experiment", help="grid sweep with emitters")
    p.add_argument("--grid", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--format", default="json,csv")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("verify", help="witness-collector stress report")
    p.add_argument("--body", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--halfspaces", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapCoverError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
