"""Command-line front end: table building and caching, seesaw runs, sweeps,
and the validation suites.

Cache files are written atomically (temp file + rename) into a directory
keyed by the table parameters; the PERMSYM_CACHE environment variable
overrides any --cache-dir flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from math import comb
from pathlib import Path

from . import __version__
from .algebras import AlgebraSpec, algebra_orbits
from .blockmap import ChangeOfBasis, load_change_of_basis, save_change_of_basis
from .channels import (
    ChoiMatrix,
    adc,
    choi_from_json,
    depolarizing,
    reference_curves,
)
from .errors import CapacityError
from .orbits import SystemSpec, enumerate_orbits
from .seesaw import SeesawConfig, SeesawEngine, best_over_n, sweep
from .tableaux import partitions


def _cache_dir(args) -> Path:
    env = os.environ.get("PERMSYM_CACHE")
    path = Path(env) if env else Path(args.cache_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _atomic_write(path: Path, write_fn):
    # keep the .npz suffix so numpy does not append one of its own
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="tmp-", suffix=path.suffix)
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _load_or_build_cob(d: int, n: int, cache: Path, report) -> ChangeOfBasis:
    path = cache / f"cob_d{d}_n{n}.npz"
    if path.exists():
        report(f"cache hit: {path.name}")
        return load_change_of_basis(path)
    cob = ChangeOfBasis(d, n)
    _atomic_write(path, lambda tmp: save_change_of_basis(cob, tmp))
    report(f"built and cached: {path.name}")
    return cob


def cmd_tables(args) -> int:
    cache = _cache_dir(args)
    d, n, d_r, ell = args.d, args.n, args.d_r, args.flags
    out = []

    def report(line):
        out.append(line)

    report(f"permsym {__version__}")
    try:
        if ell > 1:
            spec = AlgebraSpec((d,) * ell, n)
            basis = algebra_orbits(spec)
            report(f"flagged algebra (ell={ell}, d={d}, n={n}): {len(basis)} orbits")
            for k in range(n + 1):
                _load_or_build_cob(d, k, cache, report)
        else:
            basis = enumerate_orbits(SystemSpec((d,), n))
            report(f"single system (d={d}, n={n}): {len(basis)} orbits")
            _load_or_build_cob(d, n, cache, report)
        report(f"partitions: {len(partitions(d, n))}")
        joint = comb(n + (d * d * d * d) - 1, n)
        report(f"joint orbit count (full support, both sides d={d}): {joint}")
        report(f"reference dimension d_R={d_r} rides along every block")
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print("\n".join(out))
    return 0


def _build_channel(args) -> ChoiMatrix:
    name = args.channel
    if name == "adc":
        if args.gamma is None:
            raise ValueError("--gamma required for the adc channel")
        return adc(args.gamma)
    if name == "depolarizing":
        if args.p is None:
            raise ValueError("--p required for the depolarizing channel")
        return depolarizing(args.p)
    if name.startswith("file:") or name.startswith("flagged:"):
        path = name.split(":", 1)[1]
        return choi_from_json(Path(path).read_text())
    raise ValueError(f"unknown channel {name!r}")


def _config_from(args) -> SeesawConfig:
    return SeesawConfig(
        n=args.n,
        d=args.d,
        delta=args.delta,
        delta_power=args.delta_power,
        max_outer=args.max_outer,
        max_power=args.max_power,
        seeds=args.seeds,
        rng_seed=args.rng_seed,
    )


def _emit(text: str, args):
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        print(text)


def _cached_maps(channel: ChoiMatrix, n: int, cache: Path):
    """Change-of-basis maps for both sides of the run, cache-backed and
    keyed by (input dim, output dim, n, reference dim, flag count) through
    the per-(d, k) files they decompose into."""
    from .algebras import AlgebraChangeOfBasis, AlgebraSpec, algebra_orbits

    quiet = lambda _line: None
    cob_a = _load_or_build_cob(channel.d_in, n, cache, quiet)
    needed = [n] if channel.num_flags == 1 else list(range(n + 1))
    block_cobs = {
        (channel.d_out, k): _load_or_build_cob(channel.d_out, k, cache, quiet)
        for k in needed
    }
    spec_b = AlgebraSpec((channel.d_out,) * channel.num_flags, n)
    bcob = AlgebraChangeOfBasis(spec_b, block_cobs=block_cobs)
    return cob_a, bcob


def cmd_seesaw(args) -> int:
    try:
        channel = _build_channel(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: invalid channel: {exc}", file=sys.stderr)
        return 1
    config = _config_from(args)
    try:
        cob_a, bcob = _cached_maps(channel, config.n, _cache_dir(args))
        result = SeesawEngine(channel, config, cob_a=cob_a, bcob=bcob).run()
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    payload = result.to_payload(include_timing=args.timing)
    payload["version"] = __version__
    payload["channel"] = {
        "name": args.channel,
        "gamma": args.gamma,
        "p": args.p,
    }
    if args.format == "csv":
        lines = [
            f"# permsym {__version__}",
            "fidelity,n,d,seed,converged",
            f"{result.fidelity:.12f},{result.n},{result.d},"
            f"{result.seed_index},{int(result.converged)}",
        ]
        _emit("\n".join(lines) + "\n", args)
    else:
        _emit(json.dumps(payload, indent=2, sort_keys=True), args)
    return 0 if result.converged else 2


def cmd_sweep(args) -> int:
    params = [float(v) for v in args.grid.split(",") if v != ""]
    lo, hi = (int(v) for v in args.n_range.split(":"))
    n_values = list(range(lo, hi + 1))
    config = _config_from(args)
    results = sweep(args.family, params, n_values, config)
    best = best_over_n(results)
    ref_kind = "leung4" if args.family == "adc" else "fivequbit"
    uncoded_kind = "uncoded_adc" if args.family == "adc" else "uncoded_depolarizing"
    lines = [f"# permsym {__version__} sweep family={args.family} rng_seed={config.rng_seed}"]
    lines.append(f"param,n,fidelity,best_flag,uncoded,{ref_kind}")
    for res in results:
        flag = int(best[res.param] is res)
        lines.append(
            f"{res.param},{res.n},{res.fidelity:.12f},{flag},"
            f"{reference_curves(uncoded_kind, res.param):.12f},"
            f"{reference_curves(ref_kind, res.param):.12f}"
        )
    _emit("\n".join(lines) + "\n", args)
    return 0


def cmd_validate(args) -> int:
    from .validate import run_level

    t0 = time.perf_counter()
    rows = run_level(args.level)
    failed = [name for name, ok, _ in rows if not ok]
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    print(f"{len(rows) - len(failed)}/{len(rows)} checks passed "
          f"({time.perf_counter() - t0:.1f} s)")
    if failed:
        print(f"failed invariants: {', '.join(failed)}", file=sys.stderr)
        return 4
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permsym",
        description="Permutation-invariant channel-fidelity toolbox",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cache-dir", default=".permsym-cache")
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    run_opts = argparse.ArgumentParser(add_help=False)
    run_opts.add_argument("--n", type=int, default=1)
    run_opts.add_argument("--d", type=int, default=2)
    run_opts.add_argument("--seeds", type=int, default=2)
    run_opts.add_argument("--rng-seed", type=int, default=0)
    run_opts.add_argument("--delta", type=float, default=1e-7)
    run_opts.add_argument("--delta-power", type=float, default=1e-9)
    run_opts.add_argument("--max-outer", type=int, default=600)
    run_opts.add_argument("--max-power", type=int, default=1000)

    p_tables = sub.add_parser("tables", parents=[common], help="build and cache tables")
    p_tables.add_argument("--d", type=int, required=True)
    p_tables.add_argument("--n", type=int, required=True)
    p_tables.add_argument("--d-r", type=int, default=2)
    p_tables.add_argument("--flags", type=int, default=1)
    p_tables.set_defaults(fn=cmd_tables)

    p_seesaw = sub.add_parser("seesaw", parents=[common, run_opts], help="run one seesaw")
    p_seesaw.add_argument("--channel", required=True)
    p_seesaw.add_argument("--gamma", type=float, default=None)
    p_seesaw.add_argument("--p", type=float, default=None)
    p_seesaw.add_argument("--timing", action="store_true",
                          help="include wall time (breaks byte-identical output)")
    p_seesaw.set_defaults(fn=cmd_seesaw)

    p_sweep = sub.add_parser("sweep", parents=[common, run_opts], help="parameter sweep")
    p_sweep.add_argument("--family", choices=("adc", "depolarizing"), required=True)
    p_sweep.add_argument("--grid", required=True, help="comma-separated parameters")
    p_sweep.add_argument("--n-range", required=True, help="lo:hi inclusive")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_val = sub.add_parser("validate", parents=[common], help="invariant suites")
    p_val.add_argument("--level", choices=("quick", "full"), default="quick")
    p_val.set_defaults(fn=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
