"""Command-line front end: simulation, verification, tiling sampling and
rendering, density and limit-shape reports.

Machine output (JSON / JSONL / CSV) goes to stdout or --out; human summaries
go to stderr.  All randomness is controlled by --seed, falling back to the
config file and then the TASEP_REWIND_SEED environment variable, so repeated
invocations with identical flags produce byte-identical machine output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import verify as verify_mod
from .bernoulli import sample_walk, simulate_D
from .bhp import simulate_bhp
from .core import ParticleConfig, RngStream, packed_array
from .markov_maps import SpectralParams, pushblock, t2_mcmc
from .stationary import density_profile, simulate_stationary
from .stats import mc_runner
from .tasep import SpeedPlan, empirical_density, height, simulate_tasep
from .tilings import HexTiling, hexagon_top_row, packed_hex_array, render_svg

__all__ = ["main", "parse_and_dispatch"]


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _resolve_seed(args: argparse.Namespace, config: dict) -> int:
    if args.seed is not None:
        return args.seed
    if "seed" in config:
        return int(config["seed"])
    env = os.environ.get("TASEP_REWIND_SEED")
    return int(env) if env else 0


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tasep-rewind")
    parser.add_argument("--config", help="TOML file with default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run seeded simulations, one JSONL record per replica")
    sim.add_argument("--process", required=True, choices=["tasep", "bhp", "stationary", "pushblock", "bernoulli"])
    sim.add_argument("--t", type=float, default=1.0)
    sim.add_argument("--tau", type=float, default=0.0)
    sim.add_argument("--q", type=float, default=1.0, help="geometric speed ratio (1 = homogeneous)")
    sim.add_argument("--n", type=int, default=1)
    sim.add_argument("--depth", type=int, default=5)
    sim.add_argument("--beta", type=float, default=0.6)
    sim.add_argument("--m", type=int, default=30)
    sim.add_argument("--duration", type=float, default=1.0)
    sim.add_argument("--threads", type=int, default=0, help="replica workers (0 = available parallelism)")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out")

    ver = sub.add_parser("verify", help="run a verification check; exit 1 on failure")
    ver.add_argument(
        "which",
        choices=["reversal", "reversal-exact", "qmap", "gibbs-swap", "stationary", "corollary", "bernoulli", "harmonic"],
    )
    ver.add_argument("--t", type=float)
    ver.add_argument("--tau", type=float)
    ver.add_argument("--q", type=float)
    ver.add_argument("--m", type=int)
    ver.add_argument("--n", type=int)
    ver.add_argument("--dt", type=float)
    ver.add_argument("--seed", type=int)
    ver.add_argument("--out")

    til = sub.add_parser("tiling", help="hexagon tilings: sample, verify, render")
    til.add_argument("action", choices=["sample", "verify", "render"])
    til.add_argument("--a", type=int, default=2)
    til.add_argument("--b", type=int, default=2)
    til.add_argument("--c", type=int, default=2)
    til.add_argument("--q", type=float, default=0.8)
    til.add_argument("--n", type=int, default=1)
    til.add_argument("--sweeps", type=int, default=48)
    til.add_argument("--seed", type=int)
    til.add_argument("--svg")
    til.add_argument("--out")

    den = sub.add_parser("density", help="empirical vs hydrodynamic density, CSV (z, rho)")
    den.add_argument("--t", type=float, default=100.0)
    den.add_argument("--runs", type=int, default=5)
    den.add_argument("--bins", type=int, default=48)
    den.add_argument("--zmax", type=float, default=1.2)
    den.add_argument("--seed", type=int)
    den.add_argument("--out")

    shp = sub.add_parser("shape", help="height-function limit-shape report")
    shp.add_argument("--t", type=float, default=200.0)
    shp.add_argument("--runs", type=int, default=10)
    shp.add_argument("--seed", type=int)
    shp.add_argument("--svg")
    shp.add_argument("--out")

    return parser


def _cmd_simulate(args: argparse.Namespace, seed: int) -> int:
    threads = args.threads if args.threads > 0 else (os.cpu_count() or 1)
    if args.process == "bernoulli":
        def walk_task(rng: RngStream):
            return simulate_D(sample_walk(args.beta, args.m, rng), args.tau, rng).heights

        batch = mc_runner(walk_task, args.n, seed, threads=threads)
        rows = ["replica,column,height"]
        for i, heights in enumerate(batch.values):
            rows.extend(f"{i},{j},{h}" for j, h in enumerate(heights))
        _emit("\n".join(rows) + "\n", args.out)
        print(f"bernoulli: {args.n} windows of {args.m} columns", file=sys.stderr)
        return 0

    speeds = SpeedPlan.homogeneous(1.0) if args.q >= 1.0 else SpeedPlan.geometric(args.q)

    def task(rng: RngStream):
        if args.process == "tasep":
            x = simulate_tasep(ParticleConfig(), speeds, args.t, rng)
            return {"time": args.t, "displacements": list(x.displacements.parts)}
        if args.process == "bhp":
            x = simulate_tasep(ParticleConfig(), speeds, args.t, rng)
            y = simulate_bhp(x, args.tau, rng)
            return {"time": args.tau, "displacements": list(y.displacements.parts)}
        if args.process == "stationary":
            x = simulate_tasep(ParticleConfig(), speeds, args.t, rng)
            y = simulate_stationary(x, args.t, args.duration, rng)
            return {"time": args.duration, "displacements": list(y.displacements.parts)}
        arr = pushblock(packed_array(args.depth), args.t, rng)
        return {"time": args.t, "rows": arr.to_lists()}

    batch = mc_runner(task, args.n, seed, threads=threads)
    lines = [_json_line({"replica": i, **record}) for i, record in enumerate(batch.values)]
    _emit("".join(lines), args.out)
    print(f"{args.process}: {args.n} replica(s) simulated", file=sys.stderr)
    return 0


def _cmd_verify(args: argparse.Namespace, seed: int) -> int:
    kwargs: dict = {}

    def put(name: str, value) -> None:
        if value is not None:
            kwargs[name] = value

    which = args.which
    if which == "reversal":
        put("t", args.t)
        put("tau", args.tau)
        put("n", args.n)
        report = verify_mod.check_reversal_mc(seed=seed, **kwargs)
    elif which == "reversal-exact":
        put("t", args.t)
        put("tau", args.tau)
        put("m", args.m)
        report = verify_mod.check_reversal_exact(**kwargs)
    elif which == "qmap":
        put("q", args.q)
        put("t", args.t)
        put("m", args.m)
        report = verify_mod.check_qmap_exact(**kwargs)
        if args.n:
            mc = verify_mod.check_qmap_mc(q=report["q"], n=args.n, seed=seed)
            report = {"exact": report, "mc": mc, "pass": bool(report["pass"] and mc["pass"])}
    elif which == "gibbs-swap":
        put("n_instances", args.n)
        report = verify_mod.check_gibbs_swap(seed=seed, **kwargs)
    elif which == "stationary":
        put("t", args.t)
        put("n", args.n)
        report = verify_mod.check_stationary(seed=seed, **kwargs)
    elif which == "corollary":
        put("t", args.t)
        put("dt", args.dt)
        put("n", args.n)
        report = verify_mod.check_corollary(seed=seed, **kwargs)
    elif which == "bernoulli":
        put("tau", args.tau)
        put("n", args.n)
        put("m", args.m)
        report = verify_mod.check_bernoulli(seed=seed, **kwargs)
    else:  # harmonic
        put("t", args.t)
        put("q", args.q)
        report = verify_mod.check_harmonic(seed=seed, **kwargs)
    _emit(json.dumps(report, sort_keys=True, indent=2) + "\n", args.out)
    status = "PASS" if report["pass"] else "FAIL"
    print(f"verify {which}: {status}", file=sys.stderr)
    return 0 if report["pass"] else 1


def _cmd_tiling(args: argparse.Namespace, seed: int) -> int:
    if args.action == "verify":
        report = verify_mod.check_tiling_swap(args.a, args.b, args.c, args.q)
        if args.n > 1:
            mcmc = verify_mod.check_tiling_mcmc(args.a, args.b, args.c, args.q, n=args.n, seed=seed)
            report = {"exact": report, "mcmc": mcmc, "pass": bool(report["pass"] and mcmc["pass"])}
        _emit(json.dumps(report, sort_keys=True, indent=2) + "\n", args.out)
        status = "PASS" if report["pass"] else "FAIL"
        print(f"tiling verify: {status}", file=sys.stderr)
        return 0 if report["pass"] else 1

    top = hexagon_top_row(args.a, args.b, args.c)
    params = SpectralParams.geometric(args.a + args.c, args.q)
    samples = []
    for i in range(args.n):
        rng = RngStream(seed, i)
        arr = t2_mcmc(top, params, args.sweeps, rng, packed_hex_array(args.a, args.b, args.c))
        samples.append(HexTiling(args.a, args.b, args.c, arr))
    if args.action == "render":
        svg = render_svg(samples[0])
        _emit(svg, args.svg or args.out)
        print("tiling render: 1 SVG written", file=sys.stderr)
        return 0
    lines = [
        _json_line({"replica": i, "rows": t.array.to_lists()}) for i, t in enumerate(samples)
    ]
    _emit("".join(lines), args.out)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(render_svg(samples[0]))
    print(f"tiling sample: {args.n} sample(s), {args.sweeps} sweeps", file=sys.stderr)
    return 0


def _cmd_density(args: argparse.Namespace, seed: int) -> int:
    speeds = SpeedPlan.homogeneous(1.0)
    eps = 1.0 / args.t
    acc = [0.0] * args.bins
    centers: list[float] = []
    for run in range(args.runs):
        x = simulate_tasep(ParticleConfig(), speeds, args.t, RngStream(seed, run))
        hist = empirical_density(x, eps, -args.zmax, args.zmax, args.bins)
        centers = [z for z, _ in hist]
        for idx, (_, rho) in enumerate(hist):
            acc[idx] += rho
    rows = ["z,rho_empirical,rho_theory"]
    for z, total in zip(centers, acc):
        rows.append(f"{z:.6f},{total / args.runs:.6f},{density_profile('tasep', z, 1.0):.6f}")
    _emit("\n".join(rows) + "\n", args.out)
    print(f"density: t={args.t}, {args.runs} run(s)", file=sys.stderr)
    return 0


def _cmd_shape(args: argparse.Namespace, seed: int) -> int:
    report = verify_mod.check_limit_shape(t=args.t, runs=args.runs, seed=seed)
    _emit(json.dumps(report, sort_keys=True, indent=2) + "\n", args.out)
    if args.svg:
        x = simulate_tasep(ParticleConfig(), SpeedPlan.homogeneous(1.0), args.t, RngStream(seed, 0))
        pts = [(k / 50.0, height(x, round(k / 50.0 * args.t)) / args.t) for k in range(-50, 51)]
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(render_svg(pts))
    status = "PASS" if report["pass"] else "FAIL"
    print(f"shape: sup_error={report['sup_error']:.4f} {status}", file=sys.stderr)
    return 0 if report["pass"] else 1


def parse_and_dispatch(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if not exc.code else 2
    try:
        config = _load_config(args.config)
        seed = _resolve_seed(args, config)
        if args.command == "simulate":
            return _cmd_simulate(args, seed)
        if args.command == "verify":
            return _cmd_verify(args, seed)
        if args.command == "tiling":
            return _cmd_tiling(args, seed)
        if args.command == "density":
            return _cmd_density(args, seed)
        return _cmd_shape(args, seed)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
