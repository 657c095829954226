"""Command-line front end: ``ncgeom {gen,analyze,bounds,rates,schedule,experiment}``.

Data goes to stdout, the effective configuration and diagnostics to stderr.
Exit status: 0 success, 1 runtime error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import bounds, rates
from .coding import max_coding_number
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run
from .scheduler import run_realistic, schedule_instance
from .topology import (
    Cell,
    GridSpec,
    RandomSpec,
    gen_cyclic_grid,
    gen_poisson,
    gen_square_grid,
    gen_uniform,
    separation_for_count,
)


class UsageError(Exception):
    pass


def _g(x) -> str:
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _caps(text: str) -> list:
    out = []
    for t in text.split(","):
        t = t.strip()
        if t in ("inf", "unbounded"):
            out.append(None)
        elif t:
            try:
                out.append(int(t))
            except ValueError:
                raise argparse.ArgumentTypeError(f"cap must be an integer or 'inf', got {t!r}")
    return out


def _cap(text: str):
    caps = _caps(text)
    if len(caps) != 1:
        raise argparse.ArgumentTypeError("expected a single cap")
    return caps[0]


def _add_topology_flags(p: argparse.ArgumentParser, allow_file: bool) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--grid", choices=["square", "cyclic"], help="deterministic grid layout")
    src.add_argument("--uniform", type=int, metavar="COUNT", help="COUNT nodes uniform in the disk")
    src.add_argument("--poisson", type=float, metavar="LAMBDA", help="Poisson layout with density LAMBDA")
    if allow_file:
        src.add_argument("--topology", metavar="FILE", help="topology JSON written by `gen`")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--d", type=float, help="grid pitch")
    p.add_argument("--n", type=int, help="square grid: lattice sites in the disk, relay site included")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phase-offset", type=_floats, default=[0.0, 0.0], metavar="DX,DY",
                   help="square-grid phase relative to the relay, in pitches")
    p.add_argument("--ring-rotation", type=_floats, default=[], metavar="A1,A2,...",
                   help="cyclic-grid per-ring rotation in radians")


def _topology(args) -> Cell:
    if getattr(args, "topology", None):
        with open(args.topology) as fh:
            return Cell.from_json(fh.read())
    if args.grid:
        if args.d is None and args.n is None:
            raise UsageError("--grid needs --d or --n")
        if args.grid == "square":
            if len(args.phase_offset) != 2:
                raise UsageError("--phase-offset takes two numbers")
            d = args.d if args.d is not None else separation_for_count(args.n - 1, args.radius)[0]
            return gen_square_grid(GridSpec(d, "square", tuple(args.phase_offset)), args.radius)
        if args.d is None:
            raise UsageError("--grid cyclic needs --d")
        return gen_cyclic_grid(GridSpec(args.d, "cyclic", ring_rotation=tuple(args.ring_rotation)), args.radius)
    if args.uniform is not None:
        return gen_uniform(RandomSpec("uniform-count", count=args.uniform, seed=args.seed), args.radius)
    return gen_poisson(RandomSpec("poisson", density=args.poisson, seed=args.seed), args.radius)


def _echo(args) -> None:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    print(json.dumps({"effective_config": cfg}, default=str), file=sys.stderr)


def cmd_gen(args) -> int:
    cell = _topology(args)
    text = cell.to_json()
    if args.dump_topology in (None, "-"):
        print(text)
    else:
        with open(args.dump_topology, "w") as fh:
            fh.write(text + "\n")
    return 0


def cmd_analyze(args) -> int:
    cell = _topology(args)
    res = max_coding_number(cell, budget=args.budget)
    if args.witness:
        with open(args.witness, "w") as fh:
            json.dump(res.to_dict(), fh)
            fh.write("\n")
    if args.json:
        print(json.dumps({"nodes": len(cell), **res.to_dict()}))
    else:
        print(f"nodes = {len(cell)}")
        print(f"C_max = {res.max_number}" + ("" if res.exact else " (lower bound: budget exhausted)"))
        print("witness nodes = " + " ".join(map(str, res.witness_nodes)))
        for f in sorted(res.witness.flows):
            print(f"  flow {f.source} -> {f.destination}")
    return 0


def cmd_bounds(args) -> int:
    out: dict[str, object] = {}
    r = args.radius

    def put(name, fn, *a):
        try:
            out[name] = fn(*a)
        except bounds.DomainError as exc:
            out[name] = f"domain error: {exc}"

    if args.d is not None:
        put("ub_fixed_separation", bounds.ub_fixed_separation, r, args.d)
        put("lb_cyclic_case1", bounds.lb_cyclic_case1, r, args.d)
        put("lb_cyclic_case2", bounds.lb_cyclic_case2, r, args.d)
        try:
            out.update({f"lb_square_{k}": v for k, v in bounds.lb_square_grid(r, args.d)._asdict().items()})
        except bounds.DomainError as exc:
            out["lb_square"] = f"domain error: {exc}"
    if args.n is not None:
        put("ub_square_grid", bounds.ub_square_grid, args.n)
    if args.lam is not None:
        put("stochastic_ub_curve", bounds.stochastic_ub_curve, args.lam, args.epsilon)
    for i in args.ring or []:
        out[f"cyclic_ring_count[{i}]"] = bounds.cyclic_ring_count(i)
    if not out:
        raise UsageError("bounds needs at least one of --d, --n, --lambda, --ring")
    _emit(out, args.json)
    return 0


def cmd_rates(args) -> int:
    spec = rates.RateSpec(tuple(args.rates), args.packet_size)
    out = {
        "rate_nc": rates.rate_nc(spec),
        "rate_without": rates.rate_without(spec),
        "g": rates.gain(spec),
    }
    if args.m is not None:
        out["rate_m"] = rates.rate_m(spec, args.m)
        out["g_m"] = rates.gain_m(spec, args.m)
        out["g_m_lower_bound"] = rates.gain_m_lower_bound(spec, args.m)
    _emit(out, args.json)
    return 0


def cmd_schedule(args) -> int:
    if args.topology:
        with open(args.topology) as fh:
            sched = schedule_instance(Cell.from_json(fh.read()), args.m, args.mode)
    else:
        if args.pairs is None:
            raise UsageError("schedule needs --pairs or --topology")
        sched = run_realistic(args.pairs, args.radius, args.m, args.seed, args.mode)
    print(json.dumps(sched.to_dict()))
    return 0


_OVERRIDES = (
    "experiment", "n_values", "trials", "radius", "m_values", "base_seed", "d_probes",
    "epsilon", "d_values", "ring_indices", "search_budget", "partition_mode", "fit_min_n",
)


def load_config(path: str) -> ExperimentConfig:
    """Read and validate an experiment config; problems raise :class:`ConfigError`."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"config: cannot read {path}: {exc.strerror}"])
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config: invalid JSON ({exc})"])
    return ExperimentConfig.from_dict(data)


def cmd_experiment(args) -> int:
    data: dict = {}
    if args.config:
        data = load_config(args.config).to_dict()
    for key in _OVERRIDES:
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    cfg = ExperimentConfig.from_dict(data)
    print(json.dumps({"effective_config": cfg.to_dict()}), file=sys.stderr)
    result = run(cfg)
    if args.out:
        csv_path, meta_path = result.write(args.out)
        print(csv_path)
        print(meta_path)
    else:
        sys.stdout.write(result.to_csv())
    return 0


def _emit(out: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(out))
    else:
        for k, v in out.items():
            print(f"{k} = {_g(v)}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncgeom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a topology and print it as JSON")
    _add_topology_flags(p, allow_file=False)
    p.add_argument("--dump-topology", metavar="FILE", help="write the topology JSON here (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("analyze", help="maximum coding number of one cell")
    _add_topology_flags(p, allow_file=True)
    p.add_argument("--witness", metavar="FILE", help="write the witness combination as JSON")
    p.add_argument("--budget", type=int, help="search-call budget; required above 100 nodes (0 = unlimited)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bounds", help="evaluate the closed-form bounds")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--d", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--ring", type=_ints, metavar="I1,I2,...")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("rates", help="throughput and coding gain for a rate vector")
    p.add_argument("--rates", type=_floats, required=True, metavar="R1,R2,...")
    p.add_argument("--m", type=int)
    p.add_argument("--packet-size", type=float, default=1.0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("schedule", help="schedule one frame of random symmetric pairs")
    p.add_argument("--pairs", type=int)
    p.add_argument("--topology", metavar="FILE", help="cell whose nodes (2k, 2k+1) form pair k")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--m", type=_cap, default=None, help="packets per coded transmission (integer or inf)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["exact", "greedy"], default="exact")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment and write CSV")
    p.add_argument("--config", metavar="FILE", help="JSON config; flags override its fields")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--n-values", type=_ints)
    p.add_argument("--trials", type=int)
    p.add_argument("--radius", type=float)
    p.add_argument("--m-values", type=_caps)
    p.add_argument("--base-seed", type=int)
    p.add_argument("--d-probes", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--d-values", type=_floats)
    p.add_argument("--ring-indices", type=_ints)
    p.add_argument("--search-budget", type=int)
    p.add_argument("--partition-mode", choices=["exact", "greedy"])
    p.add_argument("--fit-min-n", type=int)
    p.add_argument("--out", metavar="DIR", help="write <experiment>.csv and .json here instead of stdout")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command != "experiment":
        _echo(args)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"ncgeom {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"ncgeom {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
