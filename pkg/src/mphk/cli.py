"""Command-line interface: JSON in, JSON out; CSV for learning traces.

Exit codes: 0 success, 2 invalid input, 3 capacity exceeded,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .errors import CapacityError, InvalidInput, MphkError, PreconditionError, VerificationError
from .setfn import (
    MAX_SUPERMODULAR_M,
    MAX_TABLE_M,
    SymmetricValuation,
    check_properties,
    full_set,
    ranks,
    supermodular_degree,
    to_hypergraph,
    to_items,
    to_mask,
)
from .welfare import AuctionInstance

EXIT_OK, EXIT_INPUT, EXIT_CAPACITY, EXIT_VERIFY = 0, 2, 3, 4
log = logging.getLogger("mphk")


def _emit(report, output: str | None) -> None:
    text = io.dumps(report)
    if output:
        Path(output).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _load(path: str):
    return io.load_any(io.read_json(path))


def _valuation(path: str):
    obj = _load(path)
    if isinstance(obj, AuctionInstance):
        raise InvalidInput("expected a valuation, got an auction instance")
    return obj


def _instance(path: str) -> AuctionInstance:
    obj = _load(path)
    if not isinstance(obj, AuctionInstance):
        raise InvalidInput("expected an auction instance (an object with 'bidders')")
    return obj


# -- classify ------------------------------------------------------------


def cmd_classify(args) -> int:
    from .ple import mph_level, ple_level
    from .ple.envelope import MAX_LEVEL_M, MAX_SAMPLED_M
    from .ple.symmetric import symmetric_mph_level

    f = _valuation(args.input)
    report: dict = {"m": f.m, "kind": io.valuation_to_json(f)["kind"]}
    if isinstance(f, SymmetricValuation) and f.normalized and f.monotone:
        report["symmetric_mph_level"] = symmetric_mph_level(f)
    if f.m <= MAX_TABLE_M:
        props = check_properties(f)
        report.update({k: v for k, v in props.as_dict().items() if k != "witnesses"})
        if props.normalized:
            r, pos, neg = ranks(to_hypergraph(f))
            report.update(rank=r, positive_rank=pos, negative_rank=neg)
        if f.m <= MAX_SUPERMODULAR_M and props.monotone:
            report["supermodular_degree"] = supermodular_degree(f).degree
        sampled = args.sampled
        if props.normalized and (f.m <= MAX_LEVEL_M or (sampled and f.m <= MAX_SAMPLED_M)):
            kw = dict(sampled=sampled if f.m > MAX_LEVEL_M or sampled else None, seed=args.seed, threads=args.threads)
            if props.monotone:
                lvl = mph_level(f, **kw)
                report["mph_level"] = lvl.level
            else:
                lvl = ple_level(f, **kw)
                report["ple_level"] = lvl.level
            report["level_lower_bound_only"] = lvl.lower_bound_only
    else:
        report["note"] = f"property checks need m <= {MAX_TABLE_M}"
    _emit(report, args.output)
    return EXIT_OK


# -- ple -----------------------------------------------------------------

METHODS = ("lp", "flow", "matching", "laminar", "supermodular", "canonical")


def cmd_ple(args) -> int:
    from .ple import ple1_matching, ple2_flow, ple_laminar, ple_lp_witness, ple_max_lp, supermodular_ple
    from .ple.envelope import exists_tolerance
    from .ple.symmetric import canonical_symmetric_ple

    f = _valuation(args.input)
    S = full_set(f.m) if args.set is None else to_mask(_items(args.set, f.m))
    report: dict = {"method": args.method}
    if args.method == "lp":
        if args.k is None:
            raise InvalidInput("--k is required for the LP method")
        opt, _ = ple_max_lp(f, S, args.k)
        w = ple_lp_witness(f, S, args.k)
        report["exists"] = bool(opt >= f.value(S) - exists_tolerance(f.value(S)))
        report["lp_value"] = opt
    else:
        try:
            if args.method == "flow":
                w = ple2_flow(f, S)
            elif args.method == "matching":
                w = ple1_matching(f, S)
            elif args.method == "laminar":
                w = ple_laminar(f, S)
            elif args.method == "supermodular":
                w = supermodular_ple(f, S=S)
            else:
                if not isinstance(f, SymmetricValuation):
                    raise InvalidInput("the canonical method needs a symmetric valuation")
                if args.k is None:
                    raise InvalidInput("--k is required for the canonical method")
                w = canonical_symmetric_ple(f, args.k)
        except PreconditionError as exc:
            wit = exc.witness
            _emit({"method": args.method, "exists": None, "error": str(exc), "witness": _mask_json(wit)}, args.output)
            return EXIT_INPUT
        report["exists"] = bool(w.valid)
    report["witness"] = w.as_dict()
    _emit(report, args.output)
    return EXIT_OK


def _mask_json(x):
    return to_items(x) if isinstance(x, int) else x


def _items(text: str, m: int) -> list[int]:
    try:
        items = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InvalidInput(f"bad item list {text!r}") from exc
    if any(j < 0 or j >= m for j in items):
        raise InvalidInput(f"items must lie in 0..{m - 1}")
    return items


# -- welfare -------------------------------------------------------------


def cmd_welfare(args) -> int:
    from .welfare import certify, estimate_rounded_welfare, optimal_welfare, solve_config_lp

    inst = _instance(args.input)
    both = not (args.exact or args.lp)
    report: dict = {"n": inst.n, "m": inst.m}
    opt = lp_val = None
    if args.exact or both:
        opt, alloc = optimal_welfare(inst)
        report["opt"] = opt
        report["allocation"] = alloc.as_dict()["assignment"]
    if args.lp or both or args.round:
        sol = solve_config_lp(inst, mode=args.mode)
        lp_val = sol.objective
        report["lp"] = lp_val
        report["lp_solution"] = sol.as_dict()
        if args.certify:
            cert = certify(inst, sol)
            report["certificate"] = {"ok": cert.ok, "objective": str(cert.objective)}
            if not cert.ok:
                _emit(report, args.output)
                return EXIT_VERIFY
        if args.round:
            stats = estimate_rounded_welfare(sol, inst, args.round, seed=args.seed, threads=args.threads)
            report["rounding"] = stats.as_dict()
    if opt is not None and lp_val is not None:
        report["gap"] = lp_val / opt if opt > 0 else None
    _emit(report, args.output)
    return EXIT_OK


# -- auction -------------------------------------------------------------


def cmd_auction(args) -> int:
    from .auction import LearningConfig, cce_metrics, no_regret_learn, poa_lb_instance, verify_mixed_ne
    from .auction.simulator import check_rule
    from .auction.smoothness import smoothness_check

    check_rule(args.rule)
    inst = _instance(args.input)
    if args.verify_ne:
        meta = inst.metadata
        if "k" not in meta or "planes" not in meta:
            raise InvalidInput("--verify-ne needs a lower-bound instance (metadata k and planes)")
        ref, strat = poa_lb_instance(int(meta["k"]), int(meta["planes"]))
        if io.instance_to_json(ref)["bidders"] != io.instance_to_json(inst)["bidders"]:
            raise InvalidInput("instance does not match the lower-bound construction")
        rep = verify_mixed_ne(inst, strat, samples=args.samples, seed=args.seed)
        out = rep.as_dict()
        out["poa"] = out["optimum"] / out["equilibrium_welfare"]
        _emit(out, args.output)
        return EXIT_OK if rep.ok else EXIT_VERIFY
    cfg = LearningConfig(iterations=args.learn, rule=args.rule, grid_step=args.grid, seed=args.seed)
    cce = no_regret_learn(inst, cfg)
    report = cce_metrics(inst, cce)
    report["rule"] = args.rule
    report["action_set_sizes"] = [len(A) for A in cce.action_sets]
    if args.smoothness:
        k = int(inst.metadata.get("k", 1))
        sm = smoothness_check(
            inst, 0.5, 2.0 * k, args.smoothness, cce=cce, k=k, trials=args.smoothness_trials, seed=args.seed, rule=args.rule
        )
        report["smoothness"] = sm.as_dict()
    if args.trace:
        Path(args.trace).write_text(cce.trace_csv(args.trace_every))
    _emit(report, args.output)
    return EXIT_OK


# -- gen / verify --------------------------------------------------------


def _parse_params(pairs: list[str]) -> dict:
    out = {}
    for p in pairs or []:
        if "=" not in p:
            raise InvalidInput(f"parameter {p!r} must look like key=value")
        k, v = p.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def cmd_gen(args) -> int:
    from .instances import CATALOG, catalog_names, gen

    if args.list or not args.name:
        _emit({n: {"params": CATALOG[n].params, "description": CATALOG[n].description} for n in catalog_names()}, args.output)
        return EXIT_OK
    params = _parse_params(args.param)
    if args.name in CATALOG and "seed" in CATALOG[args.name].params:
        params.setdefault("seed", args.seed)
    _emit(io.to_json(gen(args.name, params)), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .instances import catalog_names, verify_expectations

    names = args.names or catalog_names()
    params = _parse_params(args.param)
    reports = [verify_expectations(n, params if len(names) == 1 else None) for n in names]
    _emit([r.as_dict() for r in reports], args.output)
    failed = [r.name for r in reports if not r.ok]
    if failed:
        log.error("expectations failed: %s", ", ".join(failed))
        return EXIT_VERIFY
    return EXIT_OK


# -- entry point ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    # note: parent actions are shared between subparsers, so per-command
    # defaults must not be changed with set_defaults
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads where supported")
    common.add_argument("-o", "--output", help="write the JSON report here instead of stdout")

    p = argparse.ArgumentParser(prog="mphk", description="Set functions, envelopes, welfare and auctions.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="ranks, properties and hierarchy level")
    c.add_argument("input", help="valuation JSON file ('-' for stdin)")
    c.add_argument("--sampled", type=int, help="check only N random restrictions (lower bound)")
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("ple", parents=[common], help="construct a positive lower envelope")
    c.add_argument("input")
    c.add_argument("--k", type=int, help="rank bound (lp and canonical methods)")
    c.add_argument("--set", help="target set as comma-separated items (default: all)")
    c.add_argument("--method", choices=METHODS, default="lp")
    c.set_defaults(func=cmd_ple)

    c = sub.add_parser("welfare", parents=[common], help="optimum, configuration LP and rounding")
    c.add_argument("input", help="instance JSON file")
    c.add_argument("--exact", action="store_true", help="compute the optimal welfare")
    c.add_argument("--lp", action="store_true", help="solve the configuration LP")
    c.add_argument("--mode", choices=("explicit", "column_generation"), default="explicit")
    c.add_argument("--round", type=int, default=0, metavar="N", help="rounding trials (0 skips rounding)")
    c.add_argument("--certify", action="store_true", help="verify the LP optimum in exact arithmetic")
    c.set_defaults(func=cmd_welfare)

    c = sub.add_parser("auction", parents=[common], help="no-regret learning or equilibrium verification")
    c.add_argument("input", help="instance JSON file")
    c.add_argument("--learn", type=int, default=10_000, metavar="T", help="learning iterations")
    c.add_argument("--grid", type=float, help="bid grid step (default 2%% of the largest value)")
    c.add_argument("--rule", default="first", help="payment rule: first or second")
    c.add_argument("--trace", help="write the per-round CSV trace here")
    c.add_argument("--trace-every", type=int, default=1)
    c.add_argument("--smoothness", choices=("price_scale", "sample_max"), help="spot-check a deviation")
    c.add_argument("--smoothness-trials", type=int, default=20_000)
    c.add_argument("--verify-ne", action="store_true", help="verify the lower-bound mixed equilibrium")
    c.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo samples for --verify-ne")
    c.set_defaults(func=cmd_auction)

    c = sub.add_parser("gen", parents=[common], help="build a catalog valuation or instance")
    c.add_argument("name", nargs="?")
    c.add_argument("-p", "--param", action="append", default=[], help="key=value (JSON value)")
    c.add_argument("--list", action="store_true")
    c.set_defaults(func=cmd_gen)

    c = sub.add_parser("verify", parents=[common], help="check catalog entries against known quantities")
    c.add_argument("names", nargs="*")
    c.add_argument("-p", "--param", action="append", default=[])
    c.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except CapacityError as exc:
        log.error("capacity: %s", exc)
        return EXIT_CAPACITY
    except VerificationError as exc:
        log.error("verification failed: %s", exc)
        return EXIT_VERIFY
    except (InvalidInput, ValueError) as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INPUT
    except MphkError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
