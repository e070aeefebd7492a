"""Batch front-end: generate, solve, audit, run dynamics, and check equilibria.

Exit codes: 0 success, 1 usage/IO/limit errors, 2 certified negative result
(no stable matching, or the checked object is not stable / not an
equilibrium).  Output is deterministic: no timestamps, sorted keys, and all
randomness behind explicit seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import generators
from .ccg import (
    ccg_audit,
    ccg_from_json,
    detect_forbidden_edges,
    is_pairwise_equilibrium,
    matching_to_equilibrium,
    StrategyProfile,
    tight_budget_equilibrium,
    total_reward,
    corresponding_matching_game,
    EXACT,
)
from .dynamics import (
    ConvergenceError,
    assert_trace_lemmas,
    run_arbitrary_dynamics,
    run_best_blocking_pair,
    run_brbp,
)
from .instance import (
    FriendshipVector,
    GameInstance,
    InstanceError,
    UndefinedRatioError,
    instance_from_json,
    instance_to_json,
)
from .matching import Matching, is_stable, matching_value
from .oracle import SizeLimitError, audit_bounds, enumerate_stable_matchings, max_weight_matching
from .rationals import rat, rat_str
from .roommates import MODE_Q, MODE_RAW, PreferenceCycleError, greedy_mutual_best, solve_srp_q

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2


def _emit(doc: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for key in sorted(doc):
            value = doc[key]
            if isinstance(value, (dict, list)):
                value = json.dumps(value, sort_keys=True)
            print(f"{key}: {value}")


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _parse_alpha(text: Optional[str]) -> Optional[FriendshipVector]:
    if text is None:
        return None
    parts = [p for p in text.split(",") if p.strip()]
    return FriendshipVector(tuple(rat(p) for p in parts))


def _load_instance(args) -> GameInstance:
    instance = instance_from_json(_read(args.instance))
    alpha = _parse_alpha(getattr(args, "alpha", None))
    if alpha is not None:
        import dataclasses

        instance = dataclasses.replace(instance, friendship=alpha)
    return instance


def cmd_gen(args) -> int:
    name = args.gadget
    if name == "path3":
        instance = generators.gen_path3_equal(alpha=_alpha_list(args.alpha))
    elif name == "pos-tight":
        instance = generators.gen_pos_tight(rat(args.alpha1), rat(args.eps))
    elif name == "matthew-poa":
        instance = generators.gen_matthew_poa_tight(rat(args.R), args.variant == "pos", rat(args.eps))
    elif name == "friendship-rs":
        instance = generators.gen_friendship_rs_tight(rat(args.R), rat(args.alpha1), args.variant, rat(args.eps))
    elif name == "nonexistence":
        instance = generators.gen_nonexistence_friendship_matthew()
    elif name == "cyclic-triangle":
        instance = generators.gen_cyclic_triangle()
    elif name == "random":
        instance = generators.gen_random(
            seed=args.seed,
            n=args.n,
            density=args.density,
            rule=args.rule,
            alpha=_alpha_list(args.alpha),
        )
    elif name == "aux-augment":
        base = instance_from_json(_read(args.instance))
        instance = generators.augment_with_auxiliary_neighbors(base, rat(args.eps))
    else:
        print(f"unknown gadget {name!r}", file=sys.stderr)
        return EXIT_ERROR
    text = instance_to_json(instance)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _alpha_list(text: Optional[str]) -> tuple:
    fv = _parse_alpha(text)
    return () if fv is None else fv.alpha


def cmd_solve(args) -> int:
    instance = _load_instance(args)
    report: dict = {"method": args.method}
    if args.method == "brbp":
        matched, trace = run_brbp(instance, exact_max_n=args.max_n)
        report["deviations"] = len(trace.steps)
        report["termination"] = trace.termination
        if trace.termination == "cap":
            report["note"] = "iteration cap hit; no stable matching certified for this run"
    elif args.method == "greedy":
        mode = MODE_Q if args.prefs == "q" else MODE_RAW
        matched = greedy_mutual_best(instance, mode)
    elif args.method == "srpq":
        result = solve_srp_q(instance, max_n=args.max_n)
        if result is None:
            _emit({"method": "srpq", "stable_matching": None}, args.format)
            return EXIT_NEGATIVE
        matched = result
    else:
        print(f"unknown method {args.method!r}", file=sys.stderr)
        return EXIT_ERROR
    verdict = is_stable(instance, matched)
    report["matching"] = matched.to_dict()
    report["value"] = rat_str(matching_value(instance, matched))
    report["stable"] = verdict.stable
    _emit(report, args.format)
    if not verdict.stable:
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_audit(args) -> int:
    if args.manifest:
        paths = json.loads(_read(args.manifest))
        if not isinstance(paths, list):
            print("manifest must be a JSON array of instance paths", file=sys.stderr)
            return EXIT_ERROR
        reports = []
        worst = EXIT_OK
        for path in paths:
            instance = instance_from_json(_read(path))
            report = audit_bounds(instance, max_n=args.max_n, exact_max_n=args.max_n)
            reports.append({"instance": path, **report.to_dict()})
            if report.stable_count == 0 or not report.all_bounds_pass:
                worst = EXIT_NEGATIVE
        _emit({"reports": reports}, args.format)
        return worst
    if not args.instance:
        print("audit needs --instance or --manifest", file=sys.stderr)
        return EXIT_ERROR
    instance = _load_instance(args)
    report = audit_bounds(instance, max_n=args.max_n, exact_max_n=args.max_n)
    _emit(report.to_dict(), args.format)
    if report.stable_count == 0:
        return EXIT_NEGATIVE
    if not report.all_bounds_pass:
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_dynamics(args) -> int:
    instance = _load_instance(args)
    if args.start == "opt":
        start, _ = max_weight_matching(instance, max_n=args.max_n)
    elif args.start == "empty":
        start = Matching.empty(instance.graph.n)
    else:
        start = Matching.from_dict(json.loads(_read(args.start)), instance.graph.n)

    cap = args.cap if args.cap is not None else 1_000_000
    if args.method == "brbp":
        _, trace = run_brbp(instance, exact_max_n=args.max_n, cap=args.cap)
    elif args.method == "bbp":
        _, trace = run_best_blocking_pair(instance, start, cap=cap)
    elif args.method == "arbitrary":
        _, trace = run_arbitrary_dynamics(instance, start, args.seed, cap=cap)
    else:
        print(f"unknown method {args.method!r}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(trace.to_jsonl())
    if args.method == "brbp":
        lemmas = assert_trace_lemmas(trace)
        sys.stdout.write(json.dumps({"kind": "lemmas", **lemmas.to_dict()}, sort_keys=True) + "\n")
    return EXIT_OK if trace.termination == "stable" else EXIT_NEGATIVE


def cmd_ccg(args) -> int:
    game = ccg_from_json(_read(args.game))
    report: dict = {"mode": game.mode}
    if args.profile:
        profile = StrategyProfile.from_dict(json.loads(_read(args.profile)), game)
        verdict = is_pairwise_equilibrium(game, profile, grid_k=args.grid_k)
        report["check"] = verdict.to_dict(game)
        report["total_reward"] = rat_str(total_reward(game, profile))
        _emit(report, args.format)
        return EXIT_OK if verdict.is_equilibrium else EXIT_NEGATIVE

    if game.mode == EXACT:
        report["forbidden_edges"] = [list(e) for e in detect_forbidden_edges(game)]
        profile = tight_budget_equilibrium(game, exact_max_n=args.max_n)
    else:
        instance = corresponding_matching_game(game)
        stable = enumerate_stable_matchings(instance, max_n=args.max_n)
        if not stable:
            report["equilibrium"] = None
            report["note"] = "no stable matching in the corresponding game"
            _emit(report, args.format)
            return EXIT_NEGATIVE
        profile = matching_to_equilibrium(game, stable[0])
    verdict = is_pairwise_equilibrium(game, profile, grid_k=args.grid_k)
    report["equilibrium"] = profile.to_dict(game)
    report["total_reward"] = rat_str(total_reward(game, profile))
    report["certified"] = verdict.to_dict(game)
    report["audit"] = ccg_audit(game, max_n=args.max_n, exact_max_n=args.max_n, grid_k=args.grid_k).to_dict()
    _emit(report, args.format)
    return EXIT_OK if verdict.is_equilibrium else EXIT_NEGATIVE


def cmd_check(args) -> int:
    if args.matching:
        instance = _load_instance(args)
        matched = Matching.from_dict(json.loads(_read(args.matching)), instance.graph.n)
        verdict = is_stable(instance, matched)
        doc = {
            "stable": verdict.stable,
            "blocking_pairs": [list(p) for p in verdict.blocking_pairs],
            "value": rat_str(matching_value(instance, matched)),
        }
        _emit(doc, args.format)
        return EXIT_OK if verdict.stable else EXIT_NEGATIVE
    if args.game and args.profile:
        game = ccg_from_json(_read(args.game))
        profile = StrategyProfile.from_dict(json.loads(_read(args.profile)), game)
        verdict = is_pairwise_equilibrium(game, profile, grid_k=args.grid_k)
        _emit(verdict.to_dict(game), args.format)
        return EXIT_OK if verdict.is_equilibrium else EXIT_NEGATIVE
    print("check needs --instance with --matching, or --game with --profile", file=sys.stderr)
    return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="socialmatch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance_required: bool = True):
        if instance_required:
            p.add_argument("--instance", required=True, help="instance JSON path")
        p.add_argument("--alpha", help="override friendship vector, e.g. '1/2,1/4'")
        p.add_argument("--max-n", type=int, default=12, dest="max_n", help="exact-computation node cap")
        p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("gen", help="generate a benchmark instance")
    p.add_argument("gadget", choices=(
        "path3", "pos-tight", "matthew-poa", "friendship-rs", "nonexistence",
        "cyclic-triangle", "random", "aux-augment"))
    p.add_argument("--alpha", help="friendship vector, e.g. '1/2,1/4'")
    p.add_argument("--alpha1", default="1/2")
    p.add_argument("--eps", default="1/10")
    p.add_argument("--R", default="2")
    p.add_argument("--variant", choices=("poa", "pos"), default="poa")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--rule", default="equal",
                   choices=("equal", "matthew", "parasite", "trust", "oblivious"))
    p.add_argument("--instance", help="base instance (aux-augment)")
    p.add_argument("--out", help="write to file instead of stdout")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="compute a stable matching")
    common(p)
    p.add_argument("--method", choices=("brbp", "greedy", "srpq"), default="brbp")
    p.add_argument("--prefs", choices=("raw", "q"), default="raw")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("audit", help="enumerate the stable set and check bounds")
    common(p, instance_required=False)
    p.add_argument("--instance", help="instance JSON path")
    p.add_argument("--manifest", help="JSON array of instance paths to audit in order")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("dynamics", help="run improvement dynamics, stream the trace")
    common(p)
    p.add_argument("--method", choices=("brbp", "bbp", "arbitrary"), default="brbp")
    p.add_argument("--start", default="opt", help="'opt', 'empty', or a matching JSON path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=None)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("ccg", help="contribution-game equilibria and audits")
    p.add_argument("--game", required=True, help="contribution game JSON path")
    p.add_argument("--profile", help="check this profile instead of constructing one")
    p.add_argument("--grid-k", type=int, default=8, dest="grid_k")
    p.add_argument("--max-n", type=int, default=12, dest="max_n")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.set_defaults(func=cmd_ccg)

    p = sub.add_parser("check", help="certify a matching or a profile")
    p.add_argument("--instance", help="instance JSON path")
    p.add_argument("--matching", help="matching JSON path")
    p.add_argument("--game", help="contribution game JSON path")
    p.add_argument("--profile", help="profile JSON path")
    p.add_argument("--alpha", help="override friendship vector")
    p.add_argument("--grid-k", type=int, default=8, dest="grid_k")
    p.add_argument("--max-n", type=int, default=12, dest="max_n")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.set_defaults(func=cmd_check)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (InstanceError, UndefinedRatioError, PreferenceCycleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SizeLimitError as exc:
        print(f"limit: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ConvergenceError as exc:
        print(f"convergence guarantee violated: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
