"""Acceptance suite: one test per criterion, each printing a PASS line.

Sweep sizes and tolerances are pinned here; every numeric comparison is
exact rational arithmetic.
"""

import time
from fractions import Fraction as F

import pytest

from socialmatch.ccg import (
    ATMOST,
    EXACT,
    ContributionGame,
    RewardFunction,
    StrategyProfile,
    ccg_audit,
    corresponding_matching_game,
    detect_forbidden_edges,
    is_pairwise_equilibrium,
    matching_to_equilibrium,
    tight_budget_equilibrium,
    tight_social_optimum,
    total_reward,
)
from socialmatch.cli import main as cli_main
from socialmatch.dynamics import assert_trace_lemmas, run_brbp
from socialmatch.instance import (
    FriendshipVector,
    GameInstance,
    Graph,
    compute_Q,
    compute_Q_prime,
    compute_R,
)
from socialmatch.matching import is_stable, matching_value
from socialmatch.oracle import (
    enumerate_matchings,
    enumerate_stable_matchings,
    max_weight_matching,
    price_of_anarchy,
    price_of_stability,
)
from socialmatch.roommates import (
    MODE_RAW,
    detect_preference_cycle,
    greedy_mutual_best,
    solve_srp_q,
)
from socialmatch.generators import (
    gen_cyclic_triangle,
    gen_friendship_rs_tight,
    gen_matthew_poa_tight,
    gen_nonexistence_friendship_matthew,
    gen_path3_equal,
    gen_pos_tight,
    gen_random,
    gen_random_ccg,
)

ALPHA_PALETTE = (
    (),
    (F(1, 4),),
    (F(1, 2),),
    (F(1, 2), F(1, 4)),
    (F(1), F(1)),
    (F(2, 3), F(1, 3)),
    (F(1), F(1), F(1, 2)),
)

RS_GRID = [(R, a1) for R in (1, 2, 5) for a1 in (F(0), F(1, 4), F(1, 2), F(1))]


def announce(criterion: str) -> None:
    print(f"ACCEPTANCE {criterion}: PASS")


def test_criterion_1_tight_gadget_exactness():
    start = time.monotonic()
    assert price_of_anarchy(gen_path3_equal()) == 2

    for a1, eps in ((F(0), F(1, 10)), (F(1, 4), F(1, 7)), (F(1, 2), F(1, 10)), (F(1), F(1, 3))):
        inst = gen_pos_tight(a1, eps)
        stable = enumerate_stable_matchings(inst)
        assert len(stable) == 1 and stable[0].sorted_pairs() == ((1, 2),)
        assert price_of_stability(inst) == (2 + 2 * a1) / (1 + 2 * a1 + eps)

    for R in (1, 2, 5, 10):
        assert price_of_anarchy(gen_matthew_poa_tight(R)) == R + 1

    for R, a1 in RS_GRID:
        inst = gen_friendship_rs_tight(R, a1, "poa")
        assert compute_R(inst) == R
        assert price_of_anarchy(inst) == 1 + compute_Q(inst)

    elapsed = time.monotonic() - start
    assert elapsed < 1.0, f"tight gadgets took {elapsed:.3f}s"
    announce("criterion 1 (tight-gadget exactness: PoA forms and PoS family)")


@pytest.mark.xfail(
    strict=True,
    reason=(
        "deviations require strict utility increases, so the destabilizing "
        "margin keeps the stability ratio strictly below the closed-form "
        "limit for every admissible construction; the companion test pins "
        "the exact attained value"
    ),
)
def test_criterion_1_pos_variant_attains_q_prime_exactly():
    for R, a1 in RS_GRID:
        inst = gen_friendship_rs_tight(R, a1, "pos", F(1, 1000))
        assert price_of_stability(inst) == compute_Q_prime(inst)


def test_criterion_1_pos_variant_exact_attained_value():
    for R, a1 in RS_GRID:
        for eps in (F(1, 100), F(1, 10000)):
            inst = gen_friendship_rs_tight(R, a1, "pos", eps)
            attained = (1 + a1) * (1 + R) / (1 + a1 * (R + 1) + eps * (1 + a1 * R))
            assert price_of_stability(inst) == attained
            assert attained < compute_Q_prime(inst)
    announce("criterion 1 (pos variant: exact attained ratio, strictly below the Q' limit)")


def test_criterion_2_containment_500_instances():
    alphas = ((F(1, 2),), (F(1, 2), F(1, 4)), (F(1), F(1)))
    violations = 0
    for seed in range(500):
        n = 4 + seed % 7
        base = gen_random(seed=seed, n=n, density=0.4, rule="equal")
        stable_at_zero = [
            m for m in enumerate_matchings(base.graph) if is_stable(base, m).stable
        ]
        for alpha in alphas:
            friend = GameInstance(base.graph, base.rewards, base.sharing, FriendshipVector(alpha))
            for m in stable_at_zero:
                if not is_stable(friend, m).stable:
                    violations += 1
    assert violations == 0
    announce("criterion 2 (containment under friendship, 500 equal-sharing instances)")


def test_criterion_3_brbp_convergence_and_quality():
    start = time.monotonic()
    for seed in range(500):
        n = 4 + seed % 7
        alpha = ALPHA_PALETTE[seed % len(ALPHA_PALETTE)]
        inst = gen_random(seed=seed, n=n, density=0.45, rule="equal", alpha=alpha)
        matched, trace = run_brbp(inst)
        m = len(inst.graph.edges)
        assert len(trace.steps) <= 2 * m * m, seed
        assert trace.termination == "stable", seed
        assert is_stable(inst, matched).stable, seed
        a1, a2 = inst.friendship.alpha1, inst.friendship.alpha2
        _, optimum = max_weight_matching(inst)
        assert matching_value(inst, matched) >= (1 + 2 * a1 + a2) / (2 + 2 * a1) * optimum, seed
        report = assert_trace_lemmas(trace)
        assert report.passed, (seed, report.to_dict())
    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"brbp sweep took {elapsed:.1f}s"
    announce("criterion 3 (best-relaxed dynamics: convergence, quality, trace facts)")


def test_criterion_4_bound_sweeps():
    def instances(rule, alpha_choices):
        for seed in range(500):
            n = 3 + seed % 6
            alpha = alpha_choices[seed % len(alpha_choices)]
            inst = gen_random(seed=seed, n=n, density=0.45, rule=rule, alpha=alpha)
            if inst.graph.edges:  # share ratios are undefined on edgeless graphs
                yield inst

    for inst in instances("equal", ALPHA_PALETTE):
        poa = price_of_anarchy(inst)
        assert poa is not None and poa <= 2
        q, qp = compute_Q(inst), compute_Q_prime(inst)
        assert q < qp <= q + 1

    for inst in instances("trust", ((),)):
        poa = price_of_anarchy(inst)
        assert poa is not None and poa <= 3
        q, qp = compute_Q(inst), compute_Q_prime(inst)
        assert q < qp <= q + 1

    for inst in instances("oblivious", ((),)):
        poa = price_of_anarchy(inst)
        if poa is not None:
            assert poa <= 1 + compute_R(inst)
        q, qp = compute_Q(inst), compute_Q_prime(inst)
        assert q < qp <= q + 1

    friendship_alphas = ((F(1, 4),), (F(1, 2),), (F(1, 2), F(1, 4)), (F(1),))
    for inst in instances("oblivious", friendship_alphas):
        q, qp = compute_Q(inst), compute_Q_prime(inst)
        assert q < qp <= q + 1
        poa = price_of_anarchy(inst)
        if poa is not None:
            assert poa <= 1 + q
            pos = price_of_stability(inst)
            assert pos is not None and pos <= 1 + q
    announce("criterion 4 (anarchy/stability bound sweeps, 500 instances per rule)")


def test_criterion_5_existence_machinery():
    for rule in ("matthew", "trust"):
        for seed in range(200):
            n = 3 + seed % 6
            inst = gen_random(seed=seed, n=n, density=0.5, rule=rule)
            assert detect_preference_cycle(inst, MODE_RAW) is None, (rule, seed)
            matched, stats = greedy_mutual_best(inst, MODE_RAW, return_stats=True)
            assert is_stable(inst, matched).stable, (rule, seed)
            assert matched in enumerate_stable_matchings(inst), (rule, seed)
            m = len(inst.graph.edges)
            assert len(stats.edge_scans) == len(matched.pairs)
            assert all(scan <= m for scan in stats.edge_scans)

    for rule in ("matthew", "trust", "oblivious"):
        for seed in range(150):
            n = 3 + seed % 6
            alpha = ALPHA_PALETTE[seed % len(ALPHA_PALETTE)]
            inst = gen_random(seed=seed, n=n, density=0.5, rule=rule, alpha=alpha)
            result = solve_srp_q(inst)
            if result is not None:
                assert is_stable(inst, result).stable, (rule, seed)
    announce("criterion 5 (existence machinery: cycles, greedy, roommates reduction)")


def test_criterion_6_nonexistence_fixtures():
    assert enumerate_stable_matchings(gen_cyclic_triangle()) == ()
    fixture = gen_nonexistence_friendship_matthew()
    assert fixture.friendship.alpha1 == F(4, 5)
    assert enumerate_stable_matchings(fixture) == ()
    base = gen_nonexistence_friendship_matthew(with_friendship=False)
    assert enumerate_stable_matchings(base) != ()
    announce("criterion 6 (nonexistence fixtures certified by enumeration)")


def test_criterion_7_ccg_correspondence_200_games():
    splits = ("equal", "matthew", "proportional")
    checked_profiles = 0
    for seed in range(200):
        n = 3 + seed % 6
        split = splits[seed % 3]
        alpha = ALPHA_PALETTE[seed % len(ALPHA_PALETTE)]
        game = gen_random_ccg(
            seed=seed, n=n, density=0.5, families=("product", "powprod"),
            split=split, mode=ATMOST, alpha=alpha,
        )
        if not game.graph.edges:
            continue
        inst = corresponding_matching_game(game)
        q_param = compute_Q(inst)
        for matched in enumerate_stable_matchings(inst):
            profile = matching_to_equilibrium(game, matched)
            verdict = is_pairwise_equilibrium(game, profile)
            assert verdict.is_equilibrium, (seed, matched.sorted_pairs())
            assert verdict.certificate == "grid-certified"
            assert total_reward(game, profile) == matching_value(inst, matched), seed
            checked_profiles += 1
        report = ccg_audit(game)
        assert report.passed, (seed, report.to_dict())
        assert report.worst_ratio is None or report.worst_ratio <= 1 + q_param
    assert checked_profiles >= 200
    announce(f"criterion 7 (contribution-game correspondence, {checked_profiles} certified profiles)")


def test_criterion_8_tight_budget_reproduction():
    start = time.monotonic()
    eps, a = F(1, 20), F(1, 2)
    graph = Graph(4, ((0, 1), (1, 2), (2, 3)))

    def game(mode):
        return ContributionGame(
            graph=graph,
            budgets=(F(1),) * 4,
            functions=(
                RewardFunction("min", 1 - eps),
                RewardFunction("min", F(1)),
                RewardFunction("min", 1 - eps),
            ),
            splits=("equal",) * 3,
            friendship=FriendshipVector((a,)),
            mode=mode,
        )

    atmost = game(ATMOST)
    rows = [[F(0)] * 3 for _ in range(4)]
    rows[1][1] = F(1)
    rows[2][1] = F(1)
    middle_atmost = StrategyProfile.build(atmost, rows)
    assert is_pairwise_equilibrium(atmost, middle_atmost).is_equilibrium

    exact = game(EXACT)
    rows = [[F(0)] * 3 for _ in range(4)]
    rows[0][0] = F(1)
    rows[1][1] = F(1)
    rows[2][1] = F(1)
    rows[3][2] = F(1)
    middle_exact = StrategyProfile.build(exact, rows)
    verdict = is_pairwise_equilibrium(exact, middle_exact)
    assert not verdict.is_equilibrium
    witness = verdict.witness
    assert witness.nodes == (1, 2)
    assert witness.utilities_after == (F(19, 10), F(19, 10))
    assert witness.utilities_before == (F(3, 2), F(3, 2))

    assert detect_forbidden_edges(exact) == ((1, 2),)

    equilibrium = tight_budget_equilibrium(exact)
    assert equilibrium.alloc[0][0] == 1 and equilibrium.alloc[1][0] == 1
    assert equilibrium.alloc[2][2] == 1 and equilibrium.alloc[3][2] == 1
    assert is_pairwise_equilibrium(exact, equilibrium).is_equilibrium
    optimum = total_reward(exact, tight_social_optimum(exact))
    assert total_reward(exact, equilibrium) >= (1 + 2 * a) / (2 + 2 * a) * optimum

    elapsed = time.monotonic() - start
    assert elapsed < 1.0, f"tight-budget reproduction took {elapsed:.3f}s"
    announce("criterion 8 (tight-budget path instance reproduced exactly)")


def test_criterion_9_determinism_byte_identical(tmp_path, capsys):
    def run(*argv):
        code = cli_main(list(argv))
        out = capsys.readouterr().out
        return code, out

    inst_path = tmp_path / "inst.json"
    pos_path = tmp_path / "pos.json"
    commands = []

    code, out = run("gen", "random", "--seed", "7", "--n", "8", "--density", "0.5",
                    "--rule", "trust", "--out", str(inst_path))
    assert code == 0
    code, out = run("gen", "pos-tight", "--alpha1", "1/2", "--eps", "1/10", "--out", str(pos_path))
    assert code == 0

    commands.append(("gen", "random", "--seed", "7", "--n", "8", "--density", "0.5", "--rule", "trust"))
    commands.append(("solve", "--instance", str(inst_path)))
    commands.append(("audit", "--instance", str(inst_path)))
    commands.append(("dynamics", "--instance", str(pos_path), "--method", "brbp"))
    commands.append(("dynamics", "--instance", str(inst_path), "--method", "arbitrary",
                     "--start", "empty", "--seed", "13"))
    commands.append(("solve", "--instance", str(inst_path), "--method", "srpq"))

    game = gen_random_ccg(seed=5, n=5, density=0.7, split="equal", alpha=(F(1, 2),))
    from socialmatch.ccg import ccg_to_json

    game_path = tmp_path / "game.json"
    game_path.write_text(ccg_to_json(game))
    commands.append(("ccg", "--game", str(game_path)))

    for argv in commands:
        first = run(*argv)
        second = run(*argv)
        assert first == second, argv
    announce("criterion 9 (seeded commands emit byte-identical reports)")
