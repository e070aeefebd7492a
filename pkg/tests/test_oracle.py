from fractions import Fraction as F

import pytest

from socialmatch.instance import Graph
from socialmatch.matching import matching_value
from socialmatch.oracle import (
    SizeLimitError,
    audit_bounds,
    enumerate_matchings,
    enumerate_stable_matchings,
    max_weight_matching,
    price_of_anarchy,
    price_of_stability,
)
from helpers import ALPHA_SAMPLES, equal_instance, path3_equal
from socialmatch.generators import (
    gen_cyclic_triangle,
    gen_friendship_rs_tight,
    gen_matthew_poa_tight,
    gen_nonexistence_friendship_matthew,
    gen_pos_tight,
    gen_random,
)


def test_max_weight_path():
    witness, value = max_weight_matching(path3_equal())
    assert value == 2
    assert witness.sorted_pairs() == ((0, 1), (2, 3))


def test_max_weight_single_edge():
    inst = equal_instance(Graph(2, ((0, 1),)), (5,))
    witness, value = max_weight_matching(inst)
    assert value == 5
    assert witness.sorted_pairs() == ((0, 1),)


def test_max_weight_triangle():
    inst = equal_instance(Graph(3, ((0, 1), (0, 2), (1, 2))), (3, 2, 2))
    witness, value = max_weight_matching(inst)
    assert value == 3
    assert witness.sorted_pairs() == ((0, 1),)


def test_max_weight_matches_enumeration():
    for seed in range(20):
        inst = gen_random(seed=seed, n=8, density=0.5, rule="equal")
        _, value = max_weight_matching(inst)
        best = max(matching_value(inst, m) for m in enumerate_matchings(inst.graph))
        assert value == best


def test_max_weight_witness_deterministic_and_optimal():
    for seed in range(10):
        inst = gen_random(seed=seed, n=8, density=0.5, rule="equal")
        w1, v1 = max_weight_matching(inst)
        w2, v2 = max_weight_matching(inst)
        assert w1 == w2 and v1 == v2
        assert matching_value(inst, w1) == v1


def test_max_weight_size_limit():
    inst = gen_random(seed=0, n=9, density=0.4, rule="equal")
    with pytest.raises(SizeLimitError):
        max_weight_matching(inst, max_n=8)


def test_enumerate_matchings_counts_path():
    # The 3-edge path has 5 matchings: empty, three single edges, outer pair.
    ms = list(enumerate_matchings(path3_equal().graph))
    assert len(ms) == 5
    assert len({m.pairs for m in ms}) == 5


def test_enumerate_size_limit():
    with pytest.raises(SizeLimitError):
        list(enumerate_matchings(Graph(13, ()), max_n=12))


@pytest.mark.parametrize("alpha", ALPHA_SAMPLES)
def test_stable_set_of_uniform_path(alpha):
    inst = path3_equal(alpha=alpha)
    stable = enumerate_stable_matchings(inst)
    assert [m.sorted_pairs() for m in stable] == [((0, 1), (2, 3)), ((1, 2),)]


def test_stable_set_cyclic_triangle_empty():
    assert enumerate_stable_matchings(gen_cyclic_triangle()) == ()


def test_stable_set_nonexistence_fixture():
    with_friendship = gen_nonexistence_friendship_matthew()
    assert enumerate_stable_matchings(with_friendship) == ()
    without = gen_nonexistence_friendship_matthew(with_friendship=False)
    assert enumerate_stable_matchings(without) != ()


def test_poa_path():
    assert price_of_anarchy(path3_equal()) == 2


def test_poa_matthew_gadget():
    for R in (1, 2, 5, 10):
        assert price_of_anarchy(gen_matthew_poa_tight(R)) == R + 1


def test_poa_single_edge():
    inst = equal_instance(Graph(2, ((0, 1),)), (5,))
    assert price_of_anarchy(inst) == 1


def test_poa_none_when_no_stable_matching():
    assert price_of_anarchy(gen_cyclic_triangle()) is None
    assert price_of_stability(gen_cyclic_triangle()) is None


def test_pos_tight_gadget():
    for a1, eps in ((F(1, 2), F(1, 10)), (F(1, 4), F(1, 5)), (F(1), F(1, 3))):
        inst = gen_pos_tight(a1, eps)
        assert price_of_stability(inst) == (2 + 2 * a1) / (1 + 2 * a1 + eps)


def test_pos_matthew_variant():
    for R, eps in ((2, F(1, 10)), (5, F(1, 4))):
        inst = gen_matthew_poa_tight(R, pos_variant=True, eps=eps)
        assert price_of_stability(inst) == F(R + 1) / (1 + eps)


def test_pos_friendship_rs_exact_value():
    # The eps margin that destabilizes the outer pairing shows up in the
    # exact ratio; the closed-form limit is approached from below.
    for R, a1, eps in ((2, F(1, 2), F(1, 100)), (5, F(1, 4), F(1, 1000))):
        inst = gen_friendship_rs_tight(R, a1, "pos", eps)
        expected = (1 + a1) * (1 + R) / (1 + a1 * (R + 1) + eps * (1 + a1 * R))
        assert price_of_stability(inst) == expected
        q_prime = (1 + a1) * (1 + R) / (1 + a1 * (R + 1))
        assert expected < q_prime


def test_stable_matchings_are_maximal():
    for seed in range(15):
        for rule in ("equal", "matthew", "oblivious"):
            inst = gen_random(seed=seed, n=8, density=0.5, rule=rule, alpha=(F(1, 2),))
            for m in enumerate_stable_matchings(inst):
                for u, v in inst.graph.edges:
                    assert not (m.partner(u) is None and m.partner(v) is None)


def test_audit_bounds_path():
    report = audit_bounds(path3_equal())
    assert report.poa == 2
    assert report.pos == 1
    assert report.all_bounds_pass
    names = {b.name for b in report.bounds}
    assert "poa_le_2" in names and "q_prime_sandwich" in names


def test_audit_bounds_no_stable():
    report = audit_bounds(gen_cyclic_triangle())
    assert report.stable_count == 0
    assert report.poa is None
    # Unchecked bounds are reported as not silently passed.
    for b in report.bounds:
        if b.name.startswith("poa"):
            assert not b.checked


def test_audit_q_sandwich_random():
    for seed in range(20):
        for rule in ("matthew", "trust", "oblivious"):
            inst = gen_random(seed=seed, n=7, density=0.5, rule=rule, alpha=(F(1, 2),))
            report = audit_bounds(inst)
            if report.Q is None:
                continue
            assert report.Q < report.Q_prime <= report.Q + 1


@pytest.mark.parametrize(
    "rule,alpha",
    [("equal", ()), ("equal", (F(1, 2), F(1, 4))), ("trust", ()), ("oblivious", ()), ("oblivious", (F(1, 2),))],
)
def test_audit_bounds_random_sweep(rule, alpha):
    for seed in range(30):
        inst = gen_random(seed=seed, n=7, density=0.5, rule=rule, alpha=alpha)
        report = audit_bounds(inst)
        assert report.all_bounds_pass, (rule, alpha, seed, report.to_dict())


def test_report_round_trip_dict():
    import json

    report = audit_bounds(path3_equal(alpha=(F(1, 2),)))
    doc = report.to_dict()
    assert json.loads(json.dumps(doc)) == doc
