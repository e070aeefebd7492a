"""Shared construction and brute-force helpers for the test suite."""

from __future__ import annotations

from fractions import Fraction as F

from socialmatch.instance import (
    EqualSharing,
    FriendshipVector,
    GameInstance,
    Graph,
    ObliviousSharing,
)
from socialmatch.matching import (
    BISWIVEL,
    SWIVEL,
    Matching,
    apply_deviation,
    deviation_for,
    perceived_utility,
)

PATH3 = Graph(4, ((0, 1), (1, 2), (2, 3)))


def equal_instance(graph: Graph, rewards, alpha=()) -> GameInstance:
    return GameInstance(
        graph=graph,
        rewards=tuple(F(r) for r in rewards),
        sharing=EqualSharing(),
        friendship=FriendshipVector(tuple(F(a) for a in alpha)),
    )


def path3_equal(rewards=(1, 1, 1), alpha=()) -> GameInstance:
    return equal_instance(PATH3, rewards, alpha)


def oblivious_instance(graph: Graph, shares, alpha=()) -> GameInstance:
    ordered = tuple(shares[e] for e in graph.edges)
    return GameInstance(
        graph=graph,
        rewards=tuple(a + b for a, b in ordered),
        sharing=ObliviousSharing(shares=tuple((F(a), F(b)) for a, b in ordered)),
        friendship=FriendshipVector(tuple(F(a) for a in alpha)),
    )


def brute_improving(instance: GameInstance, matching: Matching, u: int, v: int) -> bool:
    """Independent oracle: apply the deviation and compare perceived
    utilities computed straight from the definition."""
    if matching.partner(u) == v:
        return False
    kind = BISWIVEL if matching.partner(u) is not None and matching.partner(v) is not None else SWIVEL
    after = apply_deviation(matching, deviation_for(matching, u, v, kind))
    return perceived_utility(instance, after, u) > perceived_utility(
        instance, matching, u
    ) and perceived_utility(instance, after, v) > perceived_utility(instance, matching, v)


ALPHA_SAMPLES = (
    (),
    (F(1, 2),),
    (F(1, 2), F(1, 4)),
    (F(1), F(1)),
    (F(3, 4), F(1, 2), F(1, 4)),
)
