"""Matchings, utilities, and exact blocking-pair detection.

The improving-deviation conditions are evaluated as exact strict
inequalities in the endpoint-reward convention of the instance (both
endpoints enjoy the full edge reward under equal sharing, shares
otherwise).  Ties are never improving.  Hop distances, and hence the
friendship coefficients between specific nodes, are graph-structural and
do not depend on the matching.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional

from .instance import ZERO, Edge, GameInstance, InstanceError, normalize_edge
from .rationals import rat_str

SWIVEL = "swivel"
BISWIVEL = "biswivel"
RELAXED_BISWIVEL = "relaxed-biswivel"


class StaleDeviationError(ValueError):
    """Raised when a deviation no longer fits the matching it is applied to."""


@dataclass(frozen=True)
class Matching:
    """A set of disjoint edges; the strategy state of the matching game."""

    n: int
    pairs: frozenset[Edge]

    @staticmethod
    def of(n: int, pairs: Iterable[Edge]) -> "Matching":
        normalized = frozenset(normalize_edge(u, v) for u, v in pairs)
        seen: set[int] = set()
        for u, v in normalized:
            if not (0 <= u < n and 0 <= v < n):
                raise InstanceError(f"matched pair ({u},{v}) outside 0..{n - 1}")
            if u in seen or v in seen:
                raise InstanceError(f"node matched twice in {sorted(normalized)}")
            seen.add(u)
            seen.add(v)
        return Matching(n=n, pairs=normalized)

    @staticmethod
    def empty(n: int) -> "Matching":
        return Matching(n=n, pairs=frozenset())

    @cached_property
    def partner_map(self) -> tuple[Optional[int], ...]:
        partner: list[Optional[int]] = [None] * self.n
        for u, v in self.pairs:
            partner[u] = v
            partner[v] = u
        return tuple(partner)

    def partner(self, v: int) -> Optional[int]:
        return self.partner_map[v]

    def sorted_pairs(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.pairs))

    def validate_against(self, instance: GameInstance) -> None:
        for u, v in self.pairs:
            if not instance.graph.has_edge(u, v):
                raise InstanceError(f"matched pair ({u},{v}) is not an edge of the graph")

    def to_dict(self) -> dict:
        return {"pairs": [list(p) for p in self.sorted_pairs()]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    @staticmethod
    def from_dict(doc: dict, n: int) -> "Matching":
        return Matching.of(n, [(int(u), int(v)) for u, v in doc["pairs"]])


@dataclass(frozen=True)
class UtilityProfile:
    """Per-node rewards and perceived utilities for a fixed matching."""

    reward: tuple[Fraction, ...]
    perceived: tuple[Fraction, ...]


@dataclass(frozen=True)
class Deviation:
    """One improving move: the pair that matches, and the edges it breaks."""

    kind: str
    pair: Edge
    removed: tuple[Edge, ...]
    added: Edge


@dataclass(frozen=True)
class Condition:
    """One strict inequality backing a verdict; holds iff lhs > rhs."""

    node: int
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs > self.rhs

    def to_dict(self) -> dict:
        return {
            "node": self.node,
            "lhs": rat_str(self.lhs),
            "rhs": rat_str(self.rhs),
            "holds": self.holds,
        }


@dataclass(frozen=True)
class PairVerdict:
    """Blocking-pair verdict with the witness inequalities behind it."""

    pair: Edge
    blocking: bool
    kind: Optional[str]
    conditions: tuple[Condition, ...]

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "blocking": self.blocking,
            "kind": self.kind,
            "conditions": [c.to_dict() for c in self.conditions],
        }


@dataclass(frozen=True)
class StabilityResult:
    stable: bool
    blocking_pairs: tuple[Edge, ...]


def node_reward(instance: GameInstance, matching: Matching, v: int) -> Fraction:
    """Reward collected by v: its endpoint reward on the matched edge, 0 if unmatched.

    Equal-sharing instances evaluate in the both-endpoints-get-r convention;
    other rules use the node's share.
    """
    w = matching.partner(v)
    if w is None:
        return ZERO
    return instance.endpoint_reward_of(v, v, w)


def perceived_utility(instance: GameInstance, matching: Matching, v: int) -> Fraction:
    """Own reward plus alpha-weighted rewards of every other node by hop distance."""
    alpha_row = instance.alpha_matrix[v]
    total = node_reward(instance, matching, v)
    for a, b in matching.pairs:
        i = instance.graph.edge_index[(a, b)]
        ea, eb = instance.endpoint_rewards[i]
        if a != v:
            total += alpha_row[a] * ea
        if b != v:
            total += alpha_row[b] * eb
    return total


def utility_profile(instance: GameInstance, matching: Matching) -> UtilityProfile:
    rewards = tuple(node_reward(instance, matching, v) for v in range(instance.graph.n))
    perceived = []
    for v in range(instance.graph.n):
        alpha_row = instance.alpha_matrix[v]
        perceived.append(
            rewards[v] + sum((alpha_row[u] * rewards[u] for u in range(instance.graph.n) if u != v), ZERO)
        )
    return UtilityProfile(reward=rewards, perceived=tuple(perceived))


def matching_value(instance: GameInstance, matching: Matching) -> Fraction:
    """Sum of matched edge rewards.

    This is the welfare measure used for all optimum/ratio purposes; node
    rewards under equal sharing sum to twice it, which rescales every ratio
    identically.
    """
    total = ZERO
    for u, v in matching.pairs:
        total += instance.rewards[instance.graph.edge_index[(u, v)]]
    return total


def _stake(instance: GameInstance, x: int, u: int, v: int) -> Fraction:
    i = instance.edge_id(u, v)
    a, _ = instance.graph.edges[i]
    su, sv = instance.stakes[i]
    return su if x == a else sv


def _pair_check(
    instance: GameInstance,
    matching: Matching,
    u: int,
    v: int,
    relaxed: bool,
) -> PairVerdict:
    pair = normalize_edge(u, v)
    if not instance.graph.has_edge(u, v):
        raise InstanceError(f"({u},{v}) is not an edge")
    if matching.partner(u) == v:
        return PairVerdict(pair=pair, blocking=False, kind=None, conditions=())

    a1 = instance.friendship.alpha1
    a2 = instance.friendship.alpha2
    w = matching.partner(u)
    z = matching.partner(v)
    new_u = _stake(instance, u, u, v)
    new_v = _stake(instance, v, u, v)

    if w is not None and z is not None:
        # Both matched elsewhere: breaking (u,w) and (v,z) to add (u,v).
        cross_uz = a2 if relaxed else instance.alpha_between(u, z)
        cross_vw = a2 if relaxed else instance.alpha_between(v, w)
        cond_u = Condition(
            node=u,
            lhs=new_u,
            rhs=_stake(instance, u, u, w)
            + a1 * instance.endpoint_reward_of(v, v, z)
            + cross_uz * instance.endpoint_reward_of(z, v, z),
        )
        cond_v = Condition(
            node=v,
            lhs=new_v,
            rhs=_stake(instance, v, v, z)
            + a1 * instance.endpoint_reward_of(u, u, w)
            + cross_vw * instance.endpoint_reward_of(w, u, w),
        )
        kind = RELAXED_BISWIVEL if relaxed else BISWIVEL
    elif w is not None or z is not None:
        # Exactly one matched; name the matched one m with old partner p.
        if w is not None:
            m, free, p = u, v, w
        else:
            m, free, p = v, u, z
        cond_u = Condition(node=m, lhs=_stake(instance, m, u, v), rhs=_stake(instance, m, m, p))
        cond_v = Condition(
            node=free,
            lhs=_stake(instance, free, u, v),
            rhs=a1 * instance.endpoint_reward_of(m, m, p)
            + instance.alpha_between(free, p) * instance.endpoint_reward_of(p, m, p),
        )
        kind = SWIVEL
    else:
        # Both unmatched: each side needs a strictly positive perceived gain.
        cond_u = Condition(node=u, lhs=new_u, rhs=ZERO)
        cond_v = Condition(node=v, lhs=new_v, rhs=ZERO)
        kind = SWIVEL

    blocking = cond_u.holds and cond_v.holds
    return PairVerdict(pair=pair, blocking=blocking, kind=kind, conditions=(cond_u, cond_v))


def is_improving_pair(instance: GameInstance, matching: Matching, u: int, v: int) -> PairVerdict:
    """Exact blocking-pair verdict for the adjacent pair (u, v).

    Both matched: the biswivel inequalities, with the cross coefficients
    given by the true hop distances between u and v's old partner (and
    vice versa).  One matched: the swivel inequalities.  Both unmatched:
    each side must gain strictly.  A pair matched to each other is never
    blocking.
    """
    return _pair_check(instance, matching, u, v, relaxed=False)


def is_relaxed_blocking_pair(instance: GameInstance, matching: Matching, u: int, v: int) -> PairVerdict:
    """Like is_improving_pair, but the biswivel cross terms use alpha2.

    Every blocking pair is also a relaxed blocking pair; improving swivels
    are unchanged.
    """
    return _pair_check(instance, matching, u, v, relaxed=True)


def blocking_pairs(instance: GameInstance, matching: Matching, relaxed: bool = False) -> tuple[Edge, ...]:
    found = []
    for u, v in instance.graph.edges:
        if matching.partner(u) == v:
            continue
        if _pair_check(instance, matching, u, v, relaxed).blocking:
            found.append((u, v))
    return tuple(found)


def is_stable(instance: GameInstance, matching: Matching) -> StabilityResult:
    """Exhaustive scan over the edges of G for improving pairs."""
    matching.validate_against(instance)
    pairs = blocking_pairs(instance, matching, relaxed=False)
    return StabilityResult(stable=not pairs, blocking_pairs=pairs)


def is_relaxed_stable(instance: GameInstance, matching: Matching) -> bool:
    return not blocking_pairs(instance, matching, relaxed=True)


def deviation_for(matching: Matching, u: int, v: int, kind: str) -> Deviation:
    """Build the deviation matching (u, v) against the current matching."""
    removed = []
    w = matching.partner(u)
    z = matching.partner(v)
    if w is not None and w != v:
        removed.append(normalize_edge(u, w))
    if z is not None and z != u:
        removed.append(normalize_edge(v, z))
    return Deviation(kind=kind, pair=normalize_edge(u, v), removed=tuple(sorted(removed)), added=normalize_edge(u, v))


def apply_deviation(matching: Matching, deviation: Deviation) -> Matching:
    """Remove the edges of the matching containing u and v; add (u, v)."""
    u, v = deviation.pair
    for e in deviation.removed:
        if e not in matching.pairs:
            raise StaleDeviationError(f"deviation removes {e}, not in the matching")
    expected = deviation_for(matching, u, v, deviation.kind)
    if expected.removed != deviation.removed:
        raise StaleDeviationError(
            f"deviation removes {deviation.removed}, current incident edges are {expected.removed}"
        )
    pairs = set(matching.pairs)
    for e in deviation.removed:
        pairs.discard(e)
    pairs.add(deviation.added)
    return Matching(n=matching.n, pairs=frozenset(pairs))
