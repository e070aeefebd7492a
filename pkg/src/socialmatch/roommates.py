"""Existence machinery for unequal sharing.

Preference lists keyed by raw shares or by friendship stakes (q-values),
staircase-cycle detection over those keys, the greedy mutual-best
algorithm for cycle-free instances, and the roommates reduction that
certifies stability under friendship.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .instance import ZERO, GameInstance
from .matching import Matching, is_stable
from .oracle import DEFAULT_ENUM_LIMIT, enumerate_matchings

MODE_RAW = "raw"
MODE_Q = "q"


class PreferenceCycleError(ValueError):
    """The greedy algorithm requires cycle-free preferences."""

    def __init__(self, cycle: tuple[int, ...]):
        super().__init__(f"preference cycle {cycle}")
        self.cycle = cycle


def _keys(instance: GameInstance, mode: str) -> tuple[tuple[Fraction, Fraction], ...]:
    if mode == MODE_RAW:
        return instance.shares
    if mode == MODE_Q:
        return instance.share_stakes
    raise ValueError(f"unknown preference mode {mode!r}")


def preference_key(instance: GameInstance, mode: str, x: int, y: int) -> Fraction:
    """Key node x assigns to neighbor y (share or q-value of x on edge (x, y))."""
    i = instance.edge_id(x, y)
    a, _ = instance.graph.edges[i]
    ku, kv = _keys(instance, mode)[i]
    return ku if x == a else kv


@dataclass(frozen=True)
class PreferenceProfile:
    """Per-node neighbor lists, strictly ordered by key, ties to smaller id."""

    mode: str
    lists: tuple[tuple[int, ...], ...]


def preference_profile(instance: GameInstance, mode: str) -> PreferenceProfile:
    lists = []
    for v in range(instance.graph.n):
        nbrs = sorted(
            instance.graph.adjacency[v],
            key=lambda u: (-preference_key(instance, mode, v, u), u),
        )
        lists.append(tuple(nbrs))
    return PreferenceProfile(mode=mode, lists=tuple(lists))


def detect_preference_cycle(instance: GameInstance, mode: str = MODE_RAW) -> Optional[tuple[int, ...]]:
    """Find a node cycle along which each node weakly prefers its successor
    edge over its predecessor edge, with at least one strict preference.

    Detection walks the digraph of oriented edges: (a, b) -> (b, c) exists
    when b weakly prefers c over a (c != a), and is strict when the
    preference is strict.  A strict arc lying on a directed cycle of that
    digraph is exactly a staircase cycle; the returned witness may revisit
    nodes on contrived instances but always satisfies the defining
    inequalities.
    """
    graph = instance.graph
    states = [(u, v) for u, v in graph.edges] + [(v, u) for u, v in graph.edges]
    states.sort()
    index = {s: i for i, s in enumerate(states)}
    succ: list[list[int]] = [[] for _ in states]
    strict_arcs: list[tuple[int, int]] = []
    for si, (a, b) in enumerate(states):
        kb_a = preference_key(instance, mode, b, a)
        for c in graph.adjacency[b]:
            if c == a:
                continue
            kb_c = preference_key(instance, mode, b, c)
            if kb_c >= kb_a:
                ti = index[(b, c)]
                succ[si].append(ti)
                if kb_c > kb_a:
                    strict_arcs.append((si, ti))

    def path(src: int, dst: int) -> Optional[list[int]]:
        # BFS, returning a state path src..dst (or None).
        prev = {src: -1}
        queue = deque([src])
        while queue:
            x = queue.popleft()
            if x == dst:
                out = [x]
                while prev[out[-1]] != -1:
                    out.append(prev[out[-1]])
                return list(reversed(out))
            for y in succ[x]:
                if y not in prev:
                    prev[y] = x
                    queue.append(y)
        return None

    for si, ti in strict_arcs:
        back = path(ti, si)
        if back is not None:
            # States ti .. si form the walk; the strict arc closes si -> ti.
            nodes = tuple(states[i][0] for i in back)
            return nodes
    return None


@dataclass(frozen=True)
class GreedyStats:
    """Edge scans per extracted pair; each round is at most one pass over E."""

    edge_scans: tuple[int, ...]


def greedy_mutual_best(
    instance: GameInstance,
    mode: str = MODE_RAW,
    *,
    check_cycles: bool = True,
    return_stats: bool = False,
):
    """Repeatedly match a mutually most-preferred adjacent pair and remove it.

    Requires cycle-free preferences (checked unless disabled); the output
    is stable in the key's preference semantics.  Each extraction scans
    the remaining edges once, so total work is O(|V| |E|).
    """
    if check_cycles:
        cycle = detect_preference_cycle(instance, mode)
        if cycle is not None:
            raise PreferenceCycleError(cycle)
    graph = instance.graph
    alive = [True] * graph.n
    pairs: list[tuple[int, int]] = []
    scans: list[int] = []
    while True:
        # One pass over the remaining edges: each node's best key and its
        # smallest best neighbor.  Sorted edge order visits every node's
        # neighbors in increasing id, so "first attaining" = smallest id.
        best_key: dict[int, Fraction] = {}
        best_partner: dict[int, int] = {}
        scanned = 0
        for u, v in graph.edges:
            if alive[u] and alive[v]:
                scanned += 1
                ku = preference_key(instance, mode, u, v)
                kv = preference_key(instance, mode, v, u)
                if u not in best_key or ku > best_key[u]:
                    best_key[u] = ku
                    best_partner[u] = v
                if v not in best_key or kv > best_key[v]:
                    best_key[v] = kv
                    best_partner[v] = u
        if not best_key:
            break
        # A pair (u, b) is mutually most preferred when u also attains b's
        # best key; cycle-free preferences guarantee one exists.
        chosen = None
        for u in sorted(best_key):
            b = best_partner[u]
            if preference_key(instance, mode, b, u) == best_key[b]:
                chosen = (u, b)
                break
        if chosen is None:
            raise RuntimeError(
                "no mutual-best pair although edges remain; preferences must contain a cycle"
            )
        pairs.append(chosen)
        scans.append(scanned)
        alive[chosen[0]] = False
        alive[chosen[1]] = False
    matching = Matching.of(graph.n, pairs)
    if return_stats:
        return matching, GreedyStats(edge_scans=tuple(scans))
    return matching


def is_stable_srp(instance: GameInstance, matching: Matching, mode: str) -> bool:
    """Stability in the pure preference-list sense of the chosen key.

    A pair blocks when both sides strictly prefer each other over their
    current situation; being unmatched has key zero.
    """
    partner = matching.partner_map
    for u, v in instance.graph.edges:
        if partner[u] == v:
            continue
        base_u = preference_key(instance, mode, u, partner[u]) if partner[u] is not None else ZERO
        if preference_key(instance, mode, u, v) <= base_u:
            continue
        base_v = preference_key(instance, mode, v, partner[v]) if partner[v] is not None else ZERO
        if preference_key(instance, mode, v, u) > base_v:
            return False
    return True


def solve_srp_q(
    instance: GameInstance, *, max_n: int = DEFAULT_ENUM_LIMIT
) -> Optional[Matching]:
    """Stable matching via the q-value roommates reduction.

    Cycle-free q-preferences are solved greedily; otherwise the roommates
    instance is solved exactly by enumeration at desk scale.  Any returned
    matching is verified stable in the friendship game before returning;
    None means the reduction has no stable matching.
    """
    cycle = detect_preference_cycle(instance, MODE_Q)
    if cycle is None:
        result = greedy_mutual_best(instance, MODE_Q, check_cycles=False)
    else:
        result = None
        for m in sorted(
            enumerate_matchings(instance.graph, max_n=max_n), key=lambda m: m.sorted_pairs()
        ):
            if is_stable_srp(instance, m, MODE_Q):
                result = m
                break
        if result is None:
            return None
    verdict = is_stable(instance, result)
    if not verdict.stable:
        raise RuntimeError(
            f"roommates reduction returned {result.sorted_pairs()}, but it is blocked by "
            f"{verdict.blocking_pairs}; this contradicts the reduction guarantee"
        )
    return result
