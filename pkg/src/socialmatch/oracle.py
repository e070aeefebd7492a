"""Exact ground truth at desk scale.

Maximum-weight matching by dynamic programming over node subsets,
exhaustive matching and stable-set enumeration, and bound audits.  Limits
are hard errors, never sampling fallbacks, so every oracle claim stays
exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .instance import (
    ZERO,
    Edge,
    EqualSharing,
    GameInstance,
    Graph,
    TrustSharing,
    UndefinedRatioError,
    compute_Q,
    compute_Q_prime,
    compute_R,
)
from .matching import Matching, is_stable, matching_value
from .rationals import rat_str

DEFAULT_EXACT_LIMIT = 22
DEFAULT_ENUM_LIMIT = 12


class SizeLimitError(RuntimeError):
    """Instance exceeds the configured exact-computation limit."""


def max_weight_matching(
    instance: GameInstance, *, max_n: int = DEFAULT_EXACT_LIMIT
) -> tuple[Matching, Fraction]:
    """Exact maximum-weight matching via subset dynamic programming.

    The witness is deterministic: at each step the lowest free node is
    matched to the smallest neighbor that still achieves the optimum
    (preferring a match over skipping when values tie), which yields the
    lexicographically least optimal pair list.
    """
    graph = instance.graph
    n = graph.n
    if n > max_n:
        raise SizeLimitError(f"n={n} exceeds exact-optimum limit {max_n}")
    rewards = instance.rewards
    adjacency = graph.adjacency
    edge_index = graph.edge_index
    memo: dict[int, Fraction] = {0: ZERO}

    def best(mask: int) -> Fraction:
        cached = memo.get(mask)
        if cached is not None:
            return cached
        v = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        value = best(rest)  # leave v unmatched
        for u in adjacency[v]:
            bit = 1 << u
            if mask & bit:
                cand = rewards[edge_index[(min(u, v), max(u, v))]] + best(rest & ~bit)
                if cand > value:
                    value = cand
        memo[mask] = value
        return value

    mask = (1 << n) - 1
    total = best(mask)
    pairs = []
    while mask:
        v = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        target = best(mask)
        chosen = None
        for u in adjacency[v]:
            bit = 1 << u
            if mask & bit and rewards[edge_index[(min(u, v), max(u, v))]] + best(rest & ~bit) == target:
                chosen = u
                break
        if chosen is None:
            mask = rest
        else:
            pairs.append((v, chosen))
            mask = rest & ~(1 << chosen)
    return Matching.of(n, pairs), total


def enumerate_matchings(graph: Graph, *, max_n: int = DEFAULT_ENUM_LIMIT) -> Iterator[Matching]:
    """Every matching of the graph, in a fixed deterministic order."""
    if graph.n > max_n:
        raise SizeLimitError(f"n={graph.n} exceeds enumeration limit {max_n}")
    adjacency = graph.adjacency
    n = graph.n
    pairs: list[Edge] = []
    used = [False] * n

    def recurse(v: int) -> Iterator[Matching]:
        while v < n and used[v]:
            v += 1
        if v == n:
            yield Matching(n=n, pairs=frozenset(pairs))
            return
        used[v] = True
        # v stays unmatched
        yield from recurse(v + 1)
        # v matches a free higher-indexed neighbor (lower ones were decided)
        for u in adjacency[v]:
            if u > v and not used[u]:
                used[u] = True
                pairs.append((v, u))
                yield from recurse(v + 1)
                pairs.pop()
                used[u] = False
        used[v] = False

    yield from recurse(0)


def enumerate_stable_matchings(
    instance: GameInstance, *, max_n: int = DEFAULT_ENUM_LIMIT
) -> tuple[Matching, ...]:
    """All stable matchings, canonically sorted by their pair lists."""
    stable = [
        m
        for m in enumerate_matchings(instance.graph, max_n=max_n)
        if is_stable(instance, m).stable
    ]
    return tuple(sorted(stable, key=lambda m: m.sorted_pairs()))


def _stable_values(
    instance: GameInstance, *, max_n: int
) -> tuple[tuple[Matching, ...], tuple[Fraction, ...]]:
    stable = enumerate_stable_matchings(instance, max_n=max_n)
    return stable, tuple(matching_value(instance, m) for m in stable)


def price_of_anarchy(
    instance: GameInstance,
    *,
    max_n: int = DEFAULT_ENUM_LIMIT,
    exact_max_n: int = DEFAULT_EXACT_LIMIT,
) -> Optional[Fraction]:
    """Optimum over the worst stable value; None when no stable matching exists."""
    _, optimum = max_weight_matching(instance, max_n=exact_max_n)
    stable, values = _stable_values(instance, max_n=max_n)
    if not stable:
        return None
    if optimum == 0:
        return Fraction(1)
    worst = min(values)
    if worst == 0:
        raise UndefinedRatioError("worst stable matching has zero value")
    return optimum / worst


def price_of_stability(
    instance: GameInstance,
    *,
    max_n: int = DEFAULT_ENUM_LIMIT,
    exact_max_n: int = DEFAULT_EXACT_LIMIT,
) -> Optional[Fraction]:
    """Optimum over the best stable value; None when no stable matching exists."""
    _, optimum = max_weight_matching(instance, max_n=exact_max_n)
    stable, values = _stable_values(instance, max_n=max_n)
    if not stable:
        return None
    if optimum == 0:
        return Fraction(1)
    best = max(values)
    if best == 0:
        raise UndefinedRatioError("best stable matching has zero value")
    return optimum / best


@dataclass(frozen=True)
class BoundCheck:
    """One bound comparison; checked=False when the ratio does not exist."""

    name: str
    bound: Fraction
    checked: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "bound": rat_str(self.bound),
            "checked": self.checked,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class AuditReport:
    optimum: Fraction
    optimum_matching: Matching
    stable_count: int
    stable_values: tuple[Fraction, ...]
    worst_stable: Optional[Fraction]
    best_stable: Optional[Fraction]
    poa: Optional[Fraction]
    pos: Optional[Fraction]
    R: Optional[Fraction]
    Q: Optional[Fraction]
    Q_prime: Optional[Fraction]
    bounds: tuple[BoundCheck, ...]

    @property
    def all_bounds_pass(self) -> bool:
        return all(b.passed for b in self.bounds)

    def to_dict(self) -> dict:
        def opt(x: Optional[Fraction]) -> Optional[str]:
            return None if x is None else rat_str(x)

        return {
            "optimum": rat_str(self.optimum),
            "optimum_matching": self.optimum_matching.to_dict(),
            "stable_count": self.stable_count,
            "stable_values": [rat_str(v) for v in self.stable_values],
            "worst_stable": opt(self.worst_stable),
            "best_stable": opt(self.best_stable),
            "poa": opt(self.poa),
            "pos": opt(self.pos),
            "R": opt(self.R),
            "Q": opt(self.Q),
            "Q_prime": opt(self.Q_prime),
            "bounds": [b.to_dict() for b in self.bounds],
            "all_bounds_pass": self.all_bounds_pass,
        }


def audit_bounds(
    instance: GameInstance,
    *,
    max_n: int = DEFAULT_ENUM_LIMIT,
    exact_max_n: int = DEFAULT_EXACT_LIMIT,
) -> AuditReport:
    """Enumerate the stable set and compare PoA/PoS against every applicable bound.

    A bound that cannot be checked (no stable matching, or share ratios
    undefined) is reported as unchecked rather than silently passed.
    """
    witness, optimum = max_weight_matching(instance, max_n=exact_max_n)
    stable, values = _stable_values(instance, max_n=max_n)
    worst = min(values) if values else None
    best = max(values) if values else None
    poa: Optional[Fraction] = None
    pos: Optional[Fraction] = None
    if values and optimum > 0 and worst and worst > 0:
        poa = optimum / worst
        pos = optimum / best  # type: ignore[operator]
    elif values and optimum == 0:
        poa = pos = Fraction(1)

    try:
        r_param: Optional[Fraction] = compute_R(instance)
    except UndefinedRatioError:
        r_param = None
    q_param = compute_Q(instance) if r_param is not None else None
    q_prime = compute_Q_prime(instance) if r_param is not None else None

    a1 = instance.friendship.alpha1
    a2 = instance.friendship.alpha2
    checks: list[BoundCheck] = []

    def add(name: str, bound: Fraction, ratio: Optional[Fraction]) -> None:
        checked = ratio is not None
        checks.append(
            BoundCheck(name=name, bound=bound, checked=checked, passed=(not checked) or ratio <= bound)
        )

    if isinstance(instance.sharing, EqualSharing):
        add("poa_le_2", Fraction(2), poa)
        add("pos_le_equal_bound", (2 + 2 * a1) / (1 + 2 * a1 + a2), pos)
    if isinstance(instance.sharing, TrustSharing) and instance.friendship.is_zero:
        add("poa_le_3", Fraction(3), poa)
    if r_param is not None:
        if instance.friendship.is_zero:
            add("poa_le_1_plus_R", 1 + r_param, poa)
        add("poa_le_1_plus_Q", 1 + q_param, poa)  # type: ignore[operator]
        add("pos_le_1_plus_Q", 1 + q_param, pos)  # type: ignore[operator]
        sandwich_ok = q_param < q_prime <= q_param + 1  # type: ignore[operator]
        checks.append(
            BoundCheck(name="q_prime_sandwich", bound=q_param + 1, checked=True, passed=sandwich_ok)  # type: ignore[operator]
        )

    return AuditReport(
        optimum=optimum,
        optimum_matching=witness,
        stable_count=len(stable),
        stable_values=values,
        worst_stable=worst,
        best_stable=best,
        poa=poa,
        pos=pos,
        R=r_param,
        Q=q_param,
        Q_prime=q_prime,
        bounds=tuple(checks),
    )
