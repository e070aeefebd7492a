"""Convex contribution games over budgets and per-edge reward functions.

Players split a budget across incident edges; an edge pays off a function
of both endpoint contributions, shared per the edge's split.  Pairwise
equilibrium is certified against a finite deviation grid that always
contains the full-budget transfers, which are the load-bearing moves for
convex reward families; verdicts are labeled grid-certified to be honest
about that.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .instance import (
    ZERO,
    Edge,
    EqualSharing,
    FriendshipVector,
    GameInstance,
    Graph,
    InstanceError,
    MatthewSharing,
    ObliviousSharing,
    build_distances,
    compute_Q,
    normalize_edge,
)
from .matching import Matching, is_stable
from .oracle import DEFAULT_ENUM_LIMIT, DEFAULT_EXACT_LIMIT, enumerate_stable_matchings, max_weight_matching
from .rationals import rat, rat_str

ATMOST = "atmost"
EXACT = "exact"

FAMILY_PRODUCT = "product"
FAMILY_MIN = "min"
FAMILY_POWPROD = "powprod"

SPLIT_EQUAL = "equal"
SPLIT_MATTHEW = "matthew"
SPLIT_PROPORTIONAL = "proportional"

DEFAULT_GRID_K = 8


class NotStableError(ValueError):
    """The supplied matching is not stable in the corresponding game."""


@dataclass(frozen=True)
class RewardFunction:
    """Total reward of an edge as a function of the two contributions.

    product: c*x*y; min: c*min(x, y); powprod: c*(x*y)**k with integer k >= 1.
    All vanish when either contribution is zero and are nondecreasing in
    each argument; min is not convex in a single argument past its kink and
    is flagged accordingly.
    """

    family: str
    c: Fraction
    k: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", rat(self.c))
        if self.family not in (FAMILY_PRODUCT, FAMILY_MIN, FAMILY_POWPROD):
            raise InstanceError(f"unknown reward family {self.family!r}")
        if self.c <= 0:
            raise InstanceError("reward coefficient must be positive")
        if self.family == FAMILY_POWPROD and self.k < 1:
            raise InstanceError("powprod exponent must be a positive integer")

    @property
    def convex_in_each_argument(self) -> bool:
        return self.family != FAMILY_MIN

    def total(self, x: Fraction, y: Fraction) -> Fraction:
        if self.family == FAMILY_PRODUCT:
            return self.c * x * y
        if self.family == FAMILY_MIN:
            return self.c * min(x, y)
        return self.c * (x * y) ** self.k


@dataclass(frozen=True)
class ContributionGame:
    """Graph, budgets, per-edge reward functions and splits, friendship, budget mode."""

    graph: Graph
    budgets: tuple[Fraction, ...]
    functions: tuple[RewardFunction, ...]
    splits: tuple[str, ...]
    friendship: FriendshipVector
    mode: str = ATMOST
    lam: Optional[tuple[Fraction, ...]] = None  # node brand values for matthew splits

    def __post_init__(self) -> None:
        object.__setattr__(self, "budgets", tuple(rat(b) for b in self.budgets))
        n = self.graph.n
        m = len(self.graph.edges)
        if len(self.budgets) != n:
            raise InstanceError("one budget per node required")
        if any(b < 0 for b in self.budgets):
            raise InstanceError("budgets must be nonnegative")
        if len(self.functions) != m or len(self.splits) != m:
            raise InstanceError("one reward function and one split per edge required")
        for s in self.splits:
            if s not in (SPLIT_EQUAL, SPLIT_MATTHEW, SPLIT_PROPORTIONAL):
                raise InstanceError(f"unknown split {s!r}")
        if any(s == SPLIT_MATTHEW for s in self.splits):
            if self.lam is None or len(self.lam) != n:
                raise InstanceError("matthew splits need one lambda per node")
            if any(x <= 0 for x in self.lam):
                raise InstanceError("lambdas must be positive")
        if self.mode not in (ATMOST, EXACT):
            raise InstanceError(f"unknown budget mode {self.mode!r}")
        if self.mode == EXACT:
            for v in range(n):
                if self.budgets[v] > 0 and not self.graph.adjacency[v]:
                    raise InstanceError(
                        f"exact mode: node {v} has budget {self.budgets[v]} but no incident edge"
                    )

    @cached_property
    def distances(self):
        return build_distances(self.graph)

    @cached_property
    def alpha_matrix(self) -> tuple[tuple[Fraction, ...], ...]:
        fv = self.friendship
        return tuple(tuple(fv.at(d) for d in row) for row in self.distances)

    @property
    def local_friendship(self) -> bool:
        return all(a == 0 for a in self.friendship.alpha[1:])

    @property
    def all_equal_split(self) -> bool:
        return all(s == SPLIT_EQUAL for s in self.splits)

    def share(self, ei: int, endpoint: int, x_u: Fraction, x_v: Fraction) -> Fraction:
        """Reward share of one endpoint given both contributions; shares sum to the total."""
        u, v = self.graph.edges[ei]
        total = self.functions[ei].total(x_u, x_v)
        split = self.splits[ei]
        if split == SPLIT_EQUAL:
            return total / 2
        if split == SPLIT_MATTHEW:
            lu, lv = self.lam[u], self.lam[v]  # type: ignore[index]
            frac = lu / (lu + lv) if endpoint == u else lv / (lu + lv)
            return frac * total
        if x_u + x_v == 0:
            return ZERO
        frac = x_u / (x_u + x_v) if endpoint == u else x_v / (x_u + x_v)
        return frac * total

    def endpoint_reward(self, ei: int, endpoint: int, x_u: Fraction, x_v: Fraction) -> Fraction:
        """Node-level reward in the same convention as the matching side:
        equal splits pay the full edge reward to both endpoints."""
        if self.splits[ei] == SPLIT_EQUAL:
            return self.functions[ei].total(x_u, x_v)
        return self.share(ei, endpoint, x_u, x_v)


@dataclass(frozen=True)
class StrategyProfile:
    """Per-node budget allocations over incident edges, exact in rationals."""

    alloc: tuple[tuple[Fraction, ...], ...]  # [node][edge index], zero off-incidence

    @staticmethod
    def build(game: ContributionGame, rows: Sequence[Sequence[Fraction]]) -> "StrategyProfile":
        n = game.graph.n
        m = len(game.graph.edges)
        alloc = tuple(tuple(rat(x) for x in row) for row in rows)
        if len(alloc) != n or any(len(row) != m for row in alloc):
            raise InstanceError("allocation must be an n x m table")
        for v in range(n):
            incident = set(game.graph.incident_edges[v])
            total = ZERO
            for ei in range(m):
                x = alloc[v][ei]
                if x < 0:
                    raise InstanceError(f"negative allocation of node {v} on edge {ei}")
                if x > 0 and ei not in incident:
                    raise InstanceError(f"node {v} allocates to non-incident edge {game.graph.edges[ei]}")
                total += x
            if game.mode == EXACT:
                if total != game.budgets[v]:
                    raise InstanceError(
                        f"exact mode: node {v} spends {total}, budget is {game.budgets[v]}"
                    )
            elif total > game.budgets[v]:
                raise InstanceError(f"node {v} overspends: {total} > {game.budgets[v]}")
        return StrategyProfile(alloc=alloc)

    def contributions(self, game: ContributionGame, ei: int) -> tuple[Fraction, Fraction]:
        u, v = game.graph.edges[ei]
        return self.alloc[u][ei], self.alloc[v][ei]

    def to_dict(self, game: ContributionGame) -> dict:
        entries = []
        for v in range(game.graph.n):
            for ei in game.graph.incident_edges[v]:
                x = self.alloc[v][ei]
                if x != 0:
                    entries.append({"node": v, "edge": list(game.graph.edges[ei]), "amount": rat_str(x)})
        return {"alloc": entries}

    @staticmethod
    def from_dict(doc: dict, game: ContributionGame) -> "StrategyProfile":
        rows = [[ZERO] * len(game.graph.edges) for _ in range(game.graph.n)]
        for entry in doc["alloc"]:
            v = int(entry["node"])
            e = normalize_edge(int(entry["edge"][0]), int(entry["edge"][1]))
            rows[v][game.graph.edge_index[e]] = rat(entry["amount"])
        return StrategyProfile.build(game, rows)


def node_rewards(game: ContributionGame, profile: StrategyProfile) -> tuple[Fraction, ...]:
    rewards = [ZERO] * game.graph.n
    for ei, (u, v) in enumerate(game.graph.edges):
        x_u, x_v = profile.contributions(game, ei)
        if x_u == 0 and x_v == 0:
            continue
        rewards[u] += game.endpoint_reward(ei, u, x_u, x_v)
        rewards[v] += game.endpoint_reward(ei, v, x_u, x_v)
    return tuple(rewards)


def perceived_utilities(game: ContributionGame, profile: StrategyProfile) -> tuple[Fraction, ...]:
    rewards = node_rewards(game, profile)
    out = []
    for v in range(game.graph.n):
        row = game.alpha_matrix[v]
        total = rewards[v]
        for u in range(game.graph.n):
            if u != v and rewards[u] != 0:
                total += row[u] * rewards[u]
        out.append(total)
    return tuple(out)


def total_reward(game: ContributionGame, profile: StrategyProfile) -> Fraction:
    """Sum of edge rewards; matches matching_value of the corresponding game."""
    total = ZERO
    for ei in range(len(game.graph.edges)):
        x_u, x_v = profile.contributions(game, ei)
        total += game.functions[ei].total(x_u, x_v)
    return total


def corresponding_matching_game(game: ContributionGame) -> GameInstance:
    """The matching game whose edge rewards are the full-budget payoffs.

    Equal splits give an equal-sharing instance; all-proportional splits
    give a brand-value instance with lambda equal to the budgets; anything
    else becomes fixed oblivious shares.  Requires every edge to pay off
    positively at full budgets (both endpoint budgets positive).
    """
    rewards = []
    for ei, (u, v) in enumerate(game.graph.edges):
        r = game.functions[ei].total(game.budgets[u], game.budgets[v])
        if r <= 0:
            raise InstanceError(
                f"edge {(u, v)} pays {r} at full budgets; the corresponding game needs positive rewards"
            )
        rewards.append(r)

    sharing: object
    if game.all_equal_split:
        sharing = EqualSharing()
    elif all(s == SPLIT_MATTHEW for s in game.splits):
        sharing = MatthewSharing(lam=game.lam)  # type: ignore[arg-type]
    elif all(s == SPLIT_PROPORTIONAL for s in game.splits):
        lam = tuple(
            b if b > 0 else Fraction(1)  # isolated zero-budget nodes never matter
            for b in game.budgets
        )
        sharing = MatthewSharing(lam=lam)
    else:
        shares = []
        for ei, (u, v) in enumerate(game.graph.edges):
            bu, bv = game.budgets[u], game.budgets[v]
            shares.append((game.share(ei, u, bu, bv), game.share(ei, v, bu, bv)))
        sharing = ObliviousSharing(shares=tuple(shares))

    return GameInstance(
        graph=game.graph,
        rewards=tuple(rewards),
        sharing=sharing,  # type: ignore[arg-type]
        friendship=game.friendship,
    )


def saturated_profile(game: ContributionGame, matching: Matching) -> StrategyProfile:
    """Matched nodes put the full budget on the matched edge; unmatched nodes
    allocate nothing (atmost) or spread equally over incident edges (exact)."""
    n = game.graph.n
    m = len(game.graph.edges)
    rows = [[ZERO] * m for _ in range(n)]
    for v in range(n):
        w = matching.partner(v)
        if w is not None:
            rows[v][game.graph.edge_index[normalize_edge(v, w)]] = game.budgets[v]
        elif game.mode == EXACT and game.budgets[v] > 0:
            incident = game.graph.incident_edges[v]
            share = game.budgets[v] / len(incident)
            for ei in incident:
                rows[v][ei] = share
    return StrategyProfile.build(game, rows)


def matching_to_equilibrium(game: ContributionGame, matching: Matching) -> StrategyProfile:
    """Realize a stable matching of the corresponding game as a profile.

    Only meaningful without the spend-everything constraint; the matching
    is checked for stability first.
    """
    if game.mode != ATMOST:
        raise InstanceError("matching_to_equilibrium applies to atmost-mode games")
    verdict = is_stable(corresponding_matching_game(game), matching)
    if not verdict.stable:
        raise NotStableError(f"matching is blocked by {verdict.blocking_pairs}")
    return saturated_profile(game, matching)


@dataclass(frozen=True)
class DeviationWitness:
    """A concrete improving deviation: who moves, where, and the utility jump."""

    kind: str  # "unilateral" | "bilateral" | "pair-split"
    nodes: tuple[int, ...]
    new_rows: tuple[tuple[Fraction, ...], ...]  # replacement allocation rows, aligned with nodes
    utilities_before: tuple[Fraction, ...]
    utilities_after: tuple[Fraction, ...]

    def to_dict(self, game: ContributionGame) -> dict:
        moves = []
        for node, row in zip(self.nodes, self.new_rows):
            alloc = [
                {"edge": list(game.graph.edges[ei]), "amount": rat_str(x)}
                for ei, x in enumerate(row)
                if x != 0
            ]
            moves.append({"node": node, "alloc": alloc})
        return {
            "kind": self.kind,
            "nodes": list(self.nodes),
            "moves": moves,
            "utilities_before": [rat_str(x) for x in self.utilities_before],
            "utilities_after": [rat_str(x) for x in self.utilities_after],
        }


@dataclass(frozen=True)
class PEVerdict:
    is_equilibrium: bool
    certificate: str  # "grid-certified" when an equilibrium
    grid_k: int
    witness: Optional[DeviationWitness]

    def to_dict(self, game: ContributionGame) -> dict:
        return {
            "is_equilibrium": self.is_equilibrium,
            "certificate": self.certificate,
            "grid_k": self.grid_k,
            "witness": None if self.witness is None else self.witness.to_dict(game),
        }


class _Checker:
    """Deviation enumeration against a profile, evaluating utility deltas
    only over the edges a candidate move touches."""

    def __init__(self, game: ContributionGame, profile: StrategyProfile, grid_k: int):
        self.game = game
        self.profile = profile
        self.k = grid_k
        self.rewards = node_rewards(game, profile)
        self.utilities = perceived_utilities(game, profile)
        self._reward_cache: dict[tuple[int, int, Fraction, Fraction], Fraction] = {}

    def _endpoint_reward(self, ei: int, node: int, x_u: Fraction, x_v: Fraction) -> Fraction:
        key = (ei, node, x_u, x_v)
        cached = self._reward_cache.get(key)
        if cached is None:
            cached = self.game.endpoint_reward(ei, node, x_u, x_v)
            self._reward_cache[key] = cached
        return cached

    def _delta(
        self,
        rows: dict[int, Sequence[Fraction]],
        touched: Iterable[int],
        observers: tuple[int, ...],
    ) -> list[Fraction]:
        """Perceived-utility deltas for the observers under replaced allocation rows.

        ``touched`` lists the edges a candidate may have modified; unchanged
        entries are harmless.
        """
        game = self.game
        reward_delta: dict[int, Fraction] = {}
        for ei in touched:
            u, v = game.graph.edges[ei]
            old_u, old_v = self.profile.contributions(game, ei)
            new_u = rows[u][ei] if u in rows else old_u
            new_v = rows[v][ei] if v in rows else old_v
            for node in (u, v):
                before = self._endpoint_reward(ei, node, old_u, old_v)
                after = self._endpoint_reward(ei, node, new_u, new_v)
                if after != before:
                    reward_delta[node] = reward_delta.get(node, ZERO) + after - before
        out = []
        for w in observers:
            row = self.game.alpha_matrix[w]
            d = reward_delta.get(w, ZERO)
            for x, dx in reward_delta.items():
                if x != w:
                    d += row[x] * dx
            out.append(d)
        return out

    # -- candidate generators -------------------------------------------

    def _grid(self) -> list[Fraction]:
        return [Fraction(i, self.k) for i in range(1, self.k + 1)]

    def _row_of(self, v: int) -> list[Fraction]:
        return list(self.profile.alloc[v])

    def _concentrate(self, v: int, ei: int) -> list[Fraction]:
        row = [ZERO] * len(self.game.graph.edges)
        row[ei] = self.game.budgets[v]
        return row

    def unilateral(self, v: int):
        """Yield (row, touched edges) candidates for a single node."""
        game = self.game
        incident = game.graph.incident_edges[v]
        if not incident or game.budgets[v] == 0:
            return
        cur_row = self.profile.alloc[v]
        nonzero = [ei for ei in incident if cur_row[ei] != 0]
        spent = sum((cur_row[ei] for ei in nonzero), ZERO)
        idle = game.budgets[v] - spent
        for ei in incident:
            if len(nonzero) == 1 and nonzero[0] == ei and cur_row[ei] == game.budgets[v]:
                continue  # already concentrated there
            yield self._concentrate(v, ei), nonzero + [ei]
        if game.mode == ATMOST and idle > 0:
            for ei in incident:
                for t in self._grid():
                    row = self._row_of(v)
                    row[ei] += t * idle
                    yield row, [ei]
        for e_from in nonzero:
            cur = cur_row[e_from]
            for e_to in incident:
                if e_to == e_from:
                    continue
                for t in self._grid():
                    row = self._row_of(v)
                    row[e_from] -= t * cur
                    row[e_to] += t * cur
                    yield row, [e_from, e_to]
            if game.mode == ATMOST:
                for t in self._grid():
                    row = self._row_of(v)
                    row[e_from] -= t * cur
                    yield row, [e_from]

    def _pull_toward(self, v: int, ei: int, t: Fraction) -> tuple[list[Fraction], list[int]]:
        """Scale v's other allocations by (1-t) and add the freed budget to ei."""
        row = self._row_of(v)
        touched = [ei]
        freed = ZERO
        for ej in self.game.graph.incident_edges[v]:
            if ej != ei and row[ej] != 0:
                freed += t * row[ej]
                row[ej] -= t * row[ej]
                touched.append(ej)
        if self.game.mode == ATMOST:
            spent = sum((self.profile.alloc[v][e] for e in self.game.graph.incident_edges[v]), ZERO)
            freed += t * (self.game.budgets[v] - spent)
        row[ei] += freed
        return row, touched

    def check(self) -> Optional[DeviationWitness]:
        game = self.game
        # Unilateral moves.
        for v in range(game.graph.n):
            for row, touched in self.unilateral(v):
                (d,) = self._delta({v: row}, touched, (v,))
                if d > 0:
                    return DeviationWitness(
                        kind="unilateral",
                        nodes=(v,),
                        new_rows=(tuple(row),),
                        utilities_before=(self.utilities[v],),
                        utilities_after=(self.utilities[v] + d,),
                    )
        # Bilateral moves onto a common edge.
        grid0 = [ZERO] + self._grid()
        for ei, (u, v) in enumerate(game.graph.edges):
            if game.budgets[u] == 0 or game.budgets[v] == 0:
                continue
            pulls_u = [self._pull_toward(u, ei, t) if t > 0 else (self._row_of(u), []) for t in grid0]
            pulls_v = [self._pull_toward(v, ei, t) if t > 0 else (self._row_of(v), []) for t in grid0]
            for i1, (row_u, touched_u) in enumerate(pulls_u):
                for i2, (row_v, touched_v) in enumerate(pulls_v):
                    if i1 == 0 and i2 == 0:
                        continue
                    du, dv = self._delta(
                        {u: row_u, v: row_v}, set(touched_u) | set(touched_v), (u, v)
                    )
                    if du > 0 and dv > 0:
                        return DeviationWitness(
                            kind="bilateral",
                            nodes=(u, v),
                            new_rows=(tuple(row_u), tuple(row_v)),
                            utilities_before=(self.utilities[u], self.utilities[v]),
                            utilities_after=(self.utilities[u] + du, self.utilities[v] + dv),
                        )
        # Exact mode: pairs moving their full budgets to two distinct edges.
        if game.mode == EXACT:
            for u in range(game.graph.n):
                nonzero_u = [ei for ei in game.graph.incident_edges[u] if self.profile.alloc[u][ei] != 0]
                for v in range(u + 1, game.graph.n):
                    if game.budgets[u] == 0 or game.budgets[v] == 0:
                        continue
                    nonzero_v = [ei for ei in game.graph.incident_edges[v] if self.profile.alloc[v][ei] != 0]
                    for e3 in game.graph.incident_edges[u]:
                        for e4 in game.graph.incident_edges[v]:
                            if e3 == e4:
                                continue
                            row_u = self._concentrate(u, e3)
                            row_v = self._concentrate(v, e4)
                            if tuple(row_u) == tuple(self.profile.alloc[u]) and tuple(row_v) == tuple(
                                self.profile.alloc[v]
                            ):
                                continue
                            touched = set(nonzero_u) | set(nonzero_v) | {e3, e4}
                            du, dv = self._delta({u: row_u, v: row_v}, touched, (u, v))
                            if du > 0 and dv > 0:
                                return DeviationWitness(
                                    kind="pair-split",
                                    nodes=(u, v),
                                    new_rows=(tuple(row_u), tuple(row_v)),
                                    utilities_before=(self.utilities[u], self.utilities[v]),
                                    utilities_after=(self.utilities[u] + du, self.utilities[v] + dv),
                                )
        return None


def is_pairwise_equilibrium(
    game: ContributionGame, profile: StrategyProfile, *, grid_k: int = DEFAULT_GRID_K
) -> PEVerdict:
    """Certify a profile against unilateral moves, bilateral moves onto a
    common edge, and (exact mode) pair moves onto two distinct edges.

    Transfer fractions run over {1/K, ..., 1}; full-budget transfers, the
    decisive deviations for convex families, are always included.
    """
    witness = _Checker(game, profile, grid_k).check()
    if witness is None:
        return PEVerdict(is_equilibrium=True, certificate="grid-certified", grid_k=grid_k, witness=None)
    return PEVerdict(is_equilibrium=False, certificate="witness", grid_k=grid_k, witness=witness)


def tight_social_optimum(game: ContributionGame, *, exact_max_n: int = DEFAULT_EXACT_LIMIT) -> StrategyProfile:
    """Optimal-value profile that saturates a maximum-weight matching of the
    corresponding game; its total reward equals the matching optimum."""
    instance = corresponding_matching_game(game)
    witness, _ = max_weight_matching(instance, max_n=exact_max_n)
    return saturated_profile(game, witness)


def detect_forbidden_edges(game: ContributionGame) -> tuple[Edge, ...]:
    """Edges whose endpoints each have a degree-1 pendant alternative and
    would jointly defect to those pendants even from a saturated edge.

    Defined for exact mode with equal splits and local friendship.
    """
    if game.mode != EXACT:
        raise InstanceError("forbidden edges are defined for exact mode")
    if not game.all_equal_split:
        raise InstanceError("forbidden edges are defined for equal splits")
    if not game.local_friendship:
        raise InstanceError("forbidden edges are defined for local friendship")
    instance = corresponding_matching_game(game)
    a = game.friendship.alpha1
    out = []
    for u, v in game.graph.edges:
        def best_pendant(node: int, excluded: int) -> Optional[Fraction]:
            best = None
            for x in game.graph.adjacency[node]:
                if x != excluded and game.graph.degree(x) == 1:
                    r = instance.edge_reward(node, x)
                    if best is None or r > best:
                        best = r
            return best

        r_ux = best_pendant(u, v)
        r_vy = best_pendant(v, u)
        if r_ux is None or r_vy is None:
            continue
        r_uv = instance.edge_reward(u, v)
        lhs = r_uv + a * r_uv
        if lhs < r_ux + a * r_ux + a * r_vy and lhs < r_vy + a * r_vy + a * r_ux:
            out.append((u, v))
    return tuple(out)


def tight_budget_equilibrium(
    game: ContributionGame, *, exact_max_n: int = DEFAULT_EXACT_LIMIT
) -> StrategyProfile:
    """Spend-everything equilibrium from best-relaxed dynamics on the
    forbidden-edge-free reduction.

    Matched nodes saturate their matched edge; unmatched nodes spread their
    budget equally over all incident edges of the original graph.
    """
    from .dynamics import run_brbp

    forbidden = set(detect_forbidden_edges(game))
    if forbidden:
        keep = [i for i, e in enumerate(game.graph.edges) if e not in forbidden]
        reduced_graph = Graph(game.graph.n, tuple(game.graph.edges[i] for i in keep))
        reduced = ContributionGame(
            graph=reduced_graph,
            budgets=game.budgets,
            functions=tuple(game.functions[i] for i in keep),
            splits=tuple(game.splits[i] for i in keep),
            friendship=game.friendship,
            mode=ATMOST,  # reduction only feeds the matching game; budgets are re-imposed below
            lam=game.lam,
        )
    else:
        reduced = replace(game, mode=ATMOST)
    instance = corresponding_matching_game(reduced)
    matched, _ = run_brbp(instance, exact_max_n=exact_max_n)
    return saturated_profile(game, matched)


@dataclass(frozen=True)
class CCGAuditReport:
    optimum: Fraction
    equilibrium_values: tuple[Fraction, ...]
    equilibrium_sources: tuple[str, ...]
    worst_ratio: Optional[Fraction]
    Q: Fraction
    bound: Fraction
    passed: bool

    def to_dict(self) -> dict:
        return {
            "optimum": rat_str(self.optimum),
            "equilibrium_values": [rat_str(v) for v in self.equilibrium_values],
            "equilibrium_sources": list(self.equilibrium_sources),
            "worst_ratio": None if self.worst_ratio is None else rat_str(self.worst_ratio),
            "Q": rat_str(self.Q),
            "bound": rat_str(self.bound),
            "passed": self.passed,
        }


def _local_search(
    game: ContributionGame, start: StrategyProfile, grid_k: int, cap: int = 60
) -> Optional[StrategyProfile]:
    profile = start
    for _ in range(cap):
        verdict = is_pairwise_equilibrium(game, profile, grid_k=grid_k)
        if verdict.is_equilibrium:
            return profile
        witness = verdict.witness
        assert witness is not None
        rows = [list(r) for r in profile.alloc]
        for node, row in zip(witness.nodes, witness.new_rows):
            rows[node] = list(row)
        profile = StrategyProfile.build(game, rows)
    return None


def ccg_audit(
    game: ContributionGame,
    *,
    max_n: int = DEFAULT_ENUM_LIMIT,
    exact_max_n: int = DEFAULT_EXACT_LIMIT,
    grid_k: int = DEFAULT_GRID_K,
) -> CCGAuditReport:
    """Compare every grid-certified equilibrium we can construct against the
    tight social optimum and flag violations of the anarchy bound 1+Q."""
    instance = corresponding_matching_game(game)
    _, optimum = max_weight_matching(instance, max_n=exact_max_n)
    q_param = compute_Q(instance)

    found: list[tuple[str, StrategyProfile]] = []
    if game.mode == ATMOST:
        for i, matched in enumerate(enumerate_stable_matchings(instance, max_n=max_n)):
            found.append((f"stable-matching-{i}", saturated_profile(game, matched)))
    elif game.all_equal_split and game.local_friendship:
        found.append(("tight-budget", tight_budget_equilibrium(game, exact_max_n=exact_max_n)))

    searched = _local_search(game, tight_social_optimum(game, exact_max_n=exact_max_n), grid_k)
    if searched is not None:
        found.append(("local-search-optimum", searched))

    values: list[Fraction] = []
    sources: list[str] = []
    for source, profile in found:
        if is_pairwise_equilibrium(game, profile, grid_k=grid_k).is_equilibrium:
            values.append(total_reward(game, profile))
            sources.append(source)

    worst: Optional[Fraction] = None
    passed = True
    for value in values:
        if value <= 0:
            passed = False
            continue
        ratio = optimum / value
        if worst is None or ratio > worst:
            worst = ratio
        if ratio > 1 + q_param:
            passed = False
    return CCGAuditReport(
        optimum=optimum,
        equilibrium_values=tuple(values),
        equilibrium_sources=tuple(sources),
        worst_ratio=worst,
        Q=q_param,
        bound=1 + q_param,
        passed=passed,
    )


# -- JSON --------------------------------------------------------------------


def ccg_to_dict(game: ContributionGame) -> dict:
    functions = []
    for ei, (u, v) in enumerate(game.graph.edges):
        f = game.functions[ei]
        entry: dict = {"edge": [u, v], "family": f.family, "c": rat_str(f.c), "split": {"kind": game.splits[ei]}}
        if f.family == FAMILY_POWPROD:
            entry["k"] = f.k
        functions.append(entry)
    doc = {
        "nodes": game.graph.n,
        "budgets": [rat_str(b) for b in game.budgets],
        "mode": game.mode,
        "functions": functions,
        "alpha": [rat_str(a) for a in game.friendship.alpha],
    }
    if game.lam is not None:
        doc["lambda"] = [rat_str(x) for x in game.lam]
    return doc


def ccg_from_dict(doc: dict) -> ContributionGame:
    try:
        n = int(doc["nodes"])
        budgets = tuple(rat(b) for b in doc["budgets"])
        mode = doc.get("mode", ATMOST)
        functions_doc = doc["functions"]
        alpha = tuple(rat(a) for a in doc.get("alpha", []))
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed contribution game document: {exc}") from exc
    entries = []
    for entry in functions_doc:
        e = normalize_edge(int(entry["edge"][0]), int(entry["edge"][1]))
        f = RewardFunction(family=entry["family"], c=rat(entry["c"]), k=int(entry.get("k", 1)))
        entries.append((e, f, entry.get("split", {"kind": SPLIT_EQUAL})["kind"]))
    entries.sort(key=lambda t: t[0])
    graph = Graph(n, tuple(e for e, _, _ in entries))
    lam = tuple(rat(x) for x in doc["lambda"]) if "lambda" in doc else None
    return ContributionGame(
        graph=graph,
        budgets=budgets,
        functions=tuple(f for _, f, _ in entries),
        splits=tuple(s for _, _, s in entries),
        friendship=FriendshipVector(alpha),
        mode=mode,
        lam=lam,
    )


def ccg_to_json(game: ContributionGame) -> str:
    return json.dumps(ccg_to_dict(game), indent=2, sort_keys=True) + "\n"


def ccg_from_json(text: str) -> ContributionGame:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from exc
    return ccg_from_dict(doc)
