"""Immutable matching-game instances.

A :class:`GameInstance` bundles the graph topology, per-edge rewards, the
reward-sharing rule, and the friendship vector, together with derived
quantities (hop distances, the share-ratio parameter R and the stake-ratio
parameter Q).  All arithmetic is exact rational arithmetic: stability is
defined by strict inequalities, and floating point would make blocking-pair
verdicts nondeterministic.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Union

from .rationals import rat, rat_str

ZERO = Fraction(0)
ONE = Fraction(1)

Edge = tuple[int, int]


class InstanceError(ValueError):
    """Raised when an instance violates a structural invariant."""


class UndefinedRatioError(ValueError):
    """Raised when a share ratio is undefined (some share is zero)."""


def normalize_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on dense integer node ids 0..n-1."""

    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise InstanceError("node count must be nonnegative")
        seen = set()
        normalized = []
        for u, v in self.edges:
            if u == v:
                raise InstanceError(f"self-loop at node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InstanceError(f"edge ({u},{v}) has endpoint outside 0..{self.n - 1}")
            e = normalize_edge(u, v)
            if e in seen:
                raise InstanceError(f"parallel edge {e}")
            seen.add(e)
            normalized.append(e)
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    @cached_property
    def incident_edges(self) -> tuple[tuple[int, ...], ...]:
        """Per node, indices into ``edges`` of its incident edges."""
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for i, (u, v) in enumerate(self.edges):
            inc[u].append(i)
            inc[v].append(i)
        return tuple(tuple(a) for a in inc)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return normalize_edge(u, v) in self.edge_index


def build_distances(graph: Graph) -> tuple[tuple[Optional[int], ...], ...]:
    """All-pairs unweighted shortest hop distances (BFS from each node).

    Disconnected pairs get ``None``.  Distances depend only on the graph,
    never on any matching.
    """
    out = []
    for src in range(graph.n):
        dist: list[Optional[int]] = [None] * graph.n
        dist[src] = 0
        queue = deque([src])
        while queue:
            x = queue.popleft()
            for y in graph.adjacency[x]:
                if dist[y] is None:
                    dist[y] = dist[x] + 1  # type: ignore[operator]
                    queue.append(y)
        out.append(tuple(dist))
    return tuple(out)


@dataclass(frozen=True)
class FriendshipVector:
    """Distance-indexed caring coefficients, 1 >= a1 >= a2 >= ... >= 0.

    Entries beyond the stored length are zero, so the vector may be shorter
    than the graph diameter.
    """

    alpha: tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        values = tuple(rat(a) for a in self.alpha)
        object.__setattr__(self, "alpha", values)
        prev = ONE
        for i, a in enumerate(values):
            if a < 0 or a > 1:
                raise InstanceError(f"alpha_{i + 1}={a} outside [0, 1]")
            if a > prev:
                raise InstanceError("friendship vector must be nonincreasing")
            prev = a

    def at(self, d: Optional[int]) -> Fraction:
        """Coefficient for hop distance d; zero beyond the vector or if disconnected."""
        if d is None or d < 1 or d > len(self.alpha):
            return ZERO
        return self.alpha[d - 1]

    @property
    def alpha1(self) -> Fraction:
        return self.at(1)

    @property
    def alpha2(self) -> Fraction:
        return self.at(2)

    @property
    def is_zero(self) -> bool:
        return all(a == 0 for a in self.alpha)


@dataclass(frozen=True)
class EqualSharing:
    rule = "equal"


@dataclass(frozen=True)
class ObliviousSharing:
    """Arbitrary fixed nonnegative shares per edge, aligned with Graph.edges.

    ``shares[i]`` is (share of the smaller endpoint, share of the larger
    endpoint) of edge i; the two must sum to the edge reward.
    """

    shares: tuple[tuple[Fraction, Fraction], ...]
    rule = "oblivious"


@dataclass(frozen=True)
class MatthewSharing:
    """Brand-value split: the endpoint with larger lambda takes the larger share."""

    lam: tuple[Fraction, ...]
    rule = "matthew"


@dataclass(frozen=True)
class ParasiteSharing:
    """Opposite of the brand-value split: shares are proportional to the partner's lambda."""

    lam: tuple[Fraction, ...]
    rule = "parasite"


@dataclass(frozen=True)
class TrustSharing:
    """Share of an endpoint is the edge quality plus the partner's trust value."""

    beta: tuple[Fraction, ...]
    h: tuple[Fraction, ...]
    rule = "trust"


SharingRule = Union[EqualSharing, ObliviousSharing, MatthewSharing, ParasiteSharing, TrustSharing]


@dataclass(frozen=True)
class GameInstance:
    """Graph + rewards + sharing rule + friendship vector, immutable and shareable."""

    graph: Graph
    rewards: tuple[Fraction, ...]
    sharing: SharingRule
    friendship: FriendshipVector

    def __post_init__(self) -> None:
        object.__setattr__(self, "rewards", tuple(rat(r) for r in self.rewards))
        m = len(self.graph.edges)
        n = self.graph.n
        if len(self.rewards) != m:
            raise InstanceError("one reward per edge required")
        for i, r in enumerate(self.rewards):
            if r <= 0:
                raise InstanceError(f"edge {self.graph.edges[i]} has nonpositive reward {r}")
        s = self.sharing
        if isinstance(s, ObliviousSharing):
            if len(s.shares) != m:
                raise InstanceError("oblivious sharing needs one share pair per edge")
            for i, (a, b) in enumerate(s.shares):
                if a < 0 or b < 0:
                    raise InstanceError(f"negative share on edge {self.graph.edges[i]}")
                if a + b != self.rewards[i]:
                    raise InstanceError(
                        f"shares on edge {self.graph.edges[i]} sum to {a + b}, reward is {self.rewards[i]}"
                    )
        elif isinstance(s, (MatthewSharing, ParasiteSharing)):
            if len(s.lam) != n:
                raise InstanceError("one lambda per node required")
            for v, lam in enumerate(s.lam):
                if lam <= 0:
                    raise InstanceError(f"lambda of node {v} must be positive")
        elif isinstance(s, TrustSharing):
            if len(s.beta) != n or len(s.h) != m:
                raise InstanceError("trust sharing needs one beta per node and one h per edge")
            for v, b in enumerate(s.beta):
                if b < 0:
                    raise InstanceError(f"beta of node {v} must be nonnegative")
            for i, h in enumerate(s.h):
                if h < 0:
                    raise InstanceError(f"h of edge {self.graph.edges[i]} must be nonnegative")
            for i, (u, v) in enumerate(self.graph.edges):
                expected = 2 * s.h[i] + s.beta[u] + s.beta[v]
                if self.rewards[i] != expected:
                    raise InstanceError(
                        f"trust reward of edge {(u, v)} must be 2h+beta_u+beta_v={expected}, got {self.rewards[i]}"
                    )
        elif not isinstance(s, EqualSharing):
            raise InstanceError(f"unknown sharing rule {s!r}")

    # -- derived structure ------------------------------------------------

    @cached_property
    def distances(self) -> tuple[tuple[Optional[int], ...], ...]:
        return build_distances(self.graph)

    @cached_property
    def alpha_matrix(self) -> tuple[tuple[Fraction, ...], ...]:
        """alpha applied to the hop distance of every node pair (0 if disconnected)."""
        fv = self.friendship
        return tuple(tuple(fv.at(d) for d in row) for row in self.distances)

    @cached_property
    def shares(self) -> tuple[tuple[Fraction, Fraction], ...]:
        """Per edge (u, v) with u < v: the reward shares of u and v.

        Shares always sum to the edge reward; under equal sharing each is half.
        """
        out = []
        s = self.sharing
        for i, (u, v) in enumerate(self.graph.edges):
            r = self.rewards[i]
            if isinstance(s, EqualSharing):
                out.append((r / 2, r / 2))
            elif isinstance(s, ObliviousSharing):
                out.append(s.shares[i])
            elif isinstance(s, MatthewSharing):
                tot = s.lam[u] + s.lam[v]
                out.append((s.lam[u] / tot * r, s.lam[v] / tot * r))
            elif isinstance(s, ParasiteSharing):
                tot = s.lam[u] + s.lam[v]
                out.append((s.lam[v] / tot * r, s.lam[u] / tot * r))
            else:
                assert isinstance(s, TrustSharing)
                out.append((s.h[i] + s.beta[v], s.h[i] + s.beta[u]))
        return tuple(out)

    @cached_property
    def endpoint_rewards(self) -> tuple[tuple[Fraction, Fraction], ...]:
        """Per edge: the reward each endpoint collects when the edge is matched.

        Under equal sharing this is the full edge reward for both endpoints
        (matched players each enjoy r_e); under every other rule it is the
        share.  The two conventions differ by a uniform factor of two for
        equal sharing, so all strict-inequality verdicts agree either way.
        """
        if isinstance(self.sharing, EqualSharing):
            return tuple((r, r) for r in self.rewards)
        return self.shares

    @cached_property
    def stakes(self) -> tuple[tuple[Fraction, Fraction], ...]:
        """Per edge: endpoint reward plus alpha1 times the partner's reward.

        This is the quantity each endpoint weighs when deciding whether to
        match along the edge, in the same convention as endpoint_rewards.
        """
        a1 = self.friendship.alpha1
        return tuple((eu + a1 * ev, ev + a1 * eu) for eu, ev in self.endpoint_rewards)

    @cached_property
    def share_stakes(self) -> tuple[tuple[Fraction, Fraction], ...]:
        """Share-based q-values per edge: share + alpha1 * partner share."""
        a1 = self.friendship.alpha1
        return tuple((su + a1 * sv, sv + a1 * su) for su, sv in self.shares)

    # -- small accessors ---------------------------------------------------

    def edge_id(self, u: int, v: int) -> int:
        try:
            return self.graph.edge_index[normalize_edge(u, v)]
        except KeyError:
            raise InstanceError(f"({u},{v}) is not an edge") from None

    def edge_reward(self, u: int, v: int) -> Fraction:
        return self.rewards[self.edge_id(u, v)]

    def distance(self, u: int, v: int) -> Optional[int]:
        return self.distances[u][v]

    def alpha_between(self, u: int, v: int) -> Fraction:
        return self.alpha_matrix[u][v]

    def share_of(self, x: int, u: int, v: int) -> Fraction:
        """Reward share of endpoint x on edge (u, v)."""
        i = self.edge_id(u, v)
        a, b = self.graph.edges[i]
        su, sv = self.shares[i]
        if x == a:
            return su
        if x == b:
            return sv
        raise InstanceError(f"node {x} is not incident to edge ({u},{v})")

    def endpoint_reward_of(self, x: int, u: int, v: int) -> Fraction:
        i = self.edge_id(u, v)
        a, b = self.graph.edges[i]
        eu, ev = self.endpoint_rewards[i]
        if x == a:
            return eu
        if x == b:
            return ev
        raise InstanceError(f"node {x} is not incident to edge ({u},{v})")


# -- the public operation surface ------------------------------------------


def reward_share(instance: GameInstance, node: int, edge: Edge) -> Fraction:
    """Reward the node gets from the edge when matched along it.

    Equal sharing splits the reward in half; the unequal rules follow their
    defining formulas.  The two shares of an edge always sum to its reward.
    """
    return instance.share_of(node, *edge)


def q_value(instance: GameInstance, node: int, edge: Edge) -> Fraction:
    """Effective stake of an endpoint under friendship: own share + alpha1 * partner share."""
    u, v = edge
    a1 = instance.friendship.alpha1
    own = instance.share_of(node, u, v)
    other = v if node == u else u
    return own + a1 * instance.share_of(other, u, v)


def compute_R(instance: GameInstance) -> Fraction:
    """Maximum share ratio over ordered endpoint pairs of all edges; always >= 1.

    Undefined (raises) when some share is zero.
    """
    best: Optional[Fraction] = None
    for i, (su, sv) in enumerate(instance.shares):
        if su == 0 or sv == 0:
            raise UndefinedRatioError(
                f"zero share on edge {instance.graph.edges[i]}: share ratio undefined"
            )
        ratio = max(su / sv, sv / su)
        if best is None or ratio > best:
            best = ratio
    if best is None:
        raise UndefinedRatioError("instance has no edges: share ratio undefined")
    return best


def compute_Q(instance: GameInstance) -> Fraction:
    """Q = (R + alpha1) / (1 + alpha1 * R), the maximum stake ratio parameter."""
    r = compute_R(instance)
    a1 = instance.friendship.alpha1
    return (r + a1) / (1 + a1 * r)


def compute_Q_prime(instance: GameInstance) -> Fraction:
    """Q' = (1 + alpha1)(1 + R) / (1 + alpha1 (R + 1))."""
    r = compute_R(instance)
    a1 = instance.friendship.alpha1
    return (1 + a1) * (1 + r) / (1 + a1 * (r + 1))


# -- JSON ------------------------------------------------------------------


def instance_to_dict(instance: GameInstance) -> dict:
    edges = [
        {"u": u, "v": v, "r": rat_str(instance.rewards[i])}
        for i, (u, v) in enumerate(instance.graph.edges)
    ]
    s = instance.sharing
    sharing: dict = {"rule": s.rule}
    if isinstance(s, ObliviousSharing):
        sharing["shares"] = [{"u": rat_str(a), "v": rat_str(b)} for a, b in s.shares]
    elif isinstance(s, (MatthewSharing, ParasiteSharing)):
        sharing["lambda"] = [rat_str(x) for x in s.lam]
    elif isinstance(s, TrustSharing):
        sharing["beta"] = [rat_str(x) for x in s.beta]
        sharing["h"] = [rat_str(x) for x in s.h]
    return {
        "nodes": instance.graph.n,
        "edges": edges,
        "sharing": sharing,
        "alpha": [rat_str(a) for a in instance.friendship.alpha],
    }


def instance_from_dict(doc: dict) -> GameInstance:
    try:
        n = int(doc["nodes"])
        raw_edges = doc["edges"]
        sharing_doc = doc.get("sharing", {"rule": "equal"})
        alpha = tuple(rat(a) for a in doc.get("alpha", []))
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance document: {exc}") from exc

    pairs = []
    flipped = []
    for e in raw_edges:
        u, v = int(e["u"]), int(e["v"])
        pairs.append(normalize_edge(u, v))
        flipped.append(u > v)
    graph = Graph(n, tuple(pairs))
    # Re-align per-edge data with the graph's canonical (sorted) edge order.
    order = sorted(range(len(pairs)), key=lambda i: pairs[i])

    rule = sharing_doc.get("rule", "equal")
    sharing: SharingRule
    if rule == "trust":
        beta = tuple(rat(x) for x in sharing_doc["beta"])
        h_in = [rat(x) for x in sharing_doc["h"]]
        h = tuple(h_in[i] for i in order)
        sharing = TrustSharing(beta=beta, h=h)
        rewards = []
        for i, (u, v) in enumerate(graph.edges):
            derived = 2 * h[i] + beta[u] + beta[v]
            stated = raw_edges[order[i]].get("r")
            if stated is not None and rat(stated) != derived:
                raise InstanceError(
                    f"trust edge {(u, v)}: stated reward {stated} != 2h+beta_u+beta_v={derived}"
                )
            rewards.append(derived)
    else:
        rewards = []
        for i in order:
            if "r" not in raw_edges[i]:
                raise InstanceError(f"edge {pairs[i]} is missing its reward")
            rewards.append(rat(raw_edges[i]["r"]))
        if rule == "equal":
            sharing = EqualSharing()
        elif rule == "oblivious":
            share_docs = sharing_doc["shares"]
            if len(share_docs) != len(pairs):
                raise InstanceError("oblivious sharing needs one share pair per edge")
            aligned = []
            for i in order:
                a, b = rat(share_docs[i]["u"]), rat(share_docs[i]["v"])
                aligned.append((b, a) if flipped[i] else (a, b))
            sharing = ObliviousSharing(shares=tuple(aligned))
        elif rule == "matthew":
            sharing = MatthewSharing(lam=tuple(rat(x) for x in sharing_doc["lambda"]))
        elif rule == "parasite":
            sharing = ParasiteSharing(lam=tuple(rat(x) for x in sharing_doc["lambda"]))
        else:
            raise InstanceError(f"unknown sharing rule {rule!r}")

    return GameInstance(
        graph=graph,
        rewards=tuple(rewards),
        sharing=sharing,
        friendship=FriendshipVector(alpha),
    )


def instance_to_json(instance: GameInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2, sort_keys=True) + "\n"


def instance_from_json(text: str) -> GameInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from exc
    return instance_from_dict(doc)
