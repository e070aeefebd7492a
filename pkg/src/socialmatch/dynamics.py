"""Improvement dynamics and their traces.

The best-relaxed-blocking-pair process starts from a maximum-weight
matching and repeatedly lets the relaxed blocking pair with the largest
edge reward deviate.  Under equal sharing it terminates within 2m^2
deviations and its output is stable; for other sharing rules termination
has no guarantee, so the run caps out and reports that distinctly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Optional

from .instance import Edge, EqualSharing, GameInstance
from .matching import (
    BISWIVEL,
    RELAXED_BISWIVEL,
    SWIVEL,
    Deviation,
    Matching,
    _pair_check,
    apply_deviation,
    deviation_for,
    matching_value,
)
from .oracle import DEFAULT_EXACT_LIMIT, max_weight_matching
from .rationals import rat_str


class ConvergenceError(RuntimeError):
    """A convergence guarantee was violated; indicates a bug, not bad input."""


@dataclass(frozen=True)
class TraceStep:
    index: int
    deviation: Deviation
    reward: Fraction
    value_after: Fraction

    def to_dict(self) -> dict:
        return {
            "step": self.index,
            "kind": self.deviation.kind,
            "pair": list(self.deviation.pair),
            "r": rat_str(self.reward),
            "value": rat_str(self.value_after),
        }


@dataclass(frozen=True)
class DynamicsTrace:
    """Ordered record of deviations with phase markers.

    A phase starts at each both-matched (biswivel-kind) deviation; swivels
    in between only ever raise the matching value.
    """

    policy: str
    edge_count: int
    initial: Matching
    initial_value: Fraction
    steps: tuple[TraceStep, ...]
    final: Matching
    termination: str  # "stable" or "cap"

    @cached_property
    def phase_starts(self) -> tuple[int, ...]:
        return tuple(
            s.index for s in self.steps if s.deviation.kind in (BISWIVEL, RELAXED_BISWIVEL)
        )

    def to_jsonl(self) -> str:
        lines = []
        phase = 0
        for s in self.steps:
            if s.index in self.phase_starts:
                phase += 1
                lines.append(json.dumps({"kind": "phase", "step": s.index, "phase": phase}, sort_keys=True))
            lines.append(json.dumps(s.to_dict(), sort_keys=True))
        lines.append(
            json.dumps(
                {"kind": "end", "termination": self.termination, "steps": len(self.steps)},
                sort_keys=True,
            )
        )
        return "\n".join(lines) + "\n"


def _best_pair(
    instance: GameInstance, matching: Matching, relaxed: bool
) -> Optional[Edge]:
    best: Optional[tuple] = None
    for u, v in instance.graph.edges:
        if matching.partner(u) == v:
            continue
        if _pair_check(instance, matching, u, v, relaxed).blocking:
            r = instance.edge_reward(u, v)
            key = (-r, u, v)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    return (best[1], best[2])


def best_relaxed_blocking_pair(instance: GameInstance, matching: Matching) -> Optional[Edge]:
    """The relaxed blocking pair with maximum edge reward.

    Ties break to the lexicographically smallest pair (min endpoint, then
    max endpoint) so runs are reproducible.
    """
    return _best_pair(instance, matching, relaxed=True)


def best_blocking_pair(instance: GameInstance, matching: Matching) -> Optional[Edge]:
    return _best_pair(instance, matching, relaxed=False)


def _run(
    instance: GameInstance,
    start: Matching,
    pick: Callable[[Matching], Optional[Edge]],
    kind_for: Callable[[Matching, Edge], str],
    policy: str,
    cap: int,
    cap_is_assertion: bool,
) -> tuple[Matching, DynamicsTrace]:
    matching = start
    steps: list[TraceStep] = []
    while True:
        pair = pick(matching)
        if pair is None:
            termination = "stable"
            break
        if len(steps) >= cap:
            if cap_is_assertion:
                raise ConvergenceError(
                    f"{policy} exceeded {cap} deviations; the termination guarantee is broken"
                )
            termination = "cap"
            break
        u, v = pair
        dev = deviation_for(matching, u, v, kind_for(matching, pair))
        matching = apply_deviation(matching, dev)
        steps.append(
            TraceStep(
                index=len(steps),
                deviation=dev,
                reward=instance.edge_reward(u, v),
                value_after=matching_value(instance, matching),
            )
        )
    trace = DynamicsTrace(
        policy=policy,
        edge_count=len(instance.graph.edges),
        initial=start,
        initial_value=matching_value(instance, start),
        steps=tuple(steps),
        final=matching,
        termination=termination,
    )
    return matching, trace


def _kind(matching: Matching, pair: Edge, relaxed: bool) -> str:
    u, v = pair
    if matching.partner(u) is not None and matching.partner(v) is not None:
        return RELAXED_BISWIVEL if relaxed else BISWIVEL
    return SWIVEL


def run_brbp(
    instance: GameInstance,
    *,
    exact_max_n: int = DEFAULT_EXACT_LIMIT,
    cap: Optional[int] = None,
) -> tuple[Matching, DynamicsTrace]:
    """Best-relaxed-blocking-pair dynamics from a maximum-weight matching.

    Under equal sharing the default cap of 2m^2 is an assertion: exceeding
    it raises, because termination within that many deviations is
    guaranteed.  With an explicit cap, or for other sharing rules (where no
    termination guarantee exists), hitting the cap is reported in the trace
    as termination="cap".
    """
    m_star, _ = max_weight_matching(instance, max_n=exact_max_n)
    m = len(instance.graph.edges)
    assertion = cap is None and isinstance(instance.sharing, EqualSharing)
    if cap is None:
        cap = max(2 * m * m, 1)
    return _run(
        instance,
        m_star,
        pick=lambda M: best_relaxed_blocking_pair(instance, M),
        kind_for=lambda M, p: _kind(M, p, relaxed=True),
        policy="brbp",
        cap=cap,
        cap_is_assertion=assertion,
    )


def run_best_blocking_pair(
    instance: GameInstance,
    start: Matching,
    *,
    cap: int = 1_000_000,
) -> tuple[Matching, DynamicsTrace]:
    """Repeatedly let the true blocking pair with maximum edge reward deviate."""
    start.validate_against(instance)
    return _run(
        instance,
        start,
        pick=lambda M: best_blocking_pair(instance, M),
        kind_for=lambda M, p: _kind(M, p, relaxed=False),
        policy="bbp",
        cap=cap,
        cap_is_assertion=False,
    )


def run_arbitrary_dynamics(
    instance: GameInstance,
    start: Matching,
    seed: int,
    *,
    cap: int = 1_000_000,
) -> tuple[Matching, DynamicsTrace]:
    """Let a uniformly random blocking pair deviate at each step (seeded)."""
    start.validate_against(instance)
    rng = random.Random(seed)

    def pick(M: Matching) -> Optional[Edge]:
        candidates = [
            (u, v)
            for u, v in instance.graph.edges
            if M.partner(u) != v and _pair_check(instance, M, u, v, relaxed=False).blocking
        ]
        if not candidates:
            return None
        return candidates[rng.randrange(len(candidates))]

    return _run(
        instance,
        start,
        pick=pick,
        kind_for=lambda M, p: _kind(M, p, relaxed=False),
        policy="arbitrary",
        cap=cap,
        cap_is_assertion=False,
    )


@dataclass(frozen=True)
class TraceLemmaReport:
    """Checks of the structural facts every best-relaxed run must satisfy."""

    empty: bool
    first_deviation_is_relaxed_biswivel: bool
    biswivel_count: int
    biswivel_limit: int
    biswivel_edges_distinct: bool
    reward_ordering_holds: bool
    phase_values_nondecreasing: bool

    @property
    def passed(self) -> bool:
        return (
            self.first_deviation_is_relaxed_biswivel
            and self.biswivel_count <= self.biswivel_limit
            and self.biswivel_edges_distinct
            and self.reward_ordering_holds
            and self.phase_values_nondecreasing
        )

    def to_dict(self) -> dict:
        return {
            "empty": self.empty,
            "first_deviation_is_relaxed_biswivel": self.first_deviation_is_relaxed_biswivel,
            "biswivel_count": self.biswivel_count,
            "biswivel_limit": self.biswivel_limit,
            "biswivel_edges_distinct": self.biswivel_edges_distinct,
            "reward_ordering_holds": self.reward_ordering_holds,
            "phase_values_nondecreasing": self.phase_values_nondecreasing,
            "passed": self.passed,
        }


def assert_trace_lemmas(trace: DynamicsTrace) -> TraceLemmaReport:
    """Verify the trace-level facts of a best-relaxed-blocking-pair run.

    Checks: the first deviation (if any) is a relaxed biswivel; at most m
    relaxed biswivels occur and their inserted edges are distinct; every
    deviation before a relaxed biswivel inserted an edge with reward at
    least the biswivel's; within each phase the matching value never
    decreases after the phase-opening step.
    """
    steps = trace.steps
    if not steps:
        return TraceLemmaReport(
            empty=True,
            first_deviation_is_relaxed_biswivel=True,
            biswivel_count=0,
            biswivel_limit=trace.edge_count,
            biswivel_edges_distinct=True,
            reward_ordering_holds=True,
            phase_values_nondecreasing=True,
        )

    biswivel_kinds = (BISWIVEL, RELAXED_BISWIVEL)
    first_ok = steps[0].deviation.kind in biswivel_kinds
    biswivels = [s for s in steps if s.deviation.kind in biswivel_kinds]
    edges = [s.deviation.added for s in biswivels]
    distinct = len(edges) == len(set(edges))

    ordering = True
    for s in biswivels:
        for earlier in steps[: s.index]:
            if earlier.reward < s.reward:
                ordering = False
                break
        if not ordering:
            break

    monotone = True
    prev_value = None
    for s in steps:
        if s.deviation.kind in biswivel_kinds:
            prev_value = s.value_after  # new phase baseline
        else:
            if prev_value is not None and s.value_after < prev_value:
                monotone = False
                break
            prev_value = s.value_after

    return TraceLemmaReport(
        empty=False,
        first_deviation_is_relaxed_biswivel=first_ok,
        biswivel_count=len(biswivels),
        biswivel_limit=trace.edge_count,
        biswivel_edges_distinct=distinct,
        reward_ordering_holds=ordering,
        phase_values_nondecreasing=monotone,
    )
