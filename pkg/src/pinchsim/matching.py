"""Three-sided user/waveguide/antenna matching and the swap-based search.

A matching pairs each user with a distinct waveguide (a permutation) and each
waveguide with one activated antenna. Users can only change waveguides by
swapping with another user; a candidate swap carries the activated antennas
with the waveguides and then rescans both affected waveguides for a better
antenna. A swap commits only when the acting preference strictly improves,
which makes the sum-rate trajectory monotone under the sum-rate preference
and guarantees termination under both preferences.

Two preference policies are provided:

* ``sum_rate``: exact objective comparisons; an antenna switch or a swap is
  preferred iff the system sum rate strictly increases.
* ``los_distance``: a cheap dominance rule over the LoS indicator, the
  antenna-user distance, and the count of LoS interference links; at least
  one of the three must improve strictly while the other two do not worsen.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .channel import ChannelTensor

if TYPE_CHECKING:  # pragma: no cover
    from .rate import PowerBudget


@dataclass(frozen=True)
class Matching:
    """Assignment permutation (user -> waveguide) plus per-waveguide antenna."""

    assignment: tuple[int, ...]
    activation: tuple[int, ...]

    @property
    def num_users(self) -> int:
        return len(self.assignment)

    def waveguide_of(self, user: int) -> int:
        return self.assignment[user]


class CycleCapError(RuntimeError):
    """Raised when the swap search exceeds its cycle budget."""


def check_feasible(matching: Matching, num_waveguides: int, num_antennas: int) -> None:
    """Raise ValueError unless the matching satisfies all assignment constraints."""
    if len(matching.assignment) != num_waveguides:
        raise ValueError("assignment length must equal the user/waveguide count")
    if sorted(matching.assignment) != list(range(num_waveguides)):
        raise ValueError("assignment must be a bijection between users and waveguides")
    if len(matching.activation) != num_waveguides:
        raise ValueError("one activation entry per waveguide required")
    if any(not 0 <= a < num_antennas for a in matching.activation):
        raise ValueError("activation index outside the antenna grid")


@dataclass(frozen=True)
class PreferencePolicy:
    """Selector between the exact and the dominance-based preference.

    ``strict_interference_drop`` additionally requires the LoS interference
    count to fall strictly for a swap to be accepted under ``los_distance``;
    the default applies the usual one-strict/rest-non-strict rule to all
    three conditions.
    """

    variant: str
    strict_interference_drop: bool = False

    def __post_init__(self) -> None:
        if self.variant not in ("sum_rate", "los_distance"):
            raise ValueError(f"unknown preference variant {self.variant!r}")


SUM_RATE = PreferencePolicy("sum_rate")
LOS_DISTANCE = PreferencePolicy("los_distance")


@dataclass
class AlgorithmStats:
    """Work counters for one swap-search run.

    ``preference_evaluations`` counts every antenna-preference comparison plus
    the final per-swap verdict; per cycle it is bounded by N (K - 1) 2M.
    ``activation_switches`` counts switches accepted while building swap
    candidates, whether or not the candidate commits.
    """

    cycles: int = 0
    accepted_swaps: int = 0
    activation_switches: int = 0
    preference_evaluations: int = 0
    evaluations_per_cycle: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class SwapCandidate:
    """A proposed exchange of waveguides between two users.

    ``user_a`` leaves ``waveguide_a`` for ``waveguide_b`` and vice versa.
    ``old_antenna_*`` are the activations before the swap; ``new_antenna_*``
    the (possibly rescanned) activations afterwards, with ``new_antenna_a``
    serving ``user_b`` on ``waveguide_a``.
    """

    user_a: int
    user_b: int
    waveguide_a: int
    waveguide_b: int
    old_antenna_a: int
    old_antenna_b: int
    new_antenna_a: int
    new_antenna_b: int


def apply_swap(matching: Matching, user_a: int, user_b: int) -> Matching:
    """Exchange the waveguides of two users; antennas stay with their waveguides."""
    if user_a == user_b:
        raise ValueError("a swap needs two distinct users")
    assignment = list(matching.assignment)
    assignment[user_a], assignment[user_b] = assignment[user_b], assignment[user_a]
    return Matching(assignment=tuple(assignment), activation=matching.activation)


def los_interference_counts(tensor: ChannelTensor) -> np.ndarray:
    """Count of LoS links from antenna (k, m) to every user except n, per (k, m, n)."""
    totals = tensor.los.sum(axis=2, keepdims=True)
    return (totals - tensor.los).astype(np.int64)


def antenna_switch_preferred(
    user: int,
    waveguide: int,
    current_antenna: int,
    candidate_antenna: int,
    tensor: ChannelTensor,
    counts: np.ndarray | None = None,
) -> bool:
    """Dominance rule for switching one waveguide's antenna while serving ``user``.

    The candidate wins iff it strictly improves at least one of: LoS to the
    served user, distance to the served user, LoS interference links to the
    other users, and worsens none of them.
    """
    if current_antenna == candidate_antenna:
        raise ValueError("antenna switch requires two distinct antennas")
    if counts is None:
        counts = los_interference_counts(tensor)
    los_cur = int(tensor.los[waveguide, current_antenna, user])
    los_new = int(tensor.los[waveguide, candidate_antenna, user])
    closer_by = float(
        tensor.distances[waveguide, current_antenna, user]
        - tensor.distances[waveguide, candidate_antenna, user]
    )
    cnt_cur = int(counts[waveguide, current_antenna, user])
    cnt_new = int(counts[waveguide, candidate_antenna, user])
    no_worse = los_new >= los_cur and closer_by >= 0.0 and cnt_new <= cnt_cur
    some_better = los_new > los_cur or closer_by > 0.0 or cnt_new < cnt_cur
    return no_worse and some_better


def swap_preferred(
    candidate: SwapCandidate,
    tensor: ChannelTensor,
    counts: np.ndarray | None = None,
    strict_interference_drop: bool = False,
) -> bool:
    """Joint two-user dominance rule deciding whether a swap candidate blocks.

    Evaluated at the candidate's final (post-rescan) antennas against the
    pre-swap configuration, summing both users' LoS gains, distance gains,
    and interference-link counts.
    """
    if counts is None:
        counts = los_interference_counts(tensor)
    c = candidate
    los = tensor.los
    dist = tensor.distances
    los_new = int(los[c.waveguide_b, c.new_antenna_b, c.user_a]) + int(
        los[c.waveguide_a, c.new_antenna_a, c.user_b]
    )
    los_old = int(los[c.waveguide_a, c.old_antenna_a, c.user_a]) + int(
        los[c.waveguide_b, c.old_antenna_b, c.user_b]
    )
    closer_by = float(
        dist[c.waveguide_a, c.old_antenna_a, c.user_a]
        - dist[c.waveguide_b, c.new_antenna_b, c.user_a]
        + dist[c.waveguide_b, c.old_antenna_b, c.user_b]
        - dist[c.waveguide_a, c.new_antenna_a, c.user_b]
    )
    cnt_new = int(counts[c.waveguide_b, c.new_antenna_b, c.user_a]) + int(
        counts[c.waveguide_a, c.new_antenna_a, c.user_b]
    )
    cnt_old = int(counts[c.waveguide_a, c.old_antenna_a, c.user_a]) + int(
        counts[c.waveguide_b, c.old_antenna_b, c.user_b]
    )
    no_worse = los_new >= los_old and closer_by >= 0.0 and cnt_new <= cnt_old
    some_better = los_new > los_old or closer_by > 0.0 or cnt_new < cnt_old
    verdict = no_worse and some_better
    if strict_interference_drop:
        verdict = verdict and cnt_new < cnt_old
    return verdict


def _sum_rate_value(
    mag2: np.ndarray,
    assignment: np.ndarray,
    activation: np.ndarray,
    per_waveguide_w: float,
    noise_w: float,
    waveguide_idx: np.ndarray,
    user_idx: np.ndarray,
) -> float:
    eff = mag2[waveguide_idx, activation, :]
    signal = eff[assignment, user_idx]
    interference = eff.sum(axis=0) - signal
    sinr = per_waveguide_w * signal / (per_waveguide_w * interference + noise_w)
    return float(np.log2(1.0 + sinr).sum())


def _count_eval(stats: AlgorithmStats | None) -> None:
    if stats is not None:
        stats.preference_evaluations += 1


def is_swap_blocking(
    matching: Matching,
    user_a: int,
    user_b: int,
    tensor: ChannelTensor,
    power: "PowerBudget",
    policy: PreferencePolicy,
    stats: AlgorithmStats | None = None,
) -> tuple[bool, Matching]:
    """Test whether two users form a swap-blocking pair; return the candidate.

    Builds the swapped matching, rescans both affected waveguides for a better
    antenna under the acting policy (candidate antennas are every index other
    than the activation found at scan entry, visited in ascending order, each
    compared against the current best), then issues the final verdict: strict
    sum-rate gain over the pre-swap matching, or the joint dominance rule.
    The candidate matching is returned either way.
    """
    if user_a == user_b:
        raise ValueError("a swap needs two distinct users")
    num_waveguides = tensor.num_waveguides
    num_antennas = tensor.num_antennas
    check_feasible(matching, num_waveguides, num_antennas)

    assignment = np.asarray(matching.assignment, dtype=np.intp)
    activation = np.asarray(matching.activation, dtype=np.intp)
    wg_a = int(assignment[user_a])
    wg_b = int(assignment[user_b])
    old_ant_a = int(activation[wg_a])
    old_ant_b = int(activation[wg_b])

    swapped = assignment.copy()
    swapped[user_a], swapped[user_b] = swapped[user_b], swapped[user_a]
    cand_activation = activation.copy()

    if policy.variant == "sum_rate":
        mag2 = np.abs(tensor.gains) ** 2
        wg_idx = np.arange(num_waveguides)
        user_idx = np.arange(tensor.num_users)
        base_rate = _sum_rate_value(
            mag2, assignment, activation, power.per_waveguide_w, power.noise_power_w,
            wg_idx, user_idx,
        )
        cand_rate = _sum_rate_value(
            mag2, swapped, cand_activation, power.per_waveguide_w, power.noise_power_w,
            wg_idx, user_idx,
        )
        for waveguide in (wg_a, wg_b):
            entry_antenna = int(cand_activation[waveguide])
            best = entry_antenna
            for antenna in range(num_antennas):
                if antenna == entry_antenna:
                    continue
                cand_activation[waveguide] = antenna
                trial_rate = _sum_rate_value(
                    mag2, swapped, cand_activation,
                    power.per_waveguide_w, power.noise_power_w, wg_idx, user_idx,
                )
                _count_eval(stats)
                if trial_rate > cand_rate:
                    cand_rate = trial_rate
                    best = antenna
                    if stats is not None:
                        stats.activation_switches += 1
                cand_activation[waveguide] = best
        _count_eval(stats)
        blocking = cand_rate > base_rate
    else:
        counts = los_interference_counts(tensor)
        for waveguide, served in ((wg_a, user_b), (wg_b, user_a)):
            entry_antenna = int(cand_activation[waveguide])
            best = entry_antenna
            for antenna in range(num_antennas):
                if antenna == entry_antenna:
                    continue
                _count_eval(stats)
                if antenna_switch_preferred(served, waveguide, best, antenna, tensor, counts):
                    best = antenna
                    if stats is not None:
                        stats.activation_switches += 1
            cand_activation[waveguide] = best
        candidate = SwapCandidate(
            user_a=user_a,
            user_b=user_b,
            waveguide_a=wg_a,
            waveguide_b=wg_b,
            old_antenna_a=old_ant_a,
            old_antenna_b=old_ant_b,
            new_antenna_a=int(cand_activation[wg_a]),
            new_antenna_b=int(cand_activation[wg_b]),
        )
        _count_eval(stats)
        blocking = swap_preferred(candidate, tensor, counts, policy.strict_interference_drop)

    return blocking, Matching(tuple(int(v) for v in swapped), tuple(int(v) for v in cand_activation))


def _reactivate_single(
    matching: Matching,
    tensor: ChannelTensor,
    power: "PowerBudget",
    policy: PreferencePolicy,
    stats: AlgorithmStats,
) -> Matching:
    """Degenerate one-user case: no swap partner exists, so scan the lone
    waveguide's antennas directly under the acting preference."""
    activation = np.asarray(matching.activation, dtype=np.intp)
    assignment = np.asarray(matching.assignment, dtype=np.intp)
    entry_antenna = int(activation[0])
    best = entry_antenna
    if policy.variant == "sum_rate":
        mag2 = np.abs(tensor.gains) ** 2
        wg_idx = np.arange(1)
        user_idx = np.arange(1)
        best_rate = _sum_rate_value(
            mag2, assignment, activation, power.per_waveguide_w, power.noise_power_w,
            wg_idx, user_idx,
        )
        for antenna in range(tensor.num_antennas):
            if antenna == entry_antenna:
                continue
            activation[0] = antenna
            trial = _sum_rate_value(
                mag2, assignment, activation, power.per_waveguide_w, power.noise_power_w,
                wg_idx, user_idx,
            )
            stats.preference_evaluations += 1
            if trial > best_rate:
                best_rate = trial
                best = antenna
                stats.activation_switches += 1
            activation[0] = best
    else:
        counts = los_interference_counts(tensor)
        for antenna in range(tensor.num_antennas):
            if antenna == entry_antenna:
                continue
            stats.preference_evaluations += 1
            if antenna_switch_preferred(0, 0, best, antenna, tensor, counts):
                best = antenna
                stats.activation_switches += 1
    return Matching(matching.assignment, (best,))


def run_swap_matching(
    initial: Matching,
    tensor: ChannelTensor,
    power: "PowerBudget",
    policy: PreferencePolicy,
    cycle_cap: int = 1000,
) -> tuple[Matching, AlgorithmStats]:
    """Iterate swap cycles until a full pass finds no blocking pair.

    Each cycle visits users in ascending index order and, for each, every
    other waveguide in ascending index order; a blocking candidate commits
    immediately. Under the sum-rate preference the objective strictly
    increases with every commit, so the finite configuration space forces
    termination; the cycle cap is a safety net and hitting it is an error.
    """
    check_feasible(initial, tensor.num_waveguides, tensor.num_antennas)
    stats = AlgorithmStats()
    if tensor.num_users == 1:
        stats.cycles = 1
        result = _reactivate_single(initial, tensor, power, policy, stats)
        stats.evaluations_per_cycle.append(stats.preference_evaluations)
        return result, stats

    current = initial
    num_users = tensor.num_users
    num_waveguides = tensor.num_waveguides
    for _ in range(cycle_cap):
        stats.cycles += 1
        evals_before = stats.preference_evaluations
        swaps_this_cycle = 0
        for user in range(num_users):
            # Partner list fixed at scan entry: exactly K - 1 candidate swaps
            # per user, matching the N (K - 1) swap operations per cycle.
            occupant = [0] * num_waveguides
            for u, w in enumerate(current.assignment):
                occupant[w] = u
            for waveguide in range(num_waveguides):
                partner = occupant[waveguide]
                if partner == user:
                    continue
                blocking, candidate = is_swap_blocking(
                    current, user, partner, tensor, power, policy, stats
                )
                if blocking:
                    current = candidate
                    stats.accepted_swaps += 1
                    swaps_this_cycle += 1
        stats.evaluations_per_cycle.append(stats.preference_evaluations - evals_before)
        if swaps_this_cycle == 0:
            return current, stats
    raise CycleCapError(
        f"no stable matching within {cycle_cap} cycles "
        f"(policy={policy.variant}, accepted_swaps={stats.accepted_swaps})"
    )


def certify_stable(
    matching: Matching,
    tensor: ChannelTensor,
    power: "PowerBudget",
    policy: PreferencePolicy,
) -> bool:
    """Exhaustively scan every ordered user pair for a blocking swap.

    Independent of the search loop's visit order and early-exit structure;
    returns True iff no pair (with its waveguide rescans) blocks.
    """
    check_feasible(matching, tensor.num_waveguides, tensor.num_antennas)
    num_users = tensor.num_users
    for user_a in range(num_users):
        for user_b in range(num_users):
            if user_a == user_b:
                continue
            blocking, _ = is_swap_blocking(matching, user_a, user_b, tensor, power, policy)
            if blocking:
                return False
    return True


def exhaustive_search(
    tensor: ChannelTensor,
    power: "PowerBudget",
    budget: int = 1_000_000,
) -> tuple[Matching, float]:
    """Brute-force optimum over every assignment permutation and activation.

    Ground truth for small instances; raises when N! M^K exceeds ``budget``.
    """
    num_waveguides = tensor.num_waveguides
    num_antennas = tensor.num_antennas
    num_users = tensor.num_users
    total = math.factorial(num_users) * num_antennas**num_waveguides
    if total > budget:
        raise ValueError(
            f"{total} configurations exceed the oracle budget {budget}; shrink the instance"
        )
    mag2 = np.abs(tensor.gains) ** 2
    wg_idx = np.arange(num_waveguides)
    user_idx = np.arange(num_users)
    best_value = -math.inf
    best: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    for perm in itertools.permutations(range(num_waveguides)):
        assignment = np.asarray(perm, dtype=np.intp)
        for act in itertools.product(range(num_antennas), repeat=num_waveguides):
            value = _sum_rate_value(
                mag2, assignment, np.asarray(act, dtype=np.intp),
                power.per_waveguide_w, power.noise_power_w, wg_idx, user_idx,
            )
            if value > best_value:
                best_value = value
                best = (perm, act)
    assert best is not None
    return Matching(assignment=best[0], activation=best[1]), best_value
