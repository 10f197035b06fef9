"""Transition-affinity strategies and exact sequence selection.

Given one candidate pool per story segment, pick one item per segment so
the summed pairwise transition cost along the chain is globally minimal.
The chain structure makes exact dynamic programming cheap; a brute-force
twin with the identical tie rule serves as the oracle.
"""

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .visual_features import MediaFeatureStore

# Cost for a candidate missing a required feature; effectively excludes it.
INFINITE_COST = math.inf


class TransitionKind(str, Enum):
    CNN_DENSE = "cnn_dense"
    VISUAL_CONCEPTS = "visual_concepts"
    COLOR_HISTOGRAM = "color_histogram"
    COLOR_MOMENTS = "color_moments"
    VISUAL_ENTROPY = "visual_entropy"
    LUMINANCE = "luminance"


@dataclass(frozen=True)
class TransitionCostFn:
    kind: TransitionKind


@dataclass(frozen=True)
class SelectionResult:
    """Chosen pool index per segment plus the realized chain cost."""

    chosen_indices: tuple[int, ...]
    total_cost: float
    method_name: str


def transition_cost(
    fn: TransitionCostFn, media_a: str, media_b: str, features: MediaFeatureStore
) -> float:
    """Pairwise cost between two media items; infinite when a feature is missing."""
    kind = fn.kind
    if kind is TransitionKind.CNN_DENSE:
        vec_a = features.embedding(media_a)
        vec_b = features.embedding(media_b)
        if vec_a is None or vec_b is None:
            return INFINITE_COST
        return float(np.linalg.norm(vec_a - vec_b))
    if kind is TransitionKind.VISUAL_CONCEPTS:
        top_a = features.top_concept(media_a)
        top_b = features.top_concept(media_b)
        if top_a is None or top_b is None:
            return INFINITE_COST
        return 0.0 if top_a == top_b else 1.0
    if kind is TransitionKind.COLOR_HISTOGRAM:
        hist_a = features.histogram(media_a)
        hist_b = features.histogram(media_b)
        if hist_a is None or hist_b is None:
            return INFINITE_COST
        return float(np.abs(hist_a.values - hist_b.values).sum())
    if kind is TransitionKind.COLOR_MOMENTS:
        mom_a = features.moments(media_a)
        mom_b = features.moments(media_b)
        if mom_a is None or mom_b is None:
            return INFINITE_COST
        return float(np.abs(mom_a.as_vector() - mom_b.as_vector()).sum())
    if kind is TransitionKind.VISUAL_ENTROPY:
        ent_a = features.entropy(media_a)
        ent_b = features.entropy(media_b)
        if ent_a is None or ent_b is None:
            return INFINITE_COST
        return abs(ent_a - ent_b)
    if kind is TransitionKind.LUMINANCE:
        lum_a = features.luminance(media_a)
        lum_b = features.luminance(media_b)
        if lum_a is None or lum_b is None:
            return INFINITE_COST
        return abs(lum_a - lum_b)
    raise ValueError(f"unknown transition kind: {kind!r}")


PairCost = Callable[[int, object, object], float]
# (transition index i, item of pool i, item of pool i+1) -> cost


def _check_pools(pools: Sequence[Sequence]) -> None:
    if not pools:
        raise ValueError("at least one pool is required")
    for position, pool in enumerate(pools):
        if not pool:
            raise ValueError(f"segment {position + 1} has an empty candidate pool")


def select_sequence_dp(
    pools: Sequence[Sequence], cost: PairCost, method_name: str = "dp"
) -> SelectionResult:
    """Globally minimal chain selection via backward dynamic programming.

    Ties are broken by the lexicographically smallest index vector: the
    forward pass greedily picks the smallest index that still attains the
    optimal remaining cost.
    """
    _check_pools(pools)
    n = len(pools)
    if n == 1:
        return SelectionResult((0,), 0.0, method_name)

    # suffix[i][j]: minimal cost of transitions i..n-2 starting from pool i item j
    suffix: list[list[float]] = [[0.0] * len(pools[i]) for i in range(n)]
    for i in range(n - 2, -1, -1):
        for j, item in enumerate(pools[i]):
            best = INFINITE_COST
            for k, nxt in enumerate(pools[i + 1]):
                value = cost(i, item, nxt) + suffix[i + 1][k]
                if value < best:
                    best = value
            suffix[i][j] = best

    chosen = [0] * n
    best_total = min(suffix[0])
    chosen[0] = suffix[0].index(best_total)
    remaining = best_total
    for i in range(n - 1):
        item = pools[i][chosen[i]]
        pick = None
        for k, nxt in enumerate(pools[i + 1]):
            value = cost(i, item, nxt) + suffix[i + 1][k]
            if value == remaining or (math.isinf(value) and math.isinf(remaining)):
                pick = k
                remaining = suffix[i + 1][k]
                break
        if pick is None:
            # Guard against float non-associativity; fall back to argmin.
            values = [cost(i, item, nxt) + suffix[i + 1][k] for k, nxt in enumerate(pools[i + 1])]
            pick = int(np.argmin(values))
            remaining = suffix[i + 1][pick]
        chosen[i + 1] = pick

    total = _chain_cost(pools, chosen, cost)
    return SelectionResult(tuple(chosen), total, method_name)


def _chain_cost(pools: Sequence[Sequence], indices: Sequence[int], cost: PairCost) -> float:
    total = 0.0
    for i in range(len(pools) - 1):
        total += cost(i, pools[i][indices[i]], pools[i + 1][indices[i + 1]])
    return total


MAX_BRUTEFORCE_PATHS = 10**6


def select_sequence_bruteforce(
    pools: Sequence[Sequence], cost: PairCost, method_name: str = "bruteforce"
) -> SelectionResult:
    """Exhaustive minimum with the same lexicographic tie rule as the DP."""
    _check_pools(pools)
    paths = 1
    for pool in pools:
        paths *= len(pool)
        if paths > MAX_BRUTEFORCE_PATHS:
            raise ValueError(f"instance exceeds {MAX_BRUTEFORCE_PATHS} paths")
    best_indices: tuple[int, ...] | None = None
    best_cost = INFINITE_COST
    for indices in itertools.product(*(range(len(pool)) for pool in pools)):
        total = _chain_cost(pools, indices, cost)
        if best_indices is None or total < best_cost:
            best_indices = indices
            best_cost = total
    assert best_indices is not None
    return SelectionResult(best_indices, best_cost, method_name)


def media_pair_cost(fn: TransitionCostFn, features: MediaFeatureStore) -> PairCost:
    """Adapt transition_cost to the pool-selection interface for media_id pools."""

    def cost(_: int, media_a: object, media_b: object) -> float:
        return transition_cost(fn, str(media_a), str(media_b), features)

    return cost
