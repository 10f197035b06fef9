import math
import random

import numpy as np
import pytest

from storyweave.transition_engine import (
    TransitionCostFn,
    TransitionKind,
    media_pair_cost,
    select_sequence_bruteforce,
    select_sequence_dp,
    transition_cost,
)
from storyweave.visual_features import MediaFeatureStore

from conftest import solid_image, write_jsonl, write_png


def matrix_cost(matrices):
    """Cost callable backed by per-transition matrices indexed by item."""

    def cost(i, a, b):
        return matrices[i][a][b]

    return cost


def random_instance(rng: random.Random):
    n_segments = rng.randint(1, 4)
    pools = [list(range(rng.randint(1, 6))) for _ in range(n_segments)]
    matrices = [
        [[rng.choice([0.0, 1.0, 2.0, rng.random() * 5]) for _ in pools[i + 1]] for _ in pools[i]]
        for i in range(n_segments - 1)
    ]
    return pools, matrix_cost(matrices)


class TestSelectSequenceDp:
    def test_single_segment(self):
        result = select_sequence_dp([["a", "b"]], lambda i, a, b: 0.0)
        assert result.chosen_indices == (0,)
        assert result.total_cost == 0.0

    def test_two_by_two_worked_example(self):
        # c(a1,b1)=1, c(a1,b2)=5, c(a2,b1)=3, c(a2,b2)=0 -> (a2,b2) total 0
        table = {("a1", "b1"): 1.0, ("a1", "b2"): 5.0, ("a2", "b1"): 3.0, ("a2", "b2"): 0.0}
        cost = lambda i, a, b: table[(a, b)]  # noqa: E731
        result = select_sequence_dp([["a1", "a2"], ["b1", "b2"]], cost)
        assert result.chosen_indices == (1, 1)
        assert result.total_cost == 0.0
        brute = select_sequence_bruteforce([["a1", "a2"], ["b1", "b2"]], cost)
        assert brute.chosen_indices == (1, 1)

    def test_all_costs_equal_picks_zero_vector(self):
        pools = [list("abc"), list("abc"), list("abc")]
        result = select_sequence_dp(pools, lambda i, a, b: 1.0)
        assert result.chosen_indices == (0, 0, 0)

    def test_empty_pool_error_names_segment(self):
        with pytest.raises(ValueError, match="segment 2"):
            select_sequence_dp([["a"], []], lambda i, a, b: 0.0)

    def test_total_cost_is_chain_sum(self):
        rng = random.Random(5)
        for _ in range(50):
            pools, cost = random_instance(rng)
            result = select_sequence_dp(pools, cost)
            chain = sum(
                cost(i, pools[i][result.chosen_indices[i]], pools[i + 1][result.chosen_indices[i + 1]])
                for i in range(len(pools) - 1)
            )
            assert result.total_cost == pytest.approx(chain, abs=1e-9)

    def test_matches_bruteforce_on_seeded_instances(self):
        rng = random.Random(2024)
        for _ in range(300):
            pools, cost = random_instance(rng)
            dp = select_sequence_dp(pools, cost)
            brute = select_sequence_bruteforce(pools, cost)
            assert dp.chosen_indices == brute.chosen_indices
            assert dp.total_cost == brute.total_cost

    def test_constant_shift_invariance(self):
        rng = random.Random(99)
        for _ in range(50):
            pools, cost = random_instance(rng)
            shifted = lambda i, a, b: cost(i, a, b) + 7.25  # noqa: E731
            assert (
                select_sequence_dp(pools, cost).chosen_indices
                == select_sequence_dp(pools, shifted).chosen_indices
            )

    def test_adding_candidate_never_increases_cost(self):
        rng = random.Random(17)
        for _ in range(30):
            n = rng.randint(2, 4)
            sizes = [rng.randint(1, 4) for _ in range(n)]
            values = {}

            def cost(i, a, b):
                key = (i, a, b)
                if key not in values:
                    values[key] = rng.random() * 3
                return values[key]

            pools = [[(i, j) for j in range(size)] for i, size in enumerate(sizes)]
            base = select_sequence_dp(pools, cost)
            grow = rng.randrange(n)
            pools[grow] = pools[grow] + [(grow, sizes[grow])]
            extended = select_sequence_dp(pools, cost)
            assert extended.total_cost <= base.total_cost + 1e-12

    def test_cost_call_count_linear_in_pairwise_bound(self):
        rng = random.Random(7)
        for _ in range(20):
            pools, cost = random_instance(rng)
            calls = 0

            def counting(i, a, b):
                nonlocal calls
                calls += 1
                return cost(i, a, b)

            select_sequence_dp(pools, counting)
            bound = sum(len(pools[i]) * len(pools[i + 1]) for i in range(len(pools) - 1))
            slack = sum(len(p) for p in pools) + len(pools)
            assert calls <= bound + slack + 1

    def test_bruteforce_size_guard(self):
        pools = [list(range(101)) for _ in range(3)]
        with pytest.raises(ValueError, match="paths"):
            select_sequence_bruteforce(pools, lambda i, a, b: 0.0)


class TestTransitionCost:
    def build_store(self, tmp_path):
        paths = {
            "red": write_png(tmp_path / "red.png", solid_image(255, 0, 0).pixels),
            "red2": write_png(tmp_path / "red2.png", solid_image(255, 0, 0).pixels),
            "white": write_png(tmp_path / "white.png", solid_image(255, 255, 255).pixels),
        }
        concepts = write_jsonl(
            tmp_path / "concepts.jsonl",
            [
                {"media_id": "red", "concepts": [{"label": "dog", "confidence": 0.9}]},
                {"media_id": "red2", "concepts": [{"label": "dog", "confidence": 0.7}]},
                {"media_id": "white", "concepts": [{"label": "cat", "confidence": 0.8}]},
            ],
        )
        embeddings = write_jsonl(
            tmp_path / "embeddings.jsonl",
            [
                {"media_id": "red", "vector": [1.0, 0.0]},
                {"media_id": "red2", "vector": [1.0, 0.0]},
                {"media_id": "white", "vector": [0.0, 1.0]},
            ],
        )
        from storyweave.visual_features import load_concepts, load_embeddings

        return MediaFeatureStore(
            paths, concepts=load_concepts(concepts), embeddings=load_embeddings(embeddings)
        )

    @pytest.mark.parametrize("kind", list(TransitionKind))
    def test_identical_inputs_cost_zero(self, tmp_path, kind):
        store = self.build_store(tmp_path)
        fn = TransitionCostFn(kind)
        assert transition_cost(fn, "red", "red2", store) == pytest.approx(0.0)

    def test_concept_indicator(self, tmp_path):
        store = self.build_store(tmp_path)
        fn = TransitionCostFn(TransitionKind.VISUAL_CONCEPTS)
        assert transition_cost(fn, "red", "white", store) == 1.0

    def test_entropy_absolute_difference(self, tmp_path):
        store = self.build_store(tmp_path)

        class Fake:
            def entropy(self, media_id):
                return {"a": 7.2, "b": 6.7}[media_id]

        fn = TransitionCostFn(TransitionKind.VISUAL_ENTROPY)
        assert transition_cost(fn, "a", "b", Fake()) == pytest.approx(0.5)

    def test_cnn_dense_euclidean(self, tmp_path):
        store = self.build_store(tmp_path)
        fn = TransitionCostFn(TransitionKind.CNN_DENSE)
        assert transition_cost(fn, "red", "white", store) == pytest.approx(math.sqrt(2))

    def test_missing_feature_infinite(self, tmp_path):
        store = self.build_store(tmp_path)
        fn = TransitionCostFn(TransitionKind.CNN_DENSE)
        store.embedding_map.pop("white")
        assert transition_cost(fn, "red", "white", store) == math.inf

    def test_luminance_difference(self, tmp_path):
        store = self.build_store(tmp_path)
        fn = TransitionCostFn(TransitionKind.LUMINANCE)
        expected = abs(76.245 - 255.0)
        assert transition_cost(fn, "red", "white", store) == pytest.approx(expected)

    def test_media_pair_cost_drives_selection(self, tmp_path):
        store = self.build_store(tmp_path)
        cost = media_pair_cost(TransitionCostFn(TransitionKind.COLOR_HISTOGRAM), store)
        result = select_sequence_dp([["red"], ["white", "red2"]], cost)
        assert result.chosen_indices == (0, 1)
        assert result.total_cost == pytest.approx(0.0)
