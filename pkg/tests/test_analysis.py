import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vocalcodes.analysis import (
    EntropyTrace,
    VowelSystemSignature,
    aggregate_runs,
    classify_vowel_system,
    detect_plateau,
    hausdorff,
    medoid_index,
    preferred_vector_entropy,
    read_reference,
    shared_code_distance,
    total_variation,
)
from vocalcodes.neural_map import NeuralMap
from vocalcodes.vocal_tract import MappingSpec, to_perceptual


def trace(values, every=50):
    return EntropyTrace([i * every for i in range(len(values))], list(values))


def direct_entropy(points, bins=20):
    # Dictionary count of cell memberships.
    counts = {}
    for x, y in points:
        key = (min(int(x * bins), bins - 1), min(int(y * bins), bins - 1))
        counts[key] = counts.get(key, 0) + 1
    n = len(points)
    return -sum(c / n * math.log2(c / n) for c in counts.values())


class TestEntropy:
    def test_single_bin(self):
        assert preferred_vector_entropy([np.full((50, 2), 0.33)]) == 0.0

    def test_uniform_over_all_bins(self):
        centres = (np.stack(np.meshgrid(np.arange(20), np.arange(20)), -1).reshape(-1, 2) + 0.5) / 20
        assert preferred_vector_entropy([centres]) == pytest.approx(math.log2(400))

    def test_matches_direct_count(self):
        pts = np.random.default_rng(0).random((1000, 2))
        assert preferred_vector_entropy([pts[:500], pts[500:]]) == pytest.approx(direct_entropy(pts))

    def test_clustered_below_uniform(self):
        rng = np.random.default_rng(1)
        clustered = np.clip(0.5 + 0.02 * rng.standard_normal((500, 2)), 0, 1)
        assert preferred_vector_entropy([clustered]) < preferred_vector_entropy([rng.random((500, 2))])

    def test_accepts_maps_and_edges(self):
        m = NeuralMap([[1.0, 1.0], [0.0, 0.0]])
        assert preferred_vector_entropy([m]) == pytest.approx(1.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            preferred_vector_entropy([])

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 1000))
    def test_permutation_invariant(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.random((300, 2))
        a = preferred_vector_entropy([pts[:100], pts[100:]])
        b = preferred_vector_entropy([rng.permutation(pts)])
        assert a == pytest.approx(b, abs=1e-12)


class TestPlateau:
    def test_constant(self):
        assert detect_plateau(trace([5.0] * 30)) == 500

    def test_strictly_decreasing(self):
        assert detect_plateau(trace([8 - 0.1 * i for i in range(40)])) is None

    def test_drop_then_flat(self):
        values = [8 - 0.2 * i for i in range(15)] + [5.0 + 0.001 * (i % 2) for i in range(30)]
        step = detect_plateau(trace(values))
        assert step == 50 * (15 + 10)

    def test_short_trace(self):
        assert detect_plateau(trace([1.0] * 5)) is None

    def test_empty(self):
        with pytest.raises(ValueError):
            detect_plateau(EntropyTrace())

    def test_steps_must_increase(self):
        t = trace([1.0])
        with pytest.raises(ValueError):
            t.append(0, 1.0)

    @settings(max_examples=200, deadline=None)
    @given(
        values=st.lists(st.floats(0, 9), min_size=1, max_size=60),
        eps=st.lists(st.floats(0, 0.5), min_size=2, max_size=2),
    )
    def test_monotone_in_eps(self, values, eps):
        small, large = sorted(eps)
        a = detect_plateau(trace(values), eps=small)
        b = detect_plateau(trace(values), eps=large)
        if a is not None:
            assert b is not None and b <= a


class TestSharedCode:
    def test_hausdorff_of_translates(self):
        a = np.array([[0.2, 0.2], [0.7, 0.4]])
        assert hausdorff(a, a + [0.03, 0]) == pytest.approx(0.03)

    def test_symmetric(self):
        rng = np.random.default_rng(2)
        a, b = rng.random((3, 2)), rng.random((5, 2))
        assert hausdorff(a, b) == hausdorff(b, a)

    def test_identical_agents(self):
        from vocalcodes.agent import Agent, WeightMatrix

        rng = np.random.default_rng(3)
        pts = np.clip(np.repeat([[0.3, 0.3], [0.7, 0.6]], 30, 0) + 0.01 * rng.standard_normal((60, 2)), 0, 1)
        agents = [Agent(i, NeuralMap(pts), NeuralMap(pts), WeightMatrix.random(60, 60, rng)) for i in range(3)]
        assert shared_code_distance(agents) == 0.0

    def test_needs_two_agents(self):
        with pytest.raises(ValueError):
            shared_code_distance([object()])

    def test_medoid(self):
        sets = [np.array([[0.5, 0.5]]), np.array([[0.52, 0.5]]), np.array([[0.9, 0.9]])]
        assert medoid_index(sets) == 1


class TestClassification:
    def test_vocalic_triangle_corners(self):
        spec = MappingSpec.deboer()
        # /i/ (high front, spread), /a/ (low central), /u/ (high back, rounded)
        corners = to_perceptual(np.array([[0, 1, 0], [0, 0, 0.5], [1, 1, 1]]), spec)
        sig = classify_vowel_system(corners)
        assert sig.size == 3 and len(sig.cells) == 3 and not sig.collision

    def test_single(self):
        sig = classify_vowel_system([[0.1, 0.9]])
        assert sig.size == 1 and sig.cells == ((0, 0),)

    def test_collision_flagged(self):
        sig = classify_vowel_system([[0.1, 0.9], [0.12, 0.88]])
        assert sig.size == 2 and len(sig.cells) == 1 and sig.collision

    def test_key_format(self):
        sig = classify_vowel_system([[0.9, 0.5], [0.1, 0.9]])
        assert sig.key == "0:0|3:1"

    def test_empty(self):
        with pytest.raises(ValueError):
            classify_vowel_system(np.zeros((0, 2)))

    @settings(max_examples=200, deadline=None)
    @given(
        cells=st.lists(st.tuples(st.integers(0, 3), st.integers(0, 2)), min_size=1, max_size=6),
        jitter=st.lists(st.tuples(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5)), min_size=6, max_size=6),
    )
    def test_stable_under_small_perturbation(self, cells, jitter):
        centres = np.array([[(h + 0.5) / 4, 1 - (b + 0.5) / 3] for h, b in cells])
        # Stay within half a cell of the centre, i.e. away from boundaries.
        shift = np.array(jitter[: len(cells)]) * [0.5 / 4, 0.5 / 3] * 0.99
        assert classify_vowel_system(centres + shift) == classify_vowel_system(centres)

    def test_signature_roundtrip(self):
        sig = VowelSystemSignature(3, ((0, 0), (1, 2)), True)
        assert VowelSystemSignature.from_dict(sig.to_dict()) == sig


class _Rec:
    def __init__(self, count, variant="deboer", key=None):
        self.cluster_count = count
        self.variant = variant
        self.signature = None if key is None else VowelSystemSignature(count, tuple(
            tuple(int(v) for v in c.split(":")) for c in key.split("|")))


class TestAggregate:
    def test_single_record(self):
        report = aggregate_runs([_Rec(5, key="0:0|1:1|2:2|3:0|3:2")])
        assert report.size_histogram == {5: 1}
        assert report.structure_frequencies == {"0:0|1:1|2:2|3:0|3:2": 1.0}

    def test_frequencies_sum_to_one(self):
        recs = [_Rec(3, key="0:0|1:1|3:1"), _Rec(3, key="0:0|1:1|3:1"), _Rec(2, key="0:0|3:1")]
        report = aggregate_runs(recs)
        assert sum(report.structure_frequencies.values()) == pytest.approx(1, abs=1e-9)
        assert sum(report.size_frequencies.values()) == pytest.approx(1, abs=1e-9)
        assert report.mode_size == 3

    def test_mixed_variants_rejected(self):
        with pytest.raises(ValueError):
            aggregate_runs([_Rec(3), _Rec(4, variant="abstract")])

    def test_reference_equal_to_observed(self, tmp_path):
        path = tmp_path / "ref.csv"
        path.write_text("signature,frequency\n0:0|3:1,0.25\n0:0|1:1|3:1,0.75\n")
        recs = [_Rec(2, key="0:0|3:1")] + [_Rec(3, key="0:0|1:1|3:1")] * 3
        report = aggregate_runs(recs, reference=path)
        assert report.total_variation == pytest.approx(0.0)

    def test_total_variation(self):
        assert total_variation({"a": 1.0}, {"b": 1.0}) == 1.0
        assert total_variation({"a": 0.5, "b": 0.5}, {"a": 1.0}) == 0.5

    def test_reference_validation(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("signature,frequency\n0:0,x\n")
        with pytest.raises(ValueError, match=":2:"):
            read_reference(bad)
        wrong = tmp_path / "wrong.csv"
        wrong.write_text("sig,freq\n")
        with pytest.raises(ValueError):
            read_reference(wrong)
