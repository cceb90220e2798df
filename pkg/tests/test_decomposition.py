import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from uqeval.decomposition import (
    LN2,
    PredictionTensor,
    ValidationError,
    aggregate_classes,
    aleatoric_uncertainty,
    bayesian_model_average,
    binary_entropy_scalar,
    epistemic_uncertainty,
    predictive_uncertainty,
)


def tensor(values):
    return PredictionTensor(np.asarray(values, dtype=np.float64))


prob_tensors = st.tuples(
    st.integers(1, 6), st.integers(1, 5), st.integers(1, 4)
).flatmap(lambda shape: arrays(
    np.float64, shape, elements=st.floats(0.0, 1.0, allow_nan=False)
)).map(tensor)


class TestBayesianModelAverage:
    def test_two_member_mean(self):
        out = bayesian_model_average(tensor([[[0.1]], [[0.9]]]))
        assert out.values[0, 0] == pytest.approx(0.5)

    def test_single_member_identity(self):
        v = np.random.default_rng(0).uniform(size=(1, 4, 3))
        assert np.array_equal(bayesian_model_average(PredictionTensor(v)).values, v[0])

    def test_constant_members(self):
        out = bayesian_model_average(tensor(np.full((5, 2, 2), 0.3)))
        assert np.allclose(out.values, 0.3)

    def test_linearity_over_concatenation(self):
        rng = np.random.default_rng(1)
        a = rng.uniform(size=(3, 4, 2))
        b = rng.uniform(size=(3, 4, 2))
        merged = bayesian_model_average(PredictionTensor(np.concatenate([a, b]))).values
        half = 0.5 * (bayesian_model_average(PredictionTensor(a)).values
                      + bayesian_model_average(PredictionTensor(b)).values)
        assert np.allclose(merged, half, atol=1e-15)


class TestBinaryEntropy:
    def test_maximum_entropy_point(self):
        assert binary_entropy_scalar(0.5) == pytest.approx(LN2, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_degenerate(self, p):
        assert binary_entropy_scalar(p) == pytest.approx(0.0, abs=1e-10)

    def test_direct_evaluation(self):
        assert binary_entropy_scalar(0.1) == pytest.approx(0.325083, abs=1e-6)

    @pytest.mark.parametrize("p", [-0.1, 1.1])
    def test_rejects_out_of_range(self, p):
        with pytest.raises(ValidationError):
            binary_entropy_scalar(p)


class TestDecompositionExamples:
    def test_pu_of_disagreeing_members(self):
        got = predictive_uncertainty(tensor([[[0.1]], [[0.9]]])).values
        assert got[0, 0] == pytest.approx(0.693147, abs=1e-6)

    def test_pu_zero_when_confident(self):
        assert predictive_uncertainty(tensor(np.ones((3, 2, 2)))).values == pytest.approx(0.0, abs=1e-10)

    def test_pu_single_member(self):
        assert predictive_uncertainty(tensor([[[0.1]]])).values[0, 0] == pytest.approx(0.325083, abs=1e-6)

    def test_au_of_disagreeing_members(self):
        assert aleatoric_uncertainty(tensor([[[0.1]], [[0.9]]])).values[0, 0] == pytest.approx(0.325083, abs=1e-6)

    def test_au_of_identical_members(self):
        got = aleatoric_uncertainty(tensor(np.full((4, 1, 1), 0.3))).values
        assert got == pytest.approx(binary_entropy_scalar(0.3), abs=1e-12)

    def test_au_zero_entropy_members(self):
        got = aleatoric_uncertainty(tensor([[[0.0, 1.0]], [[1.0, 0.0]]])).values
        assert got == pytest.approx(0.0, abs=1e-10)

    def test_eu_of_disagreeing_members(self):
        assert epistemic_uncertainty(tensor([[[0.1]], [[0.9]]])).values[0, 0] == pytest.approx(0.368064, abs=1e-6)

    def test_eu_single_member_exactly_zero(self):
        v = np.random.default_rng(2).uniform(size=(1, 10, 3))
        assert np.all(epistemic_uncertainty(PredictionTensor(v)).values == 0.0)

    def test_eu_identical_members(self):
        got = epistemic_uncertainty(tensor(np.full((5, 3, 2), 0.42))).values
        assert np.all(np.abs(got) < 1e-9)


class TestAggregateClasses:
    def test_mean(self):
        s = predictive_uncertainty(tensor([[[0.5, 0.5]]]))
        out = aggregate_classes(s, "mean")
        assert out.values == pytest.approx([LN2])

    def test_max_and_sum(self):
        from uqeval.decomposition import UncertaintyScores
        s = UncertaintyScores(np.array([[0.1, 0.3]]), "PU")
        assert aggregate_classes(s, "max").values == pytest.approx([0.3])
        assert aggregate_classes(s, "sum").values == pytest.approx([0.4])
        assert aggregate_classes(s, "mean").values == pytest.approx([0.2])

    def test_single_class_identity(self):
        from uqeval.decomposition import UncertaintyScores
        s = UncertaintyScores(np.array([[0.7], [0.2]]), "AU")
        for strategy in ("mean", "sum", "max"):
            assert aggregate_classes(s, strategy).values == pytest.approx([0.7, 0.2])

    def test_rejects_unknown_strategy(self):
        s = predictive_uncertainty(tensor([[[0.5]]]))
        with pytest.raises(ValidationError):
            aggregate_classes(s, "median")


class TestInvariants:
    @given(prob_tensors)
    @settings(max_examples=200, deadline=None)
    def test_jensen_and_bounds(self, preds):
        pu = predictive_uncertainty(preds).values
        au = aleatoric_uncertainty(preds).values
        eu = epistemic_uncertainty(preds).values
        assert np.all(eu >= -1e-9)
        assert np.all(pu >= au - 1e-9)
        assert np.all((pu >= 0) & (pu <= LN2 + 1e-12))
        assert np.all((au >= 0) & (au <= LN2 + 1e-12))

    @given(prob_tensors, st.randoms(use_true_random=False))
    @settings(max_examples=50, deadline=None)
    def test_member_permutation_invariance(self, preds, rnd):
        perm = list(range(preds.members))
        rnd.shuffle(perm)
        shuffled = PredictionTensor(preds.values[perm])
        for fn in (predictive_uncertainty, aleatoric_uncertainty, epistemic_uncertainty):
            assert np.allclose(fn(preds).values, fn(shuffled).values, atol=1e-12)


class TestValidation:
    def test_rejects_out_of_range_probabilities(self):
        with pytest.raises(ValidationError):
            tensor([[[1.5]]])

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            tensor([[[np.nan]]])

    def test_rejects_wrong_rank(self):
        with pytest.raises(ValidationError):
            PredictionTensor(np.zeros((2, 2)))
