import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uqeval.decomposition import ValidationError
from uqeval.metrics import (
    accuracy_coverage_curve,
    auac,
    auroc,
    calibration_report,
    ece,
    macro_auroc,
    mce,
    spearman,
)


def auroc_oracle(scores, labels):
    """O(N^2) pairwise count: P(pos > neg) + 0.5 P(tie)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if len(pos) == 0 or len(neg) == 0:
        return None
    diff = pos[:, None] - neg[None, :]
    return ((diff > 0).sum() + 0.5 * (diff == 0).sum()) / (len(pos) * len(neg))


def ece_mce_oracle(probs, labels, bins, mode):
    """Independent per-sample loop binning."""
    contrib = {}
    for p, y in zip(probs, labels):
        if mode == "confidence":
            stat = max(p, 1.0 - p)
            hit = 1.0 if (p >= 0.5) == (y == 1) else 0.0
        else:
            stat = p
            hit = 1.0 if y == 1 else 0.0
        b = min(int(stat * bins), bins - 1)
        contrib.setdefault(b, []).append((stat, hit))
    n = len(probs)
    gaps = []
    weights = []
    for items in contrib.values():
        stats_ = [s for s, _ in items]
        hits = [h for _, h in items]
        gaps.append(abs(sum(hits) / len(items) - sum(stats_) / len(items)))
        weights.append(len(items) / n)
    e = sum(w * g for w, g in zip(weights, gaps))
    m = max(gaps)
    return e, m


binary_cases = st.integers(2, 60).flatmap(lambda n: st.tuples(
    st.lists(st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.5, 0.9, 1.0]), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n),
))


class TestAuroc:
    def test_worked_example(self):
        assert auroc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)

    def test_all_ties(self):
        assert auroc([0.3] * 6, [0, 1, 0, 1, 0, 1]) == 0.5

    def test_perfect_separation(self):
        assert auroc([1, 2, 3, 10, 11], [0, 0, 0, 1, 1]) == 1.0

    def test_single_class_undefined(self):
        assert auroc([0.1, 0.2], [1, 1]) is None

    @given(binary_cases)
    @settings(max_examples=300, deadline=None)
    def test_matches_pairwise_oracle_exactly(self, case):
        scores, labels = case
        expected = auroc_oracle(scores, labels)
        got = auroc(np.array(scores), np.array(labels))
        assert got == expected  # exact equality, including heavy ties

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(40)
        s = rng.normal(size=80)
        y = rng.integers(0, 2, 80)
        assert auroc(s, y) == auroc(np.exp(s), y) == auroc(3 * s + 7, y)


class TestMacroAuroc:
    def test_mean_of_two_classes(self):
        s = np.array([[0.1, 0.9], [0.4, 0.1], [0.35, 0.5], [0.8, 0.2]])
        y = np.array([[0, 1], [0, 0], [1, 1], [1, 0]])
        macro, per_class, skipped = macro_auroc(s, y)
        assert macro == pytest.approx(np.mean(per_class))
        assert skipped == []

    def test_undefined_class_skipped(self):
        s = np.array([[0.1, 0.5], [0.9, 0.6]])
        y = np.array([[0, 1], [1, 1]])
        macro, per_class, skipped = macro_auroc(s, y)
        assert macro == 1.0 and per_class[1] is None and skipped == [1]

    def test_duplicated_class_replicates(self):
        s = np.tile(np.array([[0.2], [0.8], [0.5]]), (1, 3))
        y = np.tile(np.array([[0], [1], [1]]), (1, 3))
        macro, per_class, _ = macro_auroc(s, y)
        assert per_class[0] == per_class[1] == per_class[2] == macro

    def test_all_undefined_raises(self):
        with pytest.raises(ValidationError):
            macro_auroc(np.array([[0.1], [0.2]]), np.array([[1], [1]]))


class TestCalibration:
    def test_perfect_confident(self):
        p = np.ones(10)
        y = np.ones(10, dtype=int)
        assert ece(p, y) == 0.0
        assert mce(p, y) == 0.0

    def test_single_bin_calibrated(self):
        p = np.full(10, 0.9)
        y = np.array([1] * 9 + [0])
        assert ece(p, y, mode="confidence") == pytest.approx(0.0, abs=1e-12)

    def test_single_bin_miscalibrated(self):
        p = np.full(10, 0.9)
        y = np.array([1] * 5 + [0] * 5)
        assert ece(p, y, mode="confidence") == pytest.approx(0.4, abs=1e-12)
        assert mce(p, y, mode="confidence") == pytest.approx(0.4, abs=1e-12)

    @pytest.mark.parametrize("mode", ["confidence", "positive"])
    def test_matches_binning_oracle(self, mode):
        rng = np.random.default_rng(41)
        for _ in range(200):
            n = rng.integers(1, 200)
            bins = int(rng.integers(1, 25))
            p = rng.uniform(size=n)
            y = rng.integers(0, 2, n)
            oe, om = ece_mce_oracle(p, y, bins, mode)
            assert ece(p, y, bins, mode) == pytest.approx(oe, abs=1e-12)
            assert mce(p, y, bins, mode) == pytest.approx(om, abs=1e-12)

    def test_mce_dominates_ece(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            p = rng.uniform(size=50)
            y = rng.integers(0, 2, 50)
            assert mce(p, y) >= ece(p, y) - 1e-15

    def test_report_macro_consistency(self):
        rng = np.random.default_rng(43)
        p = rng.uniform(size=(100, 4))
        y = rng.integers(0, 2, (100, 4))
        rep = calibration_report(p, y)
        assert rep.macro_ece == pytest.approx(np.mean(rep.per_class_ece))
        assert rep.macro_mce == pytest.approx(np.mean(rep.per_class_mce))
        assert all(sum(b.count for b in t) == 100 for t in rep.per_class_bins)


class TestAuac:
    def test_perfect_model(self):
        assert auac(np.arange(10), np.ones(10)) == pytest.approx(1.0)

    def test_hand_derived_four_sample_case(self):
        got = auac([0.1, 0.2, 0.9, 0.8], [1, 1, 0, 0], step_fraction=0.25)
        assert got == pytest.approx(0.80556, abs=1e-5)

    def test_constant_uncertainty_keeps_stable_prefixes(self):
        # With all ties, the stable keep-rule retains original-order
        # prefixes, so each curve point is a prefix mean.
        correct = np.array([1.0, 0.0, 1.0, 1.0])
        cov, acc = accuracy_coverage_curve(np.zeros(4), correct, 0.25)
        assert acc == pytest.approx([0.75, 2 / 3, 0.5, 1.0])

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(45)
        u = rng.uniform(size=60)
        a = rng.integers(0, 2, 60).astype(float)
        assert auac(u, a) == pytest.approx(auac(np.expm1(u) * 5, a), abs=1e-12)

    def test_coverage_grid(self):
        cov, acc = accuracy_coverage_curve([0.1, 0.2, 0.9, 0.8], [1, 1, 0, 0], 0.25)
        assert cov == pytest.approx([1.0, 0.75, 0.5, 0.25])
        assert acc == pytest.approx([0.5, 2 / 3, 1.0, 1.0])

    def test_rejects_bad_step(self):
        with pytest.raises(ValidationError):
            auac([0.1, 0.2], [1, 0], step_fraction=1.5)
        with pytest.raises(ValidationError):
            auac([], [], step_fraction=0.5)


class TestSpearman:
    def test_identical_ranking(self):
        x = np.random.default_rng(46).normal(size=30)
        assert spearman(x, x) == pytest.approx(1.0)

    def test_reversed_ranking(self):
        x = np.random.default_rng(47).normal(size=30)
        assert spearman(x, -x) == pytest.approx(-1.0)

    def test_hand_example(self):
        assert spearman([1, 2, 3], [3, 1, 2]) == pytest.approx(-0.5)

    def test_constant_undefined(self):
        assert spearman([1.0, 1.0, 1.0], [1, 2, 3]) is None

    def test_rank_idempotence_and_symmetry(self):
        rng = np.random.default_rng(48)
        x = rng.integers(0, 5, 50).astype(float)  # heavy ties
        y = rng.normal(size=50)
        from uqeval.metrics import _midranks
        assert spearman(x, y) == pytest.approx(spearman(_midranks(x), _midranks(y)), abs=1e-12)
        assert spearman(x, y) == pytest.approx(spearman(y, x), abs=1e-12)

    def test_matches_scipy(self):
        from scipy.stats import spearmanr
        rng = np.random.default_rng(49)
        x = rng.integers(0, 8, 100).astype(float)
        y = rng.integers(0, 8, 100).astype(float) + 0.1 * rng.normal(size=100)
        assert spearman(x, y) == pytest.approx(spearmanr(x, y).statistic, abs=1e-12)
