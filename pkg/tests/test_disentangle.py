import numpy as np
import pytest

from uqeval.decomposition import PredictionTensor, ValidationError
from uqeval.disentangle import (
    DisentanglementRecord,
    eu_au_gap,
    overview_aggregate,
    uncertainty_rank_correlation,
)
from uqeval.tasks import TaskResult


def result(task, value):
    return TaskResult(task=task, metric="m", value=value, score_kind="EU")


class TestEuAuGap:
    def test_single_member_not_applicable(self):
        preds = PredictionTensor(np.random.default_rng(60).uniform(size=(1, 20, 2)))
        rec = eu_au_gap(preds, np.array([0] * 10 + [1] * 10), method="det")
        assert not rec.applicable and rec.gap is None and "M=1" in rec.note

    def test_gap_is_auroc_difference(self):
        rng = np.random.default_rng(61)
        preds = PredictionTensor(rng.uniform(size=(4, 50, 3)))
        y = rng.integers(0, 2, 50)
        rec = eu_au_gap(preds, y)
        assert rec.gap == pytest.approx(rec.auroc_eu - rec.auroc_au, abs=1e-15)
        assert rec.applicable

    def test_disagreement_driven_ood_gives_positive_gap(self):
        # ID: members agree on moderate probs; OOD: members disagree hard.
        rng = np.random.default_rng(62)
        n = 100
        base = rng.uniform(0.35, 0.65, size=(1, n, 2))
        id_part = np.repeat(base, 4, axis=0) + rng.normal(scale=0.005, size=(4, n, 2))
        ood_part = rng.uniform(0.02, 0.98, size=(4, n, 2))
        preds = PredictionTensor(np.clip(np.concatenate([id_part, ood_part], axis=1), 0, 1))
        y = np.array([0] * n + [1] * n)
        rec = eu_au_gap(preds, y)
        assert rec.auroc_eu > 0.95
        assert rec.gap > 0.2

    def test_single_ood_class_rejected(self):
        preds = PredictionTensor(np.random.default_rng(63).uniform(size=(3, 10, 2)))
        with pytest.raises(ValidationError):
            eu_au_gap(preds, np.ones(10, dtype=int))


class TestRankCorrelation:
    def test_rejects_single_member(self):
        preds = PredictionTensor(np.random.default_rng(64).uniform(size=(1, 10, 2)))
        with pytest.raises(ValidationError):
            uncertainty_rank_correlation(preds)

    def test_bounded(self):
        preds = PredictionTensor(np.random.default_rng(65).uniform(size=(5, 200, 3)))
        rho = uncertainty_rank_correlation(preds)
        assert -1.0 <= rho <= 1.0

    def test_identical_members_give_none(self):
        # EU is ~0 everywhere (constant), so the correlation is undefined.
        v = np.tile(np.random.default_rng(66).uniform(size=(1, 20, 2)), (4, 1, 1))
        assert uncertainty_rank_correlation(PredictionTensor(v)) is None


class TestOverview:
    def make_full(self, method="a"):
        tasks = {t: result(t, 0.8) for t in (1, 2, 3, 4)}
        tasks[5] = result(5, 0.1)
        tasks[6] = result(6, 0.2)
        rec = DisentanglementRecord(method=method, auroc_eu=0.9, auroc_au=0.6,
                                    gap=0.3, rank_corr=0.4)
        return {method: tasks}, {method: rec}

    def test_complete_row_values(self):
        tasks, recs = self.make_full()
        (row,) = overview_aggregate(tasks, recs)
        # Tasks 5/6 contribute 1 - error: mean of [0.8 x4, 0.9, 0.8].
        assert row.avg_performance == pytest.approx((0.8 * 4 + 0.9 + 0.8) / 6)
        assert row.gap == 0.3
        assert row.bubble == pytest.approx(0.6)
        assert row.complete and row.missing == []

    def test_missing_task_marks_incomplete(self):
        tasks, recs = self.make_full()
        del tasks["a"][3]
        (row,) = overview_aggregate(tasks, recs)
        assert not row.complete and row.missing == [3]
        assert row.avg_performance is None  # never imputed

    def test_bubble_clamped(self):
        tasks, recs = self.make_full()
        recs["a"].rank_corr = -1.5
        (row,) = overview_aggregate(tasks, recs)
        assert row.bubble == 2.0

    def test_rows_sorted_and_deterministic(self):
        ta, ra = self.make_full("zeta")
        tb, rb = self.make_full("alpha")
        ta.update(tb)
        ra.update(rb)
        rows1 = overview_aggregate(ta, ra)
        rows2 = overview_aggregate(dict(reversed(list(ta.items()))), ra)
        assert [r.method for r in rows1] == ["alpha", "zeta"]
        assert rows1 == rows2

    def test_method_without_record(self):
        tasks, _ = self.make_full()
        (row,) = overview_aggregate(tasks, {})
        assert row.gap is None and row.bubble is None and not row.complete
