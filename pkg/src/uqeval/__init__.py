"""uqeval: evaluation engine for multilabel uncertainty quantification."""

from ._backend import USE_NUMBA, backend_name
from .ddu import ClassGaussians, FeatureMatrix, ddu_score, fit_class_gaussians
from .decomposition import (
    BMAOutput,
    PredictionTensor,
    UncertaintyScores,
    ValidationError,
    aggregate_classes,
    aleatoric_uncertainty,
    bayesian_model_average,
    binary_entropy_scalar,
    epistemic_uncertainty,
    predictive_uncertainty,
)
from .disentangle import (
    DisentanglementRecord,
    eu_au_gap,
    overview_aggregate,
    uncertainty_rank_correlation,
)
from .edl import (
    BetaParams,
    beta_edl_loss,
    digamma,
    edl_aleatoric_uncertainty,
    edl_epistemic_uncertainty,
    edl_predictive_uncertainty,
    kl_beta_uniform,
)
from .hetnn import HetLogits, hetnn_loss, hetnn_sample_predictions
from .metrics import auac, auroc, ece, macro_auroc, mce, spearman
from .synth import SynthConfig, SynthData, factor_recovery_report, generate
from .tasks import (
    LabelTensor,
    TaskResult,
    derive_correctness,
    task1_ood,
    task2_uncertainty_labels,
    task3_correctness,
    task4_abstain,
    task5_task6_calibration,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
