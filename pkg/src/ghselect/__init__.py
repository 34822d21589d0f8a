"""Generalised hyperbolic distributions with simultaneous penalised
maximum-likelihood estimation and nested-model selection."""

from .ecme import (
    EStepWeights,
    FitControls,
    FitError,
    FitResult,
    cm_step1,
    cm_step2,
    e_step,
    fit,
    penalised_loglik,
)
from .ghdist import (
    Dataset,
    GHParams,
    gh_log_density,
    gh_log_likelihood,
    gh_sample,
    mahalanobis,
    read_dataset,
    write_dataset,
)
from .gig import GIGParams, gig_log_pdf, gig_mean, gig_mean_inverse, gig_sample
from .harness import (
    DGM_NAMES,
    ContingencyTable,
    ExperimentConfig,
    dgm_params,
    load_config,
    penalty_curve,
    run_experiment,
    simulate_dataset,
)
from .optimize import ObjectiveSpec, best_of, bfgs_numeric, nelder_mead, shape_to_vector, vector_to_shape
from .penalty import (
    PenaltyKind,
    PenaltySpec,
    ShapeParams,
    hier_lasso_pair,
    mc_lasso,
    penalty_full72,
    penalty_hier16,
    penalty_value,
)
from .select import LCVConfig, LCVError, lcv_scores, lcv_statistic, select_h
from .special import bessel_k_ratio, log_bessel_k
from .taxonomy import MODEL_NAMES, ClassificationError, ModelLabel, classify, to_conventional

__version__ = "0.1.0"
