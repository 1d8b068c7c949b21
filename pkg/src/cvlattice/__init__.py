"""Exact model evidence and subset-lattice cross-validation log-scores."""
from .core import (
    CapacityError,
    CvLatticeError,
    Dataset,
    DegenerateEvidenceError,
    ModelDataMismatch,
    PreconditionError,
    ZeroProbabilityError,
    cardinality,
    stable_log_sum,
    stable_mean,
    to_decibels,
)
from .evidence import (
    HypothesisSet,
    compare,
    nonrelative_bayes_factor,
    posterior,
    relative_bayes_factor,
    weight_of_evidence_db,
)
from .lattice import (
    build_cache,
    kfold_score,
    leave_m_out_score,
    loo_score,
    per_cardinality_scores,
    per_datum_decomposition,
    verify_identity,
)
from .models import (
    BetaBernoulli,
    DirichletCategorical,
    NormalKnownVariance,
    SimpleCategorical,
    SimpleGaussian,
    log_marginal,
    log_predictive,
)

__version__ = "0.1.0"
