"""Gaussian graphical model selection with multiplicative-weight neighborhood regression."""

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    EmptyGraph,
    GGMError,
    InfeasibleDegree,
    InsufficientSamples,
    MalformedInput,
    NotPositiveDefinite,
)
from .model import (
    ModelParams,
    PrecisionModel,
    derive_params,
    generate_model,
    load_model,
    save_model,
    weight_vector,
)
from .oracle import RiskOracle, expected_risk, linf_bound, make_oracle, risk_identity_check
from .recovery import (
    GraphEstimate,
    NeighborhoodEstimate,
    RecoveryMetrics,
    evaluate,
    learn_node,
    recover_graph,
    threshold_graph,
)
from .sampler import (
    NormalizedView,
    SampleBlock,
    cholesky_lower,
    draw_samples,
    normalize_for_node,
    stream_source,
)
from .sparsitron import (
    HedgeState,
    default_beta,
    double_sample,
    double_weights,
    empirical_risk,
    fold_back,
    hedge_step,
    make_loss,
    run_sparsitron,
)

__version__ = "0.1.0"
