"""Task mutual information for sensing systems.

Estimate I(X^n; Y^n) between designed sensing features and the embeddings a
channel delivers, and turn it into lower (Fano) and upper (typicality)
bounds on the probability of mis-sensing the task state.
"""

from .bounds import (
    compare_features,
    fano_lower_relaxed,
    fano_lower_tight,
    lossless_condition,
    preprocessing_check,
    sensing_rate,
    typicality_upper_bound,
)
from .core import (
    BoundReport,
    LabeledDataset,
    MIEstimate,
    PairedSamples,
    RngSeed,
    StateSpace,
    derive_substream,
    validate_state_space,
)
from .errors import DTMIError, InfeasibleError, ValidationError
from .infotheory import entropy, gaussian_mi_oracle, plugin_mi
from .knn_mi import EstimatorConfig, estimate_dtmi, ksg1, ksg2, mixed_ksg
from .report import CorrelationReport, RunReport, emit_line_plot, emit_report, load_labeled_csv, load_paired_csv, pearson
from .simchannel import (
    Decoder,
    DMCModel,
    FeatureEncoder,
    GaussianChannel,
    build_repetition_encoder,
    cross_mi_exact,
    exact_channel_mi,
    exact_error_small,
    run_monte_carlo,
)
from .typicality import ReferenceJoint, matching_membership, typicality_decode, typicality_probability

__version__ = "0.1.0"
