"""Tucker-compressed dynamic mode decomposition for MIMO-OFDM channel
prediction, with AR and zero-order-hold baselines and a Monte-Carlo NMSE
benchmark harness."""

from .channel_sim import PathSet, ScenarioConfig, add_noise, draw_paths, generate_sequence
from .dmd import DmdModel, SnapshotPair, build_snapshots
from .errors import DataFormatError, NumericalError
from .evaluation import ExperimentSpec, NmseReport, nmse, nmse_db, run_experiment
from .predictors import (
    ChannelSequence,
    Method,
    OperatorEquivalence,
    PredictorConfig,
    predict,
    verify_operator_equivalence,
)
from .tucker import TuckerModel, compression_ratio, hosvd

__version__ = "0.1.0"

__all__ = [
    "ChannelSequence", "DataFormatError", "DmdModel", "ExperimentSpec",
    "Method", "NmseReport", "NumericalError", "OperatorEquivalence",
    "PathSet", "PredictorConfig", "ScenarioConfig", "SnapshotPair",
    "TuckerModel", "add_noise", "build_snapshots", "compression_ratio",
    "draw_paths", "generate_sequence", "hosvd", "nmse", "nmse_db",
    "predict", "run_experiment", "verify_operator_equivalence",
    "__version__",
]
