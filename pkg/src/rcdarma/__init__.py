"""Running consensus detection of ARMA signals in ARMA noise."""

from .arma import ArmaModel, RationalTransferFunction, transfer_function, whitened_signal_tf
from .analysis import AsymptoticReport, classify, spectral_summary
from .detector import DetectorState, rcd_step
from .errors import (
    AssumptionViolation, ConfigError, DegenerateProblemError, GraphGenerationError,
    NumericDomainError, RcdError, RootFindingError,
)
from .network import Graph, WeightMatrix, erdos_renyi, laplacian_weights, metropolis_weights
from .simharness import ErrorCurves, ExperimentConfig, moment_check, run_experiment

__version__ = "0.1.0"

__all__ = [
    "ArmaModel", "RationalTransferFunction", "transfer_function", "whitened_signal_tf",
    "AsymptoticReport", "classify", "spectral_summary",
    "DetectorState", "rcd_step",
    "AssumptionViolation", "ConfigError", "DegenerateProblemError", "GraphGenerationError",
    "NumericDomainError", "RcdError", "RootFindingError",
    "Graph", "WeightMatrix", "erdos_renyi", "laplacian_weights", "metropolis_weights",
    "ErrorCurves", "ExperimentConfig", "moment_check", "run_experiment",
]
