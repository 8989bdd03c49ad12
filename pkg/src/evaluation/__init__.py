# Evaluation module
from .metrics import ConfusionCounts, Metrics, average_metrics, compute_metrics
from .protocol import ClassifierSelection, EvalReport, FoldResult, run_protocol
from .sweeps import REFERENCE_COMBINATIONS, SweepTable, sweep_features, sweep_neighbors, reference_configs
