"""
Parameter sweeps over the evaluation protocol.

Both sweeps produce long-format rows (param, classifier, metric, value)
ready for plotting.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import pandas as pd

from .metrics import METRIC_NAMES
from .protocol import ClassifierSelection, EvalReport, run_protocol
from ..data.dataset import Dataset
from ..data.splits import SplitSpec
from ..features.assembler import FeatureConfig, extract_matrix
from ..features.wavelets import WaveletSpec
from ..utils.errors import FeatureConfigError, ModelError

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("param", "classifier", "metric", "value")
DEFAULT_NEIGHBORS = tuple(range(1, 18, 2))

# Feature-combination rows, weakest to strongest on the reference run
REFERENCE_COMBINATIONS = (
    "total_abs_svm",
    "sma",
    "svm",
    "sma,svm",
    "range",
    "raw",
    "cwt",
    "sma,se,svm",
    "cwt,svm",
    "se",
    "cwt,se",
    "cwt,sma",
    "cwt,total_abs_svm",
    "sma,se,range",
    "cwt,svm,range,sma,se,total_abs_svm",
    "cwt,se,sma,total_abs_svm",
    "cwt,se,sma,svm",
)

BEST_COMBINATION = "cwt,se,sma,svm"


def reference_configs(wavelet: Optional[WaveletSpec] = None) -> List[FeatureConfig]:
    return [FeatureConfig.from_names(names, wavelet) for names in REFERENCE_COMBINATIONS]


@dataclass
class SweepTable:
    kind: str
    rows: List[Dict] = field(default_factory=list)
    reports: Dict[str, EvalReport] = field(default_factory=dict)
    config: Dict = field(default_factory=dict)

    def add_report(self, param, report: EvalReport):
        self.reports[str(param)] = report
        for classifier, averages in report.averages.items():
            for metric in METRIC_NAMES:
                self.rows.append({
                    "param": param,
                    "classifier": classifier,
                    "metric": metric,
                    "value": averages[metric],
                })

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=list(SWEEP_COLUMNS))

    def value(self, param, classifier: str, metric: str = "accuracy") -> Optional[float]:
        for row in self.rows:
            if (str(row["param"]) == str(param) and row["classifier"] == classifier
                    and row["metric"] == metric):
                return row["value"]
        return None

    def ranking(self, classifier: str, metric: str = "accuracy") -> List[str]:
        """Params ordered best first; undefined values sort last."""
        scored = [
            (row["value"], str(row["param"])) for row in self.rows
            if row["classifier"] == classifier and row["metric"] == metric
        ]
        scored.sort(key=lambda item: float("-inf") if item[0] is None else item[0], reverse=True)
        return [param for _, param in scored]

    def to_dict(self) -> Dict:
        return {"type": f"sweep_{self.kind}", "config": self.config, "rows": self.rows}


def _spread(table: SweepTable, classifier: str, params: Iterable[int]) -> Optional[float]:
    values = [table.value(p, classifier) for p in params]
    values = [v for v in values if v is not None]
    return max(values) - min(values) if values else None


def _log_neighbor_checks(table: SweepTable, k_values: Sequence[int]):
    middle = [k for k in k_values if 3 <= k <= 9]
    knn_spread, enn_spread = _spread(table, "knn", middle), _spread(table, "enn", middle)
    if knn_spread is not None and enn_spread is not None:
        verdict = "holds" if enn_spread <= knn_spread else "does not hold"
        logger.info(
            f"Spread check over k in {middle}: ENN {enn_spread:.2f} pp vs KNN "
            f"{knn_spread:.2f} pp ({verdict})"
        )
    best_small = [k for k in k_values if k in (3, 5, 7)]
    largest = max(k_values)
    if best_small and largest > max(best_small):
        for name in ("knn", "enn"):
            best = max((table.value(k, name) or 0.0) for k in best_small)
            tail = table.value(largest, name)
            if tail is not None:
                logger.info(f"{name.upper()}: best k in {best_small} {best:.2f}% vs k={largest} {tail:.2f}%")


def sweep_neighbors(ds: Dataset, cfg: FeatureConfig, spec: SplitSpec,
                    k_values: Sequence[int] = DEFAULT_NEIGHBORS, threads: int = 1,
                    report_timing: bool = False) -> SweepTable:
    """
    Evaluate KNN and ENN for each neighbor count.

    Raises:
        ModelError: If k_values is empty, holds an even or non-positive
            value, or reaches the training-set size
    """
    k_values = [int(k) for k in k_values]
    if not k_values:
        raise ModelError("neighbor sweep needs at least one value")
    for k in k_values:
        if k < 1 or k % 2 == 0:
            raise ModelError(f"neighbor counts must be odd positive integers, got {k}")
    n_train = spec.train_size(len(ds))
    if max(k_values) >= n_train:
        raise ModelError(f"largest neighbor count {max(k_values)} must be below the train size {n_train}")

    matrix = extract_matrix(ds, cfg, threads)
    table = SweepTable(kind="neighbors", config={
        "features": cfg.to_dict(), "split": asdict(spec), "k_values": k_values,
    })
    for k in k_values:
        logger.info(f"Neighbor sweep: k = e = {k}")
        selection = ClassifierSelection(knn_k=k, enn_e=k, bdt=False, vm=False)
        table.add_report(k, run_protocol(ds, cfg, selection, spec, threads, matrix, report_timing))
    _log_neighbor_checks(table, k_values)
    return table


def sweep_features(ds: Dataset, combos: Optional[Sequence[FeatureConfig]], spec: SplitSpec,
                   selection: Optional[ClassifierSelection] = None, threads: int = 1,
                   report_timing: bool = False) -> SweepTable:
    """
    Evaluate every feature combination with the same classifiers and splits.

    Args:
        ds: Labelled dataset
        combos: Feature configurations; None runs the 17 reference combinations
        spec: Split specification shared by every row
        selection: Classifiers (default K=3, E=3, BDT and VM)
        threads: Worker threads
        report_timing: Keep timing fields in the per-row reports

    Returns:
        SweepTable with one param per combination label
    """
    combos = list(combos) if combos is not None else reference_configs()
    if not combos:
        raise FeatureConfigError("feature sweep needs at least one combination")
    selection = selection or ClassifierSelection(knn_k=3, enn_e=3, bdt=True, vm=True)
    table = SweepTable(kind="features", config={
        "classifiers": selection.to_dict(), "split": asdict(spec),
        "combinations": [c.label for c in combos],
    })
    for cfg in combos:
        logger.info(f"Feature sweep: [{cfg.label}]")
        table.add_report(cfg.label, run_protocol(ds, cfg, selection, spec, threads,
                                                 report_timing=report_timing))

    ranked_by = "vm" if selection.vm else selection.names[-1]
    ranking = table.ranking(ranked_by)
    best = FeatureConfig.from_names(BEST_COMBINATION).label
    if best in ranking:
        logger.info(f"[{best}] ranks {ranking.index(best) + 1} of {len(ranking)} by {ranked_by.upper()} accuracy")
    logger.info(f"Lowest-ranked combination: [{ranking[-1]}]")
    return table
