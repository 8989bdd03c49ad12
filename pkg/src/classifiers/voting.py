"""
Voting machine: 2-of-3 majority over KNN, ENN and BDT.
"""

import time
from dataclasses import dataclass, field
from typing import Dict

from ..data.dataset import BinaryLabel
from .bdt import BdtModel
from .enn import EnnModel
from .knn import KnnModel


def vote(p_knn: BinaryLabel, p_enn: BinaryLabel, p_bdt: BinaryLabel) -> BinaryLabel:
    """Majority label; with three voters and two classes there is no tie."""
    falls = sum(1 for p in (p_knn, p_enn, p_bdt) if BinaryLabel(p) is BinaryLabel.FALL)
    return BinaryLabel.FALL if falls >= 2 else BinaryLabel.ADL


@dataclass(frozen=True)
class Prediction:
    label: BinaryLabel
    per_classifier: Dict[str, BinaryLabel]
    latency_ns: Dict[str, int] = field(default_factory=dict)

    def votes(self) -> Dict[str, str]:
        return {name: label.value for name, label in self.per_classifier.items()}


@dataclass(frozen=True, eq=False)
class VotingModel:
    knn: KnnModel
    enn: EnnModel
    bdt: BdtModel

    name = "vm"

    @property
    def dimension(self) -> int:
        return self.knn.dimension

    def predict(self, q) -> Prediction:
        """
        Classify with all three models, timing each one.

        The voting machine's latency is the sum of the three classifier
        latencies plus the time to take the vote.
        """
        labels = {}
        latency = {}
        for model in (self.knn, self.enn, self.bdt):
            start = time.perf_counter_ns()
            code = model.classify(q)
            latency[model.name] = time.perf_counter_ns() - start
            labels[model.name] = BinaryLabel.from_code(code)
        start = time.perf_counter_ns()
        decision = vote(labels["knn"], labels["enn"], labels["bdt"])
        latency[self.name] = sum(latency.values()) + (time.perf_counter_ns() - start)
        return Prediction(label=decision, per_classifier=labels, latency_ns=latency)

    def classify(self, q) -> int:
        return self.predict(q).label.code
