"""
Fall detector: classify stream windows with the voting machine and raise
debounced alerts.
"""

import json
import logging
import time
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, Optional

from .windowing import StreamCounters, StreamFrame, Window, WindowPolicy, window_stream
from ..classifiers.serialization import ModelBundle
from ..classifiers.voting import Prediction
from ..data.dataset import BinaryLabel
from ..features.assembler import assemble
from ..utils.errors import ConfigurationError


@dataclass(frozen=True)
class AlertEvent:
    window_start: float
    window_end: float
    votes: Dict[str, str]
    model_id: str
    latency_ms: float
    label: str = BinaryLabel.FALL.value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "window_start": self.window_start,
            "window_end": self.window_end,
            "label": self.label,
            "votes": self.votes,
            "model_id": self.model_id,
            "latency_ms": round(self.latency_ms, 3),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass
class WindowResult:
    window: Window
    prediction: Prediction
    latency_ms: float
    alert: Optional[AlertEvent] = None


class FallDetector:
    """Per-stream detection state: model bundle, policy, debounce clock and counters."""

    def __init__(self, bundle: ModelBundle, policy: WindowPolicy,
                 counters: Optional[StreamCounters] = None):
        """
        Bind a model bundle to a window policy.

        Raises:
            ConfigurationError: If the policy's window length in samples
                differs from the record length the models were trained on
        """
        self.logger = logging.getLogger(__name__)
        self.bundle = bundle
        self.policy = policy
        self.counters = counters if counters is not None else StreamCounters()
        self.window_samples = policy.window_samples(bundle.fs)
        if self.window_samples != bundle.record_length:
            raise ConfigurationError(
                f"window of {policy.window_length:g}s at {bundle.fs:g} Hz gives L={self.window_samples}, "
                f"but model {bundle.model_id} was trained on L={bundle.record_length}"
            )
        policy.stride_samples(bundle.fs)
        self._deadline_ms = policy.stride * 1000.0
        self._debounce_ms = policy.debounce * 1000.0
        self._last_alert: Optional[float] = None

    @property
    def fs(self) -> float:
        return self.bundle.fs

    def classify(self, window: Window) -> WindowResult:
        """Extract features and classify one window; timed end to end."""
        start = time.perf_counter_ns()
        vector = assemble(window.record, self.bundle.feature_config, self.window_samples)
        prediction = self.bundle.voting.predict(vector)
        latency_ms = (time.perf_counter_ns() - start) / 1e6
        self.counters.windows_classified += 1
        if latency_ms >= self._deadline_ms:
            self.counters.deadline_misses += 1
            self.logger.warning(
                f"Window {window.index} took {latency_ms:.1f} ms, over the {self._deadline_ms:.0f} ms stride"
            )
        return WindowResult(window=window, prediction=prediction, latency_ms=latency_ms)

    def _debounced(self, t: float) -> bool:
        if self._last_alert is None:
            return True
        return t > self._last_alert and t - self._last_alert >= self._debounce_ms

    def process(self, window: Window) -> WindowResult:
        """Classify a window and attach an alert when a fall passes the debounce."""
        result = self.classify(window)
        if result.prediction.label is not BinaryLabel.FALL:
            return result
        if not self._debounced(window.end_ms):
            self.logger.debug(f"Fall in window {window.index} suppressed by debounce")
            return result
        self._last_alert = window.end_ms
        self.counters.alerts_emitted += 1
        result.alert = AlertEvent(
            window_start=window.start_ms,
            window_end=window.end_ms,
            votes=result.prediction.votes(),
            model_id=self.bundle.model_id,
            latency_ms=result.latency_ms,
        )
        self.logger.info(f"FALL alert for window [{window.start_ms:.0f}, {window.end_ms:.0f}] ms")
        return result


def detect(stream: Iterable[StreamFrame], bundle: ModelBundle, p: WindowPolicy,
           counters: Optional[StreamCounters] = None) -> Iterator[AlertEvent]:
    """
    Window a frame stream, classify every window and yield the alerts.

    Raises:
        ConfigurationError: On a model/window length mismatch, before any
            frame is read
    """
    counters = counters if counters is not None else StreamCounters()
    detector = FallDetector(bundle, p, counters)

    def alerts() -> Iterator[AlertEvent]:
        for window in window_stream(stream, p, bundle.fs, counters):
            result = detector.process(window)
            if result.alert is not None:
                yield result.alert

    return alerts()
