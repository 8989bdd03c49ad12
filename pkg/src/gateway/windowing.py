"""
Sliding windows over a live accelerometer stream.

A window of L = round(window_length * fs) samples is emitted every
round(stride * fs) accepted samples once L samples are buffered. Frames
whose timestamp goes backwards are dropped. A gap longer than the window
length empties the buffer, so no window straddles the gap.
"""

import json
import logging
import math
from collections import deque
from dataclasses import asdict, dataclass
from decimal import Decimal, ROUND_HALF_UP
from typing import Any, Dict, Iterable, Iterator, Mapping, Optional

import numpy as np

from ..data.dataset import Record
from ..utils.errors import ConfigurationError

logger = logging.getLogger(__name__)


def seconds_to_samples(seconds: float, fs: float) -> int:
    """round(seconds * fs), halves rounded up."""
    exact = Decimal(str(seconds)) * Decimal(str(fs))
    return int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class StreamFrame:
    t: float   # milliseconds
    ax: float
    ay: float
    az: float

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "StreamFrame":
        try:
            values = {key: float(data[key]) for key in ("t", "ax", "ay", "az")}
        except KeyError as e:
            raise ValueError(f"frame is missing field {e}")
        except (TypeError, ValueError):
            raise ValueError(f"frame fields must be numbers: {dict(data)}")
        if not all(math.isfinite(v) for v in values.values()):
            raise ValueError(f"frame values must be finite: {values}")
        return cls(**values)

    @classmethod
    def from_json(cls, line: str) -> "StreamFrame":
        """Parse one `{"t":..,"ax":..,"ay":..,"az":..}` line."""
        try:
            data = json.loads(line)
        except json.JSONDecodeError as e:
            raise ValueError(f"invalid JSON frame: {e}")
        if not isinstance(data, dict):
            raise ValueError("frame must be a JSON object")
        return cls.from_dict(data)


@dataclass(frozen=True)
class WindowPolicy:
    window_length: float = 3.0
    stride: float = 0.5
    debounce: float = 10.0

    def __post_init__(self):
        if not 0 < self.stride <= self.window_length:
            raise ConfigurationError(
                f"stride must satisfy 0 < stride <= window_length "
                f"(stride={self.stride}, window_length={self.window_length})"
            )
        if self.debounce < 0:
            raise ConfigurationError(f"debounce must be non-negative, got {self.debounce}")

    @classmethod
    def from_settings(cls, settings: Dict[str, Any]) -> "WindowPolicy":
        return cls(
            window_length=float(settings.get("window_length", 3.0)),
            stride=float(settings.get("stride", 0.5)),
            debounce=float(settings.get("debounce", 10.0)),
        )

    def window_samples(self, fs: float) -> int:
        return seconds_to_samples(self.window_length, fs)

    def stride_samples(self, fs: float) -> int:
        step = seconds_to_samples(self.stride, fs)
        if step < 1:
            raise ConfigurationError(f"stride {self.stride}s is shorter than one sample at {fs:g} Hz")
        return step


@dataclass
class StreamCounters:
    frames_in: int = 0
    frames_accepted: int = 0
    frames_dropped: int = 0
    buffer_resets: int = 0
    windows_emitted: int = 0
    windows_dropped: int = 0
    windows_classified: int = 0
    alerts_emitted: int = 0
    deadline_misses: int = 0

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Window:
    index: int
    start_ms: float
    end_ms: float
    record: Record


class Windower:
    """Incremental windowing state for one stream."""

    def __init__(self, policy: WindowPolicy, fs: float,
                 counters: Optional[StreamCounters] = None):
        self.logger = logging.getLogger(__name__)
        self.policy = policy
        self.fs = float(fs)
        self.length = policy.window_samples(fs)
        self.step = policy.stride_samples(fs)
        if self.length < 2:
            raise ConfigurationError(f"window of {self.length} samples is too short")
        self.counters = counters or StreamCounters()
        self._buffer = deque(maxlen=self.length)
        self._since_reset = 0
        self._last_t: Optional[float] = None
        self._emitted = 0

    def _reset(self):
        self._buffer.clear()
        self._since_reset = 0
        self.counters.buffer_resets += 1

    def push(self, frame: StreamFrame) -> Optional[Window]:
        """Accept one frame; return a window when one completes."""
        self.counters.frames_in += 1
        if self._last_t is not None:
            if frame.t < self._last_t:
                self.counters.frames_dropped += 1
                self.logger.debug(f"Dropped out-of-order frame t={frame.t} (last {self._last_t})")
                return None
            if frame.t - self._last_t > self.policy.window_length * 1000.0:
                self.logger.info(f"Gap of {frame.t - self._last_t:.0f} ms, resetting window buffer")
                self._reset()
        self._last_t = frame.t
        self.counters.frames_accepted += 1
        self._buffer.append(frame)
        self._since_reset += 1

        if self._since_reset < self.length or (self._since_reset - self.length) % self.step:
            return None
        return self._emit()

    def _emit(self) -> Window:
        samples = np.array([(f.ax, f.ay, f.az) for f in self._buffer], dtype=np.float64)
        start, end = self._buffer[0].t, self._buffer[-1].t
        index = self._emitted
        self._emitted += 1
        self.counters.windows_emitted += 1
        record = Record(
            id=f"window-{index}",
            ax=samples[:, 0], ay=samples[:, 1], az=samples[:, 2],
            fs=self.fs,
        )
        return Window(index=index, start_ms=start, end_ms=end, record=record)


def window_stream(frames: Iterable[StreamFrame], p: WindowPolicy, fs: float,
                  counters: Optional[StreamCounters] = None) -> Iterator[Window]:
    """
    Cut an ordered frame stream into fixed-length sliding windows.

    Incomplete tail windows are never emitted.
    """
    windower = Windower(p, fs, counters)
    for frame in frames:
        window = windower.push(frame)
        if window is not None:
            yield window
