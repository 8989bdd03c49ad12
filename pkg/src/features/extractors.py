"""
Per-record feature extractors.

SVM here is the signal vector magnitude, not the classifier.
"""

from typing import Tuple

import numpy as np

from ..data.dataset import Record


def svm_series(r: Record) -> np.ndarray:
    """Per-sample acceleration magnitude, sample order preserved."""
    return np.sqrt(r.ax ** 2 + r.ay ** 2 + r.az ** 2)


def total_abs_svm(r: Record) -> float:
    """Sum of |SVM| over the record."""
    return float(np.sum(np.abs(svm_series(r))))


def sma(r: Record) -> float:
    """Signal magnitude area: sum of per-axis absolute values."""
    return float(np.sum(np.abs(r.ax)) + np.sum(np.abs(r.ay)) + np.sum(np.abs(r.az)))


def axis_ranges(r: Record) -> Tuple[float, float, float]:
    """Max minus min per axis."""
    return tuple(float(np.max(a) - np.min(a)) for a in (r.ax, r.ay, r.az))


def signal_energy(r: Record) -> Tuple[float, float, float]:
    """
    Per-axis energy of the full two-sided, unnormalized FFT spectrum.

    By Parseval this equals L times the time-domain sum of squares.
    """
    spectrum = np.fft.fft(r.axes(), axis=1)
    energy = np.sum(np.abs(spectrum) ** 2, axis=1)
    return tuple(float(e) for e in energy)


def raw_samples(r: Record) -> np.ndarray:
    """Flattened ax || ay || az."""
    return np.concatenate([r.ax, r.ay, r.az])
