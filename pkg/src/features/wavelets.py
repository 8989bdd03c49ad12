"""
Mother wavelet tabulation and the single-scale CWT.

Wavelets without a closed form (biorthogonal, Daubechies, symlets, Meyer)
are tabulated once with the cascade algorithm from PyWavelets and sampled
by linear interpolation; the value is zero outside the support.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict

import numpy as np
import pywt

from ..utils.errors import WaveletError

logger = logging.getLogger(__name__)

# family name -> PyWavelets discrete wavelet used for tabulation
WAVELET_FAMILIES: Dict[str, str] = {
    "bior2.2": "bior2.2",
    "haar": "haar",
    "db1": "db1",
    "db2": "db2",
    "db3": "db3",
    "sym1": "haar",  # the first symlet is the Haar wavelet
    "sym2": "sym2",
    "sym3": "sym3",
    "meyer": "dmey",
}


@dataclass(frozen=True)
class WaveletSpec:
    """Mother wavelet family, scale a, and tabulation resolution."""
    family: str = "bior2.2"
    scale: float = 250.0
    tabulation_resolution: int = 1024

    def __post_init__(self):
        if self.family not in WAVELET_FAMILIES:
            raise WaveletError(
                f"Untabulated wavelet family '{self.family}'. "
                f"Available: {', '.join(WAVELET_FAMILIES)}"
            )
        if not self.scale >= 1:
            raise WaveletError(f"wavelet scale must be >= 1, got {self.scale}")
        if int(self.tabulation_resolution) < 2:
            raise WaveletError("tabulation_resolution must be at least 2")

    @property
    def level(self) -> int:
        """Cascade refinement level giving at least the requested points per unit."""
        return max(1, math.ceil(math.log2(int(self.tabulation_resolution))))

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "scale": float(self.scale),
            "tabulation_resolution": int(self.tabulation_resolution),
        }


class WaveletTable:
    """Tabulated real mother wavelet psi(x) over its full support."""

    def __init__(self, family: str, level: int):
        self.family = family
        self.level = level
        wavelet = pywt.Wavelet(WAVELET_FAMILIES[family])
        tabulated = wavelet.wavefun(level=level)
        if len(tabulated) == 5:
            # (phi_d, psi_d, phi_r, psi_r, x): keep the decomposition (analysis) wavelet
            psi, x = tabulated[1], tabulated[4]
        else:
            psi, x = tabulated[1], tabulated[2]
        self.x = np.asarray(x, dtype=np.float64)
        self.psi = np.asarray(psi, dtype=np.float64)
        self.x.setflags(write=False)
        self.psi.setflags(write=False)

    @property
    def support(self) -> tuple:
        return float(self.x[0]), float(self.x[-1])

    def __call__(self, t) -> np.ndarray:
        return np.interp(t, self.x, self.psi, left=0.0, right=0.0)


@lru_cache(maxsize=None)
def wavelet_table(family: str, level: int) -> WaveletTable:
    """Shared, read-only tabulation per (family, level)."""
    if family not in WAVELET_FAMILIES:
        raise WaveletError(f"Untabulated wavelet family '{family}'")
    table = WaveletTable(family, level)
    logger.debug(f"Tabulated {family} at level {level}: {table.x.size} points over {table.support}")
    return table


@lru_cache(maxsize=64)
def cwt_kernel(w: WaveletSpec, length: int) -> np.ndarray:
    """
    Kernel K with K[b, t] = psi((t - b) / a) / sqrt(a), so that the CWT of
    a length-L signal at scale a is K @ x. Samples outside [0, L) are zero.
    """
    table = wavelet_table(w.family, w.level)
    t = np.arange(length, dtype=np.float64)
    arg = (t[np.newaxis, :] - t[:, np.newaxis]) / float(w.scale)
    kernel = table(arg) / math.sqrt(float(w.scale))
    kernel.setflags(write=False)
    return kernel


def cwt_single_scale(x, w: WaveletSpec) -> np.ndarray:
    """
    Single-scale continuous wavelet transform, one coefficient per sample.

    Args:
        x: Real sequence of length L >= 2, or a (k, L) array of sequences
        w: Wavelet specification

    Returns:
        Coefficients with the same shape as x

    Raises:
        ValueError: On empty or too-short input
    """
    x = np.asarray(x, dtype=np.float64)
    length = x.shape[-1] if x.ndim else 0
    if length == 0:
        raise ValueError("cwt input must not be empty")
    if length < 2:
        raise ValueError(f"cwt input needs at least 2 samples, got {length}")
    kernel = cwt_kernel(w, length)
    return x @ kernel.T
