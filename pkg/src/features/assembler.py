"""
Feature configuration and vector assembly.

Enabled extractors are concatenated in a fixed order regardless of the
order they were requested in:
CWT || SVM || Total|SVM| || SMA || RANGE || SE || RAW.
No normalization is applied.
"""

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from . import extractors
from .wavelets import WaveletSpec, cwt_kernel, cwt_single_scale
from ..data.dataset import Dataset, Record
from ..utils.errors import FeatureConfigError, LengthMismatchError

logger = logging.getLogger(__name__)


class Extractor(str, Enum):
    CWT = "cwt"
    SVM = "svm"
    TOTAL_ABS_SVM = "total_abs_svm"
    SMA = "sma"
    RANGE = "range"
    SE = "se"
    RAW = "raw"

    def length(self, record_length: int) -> int:
        """Number of values this extractor contributes for L-sample records."""
        return {
            Extractor.CWT: 3 * record_length,
            Extractor.SVM: record_length,
            Extractor.TOTAL_ABS_SVM: 1,
            Extractor.SMA: 1,
            Extractor.RANGE: 3,
            Extractor.SE: 3,
            Extractor.RAW: 3 * record_length,
        }[self]


EXTRACTOR_ORDER: Tuple[Extractor, ...] = tuple(Extractor)

# The six extractors of the feature vector proper; RAW only serves the
# raw-data baseline row of the combination sweep.
PRIMARY_EXTRACTORS: Tuple[Extractor, ...] = EXTRACTOR_ORDER[:6]

_ALIASES = {
    "total|svm|": Extractor.TOTAL_ABS_SVM,
    "totalsvm": Extractor.TOTAL_ABS_SVM,
    "total_svm": Extractor.TOTAL_ABS_SVM,
    "data_range": Extractor.RANGE,
    "ranges": Extractor.RANGE,
    "energy": Extractor.SE,
}

_DISPLAY = {
    Extractor.CWT: "CWT",
    Extractor.SVM: "SVM",
    Extractor.TOTAL_ABS_SVM: "Total|SVM|",
    Extractor.SMA: "SMA",
    Extractor.RANGE: "Range",
    Extractor.SE: "SE",
    Extractor.RAW: "Raw",
}


def parse_extractor(name: str) -> Extractor:
    key = name.strip().lower()
    if key in _ALIASES:
        return _ALIASES[key]
    try:
        return Extractor(key)
    except ValueError:
        raise FeatureConfigError(
            f"Unknown feature '{name}'. Available: {', '.join(e.value for e in Extractor)}"
        )


@dataclass(frozen=True)
class FeatureConfig:
    """Which extractors run, and the wavelet used by CWT."""
    enabled: Tuple[Extractor, ...]
    wavelet: WaveletSpec = field(default_factory=WaveletSpec)

    def __post_init__(self):
        requested = {parse_extractor(e) if isinstance(e, str) else e for e in self.enabled}
        if not requested:
            raise FeatureConfigError("at least one feature extractor must be enabled")
        object.__setattr__(self, "enabled", tuple(e for e in EXTRACTOR_ORDER if e in requested))

    @classmethod
    def from_names(cls, names: Union[str, Iterable[str]],
                   wavelet: Optional[WaveletSpec] = None) -> "FeatureConfig":
        """Build from 'cwt,se,sma,svm' or a list of names."""
        if isinstance(names, str):
            names = [n for n in names.split(",") if n.strip()]
        return cls(enabled=tuple(parse_extractor(n) for n in names),
                   wavelet=wavelet or WaveletSpec())

    @classmethod
    def from_settings(cls, settings: Dict) -> "FeatureConfig":
        """Build from the 'features' configuration section."""
        wavelet = settings.get("wavelet", {})
        return cls.from_names(settings["enabled"], WaveletSpec(
            family=wavelet.get("family", "bior2.2"),
            scale=float(wavelet.get("scale", 250.0)),
            tabulation_resolution=int(wavelet.get("resolution", 1024)),
        ))

    def vector_length(self, record_length: int) -> int:
        return sum(e.length(record_length) for e in self.enabled)

    @property
    def label(self) -> str:
        """Human-readable combination name used in sweep tables."""
        return " + ".join(_DISPLAY[e] for e in self.enabled)

    def to_dict(self) -> dict:
        data = {"enabled": [e.value for e in self.enabled]}
        if Extractor.CWT in self.enabled:
            data["wavelet"] = self.wavelet.to_dict()
        return data

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    config_hash: str
    record_id: str

    def __len__(self) -> int:
        return int(self.values.shape[0])


def _extract_parts(r: Record, cfg: FeatureConfig) -> List[np.ndarray]:
    parts = []
    for extractor in cfg.enabled:
        if extractor is Extractor.CWT:
            parts.append(cwt_single_scale(r.axes(), cfg.wavelet).ravel())
        elif extractor is Extractor.SVM:
            parts.append(extractors.svm_series(r))
        elif extractor is Extractor.TOTAL_ABS_SVM:
            parts.append(np.array([extractors.total_abs_svm(r)]))
        elif extractor is Extractor.SMA:
            parts.append(np.array([extractors.sma(r)]))
        elif extractor is Extractor.RANGE:
            parts.append(np.array(extractors.axis_ranges(r)))
        elif extractor is Extractor.SE:
            parts.append(np.array(extractors.signal_energy(r)))
        elif extractor is Extractor.RAW:
            parts.append(extractors.raw_samples(r))
    return parts


def assemble(r: Record, cfg: FeatureConfig, expected_length: Optional[int] = None) -> FeatureVector:
    """
    Concatenate the enabled extractor outputs for one record.

    Raises:
        LengthMismatchError: If the record length differs from expected_length
    """
    if expected_length is not None and r.length != expected_length:
        raise LengthMismatchError(
            f"has {r.length} samples, expected {expected_length}", r.id
        )
    values = np.concatenate(_extract_parts(r, cfg)).astype(np.float64, copy=False)
    if values.shape[0] != cfg.vector_length(r.length):
        raise FeatureConfigError(
            f"assembled {values.shape[0]} values, expected {cfg.vector_length(r.length)}"
        )
    if not np.all(np.isfinite(values)):
        raise FeatureConfigError(f"non-finite feature values for record '{r.id}'")
    return FeatureVector(values=values, config_hash=cfg.config_hash, record_id=r.id)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Feature vectors of a whole dataset, one row per record."""
    record_ids: Tuple[str, ...]
    values: np.ndarray
    labels: np.ndarray
    config_hash: str
    extraction_ms: np.ndarray

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.values.shape[1])

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Write one row per record with record_id as the first column."""
        path = Path(path)
        columns = [f"f{i}" for i in range(self.dimension)]
        frame = pd.DataFrame(self.values, columns=columns)
        frame.insert(0, "record_id", list(self.record_ids))
        frame.to_csv(path, index=False, float_format="%.17g")
        return path

    def save_cache(self, path: Union[str, Path]) -> Path:
        """Compact binary cache keyed by the feature configuration hash."""
        path = Path(path)
        with open(path, "wb") as f:
            np.savez(
                f,
                config_hash=np.array(self.config_hash),
                record_ids=np.array(self.record_ids),
                values=self.values,
                labels=self.labels,
                extraction_ms=self.extraction_ms,
            )
        return path

    @classmethod
    def load_cache(cls, path: Union[str, Path], config_hash: str) -> Optional["FeatureMatrix"]:
        """Load a cache file, or None if it was built with a different configuration."""
        path = Path(path)
        if not path.exists():
            return None
        with np.load(path, allow_pickle=False) as data:
            if str(data["config_hash"]) != config_hash:
                logger.info(f"Ignoring feature cache {path}: configuration hash differs")
                return None
            return cls(
                record_ids=tuple(str(i) for i in data["record_ids"]),
                values=data["values"],
                labels=data["labels"],
                config_hash=config_hash,
                extraction_ms=data["extraction_ms"],
            )


def _timed_assemble(args) -> Tuple[np.ndarray, float]:
    record, cfg, length = args
    start = time.perf_counter_ns()
    vector = assemble(record, cfg, length)
    return vector.values, (time.perf_counter_ns() - start) / 1e6


def extract_matrix(ds: Dataset, cfg: FeatureConfig, threads: int = 1) -> FeatureMatrix:
    """
    Extract feature vectors for every record of a dataset.

    Args:
        ds: Dataset
        cfg: Feature configuration
        threads: Worker threads (extractors are pure, records independent)

    Returns:
        FeatureMatrix with per-record extraction times in milliseconds
    """
    if Extractor.CWT in cfg.enabled:
        cwt_kernel(cfg.wavelet, ds.expected_length)  # tabulate before timing starts
    jobs = [(r, cfg, ds.expected_length) for r in ds.records]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_timed_assemble, jobs))
    else:
        results = [_timed_assemble(job) for job in jobs]

    values = np.vstack([v for v, _ in results]) if results else np.zeros((0, 0))
    timings = np.array([t for _, t in results], dtype=np.float64)
    matrix = FeatureMatrix(
        record_ids=tuple(r.id for r in ds.records),
        values=values,
        labels=ds.labels(),
        config_hash=cfg.config_hash,
        extraction_ms=timings,
    )
    logger.info(
        f"Extracted {len(matrix)} x {matrix.dimension} features [{cfg.label}] "
        f"in {timings.sum():.1f} ms (mean {timings.mean():.3f} ms/record)"
    )
    return matrix
