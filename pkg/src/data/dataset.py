"""
Accelerometer records and the canonical dataset file format.

Canonical file: UTF-8 CSV with header
``id,activity_label,binary_label,fs,ax,ay,az`` where ax/ay/az are
``;``-separated decimal sample lists. An optional sidecar manifest
``<stem>.json`` carries ``name``, ``expected_length`` and ``units``.
"""

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..utils.errors import (
    CanonicalParseError,
    DatasetError,
    LengthMismatchError,
    UnknownLabelError,
)

logger = logging.getLogger(__name__)

CANONICAL_COLUMNS = ["id", "activity_label", "binary_label", "fs", "ax", "ay", "az"]


class BinaryLabel(str, Enum):
    """AF-2 label: activity of daily living or fall."""
    ADL = "ADL"
    FALL = "FALL"

    @classmethod
    def parse(cls, value: str) -> "BinaryLabel":
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise UnknownLabelError(f"Unknown binary label '{value}' (expected ADL or FALL)")

    @property
    def code(self) -> int:
        return 1 if self is BinaryLabel.FALL else 0

    @classmethod
    def from_code(cls, code: int) -> "BinaryLabel":
        return cls.FALL if int(code) == 1 else cls.ADL


def _normalize_activity(name: str) -> str:
    return re.sub(r"[^a-z0-9]", "", name.lower())


# Fine-grained activity vocabulary. UniMiB-SHAR short names and the longer
# descriptive event names both appear in converted files.
_FALL_ACTIVITIES = [
    "FallingForw", "FallingRight", "FallingBack", "FallingLeft",
    "HittingObstacle", "FallingWithPS", "FallingBackSC", "Syncope",
    "Falling forward", "Falling backward", "Falling with protection strategies",
    "Falling backward sitting on chair", "Hitting obstacle",
    "Soft front fall", "Soft back fall", "Soft left fall", "Soft right fall",
    "Strong front fall", "Strong back fall", "Strong left fall", "Strong right fall",
]

_ADL_ACTIVITIES = [
    "StandingUpFS", "StandingUpFL", "Walking", "Running", "GoingUpS", "Jumping",
    "GoingDownS", "LyingDownFS", "SittingDown",
    "Standing up from sitting", "Standing up from lying", "Going upstairs",
    "Going downstairs", "Lying down from standing", "Sitting down",
    "Jumping (3 times)", "Jumping (1 time)", "Lie down from sitting position",
    "Lie down from sitting position quickly", "Sitting on chair",
    "Sitting on chair quickly", "Standing up", "Standing up quickly", "Walking quickly",
]


class ActivityVocabulary:
    """Maps fine-grained activity names to AF-2 labels."""

    def __init__(self, extra_falls: Iterable[str] = (), extra_adl: Iterable[str] = ()):
        self._labels: Dict[str, BinaryLabel] = {}
        for name in list(_ADL_ACTIVITIES) + list(extra_adl):
            self._labels[_normalize_activity(name)] = BinaryLabel.ADL
        for name in list(_FALL_ACTIVITIES) + list(extra_falls):
            self._labels[_normalize_activity(name)] = BinaryLabel.FALL

    def lookup(self, activity: str) -> Optional[BinaryLabel]:
        return self._labels.get(_normalize_activity(activity))

    def resolve(self, activity: str, declared: str) -> BinaryLabel:
        """
        Apply the AF-2 rule: every fall class maps to FALL, everything else to ADL.

        Known activities must agree with the declared binary label; unknown
        activities take the declared label.

        Raises:
            UnknownLabelError: On an invalid or contradictory label
        """
        declared_label = BinaryLabel.parse(declared) if str(declared).strip() else None
        known = self.lookup(activity)
        if known is None:
            if declared_label is None:
                raise UnknownLabelError(
                    f"Unknown activity '{activity}' and no binary label given"
                )
            return declared_label
        if declared_label is not None and declared_label is not known:
            raise UnknownLabelError(
                f"Activity '{activity}' is {known.value} under AF-2 but labelled {declared_label.value}"
            )
        return known


@dataclass(frozen=True, eq=False)
class Record:
    """One labelled (or, for stream windows, unlabelled) triaxial event."""
    id: str
    ax: np.ndarray
    ay: np.ndarray
    az: np.ndarray
    fs: float
    activity_label: str = ""
    binary_label: Optional[BinaryLabel] = None

    def __post_init__(self):
        for axis in ("ax", "ay", "az"):
            object.__setattr__(self, axis, np.asarray(getattr(self, axis), dtype=np.float64))
        self.validate()

    @property
    def length(self) -> int:
        return int(self.ax.shape[0])

    def axes(self) -> np.ndarray:
        """Return the samples as a (3, L) array."""
        return np.vstack([self.ax, self.ay, self.az])

    def validate(self):
        lengths = (self.ax.size, self.ay.size, self.az.size)
        if any(a.ndim != 1 for a in (self.ax, self.ay, self.az)):
            raise LengthMismatchError("axes must be one-dimensional", self.id)
        if len(set(lengths)) != 1:
            raise LengthMismatchError(
                f"axis lengths differ (ax={lengths[0]}, ay={lengths[1]}, az={lengths[2]})", self.id
            )
        if lengths[0] < 2:
            raise LengthMismatchError(f"at least 2 samples required, got {lengths[0]}", self.id)
        if not (np.isfinite(self.fs) and self.fs > 0):
            raise DatasetError(f"record '{self.id}': sampling rate must be positive, got {self.fs}")
        if not (np.all(np.isfinite(self.ax)) and np.all(np.isfinite(self.ay))
                and np.all(np.isfinite(self.az))):
            raise DatasetError(f"record '{self.id}': samples must be finite")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable collection of equal-length records."""
    records: Tuple[Record, ...]
    name: str = "dataset"
    units: str = "m/s^2"
    expected_length: Optional[int] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if not self.records:
            raise DatasetError("dataset contains no records")
        length = self.expected_length if self.expected_length is not None else self.records[0].length
        for r in self.records:
            if r.length != length:
                raise LengthMismatchError(
                    f"has {r.length} samples, dataset expects {length}", r.id
                )
        if len({r.fs for r in self.records}) != 1:
            raise DatasetError(f"records have differing sampling rates in '{self.name}'")
        object.__setattr__(self, "expected_length", length)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def fs(self) -> float:
        return self.records[0].fs

    def labels(self) -> np.ndarray:
        """Binary labels as an int array (FALL=1, ADL=0)."""
        return np.array([r.binary_label.code for r in self.records], dtype=np.int64)

    def class_counts(self) -> Dict[str, int]:
        counts = Counter(r.binary_label.value for r in self.records)
        return {label.value: counts.get(label.value, 0) for label in BinaryLabel}

    def subset(self, indices: Sequence[int], name: Optional[str] = None) -> "Dataset":
        return Dataset(
            records=tuple(self.records[int(i)] for i in indices),
            name=name or self.name,
            units=self.units,
            expected_length=self.expected_length,
        )


def _parse_samples(text: str, axis: str, line: int) -> np.ndarray:
    parts = [p for p in str(text).strip().split(";")]
    if parts == [""]:
        return np.zeros(0, dtype=np.float64)
    try:
        return np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError as e:
        raise CanonicalParseError(f"invalid sample in column '{axis}': {e}", line)


def manifest_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_suffix(".json")


def load_canonical(path: Union[str, Path],
                   vocabulary: Optional[ActivityVocabulary] = None) -> Dataset:
    """
    Load a canonical dataset file.

    Args:
        path: Path to the canonical CSV
        vocabulary: AF-2 activity vocabulary (default built-in)

    Returns:
        Validated Dataset

    Raises:
        FileNotFoundError: If the file does not exist
        CanonicalParseError: With the offending line number
        LengthMismatchError: Naming the offending record
        UnknownLabelError: On unmappable labels
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Dataset file not found: {path}")
    vocabulary = vocabulary or ActivityVocabulary()

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        raise CanonicalParseError(str(e), int(match.group(1)) if match else None)
    except pd.errors.EmptyDataError:
        raise CanonicalParseError("file is empty", 1)

    if list(frame.columns) != CANONICAL_COLUMNS:
        raise CanonicalParseError(
            f"header must be {','.join(CANONICAL_COLUMNS)}, got {','.join(map(str, frame.columns))}", 1
        )

    missing = frame.isna().any(axis=1)
    if missing.any():
        first = int(np.flatnonzero(missing.to_numpy())[0])
        raise CanonicalParseError("row has missing fields", first + 2)

    manifest = {}
    sidecar = manifest_path(path)
    if sidecar.exists():
        try:
            manifest = json.loads(sidecar.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise CanonicalParseError(f"invalid manifest {sidecar.name}: {e}")

    records: List[Record] = []
    for offset, row in enumerate(frame.itertuples(index=False)):
        line = offset + 2  # header is line 1
        try:
            fs = float(row.fs)
        except ValueError:
            raise CanonicalParseError(f"invalid sampling rate '{row.fs}'", line)
        label = vocabulary.resolve(row.activity_label, row.binary_label)
        records.append(Record(
            id=row.id,
            ax=_parse_samples(row.ax, "ax", line),
            ay=_parse_samples(row.ay, "ay", line),
            az=_parse_samples(row.az, "az", line),
            fs=fs,
            activity_label=row.activity_label,
            binary_label=label,
        ))

    if not records:
        raise CanonicalParseError("file contains no records", 2)

    dataset = Dataset(
        records=tuple(records),
        name=manifest.get("name", path.stem),
        units=manifest.get("units", "m/s^2"),
        expected_length=manifest.get("expected_length"),
    )
    logger.info(
        f"Loaded {len(dataset)} records from {path} "
        f"(L={dataset.expected_length}, fs={dataset.fs:g} Hz, {dataset.class_counts()})"
    )
    return dataset


def _format_samples(values: np.ndarray) -> str:
    # repr() of a Python float is the shortest string that round-trips exactly
    return ";".join(repr(float(v)) for v in values)


def save_canonical(ds: Dataset, path: Union[str, Path], write_manifest: bool = True) -> Path:
    """Write a dataset in canonical format (bit-identical on reload)."""
    path = Path(path)
    rows = [{
        "id": r.id,
        "activity_label": r.activity_label,
        "binary_label": r.binary_label.value if r.binary_label else "",
        "fs": repr(float(r.fs)),
        "ax": _format_samples(r.ax),
        "ay": _format_samples(r.ay),
        "az": _format_samples(r.az),
    } for r in ds.records]
    pd.DataFrame(rows, columns=CANONICAL_COLUMNS).to_csv(path, index=False, encoding="utf-8")
    if write_manifest:
        manifest_path(path).write_text(json.dumps({
            "name": ds.name,
            "expected_length": ds.expected_length,
            "units": ds.units,
        }, indent=2), encoding="utf-8")
    logger.info(f"Wrote {len(ds)} records to {path}")
    return path
