"""
Seeded synthetic accelerometer records.

Falls are modelled as upright posture, a short impact spike, then lying
posture (gravity moved to another axis). ADL are periodic gait-like
oscillations around upright posture with activity-dependent amplitude.
"""

from typing import Optional

import numpy as np

from .dataset import BinaryLabel, Dataset, Record
from ..utils.seeding import stream

GRAVITY = 9.81

ADL_PROFILES = {
    # activity: (amplitude m/s^2, frequency Hz)
    "Walking": (2.0, 1.8),
    "Running": (6.0, 2.8),
    "Jumping": (8.0, 1.2),
    "SittingDown": (1.0, 0.5),
}

FALL_ACTIVITIES = ["FallingForw", "FallingBack", "FallingLeft", "FallingRight"]


def _adl_record(rng: np.random.Generator, idx: int, activity: str, length: int,
                fs: float, noise: float) -> Record:
    amplitude, freq = ADL_PROFILES[activity]
    t = np.arange(length) / fs
    phase = rng.uniform(0, 2 * np.pi)
    freq = freq * rng.uniform(0.85, 1.15)
    ax = 0.3 * amplitude * np.sin(2 * np.pi * freq * t + phase)
    ay = 0.2 * amplitude * np.cos(2 * np.pi * freq * t + phase)
    az = GRAVITY + amplitude * np.sin(2 * np.pi * 2 * freq * t + phase)
    jitter = rng.normal(0.0, noise, size=(3, length))
    return Record(
        id=f"syn-{idx:06d}", ax=ax + jitter[0], ay=ay + jitter[1], az=az + jitter[2],
        fs=fs, activity_label=activity, binary_label=BinaryLabel.ADL,
    )


def _fall_record(rng: np.random.Generator, idx: int, activity: str, length: int,
                 fs: float, noise: float) -> Record:
    impact = int(rng.integers(length // 4, length // 2))
    spike_width = max(2, int(0.1 * fs))
    peak = rng.uniform(2.5, 4.0) * GRAVITY
    axes = np.zeros((3, length))
    axes[2, :impact] = GRAVITY
    lying_axis = {"FallingForw": 0, "FallingBack": 0, "FallingLeft": 1, "FallingRight": 1}[activity]
    sign = -1.0 if activity in ("FallingBack", "FallingLeft") else 1.0
    axes[lying_axis, impact:] = sign * GRAVITY
    spike = peak * np.hanning(2 * spike_width + 1)
    lo, hi = max(0, impact - spike_width), min(length, impact + spike_width + 1)
    axes[2, lo:hi] += spike[spike_width - (impact - lo): spike_width + (hi - impact)]
    axes += rng.normal(0.0, noise, size=(3, length))
    return Record(
        id=f"syn-{idx:06d}", ax=axes[0], ay=axes[1], az=axes[2],
        fs=fs, activity_label=activity, binary_label=BinaryLabel.FALL,
    )


def synthetic_dataset(n_records: int, length: int = 151, fs: float = 50.0,
                      fall_fraction: float = 0.36, noise: float = 0.3,
                      seed: int = 0, name: Optional[str] = None) -> Dataset:
    """
    Generate a labelled synthetic dataset.

    Args:
        n_records: Number of records (at least 2 so both classes appear)
        length: Samples per record
        fs: Sampling rate in Hz
        fall_fraction: Share of FALL records
        noise: Gaussian noise standard deviation in m/s^2
        seed: Root seed
        name: Dataset name

    Returns:
        Dataset with both labels present
    """
    if n_records < 2:
        raise ValueError("n_records must be at least 2")
    rng = stream(seed, "synthetic")
    n_falls = min(n_records - 1, max(1, int(round(n_records * fall_fraction))))
    is_fall = np.zeros(n_records, dtype=bool)
    is_fall[rng.choice(n_records, size=n_falls, replace=False)] = True
    adl_names = list(ADL_PROFILES)

    records = []
    for idx in range(n_records):
        if is_fall[idx]:
            activity = FALL_ACTIVITIES[int(rng.integers(len(FALL_ACTIVITIES)))]
            records.append(_fall_record(rng, idx, activity, length, fs, noise))
        else:
            activity = adl_names[int(rng.integers(len(adl_names)))]
            records.append(_adl_record(rng, idx, activity, length, fs, noise))
    return Dataset(records=tuple(records), name=name or f"synthetic-{seed}", expected_length=length)


def blob_dataset(n_records: int, length: int = 20, fs: float = 50.0, separation: float = 50.0,
                 spread: float = 1.0, seed: int = 0) -> Dataset:
    """
    Two Gaussian blobs in sample space: every ADL sample is drawn around 0,
    every FALL sample around ``separation``. Distance between classes grows
    with separation/spread, which makes the classes trivially separable
    when separation is large.
    """
    rng = stream(seed, "blobs")
    records = []
    for idx in range(n_records):
        label = BinaryLabel.FALL if idx % 2 else BinaryLabel.ADL
        centre = separation if label is BinaryLabel.FALL else 0.0
        axes = rng.normal(centre, spread, size=(3, length))
        records.append(Record(
            id=f"blob-{idx:04d}", ax=axes[0], ay=axes[1], az=axes[2], fs=fs,
            activity_label="Blob" + label.value, binary_label=label,
        ))
    return Dataset(records=tuple(records), name=f"blobs-{seed}", expected_length=length)
