#!/usr/bin/env python3
"""
Synthetic Dataset Utility for the Fall Detection Toolkit

Writes a seeded canonical dataset of fall-like and ADL-like records, and
optionally a replayable frame stream with one fall embedded in a quiet
signal, for trying the pipeline without the UniMiB-SHAR download.

Usage:
    python generate_synthetic.py --records 300 --out synthetic.csv
    python generate_synthetic.py --records 300 --out synthetic.csv --stream stream.ndjson
"""

import argparse
import json
import sys

import numpy as np

from src.data.dataset import BinaryLabel, save_canonical
from src.data.synthetic import synthetic_dataset


def write_stream(ds, path: str, seconds: float = 30.0) -> int:
    """
    Write newline-delimited JSON frames: zero signal with the first FALL
    record of ds placed in the middle.

    Returns:
        Number of frames written
    """
    falls = [r for r in ds.records if r.binary_label is BinaryLabel.FALL]
    if not falls:
        raise ValueError("dataset holds no FALL record to embed")
    fall = falls[0]
    total = int(round(seconds * ds.fs))
    samples = np.zeros((total, 3))
    start = (total - fall.length) // 2
    samples[start:start + fall.length] = fall.axes().T

    step_ms = 1000.0 / ds.fs
    with open(path, "w", encoding="utf-8") as f:
        for i, (ax, ay, az) in enumerate(samples):
            f.write(json.dumps({"t": i * step_ms, "ax": ax, "ay": ay, "az": az}) + "\n")
    return total


def main():
    """Main function to generate a synthetic dataset."""
    parser = argparse.ArgumentParser(description="Generate a synthetic canonical dataset")
    parser.add_argument("--records", type=int, default=300, help="Number of records")
    parser.add_argument("--length", type=int, default=151, help="Samples per record")
    parser.add_argument("--fs", type=float, default=50.0, help="Sampling rate in Hz")
    parser.add_argument("--fall-fraction", type=float, default=0.36, help="Share of FALL records")
    parser.add_argument("--noise", type=float, default=0.3, help="Noise standard deviation (m/s^2)")
    parser.add_argument("--seed", type=int, default=0, help="Root seed")
    parser.add_argument("--out", required=True, help="Canonical CSV to write")
    parser.add_argument("--stream", help="Also write a replay stream (NDJSON) with one embedded fall")
    args = parser.parse_args()

    try:
        ds = synthetic_dataset(
            args.records, length=args.length, fs=args.fs,
            fall_fraction=args.fall_fraction, noise=args.noise, seed=args.seed,
        )
        save_canonical(ds, args.out)
        print(f"✓ Wrote {len(ds)} records (L={ds.expected_length}, {ds.class_counts()}) to {args.out}")
        if args.stream:
            frames = write_stream(ds, args.stream)
            print(f"✓ Wrote {frames} frames to {args.stream}")
    except (ValueError, OSError) as e:
        print(f"ERROR: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
