"""Phoneme-probability streams, smoothing, and their file formats.

Emission CSV: header ``frame,<PH1>,...,SIL`` (inventory order), one row per
frame, values are probabilities summing to 1. Label sidecar: a
``# target=<word>`` header line, then ``phoneme,start_frame,end_frame`` rows
whose segments tile the trial, silence included.
"""

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import StreamError
from .phonemes import PhonemeInventory

SUM_TOL = 1e-9


class Segment(NamedTuple):
    phoneme: str
    start: int
    end: int  # exclusive


@dataclass(frozen=True)
class EmissionFrame:
    t: int
    probs: np.ndarray


class EmissionStream:
    def __init__(self, probs, inventory: PhonemeInventory, frame_rate_hz=100.0):
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 2 or probs.shape[1] != len(inventory):
            raise StreamError(
                f"stream shape {probs.shape} does not match inventory size {len(inventory)}"
            )
        if probs.shape[0] == 0:
            raise StreamError("empty stream")
        if (probs < 0).any():
            raise StreamError("negative probability in stream")
        sums = probs.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > SUM_TOL)
        if bad.size:
            raise StreamError(f"frame {bad[0]} probabilities sum to {sums[bad[0]]!r}")
        self.probs = probs
        self.inventory = inventory
        self.frame_rate_hz = float(frame_rate_hz)

    def __len__(self):
        return self.probs.shape[0]

    def frame(self, t) -> EmissionFrame:
        return EmissionFrame(t, self.probs[t])

    def frames(self):
        for t in range(len(self)):
            yield EmissionFrame(t, self.probs[t])


def smooth_emissions(stream: EmissionStream, alpha=0.01) -> EmissionStream:
    """Laplacian smoothing: (p + alpha) / (1 + alpha*K), K = inventory size.

    Keeps every probability strictly positive; the uniform distribution is a
    fixed point.
    """
    if alpha <= 0:
        raise StreamError(f"smoothing alpha must be > 0, got {alpha}")
    k = len(stream.inventory)
    probs = (stream.probs + alpha) / (1.0 + alpha * k)
    return EmissionStream(probs, stream.inventory, stream.frame_rate_hz)


def write_emissions_csv(stream: EmissionStream, path):
    with open(path, "w", newline="") as fh:
        _write_emissions(stream, fh)


def emissions_csv_bytes(stream: EmissionStream) -> bytes:
    buf = io.StringIO()
    _write_emissions(stream, buf)
    return buf.getvalue().encode("ascii")


def _write_emissions(stream, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["frame", *stream.inventory.symbols])
    for t in range(len(stream)):
        writer.writerow([t, *(format(p, ".17g") for p in stream.probs[t])])


def read_emissions_csv(path, inventory=None, frame_rate_hz=100.0) -> EmissionStream:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise StreamError(f"{path}: empty emission file") from None
        if not header or header[0] != "frame":
            raise StreamError(f"{path}: first column must be 'frame'")
        file_inv = PhonemeInventory(header[1:])
        if tuple(header[1:]) != file_inv.symbols:
            raise StreamError(f"{path}: SIL must be the last column")
        if inventory is not None and file_inv != inventory:
            raise StreamError(f"{path}: columns do not match the expected inventory")
        rows = []
        for i, row in enumerate(reader):
            if len(row) != len(header):
                raise StreamError(f"{path}: row {i} has {len(row)} fields")
            if int(row[0]) != i:
                raise StreamError(f"{path}: frame indices must be contiguous from 0")
            try:
                rows.append([float(x) for x in row[1:]])
            except ValueError as exc:
                raise StreamError(f"{path}: row {i}: {exc}") from None
    return EmissionStream(np.array(rows), file_inv, frame_rate_hz)


def write_labels(path, target, segments):
    with open(path, "w", newline="") as fh:
        fh.write(f"# target={target}\n")
        fh.write("phoneme,start_frame,end_frame\n")
        for seg in segments:
            fh.write(f"{seg.phoneme},{seg.start},{seg.end}\n")


def read_labels(path):
    """Returns (target word, [Segment, ...])."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("# target="):
        raise StreamError(f"{path}: missing '# target=' header")
    target = lines[0][len("# target="):]
    if len(lines) < 2 or lines[1] != "phoneme,start_frame,end_frame":
        raise StreamError(f"{path}: missing column header")
    segments = []
    for ln in lines[2:]:
        if not ln:
            continue
        parts = ln.split(",")
        if len(parts) != 3:
            raise StreamError(f"{path}: bad label row {ln!r}")
        segments.append(Segment(parts[0], int(parts[1]), int(parts[2])))
    check_tiling(segments)
    return target, segments


def check_tiling(segments):
    """Segments must be non-empty, contiguous from frame 0, each >= 1 frame."""
    if not segments:
        raise StreamError("no label segments")
    pos = 0
    for seg in segments:
        if seg.start != pos or seg.end <= seg.start:
            raise StreamError(f"segments do not tile the trial at frame {pos}")
        pos = seg.end
