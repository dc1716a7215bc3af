"""Ternary ReRAM PUF model: thresholds, 0/X/1 classification, masking and responses.

Cells are described by repeated R_on readings. Enrollment thresholds split the
pooled reading range into thirds; cells whose mean falls in the middle third
are marked X and excluded from key material.
"""
from __future__ import annotations

import csv
import math
import zlib
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np

from .rng import stream


class CellState(IntEnum):
    ZERO = 0
    ONE = 1
    X = 2


@dataclass
class CellMeasurementSet:
    cell_ids: np.ndarray
    readings: list[np.ndarray]
    source: str = "measured"

    def __post_init__(self):
        self.cell_ids = np.asarray(self.cell_ids, dtype=np.int64)
        self.readings = [np.asarray(r, dtype=np.float64) for r in self.readings]
        if len(self.readings) != len(self.cell_ids):
            raise ValueError("one reading list per cell required")
        for cid, r in zip(self.cell_ids, self.readings):
            if r.size == 0:
                raise ValueError(f"cell {cid} has no readings")
            if np.any(r <= 0):
                raise ValueError(f"cell {cid} has non-positive readings")

    @property
    def num_cells(self) -> int:
        return len(self.readings)

    def means(self) -> np.ndarray:
        return np.array([r.mean() for r in self.readings])

    def pooled(self) -> np.ndarray:
        return np.concatenate(self.readings)


@dataclass(frozen=True)
class TernaryProfile:
    t1: float
    t2: float
    states: np.ndarray = field(compare=False)
    mask: tuple[int, ...]

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.t1 + self.t2)


@dataclass(frozen=True)
class PufResponse:
    bits: np.ndarray = field(compare=False)
    mask_checksum: int

    def __eq__(self, other):
        return (
            isinstance(other, PufResponse)
            and self.mask_checksum == other.mask_checksum
            and np.array_equal(self.bits, other.bits)
        )

    def __len__(self):
        return int(self.bits.size)


class InsufficientCells(ValueError):
    pass


def mask_checksum(mask) -> int:
    return zlib.crc32(np.asarray(mask, dtype="<u2").tobytes()) & 0xFFFFFFFF


def compute_thresholds(cells: CellMeasurementSet) -> tuple[float, float]:
    pooled = cells.pooled()
    lo, hi = float(pooled.min()), float(pooled.max())
    if hi <= lo:
        raise ValueError("degenerate reading range; cannot place thresholds")
    span = hi - lo
    return lo + span / 3.0, lo + 2.0 * span / 3.0


def classify_cells(cells: CellMeasurementSet, t1: float, t2: float) -> TernaryProfile:
    if not t1 < t2:
        raise ValueError("t1 must be below t2")
    ref = cells.means()
    states = np.full(ref.size, CellState.X, dtype=np.uint8)
    states[ref < t1] = CellState.ZERO
    states[ref > t2] = CellState.ONE
    mask = tuple(int(i) for i in np.flatnonzero(states != CellState.X))
    return TernaryProfile(float(t1), float(t2), states, mask)


def profile(cells: CellMeasurementSet) -> TernaryProfile:
    return classify_cells(cells, *compute_thresholds(cells))


def extract_response(
    cells: CellMeasurementSet, prof: TernaryProfile, reading_index: int | None, width: int
) -> PufResponse:
    """Bits of the first ``width`` masked cells.

    ``reading_index=None`` uses each cell's enrollment mean. Any single read is
    compared against the band midpoint, since it may land inside the X band.
    """
    if width > len(prof.mask):
        raise InsufficientCells(f"need {width} stable cells, only {len(prof.mask)} masked")
    chosen = prof.mask[:width]
    vals = np.empty(width)
    for j, c in enumerate(chosen):
        r = cells.readings[c]
        if reading_index is None:
            vals[j] = r.mean()
        else:
            if not -r.size <= reading_index < r.size:
                raise IndexError(f"cell {cells.cell_ids[c]} has no reading {reading_index}")
            vals[j] = r[reading_index]
    bits = (vals > prof.midpoint).astype(np.uint8)
    return PufResponse(bits, mask_checksum(chosen))


@dataclass(frozen=True)
class CellModel:
    """Synthetic population. ``lobe_offset = 0`` gives a single normal population."""

    pop_mean: float = 10_000.0
    pop_sd: float = 1_000.0
    read_sd: float = 700.0
    lobe_offset: float = 3_000.0

    def __post_init__(self):
        if self.pop_mean <= 0 or self.pop_sd <= 0 or self.read_sd < 0 or self.lobe_offset < 0:
            raise ValueError("cell model parameters must be positive")


DEFAULT_MODEL = CellModel()


def simulate_cells(
    num_cells: int, num_readings: int, model: CellModel = DEFAULT_MODEL, seed: int = 0
) -> CellMeasurementSet:
    if num_cells < 1 or num_readings < 1:
        raise ValueError("need at least one cell and one reading")
    rng = stream(seed, 0)
    lobes = rng.choice((-1.0, 1.0), size=num_cells) if model.lobe_offset else np.zeros(num_cells)
    means = model.pop_mean + lobes * model.lobe_offset + rng.normal(0.0, model.pop_sd, num_cells)
    means = np.maximum(means, model.pop_mean * 1e-3)
    reads = means[:, None] + rng.normal(0.0, model.read_sd, (num_cells, num_readings))
    # redraw the rare non-positive readings (truncation at zero)
    bad = reads <= 0
    while bad.any():
        reads[bad] = np.repeat(means[:, None], num_readings, 1)[bad] + rng.normal(
            0.0, model.read_sd, int(bad.sum())
        )
        bad = reads <= 0
    return CellMeasurementSet(np.arange(num_cells), list(reads), source=f"synthetic(seed={seed})")


def predicted_flip_rates(cells: CellMeasurementSet, prof: TernaryProfile, model: CellModel,
                         width: int) -> np.ndarray:
    """Per-bit probability that two independent reads of a masked cell disagree.

    Uses the generator's own read-noise model around each cell's sample mean.
    """
    mid = prof.midpoint
    out = np.empty(width)
    for j, c in enumerate(prof.mask[:width]):
        mu = cells.readings[c].mean()
        if model.read_sd == 0:
            q = 0.0
        else:
            q = 0.5 * math.erfc(abs(mu - mid) / (model.read_sd * math.sqrt(2)))
        out[j] = 2 * q * (1 - q)
    return out


def flip_bits(resp: PufResponse, p: float, seed: int) -> PufResponse:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be a probability")
    flips = stream(seed, 1).random(resp.bits.size) < p
    return PufResponse((resp.bits ^ flips).astype(np.uint8), resp.mask_checksum)


def make_attacker_response(width: int, reference: PufResponse, min_inter_hd: float, seed: int,
                           max_tries: int = 100_000) -> PufResponse:
    """Uniform response, resampled until it differs from ``reference`` in enough places."""
    if not 0.0 <= min_inter_hd <= 1.0:
        raise ValueError("min_inter_hd must lie in [0, 1]")
    if width != reference.bits.size:
        raise ValueError("width must match the reference response")
    need = math.ceil(min_inter_hd * width - 1e-9)
    if need >= width:
        return PufResponse((1 - reference.bits).astype(np.uint8), reference.mask_checksum)
    rng = stream(seed, 2)
    for _ in range(max_tries):
        bits = rng.integers(0, 2, width, dtype=np.uint8)
        if int(np.count_nonzero(bits != reference.bits)) >= need:
            return PufResponse(bits, reference.mask_checksum)
    raise RuntimeError("could not draw an attacker response at the requested distance")


def read_measurements_csv(path) -> CellMeasurementSet:
    """Load ``cell_id,reading_index,r_on_ohms[,v_set_volts]``; V_set is ignored."""
    rows: dict[int, dict[int, float]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"cell_id", "reading_index", "r_on_ohms"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ValueError(f"CSV header must contain {sorted(need)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                cid = int(row["cell_id"])
                ri = int(row["reading_index"])
                r = float(row["r_on_ohms"])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            rows.setdefault(cid, {})[ri] = r
    if not rows:
        raise ValueError(f"{path}: no measurements")
    ids = sorted(rows)
    readings = [np.array([rows[c][k] for k in sorted(rows[c])]) for c in ids]
    return CellMeasurementSet(np.array(ids), readings, source=f"measured({Path(path).name})")


def write_measurements_csv(cells: CellMeasurementSet, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell_id", "reading_index", "r_on_ohms"])
        for cid, r in zip(cells.cell_ids, cells.readings):
            for k, v in enumerate(r):
                w.writerow([int(cid), k, repr(float(v))])
