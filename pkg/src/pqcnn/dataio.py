"""Signal datasets: CSV ingestion and a synthetic received-signal generator."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    rows: np.ndarray
    provenance: str = ""

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            raise ValueError("dataset rows must form a 2-d table")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def c(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]

    def split(self, fraction: float, rng: np.random.Generator) -> tuple["Dataset", "Dataset"]:
        """Shuffle and split into (train, held-out) with ``fraction`` held out."""
        idx = rng.permutation(len(self))
        n_hold = max(1, int(round(fraction * len(self))))
        if n_hold >= len(self):
            raise ValueError("split leaves no training rows")
        return (
            Dataset(self.rows[idx[n_hold:]], self.provenance + "[train]"),
            Dataset(self.rows[idx[:n_hold]], self.provenance + "[held-out]"),
        )


def minmax_columns(table: np.ndarray) -> np.ndarray:
    """Scale each column to [0, 1]; constant columns become 0.5."""
    lo = table.min(axis=0)
    span = table.max(axis=0) - lo
    out = np.full_like(table, 0.5, dtype=float)
    live = span > 0
    out[:, live] = (table[:, live] - lo[live]) / span[live]
    return out


def read_table(path: str | Path, has_header: bool = False) -> np.ndarray:
    rows: list[list[float]] = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if has_header and lineno == 1:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise DataFormatError(
                    f"{path}: row {lineno} has {len(record)} fields, expected {width}"
                )
            try:
                rows.append([float(cell) for cell in record])
            except ValueError:
                col = next(i for i, cell in enumerate(record, 1) if not _is_float(cell))
                raise DataFormatError(
                    f"{path}: non-numeric value {record[col - 1]!r} at row {lineno}, column {col}"
                ) from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path: str | Path, has_header: bool = False, scale: bool = True) -> Dataset:
    table = read_table(path, has_header)
    if scale:
        table = minmax_columns(table)
    return Dataset(table, provenance=f"csv:{path}")


def synthetic_cellular(
    samples: int,
    c: int,
    rng: np.random.Generator,
    active_fraction: float = 0.05,
    noise: float = 0.01,
) -> Dataset:
    """Received signal strengths at ``c`` stations for random handset positions.

    Stations sit on a ring; a handset hears the nearest few (about
    ``active_fraction`` of them) with strength decaying from a peak, and the
    rest read as a small noise floor. Values are clipped to [0, 1].
    """
    if samples < 1 or c < 2:
        raise ValueError("need samples >= 1 and c >= 2")
    stations = np.arange(c)
    reach = max(1.0, active_fraction * c / 2.0)
    pos = rng.uniform(0.0, c, size=samples)
    peak = rng.uniform(0.6, 1.0, size=samples)
    dist = np.abs(pos[:, None] - stations[None, :])
    dist = np.minimum(dist, c - dist)
    signal = peak[:, None] * np.exp(-((dist / reach) ** 2))
    signal[dist > 2.0 * reach] = 0.0
    floor = np.abs(rng.normal(0.0, noise, size=(samples, c)))
    rows = np.clip(signal + floor, 0.0, 1.0)
    return Dataset(rows, provenance=f"synthetic:samples={samples},c={c}")
