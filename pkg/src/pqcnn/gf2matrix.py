"""Dense matrices over GF(2).

Values are stored as an immutable ``uint8`` numpy array, one byte per bit.
Row vectors (messages, codewords, syndromes) are plain ``1 x n`` matrices.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class SingularMatrixError(ValueError):
    """Raised when a matrix has no inverse over GF(2)."""


class BitMatrix:
    """Immutable dense matrix with entries in {0, 1}."""

    __slots__ = ("_a",)

    def __init__(self, data) -> None:
        a = np.array(data, dtype=np.int64, copy=True)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-d array, got ndim={a.ndim}")
        if a.size and (a.min() < 0 or a.max() > 1):
            raise ValueError("BitMatrix entries must be 0 or 1")
        a = a.astype(np.uint8)
        a.setflags(write=False)
        self._a = a

    @classmethod
    def _wrap(cls, a: np.ndarray) -> "BitMatrix":
        # Trusted path: a is already a fresh uint8 0/1 array.
        obj = cls.__new__(cls)
        a.setflags(write=False)
        obj._a = a
        return obj

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int] | str]) -> "BitMatrix":
        """Build from nested sequences or from strings such as ``"0110101"``."""
        parsed = []
        for row in rows:
            if isinstance(row, str):
                row = [int(ch) for ch in row.replace(" ", "")]
            parsed.append(list(row))
        return cls(parsed)

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def bits(self) -> tuple[int, ...]:
        """Row-major flat view of the entries."""
        return tuple(int(b) for b in self._a.ravel())

    @property
    def array(self) -> np.ndarray:
        """Read-only ``uint8`` view."""
        return self._a

    def row(self, i: int) -> list[int]:
        return [int(b) for b in self._a[i]]

    def tolist(self) -> list[list[int]]:
        return self._a.astype(int).tolist()

    def to_vector(self) -> list[int]:
        if self.rows != 1:
            raise ValueError(f"not a row vector: shape {self.shape}")
        return self.row(0)

    def is_zero(self) -> bool:
        return not self._a.any()

    def __getitem__(self, idx):
        return self._a[idx]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self) -> int:
        return hash((self.shape, self._a.tobytes()))

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        return mul(self, other)

    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        return add(self, other)

    def __repr__(self) -> str:
        return f"BitMatrix({self.tolist()!r})"

    def __str__(self) -> str:
        return "\n".join(format_bits(r) for r in self._a)


def format_bits(vector) -> str:
    """Render a bit vector the way the worked examples print it: ``[1 0 0 0]``."""
    if isinstance(vector, BitMatrix):
        vector = vector.to_vector()
    return "[" + " ".join(str(int(b)) for b in vector) + "]"


def vector(bits: Sequence[int] | str) -> BitMatrix:
    """A ``1 x n`` row vector."""
    return BitMatrix.from_rows([bits])


def zeros(rows: int, cols: int) -> BitMatrix:
    return BitMatrix._wrap(np.zeros((rows, cols), dtype=np.uint8))


def identity(dim: int) -> BitMatrix:
    return BitMatrix._wrap(np.eye(dim, dtype=np.uint8))


def transpose(a: BitMatrix) -> BitMatrix:
    return BitMatrix._wrap(a.array.T.copy())


def mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Matrix product with XOR accumulation."""
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    prod = a.array.astype(np.int64) @ b.array.astype(np.int64)
    return BitMatrix._wrap((prod & 1).astype(np.uint8))


def add(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} + {b.shape}")
    return BitMatrix._wrap(a.array ^ b.array)


def _row_reduce(work: np.ndarray, ncols: int) -> int:
    """In-place Gauss-Jordan on the first ``ncols`` columns; returns the rank.

    Pivot choice is the leftmost column, then the topmost available row.
    """
    nrows = work.shape[0]
    rank = 0
    for col in range(ncols):
        if rank == nrows:
            break
        hits = np.nonzero(work[rank:, col])[0]
        if hits.size == 0:
            continue
        pivot = rank + int(hits[0])
        if pivot != rank:
            work[[rank, pivot]] = work[[pivot, rank]]
        others = np.nonzero(work[:, col])[0]
        others = others[others != rank]
        work[others] ^= work[rank]
        rank += 1
    return rank


def rank(a: BitMatrix) -> int:
    work = a.array.copy()
    return _row_reduce(work, a.cols)


def invert(a: BitMatrix) -> BitMatrix:
    """Inverse via Gauss-Jordan elimination on ``[A | I]``."""
    if a.rows != a.cols:
        raise ValueError(f"cannot invert non-square matrix of shape {a.shape}")
    n = a.rows
    work = np.concatenate([a.array, np.eye(n, dtype=np.uint8)], axis=1)
    if _row_reduce(work, n) < n:
        raise SingularMatrixError(f"{n}x{n} matrix is singular over GF(2)")
    return BitMatrix._wrap(work[:, n:].copy())


def is_invertible(a: BitMatrix) -> bool:
    return a.rows == a.cols and rank(a) == a.rows


def is_permutation(a: BitMatrix) -> bool:
    arr = a.array
    return (
        a.rows == a.cols
        and bool((arr.sum(axis=0) == 1).all())
        and bool((arr.sum(axis=1) == 1).all())
    )


def random_invertible(dim: int, rng: np.random.Generator) -> BitMatrix:
    """Uniformly random element of GL(dim, 2), by rejection sampling."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    while True:
        cand = BitMatrix._wrap(rng.integers(0, 2, size=(dim, dim), dtype=np.uint8))
        if is_invertible(cand):
            return cand


def random_permutation(dim: int, rng: np.random.Generator) -> BitMatrix:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    perm = rng.permutation(dim)
    out = np.zeros((dim, dim), dtype=np.uint8)
    out[np.arange(dim), perm] = 1
    return BitMatrix._wrap(out)
