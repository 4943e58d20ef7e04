"""Hamming single-error-correcting codes in row-vector convention.

A message ``x`` (length k) encodes as ``y = x G``; a clean codeword decodes as
``x = y R``; the syndrome of a received word is ``z = y H``. Row ``i`` of ``H``
is the binary encoding of ``i`` with component ``j`` weighted ``2**j``, so a
non-zero syndrome read that way is the 1-based position of a flipped bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .gf2matrix import BitMatrix, mul, vector


@dataclass(frozen=True)
class HammingCode:
    k: int
    n: int
    G: BitMatrix
    H: BitMatrix
    R: BitMatrix

    def __post_init__(self) -> None:
        if self.G.shape != (self.k, self.n):
            raise ValueError(f"G must be {self.k}x{self.n}, got {self.G.shape}")
        if self.H.shape != (self.n, self.n - self.k):
            raise ValueError(f"H must be {self.n}x{self.n - self.k}, got {self.H.shape}")
        if self.R.shape != (self.n, self.k):
            raise ValueError(f"R must be {self.n}x{self.k}, got {self.R.shape}")

    @property
    def parity_bits(self) -> int:
        return self.n - self.k


def standard_7_4() -> HammingCode:
    """The (7,4) code of the worked example, matrices verbatim."""
    G = BitMatrix.from_rows(["1110000", "1001100", "0101010", "1101001"])
    H = BitMatrix.from_rows(["100", "010", "110", "001", "101", "011", "111"])
    R = BitMatrix.from_rows(
        ["0000", "0000", "1000", "0000", "0100", "0010", "0001"]
    )
    return HammingCode(k=4, n=7, G=G, H=H, R=R)


def construct(parity_bits: int) -> HammingCode:
    """Build the (2^r - 1, 2^r - 1 - r) Hamming code.

    Parity bits sit at the power-of-two positions and data bits fill the rest
    in ascending order. For ``r = 3`` this yields exactly :func:`standard_7_4`.
    """
    r = parity_bits
    if r < 3:
        raise ValueError(f"parity_bits must be >= 3, got {r}")
    n = (1 << r) - 1
    positions = np.arange(1, n + 1)
    H = ((positions[:, None] >> np.arange(r)[None, :]) & 1).astype(np.uint8)
    data_pos = [p for p in range(1, n + 1) if p & (p - 1)]
    k = len(data_pos)

    G = np.zeros((k, n), dtype=np.uint8)
    R = np.zeros((n, k), dtype=np.uint8)
    for row, pos in enumerate(data_pos):
        G[row, pos - 1] = 1
        R[pos - 1, row] = 1
        for j in range(r):
            if (pos >> j) & 1:
                G[row, (1 << j) - 1] = 1
    return HammingCode(k=k, n=n, G=BitMatrix(G), H=BitMatrix(H), R=BitMatrix(R))


def _as_vector(bits, length: int, what: str) -> BitMatrix:
    v = bits if isinstance(bits, BitMatrix) else vector(bits)
    if v.rows != 1 or v.cols != length:
        raise ValueError(f"{what} must have length {length}, got shape {v.shape}")
    return v


def encode(code: HammingCode, x: Sequence[int] | BitMatrix) -> list[int]:
    return mul(_as_vector(x, code.k, "message"), code.G).to_vector()


def decode(code: HammingCode, y: Sequence[int] | BitMatrix) -> list[int]:
    """Strip parity from a clean codeword. Does not correct errors."""
    return mul(_as_vector(y, code.n, "codeword"), code.R).to_vector()


def syndrome(code: HammingCode, y: Sequence[int] | BitMatrix) -> list[int]:
    return mul(_as_vector(y, code.n, "codeword"), code.H).to_vector()


def syndrome_position(z: Sequence[int]) -> int:
    """Read a syndrome as an integer, component ``j`` weighted ``2**j``."""
    return sum(int(b) << j for j, b in enumerate(z))


def correct(
    code: HammingCode, y: Sequence[int] | BitMatrix
) -> tuple[list[int], Optional[int]]:
    """Fix at most one flipped bit.

    Returns the corrected word and the 1-based error position, or ``None`` if
    the syndrome was zero. Two or more flips are miscorrected silently: the
    code has minimum distance 3 and cannot tell them apart from one flip.
    """
    word = _as_vector(y, code.n, "codeword").to_vector()
    pos = syndrome_position(syndrome(code, word))
    if pos == 0:
        return word, None
    if pos > code.n:
        raise ValueError(f"syndrome points outside the codeword: {pos}")
    word[pos - 1] ^= 1
    return word, pos
