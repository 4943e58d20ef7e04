"""Toy McEliece over a Hamming code.

    public key   G' = S G P
    encrypt      y  = x G' + r        (r has weight <= 1)
    decrypt      x  = correct(y P^-1) R S^-1

Parameters this small are trivially breakable; this is a teaching cipher.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import gf2matrix as gf2
from .gf2matrix import BitMatrix
from .hamming import HammingCode, correct

TOY_WARNING = (
    "toy cipher: McEliece over a Hamming code is NOT secure at these parameters"
)


class ToyCipherWarning(UserWarning):
    pass


def warn_toy() -> None:
    warnings.warn(TOY_WARNING, ToyCipherWarning, stacklevel=3)


@dataclass(frozen=True)
class PublicKey:
    g_prime: BitMatrix

    @property
    def k(self) -> int:
        return self.g_prime.rows

    @property
    def n(self) -> int:
        return self.g_prime.cols


@dataclass(frozen=True)
class PrivateKey:
    s: BitMatrix
    code: HammingCode
    p: BitMatrix
    s_inv: BitMatrix = field(default=None, repr=False)  # type: ignore[assignment]
    p_inv: BitMatrix = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.s.shape != (self.code.k, self.code.k):
            raise ValueError(f"S must be {self.code.k}x{self.code.k}, got {self.s.shape}")
        if self.p.shape != (self.code.n, self.code.n) or not gf2.is_permutation(self.p):
            raise ValueError("P must be an n x n permutation matrix")
        if self.s_inv is None:
            object.__setattr__(self, "s_inv", gf2.invert(self.s))
        if self.p_inv is None:
            object.__setattr__(self, "p_inv", gf2.transpose(self.p))

    def public_key(self) -> PublicKey:
        return PublicKey(gf2.mul(gf2.mul(self.s, self.code.G), self.p))


@dataclass(frozen=True)
class Ciphertext:
    y: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class DecryptTrace:
    """Intermediate values of one decryption, for display and tests."""

    unpermuted: list[int]
    error_position: Optional[int]
    corrected: list[int]
    scrambled_message: list[int]
    message: list[int]


def keypair_from_factors(
    s: BitMatrix, code: HammingCode, p: BitMatrix
) -> tuple[PublicKey, PrivateKey]:
    sk = PrivateKey(s=s, code=code, p=p)
    return sk.public_key(), sk


def keygen(code: HammingCode, rng: np.random.Generator) -> tuple[PublicKey, PrivateKey]:
    s = gf2.random_invertible(code.k, rng)
    p = gf2.random_permutation(code.n, rng)
    return keypair_from_factors(s, code, p)


def error_vector(n: int, weight: int, rng: np.random.Generator) -> list[int]:
    if weight not in (0, 1):
        raise ValueError(f"error_weight must be 0 or 1, got {weight}")
    r = [0] * n
    if weight == 1:
        r[int(rng.integers(0, n))] = 1
    return r


def encrypt(
    pk: PublicKey,
    x: Sequence[int],
    rng: Optional[np.random.Generator] = None,
    error_weight: int = 1,
    error: Optional[Sequence[int]] = None,
) -> Ciphertext:
    """Encrypt ``x``. Pass ``error`` to fix the perturbation instead of drawing it."""
    if len(x) != pk.k:
        raise ValueError(f"message must have length {pk.k}, got {len(x)}")
    if error is None:
        if error_weight and rng is None:
            raise ValueError("rng is required when error_weight > 0")
        error = error_vector(pk.n, error_weight, rng)
    elif len(error) != pk.n:
        raise ValueError(f"error vector must have length {pk.n}")
    y = gf2.add(gf2.mul(gf2.vector(x), pk.g_prime), gf2.vector(error))
    return Ciphertext(tuple(y.to_vector()))


def decrypt_trace(sk: PrivateKey, ct: Ciphertext | Sequence[int]) -> DecryptTrace:
    y = ct.y if isinstance(ct, Ciphertext) else tuple(ct)
    if len(y) != sk.code.n:
        raise ValueError(f"ciphertext must have length {sk.code.n}, got {len(y)}")
    unpermuted = gf2.mul(gf2.vector(y), sk.p_inv).to_vector()
    corrected, pos = correct(sk.code, unpermuted)
    xs = gf2.mul(gf2.vector(corrected), sk.code.R).to_vector()
    x = gf2.mul(gf2.vector(xs), sk.s_inv).to_vector()
    return DecryptTrace(unpermuted, pos, corrected, xs, x)


def decrypt(sk: PrivateKey, ct: Ciphertext | Sequence[int]) -> list[int]:
    return decrypt_trace(sk, ct).message


# Factors of the worked example; G is the standard (7,4) generator.
EXAMPLE_S = BitMatrix.from_rows(["1101", "1001", "0111", "1100"])
EXAMPLE_P = BitMatrix.from_rows(
    ["0100000", "0001000", "0000001", "1000000", "0010000", "0000010", "0000100"]
)
