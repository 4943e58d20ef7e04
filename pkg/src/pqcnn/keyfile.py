"""Text formats for keys and ciphertexts.

Every key file starts with ``PQCNN-KEY v1`` and a kind line. McEliece keys
store 0/1 rows as character strings; network keys store real weights as
space-separated decimals with 17 significant digits, which round-trips
float64 exactly.

    PQCNN-KEY v1                      PQCNN-KEY v1
    mceliece-public                   pqcnn-encrypt
    dims k=4 n=7                      config c=4 n=7 m=4 alpha=0.4 activations=tanh,tanh,sigmoid
    matrix g_prime 4 7                W 4 4
    0110101                           0.12 -0.5 ...
    ...                               ...

Ciphertexts from the network cipher use ``PQCNN-CT v1``, then ``n=``,
``alpha=``, then one line of ``n`` decimals per ciphertext.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np

from .gf2matrix import BitMatrix
from .hamming import HammingCode
from .mceliece import PrivateKey, PublicKey
from .model import DecryptKey, EncryptKey, KeyKindError
from .neuralnet import DenseLayer

KEY_MAGIC = "PQCNN-KEY"
CT_MAGIC = "PQCNN-CT"
VERSION = "v1"

KIND_MCELIECE_PUBLIC = "mceliece-public"
KIND_MCELIECE_PRIVATE = "mceliece-private"
KIND_PQCNN_ENCRYPT = "pqcnn-encrypt"
KIND_PQCNN_DECRYPT = "pqcnn-decrypt"
KINDS = (KIND_MCELIECE_PUBLIC, KIND_MCELIECE_PRIVATE, KIND_PQCNN_ENCRYPT, KIND_PQCNN_DECRYPT)

Key = Union[PublicKey, PrivateKey, EncryptKey, DecryptKey]

_PRIVATE_SECTIONS = ("S", "G", "H", "R", "P")


class KeyFileError(ValueError):
    """Malformed key or ciphertext file."""

    def __init__(self, message: str, lineno: Optional[int] = None, path=None) -> None:
        where = ""
        if path is not None:
            where += f"{path}: "
        if lineno is not None:
            where += f"line {lineno}: "
        super().__init__(where + message)
        self.lineno = lineno


class UnsupportedVersionError(KeyFileError):
    pass


def fmt_real(v: float) -> str:
    return format(float(v), ".17g")


def key_kind(key: Key) -> str:
    if isinstance(key, PublicKey):
        return KIND_MCELIECE_PUBLIC
    if isinstance(key, PrivateKey):
        return KIND_MCELIECE_PRIVATE
    if isinstance(key, EncryptKey):
        return KIND_PQCNN_ENCRYPT
    if isinstance(key, DecryptKey):
        return KIND_PQCNN_DECRYPT
    raise TypeError(f"not a key: {type(key).__name__}")


def _bit_rows(name: str, m: BitMatrix) -> list[str]:
    lines = [f"matrix {name} {m.rows} {m.cols}"]
    lines += ["".join(str(int(b)) for b in row) for row in m.array]
    return lines


def _weight_rows(w: np.ndarray) -> list[str]:
    lines = [f"W {w.shape[0]} {w.shape[1]}"]
    lines += [" ".join(fmt_real(v) for v in row) for row in w]
    return lines


def _config_line(key) -> str:
    c, n = key.c, key.n
    acts = ",".join(layer.activation for layer in key.layers)
    return f"config c={c} n={n} m={key.m} alpha={fmt_real(key.alpha)} activations={acts}"


def dumps_key(key: Key) -> str:
    kind = key_kind(key)
    lines = [f"{KEY_MAGIC} {VERSION}", kind]
    if isinstance(key, PublicKey):
        lines.append(f"dims k={key.k} n={key.n}")
        lines += _bit_rows("g_prime", key.g_prime)
    elif isinstance(key, PrivateKey):
        lines.append(f"dims k={key.code.k} n={key.code.n}")
        for name, m in zip(
            _PRIVATE_SECTIONS, (key.s, key.code.G, key.code.H, key.code.R, key.p)
        ):
            lines += _bit_rows(name, m)
    else:
        lines.append(_config_line(key))
        for layer in key.layers:
            lines += _weight_rows(layer.weights)
    return "\n".join(lines) + "\n"


class _Lines:
    """Line cursor that remembers positions for error messages."""

    def __init__(self, text: str, path=None) -> None:
        self.lines = text.splitlines()
        self.pos = 0
        self.path = path

    def error(self, message: str, lineno: Optional[int] = None) -> KeyFileError:
        return KeyFileError(message, lineno if lineno is not None else self.pos, self.path)

    def next(self, what: str) -> str:
        while self.pos < len(self.lines):
            line = self.lines[self.pos].strip()
            self.pos += 1
            if line:
                return line
        raise KeyFileError(
            f"file truncated: missing {what}", len(self.lines) + 1, self.path
        )

    def rest(self) -> Iterator[tuple[int, str]]:
        while self.pos < len(self.lines):
            line = self.lines[self.pos].strip()
            self.pos += 1
            if line:
                yield self.pos, line


def _header(cur: _Lines, magic: str) -> None:
    first = cur.next("header")
    parts = first.split()
    if not parts or parts[0] != magic:
        raise cur.error(f"expected header '{magic} {VERSION}', got {first!r}")
    if len(parts) != 2 or parts[1] != VERSION:
        raise UnsupportedVersionError(
            f"unsupported version {first!r}; this build reads {magic} {VERSION}",
            cur.pos,
            cur.path,
        )


def _fields(cur: _Lines, line: str, prefix: str) -> dict[str, str]:
    parts = line.split()
    if not parts or parts[0] != prefix:
        raise cur.error(f"expected '{prefix} ...' line, got {line!r}")
    out = {}
    for item in parts[1:]:
        if "=" not in item:
            raise cur.error(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = v
    return out


def _int_field(cur: _Lines, fields: dict, name: str) -> int:
    try:
        return int(fields[name])
    except (KeyError, ValueError):
        raise cur.error(f"missing or invalid {name!r}") from None


def _read_bits(cur: _Lines, name: str) -> BitMatrix:
    line = cur.next(f"matrix {name}")
    parts = line.split()
    if len(parts) != 4 or parts[0] != "matrix" or parts[1] != name:
        raise cur.error(f"expected 'matrix {name} <rows> <cols>', got {line!r}")
    try:
        rows, cols = int(parts[2]), int(parts[3])
    except ValueError:
        raise cur.error(f"bad dimensions in {line!r}") from None
    data = []
    for i in range(rows):
        row = cur.next(f"row {i + 1} of matrix {name}")
        if len(row) != cols or set(row) - {"0", "1"}:
            raise cur.error(f"matrix {name} row {i + 1} must be {cols} characters of 0/1")
        data.append([int(ch) for ch in row])
    return BitMatrix(np.array(data, dtype=np.uint8).reshape(rows, cols))


def _read_weights(cur: _Lines, index: int, count: int) -> np.ndarray:
    what = f"weight section {index} of {count}"
    line = cur.next(what)
    parts = line.split()
    if len(parts) != 3 or parts[0] != "W":
        raise cur.error(f"expected 'W <rows> <cols>' for {what}, got {line!r}")
    try:
        rows, cols = int(parts[1]), int(parts[2])
    except ValueError:
        raise cur.error(f"bad dimensions in {line!r}") from None
    w = np.empty((rows, cols))
    for i in range(rows):
        vals = cur.next(f"row {i + 1} of {what}").split()
        if len(vals) != cols:
            raise cur.error(f"{what} row {i + 1} has {len(vals)} values, expected {cols}")
        try:
            w[i] = [float(v) for v in vals]
        except ValueError:
            raise cur.error(f"non-numeric weight in {what} row {i + 1}") from None
    return w


def loads_key(text: str, expect: Optional[str] = None, path=None) -> Key:
    """Parse a key; with ``expect`` set, a different kind raises :class:`KeyKindError`."""
    cur = _Lines(text, path)
    _header(cur, KEY_MAGIC)
    kind = cur.next("kind line")
    if kind not in KINDS:
        raise cur.error(f"unknown key kind {kind!r}")
    if expect is not None and kind != expect:
        raise KeyKindError(f"{path or 'key'}: expected a {expect} key, got {kind}")

    if kind in (KIND_MCELIECE_PUBLIC, KIND_MCELIECE_PRIVATE):
        dims = _fields(cur, cur.next("dims line"), "dims")
        k, n = _int_field(cur, dims, "k"), _int_field(cur, dims, "n")
        if kind == KIND_MCELIECE_PUBLIC:
            g_prime = _read_bits(cur, "g_prime")
            if g_prime.shape != (k, n):
                raise cur.error(f"g_prime is {g_prime.shape}, dims say {(k, n)}")
            key: Key = PublicKey(g_prime)
        else:
            s, g, h, r, p = (_read_bits(cur, name) for name in _PRIVATE_SECTIONS)
            try:
                key = PrivateKey(s=s, code=HammingCode(k=k, n=n, G=g, H=h, R=r), p=p)
            except ValueError as exc:
                raise cur.error(f"inconsistent private key: {exc}") from None
    else:
        cfg = _fields(cur, cur.next("config line"), "config")
        acts = cfg.get("activations", "").split(",")
        if len(acts) != 3:
            raise cur.error("config must list three activations")
        weights = [_read_weights(cur, i + 1, 3) for i in range(3)]
        layers = [DenseLayer(w, a) for w, a in zip(weights, acts)]
        try:
            alpha = float(cfg["alpha"])
            m = int(cfg.get("m", 0))
            if kind == KIND_PQCNN_ENCRYPT:
                key = EncryptKey(layers, alpha=alpha, m=m)
            else:
                key = DecryptKey(layers, alpha=alpha, m=m)
        except (KeyError, ValueError) as exc:
            raise cur.error(f"invalid network key: {exc}") from None
    for lineno, line in cur.rest():
        raise KeyFileError(f"unexpected trailing content {line[:40]!r}", lineno, path)
    return key


def save_key(key: Key, path, force: bool = False) -> None:
    _write(path, dumps_key(key), force)


def load_key(path, expect: Optional[str] = None) -> Key:
    return loads_key(Path(path).read_text(encoding="utf-8"), expect=expect, path=path)


@dataclass
class CiphertextFile:
    alpha: float
    values: np.ndarray  # shape (count, n)

    @property
    def n(self) -> int:
        return self.values.shape[1]


def dumps_ciphertext(values, alpha: float) -> str:
    arr = np.atleast_2d(np.asarray(values, dtype=float))
    lines = [f"{CT_MAGIC} {VERSION}", f"n={arr.shape[1]}", f"alpha={fmt_real(alpha)}"]
    lines += [" ".join(fmt_real(v) for v in row) for row in arr]
    return "\n".join(lines) + "\n"


def loads_ciphertext(text: str, path=None) -> CiphertextFile:
    cur = _Lines(text, path)
    _header(cur, CT_MAGIC)
    n_line = cur.next("n line")
    a_line = cur.next("alpha line")
    try:
        if not n_line.startswith("n="):
            raise ValueError
        n = int(n_line[2:])
        if not a_line.startswith("alpha="):
            raise ValueError
        alpha = float(a_line[6:])
    except ValueError:
        raise cur.error("expected 'n=<int>' and 'alpha=<real>' lines") from None
    rows = []
    for lineno, line in cur.rest():
        vals = line.split()
        if len(vals) != n:
            raise KeyFileError(f"ciphertext has {len(vals)} values, expected {n}", lineno, path)
        try:
            rows.append([float(v) for v in vals])
        except ValueError:
            raise KeyFileError("non-numeric ciphertext value", lineno, path) from None
    if not rows:
        raise KeyFileError("file truncated: missing ciphertext values", len(cur.lines) + 1, path)
    if math.isnan(alpha) or alpha < 0:
        raise KeyFileError("alpha must be a non-negative number", 3, path)
    return CiphertextFile(alpha, np.array(rows))


def save_ciphertext(values, alpha: float, path, force: bool = False) -> None:
    _write(path, dumps_ciphertext(values, alpha), force)


def load_ciphertext(path) -> CiphertextFile:
    return loads_ciphertext(Path(path).read_text(encoding="utf-8"), path=path)


def _write(path, text: str, force: bool) -> None:
    p = Path(path)
    if p.exists() and not force:
        raise FileExistsError(f"{p} exists; pass force=True (--force) to overwrite")
    p.write_text(text, encoding="utf-8")
