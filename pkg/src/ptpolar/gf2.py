"""Dense GF(2) bit vectors and bit-packed matrices.

Bit words are plain ``numpy.uint8`` arrays holding 0/1. Matrices keep their
rows packed into little-endian ``uint64`` words (bit ``j`` of a row lives in
word ``j // 64`` at position ``j % 64``). Index 0 is the first position;
no bit-reversal permutation is used anywhere in this package.
"""

from __future__ import annotations

import numpy as np

MAX_KRONECKER_POWER = 20

_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


class ShapeError(ValueError):
    """Operand dimensions do not conform."""


class SizeLimitError(ValueError):
    """Requested object exceeds a configured size cap."""


def as_bits(bits, length: int | None = None) -> np.ndarray:
    """Validate and convert a sequence of 0/1 values into a bit word."""
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ShapeError(f"bit word must be one-dimensional, got shape {arr.shape}")
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError("bit word entries must be 0 or 1")
    if length is not None and arr.size != length:
        raise ShapeError(f"expected {length} bits, got {arr.size}")
    return arr.astype(np.uint8, copy=False)


def n_words(cols: int) -> int:
    return max(1, (cols + 63) // 64)


def pack_rows(dense: np.ndarray) -> np.ndarray:
    """Pack a 2-D 0/1 array into rows of little-endian uint64 words."""
    dense = np.asarray(dense, dtype=np.uint8)
    rows, cols = dense.shape
    width = n_words(cols) * 64
    padded = np.zeros((rows, width), dtype=np.uint8)
    padded[:, :cols] = dense
    packed = np.packbits(padded, axis=1, bitorder="little")
    return packed.view("<u8").astype(np.uint64).reshape(rows, -1)


def unpack_rows(packed: np.ndarray, cols: int) -> np.ndarray:
    packed = np.ascontiguousarray(packed, dtype="<u8")
    as_bytes = packed.view(np.uint8).reshape(packed.shape[0], -1)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :cols]


def popcount_rows(packed: np.ndarray) -> np.ndarray:
    as_bytes = np.ascontiguousarray(packed, dtype="<u8").view(np.uint8)
    return _POPCOUNT8[as_bytes].reshape(packed.shape[0], -1).sum(axis=1, dtype=np.int64)


class BitMatrix:
    """Immutable GF(2) matrix with bit-packed rows."""

    __slots__ = ("rows", "cols", "_packed")

    def __init__(self, rows: int, cols: int, packed: np.ndarray):
        packed = np.array(packed, dtype=np.uint64, copy=True).reshape(rows, n_words(cols))
        packed.flags.writeable = False
        self.rows = rows
        self.cols = cols
        self._packed = packed

    @classmethod
    def from_dense(cls, dense) -> BitMatrix:
        dense = np.asarray(dense)
        if dense.ndim != 2:
            raise ShapeError(f"matrix must be two-dimensional, got shape {dense.shape}")
        if dense.size and not np.all((dense == 0) | (dense == 1)):
            raise ValueError("matrix entries must be 0 or 1")
        return cls(dense.shape[0], dense.shape[1], pack_rows(dense))

    @classmethod
    def identity(cls, size: int) -> BitMatrix:
        return cls.from_dense(np.eye(size, dtype=np.uint8))

    @property
    def packed(self) -> np.ndarray:
        return self._packed

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def to_dense(self) -> np.ndarray:
        return unpack_rows(self._packed, self.cols)

    def __getitem__(self, index: tuple[int, int]) -> int:
        i, j = index
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i}, {j}) outside {self.rows}x{self.cols} matrix")
        return int((int(self._packed[i, j >> 6]) >> (j & 63)) & 1)

    def row(self, i: int) -> np.ndarray:
        return unpack_rows(self._packed[i : i + 1], self.cols)[0]

    def row_weights(self) -> np.ndarray:
        return popcount_rows(self._packed)

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        dense = self.to_dense().astype(bool)
        out = np.zeros((self.rows, n_words(other.cols)), dtype=np.uint64)
        for i in range(self.rows):
            sel = dense[i]
            if sel.any():
                out[i] = np.bitwise_xor.reduce(other.packed[sel], axis=0)
        return BitMatrix(self.rows, other.cols, out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._packed, other._packed)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._packed.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


def kronecker(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    return BitMatrix.from_dense(np.kron(a.to_dense(), b.to_dense()))


_KERNEL = np.array([[1, 0], [1, 1]], dtype=np.uint8)


def kronecker_power(n: int, max_power: int = MAX_KRONECKER_POWER) -> BitMatrix:
    """Return the 2^n x 2^n matrix F^{(x)n} with F = [[1,0],[1,1]]."""
    if n < 0:
        raise ValueError("Kronecker power must be non-negative")
    if n > max_power:
        raise SizeLimitError(f"Kronecker power {n} exceeds the limit {max_power}")
    # Row i has ones exactly at columns j with j a bit-subset of i.
    size = 1 << n
    idx = np.arange(size)
    dense = ((idx[:, None] & idx[None, :]) == idx[None, :]).astype(np.uint8)
    return BitMatrix.from_dense(dense)


def gf2_vec_mat_mul(v, m: BitMatrix) -> np.ndarray:
    """Row vector times matrix over GF(2)."""
    v = as_bits(v)
    if v.size != m.rows:
        raise ShapeError(f"vector of length {v.size} does not match {m.rows} matrix rows")
    sel = v.astype(bool)
    if not sel.any():
        return np.zeros(m.cols, dtype=np.uint8)
    acc = np.bitwise_xor.reduce(m.packed[sel], axis=0)
    return unpack_rows(acc[None, :], m.cols)[0]


def row_weight(n: int, i: int) -> int:
    """Hamming weight of row ``i`` (1-based) of F^{(x)n}."""
    size = 1 << n
    if not 1 <= i <= size:
        raise IndexError(f"row {i} outside 1..{size}")
    return 1 << bin(i - 1).count("1")


def row_weights(n: int) -> np.ndarray:
    """Weights of all rows of F^{(x)n}, indexed from 0."""
    idx = np.arange(1 << n)
    pc = np.zeros_like(idx)
    for b in range(n):
        pc += (idx >> b) & 1
    return (1 << pc).astype(np.int64)


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Compute u x F^{(x)n} for one word or a batch of words (last axis)."""
    x = np.array(u, dtype=np.uint8, copy=True)
    size = x.shape[-1]
    if size & (size - 1):
        raise ShapeError(f"length {size} is not a power of two")
    lead = x.shape[:-1]
    h = size // 2
    while h >= 1:
        view = x.reshape(*lead, size // (2 * h), 2, h)
        view[..., 0, :] ^= view[..., 1, :]
        h //= 2
    return x


def hamming_weight(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=np.uint8).sum(axis=-1, dtype=np.int64)
