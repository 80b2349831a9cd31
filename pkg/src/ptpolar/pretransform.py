"""Unit upper-triangular pre-transformation matrices.

The pre-transform maps the message-side vector u to v = u T before the polar
transform. T has ones on the diagonal, zeros below it, and arbitrary bits
above it, so it is always invertible and v_j depends only on u_1..u_j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2 import BitMatrix, ShapeError, as_bits, n_words, pack_rows, unpack_rows


@dataclass(frozen=True, eq=False)
class UpperTriangularT:
    N: int
    matrix: BitMatrix
    seed: int | None = None
    density: float | None = None

    def __post_init__(self):
        dense = self.matrix.to_dense()
        if dense.shape != (self.N, self.N):
            raise ShapeError(f"T must be {self.N}x{self.N}, got {dense.shape}")
        if not np.all(np.diag(dense) == 1):
            raise ValueError("T must have a unit diagonal")
        if np.any(np.tril(dense, -1)):
            raise ValueError("T must be upper-triangular")

    @classmethod
    def identity(cls, N: int) -> UpperTriangularT:
        return cls(N, BitMatrix.identity(N), seed=None, density=0.0)

    @classmethod
    def from_dense(cls, dense) -> UpperTriangularT:
        dense = np.asarray(dense, dtype=np.uint8)
        return cls(dense.shape[0], BitMatrix.from_dense(dense))

    @property
    def rows(self) -> np.ndarray:
        """Packed rows, shape (N, words)."""
        return self.matrix.packed

    @property
    def is_identity(self) -> bool:
        return self.matrix == BitMatrix.identity(self.N)

    def to_dense(self) -> np.ndarray:
        return self.matrix.to_dense()

    def to_dict(self, include_bits: bool = False) -> dict:
        out: dict = {"N": self.N, "seed": self.seed, "density": self.density}
        if include_bits or (self.seed is None and not self.is_identity):
            out["rows_hex"] = [_row_hex(r) for r in self.rows]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> UpperTriangularT:
        N = int(data["N"])
        if "rows_hex" in data:
            packed = np.array([_hex_row(h, N) for h in data["rows_hex"]], dtype=np.uint64)
            t = cls(N, BitMatrix(N, N, packed), data.get("seed"), data.get("density"))
            return t
        if data.get("seed") is None:
            return cls.identity(N)
        return sample_t(N, int(data["seed"]), float(data.get("density", 0.5)))


def _row_hex(row: np.ndarray) -> str:
    # most significant word first
    return "".join(f"{int(w):016x}" for w in row[::-1])


def _hex_row(text: str, N: int) -> np.ndarray:
    value = int(text, 16)
    words = n_words(N)
    return np.array([(value >> (64 * k)) & 0xFFFFFFFFFFFFFFFF for k in range(words)], dtype=np.uint64)


def sample_t(N: int, seed: int, density: float = 0.5) -> UpperTriangularT:
    """Random T with strict-upper entries drawn i.i.d. Bernoulli(density)."""
    if N < 1:
        raise ValueError("N must be positive")
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density {density} outside [0, 1]")
    rng = np.random.default_rng(seed)
    draws = rng.random((N, N)) < density
    dense = np.triu(draws, k=1).astype(np.uint8)
    np.fill_diagonal(dense, 1)
    return UpperTriangularT(N, BitMatrix(N, N, pack_rows(dense)), seed=seed, density=density)


def t_from_config(N: int, cfg: dict | None) -> UpperTriangularT:
    """Build T from a pre-transform descriptor (``None`` means identity)."""
    if not cfg:
        return UpperTriangularT.identity(N)
    kind = cfg.get("kind", "random")
    if kind == "identity":
        return UpperTriangularT.identity(N)
    if kind == "random":
        return sample_t(N, int(cfg["seed"]), float(cfg.get("density", 0.5)))
    if kind == "dump":
        t = UpperTriangularT.from_dict(cfg["matrix"])
        if t.N != N:
            raise ShapeError(f"stored T has N={t.N}, code needs N={N}")
        return t
    raise ValueError(f"unknown pre-transform kind {kind!r}")


def apply_t(u, T: UpperTriangularT) -> np.ndarray:
    """v = u T, i.e. v_j = u_j xor (xor over i < j of u_i T[i][j])."""
    u = as_bits(u)
    if u.size != T.N:
        raise ShapeError(f"word of length {u.size} does not match T of size {T.N}")
    sel = u.astype(bool)
    if not sel.any():
        return np.zeros(T.N, dtype=np.uint8)
    acc = np.bitwise_xor.reduce(T.rows[sel], axis=0)
    return unpack_rows(acc[None, :], T.N)[0]


def apply_t_batch(u: np.ndarray, T: UpperTriangularT) -> np.ndarray:
    """Row-wise u T for a (frames, N) array."""
    if T.is_identity:
        return np.array(u, dtype=np.uint8, copy=True)
    dense = T.to_dense().astype(np.float32)
    return (np.asarray(u, dtype=np.float32) @ dense).astype(np.int64).astype(np.uint8) & 1


def invert_t(v, T: UpperTriangularT) -> np.ndarray:
    """Recover u from v = u T by forward substitution on the unit diagonal."""
    v = as_bits(v)
    if v.size != T.N:
        raise ShapeError(f"word of length {v.size} does not match T of size {T.N}")
    rows = [int.from_bytes(r.astype("<u8").tobytes(), "little") for r in T.rows]
    u = np.zeros(T.N, dtype=np.uint8)
    acc = 0
    for j in range(T.N):
        bit = int(v[j]) ^ ((acc >> j) & 1)
        if bit:
            u[j] = 1
            acc ^= rows[j]
    return u
