"""Encoder and list decoder for (pre-transformed, CRC-aided) Polar/RM-Polar codes."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .construction import CodeSpec, InfoSet, select_info_set
from .crc import CrcPoly, crc_bits, crc_check_batch
from .gf2 import ShapeError, as_bits, pack_rows, polar_transform
from .pretransform import UpperTriangularT, apply_t, apply_t_batch, t_from_config

LLR_CLIP = 40.0


class DecodeInputError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Codec:
    spec: CodeSpec
    info_set: InfoSet
    T: UpperTriangularT
    poly: CrcPoly | None

    def __post_init__(self):
        if len(self.info_set.info_positions) != self.spec.k_total:
            raise ValueError("information set size differs from K + K_crc")
        if (self.poly is None) != (self.spec.K_crc == 0):
            raise ValueError("a CRC polynomial is required exactly when K_crc > 0")
        if self.poly is not None and self.poly.width != self.spec.K_crc:
            raise ValueError(f"CRC width {self.poly.width} differs from K_crc={self.spec.K_crc}")

    @classmethod
    def from_spec(cls, spec: CodeSpec) -> Codec:
        poly = None
        if spec.K_crc:
            generator = spec.crc_poly
            if generator is None:
                generator = CrcPoly.default(spec.K_crc).generator
            poly = CrcPoly(spec.K_crc, generator, spec.crc_init)
        return cls(spec, select_info_set(spec), t_from_config(spec.N, spec.pretransform), poly)

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def K(self) -> int:
        return self.spec.K

    @property
    def is_linear(self) -> bool:
        return self.poly is None or self.poly.init == 0

    @cached_property
    def info_index(self) -> np.ndarray:
        return np.array(self.info_set.info_positions, dtype=np.int64)

    @cached_property
    def frozen_mask(self) -> np.ndarray:
        mask = np.ones(self.N, dtype=np.uint8)
        mask[self.info_index] = 0
        return mask

    @cached_property
    def _use_t(self) -> bool:
        return not self.T.is_identity

    @cached_property
    def generator_rows(self) -> np.ndarray:
        """Dense generator matrix, one row per information position."""
        t_rows = self.T.to_dense()[self.info_index]
        return polar_transform(t_rows)

    def message(self, payload) -> np.ndarray:
        """Payload followed by its CRC bits (the content of the info positions)."""
        payload = as_bits(payload, self.K)
        if self.poly is None:
            return payload.copy()
        return np.concatenate([payload, crc_bits(payload, self.poly)])

    def u_from_payload(self, payload) -> np.ndarray:
        u = np.zeros(self.N, dtype=np.uint8)
        u[self.info_index] = self.message(payload)
        return u

    def encode_u(self, u) -> np.ndarray:
        return polar_transform(apply_t(u, self.T))

    def encode_u_batch(self, u: np.ndarray) -> np.ndarray:
        return polar_transform(apply_t_batch(u, self.T))

    def messages_batch(self, payloads: np.ndarray) -> np.ndarray:
        payloads = np.asarray(payloads, dtype=np.uint8)
        if self.poly is None:
            return payloads
        S = self.poly.syndrome_matrix(self.K)
        c = ((payloads.astype(np.int32) @ S.astype(np.int32)) & 1).astype(np.uint8)
        if self.poly.init:
            c ^= crc_bits(np.zeros(self.K, dtype=np.uint8), self.poly)
        return np.concatenate([payloads, c], axis=1)

    def encode_batch(self, payloads: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (u, x) for a (frames, K) payload array."""
        u = np.zeros((payloads.shape[0], self.N), dtype=np.uint8)
        u[:, self.info_index] = self.messages_batch(payloads)
        return u, self.encode_u_batch(u)

    def crc_pass(self, u_rows: np.ndarray) -> np.ndarray:
        u_rows = np.atleast_2d(u_rows)
        if self.poly is None:
            return np.ones(u_rows.shape[0], dtype=bool)
        return crc_check_batch(u_rows[:, self.info_index], self.poly)

    def payload_of(self, u) -> np.ndarray:
        return np.asarray(u)[..., self.info_index[: self.K]]


def encode(codec: Codec, payload) -> np.ndarray:
    """X = U T H_N with payload and CRC at the info positions, zeros elsewhere."""
    return codec.encode_u(codec.u_from_payload(payload))


def dynamic_frozen_value(T: UpperTriangularT, u_prefix, j: int) -> int:
    """Value v_j must take when u_j is frozen to zero (``j`` is 0-based)."""
    u_prefix = as_bits(u_prefix)
    if u_prefix.size < j:
        raise ShapeError(f"need at least {j} decided bits, got {u_prefix.size}")
    dense_col = T.to_dense()[:j, j]
    return int(np.bitwise_xor.reduce(u_prefix[:j] & dense_col)) if j else 0


@dataclass
class DecodeOutcome:
    payload: np.ndarray
    u_hat: np.ndarray
    crc_pass: bool
    selected_metric: float
    list_size_used: int
    ml_lb_flag: bool = False
    # surviving paths, best metric first
    candidates: np.ndarray = field(default=None, repr=False)
    candidate_codewords: np.ndarray = field(default=None, repr=False)
    candidate_metrics: np.ndarray = field(default=None, repr=False)
    candidate_crc: np.ndarray = field(default=None, repr=False)
    selected_index: int = 0

    @property
    def codeword(self) -> np.ndarray:
        return self.candidate_codewords[self.selected_index]


@dataclass
class ListResult:
    """Raw list-decoder output before any CRC selection."""

    u: np.ndarray
    x: np.ndarray
    metrics: np.ndarray
    metric_paths: np.ndarray | None = None


def _prepare_llrs(llrs, N: int) -> np.ndarray:
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape != (N,):
        raise ShapeError(f"expected {N} LLRs, got shape {llrs.shape}")
    if not np.all(np.isfinite(llrs)):
        raise DecodeInputError("LLRs must be finite")
    return np.clip(llrs, -LLR_CLIP, LLR_CLIP)


def list_decode(codec: Codec, llrs, L: int, trace: bool = False) -> ListResult:
    """Surviving paths of list decoding, sorted by path metric (stable)."""
    if L < 1:
        raise ValueError("list size must be at least 1")
    llr = _prepare_llrs(llrs, codec.N)
    trows = codec.T.rows if codec._use_t else np.zeros((codec.N, 1), dtype=np.uint64)
    paths, metric, parent, bits, xfinal, mtrace = _kernels.scl_core(
        llr, codec.spec.n, int(L), codec.frozen_mask, trows, codec._use_t, trace
    )
    order = np.argsort(metric[:paths], kind="stable")
    u = _kernels.backtrace(parent, bits, paths)[order]
    x = xfinal[:paths][order]
    mpaths = _kernels.backtrace_metrics(parent, mtrace, paths)[order] if trace else None
    return ListResult(u=u, x=x, metrics=metric[:paths][order], metric_paths=mpaths)


def scl_decode(codec: Codec, llrs, L: int) -> DecodeOutcome:
    """List decoding with CRC-aided selection.

    Picks the best-metric path that passes the CRC, or the best path overall
    (``crc_pass=False``) when none does.
    """
    res = list_decode(codec, llrs, L)
    ok = codec.crc_pass(res.u)
    passing = np.flatnonzero(ok)
    idx = int(passing[0]) if passing.size else 0
    u_hat = res.u[idx]
    return DecodeOutcome(
        payload=codec.payload_of(u_hat).copy(),
        u_hat=u_hat.copy(),
        crc_pass=bool(ok[idx]),
        selected_metric=float(res.metrics[idx]),
        list_size_used=int(L),
        candidates=res.u,
        candidate_codewords=res.x,
        candidate_metrics=res.metrics,
        candidate_crc=ok,
        selected_index=idx,
    )


def adaptive_scl_decode(codec: Codec, llrs, L_max: int) -> DecodeOutcome:
    """Double the list size from 1 until a path passes the CRC or L_max is reached."""
    if codec.poly is None:
        raise ValueError("adaptive list decoding needs a CRC")
    if L_max < 1 or L_max & (L_max - 1):
        raise ValueError(f"L_max={L_max} is not a power of two")
    L = 1
    while True:
        out = scl_decode(codec, llrs, L)
        if out.crc_pass or L >= L_max:
            return out
        L *= 2


def correlation_discrepancy(x: np.ndarray, llrs) -> np.ndarray:
    """ML metric for BPSK/AWGN: sum of |llr| where x disagrees with the hard decision."""
    llrs = np.asarray(llrs, dtype=np.float64)
    hard = (llrs < 0).astype(np.uint8)
    return (np.abs(llrs) * (np.atleast_2d(x) != hard)).sum(axis=1)


def genie_ml_flag(codec: Codec, outcome: DecodeOutcome, transmitted_u, llrs) -> bool:
    """True when some valid list candidate beats the transmitted codeword under ML.

    Valid means CRC-passing (every path when there is no CRC). Such a frame
    would be decoded wrongly by an ML decoder too.
    """
    transmitted_u = as_bits(transmitted_u, codec.N)
    valid = outcome.candidate_crc
    if not np.any(valid):
        return False
    x_tx = codec.encode_u(transmitted_u)
    cand = outcome.candidate_codewords[valid]
    d_cand = correlation_discrepancy(cand, llrs)
    d_tx = float(correlation_discrepancy(x_tx, llrs)[0])
    different = np.any(cand != x_tx, axis=1)
    return bool(np.any(different & (d_cand < d_tx)))
