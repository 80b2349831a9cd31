"""Minimum-distance spectra and the finite-blocklength reference curve."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from . import _kernels
from .codec import LLR_CLIP, Codec, list_decode
from .gf2 import SizeLimitError, hamming_weight, pack_rows

BRUTE_FORCE_CAP = 24

log = logging.getLogger(__name__)


class LinearityError(ValueError):
    """The code is affine (non-zero CRC preload), so all-zero is not a codeword."""


@dataclass(frozen=True)
class SpectrumEstimate:
    d_min: int
    n_min: int
    n_min_crc: int | None
    method: str
    exact: bool
    list_size: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _crc_syndromes(codec: Codec) -> np.ndarray:
    """Per message bit: its contribution to (recomputed CRC xor received CRC)."""
    k = codec.spec.k_total
    syn = np.zeros(k, dtype=np.int64)
    if codec.poly is None:
        return syn
    w = codec.poly.width
    S = codec.poly.syndrome_matrix(codec.K)
    weights = 1 << np.arange(w - 1, -1, -1, dtype=np.int64)
    syn[: codec.K] = S.astype(np.int64) @ weights
    syn[codec.K :] = weights
    return syn


def brute_force_spectrum(codec: Codec, cap: int = BRUTE_FORCE_CAP) -> SpectrumEstimate:
    """Exact (d_min, N_min, N*_min) by walking all 2^(K+K_crc) messages."""
    k = codec.spec.k_total
    if k > cap:
        raise SizeLimitError(f"K + K_crc = {k} exceeds the enumeration cap {cap}")
    if not codec.is_linear:
        raise LinearityError("spectrum enumeration needs a CRC preload of zero")
    gen = pack_rows(codec.generator_rows)
    d, count, count_crc = _kernels.gray_enumerate(gen, _crc_syndromes(codec), codec.poly is not None)
    return SpectrumEstimate(
        d_min=int(d),
        n_min=int(count),
        n_min_crc=int(count_crc) if codec.poly is not None else None,
        method="exhaustive",
        exact=True,
    )


def _unique_rows(x: np.ndarray) -> np.ndarray:
    packed = np.packbits(x, axis=1)
    _, first = np.unique(packed, axis=0, return_index=True)
    return np.sort(first)


def list_probe_spectrum(codec: Codec, L: int) -> SpectrumEstimate:
    """Estimate the low end of the spectrum from the list of the all-zero word.

    All channel LLRs are set to the clip level (noise-free all-zero codeword);
    every one of the L terminal paths is re-encoded and the lightest nonzero
    codewords are counted. Values are exact once L >= 2^(K+K_crc).
    """
    if not codec.is_linear:
        raise LinearityError("list probing needs a CRC preload of zero")
    res = list_decode(codec, np.full(codec.N, LLR_CLIP), L)
    u = res.u
    x = codec.encode_u_batch(u)
    keep = _unique_rows(x)
    u, x = u[keep], x[keep]
    w = hamming_weight(x)
    nonzero = w > 0
    if not nonzero.any():
        raise ValueError("list holds no nonzero codeword; increase L")
    d = int(w[nonzero].min())
    at_min = w == d
    n_crc = None
    if codec.poly is not None:
        n_crc = int(codec.crc_pass(u[at_min]).sum())
    exhaustive = L >= (1 << codec.spec.k_total)
    if not exhaustive and at_min.sum() == nonzero.sum():
        log.warning("every nonzero list entry has weight %d; n_min is only a lower bound, increase L", d)
    return SpectrumEstimate(
        d_min=d,
        n_min=int(at_min.sum()),
        n_min_crc=n_crc,
        method="exhaustive" if exhaustive else "list-probe",
        exact=exhaustive,
        list_size=int(L),
    )


def crc_filtered_nmin(codec: Codec, L: int | None = None) -> SpectrumEstimate:
    """Minimum-weight codewords of the inner code and how many pass the CRC.

    Uses exhaustive enumeration when ``L`` is ``None`` and the message space is
    small enough, otherwise a list probe of size ``L``.
    """
    if codec.poly is None:
        raise ValueError("CRC filtering needs K_crc > 0")
    if L is None:
        return brute_force_spectrum(codec)
    return list_probe_spectrum(codec, L)


def is_decreasing(n: int, info_positions) -> bool:
    """True when the index set is closed under the monomial partial order.

    Closure means: setting any extra bit, or moving a set bit to a higher
    unset position, stays inside the set.
    """
    info = set(int(i) for i in info_positions)
    for i in info:
        for c in range(n):
            if (i >> c) & 1:
                continue
            if i | (1 << c) not in info:
                return False
            for b in range(c):
                if (i >> b) & 1 and (i ^ (1 << b) ^ (1 << c)) not in info:
                    return False
    return True


def monomial_min_weight_count(n: int, info_positions) -> tuple[int, int]:
    """Exact (d_min, N_min) of a decreasing monomial code without pre-transform.

    Each minimum-weight row i contributes 2^(|Z| + #{(o, z): o < z}) words,
    where Z are the zero bits and o ranges over the one bits of i.
    """
    info = [int(i) for i in info_positions]
    if not info:
        raise ValueError("empty information set")
    if not is_decreasing(n, info):
        raise ValueError("information set is not decreasing; use enumeration or a list probe")
    ones = min(bin(i).count("1") for i in info)
    total = 0
    for i in info:
        if bin(i).count("1") != ones:
            continue
        zeros = [b for b in range(n) if not (i >> b) & 1]
        lam = sum(1 for z in zeros for o in range(z) if (i >> o) & 1)
        total += 1 << (len(zeros) + lam)
    return 1 << ones, total


# Finite-blocklength normal approximation for BPSK over AWGN.

_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(160)


def bi_awgn_capacity_dispersion(es_n0: float) -> tuple[float, float]:
    """Capacity (bits/use) and dispersion (bits^2/use) of BPSK over AWGN.

    Uses Gauss-Hermite quadrature over the channel LLR of a +1 symbol.
    """
    if es_n0 <= 0.0:
        raise ValueError("Es/N0 must be positive")
    sigma2 = 1.0 / (2.0 * es_n0)
    y = 1.0 + math.sqrt(2.0 * sigma2) * _GH_NODES
    # information density in bits: 1 - log2(1 + exp(-2y/sigma^2))
    i = 1.0 - np.logaddexp(0.0, -2.0 * y / sigma2) / math.log(2.0)
    w = _GH_WEIGHTS / math.sqrt(math.pi)
    c = float(np.dot(w, i))
    v = float(np.dot(w, (i - c) ** 2))
    return c, v


def normal_approx_fer(N: int, K_total: int, ebno_db: float) -> float:
    """Normal-approximation block error probability at rate K_total/N.

    Used as a stand-in for the random-coding union bound, not the bound itself.
    """
    if not 0 < K_total < N:
        raise ValueError(f"rate {K_total}/{N} must lie strictly between 0 and 1")
    rate = K_total / N
    es_n0 = rate * 10.0 ** (ebno_db / 10.0)
    c, v = bi_awgn_capacity_dispersion(es_n0)
    arg = (N * c - K_total + 0.5 * math.log2(N)) / math.sqrt(N * v)
    return float(ndtr(-arg))


def normal_approx_log_fer(N: int, K_total: int, ebno_db: float) -> float:
    rate = K_total / N
    c, v = bi_awgn_capacity_dispersion(rate * 10.0 ** (ebno_db / 10.0))
    return float(log_ndtr(-(N * c - K_total + 0.5 * math.log2(N)) / math.sqrt(N * v)))
