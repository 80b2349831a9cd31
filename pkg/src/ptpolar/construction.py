"""Bit-channel reliabilities and information-set selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .gf2 import row_weights


class Flavor(str, Enum):
    POLAR = "polar"
    RM_POLAR = "rm-polar"


class ConstructionError(ValueError):
    pass


# Chung's approximation of phi(x) = 1 - E[tanh(L/2)], L ~ N(x, 2x). The two
# branches are joined where they intersect so log phi stays continuous and
# strictly decreasing (the customary switch at x = 10 leaves an upward jump).
_A, _B, _C = -0.4527, 0.86, 0.0218
_SWITCH = 6.177975866159783


def _log_phi(x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x < _SWITCH:
        return _A * x**_B + _C
    return 0.5 * math.log(math.pi / x) - x / 4.0 + math.log1p(-10.0 / (7.0 * x))


def _log_phi_inverse(target: float) -> float:
    """Solve log phi(x) = target for x > 0 (log phi is strictly decreasing)."""
    if target >= 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while _log_phi(hi) > target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _log_phi(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def ga_llr_means(N: int, design_snr_db: float) -> np.ndarray:
    """Mean LLR of every bit channel under Gaussian-approximation density evolution.

    ``design_snr_db`` is the channel Es/N0 of BPSK over AWGN, so the channel LLR
    mean is ``4 * Es/N0``.
    """
    if N < 1 or N & (N - 1):
        raise ValueError(f"N={N} is not a power of two")
    means = np.array([4.0 * 10.0 ** (design_snr_db / 10.0)])
    # The channel-side split sets the most significant index bit, so children
    # are interleaved: index 2k is the check-node child of k, 2k+1 the variable one.
    while means.size < N:
        nxt = np.empty(2 * means.size)
        for k, m in enumerate(means):
            lp = _log_phi(m)
            # 1 - (1 - p)^2 = p (2 - p), kept in the log domain for large m
            p = math.exp(lp)
            nxt[2 * k] = _log_phi_inverse(lp + math.log(2.0 - p))
            nxt[2 * k + 1] = 2.0 * m
        means = nxt
    return means


def reliability_order(N: int, design_snr_db: float = -1.45) -> np.ndarray:
    """Positions (0-based) sorted from least to most reliable.

    Ties go to the lower index, which is treated as the more reliable one.
    """
    means = ga_llr_means(N, design_snr_db)
    # descending reliability with ascending index on ties, then reversed
    most_first = np.lexsort((np.arange(N), -means))
    return most_first[::-1].copy()


@dataclass(frozen=True)
class InfoSet:
    info_positions: tuple[int, ...]
    frozen_positions: tuple[int, ...]
    reliability_rank: tuple[int, ...]
    weight_threshold: int = 1

    @property
    def N(self) -> int:
        return len(self.reliability_rank)

    def info_mask(self) -> np.ndarray:
        mask = np.zeros(self.N, dtype=bool)
        mask[list(self.info_positions)] = True
        return mask


@dataclass(frozen=True)
class CodeSpec:
    """Everything needed to rebuild one code deterministically.

    ``pretransform`` is ``None`` for the identity, otherwise a mapping such as
    ``{"kind": "random", "seed": 7, "density": 0.5}``; see :mod:`ptpolar.pretransform`.
    ``crc_poly`` is ``None`` to use the default polynomial for ``K_crc``.
    """

    n: int
    K: int
    K_crc: int = 0
    flavor: Flavor = Flavor.POLAR
    design_snr_db: float = -1.45
    weight_threshold: int | None = None
    pretransform: dict | None = None
    crc_poly: int | None = None
    crc_init: int = 0
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "flavor", Flavor(self.flavor))
        if self.n < 0:
            raise ConstructionError("n must be non-negative")
        if not 0 < self.K + self.K_crc <= self.N:
            raise ConstructionError(
                f"need 0 < K + K_crc <= N, got K={self.K}, K_crc={self.K_crc}, N={self.N}"
            )
        if self.K < 0 or self.K_crc < 0:
            raise ConstructionError("K and K_crc must be non-negative")

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def k_total(self) -> int:
        return self.K + self.K_crc

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "K": self.K,
            "K_crc": self.K_crc,
            "flavor": self.flavor.value,
            "design_snr_db": self.design_snr_db,
            "weight_threshold": self.weight_threshold,
            "pretransform": dict(self.pretransform) if self.pretransform else None,
            "crc_poly": self.crc_poly,
            "crc_init": self.crc_init,
        }

    @classmethod
    def from_dict(cls, data: dict) -> CodeSpec:
        return cls(**data)


def resolved_weight_threshold(spec: CodeSpec) -> int:
    """Largest power of two w with more than K + K_crc rows of weight >= w.

    Requiring a strict surplus keeps reliability in play; a pool of exactly
    K + K_crc rows would pin the code to a plain Reed-Muller code. Falls back
    to 1 when every row is needed. A user-supplied threshold is returned
    unchanged.
    """
    if spec.weight_threshold is not None:
        return int(spec.weight_threshold)
    weights = row_weights(spec.n)
    w = spec.N
    while w > 1 and np.count_nonzero(weights >= w) <= spec.k_total:
        w //= 2
    return w


def select_info_set(spec: CodeSpec) -> InfoSet:
    order = reliability_order(spec.N, spec.design_snr_db)
    most_first = order[::-1]
    threshold = 1
    if spec.flavor is Flavor.RM_POLAR:
        threshold = resolved_weight_threshold(spec)
        weights = row_weights(spec.n)
        most_first = most_first[weights[most_first] >= threshold]
        if most_first.size < spec.k_total:
            raise ConstructionError(
                f"only {most_first.size} rows have weight >= {threshold}, "
                f"need K + K_crc = {spec.k_total}"
            )
    info = np.sort(most_first[: spec.k_total])
    frozen = np.setdiff1d(np.arange(spec.N), info)
    return InfoSet(
        info_positions=tuple(int(i) for i in info),
        frozen_positions=tuple(int(i) for i in frozen),
        reliability_rank=tuple(int(i) for i in order),
        weight_threshold=threshold,
    )
