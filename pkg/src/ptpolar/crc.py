"""Bitwise CRC with configurable width, MSB-first, no reflection or final XOR."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .gf2 import ShapeError, as_bits

# width -> generator with the leading x^width term written out
DEFAULT_POLYS = {
    3: 0xB,
    5: 0x25,
    6: 0x61,
    7: 0x89,
    8: 0x1D5,
    9: 0x313,
    4: 0x13,
    10: 0x633,
    11: 0xE21,
    12: 0x180F,
    16: 0x11021,
}


@dataclass(frozen=True)
class CrcPoly:
    """Generator polynomial of degree ``width``.

    ``generator`` may be given with or without its leading x^width bit.
    """

    width: int
    generator: int
    init: int = 0

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("CRC width must be at least 1")
        g = self.generator
        if g < (1 << self.width):
            g |= 1 << self.width
        if g >> (self.width + 1):
            raise ValueError(f"generator {self.generator:#x} has degree above {self.width}")
        object.__setattr__(self, "generator", g)
        if not 0 <= self.init < (1 << self.width):
            raise ValueError(f"init {self.init:#x} does not fit in {self.width} bits")

    @classmethod
    def default(cls, width: int) -> CrcPoly:
        if width not in DEFAULT_POLYS:
            raise ValueError(f"no default CRC polynomial for width {width}")
        return cls(width, DEFAULT_POLYS[width])

    @property
    def hex(self) -> str:
        return f"{self.generator:#x}"

    @cached_property
    def _low(self) -> int:
        return self.generator & ((1 << self.width) - 1)

    def to_dict(self) -> dict:
        return {"width": self.width, "generator": self.hex, "init": self.init}

    @cached_property
    def _syndromes(self) -> dict:
        return {}

    def syndrome_matrix(self, length: int) -> np.ndarray:
        """Matrix S (length x width) with crc_bits(p) = p S + crc_bits(0) over GF(2)."""
        if length not in self._syndromes:
            # unit vector at position i leaves x^(length-1-i) mod g in the register
            rows = np.zeros((length, self.width), dtype=np.uint8)
            reg = self._low
            for i in range(length - 1, -1, -1):
                rows[i] = _to_bits(reg, self.width)
                top = (reg >> (self.width - 1)) & 1
                reg = (reg << 1) & ((1 << self.width) - 1)
                if top:
                    reg ^= self._low
            self._syndromes[length] = rows
        return self._syndromes[length]


def _register(bits: np.ndarray, width: int, low: int, init: int) -> int:
    reg = init
    top = width - 1
    mask = (1 << width) - 1
    for b in bits:
        fb = ((reg >> top) & 1) ^ int(b)
        reg = (reg << 1) & mask
        if fb:
            reg ^= low
    return reg


def _to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - k)) & 1 for k in range(width)], dtype=np.uint8)


def crc_bits(payload, poly: CrcPoly) -> np.ndarray:
    """The ``poly.width`` check bits of ``payload``, MSB first."""
    payload = as_bits(payload)
    return _to_bits(_register(payload, poly.width, poly._low, poly.init), poly.width)


def crc_append(payload, poly: CrcPoly) -> np.ndarray:
    payload = as_bits(payload)
    return np.concatenate([payload, crc_bits(payload, poly)])


def crc_check(word, poly: CrcPoly) -> bool:
    word = as_bits(word)
    if word.size < poly.width:
        raise ShapeError(f"word of {word.size} bits is shorter than the {poly.width}-bit CRC")
    split = word.size - poly.width
    return bool(np.array_equal(crc_bits(word[:split], poly), word[split:]))


def crc_check_batch(words: np.ndarray, poly: CrcPoly) -> np.ndarray:
    """Vectorised :func:`crc_check` over the rows of a 2-D array."""
    words = np.asarray(words, dtype=np.uint8)
    if words.ndim != 2:
        raise ShapeError("expected a 2-D array of words")
    if words.shape[1] < poly.width:
        raise ShapeError(f"words of {words.shape[1]} bits are shorter than the CRC")
    split = words.shape[1] - poly.width
    S = poly.syndrome_matrix(split)
    expect = ((words[:, :split].astype(np.int32) @ S.astype(np.int32)) & 1).astype(np.uint8)
    if poly.init:
        expect ^= crc_bits(np.zeros(split, dtype=np.uint8), poly)
    return np.all(expect == words[:, split:], axis=1)
