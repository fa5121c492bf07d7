"""Ones-density statistics and the coding / energy figures of merit."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .codec import SegmentConfig, codeword_weight, encode_segment

ENUMERATION_LIMIT = 16

_POPCOUNT = np.array([bin(b).count("1") for b in range(256)], dtype=np.int64)


@dataclass(frozen=True)
class BitStats:
    total_bits: int
    ones: int

    def __post_init__(self):
        if self.total_bits <= 0:
            raise ValueError("BitStats needs at least one bit")
        if not 0 <= self.ones <= self.total_bits:
            raise ValueError(f"ones={self.ones} outside [0, {self.total_bits}]")

    @property
    def p1(self) -> float:
        return self.ones / self.total_bits

    def __add__(self, other: "BitStats") -> "BitStats":
        return BitStats(self.total_bits + other.total_bits, self.ones + other.ones)


@dataclass(frozen=True)
class GainInputs:
    overhead: float
    pe: float = 0.0

    def __post_init__(self):
        if not 0 <= self.overhead < 1:
            raise ValueError(f"overhead must lie in [0, 1), got {self.overhead}")
        if not -1 < self.pe < 1:
            raise ValueError(f"pe must lie in (-1, 1), got {self.pe}")

    @property
    def eff(self) -> float:
        return 1 - self.overhead

    @classmethod
    def for_config(cls, cfg: SegmentConfig | None, pe: float = 0.0) -> "GainInputs":
        return cls(0.0 if cfg is None else cfg.overhead, pe)


def ones_probability(bits: bytes | bytearray | memoryview | Iterable[int] | np.ndarray) -> BitStats:
    """Count ones. Byte-like input counts eight bits per byte; anything else is a 0/1 sequence."""
    if isinstance(bits, (bytes, bytearray, memoryview)):
        buf = np.frombuffer(bits, dtype=np.uint8)
        total, ones = buf.size * 8, int(_POPCOUNT[buf].sum())
    else:
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("bit sequence may only contain 0 and 1")
        total, ones = int(arr.size), int(np.count_nonzero(arr))
    if total == 0:
        raise ValueError("cannot measure an empty bit sequence")
    return BitStats(total, ones)


def coding_gain(overhead: float, p1: float) -> float:
    """(1 - overhead) * p1."""
    if not 0 <= overhead < 1:
        raise ValueError(f"overhead must lie in [0, 1), got {overhead}")
    if not 0 <= p1 <= 1:
        raise ValueError(f"p1 must lie in [0, 1], got {p1}")
    return (1 - overhead) * p1


def energy_gain(pe: float, cg: float) -> float:
    if not (math.isfinite(pe) and math.isfinite(cg)):
        raise ValueError("energy gain needs finite inputs")
    return pe * cg


def expected_ones_uniform(cfg: SegmentConfig | int) -> Fraction:
    """Exact ones density of the code when every n-bit segment is equally likely."""
    cfg = cfg if isinstance(cfg, SegmentConfig) else SegmentConfig(int(cfg))
    if cfg.n > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration limited to n <= {ENUMERATION_LIMIT}")
    ones = sum(codeword_weight(encode_segment(x, cfg).bits) for x in range(1 << cfg.n))
    return Fraction(ones, cfg.k << cfg.n)


def ones_density_floor(cfg: SegmentConfig | int) -> Fraction:
    """Lowest ones fraction any coded stream can have: (m + 1)/k."""
    cfg = cfg if isinstance(cfg, SegmentConfig) else SegmentConfig(int(cfg))
    return Fraction(cfg.m + 1, cfg.k)
