"""Perfect n/2 inverted limited-weight coding (ILWC).

A segment of ``n`` bits is widened to ``k = n + 1`` bits by prepending a zero
flag bit. If that word carries ``m = n/2`` ones or fewer it is complemented, so
every emitted codeword has weight strictly greater than ``m``. Exactly half of
the ``2**k`` words satisfy that law; reading back a word from the other half
means the stored bits were disturbed.

Streams are split into segments most-significant-first inside each byte and the
codewords are packed MSB-first into a framed container (see ``container``).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

STREAM_SEGMENT_SIZES = (2, 4, 8)


class ILWCError(Exception):
    """Base class for codec failures."""


class InvalidConfigError(ILWCError, ValueError):
    pass


class InvalidWeightError(ILWCError):
    """A codeword breaks the weight law (weight <= m): a detected storage error."""

    def __init__(self, codeword: int, weight: int, m: int):
        self.codeword = codeword
        self.weight = weight
        self.m = m
        super().__init__(f"codeword {codeword:#b} has weight {weight} <= {m}")


@dataclass(frozen=True)
class SegmentConfig:
    """Parameters of one perfect ILWC configuration.

    Only ``n`` is free; ``k`` and ``m`` follow from it.
    """

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise InvalidConfigError(f"segment width must be an integer, got {self.n!r}")
        if self.n % 2 or not 2 <= self.n <= 32:
            raise InvalidConfigError(f"segment width must be even and in [2, 32], got {self.n}")

    @property
    def k(self) -> int:
        return self.n + 1

    @property
    def m(self) -> int:
        return self.n // 2

    @property
    def overhead(self) -> float:
        """Added redundancy as a fraction of the source width, (k - n)/n."""
        return (self.k - self.n) / self.n

    @property
    def segments_per_byte(self) -> int:
        self.require_stream()
        return 8 // self.n

    @property
    def coded_bits_per_byte(self) -> int:
        return self.segments_per_byte * self.k

    def require_stream(self) -> None:
        if self.n not in STREAM_SEGMENT_SIZES:
            raise InvalidConfigError(
                f"stream operations need n in {STREAM_SEGMENT_SIZES}, got {self.n}")


@dataclass(frozen=True)
class Codeword:
    bits: int
    k: int

    @property
    def weight(self) -> int:
        return codeword_weight(self.bits)

    @property
    def flag(self) -> int:
        return (self.bits >> (self.k - 1)) & 1

    def is_valid(self, m: int) -> bool:
        return self.weight > m

    def __str__(self) -> str:
        return format(self.bits, f"0{self.k}b")


def _as_config(cfg) -> SegmentConfig:
    return cfg if isinstance(cfg, SegmentConfig) else SegmentConfig(int(cfg))


def codeword_weight(w: int) -> int:
    """Number of set bits in ``w``."""
    if w < 0:
        raise ValueError("weight is defined for non-negative words only")
    return int(w).bit_count()


def encode_segment(data: int, cfg: SegmentConfig | int) -> Codeword:
    cfg = _as_config(cfg)
    if not 0 <= data < (1 << cfg.n):
        raise ValueError(f"segment {data} does not fit in {cfg.n} bits")
    # the zero flag lands at bit k-1 simply by widening
    word = data
    if codeword_weight(word) <= cfg.m:
        word ^= (1 << cfg.k) - 1
    return Codeword(word, cfg.k)


def decode_segment(cw: int | Codeword, cfg: SegmentConfig | int) -> int:
    """Recover the source segment, raising InvalidWeightError on a weight-law breach."""
    cfg = _as_config(cfg)
    bits = cw.bits if isinstance(cw, Codeword) else int(cw)
    if not 0 <= bits < (1 << cfg.k):
        raise ValueError(f"codeword {bits} does not fit in {cfg.k} bits")
    weight = codeword_weight(bits)
    if weight <= cfg.m:
        raise InvalidWeightError(bits, weight, cfg.m)
    return _flag_rule(bits, cfg)


def _flag_rule(bits: int, cfg: SegmentConfig) -> int:
    mask = (1 << cfg.n) - 1
    if bits >> cfg.n:
        return ~bits & mask
    return bits & mask


def verify_perfect_parameters(n: int) -> tuple[int, int, bool]:
    """Return ``(k, m, holds)`` where ``holds`` says sum_{i<=m} C(k, i) == 2**n."""
    if isinstance(n, bool) or n % 2 or not 2 <= n <= 32:
        raise InvalidConfigError(f"n must be even and in [2, 32], got {n}")
    k, m = n + 1, n // 2
    return k, m, sum(comb(k, i) for i in range(m + 1)) == 1 << n


def lwc_feasible(n: int, k: int, m: int) -> bool:
    """Whether ``k``-bit words of weight at most ``m`` can carry every ``n``-bit symbol."""
    if not (1 <= n <= 64 and 1 <= m <= k <= 64):
        raise InvalidConfigError(f"parameters out of range: n={n}, k={k}, m={m}")
    return sum(comb(k, i) for i in range(m + 1)) >= 1 << n


# ---------------------------------------------------------------------------
# byte-level lookup tables used by the stream paths

@lru_cache(maxsize=None)
def segment_tables(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Encode table over all n-bit segments, flag-rule decode table and validity mask over all k-bit words."""
    cfg = SegmentConfig(n)
    enc = np.array([encode_segment(x, cfg).bits for x in range(1 << cfg.n)], dtype=np.uint32)
    dec = np.array([_flag_rule(w, cfg) for w in range(1 << cfg.k)], dtype=np.uint32)
    valid = np.array([codeword_weight(w) > cfg.m for w in range(1 << cfg.k)], dtype=bool)
    for arr in (enc, dec, valid):
        arr.flags.writeable = False
    return enc, dec, valid


@lru_cache(maxsize=None)
def byte_bit_table(n: int) -> np.ndarray:
    """(256, coded_bits_per_byte) uint8 matrix: the coded bits of every source byte."""
    cfg = SegmentConfig(n)
    enc, _, _ = segment_tables(n)
    rows = np.zeros((256, cfg.coded_bits_per_byte), dtype=np.uint8)
    shifts = np.arange(cfg.k - 1, -1, -1)
    for byte in range(256):
        parts = []
        for s in range(cfg.segments_per_byte):
            seg = (byte >> (8 - n * (s + 1))) & ((1 << n) - 1)
            parts.append((int(enc[seg]) >> shifts) & 1)
        rows[byte] = np.concatenate(parts)
    rows.flags.writeable = False
    return rows


def encode_bits(data: bytes | np.ndarray, cfg: SegmentConfig | int) -> np.ndarray:
    """Unpacked coded bit stream (uint8 zeros and ones) for ``data``, no padding."""
    cfg = _as_config(cfg)
    buf = np.frombuffer(bytes(data), dtype=np.uint8) if not isinstance(data, np.ndarray) else data
    return byte_bit_table(cfg.n)[buf].reshape(-1)


def encode_bytes(data: bytes, cfg: SegmentConfig | int) -> bytes:
    """Packed codewords for ``data``; the final byte is zero-padded."""
    return np.packbits(encode_bits(data, cfg)).tobytes()


def payload_bit_length(original_length: int, cfg: SegmentConfig | int) -> int:
    cfg = _as_config(cfg)
    return original_length * cfg.coded_bits_per_byte


@dataclass(frozen=True)
class DecodeErrorRecord:
    codeword_index: int
    raw_bits: int
    weight: int

    def as_dict(self, k: int | None = None) -> dict:
        d = {"codeword_index": self.codeword_index, "raw_bits": self.raw_bits, "weight": self.weight}
        if k is not None:
            d["raw"] = format(self.raw_bits, f"0{k}b")
        return d


@lru_cache(maxsize=None)
def group_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Decoded byte and all-valid flag for every coded group of one source byte."""
    cfg = SegmentConfig(n)
    _, dec, valid = segment_tables(n)
    per, k = cfg.segments_per_byte, cfg.k
    groups = np.arange(1 << (per * k), dtype=np.uint32)
    out = np.zeros(groups.size, dtype=np.uint32)
    ok = np.ones(groups.size, dtype=bool)
    for s in range(per):
        word = (groups >> (k * (per - 1 - s))) & ((1 << k) - 1)
        out = (out << n) | dec[word]
        ok &= valid[word]
    out = out.astype(np.uint8)
    out.flags.writeable = False
    ok.flags.writeable = False
    return out, ok


def decode_payload(payload: bytes, cfg: SegmentConfig, nbytes: int, first_index: int = 0
                   ) -> tuple[bytes, list[DecodeErrorRecord]]:
    """Decode the codewords of ``nbytes`` source bytes from an MSB-first packed payload.

    Invalid words are decoded with the flag rule and reported; callers decide
    whether a report is fatal.
    """
    width = cfg.coded_bits_per_byte
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), count=nbytes * width)
    # right-align each group in 16 bits and read it back as a big-endian integer
    wide = np.zeros((nbytes, 16), dtype=np.uint8)
    wide[:, 16 - width:] = bits.reshape(nbytes, width)
    groups = np.packbits(wide, axis=1).view(">u2").ravel()
    table, ok = group_tables(cfg.n)
    data = table[groups].tobytes()
    records = []
    good = ok[groups]
    if not good.all():
        per, k = cfg.segments_per_byte, cfg.k
        for i in np.flatnonzero(~good):
            g = int(groups[i])
            for s in range(per):
                word = (g >> (k * (per - 1 - s))) & ((1 << k) - 1)
                weight = codeword_weight(word)
                if weight <= cfg.m:
                    records.append(DecodeErrorRecord(first_index + int(i) * per + s, word, weight))
    return data, records
