"""Framed on-disk container for ILWC-coded byte streams.

Layout (16-byte header, then payload)::

    0   4  magic  b"ILWC"
    4   1  version (1)
    5   1  segment width n (2, 4 or 8)
    6   2  reserved, zero
    8   8  original length in bytes, unsigned little-endian
    16  .. packed codewords, MSB first, final byte zero-padded
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from .codec import (
    DecodeErrorRecord,
    ILWCError,
    SegmentConfig,
    decode_payload,
    encode_bytes,
)

MAGIC = b"ILWC"
VERSION = 1
HEADER = struct.Struct("<4sBB2sQ")
HEADER_SIZE = HEADER.size

# 8 source bytes always code to a whole number of payload bytes for n in {2,4,8}
_CHUNK = 1 << 20


class ContainerFormatError(ILWCError, ValueError):
    pass


class IntegrityError(ILWCError):
    """Strict decoding met a codeword that breaks the weight law."""

    def __init__(self, record: DecodeErrorRecord, k: int):
        self.record = record
        self.codeword_index = record.codeword_index
        super().__init__(
            f"integrity failure at codeword {record.codeword_index}: "
            f"{record.raw_bits:0{k}b} has weight {record.weight}")


def payload_size(original_length: int, n: int) -> int:
    bits = original_length * (8 // n) * (n + 1)
    return (bits + 7) // 8


@dataclass(frozen=True)
class EncodedContainer:
    segment_n: int
    original_length: int
    payload: bytes
    version: int = VERSION

    @property
    def config(self) -> SegmentConfig:
        return SegmentConfig(self.segment_n)

    @property
    def payload_bits(self) -> int:
        return self.original_length * self.config.coded_bits_per_byte

    def header(self) -> bytes:
        return HEADER.pack(MAGIC, self.version, self.segment_n, b"\0\0", self.original_length)

    def to_bytes(self) -> bytes:
        return self.header() + self.payload

    @classmethod
    def from_bytes(cls, blob: bytes) -> "EncodedContainer":
        n, length = parse_header(blob[:HEADER_SIZE])
        payload = bytes(blob[HEADER_SIZE:])
        container = cls(n, length, payload)
        container.validate()
        return container

    def validate(self) -> None:
        expected = payload_size(self.original_length, self.segment_n)
        if len(self.payload) != expected:
            raise ContainerFormatError(
                f"payload is {len(self.payload)} bytes, header implies {expected}")
        pad = expected * 8 - self.payload_bits
        if pad and self.payload[-1] & ((1 << pad) - 1):
            raise ContainerFormatError("non-zero padding bits in final payload byte")


def parse_header(head: bytes) -> tuple[int, int]:
    if len(head) < HEADER_SIZE:
        raise ContainerFormatError(f"truncated header ({len(head)} bytes)")
    magic, version, n, reserved, length = HEADER.unpack(head[:HEADER_SIZE])
    if magic != MAGIC:
        raise ContainerFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ContainerFormatError(f"unsupported version {version}")
    if n not in (2, 4, 8):
        raise ContainerFormatError(f"unsupported segment size {n}")
    if reserved != b"\0\0":
        raise ContainerFormatError("reserved header bytes are not zero")
    return n, length


def encode_stream(data: bytes, cfg: SegmentConfig | int) -> EncodedContainer:
    cfg = cfg if isinstance(cfg, SegmentConfig) else SegmentConfig(int(cfg))
    cfg.require_stream()
    return EncodedContainer(cfg.n, len(data), encode_bytes(data, cfg))


def decode_stream(container: EncodedContainer, mode: str = "strict"
                  ) -> tuple[bytes, list[DecodeErrorRecord]]:
    """Decode a container.

    ``strict`` raises IntegrityError at the first invalid codeword; ``lenient``
    decodes every word with the flag rule and returns the error records.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"mode must be 'strict' or 'lenient', got {mode!r}")
    container.validate()
    cfg = container.config
    data, records = decode_payload(container.payload, cfg, container.original_length)
    if records and mode == "strict":
        raise IntegrityError(records[0], cfg.k)
    return data, records


# ---------------------------------------------------------------------------
# streaming variants for files that should not be held in memory

def encode_file(src: BinaryIO, dst: BinaryIO, cfg: SegmentConfig | int, length: int | None = None) -> int:
    """Encode ``src`` into ``dst``; returns the number of source bytes consumed.

    The header needs the length up front, so a seekable ``dst`` is patched
    afterwards when ``length`` is not given.
    """
    cfg = cfg if isinstance(cfg, SegmentConfig) else SegmentConfig(int(cfg))
    cfg.require_stream()
    start = dst.tell() if length is None else None
    dst.write(EncodedContainer(cfg.n, length or 0, b"").header())
    total = 0
    while True:
        # full chunks are multiples of 8 bytes, so only the last one leaves pad bits
        chunk = _read_full(src, _CHUNK)
        if not chunk:
            break
        total += len(chunk)
        dst.write(encode_bytes(chunk, cfg))
        if len(chunk) < _CHUNK:
            break
    if length is None:
        end = dst.tell()
        dst.seek(start)
        dst.write(EncodedContainer(cfg.n, total, b"").header())
        dst.seek(end)
    elif length != total:
        raise ILWCError(f"declared length {length} but read {total} bytes")
    return total


def decode_file(src: BinaryIO, dst: BinaryIO, mode: str = "strict") -> list[DecodeErrorRecord]:
    if mode not in ("strict", "lenient"):
        raise ValueError(f"mode must be 'strict' or 'lenient', got {mode!r}")
    n, length = parse_header(src.read(HEADER_SIZE))
    cfg = SegmentConfig(n)
    expected = payload_size(length, n)
    records: list[DecodeErrorRecord] = []
    remaining = length
    seen = 0
    index = 0
    while remaining:
        nbytes = min(remaining, _CHUNK)
        want = payload_size(nbytes, n)
        chunk = _read_full(src, want)
        seen += len(chunk)
        if len(chunk) != want:
            raise ContainerFormatError(f"payload is {seen} bytes, header implies {expected}")
        if nbytes == remaining:
            bits = nbytes * cfg.coded_bits_per_byte
            pad = len(chunk) * 8 - bits
            if pad and chunk[-1] & ((1 << pad) - 1):
                raise ContainerFormatError("non-zero padding bits in final payload byte")
        count = nbytes * cfg.segments_per_byte
        data, recs = decode_payload(chunk, cfg, nbytes, first_index=index)
        if recs and mode == "strict":
            raise IntegrityError(recs[0], cfg.k)
        records.extend(recs)
        dst.write(data)
        index += count
        remaining -= nbytes
    if src.read(1):
        raise ContainerFormatError(f"payload longer than the {expected} bytes the header implies")
    return records


def _read_full(src: BinaryIO, size: int) -> bytes:
    parts = []
    while size:
        part = src.read(size)
        if not part:
            break
        parts.append(part)
        size -= len(part)
    return b"".join(parts)


def flip_bit(payload: bytes, bit_index: int) -> bytes:
    """Copy of ``payload`` with one MSB-first bit inverted (fault injection helper)."""
    buf = np.frombuffer(payload, dtype=np.uint8).copy()
    buf[bit_index // 8] ^= 0x80 >> (bit_index % 8)
    return buf.tobytes()
