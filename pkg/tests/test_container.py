import io
import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ilwc.container import (
    HEADER_SIZE,
    ContainerFormatError,
    EncodedContainer,
    IntegrityError,
    decode_file,
    decode_stream,
    encode_file,
    encode_stream,
    flip_bit,
)

from oracles import encode_stream_bits


def payload_bits(c: EncodedContainer) -> str:
    return "".join(format(b, "08b") for b in c.payload)


def test_header_layout():
    blob = encode_stream(b"\x37", 4).to_bytes()
    assert blob[:4] == b"ILWC"
    assert blob[4] == 1 and blob[5] == 4 and blob[6:8] == b"\0\0"
    assert struct.unpack("<Q", blob[8:16])[0] == 1
    assert len(blob) == HEADER_SIZE + 2


def test_zero_byte_n8():
    c = encode_stream(b"\x00", 8)
    assert payload_bits(c) == "111111111" + "0" * 7
    assert c.original_length == 1


def test_table_symbols_packed():
    c = encode_stream(b"\x37", 4)
    assert payload_bits(c) == "1110000111" + "0" * 6


def test_empty():
    c = encode_stream(b"", 4)
    assert c.payload == b"" and c.original_length == 0
    assert decode_stream(c) == (b"", [])


@pytest.mark.parametrize("n", [2, 4, 8])
@given(data=st.binary(max_size=200))
def test_matches_oracle_bits(n, data):
    c = encode_stream(data, n)
    expected = encode_stream_bits(data, n)
    bits = payload_bits(c)
    assert bits[:len(expected)] == expected
    assert set(bits[len(expected):]) <= {"0"}
    assert len(bits) - len(expected) < 8
    assert decode_stream(EncodedContainer.from_bytes(c.to_bytes())) == (data, [])


def test_flip_to_other_valid_codeword():
    c = encode_stream(b"\x37", 4)
    # 11100 -> 11110 is still a valid word: it is the codeword of symbol 1
    bad = EncodedContainer(4, 1, flip_bit(c.payload, 3))
    assert payload_bits(bad)[:5] == "11110"
    assert decode_stream(bad, "strict") == (b"\x17", [])


def _with_first_codeword(word: str) -> EncodedContainer:
    c = encode_stream(b"\x37", 4)
    bits = word + payload_bits(c)[5:]
    return EncodedContainer(4, 1, int(bits, 2).to_bytes(2, "big"))


def test_detects_00011_strict():
    with pytest.raises(IntegrityError) as info:
        decode_stream(_with_first_codeword("00011"), "strict")
    assert info.value.codeword_index == 0


def test_detects_00011_lenient():
    data, records = decode_stream(_with_first_codeword("00011"), "lenient")
    assert len(data) == 1
    assert [(r.codeword_index, r.raw_bits, r.weight) for r in records] == [(0, 0b00011, 2)]
    # flag 0: low bits pass through, second segment intact
    assert data == b"\x37"


def test_lenient_reports_every_bad_word():
    c = encode_stream(bytes(range(64)), 8)
    payload = c.payload
    # codeword i starts at bit 9 i; 0x00 -> 111111111 needs 5 flips to fall to weight 4
    for b in range(5):
        payload = flip_bit(payload, b)
    for b in range(9 * 10, 9 * 10 + 5):
        payload = flip_bit(payload, b)
    data, records = decode_stream(EncodedContainer(8, 64, payload), "lenient")
    assert len(data) == 64
    assert [r.codeword_index for r in records] == [0, 10]
    assert all(r.weight <= 4 for r in records)
    with pytest.raises(IntegrityError) as info:
        decode_stream(EncodedContainer(8, 64, payload))
    assert info.value.codeword_index == 0


@pytest.mark.parametrize("mutate,match", [
    (lambda b: b"XLWC" + b[4:], "magic"),
    (lambda b: b[:4] + b"\x02" + b[5:], "version"),
    (lambda b: b[:5] + b"\x06" + b[6:], "segment"),
    (lambda b: b[:6] + b"\x01\x00" + b[8:], "reserved"),
    (lambda b: b[:-1], "payload"),
    (lambda b: b + b"\x00", "payload"),
    (lambda b: b[:-1] + bytes([b[-1] | 1]), "padding"),
    (lambda b: b[:10], "truncated"),
])
def test_malformed(mutate, match):
    blob = encode_stream(b"\x37\x01\x02", 4).to_bytes()
    with pytest.raises(ContainerFormatError, match=match):
        EncodedContainer.from_bytes(mutate(blob))


def test_bad_mode():
    with pytest.raises(ValueError):
        decode_stream(encode_stream(b"a", 4), "sloppy")


@pytest.mark.parametrize("n", [2, 4, 8])
@pytest.mark.parametrize("size", [0, 1, 7, 8, 9, (1 << 20) + 3])
def test_file_streaming_matches_in_memory(n, size, monkeypatch):
    import ilwc.container as mod
    monkeypatch.setattr(mod, "_CHUNK", 1 << 12)
    data = bytes((i * 131 + 7) % 256 for i in range(size))
    dst = io.BytesIO()
    assert encode_file(io.BytesIO(data), dst, n) == size
    assert dst.getvalue() == encode_stream(data, n).to_bytes()
    out = io.BytesIO()
    src = io.BytesIO(dst.getvalue())
    assert decode_file(src, out) == []
    assert out.getvalue() == data


def test_file_decode_index_across_chunks(monkeypatch):
    import ilwc.container as mod
    monkeypatch.setattr(mod, "_CHUNK", 16)
    data = bytes(40)
    c = encode_stream(data, 8)
    payload = c.payload
    for b in range(9 * 33, 9 * 33 + 5):
        payload = flip_bit(payload, b)
    blob = EncodedContainer(8, 40, payload).to_bytes()
    with pytest.raises(IntegrityError) as info:
        decode_file(io.BytesIO(blob), io.BytesIO())
    assert info.value.codeword_index == 33
    records = decode_file(io.BytesIO(blob), io.BytesIO(), "lenient")
    assert [r.codeword_index for r in records] == [33]


def test_file_decode_truncated():
    blob = encode_stream(bytes(100), 4).to_bytes()
    with pytest.raises(ContainerFormatError):
        decode_file(io.BytesIO(blob[:-3]), io.BytesIO())
    with pytest.raises(ContainerFormatError):
        decode_file(io.BytesIO(blob + b"\0"), io.BytesIO())
