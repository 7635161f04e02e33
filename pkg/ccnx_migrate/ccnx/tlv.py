"""2-byte type / 2-byte length TLV helpers shared by the packet and manifest codecs."""

import struct
from typing import Iterator

from ccnx_migrate.exception import EncodingError, TruncatedError

TL_SIZE = 4
MAX_TLV_LENGTH = 0xFFFF

_TL = struct.Struct(">HH")


def pack_tlv(tlv_type: int, value: bytes) -> bytes:
    if len(value) > MAX_TLV_LENGTH:
        raise EncodingError(f"TLV 0x{tlv_type:04x} value of {len(value)} bytes exceeds 16-bit length")
    return _TL.pack(tlv_type, len(value)) + value


def read_tl(buf: bytes, offset: int) -> tuple[int, int, int]:
    """Returns (type, length, value offset); the value must lie inside ``buf``."""
    if offset + TL_SIZE > len(buf):
        raise TruncatedError()
    tlv_type, length = _TL.unpack_from(buf, offset)
    start = offset + TL_SIZE
    if start + length > len(buf):
        raise TruncatedError()
    return tlv_type, length, start


def iter_tlvs(buf: bytes) -> Iterator[tuple[int, bytes]]:
    offset = 0
    while offset < len(buf):
        tlv_type, length, start = read_tl(buf, offset)
        yield tlv_type, buf[start : start + length]
        offset = start + length
