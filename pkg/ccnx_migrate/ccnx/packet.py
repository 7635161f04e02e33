# Copyright Sierra

import hashlib
import struct
from typing import Optional

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.ccnx.tlv import TL_SIZE, iter_tlvs, pack_tlv, read_tl
from ccnx_migrate.exception import (
    DecodeError,
    EncodingError,
    LengthMismatchError,
    TruncatedError,
    UnknownTlvError,
)

# Fixed header. The per-hop header contents are a local convention:
# version, packet type, total length (BE), 3 reserved bytes, header length.
VERSION = 0x01
PT_INTEREST = 0x00
PT_CONTENT_OBJECT = 0x01
FIXED_HEADER_SIZE = 8
_FIXED_HEADER = struct.Struct(">BBH3xB")

# top level
T_INTEREST = 0x0001
T_OBJECT = 0x0002

# per message
T_NAME = 0x0000
T_PAYLOAD = 0x0001
T_KEYID = 0x0002
T_KEYID_RESTR = 0x0002
T_HASH_RESTR = 0x0003

# per name
T_NAMESEG = 0x0001

HASH_SIZE = 32
KEYID_SIZE = 32
NAMELESS_OVERHEAD = FIXED_HEADER_SIZE + 2 * TL_SIZE
MAX_NAMELESS_PAYLOAD = 65503
MAX_PACKET_LENGTH = 0xFFFF


class Hash256(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: bytes

    @field_validator("value")
    @classmethod
    def _is_sha256(cls, value: bytes) -> bytes:
        if len(value) != HASH_SIZE:
            raise ValueError(f"hash must be {HASH_SIZE} bytes, got {len(value)}")
        return value

    @classmethod
    def from_hex(cls, text: str) -> "Hash256":
        return cls(value=bytes.fromhex(text))

    def hex(self) -> str:
        return self.value.hex()

    def __str__(self) -> str:
        return self.value.hex()


class NamedAddress(BaseModel):
    """The {CCNxName, KeyIdRestr, HashRestr} tuple.

    For a nameless object the name is only a routing prefix and the hash restriction
    selects the object.
    """

    model_config = ConfigDict(frozen=True)

    name: Optional[Name] = None
    key_id_restr: Optional[bytes] = None
    hash_restr: Optional[Hash256] = None

    @field_validator("key_id_restr")
    @classmethod
    def _key_id_size(cls, value: Optional[bytes]) -> Optional[bytes]:
        if value is not None and len(value) != KEYID_SIZE:
            raise ValueError(f"key id restriction must be {KEYID_SIZE} bytes")
        return value

    @model_validator(mode="after")
    def _fetchable(self) -> "NamedAddress":
        if self.name is None and self.hash_restr is None:
            raise ValueError("a named address needs a name or a hash restriction")
        return self

    def __str__(self) -> str:
        parts = [str(self.name) if self.name is not None else "-"]
        if self.key_id_restr is not None:
            parts.append(f"keyid={self.key_id_restr.hex()}")
        if self.hash_restr is not None:
            parts.append(f"hash={self.hash_restr.hex()}")
        return "{" + ", ".join(parts) + "}"


class Interest(BaseModel):
    model_config = ConfigDict(frozen=True)

    address: NamedAddress

    @classmethod
    def for_name(cls, name: Name) -> "Interest":
        return cls(address=NamedAddress(name=name))


class ContentObject(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: Optional[Name] = None
    key_id: Optional[bytes] = None
    payload: bytes = b""

    @field_validator("key_id")
    @classmethod
    def _key_id_size(cls, value: Optional[bytes]) -> Optional[bytes]:
        if value is not None and len(value) != KEYID_SIZE:
            raise ValueError(f"key id must be {KEYID_SIZE} bytes")
        return value

    @property
    def is_nameless(self) -> bool:
        return self.name is None

    @classmethod
    def nameless(cls, payload: bytes) -> "ContentObject":
        return cls(payload=payload)


def _encode_name(name: Name) -> bytes:
    return pack_tlv(T_NAME, b"".join(pack_tlv(T_NAMESEG, segment) for segment in name.segments))


def name_tlv_size(name: Name) -> int:
    return TL_SIZE + sum(TL_SIZE + len(segment) for segment in name.segments)


def _decode_name(value: bytes) -> Name:
    segments = []
    for tlv_type, segment in iter_tlvs(value):
        if tlv_type != T_NAMESEG:
            raise UnknownTlvError(f"unknown name TLV type 0x{tlv_type:04x}")
        if len(segment) == 0:
            raise DecodeError("empty name segment")
        segments.append(segment)
    return Name(segments=tuple(segments))


def _fixed_header(packet_type: int, body_length: int) -> bytes:
    total = FIXED_HEADER_SIZE + body_length
    if total > MAX_PACKET_LENGTH:
        raise EncodingError(f"packet of {total} bytes exceeds the 16-bit packet length")
    return _FIXED_HEADER.pack(VERSION, packet_type, total, FIXED_HEADER_SIZE)


def encode_object_body(obj: ContentObject) -> bytes:
    if obj.is_nameless and len(obj.payload) > MAX_NAMELESS_PAYLOAD:
        raise EncodingError(
            f"nameless payload of {len(obj.payload)} bytes exceeds {MAX_NAMELESS_PAYLOAD}"
        )
    inner = b""
    if obj.name is not None:
        inner += _encode_name(obj.name)
    if obj.key_id is not None:
        inner += pack_tlv(T_KEYID, obj.key_id)
    inner += pack_tlv(T_PAYLOAD, obj.payload)
    return pack_tlv(T_OBJECT, inner)


def encode_content_object(obj: ContentObject) -> bytes:
    body = encode_object_body(obj)
    return _fixed_header(PT_CONTENT_OBJECT, len(body)) + body


def encode_interest(interest: Interest) -> bytes:
    address = interest.address
    inner = b""
    if address.name is not None:
        inner += _encode_name(address.name)
    if address.key_id_restr is not None:
        inner += pack_tlv(T_KEYID_RESTR, address.key_id_restr)
    if address.hash_restr is not None:
        inner += pack_tlv(T_HASH_RESTR, address.hash_restr.value)
    body = pack_tlv(T_INTEREST, inner)
    return _fixed_header(PT_INTEREST, len(body)) + body


def _split_packet(buf: bytes, packet_type: int, top_type: int) -> bytes:
    if len(buf) < FIXED_HEADER_SIZE:
        raise TruncatedError()
    version, actual_type, total_length, header_length = _FIXED_HEADER.unpack_from(buf, 0)
    if version != VERSION or header_length != FIXED_HEADER_SIZE:
        raise DecodeError(f"unsupported fixed header (version={version}, header length={header_length})")
    if actual_type != packet_type:
        raise DecodeError(f"packet type 0x{actual_type:02x}, expected 0x{packet_type:02x}")
    tlv_type, length, start = read_tl(buf, FIXED_HEADER_SIZE)
    if tlv_type != top_type:
        raise UnknownTlvError(f"unknown top-level TLV type 0x{tlv_type:04x}")
    end = start + length
    if end != len(buf) or total_length != len(buf):
        raise LengthMismatchError()
    return buf[start:end]


def _fields(inner: bytes, known: dict[int, str], message: str) -> dict[int, bytes]:
    fields: dict[int, bytes] = {}
    for tlv_type, value in iter_tlvs(inner):
        if tlv_type not in known:
            raise UnknownTlvError(f"unknown {message} TLV type 0x{tlv_type:04x}")
        if tlv_type in fields:
            raise DecodeError(f"{message} repeats its {known[tlv_type]} TLV")
        fields[tlv_type] = value
    return fields


def _fixed_size(value: Optional[bytes], size: int, what: str) -> Optional[bytes]:
    if value is not None and len(value) != size:
        raise DecodeError(f"{what} of {len(value)} bytes, expected {size}")
    return value


def decode_content_object(buf: bytes) -> ContentObject:
    inner = _split_packet(buf, PT_CONTENT_OBJECT, T_OBJECT)
    fields = _fields(inner, {T_NAME: "name", T_KEYID: "key id", T_PAYLOAD: "payload"}, "content object")
    if T_PAYLOAD not in fields:
        raise DecodeError("content object without payload")
    name = _decode_name(fields[T_NAME]) if T_NAME in fields else None
    key_id = _fixed_size(fields.get(T_KEYID), KEYID_SIZE, "key id")
    return ContentObject(name=name, key_id=key_id, payload=fields[T_PAYLOAD])


def decode_interest(buf: bytes) -> Interest:
    inner = _split_packet(buf, PT_INTEREST, T_INTEREST)
    fields = _fields(
        inner,
        {T_NAME: "name", T_KEYID_RESTR: "key id restriction", T_HASH_RESTR: "hash restriction"},
        "interest",
    )
    name = _decode_name(fields[T_NAME]) if T_NAME in fields else None
    key_id_restr = _fixed_size(fields.get(T_KEYID_RESTR), KEYID_SIZE, "key id restriction")
    hash_value = _fixed_size(fields.get(T_HASH_RESTR), HASH_SIZE, "hash restriction")
    if name is None and hash_value is None:
        raise DecodeError("interest carries neither a name nor a hash restriction")
    hash_restr = Hash256(value=hash_value) if hash_value is not None else None
    return Interest(address=NamedAddress(name=name, key_id_restr=key_id_restr, hash_restr=hash_restr))


def compute_object_hash(obj: ContentObject) -> Hash256:
    # message body only, the fixed header is per-hop
    return Hash256(value=hashlib.sha256(encode_object_body(obj)).digest())


def object_wire_size(obj: ContentObject) -> int:
    return FIXED_HEADER_SIZE + len(encode_object_body(obj))


def interest_wire_size(interest: Interest) -> int:
    return len(encode_interest(interest))


def match_restrictions(interest: Interest, obj: ContentObject) -> bool:
    address = interest.address
    if address.name is not None:
        if obj.name is None:
            # nameless objects are only reachable through a hash restriction
            if address.hash_restr is None:
                return False
        elif obj.name != address.name:
            return False
    if address.key_id_restr is not None and obj.key_id != address.key_id_restr:
        return False
    if address.hash_restr is not None and compute_object_hash(obj) != address.hash_restr:
        return False
    return True
