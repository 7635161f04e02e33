# Copyright Sierra

"""Binary manifest chunk payloads.

Every chunk starts with T_CHUNK_INFO (version u32, chunk index u16, chunk count u16). The
root chunk (index 0) also carries T_PHASE and the VM name. Sections follow, each a
T_SECTION holding the kind, optional disk, addressing mode and its records: strong sections
carry a locator prefix and packed (u32 index, 32-byte hash) records, weak sections carry
one T_WEAK_RECORD (u32 index, name TLV) per entry.
"""

import struct
from typing import Iterable, Optional

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.ccnx.packet import HASH_SIZE, T_NAME, T_NAMESEG, ContentObject, Hash256
from ccnx_migrate.ccnx.tlv import MAX_TLV_LENGTH, TL_SIZE, iter_tlvs, pack_tlv
from ccnx_migrate.exception import (
    CorruptManifestError,
    DecodeError,
    IncompleteManifestError,
    ManifestBuildError,
)
from ccnx_migrate.manifest.model import (
    Manifest,
    ManifestEntry,
    ManifestSection,
    StrongHash,
    WeakName,
)
from ccnx_migrate.types import Addressing, Phase, ResourceKind

T_CHUNK_INFO = 0x0010
T_PHASE = 0x0011
T_SECTION = 0x0020
T_KIND = 0x0021
T_DISK = 0x0022
T_ADDRESSING = 0x0023
T_STRONG_RECORDS = 0x0024
T_WEAK_RECORD = 0x0025

_CHUNK_INFO = struct.Struct(">IHH")
_INDEX = struct.Struct(">I")
STRONG_RECORD_SIZE = _INDEX.size + HASH_SIZE
MAX_CHUNKS = 0xFFFF

KIND_CODES = {
    ResourceKind.CONFIG: 0,
    ResourceKind.CPU_REGFILE: 1,
    ResourceKind.CPU_TLB: 2,
    ResourceKind.RAM_PAGE: 3,
    ResourceKind.DISK_BLOCK: 4,
    ResourceKind.VHD_STRUCT: 5,
    ResourceKind.NET: 6,
}
PHASE_CODES = {Phase.PUSH: 0, Phase.STOP_AND_COPY: 1, Phase.PULL: 2}
ADDRESSING_CODES = {Addressing.STRONG: 0, Addressing.WEAK: 1}


def _invert(codes: dict) -> dict:
    return {code: value for value, code in codes.items()}


_KINDS = _invert(KIND_CODES)
_PHASES = _invert(PHASE_CODES)
_ADDRESSINGS = _invert(ADDRESSING_CODES)


def encode_name_tlv(name: Name) -> bytes:
    return pack_tlv(T_NAME, b"".join(pack_tlv(T_NAMESEG, segment) for segment in name.segments))


def _decode_name_tlv(value: bytes) -> Name:
    segments = []
    for tlv_type, segment in iter_tlvs(value):
        if tlv_type != T_NAMESEG or not segment:
            raise CorruptManifestError()
        segments.append(segment)
    return Name(segments=tuple(segments))


def chunk_header(version: int, index: int, count: int) -> bytes:
    return pack_tlv(T_CHUNK_INFO, _CHUNK_INFO.pack(version, index, count))


CHUNK_HEADER_SIZE = TL_SIZE + _CHUNK_INFO.size


def root_metadata(vm_name: Name, phase: Phase) -> bytes:
    return pack_tlv(T_PHASE, bytes([PHASE_CODES[phase]])) + encode_name_tlv(vm_name)


def section_header(section: ManifestSection) -> bytes:
    """Section fields that precede the records, without the T_SECTION opening."""
    header = pack_tlv(T_KIND, bytes([KIND_CODES[section.kind]]))
    if section.disk:
        header += pack_tlv(T_DISK, section.disk.encode("utf-8"))
    header += pack_tlv(T_ADDRESSING, bytes([ADDRESSING_CODES[section.addressing]]))
    if section.addressing == Addressing.STRONG:
        header += encode_name_tlv(section.locator_prefix)
    return header


def encode_record(entry: ManifestEntry) -> bytes:
    if isinstance(entry.addressing, StrongHash):
        return _INDEX.pack(entry.index) + entry.addressing.hash.value
    return pack_tlv(T_WEAK_RECORD, _INDEX.pack(entry.index) + encode_name_tlv(entry.addressing.name))


def encode_section(section: ManifestSection, records: list[bytes]) -> bytes:
    body = section_header(section)
    if section.addressing == Addressing.STRONG:
        body += pack_tlv(T_STRONG_RECORDS, b"".join(records))
    else:
        body += b"".join(records)
    return pack_tlv(T_SECTION, body)


def section_overhead(section: ManifestSection) -> int:
    overhead = TL_SIZE + len(section_header(section))
    if section.addressing == Addressing.STRONG:
        overhead += TL_SIZE
    return overhead


def pack_chunks(
    vm_name: Name,
    version: int,
    phase: Phase,
    sections: Iterable[ManifestSection],
    chunk_limit: int,
) -> list[bytes]:
    """Greedy packing of sections into chunk payloads of at most ``chunk_limit`` bytes.

    A section that does not fit is split; the pieces repeat the section header.
    """
    root = root_metadata(vm_name, phase)
    bodies: list[list[bytes]] = [[]]
    used = CHUNK_HEADER_SIZE + len(root)
    if used > chunk_limit:
        raise ManifestBuildError(f"chunk limit {chunk_limit} cannot hold the root metadata")
    for section in sections:
        records = [encode_record(entry) for entry in section.entries]
        overhead = section_overhead(section)
        start = 0
        while start < len(records):
            room = min(chunk_limit - used - overhead, MAX_TLV_LENGTH - overhead + TL_SIZE)
            end = start
            size = 0
            while end < len(records) and size + len(records[end]) <= room:
                size += len(records[end])
                end += 1
            if end == start:
                if not bodies[-1]:
                    raise ManifestBuildError(f"chunk limit {chunk_limit} cannot hold one {section.kind.value} record")
                bodies.append([])
                used = CHUNK_HEADER_SIZE
                continue
            bodies[-1].append(encode_section(section, records[start:end]))
            used += overhead + size
            start = end
    if len(bodies) > MAX_CHUNKS:
        raise ManifestBuildError(f"manifest needs {len(bodies)} chunks")
    count = len(bodies)
    payloads = []
    for index, body in enumerate(bodies):
        payload = chunk_header(version, index, count)
        if index == 0:
            payload += root
        payloads.append(payload + b"".join(body))
    return payloads


def _byte_code(value: bytes, codes: dict):
    if len(value) != 1 or value[0] not in codes:
        raise CorruptManifestError()
    return codes[value[0]]


def _decode_section(value: bytes) -> ManifestSection:
    kind = None
    disk = ""
    addressing = None
    prefix: Optional[Name] = None
    entries: list[ManifestEntry] = []
    for tlv_type, field in iter_tlvs(value):
        if tlv_type == T_KIND:
            kind = _byte_code(field, _KINDS)
        elif tlv_type == T_DISK:
            disk = field.decode("utf-8")
        elif tlv_type == T_ADDRESSING:
            addressing = _byte_code(field, _ADDRESSINGS)
        elif tlv_type == T_NAME:
            prefix = _decode_name_tlv(field)
        elif tlv_type == T_STRONG_RECORDS:
            if kind is None or prefix is None or len(field) % STRONG_RECORD_SIZE:
                raise CorruptManifestError()
            for offset in range(0, len(field), STRONG_RECORD_SIZE):
                (index,) = _INDEX.unpack_from(field, offset)
                digest = field[offset + _INDEX.size : offset + STRONG_RECORD_SIZE]
                entries.append(
                    ManifestEntry(
                        kind=kind,
                        disk=disk,
                        index=index,
                        addressing=StrongHash(locator_prefix=prefix, hash=Hash256(value=digest)),
                    )
                )
        elif tlv_type == T_WEAK_RECORD:
            if kind is None or len(field) < _INDEX.size:
                raise CorruptManifestError()
            (index,) = _INDEX.unpack_from(field, 0)
            name_type, name_value = next(iter_tlvs(field[_INDEX.size :]), (None, b""))
            if name_type != T_NAME:
                raise CorruptManifestError()
            entries.append(
                ManifestEntry(kind=kind, disk=disk, index=index, addressing=WeakName(name=_decode_name_tlv(name_value)))
            )
        else:
            raise CorruptManifestError()
    if kind is None or addressing is None:
        raise CorruptManifestError()
    try:
        return ManifestSection(kind=kind, disk=disk, addressing=addressing, locator_prefix=prefix, entries=tuple(entries))
    except ValueError:
        raise CorruptManifestError()


def _decode_chunk(payload: bytes) -> tuple[tuple[int, int, int], Optional[Phase], Optional[Name], list[ManifestSection]]:
    tlvs = list(iter_tlvs(payload))
    if not tlvs or tlvs[0][0] != T_CHUNK_INFO or len(tlvs[0][1]) != _CHUNK_INFO.size:
        raise CorruptManifestError()
    info = _CHUNK_INFO.unpack(tlvs[0][1])
    phase = None
    vm_name = None
    sections = []
    for tlv_type, value in tlvs[1:]:
        if tlv_type == T_PHASE:
            phase = _byte_code(value, _PHASES)
        elif tlv_type == T_NAME:
            vm_name = _decode_name_tlv(value)
        elif tlv_type == T_SECTION:
            sections.append(_decode_section(value))
        else:
            raise CorruptManifestError()
    return info, phase, vm_name, sections


def parse_manifest(chunks: Iterable[ContentObject]) -> Manifest:
    """Rebuild the logical manifest from its chunks, given in any order."""
    decoded = {}
    expected = None
    for chunk in chunks:
        try:
            info, phase, vm_name, sections = _decode_chunk(chunk.payload)
        except (DecodeError, ValueError):
            raise CorruptManifestError()
        version, index, count = info
        if expected is None:
            expected = (version, count)
        elif expected != (version, count) or (index in decoded and decoded[index][2] != sections):
            raise CorruptManifestError()
        if index >= count:
            raise CorruptManifestError()
        decoded[index] = (phase, vm_name, sections)
    if expected is None:
        raise IncompleteManifestError()
    version, count = expected
    missing = [index for index in range(count) if index not in decoded]
    if missing:
        raise IncompleteManifestError(report={"missing_chunks": missing})
    phase, vm_name, _ = decoded[0]
    if phase is None or vm_name is None:
        raise CorruptManifestError()
    merged: list[ManifestSection] = []
    for index in range(count):
        for section in decoded[index][2]:
            if merged and merged[-1].key == section.key:
                last = merged.pop()
                section = last.model_copy(update={"entries": last.entries + section.entries})
            merged.append(section)
    seen = set()
    for section in merged:
        for entry in section.entries:
            if entry.locator in seen:
                raise CorruptManifestError()
            seen.add(entry.locator)
        if [entry.index for entry in section.entries] != sorted({entry.index for entry in section.entries}):
            raise CorruptManifestError()
    return Manifest(vm_name=vm_name, version=version, phase=phase, sections=tuple(merged), chunk_count=count)


def read_chunk_info(payload: bytes) -> tuple[int, int, int]:
    """(version, chunk index, chunk count) of a chunk payload."""
    try:
        tlv_type, value = next(iter_tlvs(payload), (None, b""))
    except DecodeError:
        raise CorruptManifestError()
    if tlv_type != T_CHUNK_INFO or len(value) != _CHUNK_INFO.size:
        raise CorruptManifestError()
    return _CHUNK_INFO.unpack(value)
