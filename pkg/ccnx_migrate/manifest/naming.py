# Copyright Sierra

"""Byte overhead of three ways to name checkpoint objects.

``hash``: nameless objects fetched by (section prefix, hash), indexed by the manifest.
``metadata``: every object fully named and carrying a placement metadata field, no manifest.
``link``: every object fully named, the manifest lists a link to each name.
"""

from typing import Iterator

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.ccnx.packet import FIXED_HEADER_SIZE, HASH_SIZE, NAMELESS_OVERHEAD, name_tlv_size
from ccnx_migrate.ccnx.tlv import TL_SIZE
from ccnx_migrate.machine.build import object_count
from ccnx_migrate.machine.image import VHD_STRUCTS
from ccnx_migrate.manifest.build import checkpoint_base
from ccnx_migrate.manifest.codec import STRONG_RECORD_SIZE
from ccnx_migrate.types import NamingOverheadRow, VmConfig

# kind byte plus u32 index
METADATA_FIELD_SIZE = TL_SIZE + 1 + 4


def _digits_total(n: int) -> int:
    """Sum of len(str(i)) for i in range(n)."""
    total = 0
    low = 0
    digits = 1
    while low < n:
        high = min(n, 10**digits)
        total += (high - low) * digits
        low = high
        digits += 1
    return total


class _Group(object):
    """``count`` resources whose names share ``fixed`` segments plus one numeric segment if ``numbered``."""

    def __init__(self, count: int, fixed: tuple[str, ...], section: tuple[str, ...], numbered: bool) -> None:
        self.count = count
        self.fixed = fixed
        self.section = section
        self.numbered = numbered

    def suffix_bytes(self) -> int:
        """Total name TLV bytes the resource-specific suffixes add over all resources."""
        per_resource = sum(TL_SIZE + len(segment.encode("utf-8")) for segment in self.fixed)
        total = self.count * per_resource
        if self.numbered:
            total += self.count * TL_SIZE + _digits_total(self.count)
        return total


def _groups(config: VmConfig) -> Iterator[_Group]:
    yield _Group(1, ("config",), ("config",), False)
    yield _Group(config.cpu_n, ("cpu", "regfile"), ("cpu",), True)
    yield _Group(config.cpu_n, ("cpu", "tlb"), ("cpu",), True)
    yield _Group(config.ram_pages, ("ram", "page"), ("ram",), True)
    for disk in config.disks:
        section = ("disk", disk.disk_name)
        yield _Group(1, section + ("config",), section, False)
        for tag in VHD_STRUCTS:
            yield _Group(1, section + ("vhd", tag), section, False)
        yield _Group(disk.block_count, section + ("block",), section, True)
    for ifname in config.net_interfaces:
        yield _Group(1, ("net", ifname), ("net",), False)


def naming_overhead(config: VmConfig, version: int = 0) -> list[NamingOverheadRow]:
    base = checkpoint_base(config.name, version)
    base_size = name_tlv_size(base)
    objects = object_count(config).total
    full_names = 0
    section_names = 0
    for group in _groups(config):
        full_names += group.count * base_size + group.suffix_bytes()
        section_names += group.count * name_tlv_size(base.concat(Name.of(*group.section)))
    interest_framing = FIXED_HEADER_SIZE + TL_SIZE
    object_framing = FIXED_HEADER_SIZE + 2 * TL_SIZE
    schemes = {
        "hash": (
            objects * NAMELESS_OVERHEAD,
            objects * (interest_framing + TL_SIZE + HASH_SIZE) + section_names,
            objects * STRONG_RECORD_SIZE,
        ),
        "metadata": (
            objects * (object_framing + METADATA_FIELD_SIZE) + full_names,
            objects * interest_framing + full_names,
            0,
        ),
        "link": (
            objects * object_framing + full_names,
            objects * interest_framing + full_names,
            objects * TL_SIZE + full_names,
        ),
    }
    rows = []
    for scheme, (per_object, interest, manifest) in schemes.items():
        rows.append(
            NamingOverheadRow(
                scheme=scheme,
                per_object_bytes=per_object / objects,
                interest_bytes=interest / objects,
                manifest_bytes_per_entry=manifest / objects,
                objects=objects,
                total_overhead_bytes=per_object + interest + manifest,
            )
        )
    return rows
