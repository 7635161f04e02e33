# Copyright Sierra

import json
from typing import Dict, List

import numpy as np
from pydantic import BaseModel

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.exception import ConfigError
from ccnx_migrate.machine.image import Locator, VmImage, iter_locators, resource_name
from ccnx_migrate.types import DiskConfig, ResourceKind, VmConfig

VHD_FOOTER_COOKIE = b"conectix"
VHD_HEADER_COOKIE = b"cxsparse"
BAT_UNUSED = 0xFFFFFFFF
SECTOR_SIZE = 512


class ObjectCount(BaseModel):
    disks: Dict[str, int]
    disk_total: int
    ram_pages: int
    cpu_objects: int
    config_objects: int
    net_objects: int
    total: int


def object_count(config: VmConfig) -> ObjectCount:
    # per disk: data blocks + header, BAT, footer + disk config
    disks = {disk.disk_name: disk.block_count + 3 + 1 for disk in config.disks}
    disk_total = sum(disks.values())
    cpu_objects = 2 * config.cpu_n
    net_objects = len(config.net_interfaces)
    return ObjectCount(
        disks=disks,
        disk_total=disk_total,
        ram_pages=config.ram_pages,
        cpu_objects=cpu_objects,
        config_objects=1,
        net_objects=net_objects,
        total=disk_total + config.ram_pages + cpu_objects + 1 + net_objects,
    )


def enumerate_names(config: VmConfig) -> List[Name]:
    base = config.name
    return [resource_name(config, base, locator) for locator in iter_locators(config)]


def _slices(data: bytes, size: int) -> List[bytes]:
    return [data[i : i + size] for i in range(0, len(data), size)]


def _vhd_structs(disk: DiskConfig) -> List[bytes]:
    size = disk.vhd_struct_size
    footer = VHD_FOOTER_COOKIE + disk.capacity_bytes.to_bytes(8, "big")
    header = VHD_HEADER_COOKIE + disk.capacity_blocks.to_bytes(4, "big") + disk.block_size.to_bytes(4, "big")
    entries = size // 4
    bat = np.full(entries, BAT_UNUSED, dtype=">u4")
    allocated = min(entries, disk.block_count)
    bat[:allocated] = np.arange(allocated, dtype=np.uint64) * (disk.block_size // SECTOR_SIZE or 1)
    return [
        header[:size].ljust(size, b"\x00"),
        bat.tobytes().ljust(size, b"\xff"),
        footer[:size].ljust(size, b"\x00"),
    ]


def _disk_blocks(disk: DiskConfig, rng: np.random.Generator, duplicate_fraction: float) -> List[bytes]:
    count = disk.block_count
    if count == 0:
        return []
    blocks = _slices(rng.bytes(count * disk.block_size), disk.block_size)
    if duplicate_fraction > 0.0:
        template = rng.bytes(disk.block_size)
        copies = rng.random(count) < duplicate_fraction
        for index in np.flatnonzero(copies):
            blocks[index] = template
    return blocks


def build_vm(
    config: VmConfig,
    seed: int,
    duplicate_fraction: float = 0.0,
    shared_pages: int = 0,
) -> VmImage:
    """Deterministic machine state for ``config``.

    ``duplicate_fraction`` of the populated blocks of every disk without its own
    ``content_seed`` are copies of one template block. The first ``shared_pages`` RAM
    pages are byte copies of the first disk blocks of equal size.
    """
    if not 0.0 <= duplicate_fraction <= 1.0:
        raise ConfigError(f"duplicate fraction {duplicate_fraction} is outside [0, 1]")
    if shared_pages > config.ram_pages:
        raise ConfigError(f"{shared_pages} shared pages exceed {config.ram_pages} RAM pages")
    rng = np.random.default_rng(seed)
    resources: dict[Locator, bytes] = {
        Locator(ResourceKind.CONFIG): config.model_dump_json().encode("utf-8"),
    }
    for cpu in range(config.cpu_n):
        resources[Locator(ResourceKind.CPU_REGFILE, index=cpu)] = rng.bytes(config.regfile_size)
        resources[Locator(ResourceKind.CPU_TLB, index=cpu)] = rng.bytes(config.tlb_size)
    for page, data in enumerate(_slices(rng.bytes(config.ram_bytes), config.page_size)):
        resources[Locator(ResourceKind.RAM_PAGE, index=page)] = data
    disk_blocks: dict[str, List[bytes]] = {}
    for disk in config.disks:
        name = disk.disk_name
        resources[Locator(ResourceKind.CONFIG, disk=name)] = disk.model_dump_json().encode("utf-8")
        for tag, data in enumerate(_vhd_structs(disk)):
            resources[Locator(ResourceKind.VHD_STRUCT, disk=name, index=tag)] = data
        if disk.content_seed is not None:
            blocks = _disk_blocks(disk, np.random.default_rng(disk.content_seed), 0.0)
        else:
            blocks = _disk_blocks(disk, rng, duplicate_fraction)
        disk_blocks[name] = blocks
        for block, data in enumerate(blocks):
            resources[Locator(ResourceKind.DISK_BLOCK, disk=name, index=block)] = data
    if shared_pages:
        source = next(
            (
                disk
                for disk in config.disks
                if disk.block_size == config.page_size and disk.block_count >= shared_pages
            ),
            None,
        )
        if source is None:
            raise ConfigError("shared pages need a disk whose block size equals the page size")
        for page in range(shared_pages):
            resources[Locator(ResourceKind.RAM_PAGE, index=page)] = disk_blocks[source.disk_name][page]
    for index, ifname in enumerate(config.net_interfaces):
        mac = rng.integers(0, 256, size=6, dtype=np.uint8)
        mac[0] = (mac[0] & 0xFE) | 0x02
        record = {"ifname": ifname, "mac": ":".join(f"{octet:02x}" for octet in mac)}
        resources[Locator(ResourceKind.NET, index=index)] = json.dumps(record, sort_keys=True).encode("utf-8")
    return VmImage(config, resources)
