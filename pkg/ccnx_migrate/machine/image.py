# Copyright Sierra

import weakref
from typing import Iterable, NamedTuple, Optional, Protocol

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.exception import (
    FrozenImageError,
    ImageError,
    PlacementError,
    SizeMismatchError,
    SnapshotOrderError,
)
from ccnx_migrate.types import ResourceKind, VmConfig

VHD_STRUCTS = ("header", "bat", "footer")


class Locator(NamedTuple):
    kind: ResourceKind
    disk: str = ""
    index: int = 0

    def __str__(self) -> str:
        if self.disk:
            return f"{self.kind.value}[{self.disk}:{self.index}]"
        return f"{self.kind.value}[{self.index}]"


def sort_key(locator: Locator) -> tuple[str, str, int]:
    return (locator.kind.value, locator.disk, locator.index)


WRITABLE_KINDS = frozenset({ResourceKind.RAM_PAGE, ResourceKind.DISK_BLOCK})
CPU_KINDS = frozenset({ResourceKind.CPU_REGFILE, ResourceKind.CPU_TLB})


def iter_locators(config: VmConfig) -> Iterable[Locator]:
    """Every resource of ``config`` in naming-hierarchy order."""
    yield Locator(ResourceKind.CONFIG)
    for cpu in range(config.cpu_n):
        yield Locator(ResourceKind.CPU_REGFILE, index=cpu)
        yield Locator(ResourceKind.CPU_TLB, index=cpu)
    for page in range(config.ram_pages):
        yield Locator(ResourceKind.RAM_PAGE, index=page)
    for disk in config.disks:
        yield Locator(ResourceKind.CONFIG, disk=disk.disk_name)
        for tag in range(len(VHD_STRUCTS)):
            yield Locator(ResourceKind.VHD_STRUCT, disk=disk.disk_name, index=tag)
        for block in range(disk.block_count):
            yield Locator(ResourceKind.DISK_BLOCK, disk=disk.disk_name, index=block)
    for index in range(len(config.net_interfaces)):
        yield Locator(ResourceKind.NET, index=index)


def resource_path(config: VmConfig, locator: Locator) -> tuple[str, ...]:
    kind = locator.kind
    if kind == ResourceKind.CONFIG:
        if locator.disk:
            return ("disk", locator.disk, "config")
        return ("config",)
    if kind == ResourceKind.CPU_REGFILE:
        return ("cpu", str(locator.index), "regfile")
    if kind == ResourceKind.CPU_TLB:
        return ("cpu", str(locator.index), "tlb")
    if kind == ResourceKind.RAM_PAGE:
        return ("ram", "page", str(locator.index))
    if kind == ResourceKind.DISK_BLOCK:
        return ("disk", locator.disk, "block", str(locator.index))
    if kind == ResourceKind.VHD_STRUCT:
        return ("disk", locator.disk, "vhd", VHD_STRUCTS[locator.index])
    return ("net", config.net_interfaces[locator.index])


def locator_from_path(config: VmConfig, path: tuple[str, ...]) -> Optional[Locator]:
    """Inverse of ``resource_path``; None for paths that name no resource."""
    try:
        match path:
            case ("config",):
                return Locator(ResourceKind.CONFIG)
            case ("cpu", cpu, "regfile"):
                return Locator(ResourceKind.CPU_REGFILE, index=int(cpu))
            case ("cpu", cpu, "tlb"):
                return Locator(ResourceKind.CPU_TLB, index=int(cpu))
            case ("ram", "page", page):
                return Locator(ResourceKind.RAM_PAGE, index=int(page))
            case ("disk", disk, "config"):
                return Locator(ResourceKind.CONFIG, disk=disk)
            case ("disk", disk, "block", block):
                return Locator(ResourceKind.DISK_BLOCK, disk=disk, index=int(block))
            case ("disk", disk, "vhd", tag) if tag in VHD_STRUCTS:
                return Locator(ResourceKind.VHD_STRUCT, disk=disk, index=VHD_STRUCTS.index(tag))
            case ("net", ifname) if ifname in config.net_interfaces:
                return Locator(ResourceKind.NET, index=config.net_interfaces.index(ifname))
    except ValueError:
        return None
    return None


def resource_name(config: VmConfig, base: Name, locator: Locator) -> Name:
    return base.child(*resource_path(config, locator))


def fixed_size(config: VmConfig, locator: Locator) -> Optional[int]:
    """Byte size every value of ``locator`` must have, or None when it is free-form."""
    kind = locator.kind
    if kind == ResourceKind.RAM_PAGE:
        return config.page_size
    if kind == ResourceKind.CPU_REGFILE:
        return config.regfile_size
    if kind == ResourceKind.CPU_TLB:
        return config.tlb_size
    if kind in (ResourceKind.DISK_BLOCK, ResourceKind.VHD_STRUCT):
        disk = config.disk(locator.disk)
        if disk is None:
            return None
        return disk.block_size if kind == ResourceKind.DISK_BLOCK else disk.vhd_struct_size
    return None


class ResourceReader(Protocol):
    config: VmConfig

    def read(self, locator: Locator) -> bytes: ...

    def locators(self) -> list[Locator]: ...


class Snapshot(object):
    """Copy-on-write view of a VmImage at checkpoint version ``version``.

    Unmodified resources are shared with the live image; the image hands over the old
    bytes on the first write after the snapshot.
    """

    def __init__(self, image: "VmImage", version: int) -> None:
        self.config = image.config
        self.version = version
        self._image = image
        self._locators = frozenset(image._resources)
        self._preserved: dict[Locator, bytes] = {}

    def read(self, locator: Locator) -> bytes:
        if locator not in self._locators:
            raise ImageError(f"{locator} is not part of snapshot ver={self.version}")
        preserved = self._preserved.get(locator)
        if preserved is not None:
            return preserved
        return self._image._resources[locator]

    def __contains__(self, locator: Locator) -> bool:
        return locator in self._locators

    def locators(self) -> list[Locator]:
        return sorted(self._locators, key=sort_key)

    def release(self) -> None:
        self._image._snapshots.discard(self)

    def _preserve(self, locator: Locator, old: bytes) -> None:
        if locator in self._locators and locator not in self._preserved:
            self._preserved[locator] = old


class VmImage(object):
    def __init__(self, config: VmConfig, resources: dict[Locator, bytes]) -> None:
        self.config = config
        self._resources = resources
        self.frozen = False
        self._snapshots: "weakref.WeakSet[Snapshot]" = weakref.WeakSet()
        self._last_version: Optional[int] = None
        # writes recorded per epoch; epoch v spans snapshot v to snapshot v+1
        self._epochs: dict[Optional[int], set[Locator]] = {None: set()}

    @classmethod
    def blank(cls, config: VmConfig) -> "VmImage":
        """Destination-side allocation: fixed-size resources zero-filled, no disk blocks."""
        resources: dict[Locator, bytes] = {}
        for locator in iter_locators(config):
            if locator.kind in (ResourceKind.DISK_BLOCK, ResourceKind.CONFIG, ResourceKind.NET):
                continue
            resources[locator] = bytes(fixed_size(config, locator))
        return cls(config, resources)

    def __contains__(self, locator: Locator) -> bool:
        return locator in self._resources

    def __len__(self) -> int:
        return len(self._resources)

    def read(self, locator: Locator) -> bytes:
        try:
            return self._resources[locator]
        except KeyError:
            raise ImageError(f"{locator} does not exist")

    def locators(self) -> list[Locator]:
        return sorted(self._resources, key=sort_key)

    def size_of(self, locator: Locator) -> int:
        return len(self.read(locator))

    @property
    def dirty(self) -> frozenset[Locator]:
        return frozenset(self._epochs[self._last_version])

    def apply_write(self, locator: Locator, data: bytes) -> None:
        if self.frozen:
            raise FrozenImageError(f"write to {locator} rejected: image is frozen")
        old = self.read(locator)
        if len(data) != len(old):
            raise SizeMismatchError(f"write to {locator} of {len(data)} bytes, resource has {len(old)}")
        for snapshot in self._snapshots:
            snapshot._preserve(locator, old)
        self._resources[locator] = bytes(data)
        self._epochs[self._last_version].add(locator)

    def place(self, locator: Locator, data: bytes) -> None:
        """Destination placement; bypasses dirty tracking."""
        expected = fixed_size(self.config, locator)
        if expected is not None and len(data) != expected:
            raise PlacementError(f"{locator} expects {expected} bytes, got {len(data)}")
        old = self._resources.get(locator)
        if old is not None:
            for snapshot in self._snapshots:
                snapshot._preserve(locator, old)
        self._resources[locator] = bytes(data)

    def freeze(self) -> None:
        self.frozen = True

    def unfreeze(self) -> None:
        self.frozen = False

    def snapshot(self, version: int) -> Snapshot:
        if self._last_version is not None and version <= self._last_version:
            raise SnapshotOrderError(
                f"snapshot version {version} must be greater than {self._last_version}"
            )
        snapshot = Snapshot(self, version)
        self._snapshots.add(snapshot)
        self._last_version = version
        self._epochs[version] = set()
        return snapshot

    def dirty_set(self, since: int) -> frozenset[Locator]:
        if since not in self._epochs:
            raise ImageError(f"no snapshot with version {since}")
        written: set[Locator] = set()
        for version, epoch in self._epochs.items():
            if version is not None and version >= since:
                written |= epoch
        return frozenset(written)

    def dirty_bytes(self, locators: Iterable[Locator]) -> int:
        return sum(len(self._resources[locator]) for locator in locators)
