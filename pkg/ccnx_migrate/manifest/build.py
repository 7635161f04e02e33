# Copyright Sierra

from typing import Iterable, Optional, Sequence

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.ccnx.packet import (
    ContentObject,
    NamedAddress,
    compute_object_hash,
)
from ccnx_migrate.exception import (
    ImageError,
    IntegrityError,
    ManifestBuildError,
    PlacementError,
)
from ccnx_migrate.machine.image import (
    VHD_STRUCTS,
    Locator,
    ResourceReader,
    VmImage,
    resource_path,
)
from ccnx_migrate.manifest.codec import pack_chunks
from ccnx_migrate.manifest.model import (
    BuiltManifest,
    Manifest,
    ManifestEntry,
    ManifestSection,
    StrongHash,
    WeakName,
    checkpoint_id,
)
from ccnx_migrate.store.content_store import ContentStore
from ccnx_migrate.types import Addressing, Phase, ResourceKind, VmConfig

DEFAULT_CHUNK_LIMIT = 64_000

_KIND_RANK = {
    ResourceKind.CONFIG: 0,
    ResourceKind.CPU_REGFILE: 1,
    ResourceKind.CPU_TLB: 2,
    ResourceKind.RAM_PAGE: 3,
    ResourceKind.VHD_STRUCT: 5,
    ResourceKind.DISK_BLOCK: 6,
    ResourceKind.NET: 7,
}


def naming_order(locator: Locator) -> tuple[int, str, int]:
    rank = _KIND_RANK[locator.kind]
    if locator.kind == ResourceKind.CONFIG and locator.disk:
        rank = 4
    return (rank, locator.disk, locator.index)


def checkpoint_base(prefix: Name, version: int) -> Name:
    return prefix.child("checkpoint", f"ver={version}")


def manifest_name(base: Name) -> Name:
    return base.child("manifest")


def chunk_name(base: Name, index: int) -> Name:
    return base.child("manifest", f"chunk={index}")


def section_path(locator: Locator) -> tuple[str, ...]:
    """Name components shared by every resource of the locator's section."""
    if locator.disk:
        return ("disk", locator.disk)
    if locator.kind in (ResourceKind.CPU_REGFILE, ResourceKind.CPU_TLB):
        return ("cpu",)
    if locator.kind == ResourceKind.RAM_PAGE:
        return ("ram",)
    return (locator.kind.value,)


def build_manifest(
    reader: ResourceReader,
    selection: Iterable[Locator],
    phase: Phase,
    version: int,
    store: ContentStore,
    base: Name,
    weak_kinds: frozenset[ResourceKind] = frozenset(),
    chunk_limit: int = DEFAULT_CHUNK_LIMIT,
    hash_prefix: Optional[Name] = None,
    shared_stores: Sequence[tuple[Name, ContentStore]] = (),
) -> BuiltManifest:
    """Describe ``selection`` as checkpoint ``version`` published under ``base``.

    Strong resources become nameless objects put into ``store`` and are referenced by
    (locator prefix, hash). The locator prefix is ``hash_prefix`` for host-scoped hashes,
    the prefix of a shared store already holding the object, or the section prefix under
    ``base``. Resources of ``weak_kinds`` are referenced by their enumerated name.
    """
    config = reader.config
    owner = checkpoint_id(config.name, version)
    groups: dict[tuple, list[ManifestEntry]] = {}
    payload_bytes = 0
    strong_objects = 0
    weak_entries = 0
    for locator in sorted(set(selection), key=naming_order):
        try:
            data = reader.read(locator)
        except ImageError as e:
            raise ManifestBuildError(f"cannot build ver={version}: {e.short_message}")
        payload_bytes += len(data)
        if locator.kind in weak_kinds:
            addressing = WeakName(name=base.concat(Name.of(*resource_path(config, locator))))
            key = (locator.kind, locator.disk, Addressing.WEAK, None)
            weak_entries += 1
        else:
            obj = ContentObject.nameless(data)
            prefix = None
            content_hash = None
            if shared_stores:
                content_hash = compute_object_hash(obj)
                for shared_prefix, shared in shared_stores:
                    if shared.contains_hash(content_hash):
                        prefix = shared_prefix
                        break
            if prefix is None:
                content_hash = store.put(obj, owner)
                strong_objects += 1
                prefix = hash_prefix if hash_prefix is not None else base.child(*section_path(locator))
            addressing = StrongHash(locator_prefix=prefix, hash=content_hash)
            key = (locator.kind, locator.disk, Addressing.STRONG, prefix)
        groups.setdefault(key, []).append(
            ManifestEntry(kind=locator.kind, disk=locator.disk, index=locator.index, addressing=addressing)
        )
    sections = tuple(
        ManifestSection(kind=kind, disk=disk, addressing=mode, locator_prefix=prefix, entries=tuple(entries))
        for (kind, disk, mode, prefix), entries in groups.items()
    )
    payloads = pack_chunks(config.name, version, phase, sections, chunk_limit)
    manifest = Manifest(
        vm_name=config.name,
        version=version,
        phase=phase,
        sections=sections,
        chunk_count=len(payloads),
    )
    chunks = [ContentObject(name=chunk_name(base, index), payload=payload) for index, payload in enumerate(payloads)]
    return BuiltManifest(
        manifest=manifest,
        chunks=chunks,
        payload_bytes=payload_bytes,
        strong_objects=strong_objects,
        weak_entries=weak_entries,
    )


def entry_fetch_address(entry: ManifestEntry) -> NamedAddress:
    if isinstance(entry.addressing, StrongHash):
        return NamedAddress(name=entry.addressing.locator_prefix, hash_restr=entry.addressing.hash)
    return NamedAddress(name=entry.addressing.name)


def _check_placement(config: VmConfig, locator: Locator) -> None:
    kind = locator.kind
    if locator.index < 0:
        raise PlacementError(f"{locator} has a negative index")
    if kind in (ResourceKind.DISK_BLOCK, ResourceKind.VHD_STRUCT) or (kind == ResourceKind.CONFIG and locator.disk):
        disk = config.disk(locator.disk)
        if disk is None:
            raise PlacementError(f"{locator} names unknown disk {locator.disk!r}")
        if kind == ResourceKind.DISK_BLOCK and locator.index >= disk.capacity_blocks:
            raise PlacementError(f"{locator} is beyond the {disk.capacity_blocks}-block capacity")
        if kind == ResourceKind.VHD_STRUCT and locator.index >= len(VHD_STRUCTS):
            raise PlacementError(f"{locator} is not a vhd control structure")
        return
    bounds = {
        ResourceKind.CONFIG: 1,
        ResourceKind.CPU_REGFILE: config.cpu_n,
        ResourceKind.CPU_TLB: config.cpu_n,
        ResourceKind.RAM_PAGE: config.ram_pages,
        ResourceKind.NET: len(config.net_interfaces),
    }
    if locator.index >= bounds[kind]:
        raise PlacementError(f"{locator} is out of range")


def apply_entry(image: VmImage, entry: ManifestEntry, obj: ContentObject) -> Locator:
    """Place ``obj`` at the entry's locator; strong entries are verified against their hash."""
    if isinstance(entry.addressing, StrongHash):
        if compute_object_hash(obj) != entry.addressing.hash:
            raise IntegrityError(f"object for {entry.locator} does not match hash {entry.addressing.hash}")
    elif obj.name != entry.addressing.name:
        raise IntegrityError(f"object named {obj.name} answered {entry.addressing.name}")
    locator = entry.locator
    _check_placement(image.config, locator)
    image.place(locator, obj.payload)
    return locator


def format_manifest(manifest: Manifest) -> str:
    lines = [
        f"manifest {manifest.vm_name} ver={manifest.version} phase={manifest.phase.value} "
        f"chunks={manifest.chunk_count} entries={len(manifest)}"
    ]
    for section in manifest.sections:
        where = f" disk={section.disk}" if section.disk else ""
        prefix = f" prefix={section.locator_prefix}" if section.locator_prefix is not None else ""
        lines.append(f"  section {section.kind.value}{where} {section.addressing.value}{prefix} ({len(section.entries)})")
        for entry in section.entries:
            if isinstance(entry.addressing, StrongHash):
                lines.append(f"    {entry.index:>8} hash={entry.addressing.hash}")
            else:
                lines.append(f"    {entry.index:>8} name={entry.addressing.name}")
    return "\n".join(lines)
