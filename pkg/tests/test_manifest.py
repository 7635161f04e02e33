import pytest

from ccnx_migrate.ccnx.name import name_parse
from ccnx_migrate.ccnx.packet import ContentObject, compute_object_hash
from ccnx_migrate.ccnx.tlv import iter_tlvs
from ccnx_migrate.exception import (
    CorruptManifestError,
    IncompleteManifestError,
    IntegrityError,
    ManifestBuildError,
    PlacementError,
)
from ccnx_migrate.machine.build import build_vm, object_count
from ccnx_migrate.machine.image import Locator, VmImage
from ccnx_migrate.manifest.build import (
    apply_entry,
    build_manifest,
    checkpoint_base,
    chunk_name,
    entry_fetch_address,
    format_manifest,
    manifest_name,
)
from ccnx_migrate.manifest.codec import T_SECTION, parse_manifest, read_chunk_info
from ccnx_migrate.manifest.model import ManifestEntry, StrongHash, WeakName, checkpoint_id
from ccnx_migrate.manifest.naming import naming_overhead
from ccnx_migrate.store.content_store import ContentStore
from ccnx_migrate.types import Phase, ResourceKind


@pytest.fixture
def image(tiny_vm):
    return build_vm(tiny_vm, seed=1)


def _build(image, chunk_limit=64_000, **kwargs):
    store = kwargs.pop("store", ContentStore())
    base = checkpoint_base(image.config.name, 0)
    built = build_manifest(
        image.snapshot(0), image.locators(), Phase.PUSH, 0, store, base, chunk_limit=chunk_limit, **kwargs
    )
    return built, store, base


def test_control_names(tiny_vm):
    base = checkpoint_base(tiny_vm.name, 3)
    assert str(base) == "/parc/vm3/checkpoint/ver=3"
    assert str(manifest_name(base)) == "/parc/vm3/checkpoint/ver=3/manifest"
    assert str(chunk_name(base, 2)) == "/parc/vm3/checkpoint/ver=3/manifest/chunk=2"
    assert checkpoint_id(tiny_vm.name, 3) == "/parc/vm3#ver=3"


def test_strong_manifest_parses_back(image):
    built, store, base = _build(image)
    assert len(built.chunks) == 1
    assert len(built.manifest) == len(image)
    assert built.strong_objects == len(image)
    assert len(store) == len({compute_object_hash(ContentObject.nameless(image.read(loc))) for loc in image.locators()})
    assert built.payload_bytes == sum(image.size_of(loc) for loc in image.locators())
    assert read_chunk_info(built.chunks[0].payload) == (0, 0, 1)
    assert parse_manifest(built.chunks) == built.manifest
    ram = [section for section in built.manifest.sections if section.kind == ResourceKind.RAM_PAGE]
    assert ram[0].locator_prefix == base.child("ram")


def test_chunked_manifest_matches_single_chunk(image):
    single, _, _ = _build(image)
    chunked, _, _ = _build(image, chunk_limit=512)
    assert len(chunked.chunks) > 1
    assert all(len(chunk.payload) <= 512 for chunk in chunked.chunks)
    parsed = parse_manifest(reversed(chunked.chunks))
    assert parsed.chunk_count == len(chunked.chunks)
    assert parsed.logical_view() == single.manifest.logical_view()


def test_weak_sections_carry_names(image):
    built, _, base = _build(image, weak_kinds=frozenset({ResourceKind.RAM_PAGE}))
    assert built.weak_entries == image.config.ram_pages
    parsed = parse_manifest(built.chunks)
    page = next(entry for entry in parsed.entries() if entry.kind == ResourceKind.RAM_PAGE and entry.index == 5)
    assert page.addressing == WeakName(name=base.child("ram", "page", "5"))
    assert not page.is_strong
    assert entry_fetch_address(page).hash_restr is None


def test_host_scoped_and_shared_prefixes(image):
    host = name_parse("/nyc/host7")
    built, _, _ = _build(image, hash_prefix=host)
    assert {entry.addressing.locator_prefix for entry in built.manifest.entries()} == {host}

    objectstore = ContentStore()
    block = Locator(ResourceKind.DISK_BLOCK, disk="hda", index=0)
    objectstore.put(ContentObject.nameless(image.read(block)), "objectstore")
    shared_prefix = name_parse("/nyc/objectstore")
    image = build_vm(image.config, seed=1)
    built, store, _ = _build(image, shared_stores=[(shared_prefix, objectstore)])
    entry = next(entry for entry in built.manifest.entries() if entry.locator == block)
    assert entry.addressing.locator_prefix == shared_prefix
    assert not store.contains_hash(entry.addressing.hash)
    assert built.strong_objects == len(image) - 1
    address = entry_fetch_address(entry)
    assert address.name == shared_prefix and address.hash_restr == entry.addressing.hash


def test_build_errors(image):
    with pytest.raises(ManifestBuildError):
        _build(image, chunk_limit=32)
    missing = Locator(ResourceKind.DISK_BLOCK, disk="hda", index=9999)
    with pytest.raises(ManifestBuildError):
        build_manifest(image.snapshot(1), [missing], Phase.PUSH, 0, ContentStore(), checkpoint_base(image.config.name, 0))


def test_missing_chunk_is_incomplete(image):
    built, _, _ = _build(image, chunk_limit=512)
    with pytest.raises(IncompleteManifestError) as e:
        parse_manifest(built.chunks[1:])
    assert e.value.report == {"missing_chunks": [0]}
    with pytest.raises(IncompleteManifestError):
        parse_manifest([])


def test_unknown_kind_code_is_corrupt(image):
    built, _, _ = _build(image)
    payload = bytearray(built.chunks[0].payload)
    offset = 0
    for tlv_type, value in iter_tlvs(bytes(payload)):
        if tlv_type == T_SECTION:
            break
        offset += 4 + len(value)
    # T_SECTION header, then the T_KIND header, then the kind byte
    payload[offset + 8] = 0xEE
    with pytest.raises(CorruptManifestError):
        parse_manifest([ContentObject(name=built.chunks[0].name, payload=bytes(payload))])
    with pytest.raises(CorruptManifestError):
        read_chunk_info(b"\x00\x99\x00\x00")


def test_apply_entry_verifies_and_places(image):
    built, store, _ = _build(image)
    destination = VmImage.blank(image.config)
    for entry in built.manifest.entries():
        apply_entry(destination, entry, store.get_by_hash(entry.addressing.hash))
    assert all(destination.read(loc) == image.read(loc) for loc in image.locators())

    entry = next(entry for entry in built.manifest.entries() if entry.kind == ResourceKind.RAM_PAGE)
    with pytest.raises(IntegrityError):
        apply_entry(destination, entry, ContentObject.nameless(bytes(4096)))

    payload = image.read(entry.locator)
    beyond = ManifestEntry(
        kind=ResourceKind.RAM_PAGE,
        index=image.config.ram_pages,
        addressing=StrongHash(locator_prefix=entry.addressing.locator_prefix, hash=entry.addressing.hash),
    )
    with pytest.raises(PlacementError) as e:
        apply_entry(destination, beyond, ContentObject.nameless(payload))
    assert not isinstance(e.value, IntegrityError)

    weak = ManifestEntry(kind=ResourceKind.RAM_PAGE, index=0, addressing=WeakName(name=name_parse("/parc/vm3/x")))
    with pytest.raises(IntegrityError):
        apply_entry(destination, weak, ContentObject(name=name_parse("/parc/vm3/y"), payload=bytes(4096)))


def test_format_manifest(image):
    built, _, _ = _build(image)
    text = format_manifest(built.manifest)
    assert text.startswith("manifest /parc/vm3 ver=0 phase=push chunks=1")
    assert "section ram_page strong" in text


def test_naming_overhead_schemes(tiny_vm):
    rows = {row.scheme: row for row in naming_overhead(tiny_vm)}
    assert set(rows) == {"hash", "metadata", "link"}
    objects = object_count(tiny_vm).total
    assert all(row.objects == objects for row in rows.values())
    assert rows["hash"].per_object_bytes == 16.0
    assert rows["metadata"].per_object_bytes > rows["link"].per_object_bytes > rows["hash"].per_object_bytes
    assert rows["metadata"].manifest_bytes_per_entry == 0.0
