from ccnx_migrate.ccnx.name import name_parse
from ccnx_migrate.ccnx.packet import ContentObject, NamedAddress, compute_object_hash
from ccnx_migrate.store.content_store import ContentStore


def test_put_deduplicates_identical_payloads():
    store = ContentStore()
    first = store.put(ContentObject.nameless(b"A" * 512), "vm3#ver=0")
    second = store.put(ContentObject.nameless(b"A" * 512), "vm3#ver=0")
    store.put(ContentObject.nameless(b"B" * 512), "vm3#ver=1")
    assert first == second
    assert len(store) == 2
    assert store.entry(first).refcount == 2
    stats = store.stats()
    assert stats.unique_objects == 2
    assert stats.logical_references == 3
    assert stats.unique_bytes == 2 * (512 + 16)
    assert stats.logical_bytes == 3 * (512 + 16)
    assert stats.saved_bytes == 512 + 16


def test_get_by_hash_and_name():
    store = ContentStore()
    nameless = ContentObject.nameless(b"page")
    named = ContentObject(name=name_parse("/parc/vm3/config"), payload=b"{}")
    content_hash = store.put(nameless, "owner")
    store.put(named, "owner")
    prefix = name_parse("/nyc/host7")
    assert store.get(NamedAddress(name=prefix, hash_restr=content_hash)) == nameless
    assert store.get_by_hash(content_hash) == nameless
    assert store.get(NamedAddress(name=name_parse("/parc/vm3/config"))) == named
    # a nameless object is not reachable by name alone
    assert store.get(NamedAddress(name=prefix)) is None
    missing = compute_object_hash(ContentObject.nameless(b"missing"))
    assert store.get(NamedAddress(name=prefix, hash_restr=missing)) is None


def test_release_evicts_only_unreferenced():
    store = ContentStore()
    shared = store.put(ContentObject.nameless(b"shared"), "vm3#ver=0")
    only_first = store.put(ContentObject.nameless(b"first"), "vm3#ver=0")
    store.put(ContentObject.nameless(b"shared"), "vm3#ver=1")
    assert store.owners() == ["vm3#ver=0", "vm3#ver=1"]
    assert store.release("vm3#ver=0") == 1
    assert store.contains_hash(shared)
    assert not store.contains_hash(only_first)
    assert store.release("vm3#ver=0") == 0
    assert store.release("vm3#ver=1") == 1
    assert len(store) == 0
    # cumulative accounting survives release
    assert store.stats().unique_objects == 2
