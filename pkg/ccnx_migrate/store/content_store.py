# Copyright Sierra

import logging
from collections import defaultdict
from typing import Optional

from pydantic import BaseModel

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.ccnx.packet import (
    ContentObject,
    Hash256,
    Interest,
    NamedAddress,
    compute_object_hash,
    match_restrictions,
    object_wire_size,
)

logger = logging.getLogger(__name__)


class StoreEntry(BaseModel):
    object: ContentObject
    hash: Hash256
    size: int
    refcount: int = 0
    logical_refs: int = 0


class DedupStats(BaseModel):
    unique_objects: int = 0
    logical_references: int = 0
    unique_bytes: int = 0
    logical_bytes: int = 0
    saved_bytes: int = 0


class ContentStore(object):
    """Hash-indexed, reference-counted store of Content Objects.

    Owners are checkpoint identifiers. Byte accounting uses the full encoded packet
    size, so a nameless object of p payload bytes counts p + 16.
    """

    def __init__(self) -> None:
        self._entries: dict[Hash256, StoreEntry] = {}
        self._by_name: dict[Name, Hash256] = {}
        self._owners: dict[str, list[Hash256]] = defaultdict(list)
        # cumulative accounting, unaffected by release
        self._seen: dict[Hash256, int] = {}
        self._logical_references = 0
        self._logical_bytes = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, content_hash: Hash256) -> bool:
        return content_hash in self._entries

    def contains_hash(self, content_hash: Hash256) -> bool:
        return content_hash in self._entries

    def put(self, obj: ContentObject, owner: str) -> Hash256:
        content_hash = compute_object_hash(obj)
        entry = self._entries.get(content_hash)
        if entry is None:
            entry = StoreEntry(object=obj, hash=content_hash, size=object_wire_size(obj))
            self._entries[content_hash] = entry
            if obj.name is not None:
                self._by_name[obj.name] = content_hash
        entry.refcount += 1
        entry.logical_refs += 1
        self._owners[owner].append(content_hash)
        if content_hash not in self._seen:
            self._seen[content_hash] = entry.size
        self._logical_references += 1
        self._logical_bytes += entry.size
        return content_hash

    def get(self, address: NamedAddress) -> Optional[ContentObject]:
        if address.hash_restr is not None:
            entry = self._entries.get(address.hash_restr)
        else:
            content_hash = self._by_name.get(address.name)
            entry = self._entries.get(content_hash) if content_hash is not None else None
        if entry is None:
            return None
        if not match_restrictions(Interest(address=address), entry.object):
            return None
        return entry.object

    def get_by_hash(self, content_hash: Hash256) -> Optional[ContentObject]:
        entry = self._entries.get(content_hash)
        return entry.object if entry is not None else None

    def entry(self, content_hash: Hash256) -> Optional[StoreEntry]:
        return self._entries.get(content_hash)

    def release(self, owner: str) -> int:
        hashes = self._owners.pop(owner, None)
        if not hashes:
            return 0
        evicted = 0
        for content_hash in hashes:
            entry = self._entries.get(content_hash)
            if entry is None:
                continue
            entry.refcount -= 1
            if entry.refcount == 0:
                del self._entries[content_hash]
                if entry.object.name is not None:
                    self._by_name.pop(entry.object.name, None)
                evicted += 1
        logger.debug("released %s: %d evicted, %d live", owner, evicted, len(self._entries))
        return evicted

    def owners(self) -> list[str]:
        return sorted(self._owners)

    def stats(self) -> DedupStats:
        unique_bytes = sum(self._seen.values())
        return DedupStats(
            unique_objects=len(self._seen),
            logical_references=self._logical_references,
            unique_bytes=unique_bytes,
            logical_bytes=self._logical_bytes,
            saved_bytes=self._logical_bytes - unique_bytes,
        )
