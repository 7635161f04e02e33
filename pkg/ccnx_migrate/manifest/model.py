# Copyright Sierra

from typing import Iterator, Optional, Union

from pydantic import BaseModel, ConfigDict, model_validator

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.ccnx.packet import ContentObject, Hash256
from ccnx_migrate.machine.image import Locator
from ccnx_migrate.types import Addressing, Phase, ResourceKind


class StrongHash(BaseModel):
    model_config = ConfigDict(frozen=True)

    locator_prefix: Name
    hash: Hash256


class WeakName(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: Name


class ManifestEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ResourceKind
    disk: str = ""
    index: int
    addressing: Union[StrongHash, WeakName]

    @property
    def locator(self) -> Locator:
        return Locator(self.kind, self.disk, self.index)

    @property
    def is_strong(self) -> bool:
        return isinstance(self.addressing, StrongHash)


class ManifestSection(BaseModel):
    """Entries of one resource kind sharing an addressing mode and, when strong, a locator prefix."""

    model_config = ConfigDict(frozen=True)

    kind: ResourceKind
    disk: str = ""
    addressing: Addressing
    locator_prefix: Optional[Name] = None
    entries: tuple[ManifestEntry, ...] = ()

    @model_validator(mode="after")
    def _consistent(self) -> "ManifestSection":
        if (self.addressing == Addressing.STRONG) != (self.locator_prefix is not None):
            raise ValueError("strong sections carry a locator prefix, weak sections do not")
        indices = [entry.index for entry in self.entries]
        if indices != sorted(set(indices)):
            raise ValueError("section entries must be sorted by index without duplicates")
        return self

    @property
    def key(self) -> tuple[ResourceKind, str, Addressing, Optional[Name]]:
        return (self.kind, self.disk, self.addressing, self.locator_prefix)


class Manifest(BaseModel):
    model_config = ConfigDict(frozen=True)

    vm_name: Name
    version: int
    phase: Phase
    sections: tuple[ManifestSection, ...] = ()
    chunk_count: int = 1

    def entries(self) -> Iterator[ManifestEntry]:
        for section in self.sections:
            yield from section.entries

    def __len__(self) -> int:
        return sum(len(section.entries) for section in self.sections)

    def logical_view(self) -> "Manifest":
        """Same manifest with chunk_count normalized, for comparing builds with different chunk limits."""
        return self.model_copy(update={"chunk_count": 1})


class BuiltManifest(BaseModel):
    manifest: Manifest
    chunks: list[ContentObject]
    payload_bytes: int = 0
    strong_objects: int = 0
    weak_entries: int = 0

    @property
    def manifest_bytes(self) -> int:
        return sum(len(chunk.payload) for chunk in self.chunks)


def checkpoint_id(vm_name: Name, version: int) -> str:
    """Content store owner of the objects of one checkpoint."""
    return f"{vm_name}#ver={version}"
