# Copyright Sierra

from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, field_validator

from ccnx_migrate.exception import CodecError

Segment = Union[str, bytes, int]


def _to_segment(segment: Segment) -> bytes:
    if isinstance(segment, bytes):
        return segment
    return str(segment).encode("utf-8")


class Name(BaseModel):
    """Hierarchical CCNx name. Typed segments such as ``ver=7`` are kept as plain text."""

    model_config = ConfigDict(frozen=True)

    segments: tuple[bytes, ...] = ()

    @field_validator("segments")
    @classmethod
    def _no_empty_segments(cls, segments: tuple[bytes, ...]) -> tuple[bytes, ...]:
        for segment in segments:
            if len(segment) == 0:
                raise ValueError("name segments must be non-empty")
        return segments

    @classmethod
    def of(cls, *segments: Segment) -> "Name":
        return cls(segments=tuple(_to_segment(s) for s in segments))

    def __len__(self) -> int:
        return len(self.segments)

    def __str__(self) -> str:
        return name_to_text(self)

    def child(self, *segments: Segment) -> "Name":
        return Name(segments=self.segments + tuple(_to_segment(s) for s in segments))

    def concat(self, other: "Name") -> "Name":
        return Name(segments=self.segments + other.segments)

    def is_prefix_of(self, other: "Name") -> bool:
        return len(self.segments) <= len(other.segments) and other.segments[: len(self.segments)] == self.segments

    def suffix_after(self, prefix: "Name") -> Optional["Name"]:
        if not prefix.is_prefix_of(self):
            return None
        return Name(segments=self.segments[len(prefix.segments):])

    def text_segments(self) -> list[str]:
        return [segment.decode("utf-8", errors="replace") for segment in self.segments]


ROOT = Name()


def name_parse(text: str) -> Name:
    if not text or not text.startswith("/"):
        raise CodecError(f"name must begin with '/': {text!r}")
    if text == "/":
        return ROOT
    parts = text[1:].split("/")
    if any(part == "" for part in parts):
        raise CodecError(f"empty name segment in {text!r}")
    return Name(segments=tuple(part.encode("utf-8") for part in parts))


def name_to_text(name: Name) -> str:
    return "/" + "/".join(name.text_segments())
