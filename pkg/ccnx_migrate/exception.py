# Copyright Sierra

from dataclasses import dataclass
from typing import Any, Generic, Optional, TypeVar

T = TypeVar("T")


class MigrationError(Exception):
    def __init__(self, short_message: str, report: Optional[dict[str, Any]] = None) -> None:
        super().__init__(short_message)
        self.short_message = short_message
        self.report = report


class ConfigError(MigrationError):
    pass


class ScenarioError(MigrationError):
    pass


class CodecError(MigrationError):
    pass


class EncodingError(CodecError):
    pass


class DecodeError(CodecError):
    pass


class TruncatedError(DecodeError):
    def __init__(self, short_message: str = "truncated", report: Optional[dict[str, Any]] = None) -> None:
        super().__init__(short_message, report)


class LengthMismatchError(DecodeError):
    def __init__(self, short_message: str = "length mismatch", report: Optional[dict[str, Any]] = None) -> None:
        super().__init__(short_message, report)


class UnknownTlvError(DecodeError):
    pass


class ImageError(MigrationError):
    pass


class FrozenImageError(ImageError):
    pass


class SizeMismatchError(ImageError):
    pass


class SnapshotOrderError(ImageError):
    pass


class ManifestError(MigrationError):
    pass


class ManifestBuildError(ManifestError):
    pass


class IncompleteManifestError(ManifestError):
    def __init__(self, short_message: str = "incomplete", report: Optional[dict[str, Any]] = None) -> None:
        super().__init__(short_message, report)


class CorruptManifestError(ManifestError):
    def __init__(self, short_message: str = "corrupt", report: Optional[dict[str, Any]] = None) -> None:
        super().__init__(short_message, report)


class PlacementError(MigrationError):
    pass


class IntegrityError(PlacementError):
    pass


class TransportError(MigrationError):
    pass


class FetchFailedError(TransportError):
    def __init__(self, missing: list[Any], partial: dict[Any, Any]) -> None:
        super().__init__(
            f"fetch failed: {len(missing)} address(es) unanswered after retries",
            report={"missing": [str(address) for address in missing]},
        )
        self.missing = missing
        self.partial = partial


class HandshakeFailedError(TransportError):
    pass


class RoutingError(MigrationError):
    pass


class ControllerError(RoutingError):
    pass


class ReleaseRefusedError(MigrationError):
    pass


class ProtocolError(MigrationError):
    pass


@dataclass
class Result(Generic[T]):
    value: Optional[T]
    error: Optional[MigrationError]
