# Copyright Sierra

from typing import Optional

from ccnx_migrate.ccnx.name import Name

# face of the node's own producers
LOCAL_FACE = "local"


class FibTable(object):
    """Longest-prefix-match table from name prefixes to faces (neighbor node ids or ``LOCAL_FACE``)."""

    def __init__(self) -> None:
        self._entries: dict[tuple[bytes, ...], str] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def install(self, prefix: Name, face: str) -> None:
        self._entries[prefix.segments] = face

    def remove(self, prefix: Name) -> None:
        self._entries.pop(prefix.segments, None)

    def face_for(self, prefix: Name) -> Optional[str]:
        return self._entries.get(prefix.segments)

    def match(self, name: Name) -> Optional[tuple[Name, str]]:
        segments = name.segments
        for length in range(len(segments), -1, -1):
            face = self._entries.get(segments[:length])
            if face is not None:
                return Name(segments=segments[:length]), face
        return None

    def lookup(self, name: Name) -> Optional[str]:
        found = self.match(name)
        return found[1] if found is not None else None

    def dump(self) -> list[tuple[str, str]]:
        return sorted((str(Name(segments=prefix)), face) for prefix, face in self._entries.items())
