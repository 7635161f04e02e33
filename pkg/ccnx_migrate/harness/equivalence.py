# Copyright Sierra

from typing import Optional

import numpy as np

from ccnx_migrate.machine.image import Locator, ResourceReader, VmImage
from ccnx_migrate.types import Divergence, EquivalenceResult


def _first_difference(expected: bytes, actual: bytes) -> int:
    n = min(len(expected), len(actual))
    differing = np.flatnonzero(np.frombuffer(expected, dtype=np.uint8, count=n) != np.frombuffer(actual, dtype=np.uint8, count=n))
    return int(differing[0]) if differing.size else n


def _fail(locator: Locator, offset: int, reason: str, compared: int) -> EquivalenceResult:
    return EquivalenceResult(
        verdict="FAIL",
        compared=compared,
        divergence=Divergence(kind=locator.kind, disk=locator.disk, index=locator.index, offset=offset, reason=reason),
    )


def verify_equivalence(frozen_source: ResourceReader, destination: Optional[VmImage]) -> EquivalenceResult:
    """Byte-compare every resource of the frozen source with the destination image."""
    compared = 0
    expected_locators = frozen_source.locators()
    for locator in expected_locators:
        expected = frozen_source.read(locator)
        if destination is None or locator not in destination:
            return _fail(locator, 0, "missing at destination", compared)
        actual = destination.read(locator)
        if actual != expected:
            reason = "bytes differ" if len(actual) == len(expected) else "size differs"
            return _fail(locator, _first_difference(expected, actual), reason, compared)
        compared += 1
    extra = set(destination.locators()) - set(expected_locators)
    if extra:
        locator = min(extra)
        return _fail(locator, 0, "not present at the source", compared)
    return EquivalenceResult(verdict="PASS", compared=compared)
