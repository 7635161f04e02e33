# Copyright Sierra

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ccnx_migrate.machine.image import CPU_KINDS, Locator, VmImage, sort_key
from ccnx_migrate.types import ResourceKind, WorkloadConfig


@dataclass(frozen=True)
class ResourceClassifier:
    """Partition of every resource of an image; hot, cold, deferred and unclassified are disjoint."""

    hot: frozenset[Locator]
    cold: frozenset[Locator]
    deferred: frozenset[Locator]
    unclassified: frozenset[Locator]

    @property
    def cpu(self) -> frozenset[Locator]:
        return frozenset(locator for locator in self.unclassified if locator.kind in CPU_KINDS)

    def push_initial(self) -> frozenset[Locator]:
        return self.cold | frozenset(
            locator for locator in self.unclassified if locator.kind not in CPU_KINDS
        )


def classify(image: VmImage, config: WorkloadConfig, rng: np.random.Generator) -> ResourceClassifier:
    locators = image.locators()
    pages = [locator for locator in locators if locator.kind == ResourceKind.RAM_PAGE]
    blocks = [locator for locator in locators if locator.kind == ResourceKind.DISK_BLOCK]
    hot_mask = rng.random(len(pages)) < config.hot_page_fraction
    deferred_mask = rng.random(len(blocks)) < config.deferred_fraction
    hot = frozenset(page for page, is_hot in zip(pages, hot_mask) if is_hot)
    deferred = frozenset(block for block, held in zip(blocks, deferred_mask) if held)
    cold = frozenset(pages + blocks) - hot - deferred
    unclassified = frozenset(locators) - hot - deferred - cold
    return ResourceClassifier(hot=hot, cold=cold, deferred=deferred, unclassified=unclassified)


@dataclass(frozen=True)
class WorkloadModel:
    hot_set: tuple[Locator, ...]
    cold_set: tuple[Locator, ...]
    hot_write_prob: float
    cold_write_prob: float
    writes_per_step: Optional[int] = None


def make_workload(classifier: ResourceClassifier, config: WorkloadConfig) -> WorkloadModel:
    # deferred blocks still take cold writes; a dirtied deferred block moves into the next push round
    return WorkloadModel(
        hot_set=tuple(sorted(classifier.hot, key=sort_key)),
        cold_set=tuple(sorted(classifier.cold | classifier.deferred, key=sort_key)),
        hot_write_prob=config.hot_write_prob,
        cold_write_prob=config.cold_write_prob,
        writes_per_step=config.writes_per_step,
    )


def workload_step(image: VmImage, model: WorkloadModel, rng: np.random.Generator) -> int:
    """Apply one step of random writes biased toward the hot set; returns the writes applied."""
    if image.frozen:
        return 0
    hot_hits = rng.random(len(model.hot_set)) < model.hot_write_prob
    cold_hits = rng.random(len(model.cold_set)) < model.cold_write_prob
    targets = [locator for locator, hit in zip(model.hot_set, hot_hits) if hit]
    targets += [locator for locator, hit in zip(model.cold_set, cold_hits) if hit]
    if model.writes_per_step is not None and len(targets) > model.writes_per_step:
        keep = np.sort(rng.choice(len(targets), size=model.writes_per_step, replace=False))
        targets = [targets[i] for i in keep]
    for locator in targets:
        image.apply_write(locator, rng.bytes(image.size_of(locator)))
    return len(targets)
