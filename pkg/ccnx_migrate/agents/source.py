# Copyright Sierra

import functools
import logging
from dataclasses import dataclass
from typing import Generator, Optional, Sequence

import simpy

from ccnx_migrate.agents.base import PROBE, MigrationAgent, MigrationContext, probe_answer
from ccnx_migrate.agents.session import MigrationSession, should_stop_push
from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.ccnx.packet import ContentObject, Interest
from ccnx_migrate.exception import ReleaseRefusedError
from ccnx_migrate.machine.image import Locator, Snapshot, VmImage, locator_from_path
from ccnx_migrate.machine.workload import ResourceClassifier
from ccnx_migrate.manifest.build import build_manifest, checkpoint_base
from ccnx_migrate.manifest.model import BuiltManifest, checkpoint_id
from ccnx_migrate.store.content_store import ContentStore
from ccnx_migrate.trace import log_call
from ccnx_migrate.transport.handshake import CloseResponder
from ccnx_migrate.types import NamingMode, Phase, ResourceKind, RoundRecord, VersionRecord

logger = logging.getLogger(__name__)

WEAK_PUSH_KINDS = frozenset({ResourceKind.RAM_PAGE, ResourceKind.DISK_BLOCK})


@dataclass
class Published:
    built: BuiltManifest
    snapshot: Snapshot
    base: Name
    phase: Phase
    weak: frozenset[Locator]


class SourceAgent(MigrationAgent):
    """Publishes checkpoints of a running VM and answers the destination's Interests.

    The agent answers under the generic VM name and under its location-dependent name.
    Nothing is answered before the agent starts; the destination keeps polling.
    """

    def __init__(
        self,
        context: MigrationContext,
        node_id: str,
        image: VmImage,
        classifier: ResourceClassifier,
        shared_stores: Sequence[tuple[Name, ContentStore]] = (),
    ) -> None:
        super().__init__(context, node_id)
        self.image = image
        self.classifier = classifier
        self.store = context.source_store
        self.shared_stores = list(shared_stores)
        self.host_prefix = context.host_prefix(node_id)
        self.generic = context.vm_name
        self.location = self.host_prefix.concat(context.vm_name)
        self.session = MigrationSession(
            vm_name=context.vm_name,
            source_node=node_id,
            destination_node=context.scenario.destination_node,
            stop_policy=context.scenario.stop_policy,
        )
        self.published: dict[int, Published] = {}
        self.responders: dict[int, CloseResponder] = {}
        self.closed: dict[int, simpy.Event] = {}
        self.referenced: set[Locator] = set()
        # version -> (entries, payload bytes, publish time)
        self.summaries: dict[int, tuple[int, int, int]] = {}

    def attach(self) -> None:
        node = self.context.network.node(self.node_id)
        node.attach(self.generic, self.serve)
        node.attach(self.location, self.serve)
        node.attach(self.host_prefix, self.serve_host)

    def serve_host(self, interest: Interest) -> Optional[ContentObject]:
        if interest.address.hash_restr is None:
            return None
        return self.store.get(interest.address)

    def serve(self, interest: Interest) -> Optional[ContentObject]:
        address = interest.address
        if address.hash_restr is not None:
            return self.store.get(address)
        name = address.name
        rest = name.suffix_after(self.location)
        if rest is None:
            rest = name.suffix_after(self.generic)
        if rest is None or len(rest) == 0:
            return None
        segments = rest.text_segments()
        if segments[0] == PROBE:
            return probe_answer(name, self.node_id)
        if segments[0] != "checkpoint" or len(segments) < 3 or not segments[1].startswith("ver="):
            return None
        try:
            version = int(segments[1][len("ver=") :])
        except ValueError:
            return None
        tail = segments[2:]
        if tail[0] in ("close", "close-ack"):
            responder = self.responders.get(version)
            return responder.handle(interest) if responder is not None else None
        published = self.published.get(version)
        if published is None:
            return None
        chunks = published.built.chunks
        if tail == ["manifest"]:
            return ContentObject(name=name, payload=chunks[0].payload)
        if len(tail) == 2 and tail[0] == "manifest" and tail[1].startswith("chunk="):
            try:
                index = int(tail[1][len("chunk=") :])
            except ValueError:
                return None
            return ContentObject(name=name, payload=chunks[index].payload) if 0 <= index < len(chunks) else None
        locator = locator_from_path(self.image.config, tuple(tail))
        if locator is None or locator not in published.weak:
            return None
        # weak elements are read from the live image when the Interest arrives
        return ContentObject(name=name, payload=self.image.read(locator))

    def _publish(
        self,
        version: int,
        phase: Phase,
        selection: frozenset[Locator],
        prefix: Name,
        weak_kinds: frozenset[ResourceKind] = frozenset(),
    ) -> VersionRecord:
        snapshot = self.image.snapshot(version)
        base = checkpoint_base(prefix, version)
        scenario = self.context.scenario
        built = build_manifest(
            snapshot,
            selection,
            phase,
            version,
            self.store,
            base,
            weak_kinds=weak_kinds,
            chunk_limit=scenario.chunk_limit,
            hash_prefix=self.host_prefix if scenario.dedup.host_scoped_hashes else None,
            shared_stores=self.shared_stores,
        )
        self.session.enter(version, phase)
        self.published[version] = Published(
            built=built,
            snapshot=snapshot,
            base=base,
            phase=phase,
            weak=frozenset(locator for locator in selection if locator.kind in weak_kinds),
        )
        self.responders[version] = CloseResponder(base, on_release=functools.partial(self._on_close, version))
        self.closed[version] = self.env.event()
        self.referenced |= selection
        self.summaries[version] = (len(built.manifest), built.payload_bytes, int(self.env.now))
        logger.info(
            "%s published %s ver=%d: %d entries in %d chunks",
            self.node_id,
            phase.value,
            version,
            len(built.manifest),
            len(built.chunks),
        )
        return VersionRecord(version=version, phase=phase, entries=len(built.manifest), chunks=len(built.chunks))

    @log_call
    def run_push_round(self, version: int) -> VersionRecord:
        if version == 0:
            selection = self.classifier.push_initial()
        else:
            selection = self.image.dirty_set(version - 1)
        weak_kinds = WEAK_PUSH_KINDS if self.context.scenario.naming_mode == NamingMode.WEAK else frozenset()
        prefix = self.context.handover.checkpoint_prefix(self.generic, self.host_prefix, handed_over=False)
        return self._publish(version, Phase.PUSH, selection, prefix, weak_kinds)

    @log_call
    def stop_and_copy(self, version: int) -> VersionRecord:
        self.image.freeze()
        self.context.metrics.freeze_us = int(self.env.now)
        selection = (
            frozenset({Locator(ResourceKind.CONFIG)})
            | self.classifier.cpu
            | self.classifier.hot
            | self.image.dirty_set(version - 1)
        )
        prefix = self.context.handover.checkpoint_prefix(self.generic, self.host_prefix, handed_over=False)
        return self._publish(version, Phase.STOP_AND_COPY, selection, prefix)

    @log_call
    def publish_pull(self, version: int) -> VersionRecord:
        selection = frozenset(self.image.locators()) - self.referenced
        prefix = self.context.handover.checkpoint_prefix(self.generic, self.host_prefix, handed_over=True)
        return self._publish(version, Phase.PULL, selection, prefix)

    @log_call
    def release_after_close(self, version: int) -> int:
        responder = self.responders.get(version)
        if responder is None or not responder.closed:
            raise ReleaseRefusedError(f"ver={version} is not closed; resources stay allocated")
        evicted = self.store.release(checkpoint_id(self.generic, version))
        published = self.published.pop(version, None)
        if published is not None:
            published.snapshot.release()
        return evicted

    def _on_close(self, version: int) -> None:
        self.release_after_close(version)
        self.closed[version].succeed(int(self.env.now))
        if self.session.phase == Phase.STOP_AND_COPY and self.session.current_version == version:
            self.context.handover.hand_over(self.generic, self.node_id, self.context.scenario.destination_node)
            self.context.metrics.handover_us = int(self.env.now)

    def _wait_closed(self, version: int) -> Generator[simpy.Event, object, bool]:
        yield self.closed[version] | self.context.aborted
        if self.closed[version].triggered:
            return True
        if self.image.frozen:
            self.image.unfreeze()
        if self.context.metrics.handover_us is not None:
            self.context.handover.revert(self.generic, self.node_id, self.context.scenario.destination_node)
            logger.info("%s routes %s back to %s", self.context.handover.variant.value, self.generic, self.node_id)
        logger.warning("%s rolled back %s: %s", self.node_id, self.generic, self.context.metrics.aborted)
        return False

    def run(self) -> Generator[simpy.Event, object, None]:
        scenario = self.context.scenario
        metrics = self.context.metrics
        if scenario.source_start_delay_us:
            yield self.env.timeout(scenario.source_start_delay_us)
        self.attach()
        version = 0
        while True:
            self.run_push_round(version)
            if not (yield from self._wait_closed(version)):
                return
            entries, payload_bytes, published_us = self.summaries[version]
            record = RoundRecord(
                version=version,
                entries=entries,
                transferred_bytes=payload_bytes,
                dirty_bytes=self.image.dirty_bytes(self.image.dirty_set(version)),
                round_duration_us=int(self.env.now) - published_us,
            )
            self.session.push_history.append(record)
            metrics.push_history.append(record)
            metrics.rounds = len(self.session.push_history)
            if should_stop_push(self.session.push_history, scenario.stop_policy):
                break
            version += 1
        self.stop_and_copy(version + 1)
        if not (yield from self._wait_closed(version + 1)):
            return
        self.publish_pull(version + 2)
        if not (yield from self._wait_closed(version + 2)):
            return
        self.session.finish()
        metrics.source_objects_remaining = len(self.store)
