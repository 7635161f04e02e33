# Copyright Sierra

import logging
from typing import Generator, Optional

import simpy

from ccnx_migrate.agents.base import PROBE, MigrationAgent, MigrationContext, probe_answer
from ccnx_migrate.agents.session import MigrationSession
from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.ccnx.packet import (
    ContentObject,
    Hash256,
    Interest,
    NamedAddress,
    compute_object_hash,
    object_wire_size,
)
from ccnx_migrate.exception import (
    ManifestError,
    PlacementError,
    ProtocolError,
    TransportError,
)
from ccnx_migrate.machine.image import VmImage
from ccnx_migrate.manifest.build import apply_entry, checkpoint_base, chunk_name, entry_fetch_address, manifest_name
from ccnx_migrate.manifest.codec import parse_manifest, read_chunk_info
from ccnx_migrate.manifest.model import Manifest, ManifestEntry, StrongHash, checkpoint_id
from ccnx_migrate.trace import log_call
from ccnx_migrate.transport.handshake import close_session
from ccnx_migrate.transport.session import FetchSession
from ccnx_migrate.types import Phase, PhaseMetrics, ResourceKind, VersionRecord, VmConfig

logger = logging.getLogger(__name__)


class DestinationAgent(MigrationAgent):
    """Polls for checkpoints starting at version 0 and rebuilds the VM from them.

    The VM stays frozen while push checkpoints arrive and starts once the stop-and-copy
    checkpoint is closed; the final pull checkpoint is fetched after that.
    """

    def __init__(self, context: MigrationContext, node_id: str, source_node: str) -> None:
        super().__init__(context, node_id)
        self.source_node = source_node
        self.store = context.destination_store
        self.source_prefix = context.host_prefix(source_node)
        self.image: Optional[VmImage] = None
        self.handed_over = False
        self.session = MigrationSession(
            vm_name=context.vm_name,
            source_node=source_node,
            destination_node=node_id,
            stop_policy=context.scenario.stop_policy,
        )
        self._payload_hashes: set[Hash256] = set()

    def attach(self) -> None:
        self.context.network.node(self.node_id).attach(self.context.vm_name, self.serve)

    def serve(self, interest: Interest) -> Optional[ContentObject]:
        rest = interest.address.name.suffix_after(self.context.vm_name)
        if rest is None or len(rest) == 0 or rest.segments[0] != PROBE.encode():
            return None
        return probe_answer(interest.address.name, self.node_id)

    def _new_session(self, label: str) -> FetchSession:
        transport = self.context.scenario.transport
        return FetchSession(
            self.env,
            self.context.network,
            self.node_id,
            window_size=transport.window_size,
            rto_us=self.context.rto_us(self.node_id, self.source_node),
            max_retries=transport.max_retries,
            label=label,
        )

    def _fetch_manifest(self, session: FetchSession, base: Name) -> Generator[simpy.Event, object, tuple[Manifest, int]]:
        root = yield from session.poll(Interest.for_name(manifest_name(base)), self.context.scenario.transport.poll_limit)
        _, _, count = read_chunk_info(root.obj.payload)
        chunks = [root.obj]
        if count > 1:
            rest = yield from session.fetch_all(NamedAddress(name=chunk_name(base, index)) for index in range(1, count))
            chunks.extend(rest.values())
        return parse_manifest(chunks), sum(len(chunk.payload) for chunk in chunks)

    def _allocate(self, manifest: Manifest, objects: dict[ManifestEntry, ContentObject]) -> None:
        for entry in manifest.entries():
            if entry.kind == ResourceKind.CONFIG and not entry.disk:
                try:
                    config = VmConfig.model_validate_json(objects[entry].payload)
                except ValueError:
                    raise ProtocolError("the VM configuration object does not parse")
                if config.name != self.context.vm_name:
                    raise ProtocolError(f"checkpoint describes {config.vm_name}, expected {self.context.vm_name}")
                self.image = VmImage.blank(config)
                return
        raise ProtocolError("the first checkpoint carries no VM configuration")

    @log_call
    def record_checkpoint(self, version: int, phase: Phase, chunks: int, phase_metrics: PhaseMetrics) -> VersionRecord:
        metrics = self.context.metrics
        total = metrics.phases.setdefault(phase, PhaseMetrics())
        for field, value in phase_metrics.model_dump().items():
            setattr(total, field, getattr(total, field) + value)
        record = VersionRecord(
            version=version,
            phase=phase,
            entries=phase_metrics.entries,
            chunks=chunks,
            closed_us=int(self.env.now),
        )
        metrics.versions.append(record)
        return record

    def fetch_checkpoint(self, version: int) -> Generator[simpy.Event, object, Phase]:
        context = self.context
        metrics = context.metrics
        prefix = context.handover.checkpoint_prefix(context.vm_name, self.source_prefix, self.handed_over)
        base = checkpoint_base(prefix, version)
        session = self._new_session(str(base))
        manifest, manifest_bytes = yield from self._fetch_manifest(session, base)
        if manifest.vm_name != context.vm_name or manifest.version != version:
            raise ProtocolError(f"asked for {base}, got {manifest.vm_name} ver={manifest.version}")
        self.session.enter(version, manifest.phase)

        entries = list(manifest.entries())
        wanted: dict[object, NamedAddress] = {}
        local_hits = 0
        for entry in entries:
            if isinstance(entry.addressing, StrongHash):
                if self.store.contains_hash(entry.addressing.hash):
                    local_hits += 1
                else:
                    wanted.setdefault(entry.addressing.hash, entry_fetch_address(entry))
            else:
                wanted.setdefault(entry.addressing.name, entry_fetch_address(entry))
        fetched: dict[NamedAddress, ContentObject] = {}
        if wanted:
            fetched = yield from session.fetch_all(wanted.values())

        objects: dict[ManifestEntry, ContentObject] = {}
        for entry in entries:
            if isinstance(entry.addressing, StrongHash):
                key = entry.addressing.hash
                obj = fetched.get(wanted[key]) if key in wanted else self.store.get_by_hash(key)
            else:
                obj = fetched[wanted[entry.addressing.name]]
            objects[entry] = obj
        if self.image is None:
            self._allocate(manifest, objects)

        owner = checkpoint_id(context.vm_name, version)
        payload_bytes = 0
        logical_strong_bytes = 0
        for entry, obj in objects.items():
            apply_entry(self.image, entry, obj)
            payload_bytes += len(obj.payload)
            if isinstance(entry.addressing, StrongHash):
                self.store.put(obj, owner)
                logical_strong_bytes += object_wire_size(obj)
                self._payload_hashes.add(entry.addressing.hash)
            else:
                self._payload_hashes.add(compute_object_hash(ContentObject.nameless(obj.payload)))

        strong_fetched = [fetched[address] for key, address in wanted.items() if isinstance(key, Hash256)]
        fetched_bytes = sum(object_wire_size(obj) for obj in fetched.values())
        metrics.objects_fetched += len(strong_fetched)
        metrics.weak_objects_fetched += len(fetched) - len(strong_fetched)
        metrics.unique_transferred_bytes += fetched_bytes
        metrics.dedup_saved_bytes += logical_strong_bytes - sum(object_wire_size(obj) for obj in strong_fetched)
        metrics.applied_bytes += payload_bytes
        metrics.logical_objects += len(entries)
        metrics.unique_objects = len(self._payload_hashes)

        yield from close_session(session, base)
        counters = session.counters
        self.record_checkpoint(
            version,
            manifest.phase,
            manifest.chunk_count,
            PhaseMetrics(
                checkpoints=1,
                entries=len(entries),
                interests=counters.interests,
                objects=counters.objects,
                retransmissions=counters.retransmissions,
                polls=counters.polls,
                duplicates=counters.duplicates,
                local_hits=local_hits,
                bytes_sent=counters.bytes_sent,
                bytes_received=counters.bytes_received,
                payload_bytes=payload_bytes,
                manifest_bytes=manifest_bytes,
            ),
        )
        if manifest.phase == Phase.STOP_AND_COPY:
            self.handed_over = True
            metrics.vm_start_us = int(self.env.now)
            if metrics.freeze_us is not None:
                metrics.downtime_us = metrics.vm_start_us - metrics.freeze_us
            logger.info("%s started %s at %d", self.node_id, context.vm_name, metrics.vm_start_us)
        return manifest.phase

    def run(self) -> Generator[simpy.Event, object, None]:
        metrics = self.context.metrics
        self.attach()
        version = 0
        try:
            while True:
                phase = yield from self.fetch_checkpoint(version)
                if phase == Phase.PULL:
                    break
                version += 1
        except (TransportError, ProtocolError, ManifestError, PlacementError) as e:
            logger.warning("%s aborted %s: %s", self.node_id, self.context.vm_name, e.short_message)
            self.context.abort(e.short_message)
            return
        self.session.finish()
        metrics.completed = True
        metrics.completion_us = int(self.env.now)
        metrics.wire_bytes = sum(phase.bytes_on_wire for phase in metrics.phases.values())
