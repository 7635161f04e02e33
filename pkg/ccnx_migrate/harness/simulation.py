# Copyright Sierra

import logging
from dataclasses import dataclass
from typing import Generator, Optional

import numpy as np
import simpy

from ccnx_migrate.agents.base import PROBE, MigrationContext
from ccnx_migrate.agents.destination import DestinationAgent
from ccnx_migrate.agents.source import SourceAgent
from ccnx_migrate.ccnx.name import Name, name_parse
from ccnx_migrate.ccnx.packet import ContentObject, Interest
from ccnx_migrate.harness.equivalence import verify_equivalence
from ccnx_migrate.machine.build import build_vm
from ccnx_migrate.machine.image import Locator, VmImage
from ccnx_migrate.machine.workload import WorkloadModel, classify, make_workload, workload_step
from ccnx_migrate.manifest.naming import naming_overhead
from ccnx_migrate.routing.handover import get_handover
from ccnx_migrate.routing.plane import RoutingPlane
from ccnx_migrate.sim.network import Network, RandomLoss
from ccnx_migrate.store.content_store import ContentStore
from ccnx_migrate.types import (
    MetricsReport,
    MigrationMetrics,
    NamingMode,
    ProbeRecord,
    ResourceKind,
    Scenario,
    VmConfig,
)

logger = logging.getLogger(__name__)

OBJECTSTORE_OWNER = "objectstore"

# sub-seeds derived from the scenario seed
CLASSIFIER_STREAM = 1
WORKLOAD_STREAM = 2
LOSS_STREAM = 3


@dataclass
class MigrationRun:
    context: MigrationContext
    image: VmImage
    source: SourceAgent
    destination: DestinationAgent
    workload: WorkloadModel
    workload_rng: np.random.Generator


class Simulation(object):
    """Runs one scenario inside a single simpy environment.

    A co-hosted second VM, when configured, migrates over the same host stores after the
    first migration ends.
    """

    def __init__(self, scenario: Scenario, log_file: Optional[str] = None) -> None:
        self.scenario = scenario
        self.log_file = log_file
        self.env = simpy.Environment()
        lossy = any(link.loss > 0 for link in scenario.topology.links)
        loss = RandomLoss(np.random.default_rng([scenario.seed, LOSS_STREAM])) if lossy else None
        self.network = Network(self.env, scenario.topology, loss=loss)
        self.plane = RoutingPlane(self.env, self.network)
        for node in scenario.topology.nodes:
            if node.prefix is not None:
                self.plane.install(node.node_id, name_parse(node.prefix))
        self.handover = get_handover(scenario.routing_model, self.plane)
        self.source_store = ContentStore()
        self.destination_store = ContentStore()
        self.probes: list[ProbeRecord] = []
        self.runs: list[MigrationRun] = []
        self._finished = False
        self.shared_stores: list[tuple[Name, ContentStore]] = []
        if scenario.dedup.objectstore_node is not None:
            self._setup_objectstore()

    def _vms(self) -> list[tuple[VmConfig, int]]:
        dedup = self.scenario.dedup
        vms = [(self.scenario.vm, self.scenario.seed)]
        if dedup.co_hosted_vm is not None:
            seed = dedup.co_hosted_seed if dedup.co_hosted_seed is not None else self.scenario.seed + 1
            vms.append((dedup.co_hosted_vm, seed))
        return vms

    def _build(self, config: VmConfig, seed: int, primary: bool) -> VmImage:
        dedup = self.scenario.dedup
        return build_vm(
            config,
            seed,
            duplicate_fraction=dedup.duplicate_fraction,
            shared_pages=dedup.shared_pages if primary else 0,
        )

    def _setup_objectstore(self) -> None:
        dedup = self.scenario.dedup
        prefix = name_parse(dedup.objectstore_prefix)
        store = ContentStore()
        for index, (config, seed) in enumerate(self._vms()):
            image = self._build(config, seed, primary=index == 0)
            read_only = {disk.disk_name for disk in config.disks if disk.read_only}
            for locator in image.locators():
                if locator.kind == ResourceKind.DISK_BLOCK and locator.disk in read_only:
                    store.put(ContentObject.nameless(image.read(locator)), OBJECTSTORE_OWNER)
        node = self.network.node(dedup.objectstore_node)

        def serve(interest: Interest) -> Optional[ContentObject]:
            if interest.address.hash_restr is None:
                return None
            return store.get(interest.address)

        node.attach(prefix, serve)
        self.plane.install(dedup.objectstore_node, prefix)
        self.shared_stores.append((prefix, store))
        logger.info("objectstore %s holds %d read-only blocks", prefix, len(store))

    def _prepare(self, config: VmConfig, seed: int, primary: bool) -> MigrationRun:
        scenario = self.scenario
        image = self._build(config, seed, primary)
        classifier = classify(image, scenario.workload, np.random.default_rng([seed, CLASSIFIER_STREAM]))
        context = MigrationContext(
            env=self.env,
            network=self.network,
            plane=self.plane,
            handover=self.handover,
            scenario=scenario,
            vm=config,
            source_store=self.source_store,
            destination_store=self.destination_store,
            metrics=MigrationMetrics(vm_name=config.vm_name, seed=seed),
            aborted=self.env.event(),
            log_file=self.log_file,
        )
        self.handover.setup(config.name, scenario.source_node)
        source = SourceAgent(context, scenario.source_node, image, classifier, self.shared_stores)
        destination = DestinationAgent(context, scenario.destination_node, scenario.source_node)
        return MigrationRun(
            context=context,
            image=image,
            source=source,
            destination=destination,
            workload=make_workload(classifier, scenario.workload),
            workload_rng=np.random.default_rng([seed, WORKLOAD_STREAM]),
        )

    def _workload(self, run: MigrationRun) -> Generator[simpy.Event, object, None]:
        interval = self.scenario.workload.step_interval_us
        while not (run.image.frozen or run.context.aborted.triggered or run.context.metrics.completed):
            yield self.env.timeout(interval)
            workload_step(run.image, run.workload, run.workload_rng)

    def _migrate(self, run: MigrationRun) -> Generator[simpy.Event, object, None]:
        workload = self.scenario.workload
        if workload.hot_write_prob > 0 or workload.cold_write_prob > 0:
            self.env.process(self._workload(run))
        source = self.env.process(run.source.run())
        destination = self.env.process(run.destination.run())
        yield source & destination

    def _probe(self, seq: int, name: Name) -> Generator[simpy.Event, object, None]:
        node_id = self.scenario.probe_node
        record = ProbeRecord(seq=seq, sent_us=int(self.env.now), first_hop=self.network.first_hop(node_id, name))
        self.probes.append(record)
        reply = self.network.express(node_id, Interest.for_name(name))
        yield reply | self.env.timeout(self.scenario.max_sim_time_us)
        if reply.triggered:
            record.delivered_to = reply.value.served_by
            record.delivered_us = int(self.env.now)

    def _probes(self) -> Generator[simpy.Event, object, None]:
        name = self.scenario.vm.name.child(PROBE)
        seq = 0
        while not self._finished:
            self.env.process(self._probe(seq, name.child(f"seq={seq}")))
            seq += 1
            yield self.env.timeout(self.scenario.probe_interval_us)

    def _main(self) -> Generator[simpy.Event, object, None]:
        for index, (config, seed) in enumerate(self._vms()):
            run = self._prepare(config, seed, primary=index == 0)
            self.runs.append(run)
            yield self.env.process(self._migrate(run))
        self._finished = True

    def run(self) -> MetricsReport:
        scenario = self.scenario
        main = self.env.process(self._main())
        if scenario.probe_node is not None and scenario.probe_interval_us is not None:
            self.env.process(self._probes())
        self.env.run(until=main | self.env.timeout(scenario.max_sim_time_us))
        self._finished = True
        migrations = []
        for run in self.runs:
            metrics = run.context.metrics
            if not metrics.completed and metrics.aborted is None:
                metrics.aborted = "simulation time limit reached"
            if metrics.completed:
                metrics.equivalence = verify_equivalence(run.image, run.destination.image)
            migrations.append(metrics)
        return MetricsReport(
            scenario=scenario.name,
            seed=scenario.seed,
            naming_mode=scenario.naming_mode,
            routing_model=scenario.routing_model,
            stop_policy=scenario.stop_policy,
            verdict=_verdict(migrations),
            migrations=migrations,
            network=self.network.counters,
            probes=self.probes,
            naming_overhead=naming_overhead(scenario.vm) if scenario.naming_mode == NamingMode.COMPARISON else None,
        )


def _verdict(migrations: list[MigrationMetrics]) -> str:
    if any(not metrics.completed for metrics in migrations):
        return "ABORTED"
    if all(metrics.equivalence is not None and metrics.equivalence.passed for metrics in migrations):
        return "PASS"
    return "FAIL"
