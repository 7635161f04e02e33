# Copyright Sierra

import abc
from dataclasses import dataclass
from typing import Generator, Optional

import simpy

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.ccnx.packet import ContentObject
from ccnx_migrate.routing.handover import HandoverModel
from ccnx_migrate.routing.plane import RoutingPlane
from ccnx_migrate.sim.network import Network
from ccnx_migrate.store.content_store import ContentStore
from ccnx_migrate.types import MigrationMetrics, Scenario, VmConfig

PROBE = "probe"


@dataclass
class MigrationContext:
    """What both agents of one migration share: the simulation, the plan and the outcome record."""

    env: simpy.Environment
    network: Network
    plane: RoutingPlane
    handover: HandoverModel
    scenario: Scenario
    vm: VmConfig
    source_store: ContentStore
    destination_store: ContentStore
    metrics: MigrationMetrics
    aborted: simpy.Event
    log_file: Optional[str] = None

    @property
    def vm_name(self) -> Name:
        return self.vm.name

    def host_prefix(self, node_id: str) -> Name:
        return self.network.node(node_id).prefix

    def rto_us(self, a: str, b: str) -> int:
        if self.scenario.transport.rto_us is not None:
            return self.scenario.transport.rto_us
        return max(1, 4 * (self.plane.path_latency(a, b) or 0))

    def abort(self, reason: str) -> None:
        if not self.aborted.triggered:
            self.metrics.aborted = reason
            self.aborted.succeed(reason)


def probe_answer(name: Name, node_id: str) -> ContentObject:
    return ContentObject(name=name, payload=node_id.encode("utf-8"))


class MigrationAgent(abc.ABC):
    def __init__(self, context: MigrationContext, node_id: str) -> None:
        self.context = context
        self.env = context.env
        self.node_id = node_id
        self._log_file = context.log_file

    @abc.abstractmethod
    def run(self) -> Generator[simpy.Event, object, None]:
        raise NotImplementedError
