# Copyright Sierra

import abc
import logging
from collections import Counter
from typing import Callable, NamedTuple, Optional

import numpy as np
import simpy

from ccnx_migrate.ccnx.name import Name, name_parse
from ccnx_migrate.ccnx.packet import ContentObject, Interest, interest_wire_size, object_wire_size
from ccnx_migrate.routing.fib import LOCAL_FACE, FibTable
from ccnx_migrate.types import LinkConfig, NetworkCounters, TopologyConfig

logger = logging.getLogger(__name__)

Producer = Callable[[Interest], Optional[ContentObject]]


class Delivery(NamedTuple):
    obj: ContentObject
    served_by: str
    served_us: int


def message_key(kind: str, interest: Interest) -> str:
    address = interest.address
    key = f"{kind}:{address.name}"
    if address.hash_restr is not None:
        key += f"#{address.hash_restr}"
    return key


class LossModel(abc.ABC):
    @abc.abstractmethod
    def drops(self, link: LinkConfig, key: str) -> bool:
        raise NotImplementedError


class RandomLoss(LossModel):
    """Independent per-hop loss with each link's configured probability."""

    def __init__(self, rng: np.random.Generator, override: Optional[float] = None) -> None:
        self.rng = rng
        self.override = override

    def drops(self, link: LinkConfig, key: str) -> bool:
        loss = self.override if self.override is not None else link.loss
        if loss <= 0.0:
            return False
        return bool(self.rng.random() < loss)


class ScriptedLoss(LossModel):
    """Drops the first ``plan[key]`` transmissions of each message key."""

    def __init__(self, plan: dict[str, int]) -> None:
        self.plan = dict(plan)
        self.transmissions: Counter[str] = Counter()

    def drops(self, link: LinkConfig, key: str) -> bool:
        self.transmissions[key] += 1
        return self.transmissions[key] <= self.plan.get(key, 0)


class Node(object):
    def __init__(self, node_id: str, prefix: Optional[Name] = None) -> None:
        self.node_id = node_id
        self.prefix = prefix
        self.fib = FibTable()
        self._producers: dict[tuple[bytes, ...], Producer] = {}

    def attach(self, prefix: Name, producer: Producer) -> None:
        self._producers[prefix.segments] = producer

    def detach(self, prefix: Name) -> None:
        self._producers.pop(prefix.segments, None)

    def serve(self, interest: Interest) -> Optional[ContentObject]:
        segments = interest.address.name.segments
        for length in range(len(segments), -1, -1):
            producer = self._producers.get(segments[:length])
            if producer is not None:
                return producer(interest)
        return None


class Network(object):
    """Point-to-point Interest/Content Object exchange over simulated links.

    Every hop consults the FIB of the node the Interest is at, at the virtual time it
    gets there. There is no PIT aggregation and no on-path caching.
    """

    def __init__(self, env: simpy.Environment, topology: TopologyConfig, loss: Optional[LossModel] = None) -> None:
        self.env = env
        self.topology = topology
        self.loss = loss
        self.counters = NetworkCounters()
        self.nodes: dict[str, Node] = {}
        for node in topology.nodes:
            prefix = name_parse(node.prefix) if node.prefix is not None else None
            self.nodes[node.node_id] = Node(node.node_id, prefix)
        self._links: dict[frozenset[str], LinkConfig] = {
            frozenset((link.a, link.b)): link for link in topology.links
        }

    def node(self, node_id: str) -> Node:
        return self.nodes[node_id]

    def link(self, a: str, b: str) -> Optional[LinkConfig]:
        return self._links.get(frozenset((a, b)))

    def neighbors(self, node_id: str) -> list[str]:
        found = []
        for pair in self._links:
            if node_id in pair:
                found.extend(other for other in pair if other != node_id)
        return sorted(found)

    def first_hop(self, node_id: str, name: Name) -> Optional[str]:
        return self.nodes[node_id].fib.lookup(name)

    def express(self, origin: str, interest: Interest) -> simpy.Event:
        """Send ``interest`` from ``origin``; the event succeeds with a Delivery when the answer returns."""
        reply = self.env.event()
        self.env.process(self._forward(origin, interest, reply))
        return reply

    def _dropped(self, link: LinkConfig, key: str) -> bool:
        if self.loss is not None and self.loss.drops(link, key):
            self.counters.dropped_loss += 1
            return True
        return False

    def _forward(self, origin: str, interest: Interest, reply: simpy.Event):
        path = [origin]
        if interest.address.name is None:
            self.counters.dropped_no_route += 1
            return
        size = interest_wire_size(interest)
        key = message_key("interest", interest)
        while True:
            node = self.nodes[path[-1]]
            face = node.fib.lookup(interest.address.name)
            if face is None:
                self.counters.dropped_no_route += 1
                logger.debug("no route at %s for %s", node.node_id, interest.address)
                return
            if face == LOCAL_FACE:
                break
            link = self.link(node.node_id, face)
            if link is None:
                self.counters.dropped_no_route += 1
                return
            self.counters.interests_forwarded += 1
            self.counters.hop_bytes += size
            if self._dropped(link, key):
                return
            yield self.env.timeout(link.latency_us)
            path.append(face)
        served_by = path[-1]
        obj = self.nodes[served_by].serve(interest)
        if obj is None:
            self.counters.unanswered += 1
            return
        delivery = Delivery(obj=obj, served_by=served_by, served_us=int(self.env.now))
        size = object_wire_size(obj)
        key = message_key("object", interest)
        for here, there in zip(reversed(path[1:]), reversed(path[:-1])):
            link = self.link(here, there)
            self.counters.objects_forwarded += 1
            self.counters.hop_bytes += size
            if self._dropped(link, key):
                return
            yield self.env.timeout(link.latency_us)
        if not reply.triggered:
            reply.succeed(delivery)
