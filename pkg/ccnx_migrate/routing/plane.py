# Copyright Sierra

import heapq
import logging
from collections import defaultdict
from typing import TYPE_CHECKING, Optional

import simpy

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.exception import ControllerError, RoutingError
from ccnx_migrate.routing.fib import LOCAL_FACE

if TYPE_CHECKING:
    from ccnx_migrate.sim.network import Network

logger = logging.getLogger(__name__)


class RoutingPlane(object):
    """Name routes over the network's FIBs.

    Each node keeps the set of origins it has heard advertise a prefix and points its FIB
    at the next hop toward the lowest origin id among them. Advertisements and
    withdrawals reach a node after the path latency from the origin.
    """

    def __init__(self, env: simpy.Environment, network: "Network") -> None:
        self.env = env
        self.network = network
        self._known: dict[str, dict[tuple[bytes, ...], set[str]]] = {
            node_id: defaultdict(set) for node_id in network.nodes
        }
        self.next_hop: dict[str, dict[str, str]] = {}
        self.latency: dict[str, dict[str, int]] = {}
        for node_id in network.nodes:
            self.latency[node_id], self.next_hop[node_id] = self._shortest_paths(node_id)

    def _shortest_paths(self, source: str) -> tuple[dict[str, int], dict[str, str]]:
        # ties broken toward the lexicographically smallest path
        distance: dict[str, int] = {}
        first: dict[str, str] = {}
        queue: list[tuple[int, tuple[str, ...]]] = [(0, (source,))]
        while queue:
            cost, path = heapq.heappop(queue)
            node_id = path[-1]
            if node_id in distance:
                continue
            distance[node_id] = cost
            if len(path) > 1:
                first[node_id] = path[1]
            for neighbor in self.network.neighbors(node_id):
                if neighbor not in distance:
                    link = self.network.link(node_id, neighbor)
                    heapq.heappush(queue, (cost + link.latency_us, path + (neighbor,)))
        return distance, first

    def path_latency(self, a: str, b: str) -> Optional[int]:
        return self.latency[a].get(b)

    def _refresh(self, node_id: str, prefix: tuple[bytes, ...]) -> None:
        fib = self.network.node(node_id).fib
        origins = self._known[node_id].get(prefix)
        name = Name(segments=prefix)
        if not origins:
            fib.remove(name)
            return
        winner = min(origins)
        if winner == node_id:
            fib.install(name, LOCAL_FACE)
            return
        hop = self.next_hop[node_id].get(winner)
        if hop is None:
            fib.remove(name)
        else:
            fib.install(name, hop)

    def _learn(self, node_id: str, prefix: tuple[bytes, ...], origin: str, present: bool) -> None:
        if present:
            self._known[node_id][prefix].add(origin)
        else:
            self._known[node_id][prefix].discard(origin)
        self._refresh(node_id, prefix)

    def _propagate(self, node_id: str, prefix: tuple[bytes, ...], origin: str, present: bool, delay: int):
        yield self.env.timeout(delay)
        self._learn(node_id, prefix, origin, present)

    def _announce(self, origin: str, prefix: Name, present: bool, flood: bool) -> None:
        if origin not in self.network.nodes:
            raise RoutingError(f"unknown node {origin!r}")
        for node_id in self.network.nodes:
            delay = self.path_latency(origin, node_id)
            if delay is None:
                continue
            if not flood or node_id == origin:
                self._learn(node_id, prefix.segments, origin, present)
            else:
                self.env.process(self._propagate(node_id, prefix.segments, origin, present, delay))

    def install(self, origin: str, prefix: Name) -> None:
        """Static route toward ``origin``, present in every FIB at once."""
        self._announce(origin, prefix, True, flood=False)

    def advertise(self, origin: str, prefix: Name) -> None:
        logger.debug("%s advertises %s at %s", origin, prefix, self.env.now)
        self._announce(origin, prefix, True, flood=True)

    def withdraw(self, origin: str, prefix: Name) -> None:
        logger.debug("%s withdraws %s at %s", origin, prefix, self.env.now)
        self._announce(origin, prefix, False, flood=True)

    def origins(self, node_id: str, prefix: Name) -> frozenset[str]:
        return frozenset(self._known[node_id].get(prefix.segments, ()))


class SdnController(object):
    def __init__(self, plane: RoutingPlane) -> None:
        self.plane = plane

    def repoint(self, prefix: Name, new_node: str) -> None:
        """Rewrite every FIB entry for ``prefix`` toward ``new_node`` in one simulation event."""
        known = [node_id for node_id, table in self.plane._known.items() if table.get(prefix.segments)]
        if not known:
            raise ControllerError(f"controller has no route for {prefix}")
        if new_node not in self.plane.network.nodes:
            raise ControllerError(f"unknown node {new_node!r}")
        for node_id in self.plane.network.nodes:
            self.plane._known[node_id][prefix.segments] = {new_node}
            self.plane._refresh(node_id, prefix.segments)
        logger.debug("controller repointed %s to %s at %s", prefix, new_node, self.plane.env.now)
