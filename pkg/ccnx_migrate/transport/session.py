# Copyright Sierra

import logging
from enum import Enum
from typing import Generator, Iterable, Optional

import simpy
from pydantic import BaseModel

from ccnx_migrate.ccnx.packet import ContentObject, Interest, NamedAddress, interest_wire_size, object_wire_size
from ccnx_migrate.exception import FetchFailedError, TransportError
from ccnx_migrate.sim.network import Delivery, Network

logger = logging.getLogger(__name__)


class SessionState(str, Enum):
    ACTIVE = "active"
    CLOSING = "closing"
    CLOSED = "closed"
    FAILED = "failed"


class TransferCounters(BaseModel):
    interests: int = 0
    retransmissions: int = 0
    polls: int = 0
    objects: int = 0
    duplicates: int = 0
    bytes_sent: int = 0
    bytes_received: int = 0
    max_in_flight: int = 0


_TRANSITIONS = {
    SessionState.ACTIVE: {SessionState.CLOSING, SessionState.FAILED},
    SessionState.CLOSING: {SessionState.CLOSED, SessionState.FAILED},
    SessionState.CLOSED: set(),
    SessionState.FAILED: set(),
}


class FetchSession(object):
    """Windowed, retransmitting Interest sender owned by one requester node.

    At most ``window_size`` Interests are outstanding. An unanswered Interest is sent
    again after ``rto_us`` up to ``max_retries`` times. Each address is delivered upward
    once; later answers to the same address are counted as duplicates and dropped.
    """

    def __init__(
        self,
        env: simpy.Environment,
        network: Network,
        node_id: str,
        window_size: int,
        rto_us: int,
        max_retries: int,
        label: str = "",
    ) -> None:
        self.env = env
        self.network = network
        self.node_id = node_id
        self.window_size = window_size
        self.rto_us = rto_us
        self.max_retries = max_retries
        self.label = label
        self.state = SessionState.ACTIVE
        self.received: dict[NamedAddress, ContentObject] = {}
        self.counters = TransferCounters()
        self._window = simpy.Resource(env, capacity=window_size)
        self._in_flight = 0

    def transition(self, state: SessionState) -> None:
        if state not in _TRANSITIONS[self.state]:
            raise TransportError(f"session {self.label}: {self.state.value} -> {state.value} is not allowed")
        self.state = state

    def _count_late(self, event: simpy.Event) -> None:
        self.counters.duplicates += 1
        self.counters.bytes_received += object_wire_size(event.value.obj)

    def _send(self, interest: Interest, retransmission: bool) -> simpy.Event:
        self.counters.interests += 1
        self.counters.bytes_sent += interest_wire_size(interest)
        if retransmission:
            self.counters.retransmissions += 1
        return self.network.express(self.node_id, interest)

    def request(self, interest: Interest) -> Generator[simpy.Event, object, Optional[Delivery]]:
        """One Interest with retransmissions; returns the first answer or None."""
        with self._window.request() as slot:
            yield slot
            self._in_flight += 1
            self.counters.max_in_flight = max(self.counters.max_in_flight, self._in_flight)
            try:
                pending: list[simpy.Event] = []
                for attempt in range(self.max_retries + 1):
                    pending.append(self._send(interest, retransmission=attempt > 0))
                    yield self.env.any_of(pending + [self.env.timeout(self.rto_us)])
                    answered = [event for event in pending if event.triggered]
                    if answered:
                        first = answered[0]
                        for event in pending:
                            if event is first:
                                continue
                            if event.triggered:
                                self._count_late(event)
                            else:
                                event.callbacks.append(self._count_late)
                        self.counters.objects += 1
                        self.counters.bytes_received += object_wire_size(first.value.obj)
                        return first.value
                return None
            finally:
                self._in_flight -= 1

    def fetch(self, address: NamedAddress) -> Generator[simpy.Event, object, Optional[ContentObject]]:
        if address in self.received:
            return self.received[address]
        delivery = yield from self.request(Interest(address=address))
        if delivery is None:
            return None
        self.received.setdefault(address, delivery.obj)
        return self.received[address]

    def fetch_all(
        self, addresses: Iterable[NamedAddress]
    ) -> Generator[simpy.Event, object, dict[NamedAddress, ContentObject]]:
        """Resolve every address once; raises FetchFailedError with the partial results on failure."""
        wanted = list(dict.fromkeys(addresses))
        processes = [self.env.process(self.fetch(address)) for address in wanted if address not in self.received]
        if processes:
            yield self.env.all_of(processes)
        missing = [address for address in wanted if address not in self.received]
        results = {address: self.received[address] for address in wanted if address in self.received}
        if missing:
            self.state = SessionState.FAILED
            logger.info("session %s failed with %d unanswered", self.label, len(missing))
            raise FetchFailedError(missing, results)
        return results

    def poll(self, interest: Interest, limit: int) -> Generator[simpy.Event, object, Delivery]:
        """Repeat ``interest`` every RTO until a producer answers it, at most ``limit`` times."""
        for _ in range(limit):
            self.counters.polls += 1
            reply = self._send(interest, retransmission=False)
            yield self.env.any_of([reply, self.env.timeout(self.rto_us)])
            if reply.triggered:
                self.counters.objects += 1
                self.counters.bytes_received += object_wire_size(reply.value.obj)
                return reply.value
            reply.callbacks.append(self._count_late)
        self.state = SessionState.FAILED
        raise FetchFailedError([interest.address], {})
