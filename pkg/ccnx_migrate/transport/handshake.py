# Copyright Sierra

import itertools
import logging
from enum import Enum
from typing import Callable, Generator, Optional

import simpy
from pydantic import BaseModel

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.ccnx.packet import ContentObject, Interest
from ccnx_migrate.exception import HandshakeFailedError
from ccnx_migrate.routing.plane import RoutingPlane
from ccnx_migrate.sim.network import Network, ScriptedLoss, message_key
from ccnx_migrate.transport.session import FetchSession, SessionState
from ccnx_migrate.types import LinkConfig, NodeConfig, TopologyConfig

logger = logging.getLogger(__name__)

CLOSE = "close"
CLOSE_ACK = "close-ack"
ACK_PAYLOAD = b"\x01"


def close_name(base: Name) -> Name:
    return base.child(CLOSE)


def close_ack_name(base: Name) -> Name:
    return base.child(CLOSE_ACK)


def ack(interest: Interest) -> ContentObject:
    return ContentObject(name=interest.address.name, payload=ACK_PAYLOAD)


class ResponderState(str, Enum):
    OPEN = "open"
    CLOSING = "closing"
    CLOSED = "closed"


class CloseResponder(object):
    """Responder side of the close / close-ack exchange for one checkpoint.

    Every /close and /close-ack Interest is acknowledged; only the first /close-ack
    changes state and triggers ``on_release``.
    """

    def __init__(self, base: Name, on_release: Callable[[], None]) -> None:
        self.base = base
        self.state = ResponderState.OPEN
        self._on_release = on_release
        self.acks_sent = 0

    @property
    def closed(self) -> bool:
        return self.state == ResponderState.CLOSED

    def handle(self, interest: Interest) -> Optional[ContentObject]:
        suffix = interest.address.name.suffix_after(self.base)
        if suffix is None or len(suffix) != 1:
            return None
        tail = suffix.segments[0]
        if tail == CLOSE.encode():
            if self.state == ResponderState.OPEN:
                self.state = ResponderState.CLOSING
        elif tail == CLOSE_ACK.encode():
            if self.state != ResponderState.CLOSED:
                self.state = ResponderState.CLOSED
                self._on_release()
        else:
            return None
        self.acks_sent += 1
        return ack(interest)


def close_session(session: FetchSession, base: Name) -> Generator[simpy.Event, object, None]:
    """Requester side: /close then /close-ack, each retransmitted like any Interest."""
    session.transition(SessionState.CLOSING)
    for name in (close_name(base), close_ack_name(base)):
        delivery = yield from session.request(Interest.for_name(name))
        if delivery is None:
            session.transition(SessionState.FAILED)
            raise HandshakeFailedError(f"no ACK for {name} after {session.max_retries} retries")
    session.transition(SessionState.CLOSED)


class HandshakeTrial(BaseModel):
    losses: tuple[int, int, int, int]
    recoverable: bool
    requester_state: SessionState
    released: bool
    released_while: Optional[SessionState] = None


class HandshakeCheck(BaseModel):
    max_retries: int
    trials: list[HandshakeTrial]

    @property
    def violations(self) -> list[HandshakeTrial]:
        """Trials breaking safety, or recoverable trials that did not close on both sides."""
        bad = []
        for trial in self.trials:
            unsafe = trial.released and trial.released_while not in (SessionState.CLOSING, SessionState.CLOSED)
            stuck = trial.recoverable and not (trial.released and trial.requester_state == SessionState.CLOSED)
            if unsafe or stuck:
                bad.append(trial)
        return bad


def _run_trial(losses: tuple[int, int, int, int], max_retries: int, latency_us: int) -> HandshakeTrial:
    base = Name.of("vm-name", "checkpoint", "ver=7")
    topology = TopologyConfig(
        nodes=[NodeConfig(node_id="requester"), NodeConfig(node_id="responder")],
        links=[LinkConfig(a="requester", b="responder", latency_us=latency_us)],
    )
    close_interest = Interest.for_name(close_name(base))
    close_ack_interest = Interest.for_name(close_ack_name(base))
    keys = (
        message_key("interest", close_interest),
        message_key("object", close_interest),
        message_key("interest", close_ack_interest),
        message_key("object", close_ack_interest),
    )
    env = simpy.Environment()
    network = Network(env, topology, loss=ScriptedLoss(dict(zip(keys, losses))))
    RoutingPlane(env, network).install("responder", Name.of("vm-name"))
    session = FetchSession(env, network, "requester", window_size=1, rto_us=4 * latency_us, max_retries=max_retries)
    release_states: list[SessionState] = []
    responder = CloseResponder(base, on_release=lambda: release_states.append(session.state))
    network.node("responder").attach(base, responder.handle)

    def requester():
        try:
            yield from close_session(session, base)
        except HandshakeFailedError:
            pass

    env.process(requester())
    env.run()
    return HandshakeTrial(
        losses=losses,
        recoverable=losses[0] + losses[1] <= max_retries and losses[2] + losses[3] <= max_retries,
        requester_state=session.state,
        released=responder.closed,
        released_while=release_states[0] if release_states else None,
    )


def model_check_close(max_retries: int = 3, latency_us: int = 1000) -> HandshakeCheck:
    """Run the exchange under every pattern dropping 0..max_retries copies of each of the 4 messages."""
    trials = [
        _run_trial(losses, max_retries, latency_us)
        for losses in itertools.product(range(max_retries + 1), repeat=4)
    ]
    logger.debug("checked %d loss patterns", len(trials))
    return HandshakeCheck(max_retries=max_retries, trials=trials)
