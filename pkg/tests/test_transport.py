import numpy as np
import pytest
import simpy

from ccnx_migrate.ccnx.name import Name, name_parse
from ccnx_migrate.ccnx.packet import ContentObject, Interest, NamedAddress
from ccnx_migrate.exception import FetchFailedError, HandshakeFailedError, TransportError
from ccnx_migrate.routing.plane import RoutingPlane
from ccnx_migrate.sim.network import Network, RandomLoss, ScriptedLoss, message_key
from ccnx_migrate.store.content_store import ContentStore
from ccnx_migrate.transport.handshake import (
    ACK_PAYLOAD,
    CloseResponder,
    ResponderState,
    close_ack_name,
    close_name,
    close_session,
    model_check_close,
)
from ccnx_migrate.transport.session import FetchSession, SessionState
from ccnx_migrate.types import LinkConfig, NodeConfig, TopologyConfig

PREFIX = name_parse("/nyc/host7")
BASE = name_parse("/parc/vm3/checkpoint/ver=0")


def _pair(loss=None, latency_us: int = 1000):
    topology = TopologyConfig(
        nodes=[NodeConfig(node_id="requester"), NodeConfig(node_id="responder")],
        links=[LinkConfig(a="requester", b="responder", latency_us=latency_us)],
    )
    env = simpy.Environment()
    network = Network(env, topology, loss=loss)
    plane = RoutingPlane(env, network)
    plane.install("responder", PREFIX)
    plane.install("responder", name_parse("/parc"))
    return env, network


def _serve_store(network: Network, count: int) -> list[NamedAddress]:
    store = ContentStore()
    addresses = []
    for index in range(count):
        content_hash = store.put(ContentObject.nameless(index.to_bytes(4, "big") * 128), "ver=0")
        addresses.append(NamedAddress(name=PREFIX, hash_restr=content_hash))
    network.node("responder").attach(PREFIX, lambda interest: store.get(interest.address))
    return addresses


def _fetch(env, network, addresses, **kwargs):
    params = {"window_size": 8, "rto_us": 4000, "max_retries": 3}
    params.update(kwargs)
    session = FetchSession(env, network, "requester", **params)
    outcome = {}

    def run():
        try:
            outcome["results"] = yield from session.fetch_all(addresses)
        except FetchFailedError as e:
            outcome["error"] = e

    env.process(run())
    env.run()
    return session, outcome


def test_fetch_all_respects_the_window():
    env, network = _pair()
    addresses = _serve_store(network, 20)
    session, outcome = _fetch(env, network, addresses, window_size=4)
    assert set(outcome["results"]) == set(addresses)
    assert session.counters.max_in_flight == 4
    assert session.counters.objects == 20
    assert session.counters.retransmissions == 0


def _lossy_run(seed: int):
    env, network = _pair(loss=RandomLoss(np.random.default_rng(seed), override=0.2))
    addresses = _serve_store(network, 100)
    session, outcome = _fetch(env, network, addresses, window_size=16, max_retries=15)
    return addresses, session, outcome


def test_fetch_all_under_loss_delivers_each_address_once():
    addresses, session, outcome = _lossy_run(seed=9)
    results = outcome["results"]
    assert list(results) == addresses
    assert session.counters.objects == 100
    assert session.counters.duplicates == 0
    assert session.counters.retransmissions > 0
    assert session.counters.interests == 100 + session.counters.retransmissions

    _, again, _ = _lossy_run(seed=9)
    assert again.counters == session.counters


def test_fetch_all_with_half_the_interests_dropped_once():
    env, network = _pair()
    addresses = _serve_store(network, 100)
    network.loss = ScriptedLoss({message_key("interest", Interest(address=address)): 1 for address in addresses[::2]})
    session, outcome = _fetch(env, network, addresses, window_size=16)
    assert list(outcome["results"]) == addresses
    assert session.counters.retransmissions == 50
    assert session.counters.interests == 150
    assert session.counters.objects == 100
    assert session.counters.duplicates == 0
    assert network.counters.dropped_loss == 50


def test_rto_below_the_round_trip_counts_late_replies():
    # round trip is 2000us; every first reply lands after the retransmission went out
    env, network = _pair(latency_us=1000)
    addresses = _serve_store(network, 100)
    session, outcome = _fetch(env, network, addresses, window_size=16, rto_us=1500, max_retries=1)
    assert list(outcome["results"]) == addresses
    assert session.counters.retransmissions == 100
    assert session.counters.interests == 200
    assert session.counters.objects == 100
    assert session.counters.duplicates == 100


def test_fetch_all_reports_missing_addresses():
    env, network = _pair()
    addresses = _serve_store(network, 3)
    absent = NamedAddress(name=PREFIX.child("nothing"))
    session, outcome = _fetch(env, network, addresses + [absent], max_retries=2)
    error = outcome["error"]
    assert error.missing == [absent]
    assert set(error.partial) == set(addresses)
    assert session.state == SessionState.FAILED
    assert session.counters.retransmissions == 2


def test_poll_waits_for_the_producer():
    env, network = _pair()
    session = FetchSession(env, network, "requester", window_size=1, rto_us=4000, max_retries=0)
    name = BASE.child("manifest")

    def publish():
        yield env.timeout(10_000)
        network.node("responder").attach(name, lambda interest: ContentObject(name=name, payload=b"root"))

    result = {}

    def poll():
        result["delivery"] = yield from session.poll(Interest.for_name(name), limit=10)

    env.process(publish())
    env.process(poll())
    env.run()
    assert result["delivery"].obj.payload == b"root"
    # polls at 0, 4000, 8000 miss; the one sent at 12000 is answered
    assert session.counters.polls == 4


def test_illegal_transition():
    env, network = _pair()
    session = FetchSession(env, network, "requester", window_size=1, rto_us=4000, max_retries=0)
    with pytest.raises(TransportError):
        session.transition(SessionState.CLOSED)
    session.transition(SessionState.CLOSING)
    session.transition(SessionState.CLOSED)
    with pytest.raises(TransportError):
        session.transition(SessionState.ACTIVE)


def test_responder_releases_once():
    released = []
    responder = CloseResponder(BASE, on_release=lambda: released.append(True))
    assert responder.handle(Interest.for_name(close_name(BASE))).payload == ACK_PAYLOAD
    assert responder.state == ResponderState.CLOSING
    assert not released
    responder.handle(Interest.for_name(close_ack_name(BASE)))
    responder.handle(Interest.for_name(close_ack_name(BASE)))
    assert released == [True]
    assert responder.closed
    assert responder.acks_sent == 3
    assert responder.handle(Interest.for_name(BASE.child("other"))) is None


def _close(loss=None, max_retries: int = 3):
    env, network = _pair(loss=loss)
    session = FetchSession(env, network, "requester", window_size=1, rto_us=4000, max_retries=max_retries)
    released_while = []
    responder = CloseResponder(BASE, on_release=lambda: released_while.append(session.state))
    network.node("responder").attach(BASE, responder.handle)
    outcome = {}

    def run():
        try:
            yield from close_session(session, BASE)
        except HandshakeFailedError as e:
            outcome["error"] = e

    env.process(run())
    env.run()
    return session, responder, released_while, outcome


def test_close_session_without_loss():
    session, responder, released_while, outcome = _close()
    assert not outcome
    assert session.state == SessionState.CLOSED
    assert responder.closed
    assert released_while == [SessionState.CLOSING]


def test_close_session_fails_when_acks_never_arrive():
    interest = Interest.for_name(close_name(BASE))
    session, responder, _, outcome = _close(loss=ScriptedLoss({message_key("object", interest): 10}), max_retries=2)
    assert isinstance(outcome["error"], HandshakeFailedError)
    assert session.state == SessionState.FAILED
    assert not responder.closed
    assert responder.state == ResponderState.CLOSING


def test_close_handshake_model_check():
    check = model_check_close(max_retries=3)
    assert len(check.trials) == 4**4
    assert check.violations == []
    recoverable = [trial for trial in check.trials if trial.recoverable]
    assert all(trial.requester_state == SessionState.CLOSED and trial.released for trial in recoverable)
    assert any(trial.requester_state == SessionState.FAILED for trial in check.trials)
    # the responder never releases while the requester is still active
    assert all(
        trial.released_while in (SessionState.CLOSING, SessionState.CLOSED)
        for trial in check.trials
        if trial.released
    )
