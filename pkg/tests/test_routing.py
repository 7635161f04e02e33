import numpy as np
import pytest
import simpy

from ccnx_migrate.ccnx.name import Name, name_parse
from ccnx_migrate.ccnx.packet import ContentObject, Interest
from ccnx_migrate.exception import ControllerError, RoutingError
from ccnx_migrate.routing.fib import LOCAL_FACE, FibTable
from ccnx_migrate.routing.handover import (
    DistributedHandover,
    ExternalHandover,
    SoftwareDefinedHandover,
    get_handover,
)
from ccnx_migrate.routing.plane import RoutingPlane, SdnController
from ccnx_migrate.sim.network import Network, ScriptedLoss, message_key
from ccnx_migrate.types import HandoverVariant, LinkConfig, NodeConfig, TopologyConfig, default_topology

VM = name_parse("/parc/vm3")


def _topology(*links: tuple[str, str, int]) -> TopologyConfig:
    node_ids = sorted({node for a, b, _ in links for node in (a, b)})
    return TopologyConfig(
        nodes=[NodeConfig(node_id=node_id) for node_id in node_ids],
        links=[LinkConfig(a=a, b=b, latency_us=latency) for a, b, latency in links],
    )


def _plane(topology: TopologyConfig, loss=None):
    env = simpy.Environment()
    network = Network(env, topology, loss=loss)
    return env, network, RoutingPlane(env, network)


def test_fib_longest_prefix_match():
    fib = FibTable()
    fib.install(name_parse("/nyc"), "router")
    fib.install(name_parse("/nyc/host7"), LOCAL_FACE)
    assert fib.lookup(name_parse("/nyc/host7/parc/vm3")) == LOCAL_FACE
    assert fib.lookup(name_parse("/nyc/host8")) == "router"
    assert fib.match(name_parse("/nyc/host8")) == (name_parse("/nyc"), "router")
    assert fib.lookup(name_parse("/sfo")) is None
    fib.remove(name_parse("/nyc/host7"))
    assert fib.lookup(name_parse("/nyc/host7/x")) == "router"
    assert fib.dump() == [("/nyc", "router")]
    assert len(fib) == 1


def test_shortest_paths():
    _, _, plane = _plane(_topology(("a", "b", 100), ("b", "c", 100), ("a", "c", 500)))
    assert plane.path_latency("a", "c") == 200
    assert plane.next_hop["a"]["c"] == "b"
    assert plane.path_latency("c", "c") == 0


def test_equal_cost_paths_prefer_smallest_path():
    _, _, plane = _plane(_topology(("a", "c", 100), ("c", "d", 100), ("a", "b", 100), ("b", "d", 100)))
    assert plane.path_latency("a", "d") == 200
    assert plane.next_hop["a"]["d"] == "b"


def test_install_is_immediate_everywhere():
    _, network, plane = _plane(default_topology())
    plane.install("source", VM)
    assert network.first_hop("destination", VM) == "router"
    assert network.first_hop("router", VM) == "source"
    assert network.first_hop("source", VM) == LOCAL_FACE
    with pytest.raises(RoutingError):
        plane.install("nowhere", VM)


def test_advertise_and_withdraw_propagate_with_path_latency():
    env, network, plane = _plane(default_topology())
    plane.install("source", VM)
    plane.advertise("destination", VM)
    plane.withdraw("source", VM)
    assert network.first_hop("destination", VM) == LOCAL_FACE
    assert network.first_hop("source", VM) is None
    env.run(until=499)
    assert network.first_hop("router", VM) == "source"
    env.run(until=501)
    assert network.first_hop("router", VM) == "destination"
    assert plane.origins("router", VM) == {"destination"}
    env.run(until=1001)
    assert network.first_hop("source", VM) == "router"


def test_sdn_controller_repoints_every_fib_at_once():
    _, network, plane = _plane(default_topology())
    plane.install("source", VM)
    SdnController(plane).repoint(VM, "destination")
    assert network.first_hop("source", VM) == "router"
    assert network.first_hop("router", VM) == "destination"
    assert network.first_hop("destination", VM) == LOCAL_FACE
    with pytest.raises(ControllerError):
        SdnController(plane).repoint(name_parse("/parc/vm9"), "destination")
    with pytest.raises(ControllerError):
        SdnController(plane).repoint(VM, "nowhere")


def test_express_delivers_over_the_path():
    env, network, plane = _plane(default_topology())
    plane.install("source", VM)
    network.node("source").attach(VM, lambda interest: ContentObject(name=interest.address.name, payload=b"pong"))
    reply = network.express("destination", Interest.for_name(VM.child("probe")))
    env.run()
    assert reply.triggered
    assert reply.value.served_by == "source"
    assert reply.value.served_us == 1000
    assert reply.value.obj.payload == b"pong"
    assert env.now == 2000
    assert network.counters.interests_forwarded == 2
    assert network.counters.objects_forwarded == 2


def test_express_without_route_or_producer():
    env, network, plane = _plane(default_topology())
    lost = network.express("destination", Interest.for_name(VM))
    env.run()
    assert not lost.triggered
    plane.install("source", VM)
    unanswered = network.express("destination", Interest.for_name(VM))
    env.run()
    assert not unanswered.triggered
    assert network.counters.dropped_no_route == 1
    assert network.counters.unanswered == 1


def test_scripted_loss_drops_the_first_transmissions():
    interest = Interest.for_name(VM.child("x"))
    loss = ScriptedLoss({message_key("interest", interest): 1})
    env, network, plane = _plane(default_topology(), loss=loss)
    plane.install("source", VM)
    network.node("source").attach(VM, lambda i: ContentObject(name=i.address.name, payload=b""))
    first = network.express("destination", interest)
    second = network.express("destination", interest)
    env.run()
    assert not first.triggered
    assert second.triggered
    assert network.counters.dropped_loss == 1


def test_handover_checkpoint_prefixes():
    _, _, plane = _plane(default_topology())
    host = name_parse("/nyc/host7")
    location = name_parse("/nyc/host7/parc/vm3")
    external = get_handover(HandoverVariant.EXTERNAL, plane)
    assert isinstance(external, ExternalHandover)
    assert external.checkpoint_prefix(VM, host, handed_over=False) == location
    sdn = get_handover(HandoverVariant.SOFTWARE_DEFINED, plane)
    assert isinstance(sdn, SoftwareDefinedHandover)
    assert sdn.checkpoint_prefix(VM, host, handed_over=False) == VM
    assert sdn.checkpoint_prefix(VM, host, handed_over=True) == location
    assert isinstance(get_handover(HandoverVariant.DISTRIBUTED, plane), DistributedHandover)


SEGMENTS = (b"nyc", b"host7", b"parc")


def _random_name(rng: np.random.Generator, max_length: int) -> Name:
    length = int(rng.integers(0, max_length + 1))
    return Name(segments=tuple(SEGMENTS[i] for i in rng.integers(0, len(SEGMENTS), size=length)))


def test_fib_lookup_matches_a_linear_scan():
    rng = np.random.default_rng(5)
    for _ in range(300):
        fib = FibTable()
        entries: dict[tuple[bytes, ...], str] = {}
        for _ in range(int(rng.integers(0, 8))):
            prefix = _random_name(rng, 3)
            face = f"face{int(rng.integers(0, 4))}"
            fib.install(prefix, face)
            entries[prefix.segments] = face
        name = _random_name(rng, 5)
        matches = [prefix for prefix in entries if name.segments[: len(prefix)] == prefix]
        expected = entries[max(matches, key=len)] if matches else None
        assert fib.lookup(name) == expected


@pytest.mark.parametrize("variant", [HandoverVariant.SOFTWARE_DEFINED, HandoverVariant.DISTRIBUTED])
def test_revert_routes_the_name_back_to_the_source(variant):
    env, network, plane = _plane(default_topology())
    handover = get_handover(variant, plane)
    handover.setup(VM, "source")
    handover.hand_over(VM, "source", "destination")
    env.run(until=2000)
    assert network.first_hop("router", VM) == "destination"
    handover.revert(VM, "source", "destination")
    env.run(until=4000)
    assert network.first_hop("source", VM) == LOCAL_FACE
    assert network.first_hop("router", VM) == "source"
    assert network.first_hop("destination", VM) == "router"


def test_external_revert_leaves_routes_alone():
    env, network, plane = _plane(default_topology())
    handover = get_handover(HandoverVariant.EXTERNAL, plane)
    handover.setup(VM, "source")
    handover.hand_over(VM, "source", "destination")
    handover.revert(VM, "source", "destination")
    env.run(until=2000)
    assert network.first_hop("router", VM) is None
