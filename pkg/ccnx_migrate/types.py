# Copyright Sierra

import math
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ccnx_migrate.ccnx.name import Name, name_parse
from ccnx_migrate.ccnx.packet import FIXED_HEADER_SIZE, MAX_PACKET_LENGTH, name_tlv_size
from ccnx_migrate.ccnx.tlv import TL_SIZE
from ccnx_migrate.exception import CodecError

KIB = 1024
MIB = 1024 * KIB
GIB = 1024 * MIB


class ResourceKind(str, Enum):
    CONFIG = "config"
    CPU_REGFILE = "cpu_regfile"
    CPU_TLB = "cpu_tlb"
    RAM_PAGE = "ram_page"
    DISK_BLOCK = "disk_block"
    VHD_STRUCT = "vhd_struct"
    NET = "net"


class Phase(str, Enum):
    PUSH = "push"
    STOP_AND_COPY = "stop_and_copy"
    PULL = "pull"
    DONE = "done"


class Addressing(str, Enum):
    STRONG = "strong"
    WEAK = "weak"


class NamingMode(str, Enum):
    STRONG = "strong"
    WEAK = "weak"
    COMPARISON = "comparison"


class HandoverVariant(str, Enum):
    EXTERNAL = "external"
    SOFTWARE_DEFINED = "software_defined"
    DISTRIBUTED = "distributed"


def _check_name(text: str) -> str:
    try:
        name_parse(text)
    except CodecError as e:
        raise ValueError(e.short_message)
    return text


class DiskConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    disk_name: str
    # decimal units: 2 GB == 2 * 10**9
    capacity_bytes: int = Field(gt=0)
    block_size: int = Field(default=512, gt=0)
    fill_ratio: float = Field(default=0.25, ge=0.0, le=1.0)
    vhd_struct_size: int = Field(default=512, gt=0)
    # disks sharing a content seed have byte-identical blocks (read-only root images)
    content_seed: Optional[int] = None
    read_only: bool = False

    @property
    def block_count(self) -> int:
        return math.ceil(Fraction(str(self.fill_ratio)) * self.capacity_bytes / self.block_size)

    @property
    def capacity_blocks(self) -> int:
        return math.ceil(self.capacity_bytes / self.block_size)


class VmConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    vm_name: str
    cpu_n: int = Field(default=1, ge=1)
    # binary units: 2 GiB == 2 ** 31
    ram_bytes: int = Field(gt=0)
    page_size: int = Field(default=4 * KIB, gt=0)
    disks: List[DiskConfig] = []
    net_interfaces: List[str] = []
    regfile_size: int = Field(default=512, gt=0)
    tlb_size: int = Field(default=4 * KIB, gt=0)

    @field_validator("vm_name")
    @classmethod
    def _vm_name_is_name(cls, value: str) -> str:
        return _check_name(value)

    @model_validator(mode="after")
    def _consistent(self) -> "VmConfig":
        if self.ram_bytes % self.page_size != 0:
            raise ValueError("ram_bytes must be divisible by page_size")
        disk_names = [disk.disk_name for disk in self.disks]
        if len(set(disk_names)) != len(disk_names):
            raise ValueError("disk names must be unique")
        if len(set(self.net_interfaces)) != len(self.net_interfaces):
            raise ValueError("net interface names must be unique")
        return self

    @property
    def name(self) -> Name:
        return name_parse(self.vm_name)

    @property
    def ram_pages(self) -> int:
        return self.ram_bytes // self.page_size

    def disk(self, disk_name: str) -> Optional[DiskConfig]:
        for disk in self.disks:
            if disk.disk_name == disk_name:
                return disk
        return None


class WorkloadConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    hot_page_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    hot_write_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    cold_write_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    writes_per_step: Optional[int] = Field(default=None, ge=0)
    step_interval_us: int = Field(default=2000, gt=0)
    # populated disk blocks held back from the push phase and pulled lazily
    deferred_fraction: float = Field(default=0.0, ge=0.0, le=1.0)


class StopPolicy(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(default=0.9, gt=0.0)
    max_rounds: int = Field(default=10, ge=1)


class TransportConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    window_size: int = Field(default=32, ge=1)
    # None: 4x the one-way path latency
    rto_us: Optional[int] = Field(default=None, gt=0)
    max_retries: int = Field(default=3, ge=0)
    poll_limit: int = Field(default=1000, ge=1)


class DedupOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    duplicate_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    shared_pages: int = Field(default=0, ge=0)
    host_scoped_hashes: bool = False
    objectstore_node: Optional[str] = None
    objectstore_prefix: str = "/nyc/objectstore"
    co_hosted_vm: Optional[VmConfig] = None
    co_hosted_seed: Optional[int] = None

    @field_validator("objectstore_prefix")
    @classmethod
    def _objectstore_prefix_is_name(cls, value: str) -> str:
        return _check_name(value)


class NodeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    node_id: str
    # location-dependent host prefix, e.g. /nyc/host7
    prefix: Optional[str] = None

    @field_validator("prefix")
    @classmethod
    def _prefix_is_name(cls, value: Optional[str]) -> Optional[str]:
        return _check_name(value) if value is not None else None


class LinkConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    a: str
    b: str
    latency_us: int = Field(default=500, ge=0)
    loss: float = Field(default=0.0, ge=0.0, lt=1.0)


class TopologyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    nodes: List[NodeConfig]
    links: List[LinkConfig]

    @model_validator(mode="after")
    def _references_resolve(self) -> "TopologyConfig":
        node_ids = [node.node_id for node in self.nodes]
        if len(set(node_ids)) != len(node_ids):
            raise ValueError("node ids must be unique")
        for link in self.links:
            for endpoint in (link.a, link.b):
                if endpoint not in node_ids:
                    raise ValueError(f"link endpoint {endpoint!r} is not a node")
            if link.a == link.b:
                raise ValueError(f"link {link.a!r}-{link.b!r} is a self loop")
        return self

    def node(self, node_id: str) -> Optional[NodeConfig]:
        for node in self.nodes:
            if node.node_id == node_id:
                return node
        return None


def default_topology(latency_us: int = 500, loss: float = 0.0, objectstore: bool = False) -> TopologyConfig:
    nodes = [
        NodeConfig(node_id="source", prefix="/nyc/host7"),
        NodeConfig(node_id="router"),
        NodeConfig(node_id="destination", prefix="/sfo/host2"),
    ]
    links = [
        LinkConfig(a="source", b="router", latency_us=latency_us, loss=loss),
        LinkConfig(a="router", b="destination", latency_us=latency_us, loss=loss),
    ]
    if objectstore:
        nodes.append(NodeConfig(node_id="objectstore", prefix="/nyc/objectstore"))
        links.append(LinkConfig(a="objectstore", b="router", latency_us=latency_us, loss=loss))
    return TopologyConfig(nodes=nodes, links=links)


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "default"
    seed: int = 1
    topology: TopologyConfig = Field(default_factory=default_topology)
    source_node: str = "source"
    destination_node: str = "destination"
    probe_node: Optional[str] = None
    probe_interval_us: Optional[int] = Field(default=None, gt=0)
    vm: VmConfig
    workload: WorkloadConfig = WorkloadConfig()
    naming_mode: NamingMode = NamingMode.STRONG
    routing_model: HandoverVariant = HandoverVariant.SOFTWARE_DEFINED
    stop_policy: StopPolicy = StopPolicy()
    transport: TransportConfig = TransportConfig()
    dedup: DedupOptions = DedupOptions()
    chunk_limit: int = Field(default=64_000, ge=256)
    source_start_delay_us: int = Field(default=0, ge=0)
    max_sim_time_us: int = Field(default=600_000_000, gt=0)

    @model_validator(mode="after")
    def _references_resolve(self) -> "Scenario":
        for role, node_id in (("source", self.source_node), ("destination", self.destination_node)):
            node = self.topology.node(node_id)
            if node is None:
                raise ValueError(f"{role} node {node_id!r} is not in the topology")
            if node.prefix is None:
                raise ValueError(f"{role} node {node_id!r} needs a location prefix")
        if self.source_node == self.destination_node:
            raise ValueError("source and destination must be different nodes")
        if self.probe_node is not None and self.topology.node(self.probe_node) is None:
            raise ValueError(f"probe node {self.probe_node!r} is not in the topology")
        if self.dedup.objectstore_node is not None and self.topology.node(self.dedup.objectstore_node) is None:
            raise ValueError(f"objectstore node {self.dedup.objectstore_node!r} is not in the topology")
        if self.dedup.co_hosted_vm is not None and self.dedup.co_hosted_vm.vm_name == self.vm.vm_name:
            raise ValueError("the co-hosted vm needs its own name")
        return self

    @model_validator(mode="after")
    def _chunks_fit_packets(self) -> "Scenario":
        # the longest manifest chunk name: location prefix, vm name, last version, 32-bit chunk index
        host = name_parse(self.topology.node(self.source_node).prefix)
        vm_names = [self.vm.name] + ([self.dedup.co_hosted_vm.name] if self.dedup.co_hosted_vm is not None else [])
        longest = max(
            name_tlv_size(
                host.concat(vm_name).child(
                    "checkpoint", f"ver={self.stop_policy.max_rounds + 1}", "manifest", f"chunk={2**32}"
                )
            )
            for vm_name in vm_names
        )
        largest = FIXED_HEADER_SIZE + 2 * TL_SIZE + longest + self.chunk_limit
        if largest > MAX_PACKET_LENGTH:
            raise ValueError(
                f"chunk_limit {self.chunk_limit} makes named manifest chunks of up to {largest} bytes,"
                f" over the {MAX_PACKET_LENGTH}-byte packet length"
            )
        return self


class RoundRecord(BaseModel):
    version: int
    entries: int
    transferred_bytes: int
    dirty_bytes: int = 0
    round_duration_us: int = 0


class PhaseMetrics(BaseModel):
    checkpoints: int = 0
    entries: int = 0
    interests: int = 0
    objects: int = 0
    retransmissions: int = 0
    polls: int = 0
    duplicates: int = 0
    local_hits: int = 0
    bytes_sent: int = 0
    bytes_received: int = 0
    payload_bytes: int = 0
    manifest_bytes: int = 0

    @property
    def bytes_on_wire(self) -> int:
        return self.bytes_sent + self.bytes_received


class Divergence(BaseModel):
    kind: ResourceKind
    disk: str = ""
    index: int
    offset: int
    reason: str


class EquivalenceResult(BaseModel):
    verdict: str
    compared: int = 0
    divergence: Optional[Divergence] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"


class VersionRecord(BaseModel):
    version: int
    phase: Phase
    entries: int
    chunks: int
    closed_us: Optional[int] = None


class ProbeRecord(BaseModel):
    seq: int
    sent_us: int
    first_hop: Optional[str]
    delivered_to: Optional[str] = None
    delivered_us: Optional[int] = None


class NamingOverheadRow(BaseModel):
    scheme: str
    per_object_bytes: float
    interest_bytes: float
    manifest_bytes_per_entry: float
    objects: int
    total_overhead_bytes: int


class MigrationMetrics(BaseModel):
    vm_name: str
    seed: int
    completed: bool = False
    aborted: Optional[str] = None
    rounds: int = 0
    push_history: List[RoundRecord] = []
    versions: List[VersionRecord] = []
    phases: Dict[Phase, PhaseMetrics] = {}
    freeze_us: Optional[int] = None
    vm_start_us: Optional[int] = None
    completion_us: Optional[int] = None
    downtime_us: Optional[int] = None
    handover_us: Optional[int] = None
    logical_objects: int = 0
    unique_objects: int = 0
    objects_fetched: int = 0
    weak_objects_fetched: int = 0
    applied_bytes: int = 0
    wire_bytes: int = 0
    unique_transferred_bytes: int = 0
    dedup_saved_bytes: int = 0
    source_objects_remaining: int = 0
    equivalence: Optional[EquivalenceResult] = None


class NetworkCounters(BaseModel):
    interests_forwarded: int = 0
    objects_forwarded: int = 0
    hop_bytes: int = 0
    dropped_loss: int = 0
    dropped_no_route: int = 0
    unanswered: int = 0


class MetricsReport(BaseModel):
    scenario: str
    seed: int
    naming_mode: NamingMode
    routing_model: HandoverVariant
    stop_policy: StopPolicy
    verdict: str
    migrations: List[MigrationMetrics]
    network: NetworkCounters
    probes: List[ProbeRecord] = []
    naming_overhead: Optional[List[NamingOverheadRow]] = None

    @property
    def primary(self) -> MigrationMetrics:
        return self.migrations[0]
