import os
from typing import Optional

import pytest

from ccnx_migrate.types import (
    DedupOptions,
    DiskConfig,
    HandoverVariant,
    NamingMode,
    Scenario,
    VmConfig,
    WorkloadConfig,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
SCENARIOS = os.path.join(os.path.dirname(os.path.dirname(__file__)), "scenarios")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def scenario_path(name: str) -> str:
    return os.path.join(SCENARIOS, name)


def make_vm(
    vm_name: str = "/parc/vm3",
    ram_bytes: int = 4 * 1024 * 1024,
    disk_bytes: int = 16 * 1024 * 1024,
    block_size: int = 4096,
    fill_ratio: float = 0.5,
    cpu_n: int = 2,
    content_seed: Optional[int] = None,
    read_only: bool = False,
) -> VmConfig:
    return VmConfig(
        vm_name=vm_name,
        cpu_n=cpu_n,
        ram_bytes=ram_bytes,
        page_size=4096,
        disks=[
            DiskConfig(
                disk_name="hda",
                capacity_bytes=disk_bytes,
                block_size=block_size,
                fill_ratio=fill_ratio,
                content_seed=content_seed,
                read_only=read_only,
            )
        ],
        net_interfaces=["en0"],
    )


def make_scenario(
    seed: int = 1,
    vm: Optional[VmConfig] = None,
    workload: Optional[WorkloadConfig] = None,
    naming_mode: NamingMode = NamingMode.STRONG,
    routing_model: HandoverVariant = HandoverVariant.SOFTWARE_DEFINED,
    dedup: Optional[DedupOptions] = None,
    **kwargs,
) -> Scenario:
    return Scenario(
        name=f"test-{seed}",
        seed=seed,
        vm=vm if vm is not None else make_vm(),
        workload=workload if workload is not None else WorkloadConfig(),
        naming_mode=naming_mode,
        routing_model=routing_model,
        dedup=dedup if dedup is not None else DedupOptions(),
        **kwargs,
    )


HOT_COLD = WorkloadConfig(
    hot_page_fraction=0.05,
    hot_write_prob=0.2,
    cold_write_prob=0.002,
    writes_per_step=64,
    step_interval_us=2000,
    deferred_fraction=0.1,
)


@pytest.fixture
def small_vm() -> VmConfig:
    return make_vm()


@pytest.fixture
def tiny_vm() -> VmConfig:
    return make_vm(ram_bytes=256 * 1024, disk_bytes=1024 * 1024, cpu_n=1)
