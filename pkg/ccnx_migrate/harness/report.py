# Copyright Sierra

from typing import List

from termcolor import colored

from ccnx_migrate.machine.build import ObjectCount
from ccnx_migrate.types import MetricsReport, MigrationMetrics, NamingOverheadRow, Phase


def _us(value) -> str:
    return "-" if value is None else f"{value:,} us"


def _verdict_mark(verdict: str) -> str:
    if verdict == "PASS":
        return colored("✅ PASS", "green")
    if verdict == "ABORTED":
        return colored("❌ ABORTED", "yellow")
    return colored(f"❌ {verdict}", "red")


def render_count(config_name: str, count: ObjectCount) -> str:
    lines = [f"objects for {config_name}"]
    for disk_name, objects in count.disks.items():
        lines.append(f"  disk {disk_name}={objects:,}")
    lines.append(f"  disk={count.disk_total:,} ram={count.ram_pages:,}")
    lines.append(f"  cpu={count.cpu_objects:,} config={count.config_objects:,} net={count.net_objects:,}")
    lines.append(f"  total={count.total:,}")
    return "\n".join(lines)


def render_naming_overhead(rows: List[NamingOverheadRow]) -> str:
    lines = [f"{'scheme':<10}{'object B':>12}{'interest B':>12}{'manifest B':>12}{'total overhead':>18}"]
    for row in rows:
        lines.append(
            f"{row.scheme:<10}{row.per_object_bytes:>12.2f}{row.interest_bytes:>12.2f}"
            f"{row.manifest_bytes_per_entry:>12.2f}{row.total_overhead_bytes:>18,}"
        )
    return "\n".join(lines)


def _render_migration(metrics: MigrationMetrics) -> List[str]:
    lines = [colored(f"{metrics.vm_name} (seed {metrics.seed})", attrs=["bold"])]
    if metrics.aborted is not None:
        lines.append(colored(f"  aborted: {metrics.aborted}", "red"))
    lines.append(f"  rounds: {metrics.rounds}")
    for record in metrics.push_history:
        lines.append(
            f"    ver={record.version} entries={record.entries:,} payload={record.transferred_bytes:,} B"
            f" dirty after={record.dirty_bytes:,} B"
        )
    for phase in Phase:
        totals = metrics.phases.get(phase)
        if totals is None:
            continue
        lines.append(
            f"  {phase.value:<14} checkpoints={totals.checkpoints} entries={totals.entries:,}"
            f" wire={totals.bytes_on_wire:,} B interests={totals.interests:,} objects={totals.objects:,}"
            f" retx={totals.retransmissions:,}"
        )
    lines.append(f"  frozen at {_us(metrics.freeze_us)}, started at {_us(metrics.vm_start_us)}")
    lines.append(f"  downtime: {_us(metrics.downtime_us)}; handover at {_us(metrics.handover_us)}")
    lines.append(
        f"  objects: logical={metrics.logical_objects:,} unique={metrics.unique_objects:,}"
        f" fetched={metrics.objects_fetched:,} weak={metrics.weak_objects_fetched:,}"
    )
    lines.append(
        f"  bytes: wire={metrics.wire_bytes:,} unique={metrics.unique_transferred_bytes:,}"
        f" dedup saved={metrics.dedup_saved_bytes:,}"
    )
    if metrics.equivalence is not None:
        lines.append(f"  equivalence: {_verdict_mark(metrics.equivalence.verdict)} ({metrics.equivalence.compared:,} compared)")
        divergence = metrics.equivalence.divergence
        if divergence is not None:
            where = f"{divergence.kind.value} {divergence.disk} {divergence.index}".replace("  ", " ")
            lines.append(f"    first divergence: {where} at offset {divergence.offset} ({divergence.reason})")
    return lines


def render_report(report: MetricsReport) -> str:
    lines = [
        f"{_verdict_mark(report.verdict)} scenario={report.scenario} seed={report.seed}"
        f" naming={report.naming_mode.value} routing={report.routing_model.value}",
        f"stop policy: alpha={report.stop_policy.alpha} max_rounds={report.stop_policy.max_rounds}",
    ]
    for metrics in report.migrations:
        lines.extend(_render_migration(metrics))
    network = report.network
    lines.append(
        f"network: interests={network.interests_forwarded:,} objects={network.objects_forwarded:,}"
        f" hop bytes={network.hop_bytes:,} lost={network.dropped_loss:,} no route={network.dropped_no_route:,}"
    )
    if report.probes:
        delivered: dict[str, int] = {}
        for probe in report.probes:
            key = probe.delivered_to or "lost"
            delivered[key] = delivered.get(key, 0) + 1
        lines.append("probes: " + " ".join(f"{node}={count}" for node, count in sorted(delivered.items())))
    if report.naming_overhead is not None:
        lines.append(render_naming_overhead(report.naming_overhead))
    return "\n".join(lines)
