# Copyright Sierra

import argparse
import json
import logging
import os
import sys
from typing import List, NoReturn, Optional

import numpy as np
from pydantic import ValidationError
from termcolor import colored

from ccnx_migrate.exception import ConfigError, MigrationError, ScenarioError
from ccnx_migrate.harness.report import render_count, render_naming_overhead, render_report
from ccnx_migrate.harness.simulation import CLASSIFIER_STREAM
from ccnx_migrate.machine.build import build_vm, object_count
from ccnx_migrate.machine.image import resource_name
from ccnx_migrate.machine.workload import classify
from ccnx_migrate.manifest.build import build_manifest, checkpoint_base, format_manifest
from ccnx_migrate.manifest.naming import naming_overhead
from ccnx_migrate.run import load_scenario, load_vm_config, run_scenarios, write_report
from ccnx_migrate.store.content_store import ContentStore
from ccnx_migrate.types import HandoverVariant, MetricsReport, NamingMode, Phase, Scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_MIGRATION_FAILED = 3
EXIT_EQUIVALENCE_FAILED = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ccnx_migrate", description="VM migration over Content Centric Networking")
    parser.add_argument("--verbose", action="store_true", help="Log library progress to stderr")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = commands.add_parser("gen", help="Emit a VM image and its name listing")
    gen.add_argument("--config", type=str, required=True, help="VM config JSON")
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--duplicate-fraction", type=float, default=0.0)
    gen.add_argument("--out", type=str, required=True, help="Output directory")

    count = commands.add_parser("count", help="Print the object count of a VM config")
    count.add_argument("--config", type=str, required=True)

    migrate = commands.add_parser("migrate", help="Run migration scenarios and write reports")
    migrate.add_argument("--scenario", type=str, nargs="+", required=True)
    migrate.add_argument("--seed", type=int, help="Override the scenario seed")
    migrate.add_argument("--naming", type=str, choices=[item.value for item in NamingMode])
    migrate.add_argument("--routing", type=str, choices=[item.value for item in HandoverVariant])
    migrate.add_argument(
        "--out",
        type=str,
        required=True,
        help="Report path; a directory when several scenarios are given",
    )
    migrate.add_argument("--trace", type=str, help="JSONL trace of agent operations")
    migrate.add_argument(
        "--max-concurrency",
        type=int,
        default=1,
        help="Number of scenarios to run in parallel",
    )

    report = commands.add_parser("report", help="Render a report as text")
    report.add_argument("--report", type=str, required=True)

    compare = commands.add_parser("compare-naming", help="Naming overhead of hash, metadata and link names")
    compare.add_argument("--config", type=str, required=True)

    manifest = commands.add_parser("manifest", help="Print the first push manifest of a scenario's VM")
    manifest.add_argument("--scenario", type=str, required=True)
    manifest.add_argument("--chunk-limit", type=int)
    return parser


def _override(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    update = {}
    if args.seed is not None:
        update["seed"] = args.seed
    if args.naming is not None:
        update["naming_mode"] = NamingMode(args.naming)
    if args.routing is not None:
        update["routing_model"] = HandoverVariant(args.routing)
    return scenario.model_copy(update=update)


def _exit_code(report: MetricsReport) -> int:
    if report.verdict == "ABORTED":
        return EXIT_MIGRATION_FAILED
    if report.verdict != "PASS":
        return EXIT_EQUIVALENCE_FAILED
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    config = load_vm_config(args.config)
    image = build_vm(config, args.seed, duplicate_fraction=args.duplicate_fraction)
    if not os.path.exists(args.out):
        os.makedirs(args.out)
    index = []
    offset = 0
    with open(os.path.join(args.out, "image.bin"), "wb") as blob, open(os.path.join(args.out, "names.txt"), "w") as names:
        for locator in image.locators():
            data = image.read(locator)
            name = str(resource_name(config, config.name, locator))
            blob.write(data)
            names.write(name + "\n")
            index.append({"name": name, "offset": offset, "size": len(data)})
            offset += len(data)
    with open(os.path.join(args.out, "image.index.json"), "w") as f:
        json.dump(index, f, indent=2)
    print(f"📄 {len(index):,} objects ({offset:,} bytes) written to {args.out}")
    return EXIT_OK


def cmd_count(args: argparse.Namespace) -> int:
    config = load_vm_config(args.config)
    print(render_count(config.vm_name, object_count(config)))
    return EXIT_OK


def cmd_migrate(args: argparse.Namespace) -> int:
    scenarios = [_override(load_scenario(path), args) for path in args.scenario]
    results = run_scenarios(scenarios, max_concurrency=args.max_concurrency, log_file=args.trace)
    code = EXIT_OK
    for scenario, result in zip(scenarios, results):
        report = result.value
        if result.error is not None:
            print(colored(f"❌ {scenario.name}: {result.error.short_message}", "red"))
            code = max(code, EXIT_MIGRATION_FAILED)
            continue
        if len(scenarios) == 1:
            path = args.out
        else:
            path = os.path.join(args.out, f"{scenario.name}-seed{scenario.seed}.json")
        write_report(report, path)
        print(render_report(report))
        print(f"\n📄 Report saved to {path}\n")
        code = max(code, _exit_code(report))
    return code


def cmd_report(args: argparse.Namespace) -> int:
    with open(args.report, "r") as f:
        text = f.read()
    try:
        report = MetricsReport.model_validate_json(text)
    except ValidationError as e:
        raise ScenarioError(f"invalid report {args.report}", report={"errors": e.errors(include_url=False)})
    print(render_report(report))
    return _exit_code(report)


def cmd_compare_naming(args: argparse.Namespace) -> int:
    config = load_vm_config(args.config)
    print(render_naming_overhead(naming_overhead(config)))
    return EXIT_OK


def cmd_manifest(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    image = build_vm(
        scenario.vm,
        scenario.seed,
        duplicate_fraction=scenario.dedup.duplicate_fraction,
        shared_pages=scenario.dedup.shared_pages,
    )
    classifier = classify(image, scenario.workload, np.random.default_rng([scenario.seed, CLASSIFIER_STREAM]))
    built = build_manifest(
        image.snapshot(0),
        classifier.push_initial(),
        Phase.PUSH,
        0,
        ContentStore(),
        checkpoint_base(scenario.vm.name, 0),
        chunk_limit=args.chunk_limit or scenario.chunk_limit,
    )
    print(format_manifest(built.manifest))
    print(f"{len(built.chunks)} chunk(s), {built.manifest_bytes:,} manifest bytes, {built.payload_bytes:,} payload bytes")
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "count": cmd_count,
    "migrate": cmd_migrate,
    "report": cmd_report,
    "compare-naming": cmd_compare_naming,
    "manifest": cmd_manifest,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ScenarioError) as e:
        print(colored(f"❌ {e.short_message}", "red"), file=sys.stderr)
        for error in (e.report or {}).get("errors", []):
            print(f"  {'.'.join(str(part) for part in error['loc'])}: {error['msg']}", file=sys.stderr)
        return EXIT_VALIDATION
    except MigrationError as e:
        print(colored(f"❌ {e.short_message}", "red"), file=sys.stderr)
        return EXIT_MIGRATION_FAILED
    except OSError as e:
        print(colored(f"❌ {e}", "red"), file=sys.stderr)
        return EXIT_USAGE

