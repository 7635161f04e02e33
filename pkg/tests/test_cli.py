import json
import os

import pytest
from pydantic import ValidationError

from ccnx_migrate.cli import main
from ccnx_migrate.harness.simulation import Simulation
from ccnx_migrate.manifest.build import build_manifest, checkpoint_base, format_manifest
from ccnx_migrate.store.content_store import ContentStore
from ccnx_migrate.types import DedupOptions, EquivalenceResult, MetricsReport, Phase, WorkloadConfig
from tests.conftest import make_scenario, make_vm, scenario_path


@pytest.fixture
def tiny_scenario_file(tmp_path):
    vm = make_vm(ram_bytes=256 * 1024, disk_bytes=1024 * 1024, cpu_n=1)
    path = tmp_path / "tiny.json"
    path.write_text(make_scenario(seed=3, vm=vm).model_dump_json())
    return str(path)


def test_count_large_config(capsys):
    assert main(["count", "--config", scenario_path("large-vm.json")]) == 0
    out = capsys.readouterr().out
    assert "disk=976,567 ram=524,288" in out
    assert "disk hda=976,567" in out


def test_migrate_writes_identical_reports(tiny_scenario_file, tmp_path):
    first = str(tmp_path / "first.json")
    second = str(tmp_path / "second.json")
    assert main(["migrate", "--scenario", tiny_scenario_file, "--out", first]) == 0
    assert main(["migrate", "--scenario", tiny_scenario_file, "--out", second]) == 0
    with open(first, "rb") as f, open(second, "rb") as g:
        assert f.read() == g.read()
    with open(first) as f:
        assert MetricsReport.model_validate_json(f.read()).verdict == "PASS"


def test_migrate_overrides_and_directories(tiny_scenario_file, tmp_path):
    out = str(tmp_path / "reports")
    code = main(
        ["migrate", "--scenario", tiny_scenario_file, tiny_scenario_file, "--seed", "5", "--naming", "weak", "--out", out]
    )
    assert code == 0
    with open(os.path.join(out, "test-3-seed5.json")) as f:
        report = json.load(f)
    assert report["seed"] == 5
    assert report["naming_mode"] == "weak"


def test_migrate_trace(tiny_scenario_file, tmp_path):
    trace = str(tmp_path / "trace.jsonl")
    assert main(["migrate", "--scenario", tiny_scenario_file, "--out", str(tmp_path / "r.json"), "--trace", trace]) == 0
    with open(trace) as f:
        assert any(json.loads(line)["method_name"] == "stop_and_copy" for line in f)


def test_equivalence_failure_exit_code(tiny_scenario_file, tmp_path, monkeypatch):
    monkeypatch.setattr(
        "ccnx_migrate.harness.simulation.verify_equivalence",
        lambda source, destination: EquivalenceResult(verdict="FAIL"),
    )
    assert main(["migrate", "--scenario", tiny_scenario_file, "--out", str(tmp_path / "r.json")]) == 4


def test_report_command(tiny_scenario_file, tmp_path, capsys):
    path = str(tmp_path / "r.json")
    main(["migrate", "--scenario", tiny_scenario_file, "--out", path])
    capsys.readouterr()
    assert main(["report", "--report", path]) == 0
    assert "PASS" in capsys.readouterr().out


def test_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["migrate"])
    assert e.value.code == 1


def test_invalid_scenario(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"vm": {"vm_name": "/parc/vm3", "ram_bytes": 4096}, "colour": "blue"}))
    assert main(["migrate", "--scenario", str(path), "--out", str(tmp_path / "r.json")]) == 2
    assert "colour" in capsys.readouterr().err


def test_chunk_limit_must_fit_a_packet(tmp_path):
    with pytest.raises(ValidationError, match="packet length"):
        make_scenario(chunk_limit=65_500)
    assert make_scenario(chunk_limit=65_000).chunk_limit == 65_000
    path = tmp_path / "big-chunks.json"
    path.write_text(json.dumps({"vm": {"vm_name": "/parc/vm3", "ram_bytes": 4096}, "chunk_limit": 65_500}))
    assert main(["migrate", "--scenario", str(path), "--out", str(tmp_path / "r.json")]) == 2


def test_missing_file(tmp_path):
    assert main(["count", "--config", str(tmp_path / "absent.json")]) == 1


def test_compare_naming(capsys):
    assert main(["compare-naming", "--config", scenario_path("large-vm.json")]) == 0
    out = capsys.readouterr().out
    for scheme in ("hash", "metadata", "link"):
        assert scheme in out


def test_gen(tmp_path):
    config = tmp_path / "vm.json"
    config.write_text(make_vm(ram_bytes=64 * 1024, disk_bytes=256 * 1024, cpu_n=1).model_dump_json())
    out = str(tmp_path / "image")
    assert main(["gen", "--config", str(config), "--out", out]) == 0
    with open(os.path.join(out, "names.txt")) as f:
        names = f.read().splitlines()
    with open(os.path.join(out, "image.index.json")) as f:
        index = json.load(f)
    assert [entry["name"] for entry in index] == names
    assert os.path.getsize(os.path.join(out, "image.bin")) == index[-1]["offset"] + index[-1]["size"]


def test_manifest_command(tiny_scenario_file, capsys):
    assert main(["manifest", "--scenario", tiny_scenario_file, "--chunk-limit", "512"]) == 0
    assert "chunk(s)" in capsys.readouterr().out


def test_manifest_command_matches_the_first_push(tmp_path, capsys):
    vm = make_vm(ram_bytes=256 * 1024, disk_bytes=1024 * 1024, cpu_n=1)
    scenario = make_scenario(
        seed=11,
        vm=vm,
        workload=WorkloadConfig(deferred_fraction=0.5),
        dedup=DedupOptions(shared_pages=4),
    )
    path = tmp_path / "deferred.json"
    path.write_text(scenario.model_dump_json())
    assert main(["manifest", "--scenario", str(path), "--chunk-limit", "512"]) == 0
    out = capsys.readouterr().out

    run = Simulation(scenario)._prepare(scenario.vm, scenario.seed, primary=True)
    built = build_manifest(
        run.image.snapshot(0),
        run.source.classifier.push_initial(),
        Phase.PUSH,
        0,
        ContentStore(),
        checkpoint_base(vm.name, 0),
        chunk_limit=512,
    )
    assert out.startswith(format_manifest(built.manifest) + "\n")
