# Copyright Sierra

import json
import logging
import os
import traceback
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

from pydantic import ValidationError

from ccnx_migrate.exception import ConfigError, MigrationError, Result, ScenarioError
from ccnx_migrate.harness.simulation import Simulation
from ccnx_migrate.types import MetricsReport, Scenario, VmConfig

logger = logging.getLogger(__name__)


def run_scenario(scenario: Scenario, log_file: Optional[str] = None) -> MetricsReport:
    logger.info("running scenario %s (seed %d)", scenario.name, scenario.seed)
    report = Simulation(scenario, log_file=log_file).run()
    logger.info("scenario %s finished: %s", scenario.name, report.verdict)
    return report


def run_scenarios(
    scenarios: List[Scenario],
    max_concurrency: int = 1,
    log_file: Optional[str] = None,
) -> List[Result[MetricsReport]]:
    """Runs independent scenarios on a thread pool; one failure does not stop the others."""

    def _run(scenario: Scenario) -> Result[MetricsReport]:
        try:
            return Result(value=run_scenario(scenario, log_file=log_file), error=None)
        except MigrationError as e:
            return Result(value=None, error=e)
        except Exception as e:
            return Result(
                value=None,
                error=MigrationError(str(e), report={"traceback": traceback.format_exc()}),
            )

    with ThreadPoolExecutor(max_workers=max_concurrency) as executor:
        return list(executor.map(_run, scenarios))


def report_json(report: MetricsReport) -> str:
    return json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def write_report(report: MetricsReport, path: str) -> None:
    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)
    with open(path, "w") as f:
        f.write(report_json(report))


def load_scenario(path: str) -> Scenario:
    with open(path, "r") as f:
        text = f.read()
    try:
        return Scenario.model_validate_json(text)
    except ValidationError as e:
        raise ScenarioError(f"invalid scenario {path}", report={"errors": e.errors(include_url=False)})


def load_vm_config(path: str) -> VmConfig:
    with open(path, "r") as f:
        text = f.read()
    try:
        return VmConfig.model_validate_json(text)
    except ValidationError as e:
        raise ConfigError(f"invalid vm config {path}", report={"errors": e.errors(include_url=False)})
