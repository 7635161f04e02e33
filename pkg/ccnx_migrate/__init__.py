# Copyright Sierra

from ccnx_migrate.harness.equivalence import verify_equivalence as verify_equivalence
from ccnx_migrate.run import run_scenario as run_scenario
from ccnx_migrate.run import run_scenarios as run_scenarios
from ccnx_migrate.types import MetricsReport as MetricsReport
from ccnx_migrate.types import Scenario as Scenario
