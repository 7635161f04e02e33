# Copyright Sierra

from ccnx_migrate.harness.equivalence import verify_equivalence as verify_equivalence
from ccnx_migrate.harness.report import render_count as render_count
from ccnx_migrate.harness.report import render_naming_overhead as render_naming_overhead
from ccnx_migrate.harness.report import render_report as render_report
from ccnx_migrate.harness.simulation import MigrationRun as MigrationRun
from ccnx_migrate.harness.simulation import Simulation as Simulation
