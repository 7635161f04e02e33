# Copyright Sierra

from ccnx_migrate.agents.base import MigrationAgent as MigrationAgent
from ccnx_migrate.agents.base import MigrationContext as MigrationContext
from ccnx_migrate.agents.destination import DestinationAgent as DestinationAgent
from ccnx_migrate.agents.session import MigrationSession as MigrationSession
from ccnx_migrate.agents.session import should_stop_push as should_stop_push
from ccnx_migrate.agents.source import SourceAgent as SourceAgent
