# Copyright Sierra

from ccnx_migrate.routing.fib import LOCAL_FACE as LOCAL_FACE
from ccnx_migrate.routing.fib import FibTable as FibTable
from ccnx_migrate.routing.handover import HandoverModel as HandoverModel
from ccnx_migrate.routing.handover import get_handover as get_handover
from ccnx_migrate.routing.plane import RoutingPlane as RoutingPlane
from ccnx_migrate.routing.plane import SdnController as SdnController
