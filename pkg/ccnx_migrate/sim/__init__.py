from ccnx_migrate.sim.network import Delivery as Delivery
from ccnx_migrate.sim.network import LossModel as LossModel
from ccnx_migrate.sim.network import Network as Network
from ccnx_migrate.sim.network import Node as Node
from ccnx_migrate.sim.network import RandomLoss as RandomLoss
from ccnx_migrate.sim.network import ScriptedLoss as ScriptedLoss
