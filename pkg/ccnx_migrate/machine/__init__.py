# Copyright Sierra

from ccnx_migrate.machine.build import ObjectCount as ObjectCount
from ccnx_migrate.machine.build import build_vm as build_vm
from ccnx_migrate.machine.build import enumerate_names as enumerate_names
from ccnx_migrate.machine.build import object_count as object_count
from ccnx_migrate.machine.image import Locator as Locator
from ccnx_migrate.machine.image import Snapshot as Snapshot
from ccnx_migrate.machine.image import VmImage as VmImage
from ccnx_migrate.machine.image import iter_locators as iter_locators
from ccnx_migrate.machine.image import locator_from_path as locator_from_path
from ccnx_migrate.machine.image import resource_path as resource_path
from ccnx_migrate.machine.workload import ResourceClassifier as ResourceClassifier
from ccnx_migrate.machine.workload import WorkloadModel as WorkloadModel
from ccnx_migrate.machine.workload import classify as classify
from ccnx_migrate.machine.workload import make_workload as make_workload
from ccnx_migrate.machine.workload import workload_step as workload_step
