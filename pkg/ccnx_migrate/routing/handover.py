# Copyright Sierra

import abc

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.routing.plane import RoutingPlane, SdnController
from ccnx_migrate.types import HandoverVariant


class HandoverModel(abc.ABC):
    """Who routes the generic VM name, and how it moves from source to destination."""

    variant: HandoverVariant

    def __init__(self, plane: RoutingPlane) -> None:
        self.plane = plane

    def checkpoint_prefix(self, vm_name: Name, host_prefix: Name, handed_over: bool) -> Name:
        # generic name while it routes to the source, location name once it no longer does
        if handed_over:
            return host_prefix.concat(vm_name)
        return vm_name

    @abc.abstractmethod
    def setup(self, vm_name: Name, source_node: str) -> None:
        raise NotImplementedError

    @abc.abstractmethod
    def hand_over(self, vm_name: Name, source_node: str, destination_node: str) -> None:
        raise NotImplementedError

    @abc.abstractmethod
    def revert(self, vm_name: Name, source_node: str, destination_node: str) -> None:
        """Route the generic name back to the source after an aborted migration."""
        raise NotImplementedError


class ExternalHandover(HandoverModel):
    """An outside orchestrator resolves names; only location-dependent names are routed."""

    variant = HandoverVariant.EXTERNAL

    def checkpoint_prefix(self, vm_name: Name, host_prefix: Name, handed_over: bool) -> Name:
        return host_prefix.concat(vm_name)

    def setup(self, vm_name: Name, source_node: str) -> None:
        pass

    def hand_over(self, vm_name: Name, source_node: str, destination_node: str) -> None:
        pass

    def revert(self, vm_name: Name, source_node: str, destination_node: str) -> None:
        pass


class SoftwareDefinedHandover(HandoverModel):
    variant = HandoverVariant.SOFTWARE_DEFINED

    def __init__(self, plane: RoutingPlane) -> None:
        super().__init__(plane)
        self.controller = SdnController(plane)

    def setup(self, vm_name: Name, source_node: str) -> None:
        self.plane.install(source_node, vm_name)

    def hand_over(self, vm_name: Name, source_node: str, destination_node: str) -> None:
        self.controller.repoint(vm_name, destination_node)

    def revert(self, vm_name: Name, source_node: str, destination_node: str) -> None:
        self.controller.repoint(vm_name, source_node)


class DistributedHandover(HandoverModel):
    variant = HandoverVariant.DISTRIBUTED

    def setup(self, vm_name: Name, source_node: str) -> None:
        self.plane.install(source_node, vm_name)

    def hand_over(self, vm_name: Name, source_node: str, destination_node: str) -> None:
        # updates reaching a node at the same instant apply in this order
        self.plane.advertise(destination_node, vm_name)
        self.plane.withdraw(source_node, vm_name)

    def revert(self, vm_name: Name, source_node: str, destination_node: str) -> None:
        self.plane.advertise(source_node, vm_name)
        self.plane.withdraw(destination_node, vm_name)


def get_handover(variant: HandoverVariant, plane: RoutingPlane) -> HandoverModel:
    if variant == HandoverVariant.EXTERNAL:
        return ExternalHandover(plane)
    elif variant == HandoverVariant.SOFTWARE_DEFINED:
        return SoftwareDefinedHandover(plane)
    elif variant == HandoverVariant.DISTRIBUTED:
        return DistributedHandover(plane)
    else:
        raise ValueError(f"Unknown handover model: {variant}")
