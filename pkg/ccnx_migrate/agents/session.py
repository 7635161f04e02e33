# Copyright Sierra

from pydantic import BaseModel

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.exception import ProtocolError
from ccnx_migrate.types import Phase, RoundRecord, StopPolicy

_NEXT_PHASES = {
    Phase.PUSH: {Phase.PUSH, Phase.STOP_AND_COPY},
    Phase.STOP_AND_COPY: {Phase.PULL},
    Phase.PULL: {Phase.DONE},
    Phase.DONE: set(),
}


class MigrationSession(BaseModel):
    """Per-agent record of one migration: version counter, phase and push history."""

    vm_name: Name
    source_node: str
    destination_node: str
    current_version: int = 0
    phase: Phase = Phase.PUSH
    push_history: list[RoundRecord] = []
    stop_policy: StopPolicy = StopPolicy()
    started: bool = False

    def enter(self, version: int, phase: Phase) -> None:
        """Record checkpoint ``version`` of ``phase``; versions grow by one, phases follow push+, stop-and-copy, pull."""
        if self.started:
            if version != self.current_version + 1:
                raise ProtocolError(f"checkpoint ver={version} after ver={self.current_version}")
            if phase not in _NEXT_PHASES[self.phase]:
                raise ProtocolError(f"{phase.value} checkpoint after {self.phase.value}")
        elif version != 0 or phase != Phase.PUSH:
            raise ProtocolError(f"migration must start with a push checkpoint ver=0, got {phase.value} ver={version}")
        self.started = True
        self.current_version = version
        self.phase = phase

    def finish(self) -> None:
        if Phase.DONE not in _NEXT_PHASES[self.phase]:
            raise ProtocolError(f"cannot finish from {self.phase.value}")
        self.phase = Phase.DONE


def should_stop_push(history: list[RoundRecord], policy: StopPolicy) -> bool:
    """Stop pre-copying once the dirty bytes left after a round stop shrinking enough."""
    if not history:
        return False
    last = history[-1].dirty_bytes
    if last == 0 or len(history) >= policy.max_rounds:
        return True
    return len(history) >= 2 and last > policy.alpha * history[-2].dirty_bytes
