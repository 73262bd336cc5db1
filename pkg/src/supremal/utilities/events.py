import logging
from typing import Any, Callable, Dict, List, Optional

from blinker import Signal
from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

supremal_events = Signal("supremal_events")


class CheckEvent(BaseModel):
    type: str
    check: str


class CheckStartedEvent(CheckEvent):
    type: str = "check_started"
    seed: Optional[int] = None


class CheckFinishedEvent(CheckEvent):
    type: str = "check_finished"
    passed: bool
    warnings: List[str] = Field(default_factory=list)
    report_path: Optional[str] = None


class HypothesisGateEvent(CheckEvent):
    type: str = "hypothesis_gate"
    hj_residual: float
    tau: float
    c1_proxy_ok: bool
    met: bool


class WitnessFoundEvent(CheckEvent):
    type: str = "witness_found"
    competitor: str
    gap: float


class CheckErrorEvent(CheckEvent):
    type: str = "check_error"
    error: str = Field(description="Exception class name")
    message: str


class ConfigErrorEvent(CheckEvent):
    type: str = "config_error"
    check: str = "config"
    message: str
    line: Optional[int] = None
    column: Optional[int] = None


def emit(source: Any, event: CheckEvent, raise_on_error: bool = False) -> None:
    try:
        supremal_events.send(source, event=event)
    except Exception as e:
        if raise_on_error:
            raise e
        logger.warning(f"Error emitting event: {e}")


def on(func: Callable[..., None]) -> Callable[..., None]:
    """Connect a receiver called as ``func(source, event=...)``."""
    supremal_events.connect(func, weak=False)
    return func


def event_payload(event: CheckEvent) -> Dict[str, Any]:
    return event.model_dump(mode="json")
