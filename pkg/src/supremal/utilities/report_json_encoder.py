"""JSON encoding for supremal reports."""

import json
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel


class ReportJSONEncoder(json.JSONEncoder):
    """JSON encoder for pydantic models, numpy scalars/arrays and enums."""

    def default(self, obj):
        if isinstance(obj, BaseModel):
            return obj.model_dump(mode="json", by_alias=True)
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        elif isinstance(obj, np.generic):
            return obj.item()
        elif isinstance(obj, (Enum, Path)):
            return str(obj.value if isinstance(obj, Enum) else obj)

        return super().default(obj)


def dumps_report(payload: Any) -> str:
    """Deterministic text for a report: fixed key order, no timestamps."""
    return json.dumps(payload, cls=ReportJSONEncoder, indent=2, allow_nan=True) + "\n"


def write_report(payload: Any, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(payload), encoding="utf-8")
    return path
