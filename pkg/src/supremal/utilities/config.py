from typing import Any, Dict


def apply_overrides(
    values: Dict[str, Any], overrides: Dict[str, Any]
) -> Dict[str, Any]:
    """
    Merge command-line overrides into config values.

    Overrides use dotted keys (``"grid.h"``); ``None`` means "not given" and is
    skipped. Nested dictionaries are created on demand.

    Args:
        values (Dict[str, Any]): Config values, typically loaded from a file.
        overrides (Dict[str, Any]): Dotted keys mapped to override values.

    Returns:
        Dict[str, Any]: A new dictionary with the overrides applied.
    """
    merged: Dict[str, Any] = _deep_copy(values)
    for dotted, value in overrides.items():
        if value is None:
            continue
        keys = dotted.split(".")
        target = merged
        for key in keys[:-1]:
            if not isinstance(target.get(key), dict):
                target[key] = {}
            target = target[key]
        target[keys[-1]] = value
    return merged


def _deep_copy(values: Dict[str, Any]) -> Dict[str, Any]:
    return {
        key: _deep_copy(value) if isinstance(value, dict) else value
        for key, value in values.items()
    }
