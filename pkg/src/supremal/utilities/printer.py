"""Utility for colored console output."""

from typing import Dict, Optional

import click

_STYLES: Dict[str, Dict[str, object]] = {
    "red": {"fg": "red"},
    "green": {"fg": "green"},
    "yellow": {"fg": "yellow"},
    "cyan": {"fg": "cyan"},
    "magenta": {"fg": "magenta"},
    "bold_red": {"fg": "red", "bold": True},
    "bold_green": {"fg": "green", "bold": True},
    "bold_yellow": {"fg": "yellow", "bold": True},
    "bold_blue": {"fg": "blue", "bold": True},
    "bold_cyan": {"fg": "cyan", "bold": True},
    "bold_magenta": {"fg": "magenta", "bold": True},
}


class Printer:
    """Handles colored console output formatting.

    Progress goes to standard error so report data on standard output stays clean.
    """

    def print(self, content: str, color: Optional[str] = None) -> None:
        style = _STYLES.get(color or "")
        if style is None:
            click.echo(content, err=True)
        else:
            click.secho(content, err=True, **style)  # type: ignore[arg-type]
