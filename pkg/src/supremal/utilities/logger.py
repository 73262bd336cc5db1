from datetime import datetime
from typing import Optional

from pydantic import BaseModel, Field, PrivateAttr

from supremal.utilities.printer import Printer


class Logger(BaseModel):
    """Progress lines on standard error, printed only when ``verbose`` is set."""

    verbose: bool = Field(default=False)
    scope: Optional[str] = Field(
        default=None, description="Check or component named in every line"
    )
    _printer: Printer = PrivateAttr(default_factory=Printer)

    def log(self, level: str, message: str, color: str = "bold_yellow") -> None:
        if not self.verbose:
            return
        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        where = f"[{self.scope}]" if self.scope else ""
        self._printer.print(f"[{timestamp}][{level.upper()}]{where}: {message}", color=color)

    def progress(self, done: int, total: int, message: str) -> None:
        self.log("info", f"{done}/{total} {message}", color="cyan")
