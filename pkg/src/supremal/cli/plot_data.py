"""CSV tables for external plotting. Every file starts with a header row."""

from pathlib import Path
from typing import TYPE_CHECKING, Any, List

from supremal.cli.constants import PLOT_FILES
from supremal.mollify import ConvergenceTable
from supremal.verify import SuiteReport

if TYPE_CHECKING:
    from supremal.cli.run import ResidualStudy


def _header(key: str) -> str:
    return ",".join(PLOT_FILES[key]["columns"])


def margins_csv(report: SuiteReport) -> str:
    lines = [_header("margins")]
    for outcome in report.outcomes:
        lines.append(f"{outcome.trial},{outcome.margin!r},{report.tol!r}")
    return "\n".join(lines) + "\n"


def mollify_csv(table: ConvergenceTable) -> str:
    lines = [_header("mollify")]
    for row in table.rows:
        lines.append(f"{row.ring},{row.epsilon!r},{row.measured!r},{row.bound!r}")
    return "\n".join(lines) + "\n"


def residual_csv(study: "ResidualStudy") -> str:
    lines = [_header("residual")]
    for row in study.rows:
        lines.append(f"{row.h!r},{row.sup!r}")
    order = "nan" if study.fitted_order is None else repr(study.fitted_order)
    lines.append(f"# fitted_order,{order}")
    return "\n".join(lines) + "\n"


def _write(out: Path, key: str, text: str) -> Path:
    path = out / PLOT_FILES[key]["file"]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def emit_plot_data(check: str, report: Any, out: Path) -> List[Path]:
    """Write the plot tables a check's report supports; other checks write nothing."""
    written: List[Path] = []
    if check == "minimality" and isinstance(report, SuiteReport):
        written.append(_write(out, "margins", margins_csv(report)))
    elif check == "mollify-demo":
        written.append(_write(out, "mollify", mollify_csv(report.table)))
    elif check == "residual":
        written.append(_write(out, "residual", residual_csv(report)))
        if report.heat_map is not None:
            written.append(_write(out, "residual-map", report.heat_map.to_csv()))
    return written
