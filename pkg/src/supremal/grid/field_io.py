"""CSV import/export of grid fields.

Plain CSV has a header row ``x1,...,xn,u1,...,uN`` and one row per grid point
in C order. The self-describing variant prefixes a ``# {json}`` line carrying
the grid definition so the domain is restored exactly.
"""

import io
import json
from pathlib import Path
from typing import Optional, Union

import numpy as np

from supremal.grid.domain import GridDomain
from supremal.grid.field import GridField
from supremal.utilities.errors import InvalidInputError

FMT = "%.17g"
HEADER_PREFIX = "# "


def _header(n: int, N: int) -> str:
    return ",".join([f"x{i + 1}" for i in range(n)] + [f"u{a + 1}" for a in range(N)])


def field_to_csv(field: GridField, with_header_json: bool = False) -> str:
    domain = field.domain
    table = np.hstack(
        [domain.points().reshape(-1, domain.dim), field.values.reshape(-1, field.N)]
    )
    buffer = io.StringIO()
    if with_header_json:
        meta = {
            "format": "supremal-grid-field",
            "name": field.name,
            "lower": domain.lower,
            "upper": domain.upper,
            "h": domain.h,
            "shape": list(domain.shape),
            "N": field.N,
        }
        buffer.write(HEADER_PREFIX + json.dumps(meta) + "\n")
    buffer.write(_header(domain.dim, field.N) + "\n")
    np.savetxt(buffer, table, fmt=FMT, delimiter=",")
    return buffer.getvalue()


def write_field_csv(
    field: GridField, path: Union[str, Path], with_header_json: bool = False
) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(field_to_csv(field, with_header_json), encoding="utf-8")
    return target


def field_from_csv(text: str, name: Optional[str] = None) -> GridField:
    lines = text.splitlines()
    meta = None
    if lines and lines[0].startswith(HEADER_PREFIX.strip()):
        meta = json.loads(lines[0][1:].strip())
        lines = lines[1:]
    if not lines:
        raise InvalidInputError("CSV field has no header row")
    columns = [c.strip() for c in lines[0].split(",")]
    n = sum(1 for c in columns if c.startswith("x"))
    N = len(columns) - n
    if n == 0 or N == 0:
        raise InvalidInputError(f"CSV header {columns} needs x and u columns")
    table = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", ndmin=2)

    if meta is not None:
        domain = GridDomain(lower=meta["lower"], upper=meta["upper"], h=meta["h"])
        name = name or meta.get("name")
    else:
        axes = [np.unique(table[:, i]) for i in range(n)]
        lower = [float(a[0]) for a in axes]
        upper = [float(a[-1]) for a in axes]
        h = float((axes[0][-1] - axes[0][0]) / (axes[0].size - 1))
        domain = GridDomain(lower=lower, upper=upper, h=h)
    if table.shape[0] != domain.size:
        raise InvalidInputError(
            f"CSV has {table.shape[0]} rows, grid needs {domain.size}"
        )
    values = table[:, n:].reshape(*domain.shape, N)
    return GridField(domain=domain, values=values, name=name or "csv-field")


def read_field_csv(path: Union[str, Path]) -> GridField:
    source = Path(path)
    return field_from_csv(source.read_text(encoding="utf-8"), name=source.stem)
