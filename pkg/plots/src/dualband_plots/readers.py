"""Schema-checked loading of the experiment CSVs.

The files are plain comma-separated text with `# key = value` comment lines
on top (run tag, surface parameters).  Readers hand back floats and never
aggregate anything: whatever the figure shows must be a row of the file.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path


class SchemaMismatch(Exception):
    """Input file does not look like the experiment CSV it should be."""


# header columns per figure kind, in file order
SCHEMAS = {
    "threshold_sweep": ("m", "avg_delay", "ci"),
    "blockage_surface": ("lambda", "p_na", "W_hat", "censored_flag"),
    "maxweight_compare": (
        "lambda", "m", "delay_threshold", "ci_delay_threshold",
        "delay_maxweight", "ci_delay_maxweight", "tput_threshold",
        "ci_tput_threshold", "tput_maxweight", "ci_tput_maxweight",
    ),
}


@dataclass
class Table:
    path: Path
    comments: dict[str, str]  # parsed "# key = value" lines, last wins
    header: tuple[str, ...]
    rows: list[list[float]]  # nan allowed (censored surface points)

    def column(self, name: str) -> list[float]:
        return [r[self.header.index(name)] for r in self.rows]


def _parse_comments(lines: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for ln in lines:
        body = ln.lstrip("#").strip()
        if "=" in body:
            key, _, val = body.partition("=")
            out[key.strip()] = val.strip()
    return out


def read_table(path: str | Path, kind: str) -> Table:
    """Load one CSV and reject it unless the header matches the kind exactly.

    Naming the offending column beats a generic parse error: these files are
    produced by a separate tool and the first failure mode is handing the
    wrong file to the wrong figure.
    """
    want = SCHEMAS[kind]
    p = Path(path)
    if not p.exists():
        raise SchemaMismatch(f"{p}: file not found")
    comment_lines: list[str] = []
    data_lines: list[str] = []
    for ln in p.read_text(encoding="utf-8").splitlines():
        if ln.startswith("#"):
            comment_lines.append(ln)
        elif ln.strip():
            data_lines.append(ln)
    if not data_lines:
        raise SchemaMismatch(f"{p}: no header line")

    reader = csv.reader(data_lines)
    header = tuple(c.strip() for c in next(reader))
    for col in want:
        if col not in header:
            raise SchemaMismatch(f"{p}: missing column '{col}' (expected {want})")
    for col in header:
        if col not in want:
            raise SchemaMismatch(f"{p}: unexpected column '{col}' (expected {want})")

    rows: list[list[float]] = []
    for i, rec in enumerate(reader, start=2):
        if len(rec) != len(header):
            raise SchemaMismatch(f"{p}: row {i} has {len(rec)} fields, header has {len(header)}")
        try:
            rows.append([float(v) for v in rec])
        except ValueError as exc:
            raise SchemaMismatch(f"{p}: row {i}: {exc}") from None
    if not rows:
        raise SchemaMismatch(f"{p}: no data rows")
    return Table(p, _parse_comments(comment_lines), header, rows)


def surface_plane_rates(table: Table) -> tuple[float, float]:
    """(mu_mm, mu_sub6) for the stability border plane, from the comments the
    experiment tool writes into fig5.csv."""
    try:
        return float(table.comments["mu_mm"]), float(table.comments["mu_sub6"])
    except KeyError as exc:
        raise SchemaMismatch(
            f"{table.path}: missing comment '{exc.args[0]} = ...' needed for the border plane"
        ) from None


def sweep_minimum(table: Table) -> dict[str, float]:
    """Argmin row of a threshold-sweep table, as a name -> value mapping.

    nan delays never win the argmin; a sweep of only nans is a schema-level
    problem (nothing to mark).
    """
    finite = [r for r in table.rows if not math.isnan(r[table.header.index("avg_delay")])]
    if not finite:
        raise SchemaMismatch(f"{table.path}: every avg_delay is nan")
    d = table.header.index("avg_delay")
    row = min(finite, key=lambda r: r[d])
    return dict(zip(table.header, row))
