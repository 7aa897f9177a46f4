"""Text/CSV schedule boards: one row per aircraft, one column per period."""

from __future__ import annotations

import csv
import io

from .core import CHECK_BODY, CHECK_START, FREE, Instance, Solution

__all__ = ["render_gantt", "gantt_csv"]


def _cell_text(instance: Instance, cell: str) -> str:
    if cell in (CHECK_START, CHECK_BODY):
        return "M"
    if cell == FREE:
        return ""
    hours = instance.mission_by_id(cell).hours
    return str(int(hours)) if float(hours).is_integer() else str(hours)


def render_gantt(instance: Instance, solution: Solution) -> str:
    """Period-by-aircraft board: checks as "M", missions as their hours."""
    horizon = instance.horizon
    cells = [
        [_cell_text(instance, solution.grid[i][t]) for t in range(1, horizon + 1)]
        for i in range(len(instance.fleet))
    ]
    label_w = max((len(a.id) for a in instance.fleet), default=4)
    col_w = max(
        [len(str(horizon))] + [len(c) for row in cells for c in row]
    )
    lines = []
    header = " " * label_w + " |"
    for t in range(1, horizon + 1):
        header += f" {t:>{col_w}}"
    lines.append(header)
    lines.append("-" * len(header))
    for i, aircraft in enumerate(instance.fleet):
        line = f"{aircraft.id:>{label_w}} |"
        for c in cells[i]:
            line += f" {c:>{col_w}}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def gantt_csv(instance: Instance, solution: Solution) -> str:
    """Machine-readable twin of the board, one row per aircraft-period."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["aircraft", "period", "cell"])
    for i, aircraft in enumerate(instance.fleet):
        for t in range(1, instance.horizon + 1):
            writer.writerow([aircraft.id, t, _cell_text(instance, solution.grid[i][t])])
    return buf.getvalue()
