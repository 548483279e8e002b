"""Report assembly and rendering.

Every command produces one report object.  The machine rendering is canonical
JSON (sorted keys, compact separators, rationals as decimal-free strings), so
identical invocations give byte-identical output; the human rendering is
generated from the same object.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import List

from .rationals import format_rational


def dumps_machine(report: dict) -> str:
    return json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n"


def _human_lines(value, indent: int = 0) -> List[str]:
    pad = "  " * indent
    lines: List[str] = []
    if isinstance(value, dict):
        for key in sorted(value):
            sub = value[key]
            if isinstance(sub, (dict, list)) and sub:
                lines.append(f"{pad}{key}:")
                lines.extend(_human_lines(sub, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(sub)}")
    elif isinstance(value, list):
        for sub in value:
            if isinstance(sub, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_human_lines(sub, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(sub)}")
    else:
        lines.append(f"{pad}{_scalar(value)}")
    return lines


def _scalar(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, list):
        return "[]"
    if isinstance(value, dict):
        return "{}"
    return str(value)


def dumps_human(report: dict) -> str:
    header = report.get("command", "report")
    lines = [f"== {header} =="]
    lines.extend(_human_lines({k: v for k, v in report.items() if k != "command"}))
    return "\n".join(lines) + "\n"


def rat(x: Fraction) -> str:
    return format_rational(x)


def ratvec(v) -> List[str]:
    return [format_rational(x) for x in v]
