"""Deterministic report serialization.

Reports are built from plain dicts/lists and written with every float
rendered at 17 significant digits, so identical runs produce byte-identical
files and values round-trip exactly through text.
"""

import math

from .errors import ValidationError


def fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValidationError(f"non-finite value {x} in report")
    text = format(x, ".17g")
    # Keep a numeric-looking token for integral floats.
    if "e" not in text and "E" not in text and "." not in text:
        text += ".0"
    return text


def _escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return "".join(out)


def to_json(obj, indent=0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return f'"{_escape(obj)}"'
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}"{_escape(str(k))}": {to_json(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{to_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    # numpy scalars and the like
    if hasattr(obj, "item"):
        return to_json(obj.item(), indent)
    raise ValidationError(f"cannot serialize {type(obj).__name__} in report")


def write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_json(obj) + "\n")


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return fmt_float(value)
    if hasattr(value, "item"):
        return _csv_cell(value.item())
    text = str(value)
    if any(ch in text for ch in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def write_csv(header, rows, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(v) for v in row) + "\n")
