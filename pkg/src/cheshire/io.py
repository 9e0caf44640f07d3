"""Parameter documents, JSON reports and CSV estimator tables."""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from pathlib import Path
from typing import Any, Optional, TextIO, Union

from .model import NAMED_PARAMS, ModelParams, ParameterError


def format_number(value: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(value, ".17g")


def to_json(obj: Any, indent: int = 2) -> str:
    """Serialise ``obj`` as JSON with every float written to 17 significant digits.

    Non-finite floats become ``null``.
    """
    out = io.StringIO()
    _emit(obj, out, indent, 0)
    out.write("\n")
    return out.getvalue()


def _emit(obj, out: TextIO, indent: int, level: int):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, str)):
        out.write(json.dumps(obj))
    elif isinstance(obj, enum.Enum):
        out.write(json.dumps(obj.value))
    elif isinstance(obj, int):
        out.write(str(obj))
    elif isinstance(obj, float):
        out.write(format_number(obj) if math.isfinite(obj) else "null")
    elif isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{\n")
        for i, (key, val) in enumerate(obj.items()):
            out.write(f"{pad}{json.dumps(str(key))}: ")
            _emit(val, out, indent, level + 1)
            out.write(",\n" if i < len(obj) - 1 else "\n")
        out.write(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.write("[]")
            return
        out.write("[\n")
        for i, val in enumerate(obj):
            out.write(pad)
            _emit(val, out, indent, level + 1)
            out.write(",\n" if i < len(obj) - 1 else "\n")
        out.write(end + "]")
    elif hasattr(obj, "item"):  # numpy scalars
        _emit(obj.item(), out, indent, level)
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def load_params(source: Union[str, Path]) -> ModelParams:
    """Read a JSON parameter document, or return a built-in set by name ("paper", "desk")."""
    path = Path(source)
    if not path.exists() and str(source) in NAMED_PARAMS:
        return NAMED_PARAMS[str(source)]
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParameterError(f"cannot read parameter file {source}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"invalid JSON in {source}: {exc}") from exc
    return ModelParams.from_dict(doc)


def estimates_csv(rows) -> str:
    """CSV table with columns estimator,value,std_error,count."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["estimator", "value", "std_error", "count"])
    for name, value, se, count in rows:
        writer.writerow([name,
                         "" if value is None else format_number(value),
                         "" if se is None else format_number(se),
                         count])
    return buf.getvalue()


def write_output(text: str, out: Optional[str], stream: TextIO):
    if out:
        Path(out).write_text(text)
    else:
        stream.write(text)
