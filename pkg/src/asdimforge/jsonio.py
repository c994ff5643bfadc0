"""Deterministic JSON emission shared by the CLI and the certificate engine.

Values that JSON cannot carry natively are stringified the same way
everywhere: exact rationals as "p/q", infinities as "inf"/"-inf".
Files are written to a temporary sibling and renamed into place so a
crash never leaves a half-written artifact.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError


def to_jsonable(value):
    """Recursively rewrite a value into plain JSON-safe types."""
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if value == int(value):
            return int(value)
        return value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [to_jsonable(v) for v in sorted(value)]
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if hasattr(value, "to_json_dict"):
        return to_jsonable(value.to_json_dict())
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value) -> str:
    return json.dumps(to_jsonable(value), sort_keys=True, indent=2) + "\n"


def write_json(path: str | Path, value) -> Path:
    """Serialize atomically: temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = dumps(value)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path


def read_json(path: str | Path):
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"missing file {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"corrupt JSON in {path}: {exc}") from exc
