"""Canonical report serialization.

Keys are sorted, floats are written with 17 significant digits and complex
numbers as ``re+imi`` strings, so identical runs give identical bytes.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, is_dataclass
from typing import Any

import numpy as np

from .errors import ConfigError

SCHEMA_VERSION = 1

_COMPLEX = re.compile(
    r"^\s*(?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?)?"
    r"(?:(?P<im>[+-]?(?:\d+\.?\d*|\.\d+)?(?:e[+-]?\d+)?)[ij])?\s*$", re.IGNORECASE)
_IMAGINARY = re.compile(r"^(?P<im>[+-]?(?:\d+\.?\d*|\.\d+)?(?:e[+-]?\d+)?)[ij]$", re.IGNORECASE)


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def format_complex(z: complex) -> str:
    z = complex(z)
    im = format_float(z.imag)
    if not im.startswith("-"):
        im = "+" + im
    return f"{format_float(z.real)}{im}i"


def parse_complex(text: str) -> complex:
    """Parse ``2+1i``, ``0.3+1.1j``, ``-i`` or a plain real number."""
    s = str(text).strip().replace(" ", "")
    pure = _IMAGINARY.match(s)
    if pure is not None:
        im_part = pure.group("im")
        return complex(0.0, {"": 1.0, "+": 1.0, "-": -1.0}.get(im_part) or float(im_part))
    match = _COMPLEX.match(s)
    if not s or match is None:
        raise ConfigError(f"cannot parse complex number {text!r}")
    re_part, im_part = match.group("re"), match.group("im")
    if im_part is None and not s[-1:].lower() in "ij":
        return complex(float(re_part), 0.0)
    if im_part in ("", "+", None):
        im = 1.0
    elif im_part == "-":
        im = -1.0
    else:
        im = float(im_part)
    return complex(float(re_part) if re_part else 0.0, im)


def to_plain(obj: Any) -> Any:
    """Reduce numpy arrays, dataclasses and complex numbers to JSON-ready values."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        text = format_float(obj)
        return text if math.isfinite(obj) else json.dumps(text)
    if isinstance(obj, complex):
        return json.dumps(format_complex(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = [_encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(pad + i for i in items) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(k)}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(pad + i for i in items) + "\n" + end + "}"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any, indent: int = 1) -> str:
    return _encode(to_plain(obj), indent, 0) + "\n"
