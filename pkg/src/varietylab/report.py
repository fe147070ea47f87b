"""Canonical JSON rendering for reports.

Keys are sorted, sets become sorted lists, floats carry 12 significant
digits, and output ends with a single newline, so equal inputs give equal
bytes.
"""

from __future__ import annotations

import dataclasses
import json
from enum import Enum
from fractions import Fraction
from typing import Any, Mapping


def _number(x: float) -> float:
    y = float(f"{x:.12g}")
    return 0.0 if y == 0 else y


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, Enum):
        return to_jsonable(obj.value)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, (float, Fraction)):
        return _number(float(obj))
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot render {type(obj).__name__} in a report")


def canonical_json(obj: Any, pretty: bool = False) -> str:
    data = to_jsonable(obj)
    if pretty:
        return json.dumps(data, sort_keys=True, ensure_ascii=False, indent=2) + "\n"
    return json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n"
