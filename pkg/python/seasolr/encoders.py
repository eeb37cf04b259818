"""Convert model artefacts into JSON-native structures.

Fitted models, series and experiment results are persisted as JSON documents
whose bytes must not change between identical runs. :func:`to_jsonable` turns
dataclasses, Pydantic models, numpy arrays and scalars, dates and enums into
plain ``dict``/``list``/``str``/``int``/``float``/``bool``/``None`` values, and
:func:`dumps` writes them with a fixed layout.

Non-finite floats have no JSON spelling, so they are written as ``null``;
readers treat ``null`` as "absent" (an undefined association measure, a
missing standard error).
"""

from __future__ import annotations

import dataclasses
import json
import math
from collections.abc import Mapping
from datetime import date, datetime
from enum import Enum
from pathlib import Path, PurePath
from typing import Any, Optional, Union

import numpy as np
from pydantic import BaseModel

PathLike = Union[str, Path]


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _iso_days(values: np.ndarray) -> Any:
    return np.datetime_as_string(values.astype("datetime64[D]")).tolist()


def to_jsonable(obj: Any) -> Any:
    """Recursively convert ``obj`` into JSON-native Python structures.

    Checked in order: native scalars, numpy scalars and arrays, Pydantic
    models, dataclasses (fields in declaration order), enums, dates, paths,
    mappings (keys stringified) and lists/tuples. Anything else becomes
    ``str(obj)``.

    Args:
        obj: Object to convert.

    Returns:
        Any: A JSON-native representation of ``obj``.
    """

    # bool is an int subclass and passes through here
    if obj is None or isinstance(obj, (str, bool, int)):
        return obj
    if isinstance(obj, float):
        return _finite_or_none(obj)
    if isinstance(obj, np.generic):
        if isinstance(obj, np.datetime64):
            return _iso_days(obj)
        if isinstance(obj, np.floating):
            return _finite_or_none(float(obj))
        return obj.item()
    if isinstance(obj, np.ndarray):
        if obj.dtype.kind == "M":
            return _iso_days(obj)
        return to_jsonable(obj.tolist())
    if isinstance(obj, BaseModel):
        return to_jsonable(obj.model_dump(mode="json"))
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Enum):
        return to_jsonable(obj.value)
    if isinstance(obj, (datetime, date)):
        return obj.isoformat()
    if isinstance(obj, PurePath):
        return str(obj)
    if isinstance(obj, Mapping):
        return {str(to_jsonable(key)): to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(item) for item in obj]
    return str(obj)


def dumps(obj: Any) -> str:
    """Serialize ``obj`` to the canonical JSON text used for every artefact."""

    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n"


def write_json(obj: Any, path: PathLike) -> Path:
    """Write ``obj`` as canonical JSON, creating parent directories.

    Returns:
        Path: The written path.
    """

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(dumps(obj), encoding="utf-8")
    return target


def read_json(path: PathLike) -> Any:
    """Read a JSON document written by :func:`write_json`."""

    with open(path, encoding="utf-8") as handle:
        return json.load(handle)
