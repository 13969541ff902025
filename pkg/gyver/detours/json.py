from collections.abc import Callable
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import orjson

loads: Callable[[str | bytes | bytearray | memoryview], Any] = orjson.loads

_BASE_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def _default(val: Any) -> Any:
    if isinstance(val, np.generic):
        return val.item()
    if isinstance(val, np.ndarray):
        return val.tolist()
    if isinstance(val, Enum):
        return val.value
    if isinstance(val, Path):
        return val.as_posix()
    if isinstance(val, tuple | set | frozenset):
        return list(val)
    raise TypeError(f'Object of type {type(val).__name__} is not JSON serializable')


def dumps_bytes(val: Any, *, indent: bool = False) -> bytes:
    option = _BASE_OPTIONS | (orjson.OPT_INDENT_2 if indent else 0)
    return orjson.dumps(val, default=_default, option=option)


def dumps(val: Any, *, indent: bool = False) -> str:
    return dumps_bytes(val, indent=indent).decode('utf-8')


def read_json(path: Path) -> Any:
    return loads(path.read_bytes())


def write_json(path: Path, obj: Any) -> None:
    path.write_bytes(dumps_bytes(obj, indent=True) + b'\n')
