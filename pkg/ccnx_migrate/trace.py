import functools
import inspect
import json
import threading
from collections import defaultdict
from typing import Any, Callable, Optional

from pydantic import BaseModel

from ccnx_migrate.ccnx.name import Name
from ccnx_migrate.ccnx.packet import Hash256

# one lock per trace file; scenarios running on a thread pool may share a file
_file_locks: defaultdict[str, threading.Lock] = defaultdict(threading.Lock)


class TraceRecord(BaseModel):
    cls_name: str
    method_name: str
    now_us: Optional[int]
    kwargs: dict[str, Any]
    response: Any


def to_jsonable(value: Any) -> Any:
    if value is None or isinstance(value, (str, int, float, bool)):
        return value
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, bytes):
        return value.hex()
    if isinstance(value, (Name, Hash256)):
        return str(value)
    if isinstance(value, dict):
        return {str(to_jsonable(key)): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (set, frozenset)):
        return sorted((to_jsonable(item) for item in value), key=str)
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    raise TypeError(f"cannot trace a value of type {type(value).__name__}")


def _append(owner: Any, func: Callable, args: tuple, kwargs: dict, response: Any) -> None:
    path = getattr(owner, "_log_file", None)
    if path is None:
        return
    bound = inspect.signature(func).bind(owner, *args, **kwargs)
    bound.apply_defaults()
    env = getattr(owner, "env", None)
    record = TraceRecord(
        cls_name=type(owner).__name__,
        method_name=func.__name__,
        now_us=None if env is None else int(env.now),
        kwargs={name: to_jsonable(value) for name, value in list(bound.arguments.items())[1:]},
        response=to_jsonable(response),
    )
    line = json.dumps(record.model_dump(mode="json"), sort_keys=True)
    with _file_locks[path]:
        with open(path, "a") as f:
            f.write(line + "\n")


def log_call(func):
    """Append one JSON line per call to ``self._log_file``; simulation processes log when they finish."""
    if inspect.isgeneratorfunction(func):

        @functools.wraps(func)
        def process_wrapper(self, *args, **kwargs):
            response = yield from func(self, *args, **kwargs)
            _append(self, func, args, kwargs, response)
            return response

        return process_wrapper

    @functools.wraps(func)
    def wrapper(self, *args, **kwargs):
        response = func(self, *args, **kwargs)
        _append(self, func, args, kwargs, response)
        return response

    return wrapper
