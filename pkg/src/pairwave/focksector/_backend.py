"""Pick the compiled kernel when it was built, else the pure-Python one."""
from __future__ import annotations

from . import _core_py

try:
    from . import _core as _compiled
except ImportError:  # extension not built
    _compiled = None

_active = _compiled if _compiled is not None else _core_py


def available() -> list[str]:
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def current() -> str:
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def set_backend(name: str) -> None:
    global _active
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        _active = _compiled
    elif name == "python":
        _active = _core_py
    else:
        raise ValueError(f"unknown backend {name!r}")


def get(name: str | None = None):
    if name is None:
        return _active
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        return _compiled
    if name == "python":
        return _core_py
    raise ValueError(f"unknown backend {name!r}")


def assemble(states, N, A, C, slack, backend: str | None = None):
    return get(backend).assemble(states, N, A, C, slack)
