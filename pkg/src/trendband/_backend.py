"""Selects the compiled streaming kernel when available, numpy otherwise."""

from __future__ import annotations

from . import _pykernel

try:
    from . import _kernel  # compiled extension, optional
except ImportError:
    _kernel = None


def available_backends() -> list[str]:
    out = ["python"]
    if _kernel is not None:
        out.insert(0, "cython")
    return out


def get_backend(name: str | None = "auto"):
    if name in (None, "auto"):
        return _kernel if _kernel is not None else _pykernel
    if name == "cython":
        if _kernel is None:
            raise RuntimeError("compiled kernel not built; reinstall with a C compiler")
        return _kernel
    if name == "python":
        return _pykernel
    raise ValueError(f"unknown backend {name!r}; choose 'auto', 'cython' or 'python'")
