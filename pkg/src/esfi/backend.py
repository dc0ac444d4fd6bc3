"""Selection of the integration kernel: compiled extension when available,
pure Python otherwise.

``ESFI_BACKEND=python`` in the environment forces the fallback (useful for
benchmarking and debugging); ``ESFI_BACKEND=cython`` fails loudly when the
extension is missing instead of silently degrading.
"""

import os

from . import _dp54

try:
    from . import _dp54c
except ImportError:  # extension not built; pure-Python fallback
    _dp54c = None

_KERNELS = {"python": _dp54}
if _dp54c is not None:
    _KERNELS["cython"] = _dp54c


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_KERNELS))


def default_backend() -> str:
    forced = os.environ.get("ESFI_BACKEND")
    if forced:
        if forced not in ("python", "cython"):
            raise ValueError(f"ESFI_BACKEND must be 'python' or 'cython', got {forced!r}")
        if forced not in _KERNELS:
            raise ImportError(
                "ESFI_BACKEND=cython requested but the compiled kernel is not "
                "installed; build the package normally or unset ESFI_BACKEND"
            )
        return forced
    return "cython" if "cython" in _KERNELS else "python"


def get_kernel(name: str | None = None):
    """Return the kernel module for ``name`` (default: best available)."""
    if name is None:
        name = default_backend()
    try:
        return _KERNELS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; available: {available_backends()}"
        ) from None
