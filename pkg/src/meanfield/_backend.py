"""Backend selection for the numeric kernels.

Set ``MF_BACKEND=numpy`` to force the pure-numpy path. The default is
``numba`` when it imports, ``numpy`` otherwise.
"""
import os

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False


def requested_backend():
    name = os.environ.get("MF_BACKEND", "numba").strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"MF_BACKEND must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAS_NUMBA:
        return "numpy"
    return name


BACKEND = requested_backend()
