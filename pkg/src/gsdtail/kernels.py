"""Kernel dispatch: the compiled extension when importable, numpy otherwise.

Set ``GSDTAIL_PURE_PYTHON=1`` to force the fallback. ``BACKEND`` names the
active implementation.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("GSDTAIL_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"


def tail_hits(R, U, A, T, backend=None):
    impl = _pick(backend)
    return impl.tail_hits(
        np.ascontiguousarray(R, dtype=float),
        np.ascontiguousarray(U, dtype=float),
        np.ascontiguousarray(A, dtype=float),
        np.atleast_2d(np.asarray(T, dtype=float)),
    )


def pgd_box_qp(P, b, X0, max_iter=200000, tol=1e-14, backend=None):
    P = np.asarray(P, dtype=float)
    lipschitz = 2.0 * float(np.linalg.eigvalsh(P)[-1])
    return _pick(backend).pgd_box_qp(P, np.asarray(b, dtype=float), X0, int(max_iter), float(tol), lipschitz)


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        if _impl is _kernels_py:
            from . import _kernels  # raises ImportError when not built

            return _kernels
        return _impl
    raise ValueError(f"unknown backend {backend!r}")
