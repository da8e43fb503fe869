"""CSR kernel backend, selected once at import.

The compiled Cython core (`lmoselect.kernels._core`) is preferred when it
is built; otherwise the NumPy fallback in `lmoselect.kernels.pure` is
used. Set LMOSELECT_KERNELS=pure to force the fallback, or =compiled to
fail loudly when the extension is missing. Both backends implement the
same contracts; `benchmarks/kernel_bench.py` compares their speed.
"""

from __future__ import annotations

import os

import numpy as np

_requested = os.environ.get("LMOSELECT_KERNELS", "auto")

if _requested not in ("auto", "compiled", "pure"):
    raise ValueError(
        f"LMOSELECT_KERNELS must be auto, compiled or pure, got {_requested!r}"
    )

if _requested == "pure":
    from . import pure as _pure

    _core = None
    BACKEND = "pure"
else:
    try:
        from . import _core  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "LMOSELECT_KERNELS=compiled but lmoselect.kernels._core is not "
                "built; run `pip install -e .` with Cython available"
            ) from None
        from . import pure as _pure

        _core = None
        BACKEND = "pure"


def matvec(matrix, x: np.ndarray) -> np.ndarray:
    """X @ x for a CsrMatrix-like object."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if BACKEND == "compiled":
        out = np.empty(matrix.nrows, dtype=np.float64)
        _core.matvec(matrix.indptr, matrix.indices, matrix.data, x, out)
        return out
    return _pure.matvec(matrix, x)


def rmatvec(matrix, v: np.ndarray) -> np.ndarray:
    """X.T @ v for a CsrMatrix-like object."""
    v = np.ascontiguousarray(v, dtype=np.float64)
    if BACKEND == "compiled":
        out = np.empty(matrix.ncols, dtype=np.float64)
        _core.rmatvec(matrix.indptr, matrix.indices, matrix.data, v, out)
        return out
    return _pure.rmatvec(matrix, v)


def masked_gram_matvec(matrix, mask: np.ndarray, alpha: float, p: np.ndarray) -> np.ndarray:
    """mask-projected (X^T X + alpha I) applied to p.

    Entries of the result outside the active mask are exactly zero, so a
    conjugate gradient iteration started inside the masked subspace stays
    there.
    """
    p = np.ascontiguousarray(p, dtype=np.float64)
    mask = np.ascontiguousarray(mask, dtype=np.bool_)
    if BACKEND == "compiled":
        tmp = np.empty(matrix.nrows, dtype=np.float64)
        out = np.empty(matrix.ncols, dtype=np.float64)
        _core.masked_gram_matvec(
            matrix.indptr, matrix.indices, matrix.data,
            mask.view(np.uint8), float(alpha), p, tmp, out,
        )
        return out
    return _pure.masked_gram_matvec(matrix, mask, float(alpha), p)
