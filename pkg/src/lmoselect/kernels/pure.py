"""NumPy fallback for the CSR kernels.

Same contracts as the compiled core. Row sums go through
``np.add.reduceat`` over the matrix's cached nonempty-row offsets and
column sums through ``np.bincount``; both accumulate in a fixed order, so
this backend is deterministic too.
"""

from __future__ import annotations

import numpy as np


def matvec(matrix, x: np.ndarray) -> np.ndarray:
    prod = matrix.data * x[matrix.indices64()]
    out = np.zeros(matrix.nrows)
    nonempty, starts = matrix.reduce_starts()
    if len(starts):
        out[nonempty] = np.add.reduceat(prod, starts)
    return out


def rmatvec(matrix, v: np.ndarray) -> np.ndarray:
    prod = matrix.data * v[matrix.row_ids()]
    return np.bincount(matrix.indices64(), weights=prod, minlength=matrix.ncols)


def masked_gram_matvec(matrix, mask: np.ndarray, alpha: float, p: np.ndarray) -> np.ndarray:
    pm = p * mask
    out = rmatvec(matrix, matvec(matrix, pm))
    out += alpha * pm
    out *= mask
    return out
