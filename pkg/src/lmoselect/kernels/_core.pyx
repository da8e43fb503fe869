# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled CSR kernels.

These are the hot inner loops of the removal search: every conjugate
gradient iteration of every refit runs one masked gram product. All
loops release the GIL so run workers can overlap on threads.
"""


def matvec(const long long[::1] indptr, const int[::1] indices,
           const double[::1] data, const double[::1] x, double[::1] out):
    """out[i] = sum_k data[k] * x[indices[k]] over row i's entries."""
    cdef Py_ssize_t i, k, nrows = indptr.shape[0] - 1
    cdef double acc
    with nogil:
        for i in range(nrows):
            acc = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                acc += data[k] * x[indices[k]]
            out[i] = acc


def rmatvec(const long long[::1] indptr, const int[::1] indices,
            const double[::1] data, const double[::1] v, double[::1] out):
    """out = X^T v, accumulated in storage order."""
    cdef Py_ssize_t i, k, nrows = indptr.shape[0] - 1, ncols = out.shape[0]
    with nogil:
        for i in range(ncols):
            out[i] = 0.0
        for i in range(nrows):
            for k in range(indptr[i], indptr[i + 1]):
                out[indices[k]] += data[k] * v[i]


def masked_gram_matvec(const long long[::1] indptr, const int[::1] indices,
                       const double[::1] data, const unsigned char[::1] mask,
                       double alpha, const double[::1] p,
                       double[::1] tmp, double[::1] out):
    """out = P (X^T X + alpha I) P p, with P the diagonal projector onto
    mask's active columns; tmp is a caller-provided row-length scratch."""
    cdef Py_ssize_t i, k, j, nrows = indptr.shape[0] - 1, ncols = out.shape[0]
    cdef double acc
    with nogil:
        for i in range(nrows):
            acc = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                j = indices[k]
                if mask[j]:
                    acc += data[k] * p[j]
            tmp[i] = acc
        for j in range(ncols):
            out[j] = 0.0
        for i in range(nrows):
            for k in range(indptr[i], indptr[i + 1]):
                j = indices[k]
                if mask[j]:
                    out[j] += data[k] * tmp[i]
        for j in range(ncols):
            if mask[j]:
                out[j] += alpha * p[j]
