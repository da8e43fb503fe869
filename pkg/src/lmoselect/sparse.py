"""Compressed sparse row matrices and their on-disk cache format.

The cache layout (version 1, little-endian throughout):

    magic   4 bytes  b"LMSM"
    version u32
    rows    u64
    cols    u64
    nnz     u64
    vhash   64 ascii bytes (hex SHA-256 of the vocabulary it was built from)
    indptr  i64[rows + 1]
    indices i32[nnz]
    data    f64[nnz]
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from . import kernels
from .util import atomic_write_bytes

MATRIX_MAGIC = b"LMSM"
MATRIX_FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQQQ64s")


class MatrixFormatError(ValueError):
    """Raised when a matrix cache file cannot be parsed."""


class CsrMatrix:
    """Row-major sparse float64 matrix.

    Rows store column-sorted entries with no explicit zeros, and every
    stored value is finite; the constructor enforces both.
    """

    __slots__ = (
        "nrows",
        "ncols",
        "indptr",
        "indices",
        "data",
        "_row_ids",
        "_indices64",
        "_reduce_starts",
    )

    def __init__(self, nrows: int, ncols: int, indptr, indices, data):
        indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        indices = np.ascontiguousarray(indices, dtype=np.int32)
        data = np.ascontiguousarray(data, dtype=np.float64)
        if nrows < 0 or ncols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        if indptr.shape != (nrows + 1,):
            raise ValueError("indptr length must be nrows + 1")
        if len(indices) != len(data):
            raise ValueError("indices and data lengths differ")
        if nrows >= 0 and (indptr[0] != 0 or indptr[-1] != len(data)):
            raise ValueError("indptr endpoints inconsistent with nnz")
        if np.any(np.diff(indptr) < 0):
            raise ValueError("indptr must be non-decreasing")
        if len(indices) and (indices.min() < 0 or int(indices.max()) >= ncols):
            raise ValueError("column index out of range")
        if not np.all(np.isfinite(data)):
            raise ValueError("matrix values must be finite")
        if np.any(data == 0.0):
            raise ValueError("explicit zeros are not stored")
        self._check_sorted(indptr, indices)
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.indptr = indptr
        self.indices = indices
        self.data = data
        self._row_ids = None
        self._indices64 = None
        self._reduce_starts = None

    @staticmethod
    def _check_sorted(indptr: np.ndarray, indices: np.ndarray) -> None:
        if len(indices) < 2:
            return
        increasing = indices[1:] > indices[:-1]
        # entries at row starts may legitimately decrease
        starts = indptr[1:-1][(indptr[1:-1] > 0) & (indptr[1:-1] < len(indices))]
        increasing[np.asarray(starts, dtype=np.int64) - 1] = True
        if not increasing.all():
            raise ValueError("row entries must be strictly column-sorted")

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_dict_rows(cls, rows, ncols: int) -> "CsrMatrix":
        """Build from per-row {column: value} mappings, dropping zeros."""
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        cols_parts, data_parts = [], []
        for i, row in enumerate(rows):
            items = sorted((c, v) for c, v in row.items() if v != 0.0)
            indptr[i + 1] = indptr[i] + len(items)
            cols_parts.extend(c for c, _ in items)
            data_parts.extend(v for _, v in items)
        return cls(
            len(rows), ncols, indptr,
            np.asarray(cols_parts, dtype=np.int32),
            np.asarray(data_parts, dtype=np.float64),
        )

    @classmethod
    def from_dense(cls, arr) -> "CsrMatrix":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        rows = [
            {int(j): float(arr[i, j]) for j in np.flatnonzero(arr[i])}
            for i in range(arr.shape[0])
        ]
        return cls.from_dict_rows(rows, arr.shape[1])

    # -- basic accessors ------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])

    def row_ids(self) -> np.ndarray:
        """Row index of each stored entry (cached; used by the pure backend)."""
        if self._row_ids is None:
            self._row_ids = np.repeat(
                np.arange(self.nrows, dtype=np.int64), np.diff(self.indptr)
            )
        return self._row_ids

    def indices64(self) -> np.ndarray:
        """int64 copy of the column indices (cached; fancy indexing with
        int32 pays a cast on every call)."""
        if self._indices64 is None:
            self._indices64 = self.indices.astype(np.int64)
        return self._indices64

    def reduce_starts(self) -> tuple[np.ndarray, np.ndarray]:
        """(nonempty row ids, their indptr offsets) for reduceat-style row sums."""
        if self._reduce_starts is None:
            nonempty = np.flatnonzero(np.diff(self.indptr) > 0)
            self._reduce_starts = (nonempty, self.indptr[nonempty])
        return self._reduce_starts

    def row_items(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        a, b = self.indptr[i], self.indptr[i + 1]
        return self.indices[a:b], self.data[a:b]

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self.row_ids(), self.indices] = self.data
        return out

    # -- products (dispatch to the active kernel backend) ----------------

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if len(x) != self.ncols:
            raise ValueError(f"matvec length mismatch: {len(x)} != {self.ncols}")
        return kernels.matvec(self, x)

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        if len(v) != self.nrows:
            raise ValueError(f"rmatvec length mismatch: {len(v)} != {self.nrows}")
        return kernels.rmatvec(self, v)

    def gram_apply(self, mask: np.ndarray, alpha: float, p: np.ndarray) -> np.ndarray:
        return kernels.masked_gram_matvec(self, mask, alpha, p)

    # -- reshaping -------------------------------------------------------

    def take_rows(self, idx) -> "CsrMatrix":
        """New matrix containing the given rows, in the given order."""
        idx = np.asarray(idx, dtype=np.int64)
        counts = np.diff(self.indptr)[idx]
        indptr = np.zeros(len(idx) + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        chunks_i = [self.indices[self.indptr[r]: self.indptr[r + 1]] for r in idx]
        chunks_d = [self.data[self.indptr[r]: self.indptr[r + 1]] for r in idx]
        indices = np.concatenate(chunks_i) if chunks_i else np.empty(0, dtype=np.int32)
        data = np.concatenate(chunks_d) if chunks_d else np.empty(0, dtype=np.float64)
        return CsrMatrix(len(idx), self.ncols, indptr, indices, data)

    # -- persistence -----------------------------------------------------

    def to_cache_bytes(self, vocab_hash: str) -> bytes:
        vh = vocab_hash.encode("ascii")
        if len(vh) != 64:
            raise ValueError("vocabulary hash must be 64 hex characters")
        header = _HEADER.pack(
            MATRIX_MAGIC, MATRIX_FORMAT_VERSION, self.nrows, self.ncols, self.nnz, vh
        )
        return b"".join(
            [
                header,
                self.indptr.astype("<i8").tobytes(),
                self.indices.astype("<i4").tobytes(),
                self.data.astype("<f8").tobytes(),
            ]
        )

    def save(self, path: str | Path, vocab_hash: str) -> None:
        atomic_write_bytes(path, self.to_cache_bytes(vocab_hash))

    @classmethod
    def load(cls, path: str | Path) -> tuple["CsrMatrix", str]:
        """Read a cache file; returns (matrix, vocabulary hash)."""
        payload = Path(path).read_bytes()
        if len(payload) < _HEADER.size:
            raise MatrixFormatError(f"{path}: truncated header")
        magic, version, rows, cols, nnz, vh = _HEADER.unpack_from(payload)
        if magic != MATRIX_MAGIC:
            raise MatrixFormatError(f"{path}: not a matrix cache file")
        if version != MATRIX_FORMAT_VERSION:
            raise MatrixFormatError(f"{path}: unsupported format version {version}")
        off = _HEADER.size
        want = off + 8 * (rows + 1) + 4 * nnz + 8 * nnz
        if len(payload) != want:
            raise MatrixFormatError(f"{path}: size mismatch ({len(payload)} != {want})")
        indptr = np.frombuffer(payload, dtype="<i8", count=rows + 1, offset=off).copy()
        off += 8 * (rows + 1)
        indices = np.frombuffer(payload, dtype="<i4", count=nnz, offset=off).copy()
        off += 4 * nnz
        data = np.frombuffer(payload, dtype="<f8", count=nnz, offset=off).copy()
        return cls(rows, cols, indptr, indices, data), vh.decode("ascii")
