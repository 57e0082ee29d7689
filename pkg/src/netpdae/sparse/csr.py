"""Compressed sparse row storage.

Only what the assembly and the stage-system builders need: construction from
triplets, products, transposition, block stacking and Kronecker products.
"""

import numpy as np


class CSRMatrix:
    """Sparse matrix in CSR form with sorted, duplicate-free column indices.

    Explicit zeros are dropped on construction through :meth:`from_triplets`.
    Instances are treated as immutable.
    """

    __slots__ = ("shape", "indptr", "indices", "data")

    def __init__(self, shape, indptr, indices, data):
        self.shape = (int(shape[0]), int(shape[1]))
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        if self.indptr.shape != (self.shape[0] + 1,):
            raise ValueError("indptr length does not match row count")

    @classmethod
    def from_triplets(cls, shape, rows, cols, vals):
        """Build from (row, col, value) triplets, summing duplicates."""
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        m, n = int(shape[0]), int(shape[1])
        if rows.size and (rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n):
            raise IndexError("triplet index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            key = rows * n + cols
            start = np.concatenate(([True], key[1:] != key[:-1]))
            idx = np.flatnonzero(start)
            vals = np.add.reduceat(vals, idx)
            rows, cols = rows[idx], cols[idx]
            keep = vals != 0.0
            rows, cols, vals = rows[keep], cols[keep], vals[keep]
        indptr = np.zeros(m + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls((m, n), indptr, cols, vals)

    @classmethod
    def from_dense(cls, a):
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        r, c = np.nonzero(a)
        return cls.from_triplets(a.shape, r, c, a[r, c])

    @classmethod
    def zeros(cls, shape):
        return cls(shape, np.zeros(shape[0] + 1, dtype=np.int64), [], [])

    @classmethod
    def identity(cls, n, scale=1.0):
        i = np.arange(n)
        return cls.from_triplets((n, n), i, i, np.full(n, float(scale)))

    @classmethod
    def diag(cls, v):
        v = np.asarray(v, dtype=np.float64)
        i = np.arange(v.size)
        return cls.from_triplets((v.size, v.size), i, i, v)

    @property
    def nnz(self):
        return int(self.indptr[-1])

    def triplets(self):
        rows = np.repeat(np.arange(self.shape[0]), np.diff(self.indptr))
        return rows, self.indices.copy(), self.data.copy()

    def to_dense(self):
        out = np.zeros(self.shape)
        r, c, v = self.triplets()
        out[r, c] = v
        return out

    def transpose(self):
        r, c, v = self.triplets()
        return CSRMatrix.from_triplets(self.shape[::-1], c, r, v)

    @property
    def T(self):
        return self.transpose()

    def scale(self, alpha):
        return CSRMatrix(self.shape, self.indptr, self.indices, self.data * float(alpha))

    def diagonal(self):
        r, c, v = self.triplets()
        out = np.zeros(min(self.shape))
        on = r == c
        out[r[on]] = v[on]
        return out

    def matvec(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.shape[1]:
            raise ValueError(f"cannot multiply {self.shape} matrix with vector of length {x.shape[0]}")
        rows = np.repeat(np.arange(self.shape[0]), np.diff(self.indptr))
        width = int(np.prod(x.shape[1:], dtype=np.int64))
        prod = self.data[:, None] * x[self.indices].reshape(self.nnz, width)
        out = np.zeros((self.shape[0], width))
        np.add.at(out, rows, prod)
        return out.reshape((self.shape[0],) + x.shape[1:])

    def matmat(self, other):
        """Sparse-sparse product."""
        if self.shape[1] != other.shape[0]:
            raise ValueError("shape mismatch")
        ra, ca, va = self.triplets()
        counts = np.diff(other.indptr)[ca]
        rr = np.repeat(ra, counts)
        vv = np.repeat(va, counts)
        starts = other.indptr[ca]
        offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        pos = np.repeat(starts, counts) + offs
        return CSRMatrix.from_triplets((self.shape[0], other.shape[1]), rr, other.indices[pos], vv * other.data[pos])

    def __matmul__(self, other):
        if isinstance(other, CSRMatrix):
            return self.matmat(other)
        return self.matvec(other)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        r1, c1, v1 = self.triplets()
        r2, c2, v2 = other.triplets()
        return CSRMatrix.from_triplets(self.shape, np.concatenate((r1, r2)),
                                       np.concatenate((c1, c2)), np.concatenate((v1, v2)))

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def __neg__(self):
        return self.scale(-1.0)

    def __mul__(self, alpha):
        return self.scale(alpha)

    __rmul__ = __mul__

    def max_abs(self):
        return float(np.abs(self.data).max()) if self.nnz else 0.0

    def to_csc_arrays(self):
        """Column-compressed arrays (indptr, row indices, values) of the same matrix."""
        t = self.transpose()
        return t.indptr, t.indices, t.data

    def permute(self, rowperm=None, colperm=None):
        """Return A[rowperm][:, colperm] for permutation index arrays."""
        r, c, v = self.triplets()
        if rowperm is not None:
            inv = np.empty_like(rowperm)
            inv[rowperm] = np.arange(len(rowperm))
            r = inv[r]
        if colperm is not None:
            inv = np.empty_like(colperm)
            inv[colperm] = np.arange(len(colperm))
            c = inv[c]
        return CSRMatrix.from_triplets(self.shape, r, c, v)

    def __repr__(self):
        return f"CSRMatrix(shape={self.shape}, nnz={self.nnz})"


def bmat(blocks):
    """Assemble a block matrix from a nested list of CSRMatrix or None."""
    nbr = len(blocks)
    nbc = len(blocks[0])
    heights = [None] * nbr
    widths = [None] * nbc
    for i, row in enumerate(blocks):
        if len(row) != nbc:
            raise ValueError("ragged block layout")
        for j, blk in enumerate(row):
            if blk is None:
                continue
            if heights[i] not in (None, blk.shape[0]) or widths[j] not in (None, blk.shape[1]):
                raise ValueError(f"inconsistent block shape at ({i}, {j})")
            heights[i], widths[j] = blk.shape
    if None in heights or None in widths:
        raise ValueError("every block row and column needs at least one block")
    r0 = np.concatenate(([0], np.cumsum(heights)))
    c0 = np.concatenate(([0], np.cumsum(widths)))
    rs, cs, vs = [], [], []
    for i, row in enumerate(blocks):
        for j, blk in enumerate(row):
            if blk is None:
                continue
            r, c, v = blk.triplets()
            rs.append(r + r0[i])
            cs.append(c + c0[j])
            vs.append(v)
    cat = (lambda xs: np.concatenate(xs) if xs else np.zeros(0))
    return CSRMatrix.from_triplets((r0[-1], c0[-1]), cat(rs), cat(cs), cat(vs))


def kron(a, b):
    """Kronecker product of a dense small matrix ``a`` and a CSRMatrix ``b``."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    rb, cb, vb = b.triplets()
    rs, cs, vs = [], [], []
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if a[i, j] != 0.0:
                rs.append(rb + i * b.shape[0])
                cs.append(cb + j * b.shape[1])
                vs.append(a[i, j] * vb)
    shape = (a.shape[0] * b.shape[0], a.shape[1] * b.shape[1])
    if not rs:
        return CSRMatrix.zeros(shape)
    return CSRMatrix.from_triplets(shape, np.concatenate(rs), np.concatenate(cs), np.concatenate(vs))
