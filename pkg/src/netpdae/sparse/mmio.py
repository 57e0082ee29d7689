"""Matrix Market coordinate format (real, general)."""

import numpy as np

from .csr import CSRMatrix


def write_mm(path, A, comment=None):
    r, c, v = A.triplets()
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        if comment:
            for line in str(comment).splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{A.shape[0]} {A.shape[1]} {r.size}\n")
        for i, j, x in zip(r, c, v):
            fh.write(f"{int(i) + 1} {int(j) + 1} {float(x)!r}\n")


def read_mm(path):
    with open(path) as fh:
        header = fh.readline().lower().split()
        if header[:4] != ["%%matrixmarket", "matrix", "coordinate", "real"]:
            raise ValueError("only real coordinate Matrix Market files are supported")
        symmetric = len(header) > 4 and header[4] == "symmetric"
        line = fh.readline()
        while line.startswith("%"):
            line = fh.readline()
        m, n, nnz = (int(t) for t in line.split())
        data = np.loadtxt(fh, ndmin=2) if nnz else np.zeros((0, 3))
    rows = data[:, 0].astype(np.int64) - 1
    cols = data[:, 1].astype(np.int64) - 1
    vals = data[:, 2]
    if symmetric:
        off = rows != cols
        rows, cols, vals = (np.concatenate((rows, cols[off])), np.concatenate((cols, rows[off])),
                            np.concatenate((vals, vals[off])))
    return CSRMatrix.from_triplets((m, n), rows, cols, vals)
