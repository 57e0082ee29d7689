"""Sparse matrices and direct solvers."""

from .csr import CSRMatrix, bmat, kron
from .lu import (Factorization, SingularMatrixError, available_backends, factorize,
                 row_rank, set_backend, solve)
from .mmio import read_mm, write_mm
from . import lu as _lu


def backend():
    """Name of the kernel module currently used for new factorizations."""
    return _lu.BACKEND


__all__ = ["CSRMatrix", "bmat", "kron", "Factorization", "SingularMatrixError", "factorize",
           "solve", "row_rank", "set_backend", "available_backends", "backend", "read_mm", "write_mm"]
