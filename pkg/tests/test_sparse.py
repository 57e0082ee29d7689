import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netpdae.sparse import (CSRMatrix, SingularMatrixError, available_backends, bmat, factorize, kron, read_mm,
                            row_rank, write_mm)

BACKENDS = available_backends()


def test_csr_basics(rng):
    D = rng.standard_normal((5, 4))
    D[D < 0.3] = 0.0
    A = CSRMatrix.from_dense(D)
    assert np.array_equal(A.to_dense(), D)
    assert A.nnz == np.count_nonzero(D)
    assert np.all(np.diff(A.indptr) >= 0)
    for r in range(5):
        cols = A.indices[A.indptr[r]:A.indptr[r + 1]]
        assert np.all(np.diff(cols) > 0)
    x = rng.standard_normal(4)
    assert np.allclose(A @ x, D @ x)
    assert np.allclose(A.T.to_dense(), D.T)
    X = rng.standard_normal((4, 3))
    assert np.allclose(A @ X, D @ X)
    B = CSRMatrix.from_dense(rng.standard_normal((4, 6)))
    assert np.allclose((A @ B).to_dense(), D @ B.to_dense())


def test_duplicates_summed_and_zeros_dropped():
    A = CSRMatrix.from_triplets((2, 2), [0, 0, 1], [1, 1, 0], [1.0, 2.0, 0.0])
    assert A.nnz == 1 and A.to_dense()[0, 1] == 3.0


def test_bmat_kron(rng):
    a = CSRMatrix.from_dense(rng.standard_normal((2, 2)))
    b = CSRMatrix.from_dense(rng.standard_normal((2, 3)))
    M = bmat([[a, b], [None, CSRMatrix.identity(3)]])
    assert np.allclose(M.to_dense()[:2, 2:], b.to_dense())
    W = rng.standard_normal((2, 2))
    assert np.allclose(kron(W, b).to_dense(), np.kron(W, b.to_dense()))


@pytest.mark.parametrize("backend", BACKENDS)
def test_identity_and_permutation(backend):
    F = factorize(CSRMatrix.identity(4), backend=backend)
    b = np.arange(4.0)
    assert np.array_equal(F.solve(b), b)
    P = factorize(CSRMatrix.from_dense(np.array([[0.0, 1.0], [1.0, 0.0]])), backend=backend)
    assert np.allclose(P.solve(np.array([1.0, 2.0])), [2.0, 1.0])


@pytest.mark.parametrize("backend", BACKENDS)
def test_random_spd(backend, rng):
    G = rng.standard_normal((50, 50))
    A = G.T @ G + np.eye(50)
    b = rng.standard_normal(50)
    x = factorize(CSRMatrix.from_dense(A), backend=backend).solve(b)
    ref = np.linalg.solve(A, b)
    assert np.linalg.norm(x - ref) / np.linalg.norm(ref) <= 1e-12 * np.linalg.cond(A)
    assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) <= 1e-12


@pytest.mark.parametrize("backend", BACKENDS)
def test_singular_rejected(backend):
    A = CSRMatrix.from_dense(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(SingularMatrixError):
        factorize(A, backend=backend)
    with pytest.raises(SingularMatrixError):
        factorize(CSRMatrix.from_dense(np.array([[1.0, 0.0], [0.0, 0.0]])), backend=backend)


@pytest.mark.parametrize("backend", BACKENDS)
def test_transpose_solve_and_rcond(backend, rng):
    A = rng.standard_normal((20, 20)) + 5 * np.eye(20)
    F = factorize(CSRMatrix.from_dense(A), backend=backend)
    b = rng.standard_normal(20)
    assert np.allclose(A.T @ F.solve_transpose(b), b)
    est = F.rcond()
    true = 1.0 / (np.linalg.norm(A, 1) * np.linalg.norm(np.linalg.inv(A), 1))
    assert 0.1 * true <= est <= 10 * true


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.floats(0.05, 0.6), st.integers(0, 2 ** 31 - 1), st.sampled_from(BACKENDS))
def test_dense_oracle_equivalence(n, density, seed, backend):
    r = np.random.default_rng(seed)
    D = r.standard_normal((n, n)) * (r.random((n, n)) < density)
    D += np.eye(n)[r.permutation(n)] * (1 + r.random(n))
    if abs(np.linalg.det(D)) < 1e-8 or np.linalg.cond(D) > 1e8:
        return
    b = r.standard_normal(n)
    x = factorize(CSRMatrix.from_dense(D), backend=backend).solve(b)
    assert np.linalg.norm(D @ x - b) <= 1e-10 * (np.linalg.norm(D) * np.linalg.norm(x) + np.linalg.norm(b))


def test_backends_agree(rng):
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernel not built")
    A = CSRMatrix.from_dense(rng.standard_normal((30, 30)) + 4 * np.eye(30))
    b = rng.standard_normal(30)
    xs = [factorize(A, backend=be).solve(b) for be in BACKENDS]
    assert np.allclose(xs[0], xs[1], rtol=1e-12, atol=1e-14)


def test_row_rank():
    assert row_rank(CSRMatrix.zeros((3, 4))) == 0
    B = CSRMatrix.from_dense(np.array([[1.0, 0, 0], [0, 0, 1.0]]))
    assert row_rank(B) == 2
    assert row_rank(CSRMatrix.from_dense(np.vstack((B.to_dense(), B.to_dense()[:1])))) == 2


def test_matrix_market_round_trip(tmp_path, rng):
    D = rng.standard_normal((4, 6)) * (rng.random((4, 6)) < 0.5)
    A = CSRMatrix.from_dense(D)
    write_mm(tmp_path / "a.mtx", A, comment="test")
    B = read_mm(tmp_path / "a.mtx")
    assert B.shape == A.shape and np.array_equal(B.to_dense(), D)


def test_matrix_market_symmetric_read(tmp_path):
    (tmp_path / "s.mtx").write_text("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2.0\n2 1 -1.0\n")
    assert np.array_equal(read_mm(tmp_path / "s.mtx").to_dense(), [[2.0, -1.0], [-1.0, 0.0]])


def test_fallback_when_kernel_missing():
    import subprocess
    import sys
    code = ("import sys; sys.modules['netpdae.sparse._core'] = None\n"
            "import numpy as np\n"
            "from netpdae.sparse import backend, available_backends, factorize, CSRMatrix\n"
            "assert backend() == 'python' and available_backends() == ['python']\n"
            "x = factorize(CSRMatrix.from_dense(np.array([[2.0, 1.0], [1.0, 3.0]]))).solve(np.array([3.0, 4.0]))\n"
            "assert np.allclose(x, [1.0, 1.0])\n")
    res = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
