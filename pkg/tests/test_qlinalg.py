import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qschur.errors import NotConvergent, NotHermitian, NotIsometric, NotPositive, OddMultiplicity
from qschur.qlinalg import (
    QMatrix,
    complex_adjoint,
    from_complex_adjoint,
    gram_schmidt_complete,
    herm_eigen,
    neg_squares,
    random_qmatrix,
    random_unitary,
    rank,
    solve_stein,
    spectral_split,
    sqrt_pd,
)
from qschur.quat import I, J, Quaternion


def _hermitian(rng, n):
    G = random_qmatrix(rng, n, n)
    return G + G.H


def test_chi_of_j():
    assert np.allclose(complex_adjoint(QMatrix.scalar(J)), [[0, 1], [-1, 0]])


def test_chi_of_identity():
    assert np.allclose(complex_adjoint(QMatrix.identity(3)), np.eye(6))


def test_chi_is_star_homomorphism(rng):
    for _ in range(20):
        A, B = random_qmatrix(rng, 2, 3), random_qmatrix(rng, 3, 2)
        C = random_qmatrix(rng, 2, 3)
        assert np.allclose(complex_adjoint(A @ B), complex_adjoint(A) @ complex_adjoint(B), atol=1e-12)
        assert np.allclose(complex_adjoint(A + C), complex_adjoint(A) + complex_adjoint(C), atol=1e-12)
        assert np.allclose(complex_adjoint(A.H), complex_adjoint(A).conj().T, atol=1e-12)


def test_chi_round_trip(rng):
    A = random_qmatrix(rng, 3, 2)
    assert from_complex_adjoint(complex_adjoint(A)) == A


def test_herm_eigen_examples():
    assert herm_eigen(QMatrix.diag([1, -1])).eigenvalues == (-1.0, 1.0)
    A = QMatrix([[[0, 0, 0, 0], J.to_json()], [(-J).to_json(), [0, 0, 0, 0]]])
    assert np.allclose(herm_eigen(A).eigenvalues, [-1.0, 1.0])
    eig = herm_eigen(QMatrix.zeros(3, 3))
    assert eig.eigenvalues == (0.0,) and eig.multiplicities == (3,)


def test_herm_eigen_brute_force(rng):
    # oracle: a Hermitian matrix's chi is complex Hermitian; compare halved spectra
    A = _hermitian(rng, 4)
    full = np.sort(np.linalg.eigvalsh(complex_adjoint(A)))
    assert np.allclose(herm_eigen(A).all_values, full[::2], atol=1e-10)
    assert herm_eigen(A).dimension == 4


def test_herm_eigen_rejects_non_hermitian(rng):
    with pytest.raises(NotHermitian):
        herm_eigen(random_qmatrix(rng, 2, 2))


def test_unpaired_chi_spectrum_raises():
    # a complex Hermitian matrix that is not the adjoint of any quaternionic one
    import qschur.qlinalg as ql

    bad = np.diag([1.0, 2.0]).astype(complex)
    orig = ql.complex_adjoint
    ql.complex_adjoint = lambda A: bad
    try:
        with pytest.raises(OddMultiplicity):
            herm_eigen(QMatrix.identity(1))
    finally:
        ql.complex_adjoint = orig


def test_neg_squares_examples(rng):
    assert neg_squares(QMatrix.diag([1, -1])) == 1
    assert neg_squares(QMatrix.diag([-1, -1, 1])) == 2
    G = random_qmatrix(rng, 4, 3)
    assert neg_squares(G @ G.H) == 0


def test_neg_squares_unitary_congruence(rng):
    for _ in range(10):
        A = _hermitian(rng, 4)
        U = random_unitary(rng, 4)
        assert neg_squares(U.H @ A @ U) == neg_squares(A)


def test_spectral_split_reconstructs(rng):
    A = _hermitian(rng, 5)
    plus, minus, r = spectral_split(A)
    assert (plus - minus - A).max_abs() < 1e-10
    assert neg_squares(plus) == 0 and neg_squares(minus) == 0
    assert r == neg_squares(A) == rank(minus)


def test_sqrt_pd_examples():
    assert sqrt_pd(QMatrix.diag([4, 9])) == QMatrix.diag([2, 3])
    assert sqrt_pd(QMatrix.identity(2)) == QMatrix.identity(2)
    S = sqrt_pd(QMatrix.scalar(4 / 3))
    assert math.isclose(S[0, 0].w, 2 / math.sqrt(3), rel_tol=1e-14)
    with pytest.raises(NotPositive):
        sqrt_pd(QMatrix.diag([1, -1]))


def test_sqrt_pd_properties(rng):
    G = random_qmatrix(rng, 4, 4)
    A = G @ G.H + QMatrix.identity(4) * 0.1
    S = sqrt_pd(A)
    assert S.is_hermitian(1e-12)
    assert (S @ S - A).max_abs() <= 1e-10 * A.norm()
    assert (S @ A - A @ S).max_abs() <= 1e-10 * A.norm() * S.norm()


def test_solve_stein_examples():
    P = solve_stein(QMatrix.scalar(0.5), QMatrix.scalar(1.0))
    assert math.isclose(P[0, 0].w, 4 / 3, rel_tol=1e-14)
    Q = QMatrix.diag([1.0, 2.0])
    assert solve_stein(QMatrix.zeros(2, 2), Q) == Q
    A = QMatrix.diag([I * 0.5, J * 0.5])
    ones = QMatrix.from_real(np.ones((2, 2)))
    P = solve_stein(A, ones)
    assert (P - A.H @ P @ A - ones).max_abs() <= 1e-10
    assert P.is_hermitian(1e-12)
    assert herm_eigen(P).all_values[0] > 0


def test_solve_stein_not_convergent():
    with pytest.raises(NotConvergent):
        solve_stein(QMatrix.scalar(1.0), QMatrix.scalar(1.0))
    with pytest.raises(NotConvergent):
        solve_stein(QMatrix.scalar(0.999), QMatrix.scalar(1.0), max_terms=10)


def test_completion_examples():
    e1 = QMatrix.column([1.0, 0.0])
    assert gram_schmidt_complete(e1) == QMatrix.column([0.0, 1.0])
    s = 1 / math.sqrt(2)
    T = QMatrix.column([Quaternion(s), I * s])
    h = gram_schmidt_complete(T)
    assert (h.H @ T).max_abs() < 1e-14
    assert math.isclose((h.H @ h)[0, 0].w, 1.0, rel_tol=1e-14)
    # phase rule: the last nonzero entry is real and positive
    last = h[1, 0]
    assert last.w > 0 and abs(last.x) + abs(last.y) + abs(last.z) < 1e-15


def test_completion_random_isometry(rng):
    for n in (1, 2, 4):
        U = random_unitary(rng, n + 1)
        T = QMatrix(U.entries[:, :n])
        h = gram_schmidt_complete(T)
        W = QMatrix.block([[T, h]])
        assert (W @ W.H - QMatrix.identity(n + 1)).max_abs() < 1e-10


def test_completion_rejects_non_isometry():
    with pytest.raises(NotIsometric):
        gram_schmidt_complete(QMatrix.column([2.0, 0.0]))


@given(st.integers(1, 4), st.integers(0, 10_000))
def test_unitary_sample_is_unitary(n, seed):
    U = random_unitary(np.random.default_rng(seed), n)
    assert (U.H @ U - QMatrix.identity(n)).max_abs() < 1e-12


def test_matrix_json_round_trip(rng):
    A = random_qmatrix(rng, 2, 3)
    assert QMatrix.from_json(json.loads(json.dumps(A.to_json()))) == A
    assert (A.inv() if A.rows == A.cols else None) is None
    B = random_qmatrix(rng, 3, 3)
    assert (B @ B.inv() - QMatrix.identity(3)).max_abs() < 1e-12
