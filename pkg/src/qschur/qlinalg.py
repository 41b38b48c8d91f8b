"""Dense quaternionic matrices.

Products are computed componentwise from the Hamilton table; every spectral
computation (eigenvalues, square roots, inverses, ranks) goes through the
complex adjoint

    chi(A1 + A2 j) = [[A1, A2], [-conj(A2), conj(A1)]]

which is an injective *-homomorphism into complex matrices of twice the size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NotConvergent,
    NotHermitian,
    NotIsometric,
    NotPositive,
    OddMultiplicity,
    ShapeMismatch,
)
from .quat import Quaternion, as_qarray, qabs, qbilinear, qconj, qmul, qreal

__all__ = [
    "QMatrix",
    "Spectrum",
    "complex_adjoint",
    "from_complex_adjoint",
    "herm_eigen",
    "neg_squares",
    "sqrt_pd",
    "solve_stein",
    "gram_schmidt_complete",
    "spectral_split",
    "rank",
    "random_unitary",
]


class QMatrix:
    """Quaternionic ``rows x cols`` matrix backed by a ``(rows, cols, 4)`` array."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 3 or a.shape[-1] != 4:
            raise ShapeMismatch(f"QMatrix needs shape (rows, cols, 4), got {a.shape}")
        self.entries = a

    # -- constructors ------------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMatrix":
        return cls(np.zeros((rows, cols, 4)))

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(qreal(np.eye(n)))

    @classmethod
    def from_real(cls, m) -> "QMatrix":
        return cls(qreal(np.atleast_2d(np.asarray(m, dtype=float))))

    @classmethod
    def diag(cls, values) -> "QMatrix":
        vals = [as_qarray(v) for v in values]
        out = np.zeros((len(vals), len(vals), 4))
        for n, v in enumerate(vals):
            out[n, n] = v
        return cls(out)

    @classmethod
    def scalar(cls, q) -> "QMatrix":
        return cls(as_qarray(q).reshape(1, 1, 4))

    @classmethod
    def column(cls, values) -> "QMatrix":
        return cls(np.array([as_qarray(v) for v in values]).reshape(-1, 1, 4))

    @classmethod
    def row(cls, values) -> "QMatrix":
        return cls(np.array([as_qarray(v) for v in values]).reshape(1, -1, 4))

    @classmethod
    def block(cls, blocks) -> "QMatrix":
        return cls(np.concatenate([np.concatenate([b.entries for b in r], axis=1) for r in blocks], axis=0))

    # -- basic protocol ----------------------------------------------------
    @property
    def shape(self):
        return self.entries.shape[:2]

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def __getitem__(self, idx) -> Quaternion:
        i, j = idx
        return Quaternion.from_array(self.entries[i, j])

    def __repr__(self):
        return f"QMatrix(rows={self.rows}, cols={self.cols})"

    def __eq__(self, other):
        return isinstance(other, QMatrix) and np.array_equal(self.entries, other.entries)

    __hash__ = None

    # -- algebra -------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} + {other.shape}")
        return QMatrix(self.entries + other.entries)

    def __sub__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} - {other.shape}")
        return QMatrix(self.entries - other.entries)

    def __neg__(self):
        return QMatrix(-self.entries)

    def __matmul__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ShapeMismatch(f"{self.shape} @ {other.shape}")
        return QMatrix(qmatmul(self.entries, other.entries))

    def __mul__(self, other):
        """Scale by a real number, or right-multiply every entry by a quaternion."""
        if isinstance(other, (int, float, np.floating, np.integer)):
            return QMatrix(self.entries * float(other))
        if isinstance(other, Quaternion):
            return QMatrix(qmul(self.entries, other.array))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return QMatrix(self.entries * float(other))
        if isinstance(other, Quaternion):
            return QMatrix(qmul(other.array, self.entries))
        return NotImplemented

    @property
    def H(self) -> "QMatrix":
        """Conjugate transpose."""
        return QMatrix(qconj(np.swapaxes(self.entries, 0, 1)))

    def conj(self) -> "QMatrix":
        return QMatrix(qconj(self.entries))

    def inv(self) -> "QMatrix":
        if self.rows != self.cols:
            raise ShapeMismatch("inverse of a non-square matrix")
        return from_complex_adjoint(np.linalg.inv(complex_adjoint(self)))

    def norm(self) -> float:
        """Operator 2-norm (equal to the spectral norm of the complex adjoint)."""
        if self.entries.size == 0:
            return 0.0
        return float(np.linalg.norm(complex_adjoint(self), 2))

    def max_abs(self) -> float:
        """Largest entry modulus."""
        if self.entries.size == 0:
            return 0.0
        return float(np.max(qabs(self.entries)))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        if self.rows != self.cols:
            return False
        return (self - self.H).max_abs() <= tol * max(1.0, self.max_abs())

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[float(v) for v in e] for e in self.entries.reshape(-1, 4)],
        }

    @classmethod
    def from_json(cls, data) -> "QMatrix":
        rows, cols = int(data["rows"]), int(data["cols"])
        entries = np.asarray(data["entries"], dtype=float).reshape(-1, 4) if rows * cols else np.zeros((0, 4))
        if entries.shape[0] != rows * cols:
            raise ShapeMismatch(f"expected {rows * cols} entries, got {entries.shape[0]}")
        return cls(entries.reshape(rows, cols, 4))


def qmatmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Quaternionic matrix product on raw ``(..., n, m, 4)`` arrays."""
    return qbilinear(np.matmul, a, b)


def qadjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose of raw ``(..., n, m, 4)`` arrays."""
    return qconj(np.swapaxes(a, -2, -3))


# -- complex adjoint -----------------------------------------------------------


def complex_adjoint(A) -> np.ndarray:
    e = A.entries if isinstance(A, QMatrix) else np.asarray(A, dtype=float)
    a1 = e[..., 0] + 1j * e[..., 1]
    a2 = e[..., 2] + 1j * e[..., 3]
    top = np.concatenate([a1, a2], axis=-1)
    bottom = np.concatenate([-a2.conj(), a1.conj()], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def from_complex_adjoint(M) -> QMatrix:
    """Recover the quaternionic matrix from a (numerically) chi-structured one.

    Both copies of each block are averaged, which projects onto the
    chi-structured subspace.
    """
    M = np.asarray(M, dtype=complex)
    n, m = M.shape[0] // 2, M.shape[1] // 2
    a1 = 0.5 * (M[:n, :m] + M[n:, m:].conj())
    a2 = 0.5 * (M[:n, m:] - M[n:, :m].conj())
    return QMatrix(np.stack([a1.real, a1.imag, a2.real, a2.imag], axis=-1))


# -- Hermitian spectral theory -------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    """Right eigenvalues of a Hermitian quaternionic matrix, with multiplicities."""

    eigenvalues: tuple
    multiplicities: tuple
    all_values: tuple  # each eigenvalue repeated by multiplicity, ascending

    @property
    def dimension(self) -> int:
        return sum(self.multiplicities)


def _check_hermitian(A: QMatrix, tol: float):
    if A.rows != A.cols:
        raise NotHermitian(f"matrix of shape {A.shape} is not square")
    scale = max(A.max_abs(), 1e-300)
    if (A - A.H).max_abs() > tol * max(scale, 1.0):
        raise NotHermitian("matrix is not Hermitian within tolerance")


def _paired_eigh(A: QMatrix, tol: float):
    """Eigen-decompose chi(A) and halve the (even) multiplicities."""
    chi = complex_adjoint(A)
    chi = 0.5 * (chi + chi.conj().T)
    w, v = np.linalg.eigh(chi)
    norm = max(float(np.max(np.abs(w))) if w.size else 0.0, 1.0)
    pair_tol = 1e-8 * norm
    if np.any(np.abs(w[0::2] - w[1::2]) > pair_tol):
        raise OddMultiplicity("eigenvalues of the complex adjoint do not pair up")
    return 0.5 * (w[0::2] + w[1::2]), w, v


def herm_eigen(A: QMatrix, tol: float = 1e-10) -> Spectrum:
    _check_hermitian(A, tol)
    vals, _, _ = _paired_eigh(A, tol)
    groups: list[list[float]] = []
    scale = max(float(np.max(np.abs(vals))) if vals.size else 0.0, 1.0)
    for v in vals:
        if groups and abs(v - groups[-1][-1]) <= 1e-8 * scale:
            groups[-1].append(v)
        else:
            groups.append([v])
    return Spectrum(
        eigenvalues=tuple(float(np.mean(g)) for g in groups),
        multiplicities=tuple(len(g) for g in groups),
        all_values=tuple(float(v) for v in vals),
    )


def _neg_threshold(vals, tol: float) -> float:
    scale = max(float(np.max(np.abs(vals))) if len(vals) else 0.0, 1.0)
    return tol * scale


def neg_squares(A: QMatrix, tol: float = 1e-10) -> int:
    """Number of strictly negative right eigenvalues (below ``-tol * max(1, |A|)``)."""
    eig = herm_eigen(A, tol)
    thr = _neg_threshold(eig.all_values, tol)
    return sum(1 for v in eig.all_values if v < -thr)


def spectral_split(A: QMatrix, tol: float = 1e-10):
    """Write Hermitian ``A = A_plus - A_minus`` with both parts positive semidefinite.

    Returns ``(A_plus, A_minus, rank_minus)``.
    """
    _check_hermitian(A, tol)
    vals, w, v = _paired_eigh(A, tol)
    thr = _neg_threshold(vals, tol)
    pos = np.where(w > 0, w, 0.0)
    neg = np.where(w < -thr, -w, 0.0)
    plus = from_complex_adjoint((v * pos) @ v.conj().T)
    minus = from_complex_adjoint((v * neg) @ v.conj().T)
    # eigenvalues between -thr and 0 are numerical noise; keep them with the positive part
    small = np.where((w <= 0) & (w >= -thr), w, 0.0)
    plus = plus + from_complex_adjoint((v * small) @ v.conj().T)
    return plus, minus, int(np.sum(vals < -thr))


def sqrt_pd(A: QMatrix, tol: float = 1e-12) -> QMatrix:
    """Hermitian positive definite square root."""
    _check_hermitian(A, 1e-10)
    chi = complex_adjoint(A)
    chi = 0.5 * (chi + chi.conj().T)
    w, v = np.linalg.eigh(chi)
    if w.size and w.min() <= tol * max(1.0, float(np.abs(w).max())):
        raise NotPositive(f"smallest eigenvalue {w.min():.3e} is not positive")
    return from_complex_adjoint((v * np.sqrt(w)) @ v.conj().T)


def rank(A: QMatrix, tol: float = 1e-10) -> int:
    """Quaternionic rank: half the rank of the complex adjoint."""
    if A.entries.size == 0:
        return 0
    s = np.linalg.svd(complex_adjoint(A), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0])) // 2


def spectral_radius(A: QMatrix) -> float:
    if A.entries.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(complex_adjoint(A)))))


def solve_stein(A: QMatrix, Q: QMatrix, tol: float = 1e-14, max_terms: int = 1000) -> QMatrix:
    """Solve ``P - A* P A = Q`` by summing ``sum_n A*^n Q A^n``.

    Summation stops once a term is below ``tol * (1 - rho)`` in norm, where
    ``rho`` is the spectral radius of ``A``; the residual of the truncated
    sum is exactly the next term, so it is then below ``tol``.
    """
    if A.rows != A.cols or Q.shape != A.shape:
        raise ShapeMismatch(f"Stein equation with A {A.shape} and Q {Q.shape}")
    n = A.rows
    if n == 0:
        return QMatrix.zeros(0, 0)
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise NotConvergent(f"spectral radius {rho:.6g} is not below 1")
    chi_a = complex_adjoint(A)
    chi_ah = chi_a.conj().T
    term = complex_adjoint(Q)
    total = term.copy()
    bound = tol * (1.0 - rho) * max(1.0, float(np.linalg.norm(term, 2)))
    for _ in range(max_terms):
        term = chi_ah @ term @ chi_a
        total += term
        if np.linalg.norm(term, 2) < bound:
            P = from_complex_adjoint(total)
            return QMatrix(0.5 * (P.entries + P.H.entries))
    raise NotConvergent(f"Stein series did not converge within {max_terms} terms (rho={rho:.6g})")


def gram_schmidt_complete(T: QMatrix, tol: float = 1e-8) -> QMatrix:
    """Unit column ``h`` orthogonal to the columns of the isometry ``T``.

    ``T`` is ``(n+1) x n`` with ``T* T = I``.  Canonical basis vectors are
    tried in order; the first with a projection residual above ``1e-6`` is
    normalized, and ``h`` is right-multiplied by the unit quaternion that
    makes its last nonzero entry real and positive.
    """
    m, n = T.shape
    if m != n + 1:
        raise ShapeMismatch(f"completion needs an (n+1) x n matrix, got {T.shape}")
    if n and (T.H @ T - QMatrix.identity(n)).norm() > tol:
        raise NotIsometric("columns of T are not orthonormal")
    t = T.entries
    th = qadjoint(t)
    for k in range(m):
        e = np.zeros((m, 1, 4))
        e[k, 0, 0] = 1.0
        v = e - qmatmul(t, qmatmul(th, e)) if n else e
        if float(np.sqrt(np.sum(v * v))) > 1e-6:
            if n:  # one re-orthogonalization pass
                v = v - qmatmul(t, qmatmul(th, v))
            v = v / np.sqrt(np.sum(v * v))
            mods = qabs(v[:, 0])
            idx = np.nonzero(mods > 1e-12)[0][-1]
            phase = qconj(v[idx, 0]) / mods[idx]
            return QMatrix(qmul(v, phase))
    raise NotIsometric("no canonical basis vector has a nontrivial residual")  # pragma: no cover


def random_qmatrix(rng: np.random.Generator, rows: int, cols: int) -> QMatrix:
    return QMatrix(rng.standard_normal((rows, cols, 4)))


def random_unitary(rng: np.random.Generator, n: int) -> QMatrix:
    """Random quaternionic unitary from Gram-Schmidt on a Gaussian matrix."""
    g = rng.standard_normal((n, n, 4))
    cols = []
    for k in range(n):
        v = g[:, k : k + 1]
        for u in cols:
            v = v - qmatmul(u, qmatmul(qadjoint(u), v))
        v = v / np.sqrt(np.sum(v * v))
        cols.append(v)
    return QMatrix(np.concatenate(cols, axis=1) if cols else np.zeros((0, 0, 4)))
