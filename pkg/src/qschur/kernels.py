"""Bivariate kernel series ``K(p, q) = sum_{m,n} p^m K_mn conj(q)^n``.

Schur-type and Caratheodory-type kernels are built from a coefficient
generator ``G_ab`` through the diagonal shift ``K_mn = G_mn + K_{m-1,n-1}``,
which is the coefficient form of star-multiplying by ``(1 - p conj(q))^{-*}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotSignature, PoleSphere, RadiusTooLarge, ShapeMismatch, VerificationError
from .qlinalg import QMatrix, neg_squares, qadjoint, qmatmul, spectral_split
from .quat import Quaternion, as_qarray, qabs, qbilinear, qconj, qinv, qmul, random_quaternions
from .series import LSeries, _slice_powers

DEFAULT_RADIUS = 0.7


def _as_matrix_series(f: LSeries) -> np.ndarray:
    return f.coeffs if f.is_matrix else f.coeffs[:, None, None, :]


def _as_qmatrix(m) -> QMatrix:
    if isinstance(m, QMatrix):
        return m
    return QMatrix.scalar(m)


def check_signature(J: QMatrix, tol: float = 1e-10) -> QMatrix:
    J = _as_qmatrix(J)
    if J.rows != J.cols:
        raise NotSignature(f"signature matrix must be square, got {J.shape}")
    if (J - J.H).max_abs() > tol:
        raise NotSignature("signature matrix is not Hermitian")
    if (J @ J - QMatrix.identity(J.rows)).max_abs() > tol:
        raise NotSignature("signature matrix does not square to the identity")
    return J


class KernelSeries:
    """Coefficient grid ``K_mn`` of shape ``(N+1, N+1, r, r, 4)``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=float)
        if c.ndim == 3:  # scalar kernel
            c = c[:, :, None, None, :]
        if c.ndim != 5 or c.shape[0] != c.shape[1] or c.shape[2] != c.shape[3]:
            raise ShapeMismatch(f"kernel coefficients need shape (N+1, N+1, r, r, 4), got {c.shape}")
        self.coeffs = c

    @classmethod
    def from_generator(cls, G: np.ndarray) -> "KernelSeries":
        """Accumulate ``K_mn = G_mn + K_{m-1,n-1}`` along diagonals."""
        K = np.array(G, dtype=float)
        for m in range(1, K.shape[0]):
            K[m, 1:] += K[m - 1, :-1]
        return cls(K)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def size(self) -> int:
        return self.coeffs.shape[2]

    def __getitem__(self, mn) -> QMatrix:
        m, n = mn
        return QMatrix(self.coeffs[m, n])

    def __neg__(self):
        return KernelSeries(-self.coeffs)

    def scale(self, x: float) -> "KernelSeries":
        return KernelSeries(self.coeffs * float(x))

    def hermitian_defect(self) -> float:
        """``max |K_mn - K_nm^*|``."""
        adj = qadjoint(np.swapaxes(self.coeffs, 0, 1))
        return float(np.max(qabs(self.coeffs - adj), initial=0.0))

    def shift_defect(self, G: np.ndarray) -> float:
        """``max |K_mn - K_{m-1,n-1} - G_mn|`` (with ``K_{-1,.} = 0``)."""
        prev = np.zeros_like(self.coeffs)
        prev[1:, 1:] = self.coeffs[:-1, :-1]
        return float(np.max(qabs(self.coeffs - prev - G), initial=0.0))

    def max_coeff(self) -> float:
        return float(np.max(qabs(self.coeffs), initial=0.0))

    def tail_bound(self, r: float) -> float:
        """Bound on the dropped terms when both arguments have modulus ``<= r``."""
        if r >= 1.0:
            return np.inf
        n1 = self.degree + 1
        return self.max_coeff() * (1.0 - (1.0 - r**n1) ** 2) / (1.0 - r) ** 2

    def eval_grid(self, ps, qs) -> np.ndarray:
        """``K(p_l, q_j)`` for all pairs; returns ``(L, M, r, r, 4)``."""
        ps = np.asarray(ps, dtype=float).reshape(-1, 4)
        qs = np.asarray(qs, dtype=float).reshape(-1, 4)
        up, vp, unit_p = _slice_powers(ps, self.degree)
        uq, vq, unit_q = _slice_powers(qs, self.degree)
        c = self.coeffs

        def s(x, y):
            return np.einsum("lm,mnabc,jn->ljabc", x, c, y, optimize=True)

        Up = unit_p[:, None, None, None, :]
        Uq = unit_q[None, :, None, None, :]
        # p^m = u + U v and conj(q)^n = u' - v' U'
        return s(up, uq) + qmul(Up, s(vp, uq)) - qmul(s(up, vq), Uq) - qmul(qmul(Up, s(vp, vq)), Uq)

    def __call__(self, p, q) -> QMatrix:
        return QMatrix(self.eval_grid(as_qarray(p), as_qarray(q))[0, 0])

    def to_json(self) -> dict:
        n = self.degree + 1
        return {
            "degree": self.degree,
            "coeffs": [[QMatrix(self.coeffs[m, k]).to_json() for k in range(n)] for m in range(n)],
        }

    @classmethod
    def from_json(cls, data) -> "KernelSeries":
        grid = [[QMatrix.from_json(c).entries for c in row] for row in data["coeffs"]]
        return cls(np.array(grid))


# -- concrete kernels -----------------------------------------------------------


def hardy_kernel_forms(p, q):
    """Both closed forms of ``sum_n p^n conj(q)^n`` on broadcast quaternion arrays."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    one = np.zeros(np.broadcast_shapes(p.shape, q.shape))
    one[..., 0] = 1.0
    p2 = qmul(p, p)
    qb = qconj(q)
    pb = qconj(p)
    den1 = one - 2.0 * q[..., :1] * p + qabs(q)[..., None] ** 2 * p2
    den2 = one - 2.0 * p[..., :1] * qb + qabs(p)[..., None] ** 2 * qmul(qb, qb)
    if np.any(qabs(den1) < 1e-14) or np.any(qabs(den2) < 1e-14):
        raise PoleSphere("p lies on the sphere [1/q]")
    k1 = qmul(qinv(den1), one - qmul(p, q))
    k2 = qmul(one - qmul(pb, qb), qinv(den2))
    return k1, k2


def hardy_kernel(p, q, tol: float = 1e-10) -> Quaternion:
    """Hardy-space reproducing kernel ``k(p, q)``; both closed forms are cross-checked."""
    k1, k2 = hardy_kernel_forms(as_qarray(p), as_qarray(q))
    if qabs(k1 - k2) > tol * max(1.0, float(qabs(k1))) ** 2:
        raise VerificationError("closed forms of the Hardy kernel disagree")
    return Quaternion.from_array(k1)


def hardy_series(degree: int = 64, size: int = 1) -> KernelSeries:
    c = np.zeros((degree + 1, degree + 1, size, size, 4))
    for n in range(degree + 1):
        c[n, n, :, :, 0] = np.eye(size)
    return KernelSeries(c)


def schur_generator(theta: LSeries, J1, J2) -> np.ndarray:
    t = _as_matrix_series(theta)
    J1 = check_signature(J1)
    J2 = check_signature(J2)
    if t.shape[2] != J1.rows or t.shape[1] != J2.rows:
        raise ShapeMismatch(f"Theta of shape {t.shape[1:3]} does not match J1 {J1.shape}, J2 {J2.shape}")
    tj = qmatmul(t, J1.entries)
    G = -qbilinear(lambda x, y: np.einsum("aij,bjk->abik", x, y), tj, qadjoint(t))
    G[0, 0] += J2.entries
    return G


def schur_kernel(theta: LSeries, J1=1.0, J2=1.0) -> KernelSeries:
    """``sum_l p^l (J2 - Theta(p) J1 Theta(q)^*) conj(q)^l`` as a coefficient grid."""
    return KernelSeries.from_generator(schur_generator(theta, J1, J2))


def cara_generator(phi: LSeries, J) -> np.ndarray:
    f = _as_matrix_series(phi)
    J = check_signature(J)
    if f.shape[1] != f.shape[2] or f.shape[1] != J.rows:
        raise ShapeMismatch(f"phi of shape {f.shape[1:3]} does not match J {J.shape}")
    n = f.shape[0]
    G = np.zeros((n, n) + f.shape[1:])
    G[:, 0] += qmatmul(f, J.entries)
    G[0, :] += qmatmul(J.entries, qadjoint(f))
    return G


def cara_kernel(phi: LSeries, J=1.0) -> KernelSeries:
    """``sum_l p^l (phi(p) J + J phi(q)^*) conj(q)^l`` as a coefficient grid."""
    return KernelSeries.from_generator(cara_generator(phi, J))


# -- Gram sampling -------------------------------------------------------------


@dataclass
class GramSample:
    points: np.ndarray
    vectors: np.ndarray
    gram: QMatrix
    tail_bound: float

    @property
    def neg_squares(self) -> int:
        return neg_squares(self.gram)


def gram_sample(K: KernelSeries, points, vectors=None, tol: float = 1e-8) -> GramSample:
    """Gram matrix with entries ``c_l^* K(z_l, z_j) c_j``.

    Without ``vectors`` every point is paired with each canonical basis
    vector, giving the full block Gram matrix.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 4)
    radius = float(np.max(qabs(pts), initial=0.0))
    bound = K.tail_bound(radius)
    if radius >= 1.0 or bound > tol:
        raise RadiusTooLarge(f"truncation bound {bound:.3e} at radius {radius:.4f} exceeds {tol:.1e}")
    r = K.size
    if vectors is None:
        eye = np.zeros((r, r, 4))
        eye[np.arange(r), np.arange(r), 0] = 1.0
        pts = np.repeat(pts, r, axis=0)
        vecs = np.tile(eye, (len(pts) // r, 1, 1))[:, :, None, :]
    else:
        vecs = np.asarray(vectors, dtype=float).reshape(len(pts), r, 1, 4)
    grid = K.eval_grid(pts, pts)  # (L, L, r, r, 4)
    left = qadjoint(vecs)[:, None]  # (L, 1, 1, r, 4)
    right = vecs[None, :]  # (1, L, r, 1, 4)
    g = qmatmul(qmatmul(left, grid), right)[:, :, 0, 0]
    g = 0.5 * (g + qconj(np.swapaxes(g, 0, 1)))
    return GramSample(pts, vecs, QMatrix(g), bound)


def _trial_sample(seed: int, trial: int, size: int, dim: int, radius: float):
    # independent streams keep a smaller sample a prefix of a larger one
    dirs = np.random.default_rng([seed, trial, 0]).standard_normal((size, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    rads = radius * np.random.default_rng([seed, trial, 1]).uniform(0.0, 1.0, size)
    vecs = random_quaternions(np.random.default_rng([seed, trial, 2]), (size, dim))
    return dirs * rads[:, None], vecs


@dataclass
class NegSquaresReport:
    kappa: int
    trials: int
    size: int
    counts: list = field(default_factory=list)
    witness: GramSample | None = None

    def summary(self) -> str:
        stable = sum(1 for c in self.counts if c == self.kappa)
        return f"kappa >= {self.kappa} observed, attained in {stable} of {self.trials} trials"


def kernel_neg_squares(
    K: KernelSeries,
    trials: int = 10,
    seed: int = 0,
    size: int = 20,
    radius: float = DEFAULT_RADIUS,
    tol: float = 1e-10,
) -> NegSquaresReport:
    """Sampled lower bound on the number of negative squares of ``K``."""
    counts = []
    best, witness = -1, None
    for t in range(trials):
        pts, vecs = _trial_sample(seed, t, size, K.size, radius)
        sample = gram_sample(K, pts, vecs)
        c = neg_squares(sample.gram, tol)
        counts.append(c)
        if c > best:
            best, witness = c, sample
    return NegSquaresReport(max(best, 0), trials, size, counts, witness)


def decompose_gram(G: QMatrix, tol: float = 1e-10):
    """``G = G_plus - G_minus`` with PSD parts; returns ``(G_plus, G_minus, rank_minus)``."""
    return spectral_split(G, tol)


# -- multipliers ----------------------------------------------------------------


def mult_adjoint_apply(phi: LSeries, K1: KernelSeries, q, d) -> LSeries:
    """Coefficients (in ``p``) of ``K1(., q) *_r phi(q)^* d``.

    ``phi`` is ``N x M`` (or scalar), ``K1`` is ``M x M`` and ``d`` is a
    vector in ``H^N``; the result is an ``M x 1`` matrix-valued series.
    """
    f = _as_matrix_series(phi)
    n_rows, m_cols = f.shape[1], f.shape[2]
    if K1.size != m_cols:
        raise ShapeMismatch(f"kernel of size {K1.size} does not match phi of shape {(n_rows, m_cols)}")
    d = np.asarray(d.entries if isinstance(d, QMatrix) else d, dtype=float).reshape(n_rows, 1, 4)
    deg = min(K1.degree, f.shape[0] - 1)
    kc = K1.coeffs[: deg + 1, : deg + 1]
    fadj = qadjoint(f[: deg + 1])  # (deg+1, M, N, 4)
    # right star product in conj(q): R_mn = sum_r K_{m r} phi*_{n-r}
    R = np.zeros((deg + 1, deg + 1, m_cols, n_rows, 4))
    for r in range(deg + 1):
        R[:, r:] += qmatmul(kc[:, r][:, None], fadj[None, : deg + 1 - r])
    u, v, unit = _slice_powers(as_qarray(q), deg)
    # conj(q)^n = u_n - v_n U
    s0 = np.einsum("mnabc,n->mabc", R, u)
    s1 = np.einsum("mnabc,n->mabc", R, v)
    vals = s0 - qmul(s1, unit)
    return LSeries(qmatmul(vals, d))
