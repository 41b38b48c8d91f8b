"""Realizations of generalized Schur and Caratheodory functions.

Schur type:  s(p) = D + p C * (I - pA)^{-*} B, so s_0 = D and s_k = C A^(k-1) B.
Caratheodory type:  phi(p) = 1/2 C * (I + pV) * (I - pV)^{-*} C^* J + (phi(0) - J phi(0)^* J)/2,
whose coefficients are phi_k = C V^k C^* J for k >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotCoisometry, RelationNotSatisfied, ShapeMismatch
from .kernels import check_signature
from .qlinalg import QMatrix, qadjoint, qmatmul, rank
from .quat import qabs
from .series import DEFAULT_DEGREE, LSeries


def _qm(x) -> QMatrix:
    return x if isinstance(x, QMatrix) else QMatrix.scalar(x)


@dataclass
class UnitaryColligation:
    A: QMatrix
    B: QMatrix
    C: QMatrix
    D: QMatrix
    H: QMatrix
    J1: QMatrix
    J2: QMatrix

    def __post_init__(self):
        for name in ("A", "B", "C", "D", "H", "J1", "J2"):
            setattr(self, name, _qm(getattr(self, name)))
        n = self.A.rows
        if self.A.cols != n or self.H.shape != (n, n):
            raise ShapeMismatch("A and H must be square of the same size")
        if self.B.rows != n or self.C.cols != n:
            raise ShapeMismatch(f"B {self.B.shape} / C {self.C.shape} do not fit A {self.A.shape}")
        if self.D.shape != (self.C.rows, self.B.cols):
            raise ShapeMismatch(f"D has shape {self.D.shape}, expected {(self.C.rows, self.B.cols)}")
        check_signature(self.J1)
        check_signature(self.J2)

    @property
    def block(self) -> QMatrix:
        return QMatrix.block([[self.A, self.B], [self.C, self.D]])

    def relation_residuals(self) -> dict:
        """Max-entry residual of the metric identity in each orientation that fits.

        ``standard``: M diag(H, J1) M^* = diag(H, J2);
        ``swapped``:  M diag(H, J2) M^* = diag(H, J1).
        """
        M = self.block
        out = {}
        n, rows, cols = self.A.rows, self.C.rows, self.B.cols
        for name, inner, outer in (("standard", self.J1, self.J2), ("swapped", self.J2, self.J1)):
            if inner.rows != cols or outer.rows != rows:
                continue
            zin = QMatrix.zeros(n, cols)
            zout = QMatrix.zeros(n, rows)
            left = QMatrix.block([[self.H, zin], [zin.H, inner]])
            right = QMatrix.block([[self.H, zout], [zout.H, outer]])
            out[name] = (M @ left @ M.H - right).max_abs()
        return out

    def orientation(self, tol: float = 1e-10) -> str:
        res = self.relation_residuals()
        scale = max(1.0, self.block.max_abs() ** 2 * max(1.0, self.H.max_abs()))
        ok = [k for k, v in res.items() if v <= tol * scale]
        if not ok:
            raise RelationNotSatisfied(f"metric identity fails: residuals {res}")
        return ok[0]

    def to_json(self) -> dict:
        return {k: getattr(self, k).to_json() for k in ("A", "B", "C", "D", "H", "J1", "J2")}

    @classmethod
    def from_json(cls, data) -> "UnitaryColligation":
        return cls(*(QMatrix.from_json(data[k]) for k in ("A", "B", "C", "D", "H", "J1", "J2")))


def _orbit(C: QMatrix, A: QMatrix, degree: int) -> np.ndarray:
    """``W_m = C A^m`` for ``m = 0..degree``."""
    out = np.zeros((degree + 1,) + C.entries.shape)
    w = C.entries
    for m in range(degree + 1):
        out[m] = w
        w = qmatmul(w, A.entries)
    return out


def eval_schur(col: UnitaryColligation, degree: int = DEFAULT_DEGREE) -> LSeries:
    """Coefficients ``s_0 = D`` and ``s_k = C A^(k-1) B``."""
    coeffs = np.zeros((degree + 1,) + col.D.entries.shape)
    coeffs[0] = col.D.entries
    # same arithmetic path as the interpolation multiplier: C (A^(k-1) B)
    v = col.B.entries
    for k in range(1, degree + 1):
        coeffs[k] = qmatmul(col.C.entries, v)
        v = qmatmul(col.A.entries, v)
    return LSeries(coeffs)


def _gram_grid(W: np.ndarray, H: np.ndarray) -> np.ndarray:
    """``R_mn = W_m H W_n^* - [m, n >= 1] W_{m-1} H W_{n-1}^*``."""
    WH = qmatmul(W, H)
    Wadj = qadjoint(W)
    full = qmatmul(WH[:, None], Wadj[None, :])
    out = full.copy()
    out[1:, 1:] -= full[:-1, :-1]
    return out


def check_ag_identity(col: UnitaryColligation, degree: int = 40, tol: float = 1e-10):
    """Compare both sides of ``J2 - s(p) J1 s(q)^* = C (I-pA)^{-*} (H - pH conj(q)) ...``.

    Returns ``(mismatch, orientation)``; with the swapped orientation the
    roles of ``J1`` and ``J2`` are exchanged on the left-hand side.
    """
    orientation = col.orientation(tol)
    inner, outer = (col.J1, col.J2) if orientation == "standard" else (col.J2, col.J1)
    s = eval_schur(col, degree).coeffs
    sJ = qmatmul(s, inner.entries)
    lhs = -qmatmul(sJ[:, None], qadjoint(s)[None, :])
    lhs[0, 0] += outer.entries
    rhs = _gram_grid(_orbit(col.C, col.A, degree), col.H.entries)
    return float(np.max(qabs(lhs - rhs))), orientation


def observability_index(C: QMatrix, A: QMatrix, tol: float = 1e-10) -> int:
    """Rank of the stacked matrix ``[C; CA; ...; CA^(n-1)]``."""
    n = A.rows
    if n == 0:
        return 0
    stacked = QMatrix(np.concatenate(list(_orbit(C, A, n - 1)), axis=0))
    return rank(stacked, tol)


def is_observable(C: QMatrix, A: QMatrix, tol: float = 1e-10) -> bool:
    return observability_index(C, A, tol) == A.rows


@dataclass
class CaraColligation:
    V: QMatrix
    C: QMatrix
    J: QMatrix
    phi0: QMatrix

    def __post_init__(self):
        for name in ("V", "C", "J", "phi0"):
            setattr(self, name, _qm(getattr(self, name)))
        if self.V.rows != self.V.cols or self.C.cols != self.V.rows:
            raise ShapeMismatch(f"V {self.V.shape} and C {self.C.shape} do not fit")
        if self.J.shape != (self.C.rows, self.C.rows) or self.phi0.shape != self.J.shape:
            raise ShapeMismatch("J and phi0 must be square of the size of C's rows")
        check_signature(self.J)

    def coisometry_defect(self) -> float:
        return (self.V @ self.V.H - QMatrix.identity(self.V.rows)).max_abs()

    def validate(self, tol: float = 1e-10):
        defect = self.coisometry_defect()
        if defect > tol:
            raise NotCoisometry(f"V V^* - I has entries of size {defect:.3e}")

    def to_json(self) -> dict:
        return {k: getattr(self, k).to_json() for k in ("V", "C", "J", "phi0")}

    @classmethod
    def from_json(cls, data) -> "CaraColligation":
        return cls(*(QMatrix.from_json(data[k]) for k in ("V", "C", "J", "phi0")))


def cara_constant(col: CaraColligation) -> QMatrix:
    """``phi(0) = C C^* J / 2 + (phi0 - J phi0^* J) / 2``."""
    C, J, f0 = col.C, col.J, col.phi0
    return (C @ C.H @ J) * 0.5 + (f0 - J @ f0.H @ J) * 0.5


def eval_cara(col: CaraColligation, degree: int = DEFAULT_DEGREE, tol: float = 1e-10) -> LSeries:
    col.validate(tol)
    f0 = cara_constant(col)
    # phi(0) J + J phi(0)^* must reproduce C C^*
    defect = (f0 @ col.J + col.J @ f0.H - col.C @ col.C.H).max_abs()
    if defect > 1e-10 * max(1.0, col.C.max_abs() ** 2):
        raise ArithmeticError(f"constant term lost its J-symmetric part ({defect:.3e})")
    coeffs = np.zeros((degree + 1,) + f0.entries.shape)
    coeffs[0] = f0.entries
    if degree:
        W = _orbit(col.C, col.V, degree)[1:]
        coeffs[1:] = qmatmul(qmatmul(W, col.C.H.entries), col.J.entries)
    return LSeries(coeffs)


def check_cara_kernel(col: CaraColligation, degree: int = 40, tol: float = 1e-10):
    """Residuals of both readings of the kernel identity for ``phi``.

    (i)  phi(p) J + J phi(q)^*    and    (ii) phi(p) J + J phi(q)^* J,
    each compared with ``C V^m V^*n C^* - [m, n >= 1] C V^(m-1) V^*(n-1) C^*``.
    Returns ``(residual_i, residual_ii)``.
    """
    phi = eval_cara(col, degree, tol).coeffs
    J = col.J.entries
    rhs = _gram_grid(_orbit(col.C, col.V, degree), QMatrix.identity(col.V.rows).entries)
    left = np.zeros_like(rhs)
    left[:, 0] += qmatmul(phi, J)
    right_i = qmatmul(J, qadjoint(phi))
    lhs_i = left.copy()
    lhs_i[0, :] += right_i
    lhs_ii = left.copy()
    lhs_ii[0, :] += qmatmul(right_i, J)
    return float(np.max(qabs(lhs_i - rhs))), float(np.max(qabs(lhs_ii - rhs)))


def colligation_from_interp(sol) -> UnitaryColligation:
    """The colligation ``(A, b, c, d)`` of an interpolation solution, with ``H = P^{-1}``."""
    one = QMatrix.identity(1)
    return UnitaryColligation(sol.A, sol.b, sol.c_row, QMatrix.scalar(sol.d), sol.P.inv(), one, one)
