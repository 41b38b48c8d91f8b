"""Hardy-space interpolation with vanishing conditions at points and spheres.

Given points ``a_1..a_N`` and spheres ``[c_1]..[c_M]`` in the unit ball,
build a Blaschke multiplier ``B`` such that the functions vanishing at the
points and on the spheres are exactly ``B * g``.  ``B`` comes from a
realization: the Stein Gram matrix ``P`` yields an isometry ``T`` that one
extra column ``h`` completes to a unitary, giving

    B(p) = d + sum_n p^(n+1) c A^n b.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NodeOutsideBall, NotPD, OverlappingSpheres, VerificationError
from .kernels import schur_kernel
from .qlinalg import QMatrix, gram_schmidt_complete, herm_eigen, qmatmul, solve_stein, sqrt_pd
from .quat import ALGEBRAIC_TOL, Quaternion, TwoSphere, as_qarray, qabs, qconj, random_units, same_sphere
from .series import DEFAULT_DEGREE, LSeries

BOUNDARY_MARGIN = 1e-6


@dataclass(frozen=True)
class InterpProblem:
    points: tuple = ()
    spheres: tuple = ()

    def __post_init__(self):
        pts = tuple(Quaternion.from_array(as_qarray(p)) for p in self.points)
        sph = tuple(s if isinstance(s, TwoSphere) else TwoSphere(*s) for s in self.spheres)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "spheres", sph)

    def validate(self):
        labelled = [(f"point {k} {p.to_json()}", p) for k, p in enumerate(self.points)]
        labelled += [(f"sphere {k} (re={s.re}, im={s.im_norm})", s.representative) for k, s in enumerate(self.spheres)]
        for label, q in labelled:
            if abs(q) >= 1.0 - BOUNDARY_MARGIN:
                raise NodeOutsideBall(f"{label} has modulus {abs(q):.8f}, too close to or outside the unit sphere")
        for i in range(len(labelled)):
            for j in range(i + 1, len(labelled)):
                if same_sphere(labelled[i][1], labelled[j][1], ALGEBRAIC_TOL):
                    raise OverlappingSpheres(f"{labelled[i][0]} and {labelled[j][0]} lie on the same sphere")

    @property
    def size(self) -> int:
        return len(self.points) + 2 * len(self.spheres)

    def to_json(self) -> dict:
        return {"points": [p.to_json() for p in self.points], "spheres": [s.to_json() for s in self.spheres]}

    @classmethod
    def from_json(cls, data) -> "InterpProblem":
        spheres = [TwoSphere(float(s["re"]), float(s["im"])) for s in data.get("spheres", [])]
        return cls(tuple(data.get("points", [])), tuple(spheres))


def build_node_data(prob: InterpProblem):
    """Diagonal node matrix ``A`` and the all-ones row ``c``.

    Point nodes enter ``A`` conjugated: with ``P`` the Stein solution, the
    multiplier ``d + sum p^(n+1) c A^n b`` vanishes at ``conj`` of each
    diagonal entry.  Spheres contribute the pair ``c_k, conj(c_k)``, with
    ``c_k = re + i * im``.
    """
    prob.validate()
    nodes = [qconj(p.array) for p in prob.points]
    for s in prob.spheres:
        c = s.representative.array
        nodes += [c, qconj(c)]
    A = QMatrix.diag(nodes)
    c_row = QMatrix(np.tile([1.0, 0.0, 0.0, 0.0], (1, len(nodes), 1)))
    return A, c_row


def gram_condition(P: QMatrix) -> float:
    """Spectral condition number of the Gram matrix.

    The isometry and unitarity residuals of the solution cannot be expected
    below roughly ``eps * gram_condition(P)`` in double precision.
    """
    if P.rows == 0:
        return 1.0
    vals = herm_eigen(P).all_values
    return float(vals[-1] / vals[0])


def gram_P(A: QMatrix, c_row: QMatrix, tol: float = 1e-14) -> QMatrix:
    """Solution of ``P - A* P A = c* c``; must be positive definite."""
    P = solve_stein(A, c_row.H @ c_row, tol)
    if P.rows:
        eig = herm_eigen(P)
        if eig.all_values[0] <= 1e-12 * max(1.0, eig.all_values[-1]):
            raise NotPD(f"Gram matrix is singular (smallest eigenvalue {eig.all_values[0]:.3e}); nodes repeat")
    return P


@dataclass
class Multiplier:
    b: QMatrix
    d: Quaternion
    B: LSeries
    T: QMatrix
    h: QMatrix


def multiplier_coeffs(A: QMatrix, c_row: QMatrix, b: QMatrix, d, degree: int) -> np.ndarray:
    """``b_0 = d``, ``b_{n+1} = c A^n b``."""
    out = np.zeros((degree + 1, 4))
    out[0] = as_qarray(d)
    v = b.entries
    for n in range(1, degree + 1):
        out[n] = qmatmul(c_row.entries, v)[0, 0]
        v = qmatmul(A.entries, v)
    return out


def build_multiplier(A: QMatrix, c_row: QMatrix, P: QMatrix, degree: int = DEFAULT_DEGREE) -> Multiplier:
    n = A.rows
    if n == 0:
        T = QMatrix.zeros(1, 0)
        h = QMatrix.column([1.0])
        b = QMatrix.zeros(0, 1)
        d = Quaternion(1.0)
        return Multiplier(b, d, LSeries.constant(1.0, degree), T, h)
    S = sqrt_pd(P)
    S_inv = S.inv()
    T = QMatrix.block([[S @ A @ S_inv], [c_row @ S_inv]])
    h = gram_schmidt_complete(T)
    b = S_inv @ QMatrix(h.entries[:n])
    d = Quaternion.from_array(h.entries[n, 0])
    return Multiplier(b, d, LSeries(multiplier_coeffs(A, c_row, b, d, degree)), T, h)


def check_bschurmult(A: QMatrix, c_row: QMatrix, P: QMatrix, B: LSeries, degree: int = 40) -> float:
    """Max coefficient mismatch between the Schur kernel of ``B`` and ``c A^m P^{-1} A*^n c*``."""
    deg = min(degree, B.degree)
    K = schur_kernel(B.truncate(deg))
    n = A.rows
    rhs = np.zeros((deg + 1, deg + 1, 4))
    if n:
        rows = np.zeros((deg + 1, 1, n, 4))
        w = c_row.entries
        for m in range(deg + 1):
            rows[m] = w
            w = qmatmul(w, A.entries)
        left = qmatmul(rows, P.inv().entries)  # (deg+1, 1, n, 4)
        radj = qconj(np.swapaxes(rows, -2, -3))  # (deg+1, n, 1, 4)
        rhs = qmatmul(left[:, None], radj[None, :])[:, :, 0, 0]
    return float(np.max(qabs(K.coeffs[:, :, 0, 0] - rhs)))


@dataclass
class InterpSolution:
    problem: InterpProblem
    A: QMatrix
    c_row: QMatrix
    P: QMatrix
    b: QMatrix
    d: Quaternion
    B: LSeries
    T: QMatrix
    h: QMatrix
    diagnostics: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.diagnostics[k] <= self.tolerances[k] for k in self.tolerances)

    def failures(self) -> list:
        return [k for k in self.tolerances if not self.diagnostics[k] <= self.tolerances[k]]

    def to_json(self) -> dict:
        return {
            "problem": self.problem.to_json(),
            "A": self.A.to_json(),
            "c": self.c_row.to_json(),
            "P": self.P.to_json(),
            "b": self.b.to_json(),
            "d": self.d.to_json(),
            "B": self.B.to_json(),
            "diagnostics": dict(self.diagnostics),
            "tolerances": dict(self.tolerances),
        }


def zero_set_samples(prob: InterpProblem, per_sphere: int = 10, seed: int = 0) -> np.ndarray:
    """The prescribed points followed by ``per_sphere`` random points of each sphere."""
    pts = [p.array for p in prob.points]
    rng = np.random.default_rng(seed)
    for s in prob.spheres:
        for u in random_units(rng, per_sphere):
            pts.append(s.point(u).array)
    return np.array(pts).reshape(-1, 4)


def solve(
    prob: InterpProblem,
    degree: int = DEFAULT_DEGREE,
    tol: float = 1e-8,
    kernel_degree: int = 40,
    seed: int = 0,
    verify: bool = True,
) -> InterpSolution:
    A, c_row = build_node_data(prob)
    P = gram_P(A, c_row)
    m = build_multiplier(A, c_row, P, degree)
    n = A.rows
    diag = {}
    diag["stein_residual"] = (P - A.H @ P @ A - c_row.H @ c_row).max_abs()
    diag["gram_condition"] = gram_condition(P)
    diag["isometry_residual"] = (m.T.H @ m.T - QMatrix.identity(n)).max_abs() if n else 0.0
    U = QMatrix.block([[m.T, m.h]]) if n else m.h
    diag["unitary_residual"] = (U @ U.H - QMatrix.identity(n + 1)).max_abs()
    samples = zero_set_samples(prob, seed=seed)
    if len(samples):
        vals = qabs(m.B.eval_many(samples))
        radius = float(np.max(qabs(samples)))
        diag["node_residual"] = float(np.max(vals))
        # |coefficients| <= 1 for a Schur multiplier with unit H2 norm
        diag["node_tail_bound"] = m.B.tail_bound(radius, bound=1.0)
    else:
        diag["node_residual"] = 0.0
        diag["node_tail_bound"] = 0.0
    diag["bschurmult_mismatch"] = check_bschurmult(A, c_row, P, m.B, kernel_degree)
    tols = {
        "stein_residual": 1e-10,
        "isometry_residual": 1e-10,
        "unitary_residual": 1e-10,
        "node_residual": diag["node_tail_bound"] + tol,
        "bschurmult_mismatch": tol,
    }
    sol = InterpSolution(prob, A, c_row, P, m.b, m.d, m.B, m.T, m.h, diag, tols)
    if verify and not sol.passed:
        raise VerificationError("interpolation self-check failed: " + ", ".join(sol.failures()))
    return sol
