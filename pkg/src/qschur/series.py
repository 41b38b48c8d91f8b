"""Truncated slice-regular power series and the star-product algebra.

A left series ``f(p) = sum_n p^n a_n`` stores its coefficients in an array
of shape ``(N + 1, 4)`` (quaternion coefficients) or ``(N + 1, rows, cols,
4)`` (matrix coefficients).  A right series ``g(q) = sum_n b_n conj(q)^n``
uses the same layout.  Binary operations truncate to the shorter operand.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import NonInvertibleConstantTerm, NotOrthogonal, ShapeMismatch
from .qlinalg import QMatrix, complex_adjoint, from_complex_adjoint, qadjoint, qmatmul
from .quat import (
    ALGEBRAIC_TOL,
    ImagUnit,
    Quaternion,
    as_qarray,
    qabs,
    qbilinear,
    qconj,
    qmul,
    qreal,
    qsplit,
)

DEFAULT_DEGREE = 64


def _as_coeff(c) -> np.ndarray:
    if isinstance(c, QMatrix):
        return c.entries
    if isinstance(c, np.ndarray) and c.ndim == 3:
        return c
    return as_qarray(c)


def _wrap(value: np.ndarray):
    return Quaternion.from_array(value) if value.ndim == 1 else QMatrix(value)


def _convolve(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Cauchy product ``c_k = sum_r a_r b_{k-r}`` of quaternion coefficient arrays."""
    a, b = a[:n], b[:n]
    if a.ndim == 2 and b.ndim == 2:
        return qbilinear(lambda x, y: np.convolve(x, y)[:n], a, b)
    if a.ndim == 4 and b.ndim == 4:
        def op(x, y):
            out = np.zeros((n, x.shape[1], y.shape[2]))
            for k in range(n):
                out[k:] += np.matmul(x[k], y[: n - k])
            return out
    else:
        # scalar coefficients act on matrix coefficients entrywise
        if a.ndim == 2:
            a = a[:, None, None, :]
        if b.ndim == 2:
            b = b[:, None, None, :]

        def op(x, y):
            shape = np.broadcast_shapes(x.shape[1:], y.shape[1:])
            out = np.zeros((n,) + shape)
            for k in range(n):
                out[k:] += x[k] * y[: n - k]
            return out
    return qbilinear(op, a, b)


def _slice_powers(points: np.ndarray, degree: int):
    """Return ``(u, v, unit)`` with ``p^n = u_n + unit * v_n`` for each point."""
    re, r, unit = qsplit(points)
    z = (re + 1j * r)[..., None]
    powers = np.concatenate(
        [np.ones(z.shape, dtype=complex), np.cumprod(np.broadcast_to(z, z.shape[:-1] + (degree,)), axis=-1)],
        axis=-1,
    )
    return powers.real, powers.imag, unit


class _Series:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        if isinstance(coeffs, np.ndarray) and coeffs.ndim in (2, 4) and coeffs.shape[-1] == 4:
            arr = np.array(coeffs, dtype=float)
        else:
            items = [_as_coeff(c) for c in coeffs]
            if not items:
                raise ShapeMismatch("a series needs at least one coefficient")
            shapes = {c.shape for c in items}
            if len(shapes) != 1:
                raise ShapeMismatch(f"inhomogeneous coefficient shapes {sorted(shapes)}")
            arr = np.array(items, dtype=float)
        self.coeffs = arr

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, degree: int = DEFAULT_DEGREE, shape=()):
        return cls(np.zeros((degree + 1,) + tuple(shape) + (4,)))

    @classmethod
    def constant(cls, c, degree: int = DEFAULT_DEGREE):
        c = _as_coeff(c)
        out = np.zeros((degree + 1,) + c.shape)
        out[0] = c
        return cls(out)

    @classmethod
    def monomial(cls, n: int, c=1.0, degree: int = DEFAULT_DEGREE):
        c = _as_coeff(c)
        out = np.zeros((degree + 1,) + c.shape)
        if n <= degree:
            out[n] = c
        return cls(out)

    @classmethod
    def from_real(cls, values):
        return cls(qreal(np.asarray(values, dtype=float)))

    # -- protocol ----------------------------------------------------------
    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def is_matrix(self) -> bool:
        return self.coeffs.ndim == 4

    @property
    def shape(self):
        return self.coeffs.shape[1:-1]

    def __len__(self):
        return self.coeffs.shape[0]

    def __getitem__(self, n: int):
        return _wrap(self.coeffs[n])

    def __repr__(self):
        kind = f"matrix {self.shape}" if self.is_matrix else "scalar"
        return f"{type(self).__name__}(degree={self.degree}, {kind})"

    def truncate(self, degree: int):
        if degree > self.degree:
            pad = np.zeros((degree - self.degree,) + self.coeffs.shape[1:])
            return type(self)(np.concatenate([self.coeffs, pad]))
        return type(self)(self.coeffs[: degree + 1])

    def _binary(self, other, sign):
        if not isinstance(other, type(self)):
            return NotImplemented
        n = min(len(self), len(other))
        return type(self)(self.coeffs[:n] + sign * other.coeffs[:n])

    def __add__(self, other):
        return self._binary(other, 1.0)

    def __sub__(self, other):
        return self._binary(other, -1.0)

    def __neg__(self):
        return type(self)(-self.coeffs)

    def scale(self, x: float):
        return type(self)(self.coeffs * float(x))

    def coeff_norms(self) -> np.ndarray:
        """Max entry modulus of each coefficient."""
        m = qabs(self.coeffs)
        return m.reshape(len(self), -1).max(axis=1) if self.is_matrix else m

    def max_coeff(self) -> float:
        return float(self.coeff_norms().max())

    def tail_bound(self, r: float, bound: float | None = None) -> float:
        """``M r^(N+1) / (1 - r)``: truncation error bound at ``|p| = r < 1``.

        ``M`` defaults to the largest stored coefficient modulus.
        """
        if r >= 1.0:
            return math.inf
        m = self.max_coeff() if bound is None else bound
        return m * r ** (self.degree + 1) / (1.0 - r)

    def allclose(self, other, tol: float = ALGEBRAIC_TOL) -> bool:
        n = min(len(self), len(other))
        return bool(np.max(qabs(self.coeffs[:n] - other.coeffs[:n]), initial=0.0) <= tol)

    def to_json(self) -> dict:
        if self.is_matrix:
            coeffs = [QMatrix(c).to_json() for c in self.coeffs]
        else:
            coeffs = [[float(v) for v in c] for c in self.coeffs]
        return {"degree": self.degree, "coeffs": coeffs}

    @classmethod
    def from_json(cls, data):
        coeffs = data["coeffs"]
        items = [QMatrix.from_json(c) if isinstance(c, dict) else as_qarray(c) for c in coeffs]
        out = cls(items)
        if "degree" in data:
            out = out.truncate(int(data["degree"]))
        return out


class LSeries(_Series):
    """Left slice-regular series ``f(p) = sum_n p^n a_n``."""

    __slots__ = ()

    def eval_many(self, points) -> np.ndarray:
        """Evaluate at an array of quaternions of shape ``(..., 4)``."""
        points = np.asarray(points, dtype=float)
        u, v, unit = _slice_powers(points, self.degree)
        c = self.coeffs
        flat = c.reshape(len(self), -1)
        s0 = (u @ flat).reshape(u.shape[:-1] + c.shape[1:])
        s1 = (v @ flat).reshape(u.shape[:-1] + c.shape[1:])
        if self.is_matrix:
            unit = unit[..., None, None, :]
        return s0 + qmul(unit, s1)

    def __call__(self, p):
        return _wrap(self.eval_many(as_qarray(p)))

    def __mul__(self, c):
        """Right multiplication of every coefficient by a constant."""
        if isinstance(c, (int, float, np.floating, np.integer)):
            return LSeries(self.coeffs * float(c))
        if isinstance(c, Quaternion):
            return LSeries(qmul(self.coeffs, c.array))
        if isinstance(c, QMatrix):
            return LSeries(qmatmul(self.coeffs, c.entries))
        return NotImplemented

    def lmul(self, c) -> "LSeries":
        """Left multiplication of every coefficient by a constant (``c * f``)."""
        if isinstance(c, QMatrix):
            return LSeries(qmatmul(c.entries, self.coeffs))
        return LSeries(qmul(as_qarray(c), self.coeffs))

    def star(self, other: "LSeries") -> "LSeries":
        return star_mul(self, other)

    def shift_up(self, k: int = 1) -> "LSeries":
        """Multiply by ``p^k`` (keeping the truncation degree)."""
        out = np.zeros_like(self.coeffs)
        if k <= self.degree:
            out[k:] = self.coeffs[: len(self) - k]
        return LSeries(out)


class RSeries(_Series):
    """Right slice-regular series ``g(q) = sum_n b_n conj(q)^n``."""

    __slots__ = ()

    def eval_many(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        u, v, unit = _slice_powers(points, self.degree)
        c = self.coeffs
        flat = c.reshape(len(self), -1)
        s0 = (u @ flat).reshape(u.shape[:-1] + c.shape[1:])
        s1 = (v @ flat).reshape(u.shape[:-1] + c.shape[1:])
        if self.is_matrix:
            unit = unit[..., None, None, :]
        return s0 - qmul(s1, unit)

    def __call__(self, q):
        return _wrap(self.eval_many(as_qarray(q)))

    def star(self, other: "RSeries") -> "RSeries":
        return star_mul_right(self, other)


# -- products and inverses -----------------------------------------------------


def _check_compatible(f, g):
    if f.is_matrix and g.is_matrix and f.shape[1] != g.shape[0]:
        raise ShapeMismatch(f"cannot star-multiply {f.shape} by {g.shape}")


def star_mul(f: LSeries, g: LSeries) -> LSeries:
    """Left star product: coefficients ``C_n = sum_r A_r B_{n-r}``."""
    _check_compatible(f, g)
    n = min(len(f), len(g))
    return LSeries(_convolve(f.coeffs, g.coeffs, n))


def star_mul_right(f: RSeries, g: RSeries) -> RSeries:
    """Right star product in ``conj(q)``; the coefficient rule is the same convolution."""
    _check_compatible(f, g)
    n = min(len(f), len(g))
    return RSeries(_convolve(f.coeffs, g.coeffs, n))


def conj_series(f: LSeries) -> LSeries:
    """``f^c``: conjugate every coefficient (scalar series only)."""
    if f.is_matrix:
        raise ShapeMismatch("conj_series is for scalar series; use adjoint_series")
    return LSeries(qconj(f.coeffs))


def adjoint_series(f: LSeries) -> RSeries:
    """``f(q)^*`` as a right series in ``conj(q)``: coefficients ``A_n^*``."""
    if f.is_matrix:
        return RSeries(qadjoint(f.coeffs))
    return RSeries(qconj(f.coeffs))


def symmetrize(f: LSeries, tol: float = ALGEBRAIC_TOL) -> LSeries:
    """``f^s = f^c * f``, whose coefficients are real."""
    s = star_mul(conj_series(f), f)
    scale = max(1.0, f.max_coeff() ** 2)
    imag = float(np.max(np.abs(s.coeffs[:, 1:])))
    if imag > tol * scale * len(f):
        raise ArithmeticError(f"symmetrized series has imaginary part {imag:.3e}")
    out = np.zeros_like(s.coeffs)
    out[:, 0] = s.coeffs[:, 0]
    return LSeries(out)


def real_reciprocal(c: np.ndarray) -> np.ndarray:
    """Reciprocal of a real power series by the usual recursion."""
    c = np.asarray(c, dtype=float)
    if abs(c[0]) < 1e-14:
        raise NonInvertibleConstantTerm("constant term is zero")
    r = np.zeros_like(c)
    r[0] = 1.0 / c[0]
    for n in range(1, len(c)):
        r[n] = -np.dot(c[1 : n + 1], r[n - 1 :: -1][:n]) / c[0]
    return r


def star_inv(f: LSeries) -> LSeries:
    """Star reciprocal ``f^{-*}``.

    Scalar series use ``(f^s)^{-1} f^c`` with the real series inverted by
    recursion; matrix series solve ``f * g = I`` coefficient by coefficient.
    """
    if not f.is_matrix:
        if qabs(f.coeffs[0]) < 1e-14:
            raise NonInvertibleConstantTerm("constant coefficient vanishes")
        s = symmetrize(f)
        recip = real_reciprocal(s.coeffs[:, 0])
        return LSeries(_convolve(qreal(recip), conj_series(f).coeffs, len(f)))
    rows, cols = f.shape
    if rows != cols:
        raise NonInvertibleConstantTerm("non-square constant coefficient")
    chi0 = complex_adjoint(f.coeffs[0])
    if np.linalg.cond(chi0) > 1e13:
        raise NonInvertibleConstantTerm("constant coefficient is singular")
    a0inv = from_complex_adjoint(np.linalg.inv(chi0)).entries
    g = np.zeros_like(f.coeffs)
    g[0] = a0inv
    for n in range(1, len(f)):
        acc = qmatmul(f.coeffs[1 : n + 1], g[n - 1 :: -1][:n]).sum(axis=0)
        g[n] = -qmatmul(a0inv, acc)
    return LSeries(g)


def star_power(f: LSeries, m: int) -> LSeries:
    if m < 0:
        raise ValueError("star power needs m >= 0")
    if f.is_matrix:
        out = LSeries.constant(QMatrix.identity(f.shape[0]), f.degree)
    else:
        out = LSeries.constant(1.0, f.degree)
    for _ in range(m):
        out = star_mul(out, f)
    return out


def backward_shift(f: LSeries) -> LSeries:
    """``p^{-1} (f(p) - f(0))``: drop the constant term and shift down."""
    if f.degree == 0:
        return LSeries(np.zeros_like(f.coeffs))
    return LSeries(f.coeffs[1:])


def is_slice_preserving(f: LSeries, tol: float = ALGEBRAIC_TOL) -> bool:
    """True iff all coefficients are real.

    For a power series centred at the origin, mapping every slice plane into
    itself is equivalent to having real Taylor coefficients.
    """
    return bool(np.max(np.abs(f.coeffs[..., 1:]), initial=0.0) <= tol)


# -- slices ---------------------------------------------------------------


def _split_basis(I, J):
    Iu = I if isinstance(I, ImagUnit) else ImagUnit.from_quaternion(I)
    Ju = J if isinstance(J, ImagUnit) else ImagUnit.from_quaternion(J)
    if abs(Iu.dot(Ju)) > ALGEBRAIC_TOL:
        raise NotOrthogonal(f"J is not orthogonal to I (dot = {Iu.dot(Ju):.3e})")
    ia, ja = Iu.array, Ju.array
    return ia, ja, qmul(ia, ja)


def restrict_split(f: LSeries, I, J):
    """Write each coefficient as ``alpha + beta J`` with ``alpha, beta`` in ``C_I``.

    Returns complex arrays ``(F, G)`` of the coordinates of ``alpha_n`` and
    ``beta_n`` in the basis ``(1, I)``, so ``f_I(z) = F(z) + G(z) J``.
    """
    if f.is_matrix:
        raise ShapeMismatch("restrict_split is for scalar series")
    ia, ja, ija = _split_basis(I, J)
    c = f.coeffs
    F = c[:, 0] + 1j * (c @ ia)
    G = (c @ ja) + 1j * (c @ ija)
    return F, G


def assemble_split(F, G, I, J) -> LSeries:
    """Inverse of :func:`restrict_split`."""
    ia, ja, ija = _split_basis(I, J)
    F = np.asarray(F, dtype=complex)
    G = np.asarray(G, dtype=complex)
    coeffs = (
        np.outer(F.real, [1.0, 0, 0, 0])
        + np.outer(F.imag, ia)
        + np.outer(G.real, ja)
        + np.outer(G.imag, ija)
    )
    return LSeries(coeffs)


def ext_from_slice(f: Callable, p, I) -> Quaternion:
    """Extend slice data ``f`` on ``C_I`` to the point ``p`` (Representation Formula).

    ``f`` is called with quaternions of ``C_I`` and must return quaternions.
    """
    pa = as_qarray(p)
    ia = I.array if isinstance(I, ImagUnit) else as_qarray(I)
    re, r, unit = qsplit(pa)
    if r < 1e-14:
        return Quaternion.from_array(as_qarray(f(Quaternion(float(re)))))
    z = Quaternion(float(re)) + Quaternion.from_array(ia) * float(r)
    zb = z.conj()
    fz, fzb = as_qarray(f(z)), as_qarray(f(zb))
    out = 0.5 * (fz + fzb) + 0.5 * qmul(qmul(unit, ia), fzb - fz)
    return Quaternion.from_array(out)
