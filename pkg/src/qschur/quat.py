"""Quaternion scalars, slice decomposition and 2-sphere geometry.

Quaternions are stored as real arrays whose last axis holds the
coefficients ``(w, x, y, z)`` of ``1, i, j, k``.  The :class:`Quaternion`
class is a thin immutable wrapper used at API boundaries; bulk arithmetic
goes through the ``q*`` array functions below, which broadcast over any
leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Union

import numpy as np

from .errors import RealPoint

ALGEBRAIC_TOL = 1e-12
SERIES_TOL = 1e-8

# Multiplication table of the basis 1, i, j, k: e_a * e_b = sign * e_c.
_TABLE = (
    (0, 0, 0, 1), (0, 1, 1, 1), (0, 2, 2, 1), (0, 3, 3, 1),
    (1, 0, 1, 1), (1, 1, 0, -1), (1, 2, 3, 1), (1, 3, 2, -1),
    (2, 0, 2, 1), (2, 1, 3, -1), (2, 2, 0, -1), (2, 3, 1, 1),
    (3, 0, 3, 1), (3, 1, 2, 1), (3, 2, 1, -1), (3, 3, 0, -1),
)


def qbilinear(op: Callable, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Lift a real bilinear ``op`` to quaternion arrays via the Hamilton table.

    ``op`` receives the real component arrays ``a[..., s]`` and ``b[..., t]``
    (last axis stripped) and must be bilinear; elementwise product, matrix
    product and convolution are the uses in this package.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    parts = [None, None, None, None]
    for s, t, c, sign in _TABLE:
        term = op(a[..., s], b[..., t])
        if parts[c] is None:
            parts[c] = term if sign > 0 else -term
        elif sign > 0:
            parts[c] = parts[c] + term
        else:
            parts[c] = parts[c] - term
    return np.stack(parts, axis=-1)


def qmul(a, b) -> np.ndarray:
    """Broadcast Hamilton product of quaternion arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        (
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ),
        axis=-1,
    )


def qconj(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a[..., 1:] *= -1.0
    return a


def qabs2(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.sum(a * a, axis=-1)


def qabs(a) -> np.ndarray:
    return np.sqrt(qabs2(a))


def qinv(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    n2 = qabs2(a)
    if np.any(n2 == 0.0):
        raise ZeroDivisionError("quaternion inverse of zero")
    return qconj(a) / n2[..., None]


def qreal(x) -> np.ndarray:
    """Embed real array ``x`` as quaternions."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (4,))
    out[..., 0] = x
    return out


def qslice(z, unit) -> np.ndarray:
    """Map complex ``z`` into the slice plane spanned by 1 and ``unit``."""
    z = np.asarray(z, dtype=complex)
    unit = np.asarray(unit, dtype=float)
    out = np.zeros(z.shape + (4,))
    out[..., 0] = z.real
    out[..., 1:] = z.imag[..., None] * unit[..., 1:]
    return out


def qsplit(a):
    """Return ``(re, im_norm, unit)`` arrays; ``unit`` is ``i`` where ``Im a = 0``."""
    a = np.asarray(a, dtype=float)
    re = a[..., 0]
    im = a[..., 1:]
    r = np.sqrt(np.sum(im * im, axis=-1))
    unit = np.zeros(a.shape)
    safe = r > 0
    unit[..., 1:] = np.where(safe[..., None], im / np.where(safe, r, 1.0)[..., None], 0.0)
    unit[..., 1] = np.where(safe, unit[..., 1], 1.0)
    return re, r, unit


QuaternionLike = Union["Quaternion", Iterable[float], float, int]


def as_qarray(q: QuaternionLike) -> np.ndarray:
    """Coerce a :class:`Quaternion`, real number or 4-sequence to a ``(4,)`` array."""
    if isinstance(q, Quaternion):
        return q.array
    if isinstance(q, (int, float, np.floating, np.integer)):
        return np.array([float(q), 0.0, 0.0, 0.0])
    arr = np.asarray(q, dtype=float)
    if arr.shape != (4,):
        raise ValueError(f"expected 4 quaternion components, got shape {arr.shape}")
    return arr


class Quaternion:
    """Immutable real quaternion ``w + x i + y j + z k``."""

    __slots__ = ("_a",)

    def __init__(self, w=0.0, x=0.0, y=0.0, z=0.0):
        a = np.array([w, x, y, z], dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, "_a", a)

    def __setattr__(self, name, value):
        raise AttributeError("Quaternion is immutable")

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        w, x, y, z = np.asarray(a, dtype=float).reshape(4)
        return cls(w, x, y, z)

    @property
    def array(self) -> np.ndarray:
        return self._a

    w = property(lambda self: float(self._a[0]))
    x = property(lambda self: float(self._a[1]))
    y = property(lambda self: float(self._a[2]))
    z = property(lambda self: float(self._a[3]))

    @property
    def real(self) -> float:
        return self.w

    @property
    def imag(self) -> "Quaternion":
        return Quaternion(0.0, self.x, self.y, self.z)

    def conj(self) -> "Quaternion":
        return Quaternion.from_array(qconj(self._a))

    def norm2(self) -> float:
        return float(qabs2(self._a))

    def __abs__(self) -> float:
        return math.sqrt(self.norm2())

    def inverse(self) -> "Quaternion":
        return inverse(self)

    def __neg__(self):
        return Quaternion.from_array(-self._a)

    def __add__(self, other):
        try:
            return Quaternion.from_array(self._a + as_qarray(other))
        except (TypeError, ValueError):
            return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        try:
            return Quaternion.from_array(self._a - as_qarray(other))
        except (TypeError, ValueError):
            return NotImplemented

    def __rsub__(self, other):
        return Quaternion.from_array(as_qarray(other) - self._a)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Quaternion.from_array(self._a * float(other))
        if isinstance(other, Quaternion):
            return Quaternion.from_array(qmul(self._a, other._a))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Quaternion.from_array(self._a * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Quaternion.from_array(self._a / float(other))
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = Quaternion(1.0)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            return bool(np.array_equal(self._a, as_qarray(other)))
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(tuple(self._a))

    def __iter__(self):
        return iter(self._a.tolist())

    def __repr__(self):
        return "Quaternion({:.17g}, {:.17g}, {:.17g}, {:.17g})".format(*self._a)

    def isclose(self, other, tol: float = ALGEBRAIC_TOL) -> bool:
        return bool(qabs(self._a - as_qarray(other)) <= tol)

    def to_json(self) -> list:
        return [float(v) for v in self._a]

    @classmethod
    def from_json(cls, data) -> "Quaternion":
        if len(data) != 4:
            raise ValueError("quaternion JSON must be [w, x, y, z]")
        return cls(*data)


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class ImagUnit:
    """A unit purely imaginary quaternion (an element of the sphere of imaginary units)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.x**2 + self.y**2 + self.z**2)
        if n == 0.0:
            raise ValueError("imaginary unit cannot be zero")
        if abs(n - 1.0) > 1e-12:
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)

    @classmethod
    def from_quaternion(cls, q: QuaternionLike) -> "ImagUnit":
        a = as_qarray(q)
        return cls(float(a[1]), float(a[2]), float(a[3]))

    @property
    def quaternion(self) -> Quaternion:
        return Quaternion(0.0, self.x, self.y, self.z)

    @property
    def array(self) -> np.ndarray:
        return np.array([0.0, self.x, self.y, self.z])

    def dot(self, other: "ImagUnit") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z


@dataclass(frozen=True)
class TwoSphere:
    """The 2-sphere ``{re + I*im_norm : I imaginary unit}``."""

    re: float
    im_norm: float

    def __post_init__(self):
        if not self.im_norm > 0:
            raise RealPoint("a 2-sphere needs a positive imaginary radius")

    @classmethod
    def of(cls, q: QuaternionLike) -> "TwoSphere":
        re, r, _ = qsplit(as_qarray(q))
        return cls(float(re), float(r))

    def point(self, unit) -> Quaternion:
        """The point of the sphere in direction ``unit``."""
        u = unit.array if isinstance(unit, ImagUnit) else as_qarray(unit)
        return Quaternion.from_array(qslice(complex(self.re, self.im_norm), u))

    @property
    def representative(self) -> Quaternion:
        return Quaternion(self.re, self.im_norm)

    @property
    def abs2(self) -> float:
        return self.re**2 + self.im_norm**2

    def to_json(self) -> dict:
        return {"re": self.re, "im": self.im_norm}


def mul(a: QuaternionLike, b: QuaternionLike) -> Quaternion:
    """Hamilton product ``a * b``."""
    return Quaternion.from_array(qmul(as_qarray(a), as_qarray(b)))


def inverse(q: QuaternionLike) -> Quaternion:
    a = as_qarray(q)
    n2 = float(qabs2(a))
    if n2 == 0.0:
        raise ZeroDivisionError("quaternion inverse of zero")
    return Quaternion.from_array(qconj(a) / n2)


def decompose(q: QuaternionLike, tol: float = 1e-14):
    """Split ``q = re + unit * im_norm``.

    Raises :class:`RealPoint` when the imaginary part is (numerically) zero,
    since the direction is then undefined.
    """
    re, r, unit = qsplit(as_qarray(q))
    if r < tol:
        raise RealPoint(f"{q!r} is real; its imaginary direction is undefined")
    return float(re), float(r), ImagUnit.from_quaternion(unit)


def same_sphere(p: QuaternionLike, q: QuaternionLike, tol: float = ALGEBRAIC_TOL) -> bool:
    pa, qa = as_qarray(p), as_qarray(q)
    return bool(
        abs(pa[0] - qa[0]) <= tol
        and abs(np.linalg.norm(pa[1:]) - np.linalg.norm(qa[1:])) <= tol
    )


# -- sampling ---------------------------------------------------------------


def random_quaternions(rng: np.random.Generator, size=(), scale: float | None = None):
    """Uniform samples from the box ``[-1, 1]^4``, optionally rescaled to norm ``scale``."""
    shape = (size,) if isinstance(size, int) else tuple(size)
    a = rng.uniform(-1.0, 1.0, shape + (4,))
    if scale is not None:
        a = a * (scale / qabs(a))[..., None]
    return a


def random_units(rng: np.random.Generator, size=()):
    """Unit imaginary quaternions from normalized Gaussian 3-vectors."""
    shape = (size,) if isinstance(size, int) else tuple(size)
    v = rng.standard_normal(shape + (3,))
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    while np.any(n == 0):  # pragma: no cover - measure zero
        v = rng.standard_normal(shape + (3,))
        n = np.linalg.norm(v, axis=-1, keepdims=True)
    out = np.zeros(shape + (4,))
    out[..., 1:] = v / n
    return out


def random_in_ball(rng: np.random.Generator, size=(), radius: float = 1.0):
    """Points distributed uniformly in norm up to ``radius`` with uniform direction."""
    shape = (size,) if isinstance(size, int) else tuple(size)
    d = rng.standard_normal(shape + (4,))
    d /= qabs(d)[..., None]
    r = radius * rng.uniform(0.0, 1.0, shape)
    return d * r[..., None]
