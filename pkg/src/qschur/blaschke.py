"""Blaschke factors at points and at spheres, and finite Blaschke products."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DuplicateSphere, NotInBall, PlacementBreakdown, PoleSphere, ZeroPoint
from .quat import Quaternion, TwoSphere, as_qarray, qabs, qconj, qinv, qmul, same_sphere
from .series import DEFAULT_DEGREE, LSeries, real_reciprocal, star_mul, star_power

__all__ = [
    "PointZero",
    "SphereZero",
    "factor_point",
    "factor_point_closed",
    "factor_sphere",
    "product_build",
    "BlaschkeProduct",
]


@dataclass(frozen=True)
class PointZero:
    a: Quaternion
    mult: int = 1

    def __post_init__(self):
        object.__setattr__(self, "a", Quaternion.from_array(as_qarray(self.a)))
        if self.mult < 1:
            raise ValueError("multiplicity must be at least 1")
        if abs(self.a) >= 1.0:
            raise NotInBall(f"zero {self.a!r} is not in the open unit ball")


@dataclass(frozen=True)
class SphereZero:
    sphere: TwoSphere
    mult: int = 1

    def __post_init__(self):
        if self.mult < 1:
            raise ValueError("multiplicity must be at least 1")
        if self.sphere.abs2 >= 1.0:
            raise NotInBall(f"sphere {self.sphere} is not inside the unit ball")


def _check_point(a: np.ndarray):
    r = float(qabs(a))
    if r == 0.0:
        raise ZeroPoint("a Blaschke factor needs a nonzero point")
    if r >= 1.0:
        raise NotInBall(f"|a| = {r} is not below 1")
    return r


def factor_point(a, degree: int = DEFAULT_DEGREE) -> LSeries:
    """Series of the Blaschke factor at ``a``.

    ``B_a(p) = |a| + sum_{n>=0} p^{n+1} conj(a)^{n+1} (|a| - 1/|a|)``.
    """
    a = as_qarray(a)
    r = _check_point(a)
    coeffs = np.zeros((degree + 1, 4))
    coeffs[0, 0] = r
    ab = qconj(a)
    power = ab.copy()
    for n in range(1, degree + 1):
        coeffs[n] = power * (r - 1.0 / r)
        power = qmul(power, ab)
    return LSeries(coeffs)


def factor_point_closed(a, p) -> Quaternion:
    """Blaschke factor at ``a`` evaluated with pointwise operations only.

    Uses ``p~ = lc(p)^{-1} p lc(p)`` with ``lc(p) = 1 - p a`` and returns
    ``(1 - p~ conj(a))^{-1} (a - p~) conj(a)/|a|``.
    """
    a = as_qarray(a)
    p = as_qarray(p)
    r = _check_point(a)
    one = np.array([1.0, 0.0, 0.0, 0.0])
    # 1 - 2 Re(a) p + |a|^2 p^2 vanishes exactly on the pole sphere [1/conj(a)]
    p2 = qmul(p, p)
    sym = one - 2.0 * a[0] * p + r * r * p2
    if qabs(sym) < 1e-14:
        raise PoleSphere(f"{p} lies on the pole sphere of B_a")
    lc = one - qmul(p, a)
    pt = qmul(qmul(qinv(lc), p), lc)
    ab = qconj(a)
    out = qmul(qmul(qinv(one - qmul(pt, ab)), a - pt), ab / r)
    return Quaternion.from_array(out)


def _sphere_coeffs(re: float, abs2: float, degree: int) -> np.ndarray:
    den = np.zeros(degree + 1)
    num = np.zeros(degree + 1)
    den[0], num[0] = 1.0, abs2
    if degree >= 1:
        den[1] = num[1] = -2.0 * re
    if degree >= 2:
        den[2], num[2] = abs2, 1.0
    return np.convolve(real_reciprocal(den), num)[: degree + 1]


def factor_sphere(s, degree: int = DEFAULT_DEGREE) -> LSeries:
    """Real-coefficient Blaschke factor vanishing on the 2-sphere ``s``.

    ``s`` may be a :class:`TwoSphere` or any quaternion representing it.
    """
    if not isinstance(s, TwoSphere):
        s = TwoSphere.of(s)
    if s.abs2 >= 1.0:
        raise NotInBall(f"sphere {s} is not inside the unit ball")
    return LSeries.from_real(_sphere_coeffs(s.re, s.abs2, degree))


@dataclass
class BlaschkeProduct:
    """Result of :func:`product_build`: the series plus the placed points."""

    series: LSeries
    placements: list = field(default_factory=list)  # (prescribed a_k, placed a'_k)
    origin_mult: int = 0

    def __call__(self, p):
        return self.series(p)


def product_build(points=(), spheres=(), degree: int = DEFAULT_DEGREE) -> BlaschkeProduct:
    """Finite Blaschke product with prescribed point and sphere zeros.

    Sphere factors (real coefficients) are multiplied first, together with a
    monomial ``p^mu`` for zeros at the origin.  Point factors are then
    appended one at a time in input order: the factor for ``a_{k+1}`` is
    placed at ``B_k(a)^{-1} a B_k(a)`` so that ``a_{k+1}`` itself is a zero
    of the running product.
    """
    points = [z if isinstance(z, PointZero) else PointZero(*z) for z in points]
    spheres = [z if isinstance(z, SphereZero) else SphereZero(*z) for z in spheres]

    reps = [(f"point {z.a!r}", z.a) for z in points if abs(z.a) > 0]
    reps += [(f"sphere {z.sphere}", z.sphere.representative) for z in spheres]
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if same_sphere(reps[i][1], reps[j][1]):
                raise DuplicateSphere(f"{reps[i][0]} and {reps[j][0]} share a sphere")
    if sum(1 for z in points if abs(z.a) == 0) > 1:
        raise DuplicateSphere("origin listed more than once")

    coeffs = np.zeros(degree + 1)
    coeffs[0] = 1.0
    for z in spheres:
        f = _sphere_coeffs(z.sphere.re, z.sphere.abs2, degree)
        for _ in range(z.mult):
            coeffs = np.convolve(coeffs, f)[: degree + 1]
    origin = sum(z.mult for z in points if abs(z.a) == 0)
    if origin:
        coeffs = np.concatenate([np.zeros(origin), coeffs])[: degree + 1]
    current = LSeries.from_real(coeffs)

    placements = []
    for z in points:
        if abs(z.a) == 0:
            continue
        a = z.a.array
        value = current.eval_many(a)
        if float(qabs(value)) < 1e-13:
            raise PlacementBreakdown(f"running product already vanishes at {z.a!r}")
        placed = qmul(qmul(qinv(value), a), value)
        placements.append((z.a, Quaternion.from_array(placed)))
        current = star_mul(current, star_power(factor_point(placed, degree), z.mult))
    return BlaschkeProduct(current, placements, origin)
