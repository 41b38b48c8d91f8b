import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qschur.blaschke import factor_point_closed, factor_sphere
from qschur.errors import NonInvertibleConstantTerm, NotOrthogonal, ShapeMismatch
from qschur.qlinalg import QMatrix, random_qmatrix
from qschur.quat import I, J, K, ImagUnit, Quaternion, qabs, qconj, qinv, qmul, random_in_ball, random_quaternions, random_units, same_sphere
from qschur.series import (
    LSeries,
    RSeries,
    adjoint_series,
    assemble_split,
    backward_shift,
    conj_series,
    ext_from_slice,
    is_slice_preserving,
    restrict_split,
    star_inv,
    star_mul,
    star_mul_right,
    star_power,
    symmetrize,
)


def random_series(rng, degree=12, decay=0.8):
    return LSeries(random_quaternions(rng, (degree + 1,)) * decay ** np.arange(degree + 1)[:, None])


def _orthonormal_pair(rng):
    i = random_units(rng)
    j = random_units(rng)
    j[1:] -= np.dot(i[1:], j[1:]) * i[1:]
    return ImagUnit(*i[1:]), ImagUnit(*j[1:])


def test_star_mul_example():
    f = LSeries([1.0, I])
    g = LSeries([1.0, J])
    h = star_mul(f, g.truncate(1))
    assert h.allclose(LSeries([1.0, I + J]))
    # keep the p^2 term by padding the degree
    h = star_mul(LSeries([1.0, I, 0.0]), LSeries([1.0, J, 0.0]))
    assert h.allclose(LSeries([1.0, I + J, K]))


def test_star_identity(rng):
    f = random_series(rng)
    assert star_mul(f, LSeries.constant(1.0, f.degree)).allclose(f)
    assert star_mul(LSeries.constant(1.0, f.degree), f).allclose(f)


def test_star_associative(rng):
    f, g, h = (random_series(rng) for _ in range(3))
    assert star_mul(star_mul(f, g), h).allclose(star_mul(f, star_mul(g, h)), 1e-12)


def test_star_mul_matches_splitting_formula(rng):
    for _ in range(20):
        f, g = random_series(rng), random_series(rng)
        Iu, Ju = _orthonormal_pair(rng)
        F, G = restrict_split(f, Iu, Ju)
        H, L = restrict_split(g, Iu, Ju)
        n = len(F)
        F_out = np.convolve(F, H)[:n] - np.convolve(G, L.conj())[:n]
        G_out = np.convolve(G, H.conj())[:n] + np.convolve(F, L)[:n]
        Fs, Gs = restrict_split(star_mul(f, g), Iu, Ju)
        assert np.max(np.abs(Fs - F_out)) < 1e-12
        assert np.max(np.abs(Gs - G_out)) < 1e-12


def test_star_mul_pointwise_formula(rng):
    degree = 64
    for _ in range(100):
        f = random_series(rng, degree, 0.7)
        g = random_series(rng, degree, 0.7)
        p = random_in_ball(rng, (), 0.7)
        fp = f.eval_many(p)
        if qabs(fp) < 1e-3:
            continue
        rotated = qmul(qmul(qinv(fp), p), fp)
        expect = qmul(fp, g.eval_many(rotated))
        got = star_mul(f, g).eval_many(p)
        r = float(qabs(p))
        bound = star_mul(f, g).tail_bound(r) + qabs(fp) * g.tail_bound(r) + g.max_coeff() / (1 - r) * f.tail_bound(r)
        assert qabs(got - expect) <= bound + 1e-10


def test_star_mul_shape_mismatch(rng):
    a = LSeries([random_qmatrix(rng, 2, 3)])
    b = LSeries([random_qmatrix(rng, 2, 2)])
    with pytest.raises(ShapeMismatch):
        star_mul(a, b)


def test_matrix_star_mul_is_matmul_convolution(rng):
    A = [random_qmatrix(rng, 2, 3) for _ in range(3)]
    B = [random_qmatrix(rng, 3, 2) for _ in range(3)]
    C = star_mul(LSeries(A), LSeries(B))
    assert (C[2] - (A[0] @ B[2] + A[1] @ B[1] + A[2] @ B[0])).max_abs() < 1e-13


def test_slide_identity_for_matrix_series(rng):
    # p C f(p) = C p f(p): prepending p commutes with a constant left factor
    f = LSeries([random_qmatrix(rng, 3, 2) for _ in range(5)])
    C = random_qmatrix(rng, 2, 3)
    assert np.array_equal(f.lmul(C).shift_up().coeffs, f.shift_up().lmul(C).coeffs)


def test_conj_series_examples(rng):
    assert conj_series(LSeries([1.0, I])).allclose(LSeries([1.0, -I]))
    real = LSeries.from_real([1.0, -2.0, 0.5])
    assert conj_series(real).allclose(real)
    f = random_series(rng)
    assert np.array_equal(conj_series(conj_series(f)).coeffs, f.coeffs)


def test_symmetrize_examples(rng):
    f = LSeries([1.0, I * 0.5, 0.0])
    assert np.allclose(symmetrize(f).coeffs[:, 0], [1.0, 0.0, 0.25])
    assert np.allclose(symmetrize(LSeries.from_real([1.0, -1.0, 0.0])).coeffs[:, 0], [1.0, -2.0, 1.0])
    for _ in range(100):
        g = random_series(rng, 8)
        s = symmetrize(g)
        assert is_slice_preserving(s)
        # before zeroing, the raw product really has negligible imaginary parts
        raw = star_mul(conj_series(g), g)
        assert np.max(np.abs(raw.coeffs[:, 1:])) < 1e-12


def test_star_inv_kernel_example():
    q = I * 0.5
    f = LSeries([1.0, -q.conj()] + [0.0] * 30)
    inv = star_inv(f)
    expect = LSeries([q.conj() ** n for n in range(32)])
    assert inv.allclose(expect, 1e-14)


def test_star_inv_of_one():
    assert star_inv(LSeries.constant(1.0, 5)).allclose(LSeries.constant(1.0, 5))


def test_star_inv_random(rng):
    one = LSeries.constant(1.0, 16)
    done = 0
    while done < 100:
        f = random_series(rng, 16, 0.5)
        norms = qabs(f.coeffs)
        if norms[0] <= norms[1:].sum():
            continue  # f may vanish in the ball; covered by the relative test below
        done += 1
        inv = star_inv(f)
        assert star_mul(f, inv).allclose(one, 1e-10)
        assert star_mul(inv, f).allclose(one, 1e-10)


def test_star_inv_relative_accuracy_when_zeros_are_inside(rng):
    # zeros of f^s inside the disc make the reciprocal's coefficients grow; the
    # rounding error of f * f^{-*} then scales with their size
    for _ in range(100):
        f = random_series(rng, 16)
        if qabs(f.coeffs[0]) < 0.1:
            continue
        inv = star_inv(f)
        err = star_mul(f, inv) - LSeries.constant(1.0, 16)
        assert err.max_coeff() <= 1e-12 * max(1.0, inv.max_coeff())


def test_star_inv_matrix(rng):
    f = LSeries([random_qmatrix(rng, 2, 2) for _ in range(6)])
    g = star_inv(f)
    eye = LSeries.constant(QMatrix.identity(2), 5)
    assert star_mul(f, g).allclose(eye, 1e-10)


def test_star_inv_singular():
    with pytest.raises(NonInvertibleConstantTerm):
        star_inv(LSeries([0.0, 1.0]))
    with pytest.raises(NonInvertibleConstantTerm):
        star_inv(LSeries([QMatrix.diag([1.0, 0.0]), QMatrix.identity(2)]))


def test_eval_examples():
    assert LSeries([1.0, 0.0, 1.0])(J).isclose(0)
    q = I * 0.5
    kern = LSeries([q.conj() ** n for n in range(80)])
    closed = Quaternion(1 + 1 / 16) ** -1 * (1 - Quaternion(0.5) * q)
    assert kern(0.5).isclose(closed, 1e-14)
    c = Quaternion(0.3, -1, 2, 0.5)
    assert LSeries.constant(c, 4)(Quaternion(0.1, 0.2, 0.3, 0.4)) == c


def test_eval_matches_horner(rng):
    f = random_series(rng, 10)
    p = random_in_ball(rng, (), 0.9)
    acc = np.zeros(4)
    for a in f.coeffs[::-1]:
        acc = qmul(p, acc) + a
    assert qabs(f.eval_many(p) - acc) < 1e-13


def test_backward_shift_examples(rng):
    f = LSeries([1.0, I, J])
    assert backward_shift(f).allclose(LSeries([I, J]))
    assert backward_shift(LSeries([Quaternion(3.0)])).allclose(LSeries([0.0]))
    g = random_series(rng, 8)
    h = g
    for ell in range(8):
        assert np.array_equal(h.coeffs[0], g.coeffs[ell])
        h = backward_shift(h)


def test_restrict_split_examples(rng):
    F, G = restrict_split(LSeries([1.0, K]), ImagUnit(1, 0, 0), ImagUnit(0, 1, 0))
    assert np.allclose(F, [1, 0]) and np.allclose(G, [0, 1j])
    F, G = restrict_split(LSeries.from_real([1.0, 2.0, 3.0]), ImagUnit(0, 0, 1), ImagUnit(1, 0, 0))
    assert np.allclose(G, 0)
    f = random_series(rng)
    Iu, Ju = _orthonormal_pair(rng)
    assert assemble_split(*restrict_split(f, Iu, Ju), Iu, Ju).allclose(f, 1e-14)
    with pytest.raises(NotOrthogonal):
        restrict_split(f, ImagUnit(1, 0, 0), ImagUnit(1, 1, 0))


def test_conjugation_anti_homomorphism(rng):
    for _ in range(20):
        f, g = random_series(rng, 20, 0.6), random_series(rng, 20, 0.6)
        Iu, _ = _orthonormal_pair(rng)
        z = Quaternion(*rng.uniform(-0.5, 0.5, 2) @ [[1, 0, 0, 0], [0, *Iu.array[1:]]])
        lhs = qconj(star_mul(f, g).eval_many(z.array))
        rhs = star_mul_right(adjoint_series(g), adjoint_series(f)).eval_many(z.array)
        assert qabs(lhs - rhs) < 1e-12


def test_right_series_eval():
    g = RSeries([1.0, I])
    q = Quaternion(0.1, 0.2, 0.3, 0.4)
    assert g(q).isclose(1 + I * q.conj())


def test_ext_from_slice_examples(rng):
    sq = LSeries([0.0, 0.0, 1.0])
    p = Quaternion(0.2, 0.5, 0.5, 0.0)
    assert ext_from_slice(sq, p, ImagUnit(1, 0, 0)).isclose(p * p, 1e-12)
    c = Quaternion(1, 2, 3, 4)
    assert ext_from_slice(lambda z: c, p, ImagUnit(0, 0, 1)) == c
    f = random_series(rng)
    z = Quaternion(0.3, 0.4)
    assert ext_from_slice(f, z, ImagUnit(1, 0, 0)).isclose(f(z), 1e-14)
    for _ in range(10):
        q = Quaternion.from_array(random_in_ball(rng, (), 0.8))
        assert ext_from_slice(f, q, ImagUnit(0, 1, 0)).isclose(f(q), 1e-12)
    assert ext_from_slice(f, 0.4, ImagUnit(0, 1, 0)).isclose(f(0.4), 1e-14)


def test_slice_preserving_examples(rng):
    assert is_slice_preserving(factor_sphere(Quaternion(0.1, 0.3)))
    assert not is_slice_preserving(LSeries([1.0, I]))
    assert is_slice_preserving(symmetrize(random_series(rng)))


def test_star_power(rng):
    f = random_series(rng, 6)
    assert star_power(f, 3).allclose(star_mul(f, star_mul(f, f)), 1e-12)
    assert star_power(f, 0).allclose(LSeries.constant(1.0, 6))


def test_rotation_at_boundary(rng):
    # B_a is unimodular on the sphere, so |(B_a * g)(p)| tends to |g| at a point of the same sphere
    a = Quaternion(0.2, 0.3, -0.1, 0.2)
    g = random_series(rng, 4, 1.0)
    for _ in range(10):
        u = random_units(rng)
        theta = rng.uniform(0, 2 * math.pi)
        p = (1 - 1e-6) * (math.cos(theta) * np.array([1.0, 0, 0, 0]) + math.sin(theta) * u)
        fp = factor_point_closed(a, p).array
        rotated = qmul(qmul(qinv(fp), p), fp)
        assert abs(qabs(fp) - 1.0) < 1e-5
        assert same_sphere(rotated, p, 1e-12)
        value = qmul(fp, g.eval_many(rotated))
        assert abs(qabs(value) - qabs(g.eval_many(rotated))) < 1e-5 * (1 + g.max_coeff() * 5)


def test_pointwise_formula_against_series_near_boundary(rng):
    from qschur.blaschke import factor_point

    a = Quaternion(0.2, 0.3, -0.1, 0.2)
    g = random_series(rng, 4, 1.0)
    f = factor_point(a, 1024)
    g_long = LSeries(np.concatenate([g.coeffs, np.zeros((1020, 4))]))
    prod = star_mul(f, g_long)
    for _ in range(5):
        p = 0.95 * random_units(rng) * 0.6 + np.array([0.95 * 0.8, 0, 0, 0])
        fp = factor_point_closed(a, p).array
        expect = qmul(fp, g.eval_many(qmul(qmul(qinv(fp), p), fp)))
        assert qabs(prod.eval_many(p) - expect) < 1e-10


@given(st.integers(0, 2**31 - 1))
def test_series_json_round_trip(seed):
    f = random_series(np.random.default_rng(seed), 5)
    back = LSeries.from_json(json.loads(json.dumps(f.to_json())))
    assert np.array_equal(back.coeffs, f.coeffs)
