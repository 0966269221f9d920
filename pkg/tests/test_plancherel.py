import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from matbeta.closed_form import ParamSet, rhs_value
from matbeta.errors import DomainError, HypothesisViolation, TruncationError
from matbeta.ground_fields import GroundField
from matbeta.matk import MatK
from matbeta.mc_verify import estimate_lhs
from matbeta.models import berezin_kernel, section_embed, section_project
from matbeta.plancherel import (HypothesisError, PlancherelPoint, SphericalParams, ball_point,
                                base_point, density_curve, eigen_exponents, inversion_check,
                                log_plancherel_density, plancherel_density, rho, spherical_phi,
                                spherical_transform_A, u_s)
from matbeta.sampling import haar_unitary

R = GroundField.REAL


def _k_move(point, rng):
    l, k = point
    p, q = k.rows, k.rows + l.cols
    z = section_project(l, k).data
    u, v = haar_unitary(p, R, rng).data, haar_unitary(q, R, rng).data
    return section_embed(MatK(R, u @ z @ v.T), p, q)


def _mp_density(s, alpha, p, q, c=2.0):
    """The Plancherel integrand written as a symmetric function of s (independent of the chamber)."""
    r = mpmath.mpf(q + p) / 4 - mpmath.mpf(1) / 2
    out = mpmath.mpf(1)
    for k in range(1, p + 1):
        out /= mpmath.gamma(2 * alpha - (p - k))
    a = mpmath.mpf(q - p) / 2
    for x in s:
        out *= abs(mpmath.gamma(alpha - r + 1j * x)) ** 2
        out *= abs(mpmath.gamma(a + 1j * c * x) / mpmath.gamma(1j * c * x)) ** 2
    for i in range(p):
        for j in range(i + 1, p):
            for d in (s[i] - s[j], s[i] + s[j]):
                out *= abs(mpmath.gamma(0.5 + 1j * c * d) / mpmath.gamma(1j * c * d)) ** 2
    return float(out)


def test_spectral_params_chamber():
    assert SphericalParams([2, 1]).p == 2
    with pytest.raises(DomainError):
        SphericalParams([1, 2])
    with pytest.raises(DomainError):
        SphericalParams([-1])
    with pytest.raises(DomainError):
        PlancherelPoint(SphericalParams([1]), -1.0, 2.0)


def test_rho_and_exponents():
    assert rho(1, 2) == 0.25
    e = eigen_exponents([2.0, 0.5], 2, 3)
    np.testing.assert_allclose(e, [-0.5 + 1.5j, rho(2, 3) + 0.5j])
    lit = eigen_exponents([2.0, 0.5], 2, 3, "literal")
    np.testing.assert_allclose(lit, [-0.5 + 1.5j, -0.5 + 0.5j])


@pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 3), (2, 4)])
def test_base_point_is_one(p, q):
    pt = base_point(p, q)
    assert u_s(pt, np.linspace(1, 0.2, p)) == pytest.approx(1.0)
    phi = spherical_phi(pt, np.linspace(1, 0.2, p), 200, np.random.default_rng(0))
    assert abs(phi.mean - 1) <= 1e-12


def test_transform_is_the_section_integral():
    rng = np.random.default_rng(0)
    for p, q in ((1, 2), (2, 3), (2, 4)):
        for _ in range(5):
            alpha = rho(p, q) + rng.uniform(0.3, 3)
            s = np.sort(rng.uniform(0, 3, p))[::-1]
            lam = [alpha + rho(p, q) - (p - j) / 2 - 1j * s[j - 1] for j in range(1, p + 1)]
            ps = ParamSet(lam, [2 * alpha] * p, p=p, q=q)
            ref = rhs_value("F0_7", ps) * 4 ** (alpha * p)
            assert abs(spherical_transform_A(alpha, s, p, q) / ref - 1) <= 1e-12


@given(st.floats(0, 5), st.floats(0, 5), st.floats(1.0, 4.0))
def test_transform_weyl_symmetric(s1, s2, alpha):
    a = spherical_transform_A(alpha, [s1, s2], 2, 3)
    for w in ([s2, s1], [-s1, s2], [s1, -s2], [-s2, -s1]):
        assert abs(spherical_transform_A(alpha, w, 2, 3) / a - 1) <= 1e-12
    assert abs(a.imag) <= 1e-12 * abs(a)


def test_transform_matches_mc_at_rank_two():
    alpha, p, q = 3.0, 2, 3
    s = np.array([1.0, 0.5])
    lam = [alpha + rho(p, q) - (p - j) / 2 - 1j * s[j - 1] for j in (1, 2)]
    est = estimate_lhs("F0_7", ParamSet(lam, [2 * alpha] * 2, p=2, q=3), n_samples=1_000_000, seed=11)
    scale = 4 ** (alpha * p)
    a = spherical_transform_A(alpha, s, p, q)
    assert abs(est.mean.real * scale - a.real) <= 3 * est.stderr_re * scale
    assert abs(est.mean.imag * scale - a.imag) <= 3 * max(est.stderr_im, 1e-300) * scale


@pytest.mark.parametrize("p,q,s", [(1, 2, [1.0]), (1, 3, [0.4]), (2, 3, [1.3, 0.6]), (2, 4, [2.0, 1.0])])
def test_density_factor_recomputation(p, q, s):
    alpha = rho(p, q) + 1.5
    assert plancherel_density(s, alpha, p, q) == pytest.approx(_mp_density(s, alpha, p, q), rel=1e-10)
    printed = plancherel_density(s, alpha, p, q, variant="as_printed")
    assert printed == pytest.approx(_mp_density(s, alpha, p, q, c=1.0), rel=1e-10)


@given(st.floats(0.01, 4), st.floats(0.01, 4))
def test_density_even_and_symmetric(s1, s2):
    """The chamber value equals the symmetric formula at every Weyl image."""
    assume(abs(s1 - s2) > 1e-3)          # walls are covered by test_density_vanishes_on_walls
    hi, lo = max(s1, s2), min(s1, s2)
    d = plancherel_density([hi, lo], 2.5, 2, 3)
    assert d >= 0
    for w in ([lo, hi], [-hi, lo], [hi, -lo], [-lo, -hi]):
        assert _mp_density(w, 2.5, 2, 3) == pytest.approx(d, rel=1e-9)


def test_density_vanishes_on_walls():
    assert plancherel_density([0.0], 2.0, 1, 2) == 0.0
    assert plancherel_density([1.0, 1.0], 2.0, 2, 3) == 0.0
    assert np.all(density_curve(2.0, 2, [0.1, 1, 5]) > 0)


def test_threshold_is_enforced():
    assert plancherel_density([1.0], 0.5, 1, 2) > 0      # threshold is 1/4
    with pytest.raises(HypothesisError):
        plancherel_density([1.0], 0.2, 1, 2)
    with pytest.raises(HypothesisViolation):
        log_plancherel_density(np.array([[1.0]]), 0.25, 1, 2)
    with pytest.raises(DomainError):
        log_plancherel_density(np.array([[0.5, 1.0]]), 3.0, 2, 3)


def test_phi_k_invariant():
    rng = np.random.default_rng(1)
    for p, q, s in ((1, 2, [1.0]), (2, 3, [1.2, 0.4])):
        pt = ball_point(p, q, 0.6, rng)
        a = spherical_phi(pt, s, 40_000, np.random.default_rng(2))
        b = spherical_phi(_k_move(pt, rng), s, 40_000, np.random.default_rng(3))
        assert abs(a.mean - b.mean) <= 4 * math.hypot(a.stderr, b.stderr)


def test_phi_weyl_invariant_rank_two():
    pt = ball_point(2, 3, 0.6, np.random.default_rng(4))
    base = spherical_phi(pt, [1.2, 0.4], 40_000, np.random.default_rng(5))
    for i, w in enumerate(([0.4, 1.2], [-1.2, 0.4], [1.2, -0.4])):
        other = spherical_phi(pt, w, 40_000, np.random.default_rng(6 + i))
        assert abs(other.mean - base.mean) <= 4 * math.hypot(base.stderr, other.stderr)


@pytest.mark.parametrize("r,s", [(0.3, 0.5), (0.6, 1.0), (0.8, 2.0)])
def test_phi_rank_one_against_angle_quadrature(r, s):
    """At p = 1, q = 2 the K-orbit of (r, 0) is the circle r (cos t, sin t)."""
    theta = np.linspace(0, 2 * np.pi, 4001)[:-1]
    vals = [u_s(section_embed(MatK(R, [[r * math.cos(t), r * math.sin(t)]]), 1, 2), [s]) for t in theta]
    ref = np.mean(vals)
    pt = section_embed(MatK(R, [[r, 0.0]]), 1, 2)
    phi = spherical_phi(pt, [s], 100_000, np.random.default_rng(7))
    assert abs(phi.mean - ref) <= 4 * phi.stderr + 1e-12


def test_inversion_at_base_point():
    res = inversion_check(base_point(1, 2), 2.0, 1, 2, k_samples=100)
    assert abs(res.value - 1) <= 1e-10 and res.reference == 1.0


def test_inversion_rejects_short_grid():
    with pytest.raises(TruncationError):
        inversion_check(base_point(1, 2), 2.0, 1, 2, s_grid=np.linspace(0, 0.5, 11), k_samples=10)
    with pytest.raises(DomainError):
        inversion_check(base_point(1, 2), 2.0, 1, 2, s_grid=np.array([0.0, 0.1, 0.3]), k_samples=10)


def test_berezin_reference_in_section_model():
    pt = ball_point(1, 2, 0.5, np.random.default_rng(8))
    z = section_project(*pt)
    assert berezin_kernel(pt, 2.0, "section").real == pytest.approx(berezin_kernel(z, 2.0).real, rel=1e-12)
