import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats
from scipy.integrate import trapezoid

from matbeta.errors import ConfigError
from matbeta.ground_fields import GroundField
from matbeta.sampling import (ProposalConfig, SeededRng, beta_prime_logpdf, beta_prime_sample,
                              block_rng, haar_batch, haar_unitary, sample_cone, sample_section,
                              sample_siegel, sample_so, sample_wedge, student_t_logpdf,
                              student_t_sample)
from matbeta.matk import MatK, is_dissipative
from tests.helpers import FIELDS

R, C, H = GroundField.REAL, GroundField.COMPLEX, GroundField.QUATERNION
CFG = ProposalConfig()


# --- independent reference densities (written from the sampler contracts) --------

def _bp(y, a, b):
    return stats.betaprime.logpdf(y, a, b)


def _t1(x, nu, scale):
    return stats.t.logpdf(x, nu, scale=scale)


def _rank_one_2d(y, x, a, b, nu, power):
    """y ~ BetaPrime(a, b); x = (1+y)^power x' with x' ~ t_nu(scale / sqrt(nu))."""
    w = (1 + y) ** power
    return _bp(y, a, b) + _t1(x / w, nu, CFG.scale / math.sqrt(nu)) - np.log(w)


def _grid_mass(logf):
    """Integrate exp(logf(y, x)) on a log/asinh grid (covers all but ~1e-6 of the mass)."""
    u = np.linspace(-35, 35, 2001)
    v = np.linspace(-math.asinh(1e9), math.asinh(1e9), 2001)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    y, x = np.exp(uu), np.sinh(vv)
    f = np.exp(logf(y, x)) * y * np.cosh(vv)
    return trapezoid(trapezoid(f, v, axis=1), u)


def test_beta_prime_density_matches_scipy():
    y = np.linspace(0.01, 30, 50)
    np.testing.assert_allclose(beta_prime_logpdf(y, 2.5, 1.3), _bp(y, 2.5, 1.3), rtol=1e-12)


@pytest.mark.parametrize("a,b", [(0.7, 0.6), (2.5, 1.3), (6.0, 9.0)])
def test_beta_prime_grid_integral(a, b):
    u = np.linspace(-60, 60, 40001)
    mass = trapezoid(np.exp(beta_prime_logpdf(np.exp(u), a, b) + u), u)
    assert abs(mass - 1) <= 0.005


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_student_t_radial_integral(k):
    nu, scale = 2.5, 0.8
    v = np.linspace(0, math.asinh(1e10), 200001)
    r = np.sinh(v)
    x = np.zeros((r.size, k))
    x[:, 0] = r
    area = 2 * math.pi ** (k / 2) / math.gamma(k / 2)
    f = np.exp(student_t_logpdf(x, nu, scale)) * area * r ** (k - 1) * np.cosh(v)
    assert abs(trapezoid(f, v) - 1) <= 0.005
    if k == 1:
        np.testing.assert_allclose(student_t_logpdf(x[:50], nu, scale), _t1(r[:50], nu, scale), rtol=1e-12)


def test_beta_prime_sampler_ks():
    y = beta_prime_sample(2.5, 1.3, np.random.default_rng(0), 20000)
    assert stats.kstest(y, stats.betaprime(2.5, 1.3).cdf).pvalue > 1e-3


def test_student_t_sampler_ks():
    x = student_t_sample(np.random.default_rng(1), 3.0, np.full(20000, 0.7), 20000, 1)
    assert stats.kstest(x[:, 0], stats.t(3.0, scale=0.7).cdf).pvalue > 1e-3


@pytest.mark.parametrize("field", FIELDS)
def test_cone_rank_one_density(field):
    s = sample_cone(1, field, 2.5, 1.3, 3.0, np.random.default_rng(2), 20000)
    y = s.T[:, 0, 0].real
    np.testing.assert_allclose(s.logq, _bp(y, 2.5, 1.3), rtol=1e-10, atol=1e-10)
    assert stats.kstest(y, stats.betaprime(2.5, 1.3).cdf).pvalue > 1e-3


@pytest.mark.parametrize("field", FIELDS)
def test_cone_samples_are_pd(field):
    s = sample_cone(3, field, [2, 3, 4], 2.0, 3.0, np.random.default_rng(3), 200)
    q = field is H
    ev = np.linalg.eigvalsh(s.T)
    assert np.all(ev > 0)
    if q:
        MatK(H, s.T[0])       # valid quaternionic embedding


def test_wedge_rank_one_density_and_mass():
    a, b, nu = 2.5, 1.3, 2.0
    t, s, y, logq = sample_wedge(1, C, a, b, 3.0, nu, nu, np.random.default_rng(4), 5000)
    ref = _rank_one_2d(y[:, 0], s[:, 0, 0].imag, a, b, nu, 1.0)
    np.testing.assert_allclose(logq, ref, rtol=1e-10, atol=1e-10)
    assert abs(_grid_mass(lambda yy, xx: _rank_one_2d(yy, xx, a, b, nu, 1.0)) - 1) <= 0.005


def test_section_rank_one_density_and_mass():
    a, b, nu = 2.0, 1.7, 3.0
    l, m, n, w, y, logq = sample_section(1, 2, R, a, b, 3.0, nu, 3.0, 3.0, np.random.default_rng(5), 5000)
    ref = _rank_one_2d(y[:, 0], l[:, 0, 0], a, b, nu, 0.5)
    np.testing.assert_allclose(logq, ref, rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(m[:, 0, 0], w[:, 0, 0] + l[:, 0, 0] ** 2)
    assert abs(_grid_mass(lambda yy, xx: _rank_one_2d(yy, xx, a, b, nu, 0.5)) - 1) <= 0.005


def test_siegel_rank_one_density_and_mass():
    a, b, nu = 3.0, 2.2, 1.5
    r, t, y, logq = sample_siegel("Sp2nR", 1, a, b, 3.0, nu, nu, np.random.default_rng(6), 5000)
    ref = _rank_one_2d(y[:, 0], r[:, 0, 0].imag, a, b, nu, 1.0)
    np.testing.assert_allclose(logq, ref, rtol=1e-10, atol=1e-10)
    assert abs(_grid_mass(lambda yy, xx: _rank_one_2d(yy, xx, a, b, nu, 1.0)) - 1) <= 0.005
    with pytest.raises(ConfigError):
        sample_siegel("nope", 1, a, b, 3.0, nu, nu, np.random.default_rng(6), 5)


def test_so_rank_one_is_cone():
    r, w, y, logq = sample_so("OnC", 1, 2.0, 3.0, 3.0, 3.0, 3.0, 3.0, np.random.default_rng(7), 2000)
    np.testing.assert_allclose(r, w)
    np.testing.assert_allclose(r[:, 0, 0], y[:, 0])
    np.testing.assert_allclose(logq, _bp(y[:, 0], 2.0, 3.0), rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("variant,odd", [("OnC", False), ("OnC", True), ("SOstar", False), ("SOstar", True)])
def test_so_samples_dissipative(variant, odd):
    r, *_ = sample_so(variant, 2, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0, np.random.default_rng(8), 50, odd=odd)
    for x in r[:10]:
        herm = 0.5 * (x + np.conj(x.T))
        assert np.all(np.linalg.eigvalsh(herm) > 0)


@pytest.mark.parametrize("field", FIELDS)
def test_wedge_samples_dissipative(field):
    t, s, y, logq = sample_wedge(2, field, 3.0, 3.0, 3.0, 3.0, 3.0, np.random.default_rng(9), 50)
    for k in range(10):
        assert is_dissipative(MatK(field, t[k] + s[k]))
        np.testing.assert_allclose(s[k], -np.conj(s[k].T), atol=1e-12)


@pytest.mark.parametrize("field", FIELDS)
def test_haar_unitarity(field):
    q = haar_batch(3, field, np.random.default_rng(10), 200)
    eye = np.eye(q.shape[-1])
    np.testing.assert_allclose(q @ np.conj(np.swapaxes(q, -1, -2)), np.broadcast_to(eye, q.shape), atol=1e-12)
    if field is H:
        MatK(H, q[0])


@pytest.mark.parametrize("field", FIELDS)
def test_haar_mean_zero(field):
    q = haar_batch(3, field, np.random.default_rng(11), 20000)
    # entries have variance 1/n (per quaternionic/complex entry); the mean is zero
    assert np.max(np.abs(q.mean(axis=0))) <= 5 / math.sqrt(3 * 20000)


@pytest.mark.parametrize("field", FIELDS)
def test_haar_left_invariance_ks(field):
    rng = np.random.default_rng(12)
    u = haar_unitary(3, field, rng).data
    q1 = haar_batch(3, field, rng, 5000)
    q2 = u @ haar_batch(3, field, rng, 5000)
    # the trace is a class-sensitive statistic; left translation must not move its law
    assert stats.ks_2samp(np.trace(q1, axis1=1, axis2=2).real,
                          np.trace(q2, axis1=1, axis2=2).real).pvalue > 1e-3


@given(st.integers(0, 2**63), st.integers(0, 1000))
def test_streams_reproducible(seed, block):
    a = block_rng(seed, block).standard_normal(8)
    b = SeededRng(seed, block).generator().standard_normal(8)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, block_rng(seed, block + 1).standard_normal(8))


def test_proposal_config():
    with pytest.raises(ConfigError):
        ProposalConfig(shrink=0)
    with pytest.raises(ConfigError):
        ProposalConfig.from_dict({"bogus": 1})
    cfg = ProposalConfig(overrides={"F0_1": {"scale": 2.0}})
    assert cfg.for_family("F0_1").scale == 2.0
    assert cfg.for_family("F0_2") is cfg
