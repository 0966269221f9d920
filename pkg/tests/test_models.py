import numpy as np
import pytest
from scipy.linalg import expm
from hypothesis import given
from hypothesis import strategies as st

from matbeta.errors import DomainError, StructureError
from matbeta.ground_fields import GroundField
from matbeta.matk import MatK, det_k, is_dissipative, leading_block
from matbeta.models import _lie_project
from matbeta.models import (SERIES, GroupElement, SpaceFamily, ball_to_model, berezin_kernel,
                            cayley, fd_jacobian, invariant_density, jacobian_exponent,
                            modified_cayley_so, modified_cayley_so_inv, modified_cayley_sp2nc,
                            modified_cayley_sp2nc_inv, mobius, mobius_jacobian, operator_norm,
                            parabolic_eigenfunction, random_ball_point, random_group_element,
                            section_eigenfunction, section_embed, section_parabolic_action,
                            section_project)
from matbeta.sampling import haar_unitary
from tests.helpers import rand_antiherm, rand_mat, rel

H = GroundField.QUATERNION
seeds = st.integers(0, 2**32 - 1)

SQUARE = [SpaceFamily(s, n=n) for s in SERIES if not s.startswith("Upq") for n in (1, 2, 3)
          if not (s in ("OnC", "SOstar") and n == 1)]
RECT = [SpaceFamily(f"Upq_{k}", p=p, q=q) for k in "RCH" for p, q in ((1, 1), (1, 2), (2, 3), (2, 2))]
ALL = SQUARE + RECT
ids = [f"{f.series}-{f.ball_shape}" for f in ALL]


def _one(z):
    return MatK.identity(z.rows, z.field)


def test_family_validation():
    with pytest.raises(DomainError):
        SpaceFamily("nope", n=2)
    with pytest.raises(DomainError):
        SpaceFamily("Upq_C", p=3, q=2)
    assert SpaceFamily("Upq_C", n=2).ball_shape == (2, 2)
    assert SpaceFamily("SOstar", n=3).odd


@pytest.mark.parametrize("fam", ALL, ids=ids)
def test_random_points_in_ball(fam):
    rng = np.random.default_rng(0)
    for _ in range(20):
        z = random_ball_point(fam, rng)
        assert operator_norm(z) < 1
        assert fam.dim == ball_basis_dim(fam)


def ball_basis_dim(fam):
    from matbeta.models import ball_basis
    return ball_basis(fam).shape[0]


@pytest.mark.parametrize("fam", SQUARE, ids=[f"{f.series}-{f.n}" for f in SQUARE])
def test_cayley_involution(fam):
    rng = np.random.default_rng(1)
    for _ in range(100):
        z = random_ball_point(fam, rng)
        assert np.max(np.abs(cayley(cayley(z)).data - z.data)) <= 1e-10


@pytest.mark.parametrize("fam", SQUARE, ids=[f"{f.series}-{f.n}" for f in SQUARE])
def test_cayley_ball_to_dissipative(fam):
    """1 - zz* = 2 (1+R)^{-1} (R+R*) (1+R*)^{-1} with R the Cayley image."""
    rng = np.random.default_rng(2)
    for _ in range(100):
        z = random_ball_point(fam, rng)
        r = cayley(z)
        one = _one(z)
        lhs = one - z @ z.adjoint()
        inv = (one + r).inverse()
        rhs = inv @ (r + r.adjoint()) @ inv.adjoint() * 2.0
        assert np.max(np.abs(lhs.data - rhs.data)) <= 1e-10
        assert is_dissipative(r)


def test_modified_cayley_roundtrips():
    rng = np.random.default_rng(3)
    fam = SpaceFamily("Sp2nC", n=2)
    for _ in range(50):
        z = random_ball_point(fam, rng)
        r = modified_cayley_sp2nc(z)
        assert is_dissipative(r)
        assert modified_cayley_sp2nc_inv(r).allclose(z, 1e-10)
    for n in (2, 3):
        fam = SpaceFamily("SOstar", n=n)
        for _ in range(50):
            z = random_ball_point(fam, rng)
            r = modified_cayley_so(z)
            assert is_dissipative(r)
            assert modified_cayley_so_inv(r, odd=fam.odd).allclose(z, 1e-10)
    with pytest.raises(StructureError):
        modified_cayley_sp2nc(MatK.identity(2, GroundField.COMPLEX))


@pytest.mark.parametrize("fam", ALL, ids=ids)
def test_group_elements_preserve_form(fam):
    rng = np.random.default_rng(4)
    for _ in range(10):
        g = random_group_element(fam, rng)
        assert g.preserves_form(1e-9)
        z = random_ball_point(fam, rng)
        assert operator_norm(mobius(g, z)) < 1


@pytest.mark.parametrize("fam", ALL, ids=ids)
def test_lemma_fractional_linear_defect(fam):
    """1 - w w* = (a + z c)^{-1} (1 - zz*) (a + z c)^{*-1} with w = z^[g]."""
    rng = np.random.default_rng(5)
    for _ in range(100):
        g = random_group_element(fam, rng)
        z = random_ball_point(fam, rng)
        a, _, c, _ = g.blocks
        w = mobius(g, z)
        m = (a + z @ c).inverse()
        lhs = _one(z) - w @ w.adjoint()
        rhs = m @ (_one(z) - z @ z.adjoint()) @ m.adjoint()
        assert np.max(np.abs(lhs.data - rhs.data)) <= 1e-9


@pytest.mark.parametrize("fam", ALL, ids=ids)
def test_corollary_determinant_of_defect(fam):
    rng = np.random.default_rng(6)
    for _ in range(100):
        g = random_group_element(fam, rng)
        z = random_ball_point(fam, rng)
        a, _, c, _ = g.blocks
        w = mobius(g, z)
        lhs = det_k(_one(z) - w @ w.adjoint())
        rhs = abs(det_k(a + z @ c)) ** -2 * det_k(_one(z) - z @ z.adjoint())
        assert rel(lhs, rhs) <= 1e-9


@pytest.mark.parametrize("fam", ALL, ids=ids)
def test_finite_difference_jacobian(fam):
    rng = np.random.default_rng(8)
    for _ in range(5):
        g = random_group_element(fam, rng)
        z = random_ball_point(fam, rng, radius=0.7)
        assert rel(fd_jacobian(g, z), mobius_jacobian(g, z)) <= 1e-5


@pytest.mark.parametrize("fam", ALL, ids=ids)
def test_measure_invariance_product(fam):
    """density(z^[g]) * jacobian(g, z) = density(z)."""
    rng = np.random.default_rng(9)
    for _ in range(100):
        g = random_group_element(fam, rng)
        z = random_ball_point(fam, rng)
        lhs = invariant_density(fam, mobius(g, z)) * mobius_jacobian(g, z)
        assert rel(lhs, invariant_density(fam, z)) <= 1e-9


def test_jacobian_exponents():
    assert jacobian_exponent(SpaceFamily("Upq_C", p=2, q=3)) == 10.0
    assert jacobian_exponent(SpaceFamily("GL_R", n=3)) == 4.0     # n + 1
    assert jacobian_exponent(SpaceFamily("GL_C", n=3)) == 6.0     # 2n


def random_k(fam, rng):
    """Element of the maximal compact subgroup: exp of a block-diagonal algebra element."""
    p, q = fam.ball_shape
    s = 2 if fam.field is H else 1
    x = rng.standard_normal((s * (p + q),) * 2)
    if fam.field is not GroundField.REAL:
        x = x + 1j * rng.standard_normal(x.shape)
    x[: s * p, s * p:] = 0
    x[s * p:, : s * p] = 0
    x = _lie_project(fam, x)
    return GroupElement(fam, MatK(fam.field, expm(x)))


@pytest.mark.parametrize("fam", ALL, ids=ids)
def test_berezin_k_invariance(fam):
    rng = np.random.default_rng(10)
    for _ in range(50):
        k = random_k(fam, rng)
        assert k.preserves_form(1e-9)
        a, b, _, _ = k.blocks
        assert np.max(np.abs(b.data)) <= 1e-12
        z = random_ball_point(fam, rng)
        for alpha in (0.7, 2.5):
            assert rel(berezin_kernel(mobius(k, z), alpha), berezin_kernel(z, alpha)) <= 1e-9


@pytest.mark.parametrize("fam", ALL, ids=ids)
def test_berezin_models_agree(fam):
    rng = np.random.default_rng(11)
    rect = fam.series.startswith("Upq") and fam.p < fam.q
    for _ in range(30):
        z = random_ball_point(fam, rng)
        point = ball_to_model(fam, z)
        b_ball = berezin_kernel(z, 1.7)
        b_model = berezin_kernel(point, 1.7, "section" if rect else "wedge")
        assert rel(b_model, b_ball) <= 1e-9


@given(seeds, st.sampled_from("RCH"), st.integers(1, 3), st.integers(1, 2))
def test_section_roundtrip_and_block_form(seed, k, p, extra):
    rng = np.random.default_rng(seed)
    fam = SpaceFamily(f"Upq_{k}", p=p, q=p + extra)
    z = random_ball_point(fam, rng)
    l, kk = section_embed(z, fam.p, fam.q)
    assert section_project(l, kk).allclose(z, 1e-10)
    # the Cayley image of the completed matrix [[0, 0], [X, Y]] is [[1, 0], [2L, K]]
    s = 2 if fam.field is H else 1
    full = np.zeros((s * fam.q, s * fam.q), dtype=z.data.dtype)
    full[s * extra:, :] = z.data
    r = cayley(MatK(fam.field, full)).data
    np.testing.assert_allclose(r[: s * extra, : s * extra], np.eye(s * extra), atol=1e-10)
    np.testing.assert_allclose(r[: s * extra, s * extra:], 0, atol=1e-10)
    np.testing.assert_allclose(r[s * extra:, : s * extra], 2 * l.data, atol=1e-10)
    np.testing.assert_allclose(r[s * extra:, s * extra:], kk.data, atol=1e-10)


@given(seeds, st.sampled_from([GroundField.REAL, GroundField.COMPLEX, H]), st.integers(1, 3))
def test_parabolic_eigenfunction_scaling(seed, f, n):
    rng = np.random.default_rng(seed)
    lam = rng.uniform(-2, 2, n) + 1j * rng.uniform(-2, 2, n)
    d = rand_mat(f, n, n, rng)
    tril = np.tril(np.ones((n, n)))
    if f is H:
        tril = np.kron(tril, np.ones((2, 2)))
    d = MatK(f, d.data * tril) + MatK.identity(n, f)
    a = rand_mat(f, n, n, rng)
    t = a @ a.adjoint() + MatK.identity(n, f)
    lhs = parabolic_eigenfunction(d @ t @ d.adjoint(), lam)
    diffs = lam - np.append(lam[1:], 0)
    char = np.prod([abs(det_k(leading_block(d, j + 1))) ** (2 * diffs[j]) for j in range(n)])
    assert rel(lhs, char * parabolic_eigenfunction(t, lam)) <= 1e-9


@given(seeds, st.sampled_from([GroundField.REAL, GroundField.COMPLEX, H]), st.integers(1, 2),
       st.integers(1, 2))
def test_section_action_is_eigen(seed, f, p, extra):
    rng = np.random.default_rng(seed)
    fam = SpaceFamily(f"Upq_{f.value}", p=p, q=p + extra)
    l, k = section_embed(random_ball_point(fam, rng), p, p + extra)
    a = haar_unitary(extra, f, rng)
    s = 2 if f is H else 1
    tril = np.kron(np.tril(np.ones((p, p))), np.ones((s, s)))
    d = MatK(f, rand_mat(f, p, p, rng).data * tril) + MatK.identity(p, f) * 2.0
    c = rand_mat(f, p, extra, rng)
    z = rand_antiherm(f, p, rng)
    l2, k2 = section_parabolic_action(a, c, d, z, l, k)
    lam = rng.uniform(-2, 2, p)
    diffs = lam - np.append(lam[1:], 0)
    char = np.prod([abs(det_k(leading_block(d, j + 1))) ** (2 * diffs[j]) for j in range(p)])
    assert rel(section_eigenfunction(l2, k2, lam), char * section_eigenfunction(l, k, lam)) <= 1e-8


def test_section_action_rejects_bad_input():
    f = GroundField.COMPLEX
    one = MatK.identity(1, f)
    with pytest.raises(StructureError):
        section_parabolic_action(one * 2.0, one, one, MatK.zeros(1, 1, f), one, one)
    with pytest.raises(StructureError):
        section_parabolic_action(one, one, one, one, one, one)
