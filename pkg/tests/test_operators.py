import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mildflow import (
    SpectralField,
    apply_semigroup,
    build_domain,
    gradient,
    interp_norm,
    laplacian_eigensystem,
    phi1_apply,
    transform,
)
from mildflow.operators import (
    collocation_grid,
    evaluation_grid,
    from_grid,
    gradient_sobolev_norms,
    interp_norms,
    per_mode_smoothing_optimum,
    phi1,
    phi2,
    random_coefficients,
    smoothing_check,
    to_grid,
)

DOMAINS = [
    build_domain(1, [1.0], [12], "dirichlet"),
    build_domain(1, [2.5], [10], "neumann"),
    build_domain(2, [1.0, 1.5], [6, 8], "dirichlet"),
    build_domain(2, [1.0, 1.0], [7, 5], "neumann"),
]

domains = st.sampled_from(DOMAINS)
seeds = st.integers(0, 2**31 - 1)


def random_field(domain, seed, decay=(0.0, 2.0)):
    rng = np.random.default_rng(seed)
    return SpectralField(domain, random_coefficients(domain, 1, rng, decay)[0])


# phi functions: reference values from 40-digit arithmetic
PHI_REFERENCE = [
    (1e-8, 0.99999999500000001667, 0.4999999983333333375),
    (5e-5, 0.99997500041666145839, 0.49999166677083229168),
    (1e-4, 0.99995000166662500083, 0.49998333374999166681),
    (0.05, 0.97541150998571981817, 0.49176980028560363657),
    (0.1, 0.95162581964040426836, 0.48374180359595731642),
    (1.0, 0.6321205588285576784, 0.3678794411714423216),
    (30.0, 0.033333333333330214126, 0.032222222222222326196),
]


@pytest.mark.parametrize("z,p1,p2", PHI_REFERENCE)
def test_phi_reference_values(z, p1, p2):
    assert phi1(np.array([z]))[0] == pytest.approx(p1, rel=1e-15)
    assert phi2(np.array([z]))[0] == pytest.approx(p2, rel=1e-14)


def test_phi_at_zero():
    assert phi1(np.zeros(1))[0] == 1.0
    assert phi2(np.zeros(1))[0] == 0.5


@given(st.floats(0.0, 0.3))
def test_phi_branches_are_continuous(z):
    # series and closed form agree where both are accurate
    lo = max(z, 1e-3)
    closed2 = (math.expm1(-lo) + lo) / lo**2
    assert phi2(np.array([lo]))[0] == pytest.approx(closed2, rel=1e-9)
    assert phi1(np.array([z]))[0] == pytest.approx(-math.expm1(-z) / z if z > 0 else 1.0, rel=1e-15)


def test_domain_validation():
    with pytest.raises(ValueError):
        build_domain(3, [1, 1, 1], [4, 4, 4], "dirichlet")
    with pytest.raises(ValueError):
        build_domain(1, [0.0], [4], "dirichlet")
    with pytest.raises(ValueError):
        build_domain(2, [1.0], [4], "neumann")
    with pytest.raises(ValueError):
        build_domain(1, [1.0], [4], "robin")


def test_mode_shapes():
    assert DOMAINS[0].mode_shape == (12,)
    assert DOMAINS[1].mode_shape == (11,)
    assert DOMAINS[3].mode_count == 8 * 6


@pytest.mark.parametrize("domain", DOMAINS)
def test_collocation_basis_is_orthonormal(domain):
    grid = collocation_grid(domain)
    for axis in range(domain.dims):
        B = grid.basis(axis, domain.axis_kind())
        G = grid.spacing[axis] * B.T @ B
        np.testing.assert_allclose(G, np.eye(B.shape[1]), atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(domains, seeds)
def test_transform_round_trip(domain, seed):
    u = random_field(domain, seed)
    values = transform(u, "inverse")
    back = transform(values, "forward", domain)
    np.testing.assert_allclose(back.coeffs, u.coeffs, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(domains, seeds)
def test_parseval_on_collocation_grid(domain, seed):
    u = random_field(domain, seed)
    grid = collocation_grid(domain)
    assert float(grid.l2_norm(u.grid_values())) == pytest.approx(u.l2_norm(), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(domains, seeds)
def test_oversampled_projection_is_exact_for_resolved_fields(domain, seed):
    u = random_field(domain, seed)
    grid = evaluation_grid(domain, True)
    np.testing.assert_allclose(from_grid(to_grid(u.coeffs, domain, grid), domain, grid), u.coeffs, atol=1e-12)


def test_transform_rejects_bad_input():
    d = DOMAINS[0]
    with pytest.raises(ValueError):
        transform(np.zeros(5), "forward", d)
    with pytest.raises(TypeError):
        transform(np.zeros(12), "inverse")
    with pytest.raises(ValueError):
        transform(SpectralField.zeros(d), "sideways")


@settings(max_examples=50, deadline=None)
@given(domains, seeds, st.floats(0.0, 0.5), st.floats(0.0, 0.5))
def test_semigroup_property(domain, seed, s, t):
    op = laplacian_eigensystem(domain)
    u = random_field(domain, seed)
    lhs = apply_semigroup(op, s, apply_semigroup(op, t, u))
    rhs = apply_semigroup(op, s + t, u)
    assert (lhs - rhs).l2_norm() <= 1e-12


def test_semigroup_rejects_negative_time():
    op = laplacian_eigensystem(DOMAINS[0])
    with pytest.raises(ValueError):
        apply_semigroup(op, -1e-3, SpectralField.zeros(DOMAINS[0]))


def test_single_mode_decay_closed_form():
    d = build_domain(2, [1.0, 2.0], [5, 5], "dirichlet")
    op = laplacian_eigensystem(d)
    u = SpectralField.mode(d, (2, 3))
    lam = (2 * math.pi) ** 2 + (3 * math.pi / 2.0) ** 2
    out = apply_semigroup(op, 0.01, u)
    assert out.coeffs[1, 2] == pytest.approx(math.exp(-lam * 0.01), abs=1e-15)


def test_neumann_constant_mode_is_invariant():
    d = DOMAINS[1]
    op = laplacian_eigensystem(d)
    u = SpectralField.mode(d, (0,), 3.0)
    np.testing.assert_array_equal(apply_semigroup(op, 5.0, u).coeffs, u.coeffs)


def test_fd_eigenvalues_match_stencil():
    # dense 3-point stencil eigenvalues against the closed form
    from mildflow.oracle import fd_laplacian_matrix

    for d in (build_domain(1, [1.0], [20], "dirichlet"), build_domain(1, [2.0], [15], "neumann")):
        lam = np.sort(laplacian_eigensystem(d, "fd").eigenvalues.ravel())
        dense = np.sort(-np.linalg.eigvalsh(fd_laplacian_matrix(d)))
        np.testing.assert_allclose(lam, dense, rtol=1e-10, atol=1e-9)


def test_phi1_apply_solves_linear_problem():
    d = DOMAINS[2]
    op = laplacian_eigensystem(d)
    f = random_field(d, 3)
    h = 0.02
    # e^{hA} 0 + h phi1(hA) f is the exact solution of u' = Au + f from 0
    exact = f.coeffs * (1 - np.exp(-op.eigenvalues * h)) / op.eigenvalues
    np.testing.assert_allclose(h * phi1_apply(op, h, f).coeffs, exact, rtol=1e-13)
    with pytest.raises(ValueError):
        phi1_apply(op, 0.0, f)


@settings(max_examples=40, deadline=None)
@given(domains, seeds, st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_interp_norm_monotone_in_theta(domain, seed, a, b):
    u = random_field(domain, seed)
    lo, hi = sorted((a, b))
    assert interp_norm(u, lo) <= interp_norm(u, hi) * (1 + 1e-12)


def test_interp_norm_index_range():
    u = SpectralField.zeros(DOMAINS[0])
    with pytest.raises(ValueError):
        interp_norm(u, 1.5)


@settings(max_examples=30, deadline=None)
@given(domains, seeds)
def test_interp_norm_at_zero_is_l2(domain, seed):
    u = random_field(domain, seed)
    assert interp_norm(u, 0.0) == pytest.approx(u.l2_norm(), rel=1e-14)


def test_interp_norms_batches():
    d = DOMAINS[3]
    c = random_coefficients(d, 5, np.random.default_rng(0))
    batched = interp_norms(c, d, 0.3, batch_axes=1)
    single = [interp_norm(SpectralField(d, ci), 0.3) for ci in c]
    np.testing.assert_allclose(batched, single, rtol=1e-14)


@pytest.mark.parametrize("domain", DOMAINS)
def test_gradient_of_single_mode_is_exact(domain):
    grid = evaluation_grid(domain, True)
    k = (2,) * domain.dims
    u = SpectralField.mode(domain, k)
    g = gradient(u).grid_values(grid)
    X = grid.coordinates()
    Ls = domain.extents
    for axis in range(domain.dims):
        expected = np.ones(grid.shape)
        for i in range(domain.dims):
            w = k[i] * math.pi / Ls[i]
            if domain.axis_kind() == "sin":
                f = math.sqrt(2 / Ls[i]) * (w * np.cos(w * X[i]) if i == axis else np.sin(w * X[i]))
            else:
                f = math.sqrt(2 / Ls[i]) * (-w * np.sin(w * X[i]) if i == axis else np.cos(w * X[i]))
            expected = expected * f
        np.testing.assert_allclose(g[axis], expected, atol=1e-11)


@settings(max_examples=30, deadline=None)
@given(domains, seeds)
def test_gradient_energy_identity(domain, seed):
    # ||grad u||^2 = sum lambda_k c_k^2
    u = random_field(domain, seed)
    lam = laplacian_eigensystem(domain).eigenvalues
    g = gradient(u)
    energy = float(np.sum(lam * u.coeffs**2))
    assert g.sobolev_norm(0.0) ** 2 == pytest.approx(energy, rel=1e-12)
    assert float(gradient_sobolev_norms(u.coeffs, domain, 0.0)) ** 2 == pytest.approx(energy, rel=1e-12)


def test_mode_outside_truncation():
    with pytest.raises(ValueError):
        SpectralField.mode(DOMAINS[0], (0,))
    with pytest.raises(ValueError):
        SpectralField.mode(DOMAINS[0], (13,))


def test_field_arithmetic_checks_domains():
    a = SpectralField.zeros(DOMAINS[0])
    b = SpectralField.zeros(DOMAINS[2])
    with pytest.raises(ValueError):
        a + b
    assert (2.0 * SpectralField.mode(DOMAINS[0], (1,))).coeffs[0] == 2.0


def test_per_mode_optimum_single_eigenvalue():
    # max_t t^d (1+lam)^d e^{-lam t} = (d/e)^d ((1+lam)/lam)^d
    lam, d = 40.0, 0.5
    expected = (d / math.e) ** d * ((1 + lam) / lam) ** d
    assert per_mode_smoothing_optimum([lam], d, 0.0, 1e-8, 10.0) == pytest.approx(expected, rel=1e-12)


def test_smoothing_check_rejects_bad_arguments():
    op = laplacian_eigensystem(DOMAINS[0])
    with pytest.raises(ValueError):
        smoothing_check(op, 0.2, 0.5, [0.1])
    with pytest.raises(ValueError):
        smoothing_check(op, 0.5, 0.0, [0.0, 0.1])


def test_smoothing_check_attains_oracle_on_single_mode():
    d = DOMAINS[0]
    op = laplacian_eigensystem(d)
    t = np.geomspace(1e-6, 1.0, 2000)
    rep = smoothing_check(op, 1.0, 0.0, t, fields=np.eye(d.mode_count))
    assert rep.relative_gap < 1e-5
    assert rep.finite and not rep.small_t_growth
