import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mildflow import (
    HypothesisViolation,
    SolverConfig,
    SolverError,
    SpectralField,
    build_domain,
    build_graded_mesh,
    laplacian_eigensystem,
    solve,
)
from mildflow.nonlinearity import PowerModel, power_spec
from mildflow.operators import random_coefficients
from mildflow.solver import (
    apriori_monitor,
    duhamel_residual,
    picard_verify,
    stability_probe,
    step_exponential_euler,
)

DOM = build_domain(2, [1.0, 1.0], [6, 6], "dirichlet")
OP = laplacian_eigensystem(DOM)


def smooth_u0(seed=0, domain=DOM):
    return SpectralField(domain, random_coefficients(domain, 1, np.random.default_rng(seed), (2.0, 2.0))[0])


class ConstantForcing:
    def __init__(self, f):
        self.f = f
        self.times = []

    def __call__(self, t, u):
        self.times.append(t)
        return self.f


def test_graded_mesh_nodes():
    m = build_graded_mesh(2.0, 4, 2.0)
    np.testing.assert_allclose(m.nodes, [0.0, 0.125, 0.5, 1.125, 2.0])
    assert m.refined().N == 8
    for bad in ((0.0, 4, 1.0), (1.0, 0, 1.0), (1.0, 4, 0.5), (1.0, 2.5, 1.0)):
        with pytest.raises(ValueError):
            build_graded_mesh(*bad)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 200), st.floats(1.0, 4.0))
def test_mesh_is_increasing_and_ends_at_T(N, r):
    m = build_graded_mesh(0.7, N, r)
    assert m.nodes[0] == 0.0 and m.nodes[-1] == 0.7
    assert np.all(np.diff(m.nodes) > 0)


def test_linear_problem_is_exact():
    u0 = smooth_u0()
    cfg = SolverConfig(build_graded_mesh(0.3, 20, 2.0))
    traj = solve(OP, None, u0, cfg)
    expected = np.exp(-np.multiply.outer(traj.times, OP.eigenvalues)) * u0.coeffs
    np.testing.assert_allclose(traj.states, expected, rtol=1e-13, atol=1e-16)


def test_constant_forcing_is_exact_and_skips_t0():
    f = smooth_u0(1)
    rhs = ConstantForcing(f)
    u0 = smooth_u0(2)
    cfg = SolverConfig(build_graded_mesh(0.5, 30, 2.0))
    traj = solve(OP, rhs, u0, cfg)
    lam = OP.eigenvalues
    t = traj.times[:, None, None]
    exact = np.exp(-lam * t) * u0.coeffs + (1 - np.exp(-lam * t)) / lam * f.coeffs
    np.testing.assert_allclose(traj.states, exact, rtol=1e-12, atol=1e-15)
    assert min(rhs.times) > 0.0
    assert rhs.times[0] == traj.times[1]
    # the Duhamel integral of a constant is reproduced exactly
    res = duhamel_residual(traj, OP, rhs, refinement=2, theta=0.0)
    assert np.max(res) < 1e-13


def test_single_step_matches_formula():
    u = smooth_u0(3)
    f = smooth_u0(4)
    out = step_exponential_euler(OP, ConstantForcing(f), 0.1, 0.05, u)
    lam = OP.eigenvalues
    expected = np.exp(-0.05 * lam) * u.coeffs + (1 - np.exp(-0.05 * lam)) / lam * f.coeffs
    np.testing.assert_allclose(out.coeffs, expected, rtol=1e-13)
    with pytest.raises(ValueError):
        step_exponential_euler(OP, None, 0.0, 0.0, u)


def test_monitors():
    u0 = smooth_u0()
    cfg = SolverConfig(build_graded_mesh(0.2, 10), mu=0.6, xi=0.25, extra_norms=(0.5,))
    traj = solve(OP, None, u0, cfg)
    assert set(traj.monitors) == {"E0_norm", "Exi_norm", "weighted_norm", "rhs_norm", "E0.5_norm"}
    assert traj.monitors["weighted_norm"][0] == 0.0
    np.testing.assert_allclose(traj.monitors["weighted_norm"], traj.times**0.6 * traj.monitors["Exi_norm"])
    np.testing.assert_array_equal(traj.monitors["rhs_norm"], 0.0)


def test_states_are_read_only():
    traj = solve(OP, None, smooth_u0(), SolverConfig(build_graded_mesh(0.1, 3)))
    with pytest.raises(ValueError):
        traj.states[0, 0, 0] = 1.0


def test_blow_up_is_reported_with_node():
    u0 = smooth_u0()
    cfg = SolverConfig(build_graded_mesh(1.0, 8, 1.0))
    with pytest.raises(SolverError) as exc, np.errstate(over="ignore"):
        solve(OP, lambda t, u: u * 1e200, u0, cfg)
    assert exc.value.node is not None and exc.value.node >= 1
    bad = SpectralField(DOM, np.full(DOM.mode_shape, np.nan))
    with pytest.raises(SolverError) as exc:
        solve(OP, None, bad, cfg)
    assert exc.value.node == 0


def test_mu_window_is_enforced():
    d = build_domain(1, [1.0], [6], "neumann")
    spec = power_spec(0.5, d, xi=0.2)
    with pytest.raises(HypothesisViolation) as exc:
        SolverConfig(build_graded_mesh(1.0, 4), mu=0.1, spec=spec)
    assert exc.value.hypothesis == "ξ<μ<min{1,1/q}"
    cfg = SolverConfig(build_graded_mesh(1.0, 4), spec=spec)
    assert cfg.mu == pytest.approx(0.6)


def test_domain_mismatch():
    other = build_domain(1, [1.0], [6], "dirichlet")
    with pytest.raises(ValueError):
        solve(OP, None, SpectralField.zeros(other), SolverConfig(build_graded_mesh(1.0, 2)))


def test_apriori_monitor_on_rough_data():
    rng = np.random.default_rng(0)
    u0 = SpectralField(DOM, rng.standard_normal(DOM.mode_shape))
    cfg = SolverConfig(build_graded_mesh(0.5, 64, 2.0), mu=0.8, xi=0.6)
    rep = apriori_monitor(solve(OP, None, u0, cfg))
    assert rep.finite and rep.decreasing_to_zero
    assert rep.first_node_value < rep.sup_weighted
    assert 0.0 < rep.argmax_t <= 0.5


def test_picard_iteration_converges_to_a_fixed_point():
    d = build_domain(1, [1.0], [8], "neumann")
    op = laplacian_eigensystem(d)
    model = PowerModel(d, 0.5)
    noise = random_coefficients(d, 1, np.random.default_rng(0), (2.0, 2.0))[0]
    u0 = SpectralField(d, 0.1 * noise) + SpectralField.mode(d, (0,))
    cfg = SolverConfig(build_graded_mesh(0.2, 32, 2.0), spec=power_spec(0.5, d))
    rep = picard_verify(op, model, u0, cfg, max_iter=60, tol=1e-11)
    assert rep.converged
    assert rep.distances[-1] < 1e-11
    # the fixed point of the quadrature map is first-order close to the scheme
    traj = solve(op, model, u0, cfg)
    assert np.max(np.abs(rep.fixed_point - traj.states)) < 5e-3
    with pytest.raises(ValueError):
        picard_verify(op, model, u0, SolverConfig(build_graded_mesh(1.0, 1024)))


def test_stability_probe_on_heat_flow():
    u0 = smooth_u0()
    delta = SpectralField.mode(DOM, (1, 1), 1e-6)
    rep = stability_probe(OP, None, u0, delta, SolverConfig(build_graded_mesh(0.5, 50, 1.0)))
    assert rep.rate == pytest.approx(-2 * math.pi**2, rel=1e-10)
    assert rep.r2 == pytest.approx(1.0)
    assert rep.bounded
    with pytest.raises(ValueError):
        stability_probe(OP, None, u0, SpectralField.zeros(DOM), SolverConfig(build_graded_mesh(0.5, 5)))
