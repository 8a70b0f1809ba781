"""Sampling checks of the growth, Hölder and lemma inequalities.

Each check draws random inputs over several magnitude scales, evaluates both
sides of an inequality and records the worst slack ``bound - value``. A check
passes when the worst slack is at least ``-SLACK_TOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mildflow import kernels
from mildflow.nonlinearity import (
    BetaProfile,
    KernelData,
    NonlinearitySpec,
    calibrate_embedding_constant,
    lemma33_exponents,
)
from mildflow.operators import (
    DiscreteDomain,
    Grid,
    evaluation_grid,
    gradient_grid,
    gradient_sobolev_norms,
    interp_norms,
    random_coefficients,
)

SLACK_TOL = 1e-12
CHUNK = 1000

__all__ = [
    "SLACK_TOL",
    "CheckResult",
    "EstimateReport",
    "HolderFit",
    "verify_estimates",
    "estimate_holder_exponent",
    "check_scalar_inequalities",
    "check_lemma31",
    "check_lemma32",
    "check_lemma33",
    "check_autocat_identity",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    samples: int
    worst_slack: float

    @property
    def passed(self) -> bool:
        return self.worst_slack >= -SLACK_TOL


def _chunks(total, size=CHUNK):
    done = 0
    while done < total:
        n = min(size, total - done)
        yield n
        done += n


def _log_uniform(rng, lo, hi, size):
    return 10.0 ** rng.uniform(lo, hi, size=size)


def _broadcast_scale(s, ndim):
    return s.reshape((-1,) + (1,) * (ndim - 1))


# --------------------------------------------------------------------------
# assumption checks on a model rhs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimateReport:
    growth: CheckResult
    hoelder: CheckResult
    min_growth_ratio: float
    min_hoelder_ratio: float

    @property
    def passed(self) -> bool:
        return self.growth.passed and self.hoelder.passed

    @property
    def worst_slack(self) -> float:
        return min(self.growth.worst_slack, self.hoelder.worst_slack)


def _batch_rhs(rhs):
    if hasattr(rhs, "coeff_rhs"):
        return rhs.coeff_rhs
    from mildflow.operators import SpectralField

    def f(t, c, domain):
        return np.stack([rhs(t, SpectralField(domain, ci)).coeffs for ci in c])

    return f


def _evaluate(rhs, t, coeffs, domain):
    if hasattr(rhs, "coeff_rhs"):
        return rhs.coeff_rhs(t, coeffs)
    return _batch_rhs(rhs)(t, coeffs, domain)


def _sample_states(domain, count, rng, lead):
    base = random_coefficients(domain, count, rng, decay=(0.0, 4.0), lead=lead)
    flat = base.reshape(count, -1)
    base = base / np.linalg.norm(flat, axis=1).reshape((-1,) + (1,) * (base.ndim - 1))
    return base * _broadcast_scale(_log_uniform(rng, -3, 3, count), base.ndim)


def verify_estimates(rhs, spec: NonlinearitySpec, sample_count: int = 1000, seed: int = 0,
                     norm_pair: tuple[float, float] | None = None, domain: DiscreteDomain | None = None,
                     components: int | None = None, T: float = 1.0) -> EstimateReport:
    """Sample the growth and Hölder bounds of ``spec`` for ``rhs``.

    States are random fields with random spectral decay and magnitudes over
    six decades; half the pairs are independent and half are close
    perturbations (relative separations down to ``1e-8``). Times are drawn
    from ``(0, T]``. ``norm_pair`` overrides the model indices ``(xi, gamma)``.
    """
    domain = domain if domain is not None else getattr(rhs, "domain", None)
    if domain is None:
        raise ValueError("a domain is needed to sample states")
    if components is None:
        components = getattr(rhs, "components", None)
    xi, gamma = norm_pair if norm_pair is not None else (spec.xi, spec.gamma)
    sx, sg = spec.spectral_index(xi), spec.spectral_index(gamma)
    lead = () if components is None else (components,)
    rng = np.random.default_rng(seed)
    worst_g = worst_h = math.inf
    ratio_g = ratio_h = math.inf
    for n in _chunks(sample_count):
        t = float(rng.uniform(0.0, T)) or T
        u = _sample_states(domain, n, rng, lead)
        fu = _evaluate(rhs, t, u, domain)
        if fu.shape != u.shape:
            raise ValueError(f"rhs maps shape {u.shape[1:]} to {fu.shape[1:]}")
        un = interp_norms(u, domain, sx, batch_axes=1)
        fn = interp_norms(fu, domain, sg, batch_axes=1)
        gb = spec.growth_bound(un)
        worst_g = min(worst_g, float(np.min(gb - fn)))
        with np.errstate(divide="ignore"):
            ratio_g = min(ratio_g, float(np.min(np.where(fn > 0, gb / np.where(fn > 0, fn, 1), np.inf))))

        close = rng.random(n) < 0.5
        pert = _sample_states(domain, n, rng, lead)
        rel = _log_uniform(rng, -8, 0, n)
        pn = np.linalg.norm(pert.reshape(n, -1), axis=1)
        unorm = np.linalg.norm(u.reshape(n, -1), axis=1)
        scaled = pert * _broadcast_scale(rel * unorm / pn, u.ndim)
        v = np.where(_broadcast_scale(close, u.ndim), u + scaled, pert)
        fv = _evaluate(rhs, t, v, domain)
        vn = interp_norms(v, domain, sx, batch_axes=1)
        dn = interp_norms(u - v, domain, sx, batch_axes=1)
        dfn = interp_norms(fu - fv, domain, sg, batch_axes=1)
        hb = spec.hoelder_bound(un, vn, dn)
        worst_h = min(worst_h, float(np.min(hb - dfn)))
        with np.errstate(divide="ignore"):
            ratio_h = min(ratio_h, float(np.min(np.where(dfn > 0, hb / np.where(dfn > 0, dfn, 1), np.inf))))
    return EstimateReport(
        CheckResult("growth bound", sample_count, worst_g),
        CheckResult("hoelder bound", sample_count, worst_h),
        ratio_g,
        ratio_h,
    )


@dataclass(frozen=True)
class HolderFit:
    exponent: float
    constant: float
    r2: float
    pairs: int


def estimate_holder_exponent(rhs, sample_count: int = 200, seed: int = 0,
                             norm_pair: tuple[float, float] = (0.0, 0.0), domain: DiscreteDomain | None = None,
                             components: int | None = None, norm_shift: float = 0.0,
                             scales: tuple[float, float] = (-6.0, 2.0), base=None, t: float = 1.0) -> HolderFit:
    """Fit ``||f(u) - f(v)||_gamma ~ C ||u - v||_xi^theta`` by log-log regression.

    Pairs are ``(s a, s b)`` for random ``a, b`` and log-uniform scales ``s``,
    so the separations shrink towards zero together with the states; this
    exposes the worst-case (small-state) Hölder exponent. ``base`` may supply
    a fixed array of states ``a`` (e.g. spatially constant fields); ``b`` is
    then ``-a`` rescaled by a random factor.
    """
    domain = domain if domain is not None else getattr(rhs, "domain", None)
    if domain is None:
        raise ValueError("a domain is needed to sample states")
    if components is None:
        components = getattr(rhs, "components", None)
    lead = () if components is None else (components,)
    rng = np.random.default_rng(seed)
    n = int(sample_count)
    if base is None:
        a = _sample_states(domain, n, rng, lead)
        b = _sample_states(domain, n, rng, lead)
    else:
        base = np.asarray(base, dtype=float)
        a = base[rng.integers(0, base.shape[0], n)]
        b = -a * _broadcast_scale(rng.uniform(0.1, 2.0, n), a.ndim)
    na = np.linalg.norm(a.reshape(n, -1), axis=1)
    s = _broadcast_scale(_log_uniform(rng, *scales, n) / np.where(na > 0, na, 1.0), a.ndim)
    a, b = a * s, b * s
    sx, sg = norm_pair[0] + norm_shift, norm_pair[1] + norm_shift
    dx = interp_norms(a - b, domain, sx, batch_axes=1)
    df = interp_norms(_evaluate(rhs, t, a, domain) - _evaluate(rhs, t, b, domain), domain, sg, batch_axes=1)
    keep = (dx > 1e-14) & (df > 0)
    if np.count_nonzero(keep) < 3:
        raise ValueError("degenerate sample set: separations below 1e-14")
    x, y = np.log(dx[keep]), np.log(df[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return HolderFit(float(slope), float(math.exp(intercept)), r2, int(np.count_nonzero(keep)))


# --------------------------------------------------------------------------
# scalar and lemma inequalities
# --------------------------------------------------------------------------

def check_scalar_inequalities(samples: int = 10_000, seed: int = 0) -> list[CheckResult]:
    """``|a+ - b+| <= |a - b|``, ``|a- - b-| <= |a - b|`` and ``|a+^th - b+^th| <= |a - b|^th``."""
    rng = np.random.default_rng(seed)
    mag = _log_uniform(rng, -6, 6, (2, samples))
    a, b = rng.standard_normal((2, samples)) * mag
    th = rng.uniform(1e-3, 1.0, samples)
    pos = lambda x: np.maximum(x, 0.0)
    neg = lambda x: np.maximum(-x, 0.0)
    d = np.abs(a - b)
    out = [
        CheckResult("scalar |a+ - b+| <= |a - b|", samples, float(np.min(d - np.abs(pos(a) - pos(b))))),
        CheckResult("scalar |a- - b-| <= |a - b|", samples, float(np.min(d - np.abs(neg(a) - neg(b))))),
    ]
    lhs = np.abs(pos(a) ** th - pos(b) ** th)
    rhs = d**th
    # compare relative to the size of the bound: pow() carries one ulp of error
    out.append(CheckResult("scalar |a+^th - b+^th| <= |a - b|^th", samples,
                           float(np.min((rhs - lhs) / np.maximum(1.0, rhs)))))
    return out


def _random_grid_fields(rng, n, size, lead=()):
    """Grid values with a random offset, amplitude and spatial roughness."""
    g = rng.standard_normal((n,) + lead + (size,))
    amp = _log_uniform(rng, -3, 2, n).reshape((-1,) + (1,) * (len(lead) + 1))
    off = rng.standard_normal(n).reshape(amp.shape) * _log_uniform(rng, -3, 1, n).reshape(amp.shape)
    return g * amp + off


def _gl2(grid: Grid, values):
    return np.sqrt(grid.cell_weight * np.sum(values**2, axis=tuple(range(1, values.ndim))))


def _vec_mag(p):
    return np.sqrt(np.sum(p**2, axis=1))


def check_lemma31(kernel: KernelData, samples: int = 10_000, seed: int = 0) -> list[CheckResult]:
    """Growth and Lipschitz bounds of the nonlocal term with ``||K||_2`` from the same quadrature."""
    grid = kernel.grid
    K = kernel.l2_norm
    rng = np.random.default_rng(seed)
    worst_g = worst_l = math.inf
    for n in _chunks(samples):
        u1, u2, t1, t2 = (_random_grid_fields(rng, n, grid.size) for _ in range(4))
        close = rng.random(n) < 0.5
        u2 = np.where(close[:, None], u1 + 1e-6 * u2, u2)
        g1 = kernels.nonlocal_positive_part(kernel.values, grid.weights, u1, t1)
        g2 = kernels.nonlocal_positive_part(kernel.values, grid.weights, u2, t2)
        worst_g = min(worst_g, float(np.min(K * (_gl2(grid, t1) + _gl2(grid, u1)) - _gl2(grid, g1))))
        bound = K * (_gl2(grid, u1 - u2) + _gl2(grid, t1 - t2))
        worst_l = min(worst_l, float(np.min(bound - _gl2(grid, g1 - g2))))
    return [CheckResult("nonlocal growth bound", samples, worst_g),
            CheckResult("nonlocal Lipschitz bound", samples, worst_l)]


def _sample_advective_inputs(rng, n, grid, d):
    u1, u2 = (_random_grid_fields(rng, n, grid.size) for _ in range(2))
    p1, p2 = (_random_grid_fields(rng, n, grid.size, (d,)) for _ in range(2))
    w1, w2 = (_random_grid_fields(rng, n, grid.size, (d,)) for _ in range(2))
    close = rng.random(n) < 0.5
    c1 = close[:, None]
    c2 = close[:, None, None]
    u2 = np.where(c1, u1 + 1e-6 * u2, u2)
    p2 = np.where(c2, p1 + 1e-6 * p2, p2)
    w2 = np.where(c2, w1 + 1e-6 * w2, w2)
    return u1, u2, p1, p2, w1, w2


def check_lemma32(domain: DiscreteDomain, beta: BetaProfile, nu: float, samples: int = 10_000,
                  seed: int = 0, grid: Grid | None = None) -> list[CheckResult]:
    """Growth and difference bounds of the advective negative-part term for one ``nu``."""
    grid = grid or evaluation_grid(domain)
    d = domain.dims
    meas = grid.discrete_measure
    # the bounds use the continuous |Omega|; the grid measure never exceeds it
    meas = max(meas, domain.measure)
    rng = np.random.default_rng(seed)
    W = beta.w1inf
    worst_g = worst_d = worst_a = math.inf
    s = 2.0 - nu
    for n in _chunks(samples):
        u1, u2, p1, p2, w1, w2 = _sample_advective_inputs(rng, n, grid, d)
        g1 = kernels.advective_negative_part(w1, p1, beta(u1), nu)
        g2 = kernels.advective_negative_part(w2, p2, beta(u2), nu)
        winf1 = np.max(_vec_mag(w1), axis=1)
        dwinf = np.max(_vec_mag(w1 - w2), axis=1)
        np1, np2 = _gl2(grid, p1), _gl2(grid, p2)
        ndp, ndu = _gl2(grid, p1 - p2), _gl2(grid, u1 - u2)
        bound = winf1 * np1 + meas ** ((nu - 1) / 2) * beta.beta_inf * np1**s
        worst_g = min(worst_g, float(np.min(bound - _gl2(grid, g1))))
        diff = _gl2(grid, g1 - g2)
        bound = (winf1 * ndp + np2 * dwinf + 2.0 * W * np1**s * ndu ** (nu - 1)
                 + meas ** ((nu - 1) / 2) * beta.beta_inf * ndp**s)
        worst_d = min(worst_d, float(np.min(bound - diff)))
        if nu == 2.0:
            bound = winf1 * ndp + np2 * dwinf + W * ndu
            worst_a = min(worst_a, float(np.min(bound - diff)))
    out = [CheckResult(f"advective growth bound nu={nu!r}", samples, worst_g),
           CheckResult(f"advective difference bound nu={nu!r}", samples, worst_d)]
    if nu == 2.0:
        out.append(CheckResult("advective Lipschitz bound nu=2", samples, worst_a))
    return out


def check_lemma33(domain: DiscreteDomain, beta: BetaProfile, eps: float, samples: int = 10_000,
                  seed: int = 0, grid: Grid | None = None, constant: float | None = None,
                  safety: float = 2.0) -> tuple[CheckResult, float]:
    """Hölder bound of the ``nu = 1`` term with ``p_1`` a resolved gradient.

    The embedding constant ``c`` of ``H^{2 eps} -> L_r`` is calibrated on an
    independent sample (unless given) and multiplied by ``safety``. The last
    term of the bound is ``c 2||beta||_{W^1_inf} ||p_1||_{H^{2 eps}} ||u_1 - u_2||_2^{4 eps / n}``.
    Returns the check and the constant used.
    """
    if not 0.0 < 2 * eps < 0.5:
        raise ValueError(f"need 2 eps in (0, 1/2), got {2 * eps}")
    grid = grid or evaluation_grid(domain)
    d = domain.dims
    if constant is None:
        constant = safety * calibrate_embedding_constant(domain, eps, seed=seed + 7919, grid=grid)
    th = 4.0 * eps / d
    W = beta.w1inf
    rng = np.random.default_rng(seed)
    worst = math.inf
    for n in _chunks(samples):
        u1, u2, _, p2, w1, w2 = _sample_advective_inputs(rng, n, grid, d)
        c1 = random_coefficients(domain, n, rng, decay=(0.0, 4.0))
        c1 *= _broadcast_scale(_log_uniform(rng, -3, 2, n), c1.ndim)
        p1 = gradient_grid(c1, domain, grid).reshape(n, d, grid.size)
        close = rng.random(n) < 0.5
        p2 = np.where(close[:, None, None], p1 + 1e-6 * p2, p2)
        g1 = kernels.advective_negative_part(w1, p1, beta(u1), 1.0)
        g2 = kernels.advective_negative_part(w2, p2, beta(u2), 1.0)
        winf1 = np.max(_vec_mag(w1), axis=1)
        dwinf = np.max(_vec_mag(w1 - w2), axis=1)
        hs = gradient_sobolev_norms(c1, domain, 2.0 * eps, batch_axes=1)
        bound = ((winf1 + beta.beta_inf) * _gl2(grid, p1 - p2) + _gl2(grid, p2) * dwinf
                 + constant * 2.0 * W * hs * _gl2(grid, u1 - u2) ** th)
        worst = min(worst, float(np.min(bound - _gl2(grid, g1 - g2))))
    return CheckResult(f"nu=1 Hölder bound (eps={eps!r}, c={constant:.6g})", samples, worst), constant


def check_embedding_ratio(domain: DiscreteDomain, eps: float, constant: float, samples: int = 10_000,
                          seed: int = 0, grid: Grid | None = None) -> CheckResult:
    """``c ||p||_{H^{2 eps}} - || |p| ||_{L_r}`` over fresh gradient fields."""
    grid = grid or evaluation_grid(domain)
    r, _ = lemma33_exponents(eps, domain.dims)
    rng = np.random.default_rng(seed)
    worst = math.inf
    for n in _chunks(samples):
        c = random_coefficients(domain, n, rng, decay=(0.0, 6.0))
        p = gradient_grid(c, domain, grid).reshape(n, domain.dims, grid.size)
        lr = (grid.cell_weight * np.sum(_vec_mag(p) ** r, axis=1)) ** (1.0 / r)
        hs = gradient_sobolev_norms(c, domain, 2.0 * eps, batch_axes=1)
        worst = min(worst, float(np.min((constant * hs - lr) / hs)))
    return CheckResult(f"embedding H^2eps -> L_r (r={r:.6g})", samples, worst)


def check_autocat_identity(model, samples: int = 1000, seed: int = 0) -> CheckResult:
    """Pointwise ``f_u + f_v = -a v_+^theta`` on the evaluation grid."""
    rng = np.random.default_rng(seed)
    P = model.params
    worst = math.inf
    for n in _chunks(samples):
        u, v = (_random_grid_fields(rng, n, model.grid.size) for _ in range(2))
        fu, fv = kernels.autocatalytic(u, v, P.mu, P.beta, P.theta, P.a)
        target = -P.a * np.maximum(v, 0.0) ** P.theta
        scale = np.maximum(1.0, np.abs(target))
        worst = min(worst, -float(np.max(np.abs(fu + fv - target) / scale)))
    return CheckResult("reaction sum identity", samples, worst)
