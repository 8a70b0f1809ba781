"""Model right-hand sides and the constants of their growth/Hölder bounds.

Three model families are provided:

* the bushfire equation ``f_nu(t, u) = g0(u, Theta(t)) + g_nu(u, grad u, omega(t))``
  on a Dirichlet domain,
* the autocatalytic reaction system on a Neumann domain,
* the scalar power law ``u |u|^(p-1)``.

Pointwise operations happen on an evaluation grid (optionally 3/2
oversampled) and results are projected back onto the eigenbasis. All norms
of grid functions use the grid quadrature, so the inequalities checked in
:mod:`mildflow.checks` hold exactly at the discrete level.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from mildflow import kernels
from mildflow.errors import HypothesisViolation
from mildflow.operators import (
    BoundaryCondition,
    DiscreteDomain,
    Grid,
    SpectralField,
    VectorField,
    evaluation_grid,
    from_grid,
    gradient_grid,
    gradient_sobolev_norms,
    random_coefficients,
    to_grid,
)

__all__ = [
    "NonlinearitySpec",
    "KernelData",
    "BetaProfile",
    "TimeProfile",
    "AutocatParams",
    "BushfireModel",
    "AutocatModel",
    "PowerModel",
    "g0_nonlocal",
    "g_nu",
    "bushfire_rhs",
    "autocat_rhs",
    "power_rhs",
    "bushfire_spec",
    "autocat_spec",
    "power_spec",
    "lemma33_exponents",
    "calibrate_embedding_constant",
]


# --------------------------------------------------------------------------
# assumption data
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NonlinearitySpec:
    """Exponents and constant of a linearly bounded, Hölder continuous rhs.

    The growth bound is ``||f(t,u)||_gamma <= C (1 + ||u||_xi)`` and the
    Hölder bound is::

        ||f(t,u) - f(t,v)||_gamma <= C sum_j (1 + ||u||_xi^(q_j - th_j)
                                             + ||v||_xi^(q_j - th_j)) ||u - v||_xi^th_j

    ``norm_shift`` converts the model's interpolation indices into indices of
    the spectral scale: ``||.||_theta`` is ``interp_norm(., theta + norm_shift)``.
    The bushfire model lives on a shifted scale whose ground space is a
    negative-order Sobolev space.
    """

    gamma: float
    xi: float
    growth_C: float
    hoelder_terms: tuple[tuple[float, float], ...]
    theta0: float | None = None
    norm_shift: float = 0.0
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "hoelder_terms", tuple((float(q), float(t)) for q, t in self.hoelder_terms))
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0.0 <= self.xi < 1.0:
            raise HypothesisViolation("ξ < min{1,1/q}", f"xi = {self.xi}")
        if not self.hoelder_terms:
            raise ValueError("at least one Hölder term is required")
        for q, th in self.hoelder_terms:
            if not (q > 0 and 0 < th <= q):
                raise ValueError(f"Hölder term needs 0 < theta <= q, got (q, theta) = ({q}, {th})")
        if self.growth_C < 0 or not math.isfinite(self.growth_C):
            raise ValueError(f"growth constant must be finite and nonnegative, got {self.growth_C}")
        if (self.theta0 is not None) != (self.gamma == 0):
            raise ValueError("theta0 is required exactly when gamma = 0")
        if self.theta0 is not None and not 0 < self.theta0 < 1:
            raise ValueError(f"theta0 must lie in (0, 1), got {self.theta0}")

    @property
    def q(self) -> float:
        return max(q for q, _ in self.hoelder_terms)

    @property
    def upper(self) -> float:
        """``min{1, 1/q}``, the right end of the admissible window."""
        return min(1.0, 1.0 / self.q)

    def check_xi(self):
        if not self.xi < self.upper:
            raise HypothesisViolation("ξ < min{1,1/q}", f"xi = {self.xi}, min(1, 1/q) = {self.upper}")

    def default_mu(self) -> float:
        return 0.5 * (self.xi + self.upper)

    def check_window(self, mu: float):
        self.check_xi()
        if not self.xi < mu < self.upper:
            raise HypothesisViolation("ξ<μ<min{1,1/q}", f"xi = {self.xi}, mu = {mu}, min(1, 1/q) = {self.upper}")

    def spectral_index(self, theta: float) -> float:
        return theta + self.norm_shift

    def growth_bound(self, u_norm):
        return self.growth_C * (1.0 + np.asarray(u_norm))

    def hoelder_bound(self, u_norm, v_norm, diff_norm):
        u_norm, v_norm, diff_norm = (np.asarray(x, dtype=float) for x in (u_norm, v_norm, diff_norm))
        total = np.zeros(np.broadcast(u_norm, v_norm, diff_norm).shape)
        for q, th in self.hoelder_terms:
            total = total + (1.0 + u_norm ** (q - th) + v_norm ** (q - th)) * diff_norm**th
        return self.growth_C * total


# --------------------------------------------------------------------------
# data profiles
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KernelData:
    """Kernel values ``K(x_i, y_j)`` on an evaluation grid (flattened C order)."""

    values: np.ndarray
    grid: Grid
    descriptor: str = "matrix"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.size, self.grid.size):
            raise ValueError(f"kernel must be {self.grid.size}x{self.grid.size}, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("kernel has non-finite entries")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def l2_norm(self) -> float:
        """``||K||_{L2(Omega x Omega)}`` by the same quadrature as the integral."""
        return float(self.grid.cell_weight * np.linalg.norm(self.values))

    @classmethod
    def gaussian(cls, grid: Grid, amplitude: float, sigma: float) -> "KernelData":
        """``K(x, y) = A exp(-|x - y|^2 / sigma^2)``."""
        if sigma <= 0:
            raise ValueError(f"kernel width must be positive, got {sigma}")
        pts = np.stack([c.ravel() for c in grid.coordinates()], axis=1)
        d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        return cls(amplitude * np.exp(-d2 / sigma**2), grid, f"preset:gaussian({amplitude!r}, {sigma!r})")

    @classmethod
    def zero(cls, grid: Grid) -> "KernelData":
        return cls(np.zeros((grid.size, grid.size)), grid, "zero")


@dataclass(frozen=True)
class BetaProfile:
    """Bounded Lipschitz function ``beta``; ``tanh`` means ``b tanh(s / s_ref)``."""

    kind: str
    b: float
    s_ref: float = 1.0

    def __post_init__(self):
        if self.kind not in ("tanh", "constant"):
            raise ValueError(f"unknown beta profile {self.kind!r}")
        if self.kind == "tanh" and not self.s_ref > 0:
            raise ValueError("tanh profile needs s_ref > 0")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            return np.full_like(s, self.b)
        return self.b * np.tanh(s / self.s_ref)

    @property
    def beta_inf(self) -> float:
        return abs(self.b)

    @property
    def beta_lip(self) -> float:
        return abs(self.b) / self.s_ref if self.kind == "tanh" else 0.0

    @property
    def w1inf(self) -> float:
        return max(self.beta_inf, self.beta_lip)

    def descriptor(self) -> str:
        if self.kind == "constant":
            return f"constant({self.b!r})"
        return f"tanh({self.b!r}, {self.s_ref!r})"


@dataclass(frozen=True, eq=False)
class TimeProfile:
    """Vector-valued function of time: piecewise-linear table or a sine."""

    kind: str
    times: np.ndarray = field(default_factory=lambda: np.zeros(1))
    values: np.ndarray = field(default_factory=lambda: np.zeros((1, 1)))
    params: tuple[float, ...] = ()
    descriptor: str = ""

    @classmethod
    def constant(cls, *values: float) -> "TimeProfile":
        vals = np.asarray(values, dtype=float).reshape(1, -1)
        desc = "constant(" + ", ".join(repr(float(v)) for v in values) + ")"
        return cls("table", np.zeros(1), vals, descriptor=desc)

    @classmethod
    def table(cls, times, values, descriptor: str = "table") -> "TimeProfile":
        t = np.asarray(times, dtype=float).ravel()
        v = np.asarray(values, dtype=float).reshape(t.size, -1)
        if t.size == 0 or np.any(np.diff(t) <= 0):
            raise ValueError("profile times must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile has non-finite values")
        return cls("table", t, v, descriptor=descriptor)

    @classmethod
    def sine(cls, mean: float, amp: float, period: float) -> "TimeProfile":
        if period <= 0:
            raise ValueError("sine profile needs a positive period")
        return cls("sine", params=(float(mean), float(amp), float(period)),
                   descriptor=f"sine({mean!r}, {amp!r}, {period!r})")

    @property
    def ncols(self) -> int:
        return 1 if self.kind == "sine" else self.values.shape[1]

    def __call__(self, t: float) -> np.ndarray:
        if self.kind == "sine":
            mean, amp, period = self.params
            return np.array([mean + amp * math.sin(2 * math.pi * t / period)])
        if self.times.size == 1:
            return self.values[0].copy()
        return np.array([np.interp(t, self.times, self.values[:, c]) for c in range(self.ncols)])

    @property
    def sup_norm(self) -> float:
        """Sup over time of the Euclidean norm of the value vector."""
        if self.kind == "sine":
            mean, amp, _ = self.params
            return abs(mean) + abs(amp)
        return float(np.max(np.linalg.norm(self.values, axis=1)))

    @property
    def lipschitz(self) -> float:
        if self.kind == "sine":
            _, amp, period = self.params
            return 2 * math.pi * abs(amp) / period
        if self.times.size == 1:
            return 0.0
        slopes = np.linalg.norm(np.diff(self.values, axis=0), axis=1) / np.diff(self.times)
        return float(np.max(slopes))

    def hoelder_constant(self, theta: float) -> float:
        """Constant of ``|f(t) - f(s)| <= H |t - s|^theta`` from min(L|t-s|, 2 sup)."""
        return self.lipschitz**theta * (2.0 * self.sup_norm) ** (1.0 - theta)


@dataclass(frozen=True)
class AutocatParams:
    mu: float
    beta: float
    theta: float
    a: float

    def __post_init__(self):
        for name in ("mu", "beta", "theta"):
            val = getattr(self, name)
            if not 0.0 < val <= 1.0:
                raise HypothesisViolation("μ,β,θ ∈ (0,1]", f"{name} = {val}")
        if self.mu + self.beta > 1.0 + 1e-15:
            raise HypothesisViolation("μ+β ≤ 1", f"mu + beta = {self.mu + self.beta}")


# --------------------------------------------------------------------------
# pointwise building blocks
# --------------------------------------------------------------------------

def _lead_flat(coeffs: np.ndarray, domain: DiscreteDomain):
    lead = coeffs.shape[: coeffs.ndim - domain.dims]
    return lead, coeffs.reshape((-1,) + domain.mode_shape)


def _grid_flat(values: np.ndarray, grid: Grid) -> np.ndarray:
    return values.reshape(values.shape[0], grid.size)


def _as_grid_values(obj, grid: Grid) -> np.ndarray:
    """Scalar, grid array or SpectralField -> flattened grid values."""
    if isinstance(obj, SpectralField):
        return to_grid(obj.coeffs, obj.domain, grid).reshape(-1)
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 0:
        return np.full(grid.size, float(arr))
    return arr.reshape(-1)


def g0_nonlocal(u: SpectralField, Theta, K: KernelData) -> SpectralField:
    """``x -> int (u(y) - Theta(y))_+ K(x, y) dy`` by grid quadrature."""
    grid = K.grid
    if grid.domain != u.domain:
        raise ValueError("kernel grid and field live on different domains")
    uv = _as_grid_values(u, grid)[None]
    th = _as_grid_values(Theta, grid)[None]
    out = kernels.nonlocal_positive_part(K.values, grid.weights, uv, th)
    return SpectralField(u.domain, from_grid(out.reshape(grid.shape), u.domain, grid))


def g_nu(u: SpectralField, p: VectorField, omega, beta: BetaProfile, nu: float,
         grid: Grid | None = None) -> SpectralField:
    """``(omega . p + beta(u) |p|^(2-nu))_-`` with ``|p|^0 = 1``, projected back.

    ``omega`` is a constant vector or an array of shape ``(dims, *grid.shape)``.
    """
    if not 1.0 <= nu <= 2.0:
        raise HypothesisViolation("ν ∈ [1,2]", f"nu = {nu}")
    domain = u.domain
    if p.domain != domain:
        raise ValueError("u and p live on different domains")
    grid = grid or evaluation_grid(domain)
    d = domain.dims
    uv = _as_grid_values(u, grid)[None]
    pv = p.grid_values(grid).reshape(1, d, grid.size)
    om = np.broadcast_to(np.asarray(omega, dtype=float).reshape(d, -1), (d, grid.size))[None]
    out = kernels.advective_negative_part(om, pv, beta(uv), nu)
    return SpectralField(domain, from_grid(out.reshape(grid.shape), domain, grid))


# --------------------------------------------------------------------------
# models
# --------------------------------------------------------------------------

class BushfireModel:
    """``f_nu(t, u) = g0(u, Theta(t)) + g_nu(u, grad u, omega(t))`` on a Dirichlet domain.

    ``theta`` is a scalar profile (spatially uniform ignition threshold) and
    ``omega`` a vector profile with one column per spatial direction.
    """

    components = None

    def __init__(self, domain: DiscreteDomain, kernel: KernelData, beta: BetaProfile, nu: float,
                 theta: TimeProfile, omega: TimeProfile, oversample: bool = False):
        if domain.bc is not BoundaryCondition.DIRICHLET:
            raise HypothesisViolation("Dirichlet boundary condition", f"got {domain.bc.value}")
        if not 1.0 <= nu <= 2.0:
            raise HypothesisViolation("ν ∈ [1,2]", f"nu = {nu}")
        if kernel is None or beta is None or theta is None or omega is None:
            raise ValueError("bushfire model needs kernel, beta, theta and omega data")
        self.domain = domain
        self.grid = evaluation_grid(domain, oversample)
        if kernel.grid is not self.grid and kernel.grid.shape != self.grid.shape:
            raise ValueError("kernel is not sampled on the evaluation grid")
        if theta.ncols != 1:
            raise ValueError("theta profile must be scalar")
        if omega.ncols != domain.dims:
            raise ValueError(f"omega profile needs {domain.dims} components, got {omega.ncols}")
        self.kernel = kernel
        self.beta = beta
        self.nu = float(nu)
        self.theta = theta
        self.omega = omega
        self.oversample = oversample

    def coeff_rhs(self, t: float, coeffs: np.ndarray) -> np.ndarray:
        lead, c = _lead_flat(np.asarray(coeffs, dtype=float), self.domain)
        grid, S, d = self.grid, c.shape[0], self.domain.dims
        u = _grid_flat(to_grid(c, self.domain, grid), grid)
        theta = np.full_like(u, float(self.theta(t)[0]))
        total = kernels.nonlocal_positive_part(self.kernel.values, grid.weights, u, theta)
        p = gradient_grid(c, self.domain, grid).reshape(S, d, grid.size)
        om = np.broadcast_to(self.omega(t).reshape(1, d, 1), p.shape)
        total += kernels.advective_negative_part(om, p, self.beta(u), self.nu)
        out = from_grid(total.reshape((S,) + grid.shape), self.domain, grid)
        return out.reshape(lead + self.domain.mode_shape)

    def __call__(self, t: float, u: SpectralField) -> SpectralField:
        return SpectralField(self.domain, self.coeff_rhs(t, u.coeffs))


class AutocatModel:
    """``(u, v) -> (-u_+^mu v_+^beta, u_+^mu v_+^beta - a v_+^theta)`` on a Neumann domain."""

    components = 2

    def __init__(self, domain: DiscreteDomain, params: AutocatParams, oversample: bool = False):
        if domain.bc is not BoundaryCondition.NEUMANN:
            raise HypothesisViolation("homogeneous Neumann boundary conditions", f"got {domain.bc.value}")
        self.domain = domain
        self.params = params
        self.grid = evaluation_grid(domain, oversample)
        self.oversample = oversample

    def coeff_rhs(self, t: float, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[coeffs.ndim - self.domain.dims - 1] != 2:
            raise ValueError("autocatalytic state needs a component axis of length 2")
        lead, c = _lead_flat(coeffs, self.domain)
        grid = self.grid
        vals = to_grid(c, self.domain, grid).reshape(-1, 2, grid.size)
        P = self.params
        fu, fv = kernels.autocatalytic(vals[:, 0], vals[:, 1], P.mu, P.beta, P.theta, P.a)
        out = np.stack([fu, fv], axis=1).reshape((-1,) + grid.shape)
        return from_grid(out, self.domain, grid).reshape(lead + self.domain.mode_shape)

    def __call__(self, t: float, w: SpectralField) -> SpectralField:
        return SpectralField(self.domain, self.coeff_rhs(t, w.coeffs))


class PowerModel:
    """``u -> u |u|^(p-1)`` with value 0 at 0."""

    components = None

    def __init__(self, domain: DiscreteDomain, p: float, oversample: bool = False):
        if not 0.0 < p < 1.0:
            raise HypothesisViolation("p ∈ (0,1)", f"p = {p}")
        self.domain = domain
        self.p = float(p)
        self.grid = evaluation_grid(domain, oversample)
        self.oversample = oversample

    def coeff_rhs(self, t: float, coeffs: np.ndarray) -> np.ndarray:
        lead, c = _lead_flat(np.asarray(coeffs, dtype=float), self.domain)
        grid = self.grid
        u = _grid_flat(to_grid(c, self.domain, grid), grid)
        out = kernels.signed_power(u, self.p).reshape((-1,) + grid.shape)
        return from_grid(out, self.domain, grid).reshape(lead + self.domain.mode_shape)

    def __call__(self, t: float, u: SpectralField) -> SpectralField:
        return SpectralField(self.domain, self.coeff_rhs(t, u.coeffs))


def bushfire_rhs(t: float, u: SpectralField, model: BushfireModel) -> SpectralField:
    return model(t, u)


def autocat_rhs(w: SpectralField, params: AutocatParams, oversample: bool = False) -> SpectralField:
    """Autocatalytic reaction terms of a two-component field ``w = (u, v)``."""
    return AutocatModel(w.domain, params, oversample)(0.0, w)


def power_rhs(u: SpectralField, p: float, oversample: bool = False) -> SpectralField:
    return PowerModel(u.domain, p, oversample)(0.0, u)


# --------------------------------------------------------------------------
# constants
# --------------------------------------------------------------------------

def lemma33_exponents(eps: float, n: int) -> tuple[float, float]:
    """Exponents ``(r, q)`` with ``1/r = 1/2 - 2 eps/n`` and ``1/q = 2 eps/n``."""
    return 1.0 / (0.5 - 2.0 * eps / n), n / (2.0 * eps)


def calibrate_embedding_constant(domain: DiscreteDomain, eps: float, samples: int = 1000,
                                 seed: int = 0, grid: Grid | None = None) -> float:
    """Largest ratio ``|| |p| ||_{L_r} / ||p||_{H^{2 eps}}`` over random gradient fields."""
    grid = grid or evaluation_grid(domain)
    r, _ = lemma33_exponents(eps, domain.dims)
    rng = np.random.default_rng(seed)
    c = random_coefficients(domain, samples, rng, decay=(0.0, 6.0))
    p = gradient_grid(c, domain, grid).reshape(samples, domain.dims, grid.size)
    mag = np.sqrt(np.sum(p**2, axis=1))
    lr = (grid.cell_weight * np.sum(mag**r, axis=1)) ** (1.0 / r)
    hs = gradient_sobolev_norms(c, domain, 2.0 * eps, batch_axes=1)
    return float(np.max(lr / hs))


def bushfire_spec(model: BushfireModel, eps: float, xi: float | None = None,
                  embedding_constant: float | None = None, safety: float = 2.0) -> NonlinearitySpec:
    """Exponents and a valid constant for the bushfire rhs on the shifted scale.

    The ground space is ``H^{-2 eps}`` so model index ``theta`` corresponds to
    spectral index ``theta - eps``; ``gamma = eps`` lands on ``L2`` and
    ``2 xi = 1 + 4 eps`` on ``H^{1 + 2 eps}``.
    """
    if not 0.0 < 2 * eps < 1.0 / 7.0:
        raise HypothesisViolation("2ε ∈ (0,1/7)", f"2 eps = {2 * eps}")
    xi_default = 0.5 + 2.0 * eps
    if xi is None:
        xi = xi_default
    elif abs(2 * xi - (1 + 4 * eps)) > 1e-12:
        raise HypothesisViolation("2ξ = 1+4ε", f"xi = {xi}, eps = {eps}")
    nu, n = model.nu, model.domain.dims
    K = model.kernel.l2_norm
    w_inf = model.omega.sup_norm
    b = model.beta
    measure = model.domain.measure
    growth = K * (1.0 + model.theta.sup_norm * math.sqrt(measure)) + w_inf + measure ** ((nu - 1) / 2) * b.beta_inf
    notes = []
    if nu == 2.0:
        terms = [(1.0, 1.0), (1.0, 1.0)]
        lip = K + w_inf + b.w1inf
    elif nu == 1.0:
        c_emb = embedding_constant
        if c_emb is None:
            c_emb = calibrate_embedding_constant(model.domain, eps, grid=model.grid)
        c = safety * c_emb
        th = 4.0 * eps / n
        terms = [(1.0, 1.0), (1.0 + th, th)]
        lip = max(K + w_inf + b.beta_inf, 2.0 * c * b.w1inf)
        notes.append(f"embedding constant c = {c!r} (calibrated {c_emb!r} x safety {safety!r})")
    else:
        terms = [(1.0, 1.0), (1.0, nu - 1.0), (2.0 - nu, 2.0 - nu)]
        lip = max(K + w_inf, 2.0 * b.w1inf, measure ** ((nu - 1) / 2) * b.beta_inf)
    if n < 2:
        notes.append("outside the theorem hypotheses (n >= 2): desk-scale 1D run")
    spec = NonlinearitySpec(gamma=eps, xi=xi, growth_C=float(max(growth, lip)),
                            hoelder_terms=tuple(terms), theta0=None, norm_shift=-eps, notes=tuple(notes))
    spec.check_xi()
    return spec


def autocat_spec(params: AutocatParams, domain: DiscreteDomain) -> NonlinearitySpec:
    """``xi = gamma = 0`` on ``L2(Omega, R^2)``; exponents (theta, beta, mu) per reaction term."""
    m = domain.measure
    k_react = m ** ((1.0 - params.mu - params.beta) / 2.0)
    k_decay = m ** ((1.0 - params.theta) / 2.0)
    C = math.sqrt(2.0) * k_react + abs(params.a) * k_decay
    terms = ((params.theta, params.theta),
             (params.mu + params.beta, params.beta),
             (params.mu + params.beta, params.mu))
    return NonlinearitySpec(gamma=0.0, xi=0.0, growth_C=C, hoelder_terms=terms, theta0=0.5,
                            notes=("autonomous: time-Hölder condition holds for any theta0",))


def power_spec(p: float, domain: DiscreteDomain, xi: float = 0.0) -> NonlinearitySpec:
    """Single term ``(p, p)`` with ``C = |Omega|^((1-p)/2)`` (``2^(1-p) <= 3`` absorbs the rest)."""
    if not 0.0 < p < 1.0:
        raise HypothesisViolation("p ∈ (0,1)", f"p = {p}")
    spec = NonlinearitySpec(gamma=0.0, xi=float(xi), growth_C=domain.measure ** ((1.0 - p) / 2.0),
                            hoelder_terms=((p, p),), theta0=0.5,
                            notes=("autonomous: time-Hölder condition holds for any theta0",))
    spec.check_xi()
    return spec


_CALL = re.compile(r"^\s*([A-Za-z][\w-]*)\s*\((.*)\)\s*$")


def parse_call(text: str) -> tuple[str, list[float]]:
    """Split ``name(a, b, ...)`` into the name and float arguments."""
    m = _CALL.match(text)
    if not m:
        raise ValueError(f"expected name(args...), got {text!r}")
    args = [a.strip() for a in m.group(2).split(",") if a.strip()]
    return m.group(1), [float(a) for a in args]
