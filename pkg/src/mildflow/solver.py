"""Exponential Euler integration of ``u' = Au + f(t, u)`` in mild form.

The production scheme discretizes the variation-of-constants formula with
the integrand frozen at the left node,

    u_{n+1} = e^{hA} u_n + h phi1(hA) f(t_n, u_n),

on graded meshes ``t_n = T (n/N)^r``. The right-hand side is never evaluated
at ``t = 0``: the first step uses ``f(t_1, e^{t_1 A} u_0)``, so rough data only
enter the nonlinearity after the semigroup has smoothed them.

The module also holds the verification instruments built on the same
formula: the Duhamel residual, the weighted a priori monitor, a Picard
iteration of the fixed-point map and a two-trajectory stability probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from mildflow.errors import SolverError
from mildflow.nonlinearity import NonlinearitySpec
from mildflow.operators import (
    SemigroupOperator,
    SpectralField,
    interp_norms,
    phi1,
    phi2,
)

__all__ = [
    "TimeMesh",
    "SolverConfig",
    "Trajectory",
    "build_graded_mesh",
    "step_exponential_euler",
    "solve",
    "duhamel_residual",
    "apriori_monitor",
    "picard_verify",
    "stability_probe",
    "coefficient_rhs",
]


@dataclass(frozen=True)
class TimeMesh:
    T: float
    N: int
    grading: float = 1.0

    @cached_property
    def nodes(self) -> np.ndarray:
        t = self.T * (np.arange(self.N + 1) / self.N) ** self.grading
        t[-1] = self.T
        t.setflags(write=False)
        return t

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    def refined(self, factor: int = 2) -> "TimeMesh":
        return TimeMesh(self.T, self.N * factor, self.grading)


def build_graded_mesh(T: float, N: int, r: float = 2.0) -> TimeMesh:
    if not (math.isfinite(T) and T > 0):
        raise ValueError(f"horizon must be positive, got {T}")
    if int(N) != N or N < 1:
        raise ValueError(f"step count must be a positive integer, got {N}")
    if not r >= 1:
        raise ValueError(f"grading exponent must be >= 1, got {r}")
    return TimeMesh(float(T), int(N), float(r))


@dataclass(frozen=True)
class SolverConfig:
    """Mesh plus the norm indices used by the monitors.

    ``xi`` and ``gamma`` are model indices; monitors evaluate them at
    ``index + norm_shift`` on the spectral scale. With a ``spec`` attached the
    indices come from it and ``mu`` is checked against the admissible window
    (defaulting to its midpoint).
    """

    mesh: TimeMesh
    mu: float | None = None
    xi: float | None = None
    gamma: float | None = None
    norm_shift: float | None = None
    spec: NonlinearitySpec | None = None
    monitors: bool = True
    oversample: bool = False
    extra_norms: tuple[float, ...] = ()

    def __post_init__(self):
        spec = self.spec
        if spec is not None:
            for name in ("xi", "gamma", "norm_shift"):
                if getattr(self, name) is None:
                    object.__setattr__(self, name, getattr(spec, name))
            if self.mu is None:
                object.__setattr__(self, "mu", spec.default_mu())
            spec.check_window(self.mu)
        else:
            defaults = {"xi": 0.0, "gamma": 0.0, "norm_shift": 0.0}
            for name, val in defaults.items():
                if getattr(self, name) is None:
                    object.__setattr__(self, name, val)
            if self.mu is None:
                object.__setattr__(self, "mu", 0.5 * (self.xi + 1.0))
        object.__setattr__(self, "extra_norms", tuple(float(x) for x in self.extra_norms))


def coefficient_rhs(rhs, domain):
    """Adapt ``rhs`` to a function on raw coefficient arrays."""
    if rhs is None:
        return lambda t, c: np.zeros_like(c)
    if hasattr(rhs, "coeff_rhs"):
        return rhs.coeff_rhs
    return lambda t, c: np.asarray(rhs(t, SpectralField(domain, c)).coeffs, dtype=float)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States on the mesh nodes plus per-node monitor columns.

    ``forcing[n]`` is the rhs value used on the step leaving node ``n``
    (``forcing[0]`` is the predictor evaluation at ``t_1``); the last row is
    ``f(t_N, u_N)`` and only feeds the monitor.
    """

    mesh: TimeMesh
    domain: object
    states: np.ndarray
    forcing: np.ndarray
    monitors: dict = field(default_factory=dict)
    config: SolverConfig | None = None

    @property
    def times(self) -> np.ndarray:
        return self.mesh.nodes

    def field(self, n: int) -> SpectralField:
        return SpectralField(self.domain, self.states[n])

    @property
    def final(self) -> SpectralField:
        return self.field(-1)


def _norms(states, domain, theta):
    return interp_norms(states, domain, theta, batch_axes=1)


def _monitor_columns(traj_states, forcing, domain, times, config: SolverConfig):
    shift = config.norm_shift
    cols = {
        "E0_norm": _norms(traj_states, domain, shift),
        "Exi_norm": _norms(traj_states, domain, config.xi + shift),
    }
    cols["weighted_norm"] = times**config.mu * cols["Exi_norm"]
    cols["rhs_norm"] = _norms(forcing, domain, config.gamma + shift)
    for theta in config.extra_norms:
        cols[f"E{theta!r}_norm"] = _norms(traj_states, domain, theta + shift)
    return cols


def step_exponential_euler(op: SemigroupOperator, rhs, t_n: float, h: float, u_n: SpectralField) -> SpectralField:
    """One step ``e^{hA} u_n + h phi1(hA) f(t_n, u_n)``."""
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    f = coefficient_rhs(rhs, op.domain)(t_n, u_n.coeffs)
    return SpectralField(op.domain, op.decay(h) * u_n.coeffs + h * op.phi1_factor(h) * f)


def solve(op: SemigroupOperator, rhs, u0: SpectralField, config: SolverConfig) -> Trajectory:
    """March the mesh with exponential Euler; see the module docstring."""
    if u0.domain != op.domain:
        raise ValueError("initial datum and operator live on different domains")
    f_of = coefficient_rhs(rhs, op.domain)
    t = config.mesh.nodes
    N = config.mesh.N
    states = np.empty((N + 1,) + u0.coeffs.shape)
    forcing = np.empty_like(states)
    states[0] = u0.coeffs
    if not np.all(np.isfinite(states[0])):
        raise SolverError("non-finite initial datum", node=0)
    lam = op.eigenvalues
    for n in range(N):
        h = t[n + 1] - t[n]
        if n == 0:
            # semigroup predictor: rhs is first evaluated at t_1
            f = f_of(t[1], np.exp(-lam * t[1]) * states[0])
        else:
            f = f_of(t[n], states[n])
        forcing[n] = f
        states[n + 1] = np.exp(-lam * h) * states[n] + h * phi1(lam * h) * f
        if not np.all(np.isfinite(states[n + 1])):
            raise SolverError("non-finite state", node=n + 1)
    forcing[N] = f_of(t[N], states[N])
    monitors = _monitor_columns(states, forcing, op.domain, t, config) if config.monitors else {}
    states.setflags(write=False)
    forcing.setflags(write=False)
    return Trajectory(config.mesh, op.domain, states, forcing, monitors, config)


def _pl_exponential_step(lam, s, Q, Fa, Fb):
    """``e^{sA} Q + int_0^s e^{(s-r)A} F(r) dr`` for ``F`` linear from ``Fa`` to ``Fb``."""
    z = lam * s
    return np.exp(-z) * Q + s * (phi1(z) * Fa + phi2(z) * (Fb - Fa))


def duhamel_residual(traj: Trajectory, op: SemigroupOperator, rhs, refinement: int = 4,
                     theta: float | None = None) -> np.ndarray:
    """``||u_n - e^{t_n A} u_0 - Q_n||`` with exponential quadrature of the Duhamel integral.

    The integrand is sampled at ``refinement`` sub-nodes per step along the
    scheme's dense output ``u(t_j + s) = e^{sA} u_j + s phi1(sA) f_j`` and
    reconstructed piecewise linearly. At ``tau = 0`` (where ``f`` need not
    be defined) the first sub-node value is extrapolated as a constant. The
    norm defaults to the ground space of the trajectory's configuration.
    """
    if traj.domain != op.domain:
        raise ValueError("trajectory and operator live on different domains")
    if int(refinement) < 1:
        raise ValueError("refinement must be a positive integer")
    R = int(refinement)
    f_of = coefficient_rhs(rhs, op.domain)
    if theta is None:
        theta = traj.config.norm_shift if traj.config is not None else 0.0
    t = traj.times
    lam = op.eigenvalues
    u0 = traj.states[0]
    Q = np.zeros_like(u0)
    out = np.zeros(t.size)
    F_prev = None
    for j in range(t.size - 1):
        hj = t[j + 1] - t[j]
        sub = np.linspace(0.0, hj, R + 1)
        vals = []
        for i, s in enumerate(sub):
            if i == 0:
                if j == 0:
                    vals.append(None)
                    continue
                vals.append(F_prev)
                continue
            u_s = np.exp(-lam * s) * traj.states[j] + s * phi1(lam * s) * traj.forcing[j]
            vals.append(f_of(t[j] + s, u_s))
        if vals[0] is None:
            vals[0] = vals[1]
        for i in range(R):
            Q = _pl_exponential_step(lam, sub[i + 1] - sub[i], Q, vals[i], vals[i + 1])
        F_prev = vals[-1]
        r = traj.states[j + 1] - np.exp(-lam * t[j + 1]) * u0 - Q
        out[j + 1] = float(interp_norms(r, op.domain, theta))
    return out


@dataclass(frozen=True)
class AprioriReport:
    sup_weighted: float
    K_hat: float
    argmax_t: float
    first_node_value: float
    finite: bool
    decreasing_to_zero: bool


def apriori_monitor(traj: Trajectory, mu: float | None = None, xi: float | None = None) -> AprioriReport:
    """Weighted sup ``K = sup_n t_n^mu ||u(t_n)||_xi`` and its behaviour near ``t = 0``.

    ``decreasing_to_zero`` is true when, inside the first quarter of the
    mesh, the weighted norm rises monotonically from node 1 up to its local
    maximum, i.e. it decreases towards the initial time.
    """
    cfg = traj.config
    if cfg is None or (not traj.monitors and (mu is None or xi is None)):
        raise ValueError("trajectory carries no monitor records")
    mu = cfg.mu if mu is None else mu
    xi = cfg.xi if xi is None else xi
    shift = cfg.norm_shift if cfg is not None else 0.0
    if traj.monitors and mu == cfg.mu and xi == cfg.xi:
        weighted = np.asarray(traj.monitors["weighted_norm"])
    else:
        weighted = traj.times**mu * _norms(traj.states, traj.domain, xi + shift)
    w = weighted[1:]
    j = int(np.argmax(w))
    head = w[: max(2, len(w) // 4)]
    peak = int(np.argmax(head))
    head = head[: peak + 1]
    tol = 1e-12 * max(1.0, float(np.max(np.abs(head))))
    return AprioriReport(
        sup_weighted=float(w[j]),
        K_hat=float(w[j]),
        argmax_t=float(traj.times[j + 1]),
        first_node_value=float(w[0]),
        finite=bool(np.all(np.isfinite(weighted))),
        decreasing_to_zero=bool(peak > 0 and np.all(np.diff(head) >= -tol)),
    )


@dataclass(frozen=True, eq=False)
class PicardReport:
    distances: np.ndarray
    converged: bool
    iterations: int
    hoelder_exponent: float
    hoelder_constant: float
    fixed_point: np.ndarray


def _duhamel_map(lam, t, u0, F):
    """Fixed-point map on mesh nodes with piecewise-linear exponential quadrature.

    ``F[n] = f(t_n, U_n)`` for ``n >= 1``; the first interval uses the
    constant ``F[1]``.
    """
    out = np.empty((t.size,) + u0.shape)
    out[0] = u0
    Q = np.zeros_like(u0)
    for j in range(t.size - 1):
        s = t[j + 1] - t[j]
        Fa = F[1] if j == 0 else F[j]
        Q = _pl_exponential_step(lam, s, Q, Fa, F[j + 1])
        out[j + 1] = np.exp(-lam * t[j + 1]) * u0 + Q
    return out


def picard_verify(op: SemigroupOperator, rhs, u0: SpectralField, config: SolverConfig,
                  max_iter: int = 50, tol: float = 1e-10) -> PicardReport:
    """Iterate the discretized fixed-point map from the free evolution ``e^{tA} u0``.

    ``d_k = max_{n >= 1} t_n^mu ||U^{k+1}_n - U^k_n||_xi``. A Hölder exponent
    of the map is fitted from successive pairs ``(d_k, d_{k+1})``.
    """
    if op.domain.mode_count > 256 or config.mesh.N > 512:
        raise ValueError("picard_verify is a small-instance tool (<= 256 modes, N <= 512)")
    f_of = coefficient_rhs(rhs, op.domain)
    t = config.mesh.nodes
    lam = op.eigenvalues
    theta = config.xi + config.norm_shift
    U = np.exp(-np.multiply.outer(t, lam)).reshape((t.size,) + (1,) * (u0.coeffs.ndim - lam.ndim) + lam.shape) * u0.coeffs
    dists = []
    converged = False
    for _ in range(max_iter):
        F = np.empty_like(U)
        F[0] = 0.0
        for n in range(1, t.size):
            F[n] = f_of(t[n], U[n])
        U_new = _duhamel_map(lam, t, u0.coeffs, F)
        d = float(np.max(t[1:] ** config.mu * _norms(U_new[1:] - U[1:], op.domain, theta)))
        dists.append(d)
        U = U_new
        if not math.isfinite(d):
            break
        if d <= tol:
            converged = True
            break
    d = np.asarray(dists)
    pos = d[(d > 1e-300)]
    if pos.size >= 3:
        x, y = np.log(pos[:-1]), np.log(pos[1:])
        slope, intercept = np.polyfit(x, y, 1)
        expo, const = float(slope), float(math.exp(intercept))
    else:
        expo, const = float("nan"), float("nan")
    return PicardReport(d, converged, len(dists), expo, const, U)


@dataclass(frozen=True, eq=False)
class StabilityReport:
    times: np.ndarray
    amplification: np.ndarray
    rate: float
    r2: float
    bounded: bool
    max_excess: float


def stability_probe(op: SemigroupOperator, rhs, u0: SpectralField, delta0: SpectralField,
                    config: SolverConfig, margin: float = 0.05) -> StabilityReport:
    """Amplification ``||delta(t_n)||_2 / ||delta(0)||_2`` of a perturbation.

    The rate ``C`` is the least-squares slope of ``log A`` against ``t``
    through the origin (``A(0) = 1``); ``bounded`` checks
    ``A <= (1 + margin) e^{C t}`` at every node and ``r2`` is the centred
    coefficient of determination of the fit.
    """
    d0 = float(np.linalg.norm(delta0.coeffs))
    if d0 == 0:
        raise ValueError("perturbation must be nonzero")
    cfg = SolverConfig(config.mesh, mu=config.mu, xi=config.xi, gamma=config.gamma,
                       norm_shift=config.norm_shift, monitors=False)
    a = solve(op, rhs, u0, cfg)
    b = solve(op, rhs, u0 + delta0, cfg)
    diff = b.states - a.states
    amp = np.sqrt(np.sum(diff.reshape(diff.shape[0], -1) ** 2, axis=1)) / d0
    t = a.times
    tt, la = t[1:], np.log(amp[1:])
    rate = float(np.sum(tt * la) / np.sum(tt * tt))
    ss_res = float(np.sum((la - rate * tt) ** 2))
    ss_tot = float(np.sum((la - la.mean()) ** 2))
    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    excess = amp / np.exp(rate * t)
    return StabilityReport(t, amp, rate, r2, bool(np.all(excess <= 1.0 + margin)), float(excess.max()))
