"""Independent references for the spectral integrator.

* A dense finite-difference Laplacian with its own scaling-and-squaring
  Padé matrix exponential, driving the same exponential Euler contract on
  grid values. Fed the FD eigensystem, the spectral path must reproduce it
  to roundoff; fed the exact spectrum, the gap is the known FD error.
* An adaptive Runge-Kutta reference for spatially constant reductions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from mildflow.operators import (
    BoundaryCondition,
    DiscreteDomain,
    SpectralField,
    collocation_grid,
    from_grid,
    interp_norms,
    to_grid,
)
from mildflow.solver import TimeMesh, Trajectory, coefficient_rhs

MAX_DENSE_POINTS = 64

__all__ = [
    "DenseOperator",
    "fd_laplacian_matrix",
    "expm",
    "phi1_matrix",
    "dense_expm_solve",
    "ode_reduction_solve",
    "ODEReference",
    "compare_trajectories",
]


# --------------------------------------------------------------------------
# matrix exponential (Higham 2005, degree-13 Padé with scaling and squaring)
# --------------------------------------------------------------------------

_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0, 10559470521600.0, 670442572800.0, 33522128640.0,
    1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def expm(A: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring of the [13/13] Padé approximant."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expm expects a square matrix")
    n = A.shape[0]
    I = np.eye(n)
    norm = np.linalg.norm(A, 1)
    s = 0 if norm <= _THETA13 else int(math.ceil(math.log2(norm / _THETA13)))
    A = A / 2.0**s
    b = _PADE13
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I)
    V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I
    E = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        E = E @ E
    return E


def phi1_matrix(hM: np.ndarray) -> np.ndarray:
    """``phi1(hM) = (hM)^{-1}(e^{hM} - I)`` from the augmented exponential."""
    n = hM.shape[0]
    aug = np.zeros((2 * n, 2 * n))
    aug[:n, :n] = hM
    aug[:n, n:] = np.eye(n)
    return expm(aug)[:n, n:]


# --------------------------------------------------------------------------
# dense FD operator
# --------------------------------------------------------------------------

def _fd_1d(bc: BoundaryCondition, m: int, L: float) -> np.ndarray:
    if bc is BoundaryCondition.DIRICHLET:
        h = L / (m + 1)
        D = (np.diag(-2.0 * np.ones(m)) + np.diag(np.ones(m - 1), 1) + np.diag(np.ones(m - 1), -1)) / h**2
    else:
        # cell-centred grid with mirrored ghost cells
        h = L / m
        D = np.diag(-2.0 * np.ones(m)) + np.diag(np.ones(m - 1), 1) + np.diag(np.ones(m - 1), -1)
        D[0, 0] = D[-1, -1] = -1.0
        D /= h**2
    return D


def fd_laplacian_matrix(domain: DiscreteDomain) -> np.ndarray:
    """3-point (1D) or 5-point (2D) Laplacian on the collocation grid, C-order unknowns."""
    grid = collocation_grid(domain)
    mats = [_fd_1d(domain.bc, m, L) for m, L in zip(grid.points, domain.extents)]
    if domain.dims == 1:
        return mats[0]
    I0, I1 = np.eye(grid.points[0]), np.eye(grid.points[1])
    return np.kron(mats[0], I1) + np.kron(I0, mats[1])


@dataclass(frozen=True, eq=False)
class DenseOperator:
    matrix: np.ndarray
    domain: DiscreteDomain

    @classmethod
    def fd_laplacian(cls, domain: DiscreteDomain) -> "DenseOperator":
        if any(m > MAX_DENSE_POINTS for m in collocation_grid(domain).points):
            raise ValueError(f"dense oracle is limited to {MAX_DENSE_POINTS} points per axis")
        return cls(fd_laplacian_matrix(domain), domain)

    @property
    def grid(self):
        return collocation_grid(self.domain)

    def eigh(self):
        return np.linalg.eigh(self.matrix)


def dense_expm_solve(dense: DenseOperator, rhs, u0: SpectralField, mesh: TimeMesh) -> Trajectory:
    """Exponential Euler on grid values with dense ``expm(hM)`` and ``phi1(hM)``.

    Same stepping contract as :func:`mildflow.solver.solve`, including the
    semigroup predictor for the first rhs evaluation. ``rhs`` is a model rhs
    (its values are moved to and from the grid at every call).
    """
    domain = dense.domain
    if any(m > MAX_DENSE_POINTS for m in dense.grid.points):
        raise ValueError(f"dense oracle is limited to {MAX_DENSE_POINTS} points per axis")
    grid = dense.grid
    f_of = coefficient_rhs(rhs, domain)
    lead = u0.coeffs.shape[: u0.coeffs.ndim - domain.dims]
    P = grid.size

    def grid_rhs(t, v):
        c = from_grid(v.reshape(lead + grid.shape), domain, grid)
        return to_grid(f_of(t, c), domain, grid).reshape(lead + (P,))

    M = dense.matrix
    t = mesh.nodes
    N = mesh.N
    v = to_grid(u0.coeffs, domain, grid).reshape(lead + (P,))
    values = np.empty((N + 1,) + v.shape)
    forcing = np.empty_like(values)
    values[0] = v
    cache = {}

    def props(h):
        key = float(h)
        if key not in cache:
            cache[key] = (expm(h * M), h * phi1_matrix(h * M))
        return cache[key]

    for n in range(N):
        h = t[n + 1] - t[n]
        if n == 0:
            f = grid_rhs(t[1], values[0] @ expm(t[1] * M).T)
        else:
            f = grid_rhs(t[n], values[n])
        E, hP = props(h)
        forcing[n] = f
        values[n + 1] = values[n] @ E.T + f @ hP.T
    forcing[N] = grid_rhs(t[N], values[N])
    back = lambda arr: from_grid(arr.reshape(arr.shape[:-1] + grid.shape), domain, grid)
    return Trajectory(mesh, domain, back(values), back(forcing), {}, None)


# --------------------------------------------------------------------------
# ODE reference
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ODEReference:
    t: np.ndarray
    y: np.ndarray
    success: bool
    message: str
    min_component: float
    nfev: int

    def at(self, t: float) -> np.ndarray:
        return np.array([np.interp(t, self.t, yi) for yi in self.y])


def ode_reduction_solve(rhs_scalar, w0, T: float, tol: float = 1e-10, t_eval=None) -> ODEReference:
    """High-accuracy reference for ``w' = rhs_scalar(t, w)`` on ``[0, T]``.

    Uses the DOP853 embedded Runge-Kutta pair with ``rtol = tol``. Near
    non-Lipschitz points (a component reaching 0 under a fractional power)
    the integration is not aborted; the smallest component value met is
    reported instead.
    """
    if tol < 1e-12:
        raise ValueError("tolerance below 1e-12 is not supported")
    w0 = np.atleast_1d(np.asarray(w0, dtype=float))
    if t_eval is None:
        t_eval = np.linspace(0.0, T, 201)
    sol = solve_ivp(lambda t, y: np.atleast_1d(rhs_scalar(t, y)), (0.0, T), w0, method="DOP853",
                    rtol=tol, atol=tol * 1e-4, t_eval=np.asarray(t_eval, dtype=float))
    return ODEReference(np.asarray(sol.t), np.asarray(sol.y), bool(sol.success), str(sol.message),
                        float(np.min(sol.y)) if sol.y.size else float("nan"), int(sol.nfev))


# --------------------------------------------------------------------------
# comparison
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ComparisonReport:
    times: np.ndarray
    distances: np.ndarray

    @property
    def max(self) -> float:
        return float(np.max(self.distances))


def compare_trajectories(a: Trajectory, b: Trajectory, norm="E0") -> ComparisonReport:
    """Per-node distances in ``E_theta`` (``norm`` a float or ``"E0"``) or ``"grid"`` L2."""
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=0, atol=1e-14):
        raise ValueError("trajectories live on different meshes")
    if a.domain != b.domain:
        raise ValueError("trajectories live on different domains")
    diff = a.states - b.states
    if norm == "grid":
        grid = collocation_grid(a.domain)
        vals = to_grid(diff, a.domain, grid)
        d = np.sqrt(grid.cell_weight * np.sum(vals.reshape(vals.shape[0], -1) ** 2, axis=1))
    else:
        theta = 0.0 if norm == "E0" else float(norm)
        d = interp_norms(diff, a.domain, theta, batch_axes=1)
    return ComparisonReport(a.times.copy(), np.asarray(d))
