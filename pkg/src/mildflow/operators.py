"""Rectangular domains, the Laplacian eigenbasis and its semigroup.

Fields are stored as coefficient arrays in the orthonormal eigenbasis of
the Dirichlet (sine products) or Neumann (cosine products) Laplacian. Modes
are laid out as an n-d array in lexicographic multi-index order; a field may
carry leading axes (components of a system, or a batch of samples), which
every operation here broadcasts over.

Grid values live on tensor grids: interior nodes ``x_j = j L/(M+1)`` for
Dirichlet and midpoints ``x_j = (j+1/2) L/M`` for Neumann. On the
collocation grid (``M`` equal to the modes per axis) the basis is exactly
orthonormal for the grid quadrature, so the transform pair is an isometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

PHI1_SERIES_THRESHOLD = 1e-4
PHI2_SERIES_THRESHOLD = 1e-1
OVERSAMPLING_FACTOR = 1.5

__all__ = [
    "BoundaryCondition",
    "DiscreteDomain",
    "Grid",
    "SemigroupOperator",
    "SpectralField",
    "VectorField",
    "build_domain",
    "collocation_grid",
    "evaluation_grid",
    "laplacian_eigensystem",
    "transform",
    "to_grid",
    "from_grid",
    "apply_semigroup",
    "phi1",
    "phi2",
    "phi1_apply",
    "interp_norm",
    "interp_norms",
    "gradient",
    "gradient_grid",
    "gradient_sobolev_norms",
    "random_coefficients",
    "smoothing_check",
    "per_mode_smoothing_optimum",
    "SmoothingReport",
]


class BoundaryCondition(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


@dataclass(frozen=True)
class DiscreteDomain:
    """Rectangle ``(0, L1) [x (0, L2)]`` with one boundary condition.

    ``resolution`` counts modes per axis for Dirichlet (``k = 1..n``); the
    Neumann truncation keeps ``k = 0..n``, i.e. ``n + 1`` modes per axis.
    """

    dims: int
    extents: tuple[float, ...]
    resolution: tuple[int, ...]
    bc: BoundaryCondition

    @property
    def mode_shape(self) -> tuple[int, ...]:
        extra = 0 if self.bc is BoundaryCondition.DIRICHLET else 1
        return tuple(n + extra for n in self.resolution)

    @property
    def mode_count(self) -> int:
        return math.prod(self.mode_shape)

    @property
    def truncation(self) -> str:
        if self.bc is BoundaryCondition.DIRICHLET:
            return "sine modes k_i = 1..n_i"
        return "cosine modes k_i = 0..n_i"

    @property
    def measure(self) -> float:
        return math.prod(self.extents)

    def axis_kind(self) -> str:
        return "sin" if self.bc is BoundaryCondition.DIRICHLET else "cos"


def build_domain(dims, extents, resolution, bc) -> DiscreteDomain:
    """Validate and build a :class:`DiscreteDomain`."""
    if dims not in (1, 2):
        raise ValueError(f"dims must be 1 or 2, got {dims!r}")
    extents = tuple(float(x) for x in np.atleast_1d(extents))
    resolution = tuple(int(n) for n in np.atleast_1d(resolution))
    if len(extents) != dims or len(resolution) != dims:
        raise ValueError("extents and resolution need one entry per dimension")
    if any(not math.isfinite(x) or x <= 0 for x in extents):
        raise ValueError(f"extents must be positive, got {extents}")
    if any(n < 2 for n in resolution):
        raise ValueError(f"resolution must be >= 2 per axis, got {resolution}")
    return DiscreteDomain(dims, extents, resolution, BoundaryCondition(bc))


def _axis_wavenumbers(kind: str, n: int) -> np.ndarray:
    """Integer mode indices for an axis basis of the given kind."""
    return np.arange(1, n + 1) if kind == "sin" else np.arange(0, n + 1)


def _axis_basis(kind: str, length: float, k: np.ndarray, x: np.ndarray) -> np.ndarray:
    """(len(x), len(k)) matrix of orthonormal sine/cosine functions at ``x``."""
    arg = np.outer(x, k) * (math.pi / length)
    if kind == "sin":
        return math.sqrt(2.0 / length) * np.sin(arg)
    mat = math.sqrt(2.0 / length) * np.cos(arg)
    mat[:, k == 0] = 1.0 / math.sqrt(length)
    return mat


class Grid:
    """Tensor evaluation grid with quadrature weights and basis matrices."""

    def __init__(self, domain: DiscreteDomain, points: tuple[int, ...]):
        self.domain = domain
        self.points = tuple(int(m) for m in points)
        nodes, spacing = [], []
        for L, m in zip(domain.extents, self.points):
            if domain.bc is BoundaryCondition.DIRICHLET:
                h = L / (m + 1)
                nodes.append(h * np.arange(1, m + 1))
            else:
                h = L / m
                nodes.append(h * (np.arange(m) + 0.5))
            spacing.append(h)
        self.nodes = tuple(nodes)
        self.spacing = tuple(spacing)
        self._basis: dict[tuple[int, str], np.ndarray] = {}

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def size(self) -> int:
        return math.prod(self.points)

    @property
    def cell_weight(self) -> float:
        return math.prod(self.spacing)

    @property
    def weights(self) -> np.ndarray:
        """Flattened quadrature weights (uniform per grid)."""
        return np.full(self.size, self.cell_weight)

    @property
    def discrete_measure(self) -> float:
        return self.cell_weight * self.size

    def coordinates(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.nodes, indexing="ij"))

    def basis(self, axis: int, kind: str) -> np.ndarray:
        key = (axis, kind)
        if key not in self._basis:
            n = self.domain.resolution[axis]
            k = _axis_wavenumbers(kind, n)
            self._basis[key] = _axis_basis(kind, self.domain.extents[axis], k, self.nodes[axis])
        return self._basis[key]

    def l2_norm(self, values: np.ndarray) -> np.ndarray:
        """Grid quadrature L2 norm over the trailing grid axes."""
        axes = tuple(range(-self.domain.dims, 0))
        return np.sqrt(self.cell_weight * np.sum(values**2, axis=axes))

    def lp_norm(self, values: np.ndarray, p: float) -> np.ndarray:
        axes = tuple(range(-self.domain.dims, 0))
        return (self.cell_weight * np.sum(np.abs(values) ** p, axis=axes)) ** (1.0 / p)


@lru_cache(maxsize=None)
def collocation_grid(domain: DiscreteDomain) -> Grid:
    return Grid(domain, domain.mode_shape)


@lru_cache(maxsize=None)
def evaluation_grid(domain: DiscreteDomain, oversample: bool = False) -> Grid:
    """Grid used for pointwise nonlinear evaluation (3/2 oversampled on request)."""
    if not oversample:
        return collocation_grid(domain)
    return Grid(domain, tuple(math.ceil(OVERSAMPLING_FACTOR * m) for m in domain.mode_shape))


def _apply_along(arr: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    arr = np.moveaxis(arr, axis, -1)
    arr = arr @ mat.T
    return np.moveaxis(arr, -1, axis)


def to_grid(coeffs: np.ndarray, domain: DiscreteDomain, grid: Grid | None = None,
            kinds: tuple[str, ...] | None = None) -> np.ndarray:
    """Evaluate a coefficient array (any leading axes) on ``grid``."""
    grid = grid or collocation_grid(domain)
    kinds = kinds or (domain.axis_kind(),) * domain.dims
    out = np.asarray(coeffs, dtype=float)
    for i in range(domain.dims):
        out = _apply_along(out, grid.basis(i, kinds[i]), i - domain.dims)
    return out


def from_grid(values: np.ndarray, domain: DiscreteDomain, grid: Grid | None = None) -> np.ndarray:
    """Quadrature projection of grid values onto the domain eigenbasis."""
    grid = grid or collocation_grid(domain)
    out = np.asarray(values, dtype=float)
    kind = domain.axis_kind()
    for i in range(domain.dims):
        mat = (grid.basis(i, kind) * grid.spacing[i]).T
        out = _apply_along(out, mat, i - domain.dims)
    return out


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coefficients of a field (or stacked components) in the eigenbasis."""

    domain: DiscreteDomain
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        shape = self.domain.mode_shape
        if coeffs.shape[coeffs.ndim - len(shape):] != shape or coeffs.ndim < len(shape):
            raise ValueError(f"coefficient shape {coeffs.shape} does not end with mode shape {shape}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def ncomp(self) -> int | None:
        lead = self.coeffs.shape[: self.coeffs.ndim - self.domain.dims]
        return None if not lead else math.prod(lead)

    def component(self, i: int) -> "SpectralField":
        return SpectralField(self.domain, self.coeffs[i])

    def grid_values(self, grid: Grid | None = None) -> np.ndarray:
        return to_grid(self.coeffs, self.domain, grid)

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_domain(self, other)
        return SpectralField(self.domain, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_domain(self, other)
        return SpectralField(self.domain, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.domain, self.coeffs * scalar)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, domain: DiscreteDomain, ncomp: int | None = None) -> "SpectralField":
        lead = () if ncomp is None else (ncomp,)
        return cls(domain, np.zeros(lead + domain.mode_shape))

    @classmethod
    def mode(cls, domain: DiscreteDomain, index, amplitude: float = 1.0) -> "SpectralField":
        """Single eigenmode with mode multi-index ``index`` (k values, not offsets)."""
        index = tuple(int(k) for k in np.atleast_1d(index))
        offset = 1 if domain.bc is BoundaryCondition.DIRICHLET else 0
        pos = tuple(k - offset for k in index)
        if len(pos) != domain.dims or any(not 0 <= p < m for p, m in zip(pos, domain.mode_shape)):
            raise ValueError(f"mode {index} is not resolved on this domain")
        coeffs = np.zeros(domain.mode_shape)
        coeffs[pos] = amplitude
        return cls(domain, coeffs)


def _check_same_domain(a, b):
    if a.domain != b.domain:
        raise ValueError("fields live on different domains")


def transform(obj, direction: str, domain: DiscreteDomain | None = None, grid: Grid | None = None):
    """Forward (grid values -> field) or inverse (field -> grid values) transform."""
    if direction == "forward":
        if isinstance(obj, SpectralField):
            raise TypeError("forward transform expects grid values")
        if domain is None:
            raise ValueError("forward transform needs the domain")
        grid = grid or collocation_grid(domain)
        values = np.asarray(obj, dtype=float)
        if values.shape[values.ndim - domain.dims:] != grid.shape:
            raise ValueError(f"grid values of shape {values.shape} do not match grid {grid.shape}")
        return SpectralField(domain, from_grid(values, domain, grid))
    if direction == "inverse":
        if not isinstance(obj, SpectralField):
            raise TypeError("inverse transform expects a SpectralField")
        return to_grid(obj.coeffs, obj.domain, grid)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


# --------------------------------------------------------------------------
# spectrum and semigroup
# --------------------------------------------------------------------------

def _axis_eigenvalues(domain: DiscreteDomain, axis: int, discretization: str) -> np.ndarray:
    kind = domain.axis_kind()
    n = domain.resolution[axis]
    L = domain.extents[axis]
    k = _axis_wavenumbers(kind, n).astype(float)
    if discretization == "exact":
        return (k * math.pi / L) ** 2
    if discretization == "fd":
        # 3-point stencil on the collocation grid; its eigenvectors are the basis samples
        m = collocation_grid(domain).points[axis]
        if kind == "sin":
            h = L / (m + 1)
            return (4.0 / h**2) * np.sin(k * math.pi / (2 * (m + 1))) ** 2
        h = L / m
        return (4.0 / h**2) * np.sin(k * math.pi / (2 * m)) ** 2
    raise ValueError(f"unknown discretization {discretization!r}")


def _tensor_sum(parts: list[np.ndarray]) -> np.ndarray:
    out = parts[0]
    for p in parts[1:]:
        out = np.add.outer(out, p)
    return out


@lru_cache(maxsize=None)
def _eigenvalue_table(domain: DiscreteDomain, discretization: str = "exact") -> np.ndarray:
    table = _tensor_sum([_axis_eigenvalues(domain, i, discretization) for i in range(domain.dims)])
    table.setflags(write=False)
    return table


@dataclass(frozen=True, eq=False)
class SemigroupOperator:
    """Eigenvalues ``lambda_k >= 0`` of ``-Laplacian``; ``A = Laplacian`` acts as ``-lambda_k``."""

    domain: DiscreteDomain
    eigenvalues: np.ndarray
    discretization: str = "exact"

    @property
    def basis(self) -> str:
        return "sine" if self.domain.bc is BoundaryCondition.DIRICHLET else "cosine"

    def decay(self, t: float) -> np.ndarray:
        return np.exp(-self.eigenvalues * t)

    def phi1_factor(self, h: float) -> np.ndarray:
        return phi1(self.eigenvalues * h)

    def phi2_factor(self, h: float) -> np.ndarray:
        return phi2(self.eigenvalues * h)


def laplacian_eigensystem(domain: DiscreteDomain, discretization: str = "exact") -> SemigroupOperator:
    """Closed-form spectrum of the Laplacian (``"exact"``) or of its FD stencil (``"fd"``)."""
    return SemigroupOperator(domain, _eigenvalue_table(domain, discretization), discretization)


def apply_semigroup(op: SemigroupOperator, t: float, field: SpectralField) -> SpectralField:
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    _check_same_domain(op, field)
    if t == 0:
        return SpectralField(field.domain, field.coeffs.copy())
    return SpectralField(field.domain, field.coeffs * op.decay(t))


def phi1(z) -> np.ndarray:
    """``(1 - exp(-z)) / z`` for ``z >= 0``, with a series branch near zero."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < PHI1_SERIES_THRESHOLD
    zs = z[small]
    out[small] = 1.0 - zs / 2.0 + zs**2 / 6.0 - zs**3 / 24.0
    zl = z[~small]
    out[~small] = -np.expm1(-zl) / zl
    return out


def phi2(z) -> np.ndarray:
    """``(exp(-z) - 1 + z) / z**2``, the weight of a linear ramp under the semigroup."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < PHI2_SERIES_THRESHOLD
    zs = z[small]
    # sum_{j>=0} (-z)^j / (j+2)!
    acc = np.zeros_like(zs)
    term = np.full_like(zs, 0.5)
    for j in range(10):
        acc += term
        term = term * (-zs) / (j + 3)
    out[small] = acc
    zl = z[~small]
    out[~small] = (np.expm1(-zl) + zl) / zl**2
    return out


def phi1_apply(op: SemigroupOperator, h: float, field: SpectralField) -> SpectralField:
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    _check_same_domain(op, field)
    return SpectralField(field.domain, field.coeffs * op.phi1_factor(h))


def _norm_weights(domain: DiscreteDomain, theta: float) -> np.ndarray:
    return (1.0 + _eigenvalue_table(domain)) ** (2.0 * theta)


def interp_norms(coeffs: np.ndarray, domain: DiscreteDomain, theta: float,
                 batch_axes: int = 0) -> np.ndarray | float:
    """Spectral ``E_theta`` norm; the first ``batch_axes`` axes are kept."""
    if not -1.0 <= theta <= 1.0:
        raise ValueError(f"interpolation index must lie in [-1, 1], got {theta}")
    sq = np.asarray(coeffs) ** 2 * _norm_weights(domain, theta)
    axes = tuple(range(batch_axes, sq.ndim))
    return np.sqrt(np.sum(sq, axis=axes))


def interp_norm(field: SpectralField, theta: float) -> float:
    """``(sum_k (1 + lambda_k)^(2 theta) |c_k|^2)^(1/2)``, summed over components."""
    return float(interp_norms(field.coeffs, field.domain, theta))


# --------------------------------------------------------------------------
# gradients
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VectorField:
    """One trigonometric series per spatial direction.

    Differentiation swaps sine and cosine along the differentiated axis, so
    each component records its per-axis basis kinds.
    """

    domain: DiscreteDomain
    components: tuple[np.ndarray, ...]
    kinds: tuple[tuple[str, ...], ...]

    def grid_values(self, grid: Grid | None = None) -> np.ndarray:
        """Array of shape ``(..., dims, *grid.shape)``."""
        grid = grid or collocation_grid(self.domain)
        vals = [to_grid(c, self.domain, grid, k) for c, k in zip(self.components, self.kinds)]
        return np.stack(vals, axis=-1 - self.domain.dims)

    def l2_norm(self, grid: Grid | None = None) -> float:
        grid = grid or collocation_grid(self.domain)
        vals = self.grid_values(grid)
        return float(np.sqrt(grid.cell_weight * np.sum(vals**2)))

    def sobolev_norm(self, s: float) -> float:
        """Spectral ``H^s`` norm using the mixed-basis eigenvalues."""
        return float(np.sqrt(sum(np.sum(sq) for sq in self._weighted_squares(s))))

    def _weighted_squares(self, s: float):
        for coeffs, kinds in zip(self.components, self.kinds):
            yield coeffs**2 * (1.0 + _mixed_eigenvalues(self.domain, kinds)) ** s


def _derivative_along(coeffs: np.ndarray, domain: DiscreteDomain, axis: int, kind: str):
    """Differentiate along ``axis``; returns the new coefficients and axis kind."""
    n = domain.resolution[axis]
    L = domain.extents[axis]
    nd = coeffs.ndim
    ax = axis - domain.dims + nd
    k = _axis_wavenumbers(kind, n) * (math.pi / L)
    shape = [1] * nd
    shape[ax] = k.size
    scaled = coeffs * k.reshape(shape)
    if kind == "sin":
        # k = 1..n sine -> k = 0..n cosine with a zero constant mode
        pad = [(0, 0)] * nd
        pad[ax] = (1, 0)
        return np.pad(scaled, pad), "cos"
    return -np.take(scaled, np.arange(1, n + 1), axis=ax), "sin"


def gradient(field: SpectralField) -> VectorField:
    """Spectral gradient of a scalar field."""
    domain = field.domain
    if field.coeffs.shape != domain.mode_shape:
        raise ValueError("gradient is defined for scalar fields")
    base = domain.axis_kind()
    comps, kinds = [], []
    for axis in range(domain.dims):
        dc, new_kind = _derivative_along(field.coeffs, domain, axis, base)
        comps.append(dc)
        kinds.append(tuple(new_kind if i == axis else base for i in range(domain.dims)))
    return VectorField(domain, tuple(comps), tuple(kinds))


def gradient_coefficients(coeffs: np.ndarray, domain: DiscreteDomain):
    """Batched gradient: list of (coefficients, kinds) per direction."""
    base = domain.axis_kind()
    out = []
    for axis in range(domain.dims):
        dc, new_kind = _derivative_along(coeffs, domain, axis, base)
        out.append((dc, tuple(new_kind if i == axis else base for i in range(domain.dims))))
    return out


def _mixed_eigenvalues(domain: DiscreteDomain, kinds: tuple[str, ...]) -> np.ndarray:
    return _tensor_sum([
        (_axis_wavenumbers(kind, n) * math.pi / L) ** 2.0
        for kind, n, L in zip(kinds, domain.resolution, domain.extents)
    ])


def gradient_sobolev_norms(coeffs: np.ndarray, domain: DiscreteDomain, s: float,
                           batch_axes: int = 0) -> np.ndarray | float:
    """``H^s`` norm of the spectral gradient, batched like :func:`interp_norms`."""
    total = 0.0
    for dc, kinds in gradient_coefficients(coeffs, domain):
        sq = dc**2 * (1.0 + _mixed_eigenvalues(domain, kinds)) ** s
        total = total + np.sum(sq, axis=tuple(range(batch_axes, sq.ndim)))
    return np.sqrt(total)


def gradient_grid(coeffs: np.ndarray, domain: DiscreteDomain, grid: Grid) -> np.ndarray:
    """Grid values of the gradient with shape ``(..., dims, *grid.shape)``."""
    vals = [to_grid(c, domain, grid, k) for c, k in gradient_coefficients(coeffs, domain)]
    return np.stack(vals, axis=-1 - domain.dims)


# --------------------------------------------------------------------------
# random fields and the smoothing estimate
# --------------------------------------------------------------------------

def random_coefficients(domain: DiscreteDomain, count: int, rng: np.random.Generator,
                        decay: tuple[float, float] = (0.0, 3.0), lead: tuple[int, ...] = ()) -> np.ndarray:
    """Gaussian coefficients damped by ``(1 + lambda)^(-s/2)``, ``s ~ U(decay)`` per sample."""
    lam = _eigenvalue_table(domain)
    s = rng.uniform(*decay, size=(count,) + (1,) * (len(lead) + domain.dims))
    g = rng.standard_normal((count,) + lead + domain.mode_shape)
    return g * (1.0 + lam) ** (-s / 2.0)


@dataclass(frozen=True)
class SmoothingReport:
    eta: float
    beta: float
    empirical_M: float
    oracle_M: float
    argmax_t: float
    samples: int
    finite: bool
    small_t_growth: bool

    @property
    def relative_gap(self) -> float:
        return abs(self.empirical_M - self.oracle_M) / self.oracle_M


def per_mode_smoothing_optimum(eigenvalues, eta: float, beta: float, t_min: float, t_max: float) -> float:
    """``max_k max_{t in [t_min, t_max]} t^(eta-beta) (1+lambda_k)^(eta-beta) e^(-lambda_k t)``.

    For a diagonal semigroup the operator norm from ``E_beta`` to ``E_eta`` is
    attained on single modes, and each per-mode profile is unimodal in ``t``
    with its peak at ``(eta - beta) / lambda_k``.
    """
    lam = np.asarray(eigenvalues, dtype=float).ravel()
    d = eta - beta
    if d == 0:
        return float(np.max(np.exp(-lam * t_min)))
    with np.errstate(divide="ignore"):
        t_star = np.where(lam > 0, d / np.where(lam > 0, lam, 1.0), t_max)
    t_star = np.clip(t_star, t_min, t_max)
    vals = t_star**d * (1.0 + lam) ** d * np.exp(-lam * t_star)
    return float(np.max(vals))


def smoothing_check(op: SemigroupOperator, eta: float, beta: float, t_grid, sample_count: int = 1000,
                    seed: int = 0, fields: np.ndarray | None = None) -> SmoothingReport:
    """Empirical constant of ``t^(eta-beta) ||e^{tA} u||_eta <= M ||u||_beta``.

    Samples are random coefficient vectors with random spectral decay (or the
    rows of ``fields``), normalized to unit ``E_beta`` norm.
    """
    if not 0.0 <= beta <= eta <= 1.0:
        raise ValueError(f"need 0 <= beta <= eta <= 1, got beta={beta}, eta={eta}")
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size == 0 or np.any(t <= 0):
        raise ValueError("time grid must lie in the open interval (0, T]")
    domain = op.domain
    if fields is None:
        rng = np.random.default_rng(seed)
        a = random_coefficients(domain, sample_count, rng, decay=(0.0, 8.0))
    else:
        a = np.asarray(fields, dtype=float).reshape((-1,) + domain.mode_shape)
    a = a.reshape(a.shape[0], -1)
    lam = op.eigenvalues.ravel()
    wb = (1.0 + lam) ** (2 * beta)
    a = a / np.sqrt(np.sum(a**2 * wb, axis=1, keepdims=True))
    # squared E_eta norms of e^{tA}a for every (sample, time)
    weights = (1.0 + lam)[:, None] ** (2 * eta) * np.exp(-2.0 * np.outer(lam, t))
    ratios = np.sqrt(a**2 @ weights) * t[None, :] ** (eta - beta)
    per_t = ratios.max(axis=0)
    j = int(np.argmax(per_t))
    head = max(1, t.size // 10)
    # growth as t -> 0 would show up as the smallest times dominating
    small_t_growth = bool(per_t[:head].max() > per_t[head:].max() * (1 + 1e-12)) if t.size > head else False
    oracle = per_mode_smoothing_optimum(lam, eta, beta, float(t.min()), float(t.max()))
    return SmoothingReport(
        eta=eta,
        beta=beta,
        empirical_M=float(per_t[j]),
        oracle_M=oracle,
        argmax_t=float(t[j]),
        samples=a.shape[0],
        finite=bool(np.all(np.isfinite(ratios))),
        small_t_growth=small_t_growth and eta > beta,
    )
