"""Scenario files: parsing, hypothesis validation and problem assembly.

Scenarios are TOML documents with the sections ``[problem]``, ``[domain]``,
``[time]``, one model section (``[bushfire]``, ``[autocat]`` or
``[power]``), ``[initial]`` and ``[output]``. Data sources are written as
descriptors such as ``preset:gaussian(1.0, 0.3)`` or ``csv:kernel.csv``;
relative CSV paths resolve against the scenario file's directory and are
stored absolute after loading. All values are in model units.
"""

from __future__ import annotations

import math
import sys
from dataclasses import MISSING, asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib
import tomli_w

from mildflow.errors import HypothesisViolation, ScenarioError
from mildflow.nonlinearity import (
    AutocatModel,
    AutocatParams,
    BetaProfile,
    BushfireModel,
    KernelData,
    NonlinearitySpec,
    PowerModel,
    TimeProfile,
    autocat_spec,
    bushfire_spec,
    parse_call,
    power_spec,
)
from mildflow.operators import (
    BoundaryCondition,
    DiscreteDomain,
    SpectralField,
    build_domain,
    collocation_grid,
    evaluation_grid,
    from_grid,
    laplacian_eigensystem,
    random_coefficients,
)
from mildflow.solver import SolverConfig, build_graded_mesh

__all__ = [
    "DomainSpec",
    "TimeSpec",
    "BushfireParams",
    "AutocatSection",
    "PowerParams",
    "InitialSpec",
    "OutputSpec",
    "ScenarioConfig",
    "Problem",
    "load_scenario",
    "loads_scenario",
    "dumps_scenario",
    "save_scenario",
    "validate_scenario",
    "kernel_source",
    "build_problem",
]

KINDS = ("bushfire", "autocat", "power")
FORCED_BC = {"bushfire": "dirichlet", "autocat": "neumann"}
BC_HYPOTHESIS = {"bushfire": "Dirichlet boundary condition", "autocat": "homogeneous Neumann boundary conditions"}


@dataclass(frozen=True)
class DomainSpec:
    dims: int
    extents: tuple[float, ...]
    resolution: tuple[int, ...]
    bc: str
    oversample: bool = False


@dataclass(frozen=True)
class TimeSpec:
    T: float
    steps: int
    grading: float = 2.0
    mu: float | None = None


@dataclass(frozen=True)
class BushfireParams:
    nu: float
    eps: float
    kernel: str
    beta: str
    theta: str
    omega: str
    xi: float | None = None


@dataclass(frozen=True)
class AutocatSection:
    mu: float
    beta: float
    theta: float
    a: float


@dataclass(frozen=True)
class PowerParams:
    p: float
    xi: float = 0.0


@dataclass(frozen=True)
class InitialSpec:
    u: str
    v: str | None = None


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    snapshot_every: int = 0
    norms: tuple[float, ...] = ()
    duhamel: bool = False
    refinement: int = 4


_MODEL_TYPES = {"bushfire": BushfireParams, "autocat": AutocatSection, "power": PowerParams}


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    domain: DomainSpec
    time: TimeSpec
    model: BushfireParams | AutocatSection | PowerParams
    initial: InitialSpec
    output: OutputSpec = OutputSpec()
    label: str = ""
    source: str | None = field(default=None, compare=False)
    spec: NonlinearitySpec | None = field(default=None, compare=False)
    report: tuple[str, ...] = field(default=(), compare=False)

    @property
    def base_dir(self) -> Path:
        return Path(self.source).parent if self.source else Path.cwd()

    def to_dict(self) -> dict:
        out = {"problem": {"kind": self.kind}}
        if self.label:
            out["problem"]["label"] = self.label
        for name, obj in (("domain", self.domain), ("time", self.time), (self.kind, self.model),
                          ("initial", self.initial), ("output", self.output)):
            sec = {}
            for k, v in asdict(obj).items():
                if v is None:
                    continue
                sec[k] = list(v) if isinstance(v, tuple) else v
            out[name] = sec
        return out


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

def _section(doc, name, required=True):
    if name not in doc:
        if required:
            raise ScenarioError(f"missing section [{name}]")
        return {}
    sec = doc[name]
    if not isinstance(sec, dict):
        raise ScenarioError(f"[{name}] must be a table")
    return sec


def _build(cls, sec, name, convert=None):
    convert = convert or {}
    known = {f.name for f in fields(cls)}
    for key in sec:
        if key not in known:
            raise ScenarioError(f"unknown key [{name}].{key}")
    kwargs = {}
    for f in fields(cls):
        if f.name in sec:
            val = sec[f.name]
            try:
                kwargs[f.name] = convert[f.name](val) if f.name in convert else val
            except (TypeError, ValueError) as exc:
                raise ScenarioError(f"bad value for [{name}].{f.name}: {val!r} ({exc})") from None
    try:
        return cls(**kwargs)
    except TypeError as exc:
        missing = [f.name for f in fields(cls)
                   if f.name not in kwargs and f.default is MISSING and f.default_factory is MISSING]
        raise ScenarioError(f"missing key in [{name}]: {', '.join(missing) or exc}") from None


def _floats(v):
    return tuple(float(x) for x in (v if isinstance(v, (list, tuple)) else [v]))


def _ints(v):
    vals = v if isinstance(v, (list, tuple)) else [v]
    out = []
    for x in vals:
        if isinstance(x, bool) or int(x) != x:
            raise ValueError("expected integers")
        out.append(int(x))
    return tuple(out)


def _int(v):
    if isinstance(v, bool) or int(v) != v:
        raise ValueError("expected an integer")
    return int(v)


def _bool(v):
    if not isinstance(v, bool):
        raise ValueError("expected true or false")
    return v


def _opt_float(v):
    return None if v is None else float(v)


def _resolve_csv(desc, base: Path):
    if isinstance(desc, str) and desc.strip().startswith("csv:"):
        path = Path(desc.strip()[4:].strip())
        if not path.is_absolute():
            path = (base / path).resolve()
        return f"csv:{path}"
    return desc


def loads_scenario(text: str, source: str | None = None) -> ScenarioConfig:
    """Parse and validate scenario text; ``source`` anchors relative paths."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"parse error: {exc}") from None
    for key in doc:
        if key not in ("problem", "domain", "time", "initial", "output") + KINDS:
            raise ScenarioError(f"unknown section [{key}]")
    prob = _section(doc, "problem")
    kind = prob.get("kind")
    if kind not in KINDS:
        raise ScenarioError(f"[problem].kind must be one of {KINDS}, got {kind!r}")
    for key in prob:
        if key not in ("kind", "label"):
            raise ScenarioError(f"unknown key [problem].{key}")
    for other in KINDS:
        if other != kind and other in doc:
            raise ScenarioError(f"section [{other}] does not belong to a {kind} scenario")
    base = Path(source).resolve().parent if source else Path.cwd()

    dsec = dict(_section(doc, "domain"))
    dsec.setdefault("bc", FORCED_BC.get(kind, "neumann"))
    dom = _build(DomainSpec, dsec, "domain", {
        "dims": _int, "extents": _floats, "resolution": _ints,
        "bc": lambda s: str(s).lower(), "oversample": _bool})
    tm = _build(TimeSpec, _section(doc, "time"), "time", {
        "T": float, "steps": _int, "grading": float, "mu": _opt_float})
    msec = _section(doc, kind)
    mtype = _MODEL_TYPES[kind]
    conv = {f.name: float for f in fields(mtype)}
    if kind == "bushfire":
        conv.update({k: str for k in ("kernel", "beta", "theta", "omega")})
        conv["xi"] = _opt_float
        msec = {k: _resolve_csv(v, base) for k, v in msec.items()}
    model = _build(mtype, msec, kind, conv)
    isec = {k: _resolve_csv(v, base) for k, v in _section(doc, "initial").items()}
    init = _build(InitialSpec, isec, "initial", {"u": str, "v": str})
    out = _build(OutputSpec, _section(doc, "output", required=False), "output", {
        "directory": str, "snapshot_every": _int, "norms": _floats, "duhamel": _bool, "refinement": _int})
    cfg = ScenarioConfig(kind, dom, tm, model, init, out, str(prob.get("label", "")), source)
    spec, report = validate_scenario(cfg)
    return replace(cfg, spec=spec, report=tuple(report))


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    return loads_scenario(text, source=str(path.resolve()))


def dumps_scenario(config: ScenarioConfig) -> str:
    return tomli_w.dumps(config.to_dict())


def save_scenario(config: ScenarioConfig, path) -> None:
    Path(path).write_text(dumps_scenario(config), encoding="utf-8")


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------

def _domain(cfg: ScenarioConfig) -> DiscreteDomain:
    d = cfg.domain
    try:
        return build_domain(d.dims, d.extents, d.resolution, d.bc)
    except ValueError as exc:
        raise ScenarioError(f"[domain]: {exc}") from None


def _check_bc(cfg):
    forced = FORCED_BC.get(cfg.kind)
    if forced and cfg.domain.bc != forced:
        raise HypothesisViolation(BC_HYPOTHESIS[cfg.kind], f"bc = {cfg.domain.bc!r}")


def _check_bushfire_params(m: BushfireParams):
    if not 0.0 < 2 * m.eps < 1.0 / 7.0:
        raise HypothesisViolation("2ε ∈ (0,1/7)", f"2 eps = {2 * m.eps!r}")
    if not 1.0 <= m.nu <= 2.0:
        raise HypothesisViolation("ν ∈ [1,2]", f"nu = {m.nu!r}")
    if m.xi is not None and abs(2 * m.xi - (1 + 4 * m.eps)) > 1e-12:
        raise HypothesisViolation("2ξ = 1+4ε", f"xi = {m.xi!r}, eps = {m.eps!r}")


def validate_scenario(cfg: ScenarioConfig) -> tuple[NonlinearitySpec, list[str]]:
    """Check every hypothesis of the model and derive its :class:`NonlinearitySpec`.

    Raises :class:`HypothesisViolation` naming the first violated condition.
    """
    _check_bc(cfg)
    if cfg.kind == "bushfire":
        _check_bushfire_params(cfg.model)
    elif cfg.kind == "autocat":
        m = cfg.model
        AutocatParams(m.mu, m.beta, m.theta, m.a)
    else:
        if not 0.0 < cfg.model.p < 1.0:
            raise HypothesisViolation("p ∈ (0,1)", f"p = {cfg.model.p!r}")
    try:
        build_graded_mesh(cfg.time.T, cfg.time.steps, cfg.time.grading)
    except ValueError as exc:
        raise ScenarioError(f"[time]: {exc}") from None
    domain = _domain(cfg)
    model = _build_model(cfg, domain)
    spec = _derive_spec(cfg, model, domain)
    mu = cfg.time.mu if cfg.time.mu is not None else spec.default_mu()
    spec.check_window(mu)
    report = [f"mu = {mu!r} in ({spec.xi!r}, {spec.upper!r})"]
    if cfg.kind == "bushfire" and domain.dims < 2:
        report.append("outside the theorem hypotheses (n >= 2)")
    return spec, report


def _derive_spec(cfg, model, domain) -> NonlinearitySpec:
    if cfg.kind == "bushfire":
        return bushfire_spec(model, cfg.model.eps, cfg.model.xi)
    if cfg.kind == "autocat":
        return autocat_spec(model.params, domain)
    return power_spec(cfg.model.p, domain, cfg.model.xi)


# --------------------------------------------------------------------------
# data sources
# --------------------------------------------------------------------------

def _read_csv(path: str) -> np.ndarray:
    """Comma-separated numbers; ``#`` comments and one leading header row are skipped."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ScenarioError(f"cannot read CSV {path}: {exc}") from None
    rows = [ln.split("#", 1)[0].strip() for ln in lines]
    rows = [r for r in rows if r]
    if rows:
        try:
            [float(x) for x in rows[0].split(",")]
        except ValueError:
            rows = rows[1:]
    try:
        data = np.array([[float(x) for x in r.split(",")] for r in rows], dtype=float)
    except ValueError as exc:
        raise ScenarioError(f"cannot parse CSV {path}: {exc}") from None
    if data.ndim != 2 or data.size == 0:
        raise ScenarioError(f"CSV {path} is empty or ragged")
    return data


def _call(desc: str, what: str):
    try:
        return parse_call(desc)
    except ValueError as exc:
        raise ScenarioError(f"bad {what} descriptor: {exc}") from None


def kernel_source(descriptor: str, domain: DiscreteDomain, oversample: bool = False) -> KernelData:
    """``preset:gaussian(A, sigma)`` or ``csv:<path>`` (a square matrix over grid points)."""
    grid = evaluation_grid(domain, oversample)
    desc = descriptor.strip()
    if desc.startswith("preset:"):
        name, args = _call(desc[7:], "kernel")
        if name != "gaussian" or len(args) != 2:
            raise ScenarioError(f"unknown kernel preset {desc!r}")
        try:
            return KernelData.gaussian(grid, *args)
        except ValueError as exc:
            raise ScenarioError(f"kernel: {exc}") from None
    if desc.startswith("csv:"):
        if oversample:
            raise ScenarioError("CSV kernels are sampled on the collocation grid; disable oversampling")
        vals = _read_csv(desc[4:])
        if vals.shape != (grid.size, grid.size):
            raise ScenarioError(f"kernel CSV must be {grid.size}x{grid.size}, got {vals.shape[0]}x{vals.shape[1]}")
        try:
            return KernelData(vals, grid, desc)
        except ValueError as exc:
            raise ScenarioError(f"kernel: {exc}") from None
    raise ScenarioError(f"kernel descriptor must start with preset: or csv:, got {desc!r}")


def beta_source(descriptor: str) -> BetaProfile:
    name, args = _call(descriptor, "beta")
    if name == "tanh" and len(args) == 2:
        return BetaProfile("tanh", *args)
    if name == "constant" and len(args) == 1:
        return BetaProfile("constant", args[0])
    raise ScenarioError(f"unknown beta descriptor {descriptor!r}")


def profile_source(descriptor: str, ncols: int, what: str) -> TimeProfile:
    desc = descriptor.strip()
    if desc.startswith("csv:"):
        data = _read_csv(desc[4:])
        if data.shape[1] != ncols + 1:
            raise ScenarioError(f"{what} CSV needs columns t + {ncols} value(s), got {data.shape[1]}")
        try:
            return TimeProfile.table(data[:, 0], data[:, 1:], descriptor=desc)
        except ValueError as exc:
            raise ScenarioError(f"{what}: {exc}") from None
    name, args = _call(desc, what)
    if name == "constant" and len(args) == ncols:
        return TimeProfile.constant(*args)
    if name == "sine" and ncols == 1 and len(args) == 3:
        try:
            return TimeProfile.sine(*args)
        except ValueError as exc:
            raise ScenarioError(f"{what}: {exc}") from None
    raise ScenarioError(f"bad {what} descriptor {desc!r} (expects {ncols} component(s))")


def initial_source(descriptor: str, domain: DiscreteDomain) -> np.ndarray:
    """Coefficients of an initial datum.

    ``white-noise(seed, amplitude)``: iid coefficients of variance
    ``amplitude^2 / modes`` (an ``L2`` datum with no extra smoothness);
    ``smooth(seed, amplitude, decay)``: coefficients damped by
    ``(1 + lambda)^(-decay/2)`` rescaled to norm ``amplitude``; ``mode(k...)``;
    ``constant(c)``; ``csv:<path>`` with grid values on the collocation grid.
    """
    desc = descriptor.strip()
    grid = collocation_grid(domain)
    if desc.startswith("csv:"):
        vals = _read_csv(desc[4:])
        if domain.dims == 1:
            vals = vals.reshape(-1)
        if vals.shape != grid.shape:
            raise ScenarioError(f"initial CSV must have grid shape {grid.shape}, got {vals.shape}")
        return from_grid(vals, domain, grid)
    name, args = _call(desc, "initial")
    if name == "white-noise" and len(args) == 2:
        rng = np.random.default_rng(int(args[0]))
        return rng.standard_normal(domain.mode_shape) * args[1] / math.sqrt(domain.mode_count)
    if name == "smooth" and len(args) == 3:
        rng = np.random.default_rng(int(args[0]))
        c = random_coefficients(domain, 1, rng, decay=(args[2], args[2]))[0]
        return c * (args[1] / np.linalg.norm(c))
    if name == "mode" and len(args) == domain.dims:
        try:
            return SpectralField.mode(domain, [int(a) for a in args]).coeffs
        except ValueError as exc:
            raise ScenarioError(f"initial: {exc}") from None
    if name == "constant" and len(args) == 1:
        return from_grid(np.full(grid.shape, args[0]), domain, grid)
    raise ScenarioError(f"unknown initial descriptor {desc!r}")


def _build_model(cfg: ScenarioConfig, domain: DiscreteDomain):
    over = cfg.domain.oversample
    m = cfg.model
    if cfg.kind == "bushfire":
        return BushfireModel(domain, kernel_source(m.kernel, domain, over), beta_source(m.beta), m.nu,
                             profile_source(m.theta, 1, "theta"), profile_source(m.omega, domain.dims, "omega"),
                             oversample=over)
    if cfg.kind == "autocat":
        return AutocatModel(domain, AutocatParams(m.mu, m.beta, m.theta, m.a), oversample=over)
    return PowerModel(domain, m.p, oversample=over)


@dataclass(frozen=True, eq=False)
class Problem:
    config: ScenarioConfig
    domain: DiscreteDomain
    op: object
    model: object
    spec: NonlinearitySpec
    u0: SpectralField
    solver_config: SolverConfig


def build_problem(cfg: ScenarioConfig, steps: int | None = None, resolution=None) -> Problem:
    """Assemble operator, model, initial datum and solver configuration.

    ``steps`` and ``resolution`` override the file's values (used by the
    convergence and oracle studies).
    """
    if resolution is not None:
        res = tuple(int(n) for n in np.atleast_1d(resolution))
        if len(res) == 1 and cfg.domain.dims == 2:
            res = res * 2
        cfg = replace(cfg, domain=replace(cfg.domain, resolution=res))
    spec, _ = validate_scenario(cfg) if (resolution is not None or cfg.spec is None) else (cfg.spec, None)
    domain = _domain(cfg)
    model = _build_model(cfg, domain)
    u = initial_source(cfg.initial.u, domain)
    if cfg.kind == "autocat":
        if cfg.initial.v is None:
            raise ScenarioError("autocat scenarios need [initial].v")
        u = np.stack([u, initial_source(cfg.initial.v, domain)])
    elif cfg.initial.v is not None:
        raise ScenarioError("[initial].v is only used by autocat scenarios")
    mesh = build_graded_mesh(cfg.time.T, steps or cfg.time.steps, cfg.time.grading)
    scfg = SolverConfig(mesh, mu=cfg.time.mu, spec=spec, oversample=cfg.domain.oversample,
                        extra_norms=cfg.output.norms)
    return Problem(cfg, domain, laplacian_eigensystem(domain), model, spec, SpectralField(domain, u), scfg)
