"""Command-line entry point ``mildflow``.

Exit status: 0 on success, 2 when a scenario fails validation (the violated
hypothesis is printed on standard error), 1 on runtime failure or when a
verification check fails (its report is still written).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from mildflow import __version__
from mildflow._backend import BACKEND
from mildflow._csvio import atomic_write, fmt, snapshot_text, write_csv
from mildflow.checks import (
    check_autocat_identity,
    check_embedding_ratio,
    check_lemma31,
    check_lemma32,
    check_lemma33,
    check_scalar_inequalities,
    estimate_holder_exponent,
    verify_estimates,
)
from mildflow.errors import HypothesisViolation, ScenarioError
from mildflow.operators import collocation_grid, interp_norms, laplacian_eigensystem, to_grid
from mildflow.oracle import DenseOperator, compare_trajectories, dense_expm_solve
from mildflow.scenarios import beta_source, build_problem, load_scenario
from mildflow.solver import duhamel_residual, solve

LEMMA_NUS = (1.0, 1.25, 1.5, 2.0)
ORACLE_TOL = 1e-10


@dataclass
class RunManifest:
    command: str
    scenario: str
    config: dict
    version: str
    backend: str
    seed: int
    files: list[str] = field(default_factory=list)
    duration_s: float = 0.0


class _Run:
    """Tracks written files so a failed run leaves nothing behind."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.files: list[Path] = []

    def csv(self, name, header, rows, comment=None):
        self.files.append(write_csv(self.out_dir / name, header, rows, comment))

    def text(self, name, text):
        self.files.append(atomic_write(self.out_dir / name, text))

    def cleanup(self):
        for f in self.files:
            try:
                f.unlink()
            except OSError:
                pass
        self.files.clear()


def _out_dir(args, cfg) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    d = Path(cfg.output.directory)
    return d if d.is_absolute() else cfg.base_dir / d


def _manifest(run: _Run, args, cfg, t0):
    m = RunManifest(
        command=" ".join(args.argv),
        scenario=str(cfg.source),
        config=cfg.to_dict(),
        version=__version__,
        backend=BACKEND,
        seed=args.seed,
        files=[f.name for f in run.files],
    )
    m.duration_s = time.perf_counter() - t0
    run.text("manifest.json", json.dumps(asdict(m), indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_solve(args, cfg, run: _Run) -> int:
    prob = build_problem(cfg)
    traj = solve(prob.op, prob.model, prob.u0, prob.solver_config)
    cols = dict(traj.monitors)
    if cfg.output.duhamel:
        cols["duhamel_residual"] = duhamel_residual(traj, prob.op, prob.model, cfg.output.refinement)
    header = ["t"] + list(cols)
    rows = zip(traj.times, *cols.values())
    run.csv("norms.csv", header, rows)
    k = cfg.output.snapshot_every
    if k > 0:
        grid = collocation_grid(prob.domain)
        nodes = sorted(set(range(0, traj.mesh.N + 1, k)) | {traj.mesh.N})
        names = ("u", "v") if cfg.kind == "autocat" else ("u",)
        for n in nodes:
            vals = to_grid(traj.states[n], prob.domain, grid)
            if len(names) == 1:
                vals = vals[None]
            for name, comp in zip(names, vals):
                run.text(f"snapshot_{name}_{n:06d}.csv", snapshot_text(traj.times[n], comp))
    print(f"solved {cfg.kind}: N = {traj.mesh.N}, T = {traj.mesh.T!r}; "
          f"sup t^mu ||u||_xi = {fmt(float(np.max(traj.monitors['weighted_norm'])))}")
    return 0


def _lemma_checks(cfg, prob, samples, seed):
    results = check_scalar_inequalities(samples, seed)
    if cfg.kind == "bushfire":
        model = prob.model
        results += check_lemma31(model.kernel, samples, seed + 1)
        beta = beta_source(cfg.model.beta)
        for i, nu in enumerate(LEMMA_NUS):
            results += check_lemma32(prob.domain, beta, nu, samples, seed + 2 + i, grid=model.grid)
        res33, c = check_lemma33(prob.domain, beta, cfg.model.eps, samples, seed + 10, grid=model.grid)
        results.append(res33)
        results.append(check_embedding_ratio(prob.domain, cfg.model.eps, c, samples, seed + 11, grid=model.grid))
    elif cfg.kind == "autocat":
        results.append(check_autocat_identity(prob.model, samples, seed + 1))
    return results


def cmd_verify(args, cfg, run: _Run) -> int:
    prob = build_problem(cfg)
    seed = args.seed
    if args.what == "lemmas":
        results = _lemma_checks(cfg, prob, args.samples, seed)
        name = "verify_lemmas.csv"
        extra = []
    else:
        rep = verify_estimates(prob.model, prob.spec, args.samples, seed, T=cfg.time.T)
        results = [rep.growth, rep.hoelder]
        fit = estimate_holder_exponent(prob.model, min(args.samples, 2000), seed + 1,
                                       norm_pair=(prob.spec.xi, prob.spec.gamma), norm_shift=prob.spec.norm_shift)
        name = "verify_estimates.csv"
        extra = [f"fitted Hölder exponent {fit.exponent:.4f} (constant {fit.constant:.4g}, R^2 {fit.r2:.4f})"]
    run.csv(name, ["check", "samples", "worst_slack", "pass"],
            [(r.name, r.samples, r.worst_slack, r.passed) for r in results])
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: worst slack {r.worst_slack:.3e} over {r.samples} samples")
    for line in extra:
        print(line)
    return 0 if all(r.passed for r in results) else 1


def cmd_converge(args, cfg, run: _Run) -> int:
    if args.levels < 2:
        raise ScenarioError("--levels must be at least 2")
    N0 = cfg.time.steps
    finals = []
    for j in range(args.levels):
        prob = build_problem(cfg, steps=N0 * 2**j)
        traj = solve(prob.op, prob.model, prob.u0, prob.solver_config)
        finals.append(traj.states[-1])
    shift = prob.spec.norm_shift
    errors = [float(interp_norms(finals[j] - finals[j + 1], prob.domain, shift)) for j in range(args.levels - 1)]
    rows = []
    for j in range(args.levels):
        err = errors[j] if j < len(errors) else None
        order = None
        if 0 < j < len(errors) and errors[j] > 0:
            order = math.log2(errors[j - 1] / errors[j])
        rows.append((j, N0 * 2**j, err, order))
    run.csv("converge.csv", ["level", "N", "error", "observed_order"], rows)
    for r in rows:
        print(",".join(fmt(v) for v in r))
    return 0


def cmd_oracle(args, cfg, run: _Run) -> int:
    prob = build_problem(cfg, resolution=args.grid)
    dense = DenseOperator.fd_laplacian(prob.domain)
    mesh = prob.solver_config.mesh
    fd_op = laplacian_eigensystem(prob.domain, "fd")
    ref = dense_expm_solve(dense, prob.model, prob.u0, mesh)
    same = compare_trajectories(solve(fd_op, prob.model, prob.u0, prob.solver_config), ref, "grid")
    exact = compare_trajectories(solve(prob.op, prob.model, prob.u0, prob.solver_config), ref, "grid")
    run.csv("oracle_compare.csv", ["t", "same_operator_distance", "exact_vs_fd_distance"],
            zip(same.times, same.distances, exact.distances))
    ok = same.max <= ORACLE_TOL
    print(f"{'PASS' if ok else 'FAIL'}  same-operator max L2 distance {same.max:.3e} (tolerance {ORACLE_TOL:g})")
    print(f"      exact-spectrum vs FD max L2 distance {exact.max:.3e}")
    return 0 if ok else 1


def cmd_describe(args, cfg, run: _Run) -> int:
    s = cfg.spec
    mu = cfg.time.mu if cfg.time.mu is not None else s.default_mu()
    lines = [
        f"kind: {cfg.kind}",
        f"domain: dims={cfg.domain.dims} extents={list(cfg.domain.extents)} "
        f"resolution={list(cfg.domain.resolution)} bc={cfg.domain.bc}",
        f"γ = {s.gamma!r}",
        f"ξ = {s.xi!r}",
        f"C = {s.growth_C!r}",
        "(q_j, ϑ_j) = " + ", ".join(f"({q!r}, {t!r})" for q, t in s.hoelder_terms),
        f"q = {s.q!r}",
        f"ϑ0 = {s.theta0!r}",
        f"spectral shift = {s.norm_shift!r}",
        f"μ = {mu!r}, window ({s.xi!r}, {s.upper!r})",
    ]
    lines += [f"note: {n}" for n in s.notes + cfg.report]
    print("\n".join(lines))
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mildflow", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0, help="seed for all sampling (default 0)")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--scenario", required=True, help="scenario TOML file")
        if out:
            sp.add_argument("--out", help="output directory (default: [output].directory)")
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="overrides the global seed")

    common(sub.add_parser("solve", help="integrate a scenario"))
    v = sub.add_parser("verify", help="sample the lemma or assumption inequalities")
    v.add_argument("what", choices=("lemmas", "estimates"))
    common(v)
    v.add_argument("--samples", type=int, default=10_000)
    c = sub.add_parser("converge", help="self-convergence study under N -> 2N")
    common(c)
    c.add_argument("--levels", type=int, default=4)
    o = sub.add_parser("oracle", help="cross-check against the dense FD oracle")
    o.add_argument("what", choices=("compare",))
    common(o)
    o.add_argument("--grid", type=int, default=32, help="grid points per axis (<= 64)")
    common(sub.add_parser("describe", help="print the derived assumption data"), out=False)
    return p


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "converge": cmd_converge,
            "oracle": cmd_oracle, "describe": cmd_describe}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = ["mildflow"] + argv
    t0 = time.perf_counter()
    try:
        cfg = load_scenario(args.scenario)
    except HypothesisViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ScenarioError as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return 2
    run = _Run(_out_dir(args, cfg) if args.command != "describe" else Path("."))
    try:
        status = COMMANDS[args.command](args, cfg, run)
        if args.command != "describe":
            _manifest(run, args, cfg, t0)
    except HypothesisViolation as exc:
        run.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ScenarioError as exc:
        run.cleanup()
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: remove partial outputs
        run.cleanup()
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return status


if __name__ == "__main__":
    sys.exit(main())
