"""Outer SCA loop, initialization, DF timeslot search, baselines, experiments.

The loop accepts a candidate iterate only if it does not worsen the true
objective, so recorded traces are monotone by construction (the
approximation theory guarantees improvement until numerical convergence;
a regression beyond solver-noise slack raises, since it indicates a bug
rather than roundoff).
"""

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import convexcore, sca_dc, sca_gp
from .convexcore import SolverOptions, SolveStatus, solve
from .linkmodel import (Allocation, SystemParams, check_feasibility, phi_coeffs,
                        relay_cap_af, sinr_af, sinr_df, throughput_af,
                        throughput_df)
from .netgen import (FadingSpec, NetworkInstance, TopologySpec,
                     build_grid_topology, generate_instance)

OBJECTIVE_SLACK = 1e-6      # tolerated relative regression (solver noise)
ALLOC_CHANGE_TOL = 1e-3     # log-domain allocation stability for convergence
DEFAULT_EPS_GRID = tuple(np.round(np.arange(0.05, 0.951, 0.05), 2))


def dbm_to_watt(x_dbm: float) -> float:
    """10^((x-30)/10): dBm to watts."""
    return 10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(x_w: float) -> float:
    return 10.0 * np.log10(np.asarray(x_w, dtype=float)) + 30.0


@dataclass
class ProblemSpec:
    """What to solve and how: problem kind, relaying mode, SCA flavor."""

    kind: str = "sum_rate"        # sum_rate | max_min | sum_power
    mode: str = "af"              # af | df
    method: str = "gp"            # gp | dc
    tau_min: float = 0.12         # sum_power target (bps/Hz)
    varsigma: float = 0.5         # initialization scalar in (0, 1)
    tol: float = 1e-4             # relative objective-change tolerance
    max_iter: int = 50
    eps_bar: float = 0.5          # DF timeslot fraction, fixed per run
    optimize_only: str = None     # None (joint) or "P" | "p" | "alpha"

    def __post_init__(self):
        if self.kind not in ("sum_rate", "max_min", "sum_power"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.mode not in ("af", "df"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.method not in ("gp", "dc"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.mode == "df" and (self.method != "gp" or self.kind != "sum_rate"):
            raise ValueError("DF relaying is covered by the GP sum-rate path only")
        if not 0.0 < self.varsigma < 1.0:
            raise ValueError("varsigma must lie in (0, 1)")
        if self.tau_min < 0:
            raise ValueError("tau_min must be nonnegative")


@dataclass
class IterRecord:
    iteration: int
    objective: float              # true objective of the problem kind
    sum_rate: float
    min_tau: float
    sum_power: float
    prod_uv: float                # prod_i 1/(1+gamma_i) (AF GP monotone quantity)
    max_residual: float
    solver_status: str
    kkt_residual: float
    wall_s: float


@dataclass
class Trace:
    """Per-iteration record of one SCA run plus the final allocation."""

    spec: ProblemSpec
    records: list = field(default_factory=list)
    allocation: Allocation = None
    tau: np.ndarray = None
    status: str = "running"       # converged | max_iter | infeasible
    seed: int = -1

    @property
    def objective(self) -> float:
        return self.records[-1].objective if self.records else np.nan

    @property
    def n_iterations(self) -> int:
        return max(len(self.records) - 1, 0)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records])


@dataclass
class ScaState:
    """Bookkeeping of the outer loop: expansion point and history."""

    alloc: Allocation
    iteration: int = 0
    history: list = field(default_factory=list)


def init_allocation(varsigma: float, params: SystemParams, net: NetworkInstance,
                    mode: str = "af", eps_bar: float = 0.5) -> Allocation:
    """The scaled-down feasible start: P = vs*P_max (clipped up to P_min),
    alpha = vs, p = vs * (harvest cap at that point).

    For DF the cap carries the (1-eps)/eps factor, so p scales with it.
    """
    if not 0.0 < varsigma < 1.0:
        raise ValueError("varsigma must lie in (0, 1)")
    n = net.n_cells
    P0 = np.full(n, max(varsigma * params.p_max, params.p_min))
    alpha0 = np.full(n, varsigma)
    cap_scale = params.eta * alpha0 * (net.h_bar.T @ P0)
    if mode == "df":
        cap_scale = cap_scale * (1.0 - eps_bar) / eps_bar
    p0 = varsigma * cap_scale
    return Allocation(P=P0, p=p0, alpha=alpha0)


def _baseline_init(optimize_only: str, varsigma: float, params: SystemParams,
                   net: NetworkInstance) -> Allocation:
    """Initial point with the frozen blocks already at their pinned values."""
    n = net.n_cells
    Pmax = np.full(n, params.p_max)
    if optimize_only == "p":
        cap = params.eta * 0.5 * (net.h_bar.T @ Pmax)
        return Allocation(P=Pmax, p=varsigma * cap, alpha=np.full(n, 0.5))
    if optimize_only == "alpha":
        alpha = np.full(n, varsigma)
        p = params.eta * alpha * (net.h_bar.T @ Pmax)
        return Allocation(P=Pmax, p=p, alpha=alpha)
    if optimize_only == "P":
        P0 = np.full(n, max(varsigma * params.p_max, params.p_min))
        p = params.eta * 0.5 * (net.h_bar.T @ P0)
        return Allocation(P=P0, p=p, alpha=np.full(n, 0.5))
    raise ValueError(f"unknown baseline block {optimize_only!r}")


def _true_objectives(alloc: Allocation, net: NetworkInstance,
                     params: SystemParams, spec: ProblemSpec):
    """(objective, sum_rate, min_tau, sum_power, prod_uv) for one allocation."""
    if spec.mode == "df":
        tau = throughput_df(alloc, net, params)
        prod_uv = np.nan
    else:
        phi = phi_coeffs(net, params.sigma)
        tau = throughput_af(alloc, phi)
        prod_uv = float(np.prod(1.0 / (1.0 + sinr_af(alloc, phi))))
    sum_rate = float(tau.sum())
    min_tau = float(tau.min())
    sum_power = float(alloc.P.sum())
    objective = {"sum_rate": sum_rate, "max_min": min_tau,
                 "sum_power": sum_power}[spec.kind]
    return objective, sum_rate, min_tau, sum_power, prod_uv, tau


class SubproblemInfeasible(RuntimeError):
    """The convex subproblem has no interior point (unattainable tau_min)."""


def _alloc_change(cand: Allocation, prev: Allocation, scales: np.ndarray) -> float:
    """Allocation movement between iterates.

    Log-domain change per component, except that components whose absolute
    movement is negligible on the block scale no longer block convergence:
    a starved cell's alpha decays geometrically toward the box floor and
    would otherwise keep the log metric at a constant plateau forever.
    """
    new = np.concatenate([cand.P, cand.p, cand.alpha])
    old = np.concatenate([prev.P, prev.p, prev.alpha])
    d_log = np.abs(np.log(new) - np.log(old))
    d_lin = np.abs(new - old) / scales
    return float(np.max(np.minimum(d_log, d_lin)))


def _build_subproblem(spec: ProblemSpec, alloc: Allocation, net: NetworkInstance,
                      params: SystemParams, cache: dict):
    if spec.mode == "df":
        model = cache.setdefault(
            "df_model", sca_gp.DfGpModel(net, params, spec.eps_bar))
        gamma_r, gamma_u = sinr_df(alloc, net, params)
        z_prev = np.minimum(gamma_r, gamma_u)
        return sca_gp.build_df_gp(alloc, net, params, spec.eps_bar, z_prev,
                                  model=model)
    if spec.method == "gp":
        model = cache.setdefault(
            "gp_model", sca_gp.AfGpModel(net, params, spec.optimize_only))
        if spec.kind == "sum_rate":
            return sca_gp.build_p1_gp(alloc, net, params, model=model)
        if spec.kind == "max_min":
            return sca_gp.build_p2_gp(alloc, net, params, model=model)
        return sca_gp.build_p3_gp(alloc, net, params, spec.tau_min, model=model)
    # DC path (joint only)
    model = cache.setdefault("dc_model", sca_dc.DcModel(net, params))
    expansion = sca_dc.make_expansion(alloc, net, params, phi=model.phi)
    if spec.kind == "sum_rate":
        return sca_dc.build_p1_dc(expansion, net, params, model=model,
                                  start_alloc=alloc)
    if spec.kind == "max_min":
        return sca_dc.build_p2_dc(expansion, net, params, model=model,
                                  start_alloc=alloc)
    return sca_dc.build_p3_dc(expansion, net, params, spec.tau_min, model=model,
                              start_alloc=alloc)


def run_sca(spec: ProblemSpec, net: NetworkInstance, params: SystemParams,
            solver_options: SolverOptions = None, seed: int = -1) -> Trace:
    """Iterate convex subproblems until the true objective stalls.

    Every accepted iterate is feasible for the original problem; the
    recorded objective sequence is monotone (non-decreasing for the
    maximization kinds, non-increasing for sum-power past the first step,
    whose start point need not satisfy the throughput target yet).
    """
    if spec.optimize_only is not None and spec.method != "gp":
        raise ValueError("single-block baselines run on the GP path")
    params = replace(params, epsilon=spec.eps_bar) if spec.mode == "df" else params
    opts = solver_options or SolverOptions()
    sign = -1.0 if spec.kind == "sum_power" else 1.0
    if spec.optimize_only is None:
        alloc = init_allocation(spec.varsigma, params, net,
                                mode=spec.mode, eps_bar=spec.eps_bar)
    else:
        alloc = _baseline_init(spec.optimize_only, spec.varsigma, params, net)

    trace = Trace(spec=spec, seed=seed)
    cache = {}

    def record(it, alloc, objs, sol_status, kkt, wall):
        rep = check_feasibility(alloc, net, params, mode=spec.mode)
        trace.records.append(IterRecord(
            iteration=it, objective=objs[0], sum_rate=objs[1], min_tau=objs[2],
            sum_power=objs[3], prod_uv=objs[4], max_residual=rep.max_violation,
            solver_status=sol_status, kkt_residual=kkt, wall_s=wall))
        return objs[5]

    objs = _true_objectives(alloc, net, params, spec)
    tau = record(0, alloc, objs, "init", np.nan, 0.0)
    obj_prev = objs[0]

    n = net.n_cells
    cap_scale = float(np.max(params.eta * (net.h_bar.T @ np.full(n, params.p_max))))
    change_scales = np.concatenate([np.full(n, params.p_max),
                                    np.full(n, cap_scale), np.ones(n)])

    status = "max_iter"
    for m in range(1, spec.max_iter + 1):
        t_start = time.perf_counter()
        sub = _build_subproblem(spec, alloc, net, params, cache)
        sol = solve(sub.program, sub.y_start, options=opts)
        wall = time.perf_counter() - t_start
        if sol.status == SolveStatus.INFEASIBLE:
            if spec.kind != "sum_power":
                raise SubproblemInfeasible(
                    f"{sub.kind} subproblem infeasible at iteration {m}")
            trace.status = "infeasible"
            trace.allocation = alloc
            trace.tau = tau
            return trace
        cand = sub.decode(sol.y_star)
        objs = _true_objectives(cand, net, params, spec)
        improvement = sign * (objs[0] - obj_prev)
        slack = OBJECTIVE_SLACK * max(abs(obj_prev), 1e-12)
        if improvement < -slack and not (m == 1 and spec.kind == "sum_power"):
            raise RuntimeError(
                f"monotonicity violated at iteration {m}: "
                f"{obj_prev!r} -> {objs[0]!r} ({sub.kind})")
        if improvement < 0 and not (m == 1 and spec.kind == "sum_power"):
            status = "converged"   # no further improvement: stop, keep previous
            break
        change = _alloc_change(cand, alloc, change_scales)
        rel_change = abs(objs[0] - obj_prev) / max(abs(obj_prev), 1e-12)
        alloc = cand
        obj_prev = objs[0]
        tau = record(m, alloc, objs, sol.status.value, sol.kkt_residual, wall)
        if rel_change <= spec.tol and change <= ALLOC_CHANGE_TOL:
            status = "converged"
            break

    trace.status = status
    trace.allocation = alloc
    trace.tau = tau
    return trace


def baseline_individual(which: str, spec: ProblemSpec, net: NetworkInstance,
                        params: SystemParams,
                        solver_options: SolverOptions = None) -> Trace:
    """Optimize a single block (P, p or alpha) with the others pinned to the
    fixed rule P = P_max, alpha = 0.5, p = harvest cap at (P, alpha).

    Runs on the GP path (both SCA flavors reach the same values on the
    joint problems, so one flavor suffices for the baselines)."""
    block = {"P_only": "P", "p_only": "p", "alpha_only": "alpha"}.get(which)
    if block is None:
        raise ValueError(f"unknown baseline {which!r}")
    if spec.kind == "sum_power" and block != "P":
        raise ValueError("sum-power baseline optimizes P only")
    if spec.mode != "af":
        raise ValueError("baselines are defined for AF relaying")
    bspec = replace(spec, method="gp", optimize_only=block)
    return run_sca(bspec, net, params, solver_options=solver_options)


@dataclass
class EpsilonSearchResult:
    eps_star: float
    objective: float
    trace: Trace
    grid: list                    # (eps, objective or nan, feasible)


def optimize_epsilon_df(net: NetworkInstance, params: SystemParams, grid,
                        inner_spec: ProblemSpec = None,
                        strategy: str = "fixed_allocation",
                        solver_options: SolverOptions = None) -> EpsilonSearchResult:
    """Exhaustive search over the DF timeslot fraction.

    strategy "fixed_allocation": run the inner SCA once at eps=0.5, then
    rescore the eps-linear objective over the grid with (P, p, alpha)
    fixed, keeping only grid points that respect the harvest cap (the
    anchor eps is always a candidate, so the result can never fall below
    the fixed-eps run).  strategy "rerun": full inner SCA per grid point,
    best taken.
    """
    grid = [float(e) for e in grid]
    if not grid:
        raise ValueError("epsilon grid must be non-empty")
    if any(not 0.0 < e < 1.0 for e in grid):
        raise ValueError("epsilon grid values must lie in (0, 1)")
    base = inner_spec or ProblemSpec(kind="sum_rate", mode="df", method="gp")

    if strategy == "rerun":
        results = []
        for eps in grid:
            tr = run_sca(replace(base, eps_bar=eps), net, params,
                         solver_options=solver_options)
            results.append((eps, tr.objective, True, tr))
        eps_star, obj, _, tr = max(results, key=lambda r: r[1])
        return EpsilonSearchResult(eps_star, obj, tr,
                                   [(e, o, f) for e, o, f, _ in results])

    if strategy != "fixed_allocation":
        raise ValueError(f"unknown strategy {strategy!r}")
    anchor = 0.5
    tr = run_sca(replace(base, eps_bar=anchor), net, params,
                 solver_options=solver_options)
    alloc = tr.allocation
    params_eval = replace(params, epsilon=anchor)
    gamma_r, gamma_u = sinr_df(alloc, net, params_eval)
    rate = float(np.log2(1.0 + np.minimum(gamma_r, gamma_u)).sum())
    harvest = params.eta * alloc.alpha * (net.h_bar.T @ alloc.P)
    # p_i <= (1-eps)/eps * harvest_i: the largest admissible eps per cell
    eps_cap = float(np.min(harvest / (alloc.p + harvest)))
    table = []
    candidates = [(anchor, anchor * rate, True)]
    for eps in grid:
        feasible = eps <= eps_cap * (1.0 + 1e-9)
        obj = eps * rate if feasible else np.nan
        table.append((eps, obj, feasible))
        if feasible:
            candidates.append((eps, obj, True))
    eps_star, obj, _ = max(candidates, key=lambda r: r[1])
    return EpsilonSearchResult(eps_star, obj, tr, table)


# ----------------------------------------------------------------------
# scenario plumbing
# ----------------------------------------------------------------------

DEFAULT_CONFIG = {
    "topology": {"n_cells": 4, "cell_size_m": 150.0,
                 "hop_dist_m": float(35.0 * np.sqrt(2.0)), "beta": 3.0},
    "fading": {"rician_k_db": 10.0, "seed": 0},
    "system": {"eta": 0.5, "sigma_dbm": -131.0, "p_min_dbm": 26.0,
               "p_max_dbm": 46.0, "block_time_s": 1.0, "epsilon": 0.5},
    "problem": {"kind": "sum_rate", "mode": "af", "method": "gp",
                "tau_min": 0.12, "varsigma": 0.5, "tol": 1e-4, "max_iter": 50},
    "solver": {"tol": 1e-8, "mu": 10.0, "newton_max_steps": 200},
}


def config_with_defaults(config: dict = None) -> dict:
    merged = {k: dict(v) for k, v in DEFAULT_CONFIG.items()}
    for section, values in (config or {}).items():
        merged.setdefault(section, {}).update(values)
    return merged


def make_topology(config: dict) -> TopologySpec:
    t = config["topology"]
    return build_grid_topology(t["n_cells"], t["cell_size_m"],
                               t.get("hop_dist_m", float(35 * np.sqrt(2))),
                               beta=t["beta"])


def make_params(config: dict) -> SystemParams:
    s = config["system"]
    return SystemParams(eta=s["eta"], sigma=float(dbm_to_watt(s["sigma_dbm"])),
                        p_min=float(dbm_to_watt(s["p_min_dbm"])),
                        p_max=float(dbm_to_watt(s["p_max_dbm"])),
                        block_time=s.get("block_time_s", 1.0),
                        epsilon=s.get("epsilon", 0.5))


def make_network(config: dict, seed: int = None) -> NetworkInstance:
    topo = make_topology(config)
    f = config["fading"]
    fading = FadingSpec(rician_k_db=f["rician_k_db"],
                        seed=f["seed"] if seed is None else int(seed))
    return generate_instance(topo, fading)


def make_problem(config: dict) -> ProblemSpec:
    p = config["problem"]
    return ProblemSpec(kind=p["kind"], mode=p["mode"], method=p["method"],
                       tau_min=p.get("tau_min", 0.12),
                       varsigma=p.get("varsigma", 0.5),
                       tol=p.get("tol", 1e-4), max_iter=p.get("max_iter", 50),
                       eps_bar=p.get("eps_bar", 0.5))


def make_solver_options(config: dict) -> SolverOptions:
    s = config.get("solver", {})
    return SolverOptions(tol=s.get("tol", 1e-8), mu=s.get("mu", 10.0),
                         newton_max_steps=s.get("newton_max_steps", 200))


# ----------------------------------------------------------------------
# experiment artifacts
# ----------------------------------------------------------------------

def _write_csv(path: Path, header: list, rows: list):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_manifest(out_dir: Path, config: dict, seeds: list):
    """Run manifest: config echo, content hash, seed list."""
    canonical = json.dumps(config, sort_keys=True).encode()
    manifest = {
        "config": config,
        "config_sha256": hashlib.sha256(canonical).hexdigest(),
        "seeds": list(map(int, seeds)),
        "rng": "numpy.random.default_rng (PCG64)",
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)


def convergence_experiment(config: dict, seeds, out_dir: Path = None):
    """Per-iteration objective traces for both SCA flavors; returns rows
    (iteration, objective, max_residual, method, seed)."""
    config = config_with_defaults(config)
    params = make_params(config)
    rows = []
    traces = {}
    for seed in seeds:
        net = make_network(config, seed=seed)
        for method in ("gp", "dc"):
            spec = replace(make_problem(config), method=method)
            tr = run_sca(spec, net, params, make_solver_options(config), seed=seed)
            traces[(seed, method)] = tr
            for r in tr.records:
                rows.append([r.iteration, r.objective, r.max_residual, method, seed])
    if out_dir is not None:
        _write_csv(Path(out_dir) / "convergence.csv",
                   ["iteration", "objective", "max_residual", "method", "seed"], rows)
        write_manifest(Path(out_dir), config, seeds)
    return rows, traces


def baseline_experiment(config: dict, seeds, out_dir: Path = None):
    """Joint vs single-block optimization for sum-rate and max-min."""
    config = config_with_defaults(config)
    params = make_params(config)
    rows = []
    for seed in seeds:
        net = make_network(config, seed=seed)
        for kind in ("sum_rate", "max_min"):
            spec = replace(make_problem(config), kind=kind, method="gp")
            joint = run_sca(spec, net, params, make_solver_options(config), seed=seed)
            row = {"seed": seed, "kind": kind, "joint": joint.objective}
            for which in ("P_only", "p_only", "alpha_only"):
                row[which] = baseline_individual(which, spec, net, params,
                                                 make_solver_options(config)).objective
            rows.append(row)
    if out_dir is not None:
        _write_csv(Path(out_dir) / "baselines.csv",
                   ["seed", "kind", "joint", "P_only", "p_only", "alpha_only"],
                   [[r["seed"], r["kind"], r["joint"], r["P_only"], r["p_only"],
                     r["alpha_only"]] for r in rows])
        write_manifest(Path(out_dir), config, seeds)
    return rows


def af_df_sweep(config: dict, seeds, p_max_dbm_grid=(35, 37, 39, 41, 43, 45),
                eps_grid=None, out_dir: Path = None):
    """Mean sum-rate of AF vs DF (fixed and optimized timeslot) over P_max."""
    config = config_with_defaults(config)
    eps_grid = list(eps_grid) if eps_grid is not None else list(DEFAULT_EPS_GRID)
    rows = []
    for p_max_dbm in p_max_dbm_grid:
        cfg = config_with_defaults({**config,
                                    "system": {**config["system"],
                                               "p_max_dbm": p_max_dbm}})
        params = make_params(cfg)
        sopts = make_solver_options(cfg)
        af_vals, df_fix_vals, df_a_vals, df_b_vals = [], [], [], []
        for seed in seeds:
            net = make_network(cfg, seed=seed)
            af = run_sca(ProblemSpec(kind="sum_rate", mode="af", method="gp"),
                         net, params, sopts, seed=seed)
            af_vals.append(af.objective)
            fixed = run_sca(ProblemSpec(kind="sum_rate", mode="df", method="gp",
                                        eps_bar=0.5), net, params, sopts, seed=seed)
            df_fix_vals.append(fixed.objective)
            res_a = optimize_epsilon_df(net, params, eps_grid,
                                        strategy="fixed_allocation",
                                        solver_options=sopts)
            df_a_vals.append(res_a.objective)
            res_b = optimize_epsilon_df(net, params, eps_grid, strategy="rerun",
                                        solver_options=sopts)
            df_b_vals.append(res_b.objective)
        rows.append([p_max_dbm, float(np.mean(af_vals)), float(np.mean(df_fix_vals)),
                     float(np.mean(df_a_vals)), float(np.mean(df_b_vals))])
    if out_dir is not None:
        _write_csv(Path(out_dir) / "af_df_sweep.csv",
                   ["p_max_dbm", "af", "df_fixed", "df_eps_fixed_alloc",
                    "df_eps_rerun"], rows)
        write_manifest(Path(out_dir), config, seeds)
    return rows


def experiment_suite(config: dict, out_dir, seeds=None,
                     experiments=("convergence", "baselines", "af_df_sweep")):
    """Run the requested experiment families and emit CSV + manifest."""
    out_dir = Path(out_dir)
    seeds = list(seeds) if seeds is not None else list(range(10))
    results = {}
    if "convergence" in experiments:
        results["convergence"] = convergence_experiment(config, seeds, out_dir)[0]
    if "baselines" in experiments:
        results["baselines"] = baseline_experiment(config, seeds, out_dir)
    if "af_df_sweep" in experiments:
        results["af_df_sweep"] = af_df_sweep(config, seeds, out_dir=out_dir)
    return results
