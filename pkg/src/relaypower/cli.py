"""Command-line front end: solve single problems, run sweeps and baselines,
and a quick selftest of the core invariants."""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import driver
from .driver import (DEFAULT_EPS_GRID, ProblemSpec, baseline_individual,
                     config_with_defaults, make_network, make_params,
                     make_problem, make_solver_options, optimize_epsilon_df,
                     run_sca, watt_to_dbm)

PROBLEM_KINDS = {"p1": "sum_rate", "p2": "max_min", "p3": "sum_power"}


def _parse_seeds(text: str):
    """"0:5" -> [0..4]; "1,7,9" -> [1, 7, 9]; "3" -> [3]."""
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi)))
    return [int(s) for s in text.split(",")]


def _load_config(path):
    if path is None:
        return config_with_defaults(None)
    with open(path, encoding="utf-8") as fh:
        return config_with_defaults(json.load(fh))


def _apply_flags(config, args):
    if getattr(args, "problem", None):
        config["problem"]["kind"] = PROBLEM_KINDS[args.problem]
    for flag, section, key in [("method", "problem", "method"),
                               ("mode", "problem", "mode"),
                               ("tol", "problem", "tol"),
                               ("max_iter", "problem", "max_iter"),
                               ("varsigma", "problem", "varsigma"),
                               ("tau_min", "problem", "tau_min"),
                               ("p_max_dbm", "system", "p_max_dbm")]:
        val = getattr(args, flag, None)
        if val is not None:
            config[section][key] = val
    return config


def cmd_solve(args):
    config = _apply_flags(_load_config(args.config), args)
    params = make_params(config)
    seeds = _parse_seeds(args.seeds)
    sopts = make_solver_options(config)
    for seed in seeds:
        net = make_network(config, seed=seed)
        spec = make_problem(config)
        tr = run_sca(spec, net, params, sopts, seed=seed)
        print(f"# seed={seed} kind={spec.kind} method={spec.method} "
              f"mode={spec.mode} status={tr.status}")
        print("iter  objective      max_residual  solver    kkt")
        for r in tr.records:
            print(f"{r.iteration:4d}  {r.objective:.8f} {r.max_residual:11.2e}  "
                  f"{r.solver_status:9s} {r.kkt_residual:.2e}")
        alloc = tr.allocation
        print(f"final P (dBm): {np.round(watt_to_dbm(alloc.P), 2).tolist()}")
        print(f"final p (dBm): {np.round(watt_to_dbm(alloc.p), 2).tolist()}")
        print(f"final alpha:   {np.round(alloc.alpha, 4).tolist()}")
        print(f"per-cell throughput: {np.round(tr.tau, 4).tolist()}")
        if args.out:
            out = Path(args.out)
            rows = [[r.iteration, r.objective, r.max_residual, spec.method, seed]
                    for r in tr.records]
            driver._write_csv(out / f"solve_seed{seed}.csv",
                              ["iteration", "objective", "max_residual",
                               "method", "seed"], rows)
            driver.write_manifest(out, config, seeds)
    return 0


def cmd_sweep(args):
    config = _apply_flags(_load_config(args.config), args)
    seeds = _parse_seeds(args.seeds)
    p_grid = [float(x) for x in args.pmax_dbm.split(",")]
    eps_grid = ([float(x) for x in args.eps_grid.split(",")]
                if args.eps_grid else list(DEFAULT_EPS_GRID))
    rows = driver.af_df_sweep(config, seeds, p_max_dbm_grid=p_grid,
                              eps_grid=eps_grid,
                              out_dir=Path(args.out) if args.out else None)
    print("p_max_dbm        af  df_fixed  df_eps_a  df_eps_b")
    for row in rows:
        print("  ".join(f"{v:8.4f}" for v in row))
    return 0


def cmd_baselines(args):
    config = _apply_flags(_load_config(args.config), args)
    seeds = _parse_seeds(args.seeds)
    rows = driver.baseline_experiment(config, seeds,
                                      out_dir=Path(args.out) if args.out else None)
    print("seed  kind      joint    P_only   p_only   alpha_only")
    for r in rows:
        print(f"{r['seed']:4d}  {r['kind']:9s} {r['joint']:8.4f} "
              f"{r['P_only']:8.4f} {r['p_only']:8.4f} {r['alpha_only']:8.4f}")
    return 0


def cmd_selftest(args):
    """Fast invariant sweep on one seed: bounds, gradients, monotone runs."""
    from .convexcore import LseFunction
    from .linkmodel import phi_coeffs, sinr_af
    from .sca_dc import grad_vbar, make_expansion, linearize_vbar
    from .sca_gp import AfGpModel, condense_posynomial

    config = _apply_flags(_load_config(args.config), args)
    params = make_params(config)
    net = make_network(config, seed=0)
    n = net.n_cells
    rng = np.random.default_rng(0)
    failures = 0

    def report(name, ok):
        nonlocal failures
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
        failures += 0 if ok else 1

    model = AfGpModel(net, params)
    x0 = model.encode(driver.init_allocation(0.5, params, net))
    ok = True
    for v in model.uv.v:
        mono, _ = condense_posynomial(v, x0)
        if abs(mono.eval(x0) / v.eval(x0) - 1) > 1e-9:
            ok = False
        for _ in range(100):
            x = x0 * np.exp(rng.uniform(-1, 1, x0.shape))
            if mono.eval(x) > v.eval(x) * (1 + 1e-9):
                ok = False
    report("condensation touches at x0 and under-estimates elsewhere", ok)

    phi = phi_coeffs(net, params.sigma)
    exp0 = make_expansion(driver.init_allocation(0.5, params, net), net, params, phi)
    g_fd = np.zeros_like(exp0.grad)
    h = 1e-6
    for l in range(3 * n):
        xp, xm = exp0.x_bar.copy(), exp0.x_bar.copy()
        xp[l] += h
        xm[l] -= h
        from .sca_dc import eval_ubar_vbar
        _, vp = eval_ubar_vbar(xp, phi)
        _, vm = eval_ubar_vbar(xm, phi)
        g_fd[:, l] = (vp - vm) / (2 * h)
    rel = np.abs(exp0.grad - g_fd).max() / np.abs(g_fd).max()
    report(f"DC gradient matches finite differences (rel {rel:.1e})", rel < 1e-6)

    spec = ProblemSpec(kind="sum_rate", method="gp")
    tr = run_sca(spec, net, params, seed=0)
    mono_ok = bool(np.all(np.diff(tr.objectives()) >= -1e-12))
    feas_ok = all(r.max_residual <= 1e-9 for r in tr.records)
    report(f"GP sum-rate run monotone and feasible ({tr.n_iterations} iters)",
           mono_ok and feas_ok and tr.converged)

    tr = run_sca(replace(spec, method="dc"), net, params, seed=0)
    mono_ok = bool(np.all(np.diff(tr.objectives()) >= -1e-12))
    report(f"DC sum-rate run monotone ({tr.n_iterations} iters)",
           mono_ok and tr.converged)

    print(f"{'OK' if failures == 0 else f'{failures} FAILURES'}")
    return 1 if failures else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="relaypower",
        description="Joint power/power-splitting optimization for "
                    "energy-harvesting relay networks")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seeds", default="0", help="seed list '0:5' or '1,2,3'")
        p.add_argument("--out", help="output directory for CSV artifacts")
        p.add_argument("--problem", choices=list(PROBLEM_KINDS))
        p.add_argument("--method", choices=["gp", "dc"])
        p.add_argument("--mode", choices=["af", "df"])
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--varsigma", type=float)
        p.add_argument("--tau-min", dest="tau_min", type=float)
        p.add_argument("--pmax-dbm", dest="p_max_dbm", type=float)

    p_solve = sub.add_parser("solve", help="run one problem and print the trace")
    common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="AF vs DF sweep over P_max")
    common(p_sweep)
    p_sweep.add_argument("--pmax-grid", dest="pmax_dbm", default="35,37,39,41,43,45")
    p_sweep.add_argument("--eps-grid", dest="eps_grid")
    p_sweep.set_defaults(func=cmd_sweep)

    p_base = sub.add_parser("baselines", help="joint vs single-block optimization")
    common(p_base)
    p_base.set_defaults(func=cmd_baselines)

    p_self = sub.add_parser("selftest", help="fast invariant checks")
    common(p_self)
    p_self.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
