"""GP-path successive convex approximation.

Per iteration the nonconvex parts are replaced by their best local
monomial under-estimators (arithmetic-geometric-mean condensation of the
full-signal posynomials v_i and of the relay harvest constraint), which
turns each subproblem into a geometric program; it is compiled straight
to an LseProgram over the log variables.

Variable layout for the joint AF problem (N cells):
    y = [ln P_1..N, ln p_1..N, ln t_1..N, ln alpha_1..N]  (+ tau appended
    as a plain linear variable for the max-min problem).
Baseline variants optimize a single block; the frozen blocks are
substituted into the posynomials (p is tied to the harvest cap formula
whenever it is not the optimized block).
"""

from dataclasses import dataclass

import numpy as np

from .convexcore import LseFunction, LseProgram, Monomial, Posynomial
from .linkmodel import Allocation, PhiCoefficients, SystemParams, phi_coeffs
from .netgen import NetworkInstance

ALPHA_FLOOR = 1e-6          # log-domain box floor for alpha and t
START_SHRINK = 1e-9         # pull-in factor for strictly feasible starts
WEIGHT_FLOOR = 1e-12        # AGM weight floor (condensation degeneracy guard)
LN2 = float(np.log(2.0))


@dataclass
class UvFunctions:
    """Interference (u_i) and full-signal (v_i) posynomials per cell; their
    difference is exactly the desired-signal monomial phi1[i,i] P_i p_i t_i."""

    u: list
    v: list


@dataclass
class CondensationPoint:
    """Expansion data of one GP iteration: the previous iterate and the AGM
    weights used to condense v_i and the harvest constraint."""

    x_prev: np.ndarray
    vtilde_weights: list
    eh_lambda: np.ndarray = None


def condense_posynomial(posy: Posynomial, x0, weight_floor: float = WEIGHT_FLOOR):
    """Best local monomial under-estimator of a posynomial at x0 > 0.

    Weighted AGM with lambda_k = m_k(x0)/posy(x0): touches posy at x0,
    bounds it from below everywhere on x > 0, and matches its gradient at
    x0.  Weights are floored (then renormalized) to avoid zero exponents
    from numerically negligible terms.

    Returns (monomial, weights).
    """
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 <= 0):
        raise ValueError("condensation point must be strictly positive")
    term_vals = posy.eval_terms(x0)
    total = term_vals.sum()
    if not np.isfinite(total) or total <= 0:
        raise ValueError("posynomial must be finite and positive at x0")
    lam = term_vals / total
    if np.any(lam < weight_floor):
        lam = np.maximum(lam, weight_floor)
        lam = lam / lam.sum()
    log_coeff = float(np.sum(lam * (np.log(posy.coeffs) - np.log(lam))))
    expo = lam @ posy.expo
    return Monomial(np.exp(log_coeff), expo), lam


def eh_lambda_weights(h_bar: np.ndarray, P0: np.ndarray) -> np.ndarray:
    """AGM weights of the harvest-sum condensation: lam[i, j] =
    P0_j h_bar[j, i] / sum_k P0_k h_bar[k, i]; rows sum to 1."""
    contrib = (h_bar * np.asarray(P0)[:, None]).T   # [i, j] = P0_j h_bar[j, i]
    return contrib / contrib.sum(axis=1, keepdims=True)


def eh_monomial_bound(net: NetworkInstance, params: SystemParams, P0,
                      idx_P=None, idx_alpha=None, n_vars=None):
    """Monomial lower bound w_i(alpha_i, P) of the relay harvest cap
    eta alpha_i sum_j P_j h_bar[j, i], condensed around P0.

    Equals the true cap at P = P0.  Default layout is the joint 4N space.
    Returns (list of Monomial per cell, lambda weight matrix).
    """
    n = net.n_cells
    if idx_P is None:
        idx_P = np.arange(n)
        idx_alpha = 3 * n + np.arange(n)
        n_vars = 4 * n
    P0 = np.asarray(P0, dtype=float)
    lam = eh_lambda_weights(net.h_bar, P0)
    S = net.h_bar.T @ P0                      # S_i = sum_j P0_j h_bar[j, i]
    monos = []
    for i in range(n):
        log_coeff = np.log(params.eta) + float(np.sum(lam[i] * (np.log(S[i]) - np.log(P0))))
        expo = np.zeros(n_vars)
        expo[idx_alpha[i]] = 1.0
        expo[np.asarray(idx_P)] = lam[i]
        monos.append(Monomial(np.exp(log_coeff), expo))
    return monos, lam


def af_uv_posynomials(phi: PhiCoefficients, n_vars: int = None) -> UvFunctions:
    """u_i and v_i over the joint layout [P, p, t, alpha] (alpha unused)."""
    n = phi.n_cells
    if n_vars is None:
        n_vars = 4 * n
    iP, ip, it = np.arange(n), n + np.arange(n), 2 * n + np.arange(n)
    u_list, v_list = [], []
    for i in range(n):
        coeffs, rows = [], []
        # phi1 terms: P_j p_i t_i (cross only for u, all j for v)
        for j in range(n):
            expo = np.zeros(n_vars)
            expo[iP[j]] += 1.0
            expo[ip[i]] += 1.0
            expo[it[i]] += 1.0
            coeffs.append(phi.phi1[i, j])
            rows.append(expo)
        # phi2 terms: P_j t_i
        for j in range(n):
            expo = np.zeros(n_vars)
            expo[iP[j]] += 1.0
            expo[it[i]] += 1.0
            coeffs.append(phi.phi2[i, j])
            rows.append(expo)
        # phi3 terms: p_j
        for j in range(n):
            expo = np.zeros(n_vars)
            expo[ip[j]] += 1.0
            coeffs.append(phi.phi3[i, j])
            rows.append(expo)
        # phi4 terms: P_k p_j t_i for j != i
        for j in range(n):
            if j == i:
                continue
            for k in range(n):
                expo = np.zeros(n_vars)
                expo[iP[k]] += 1.0
                expo[ip[j]] += 1.0
                expo[it[i]] += 1.0
                coeffs.append(phi.phi4[i, j, k])
                rows.append(expo)
        # noise "+1"
        coeffs.append(1.0)
        rows.append(np.zeros(n_vars))

        v_list.append(Posynomial(np.array(coeffs), np.array(rows)))
        # u_i drops the desired-signal phi1[i, i] term (index i in the block)
        keep = np.ones(len(coeffs), dtype=bool)
        keep[i] = False
        u_list.append(Posynomial(np.array(coeffs)[keep], np.array(rows)[keep]))
    return UvFunctions(u=u_list, v=v_list)


class AfGpModel:
    """Posynomial model of the AF problems, joint or single-block baseline.

    optimize_only: None for the joint problem, or one of "P", "p", "alpha"
    to optimize that block alone with the paper's freezing rule (P = P_max,
    alpha = 0.5, p tied to the harvest cap formula).
    """

    def __init__(self, net: NetworkInstance, params: SystemParams,
                 optimize_only: str = None, phi: PhiCoefficients = None):
        self.net = net
        self.params = params
        self.phi = phi if phi is not None else phi_coeffs(net, params.sigma)
        self.mode = optimize_only
        n = net.n_cells
        self.n_cells = n
        full = af_uv_posynomials(self.phi)

        if optimize_only is None:
            self.n_vars = 4 * n
            self.idx_P = np.arange(n)
            self.idx_p = n + np.arange(n)
            self.idx_t = 2 * n + np.arange(n)
            self.idx_a = 3 * n + np.arange(n)
            self.uv = full
        elif optimize_only == "P":
            self.n_vars = n
            self.idx_P = np.arange(n)
            self.idx_p = self.idx_t = self.idx_a = None
            mapping = [("var", j) for j in range(n)]
            # p_j tied to the cap: eta*0.5*sum_k P_k h_bar[k, j]
            mapping += [("posy", Posynomial(params.eta * 0.5 * net.h_bar[:, j],
                                            np.eye(n))) for j in range(n)]
            mapping += [("const", 0.5)] * n   # t
            mapping += [("const", 0.5)] * n   # alpha
            self.uv = UvFunctions(u=[p.substitute(mapping) for p in full.u],
                                  v=[p.substitute(mapping) for p in full.v])
        elif optimize_only == "p":
            self.n_vars = n
            self.idx_p = np.arange(n)
            self.idx_P = self.idx_t = self.idx_a = None
            mapping = [("const", params.p_max)] * n
            mapping += [("var", j) for j in range(n)]
            mapping += [("const", 0.5)] * n
            mapping += [("const", 0.5)] * n
            self.uv = UvFunctions(u=[p.substitute(mapping) for p in full.u],
                                  v=[p.substitute(mapping) for p in full.v])
        elif optimize_only == "alpha":
            self.n_vars = 2 * n
            self.idx_t = np.arange(n)
            self.idx_a = n + np.arange(n)
            self.idx_P = self.idx_p = None
            cap_scale = params.eta * (net.h_bar.T @ np.full(n, params.p_max))
            mapping = [("const", params.p_max)] * n
            mapping += [("mono", Monomial(cap_scale[j],
                                          np.eye(2 * n)[n + j])) for j in range(n)]
            mapping += [("var", j) for j in range(n)]
            mapping += [("var", n + j) for j in range(n)]
            self.uv = UvFunctions(u=[p.substitute(mapping) for p in full.u],
                                  v=[p.substitute(mapping) for p in full.v])
        else:
            raise ValueError(f"unknown optimize_only mode {optimize_only!r}")

        cap_full = params.eta * (net.h_bar.T @ np.full(n, params.p_max))
        self.p_hi = 10.0 * float(cap_full.max())
        self.p_lo = self.p_hi * 1e-14

    # -- encode/decode ---------------------------------------------------
    def encode(self, alloc: Allocation) -> np.ndarray:
        if self.mode is None:
            return np.concatenate([alloc.P, alloc.p, alloc.t, alloc.alpha])
        if self.mode == "P":
            return alloc.P.copy()
        if self.mode == "p":
            return alloc.p.copy()
        return np.concatenate([alloc.t, alloc.alpha])

    def decode(self, y: np.ndarray) -> Allocation:
        """Map a solver point back to a feasible Allocation (t := 1 - alpha,
        which can only increase every SINR and leaves the caps unchanged)."""
        x = np.exp(np.asarray(y, dtype=float)[: self.n_vars])
        n = self.n_cells
        params, net = self.params, self.net
        if self.mode is None:
            P, p, alpha = x[self.idx_P], x[self.idx_p], x[self.idx_a]
        elif self.mode == "P":
            P = x
            alpha = np.full(n, 0.5)
            p = params.eta * alpha * (net.h_bar.T @ P)
        elif self.mode == "p":
            P = np.full(n, params.p_max)
            alpha = np.full(n, 0.5)
            p = x
        else:  # alpha
            P = np.full(n, params.p_max)
            alpha = x[self.idx_a]
            p = params.eta * alpha * (net.h_bar.T @ P)
        return Allocation(P=P, p=p, alpha=np.clip(alpha, 1e-12, 1 - 1e-12))

    # -- per-iteration pieces ---------------------------------------------
    def condensation_point(self, x0: np.ndarray) -> CondensationPoint:
        weights = []
        vtilde = []
        for v in self.uv.v:
            mono, lam = condense_posynomial(v, x0)
            vtilde.append(mono)
            weights.append(lam)
        lam_eh = None
        if self.mode is None:
            lam_eh = eh_lambda_weights(self.net.h_bar, x0[self.idx_P])
        cp = CondensationPoint(x_prev=np.asarray(x0, dtype=float).copy(),
                               vtilde_weights=weights, eh_lambda=lam_eh)
        cp.vtilde = vtilde
        return cp

    def base_program(self, cond: CondensationPoint, extra_vars: int = 0) -> LseProgram:
        """Shared constraint set: harvest cap, t + alpha <= 1, variable boxes."""
        n = self.n_cells
        nv = self.n_vars + extra_vars
        prog = LseProgram(n_vars=nv)
        lb = np.full(nv, -np.inf)
        ub = np.full(nv, np.inf)
        if self.idx_P is not None:
            lb[self.idx_P] = np.log(self.params.p_min)
            ub[self.idx_P] = np.log(self.params.p_max)
        if self.idx_t is not None:
            lb[self.idx_t] = np.log(ALPHA_FLOOR)
            ub[self.idx_t] = 0.0
            lb[self.idx_a] = np.log(ALPHA_FLOOR)
            ub[self.idx_a] = 0.0
        if self.mode == "p":
            cap = self.params.eta * 0.5 * (self.net.h_bar.T @ np.full(n, self.params.p_max))
            lb[self.idx_p] = np.log(self.p_lo)
            ub[self.idx_p] = np.log(cap)       # exact constant cap
        elif self.mode is None:
            lb[self.idx_p] = np.log(self.p_lo)
            ub[self.idx_p] = np.log(self.p_hi)
        prog.lb, prog.ub = lb, ub

        if self.mode is None:
            w_monos, _ = eh_monomial_bound(self.net, self.params, cond.x_prev[self.idx_P])
            for i in range(n):
                # p_i / w_i <= 1: affine in the log domain
                row = np.zeros(nv)
                row[self.idx_p[i]] = 1.0
                row[: self.n_vars] -= w_monos[i].expo
                prog.add_affine(row, float(np.log(w_monos[i].coeff)))
            cond.w_monos = w_monos
        if self.idx_t is not None:
            for i in range(n):
                A = np.zeros((2, nv))
                A[0, self.idx_t[i]] = 1.0
                A[1, self.idx_a[i]] = 1.0
                prog.lse_constraints.append(LseFunction(np.ones(2), A))
        return prog

    def feasible_start(self, x0: np.ndarray, extra: int = 0) -> np.ndarray:
        """Strictly interior log-domain start near x0 (the expansion point)."""
        x = np.asarray(x0, dtype=float).copy()
        if self.idx_t is not None:
            x[self.idx_t] *= 1.0 - START_SHRINK
            x[self.idx_a] *= 1.0 - START_SHRINK
        if self.mode is None:
            cap = self.params.eta * x[self.idx_a] * (self.net.h_bar.T @ x[self.idx_P])
            x[self.idx_p] = np.minimum(x[self.idx_p], cap * (1.0 - START_SHRINK))
            x[self.idx_p] = np.clip(x[self.idx_p], self.p_lo * 2.0, self.p_hi / 2.0)
        elif self.mode == "p":
            cap = self.params.eta * 0.5 * (self.net.h_bar.T @ np.full(self.n_cells, self.params.p_max))
            x = np.minimum(x, cap * (1.0 - START_SHRINK))
            x = np.maximum(x, self.p_lo * 2.0)
        y = np.log(x)
        if self.idx_P is not None:
            y[self.idx_P] = np.clip(y[self.idx_P],
                                    np.log(self.params.p_min) + 1e-12,
                                    np.log(self.params.p_max) - 1e-12)
        if extra:
            y = np.concatenate([y, np.zeros(extra)])
        return y


@dataclass
class GpSubproblem:
    """One compiled GP iteration: the convex program, a strictly feasible
    start, the decoder back to an Allocation, and the expansion data."""

    program: LseProgram
    y_start: np.ndarray
    decode: callable
    cond: CondensationPoint
    kind: str
    extras: dict = None


def _objective_sum_log_ratio(model: AfGpModel, cond: CondensationPoint,
                             prog: LseProgram, extra_vars: int = 0):
    """Objective sum_i [log u_i - log vtilde_i] (= ln prod u_i/vtilde_i)."""
    nv = model.n_vars + extra_vars
    c = np.zeros(nv)
    d = 0.0
    for i in range(model.n_cells):
        f = LseFunction.from_posynomial(model.uv.u[i])
        prog.obj_lse.append((1.0, f.padded(nv) if extra_vars else f))
        c[: model.n_vars] -= cond.vtilde[i].expo
        d -= float(np.log(cond.vtilde[i].coeff))
    prog.obj_affine = c
    prog.obj_const = d


def build_p1_gp(expansion: Allocation, net: NetworkInstance, params: SystemParams,
                optimize_only: str = None, model: AfGpModel = None) -> GpSubproblem:
    """Sum-rate GP iteration: min prod_i u_i/vtilde_i under the condensed caps."""
    model = model or AfGpModel(net, params, optimize_only)
    x0 = model.encode(expansion)
    cond = model.condensation_point(x0)
    prog = model.base_program(cond)
    _objective_sum_log_ratio(model, cond, prog)
    y0 = model.feasible_start(x0)
    return GpSubproblem(prog, y0, model.decode, cond, "p1_gp")


def build_p2_gp(expansion: Allocation, net: NetworkInstance, params: SystemParams,
                optimize_only: str = None, model: AfGpModel = None) -> GpSubproblem:
    """Max-min GP iteration: max tau s.t. u_i e^{2 tau ln2} / vtilde_i <= 1.

    tau rides along as a plain (non-log) variable: inside each LSE row it
    contributes the affine exponent term 2 ln2 tau.
    """
    model = model or AfGpModel(net, params, optimize_only)
    x0 = model.encode(expansion)
    cond = model.condensation_point(x0)
    prog = model.base_program(cond, extra_vars=1)
    nv = model.n_vars + 1
    i_tau = nv - 1
    tau_col = np.zeros(nv)
    tau_col[i_tau] = 2.0 * LN2
    for i in range(model.n_cells):
        ratio = model.uv.u[i].div_monomial(cond.vtilde[i])
        prog.lse_constraints.append(
            LseFunction.from_posynomial(ratio).padded(nv).shifted(tau_col))
    c = np.zeros(nv)
    c[i_tau] = -1.0
    prog.obj_affine = c
    lb = prog.lb.copy()
    lb[i_tau] = 0.0
    prog.lb = lb

    y0 = model.feasible_start(x0, extra=1)
    rows0 = np.array([f.eval(y0) for f in prog.lse_constraints[-model.n_cells:]])
    tau_max = float((-rows0).min()) / (2.0 * LN2)
    y0[i_tau] = max(tau_max * (1.0 - 1e-6), 1e-12)
    return GpSubproblem(prog, y0, model.decode, cond, "p2_gp", extras={"tau_index": i_tau})


def build_p3_gp(expansion: Allocation, net: NetworkInstance, params: SystemParams,
                tau_min: float, optimize_only: str = None,
                model: AfGpModel = None) -> GpSubproblem:
    """Sum-power GP iteration: min sum_i P_i s.t. per-cell throughput >= tau_min.

    The objective compiles to log sum_i e^{ln P_i} (same minimizer)."""
    if tau_min < 0:
        raise ValueError("tau_min must be nonnegative")
    model = model or AfGpModel(net, params, optimize_only)
    if model.idx_P is None:
        raise ValueError("sum-power needs P as an optimized block")
    x0 = model.encode(expansion)
    cond = model.condensation_point(x0)
    prog = model.base_program(cond)
    rate_factor = np.exp(2.0 * tau_min * LN2)
    for i in range(model.n_cells):
        ratio = model.uv.u[i].div_monomial(cond.vtilde[i]) * rate_factor
        prog.lse_constraints.append(LseFunction.from_posynomial(ratio))
    A = np.zeros((model.n_cells, model.n_vars))
    A[np.arange(model.n_cells), model.idx_P] = 1.0
    prog.obj_lse = [(1.0, LseFunction(np.ones(model.n_cells), A))]
    y0 = model.feasible_start(x0)
    return GpSubproblem(prog, y0, model.decode, cond, "p3_gp")


# ----------------------------------------------------------------------
# DF relaying (variable timeslot fraction, fixed per subproblem)
# ----------------------------------------------------------------------

class DfGpModel:
    """GP model of the DF sum-rate problem at a fixed timeslot fraction.

    Layout: y = [ln P, ln p, ln t, ln alpha, ln z] (5N); z_i is the
    auxiliary variable pinned under min(relay SINR, user SINR).
    """

    def __init__(self, net: NetworkInstance, params: SystemParams, eps_bar: float):
        if not 0.0 < eps_bar < 1.0:
            raise ValueError("eps_bar must lie in (0, 1)")
        self.net = net
        self.params = params
        self.eps_bar = eps_bar
        n = net.n_cells
        self.n_cells = n
        self.n_vars = 5 * n
        self.idx_P = np.arange(n)
        self.idx_p = n + np.arange(n)
        self.idx_t = 2 * n + np.arange(n)
        self.idx_a = 3 * n + np.arange(n)
        self.idx_z = 4 * n + np.arange(n)
        cap_full = (params.eta * (1 - eps_bar) / eps_bar
                    * (net.h_bar.T @ np.full(n, params.p_max)))
        self.p_hi = 10.0 * float(cap_full.max())
        self.p_lo = self.p_hi * 1e-14

    def encode(self, alloc: Allocation, z: np.ndarray) -> np.ndarray:
        return np.concatenate([alloc.P, alloc.p, alloc.t, alloc.alpha, z])

    def decode(self, y: np.ndarray) -> Allocation:
        x = np.exp(np.asarray(y, dtype=float))
        alpha = np.clip(x[self.idx_a], 1e-12, 1 - 1e-12)
        return Allocation(P=x[self.idx_P], p=x[self.idx_p], alpha=alpha)

    def decode_z(self, y: np.ndarray) -> np.ndarray:
        return np.exp(np.asarray(y, dtype=float)[self.idx_z])


def build_df_gp(expansion: Allocation, net: NetworkInstance, params: SystemParams,
                eps_bar: float, z_prev: np.ndarray,
                model: DfGpModel = None) -> GpSubproblem:
    """DF sum-rate GP iteration at fixed eps_bar.

    Objective min prod_i z_i^{-z0/(1+z0)} comes from the monomial lower
    bound on 1+z_i at z_prev; the SINR definitions become posynomial rows
    z_i <= gamma_R_i, z_i <= gamma_U_i, and the harvest cap carries the
    (1-eps)/eps factor with the condensed monomial bound w_i.
    """
    model = model or DfGpModel(net, params, eps_bar)
    n = model.n_cells
    nv = model.n_vars
    z_prev = np.asarray(z_prev, dtype=float)
    x0 = model.encode(expansion, z_prev)
    h, g = net.h_bar, net.g_bar
    sigma = params.sigma

    prog = LseProgram(n_vars=nv)
    lb = np.full(nv, -np.inf)
    ub = np.full(nv, np.inf)
    lb[model.idx_P] = np.log(params.p_min)
    ub[model.idx_P] = np.log(params.p_max)
    lb[model.idx_p] = np.log(model.p_lo)
    ub[model.idx_p] = np.log(model.p_hi)
    lb[model.idx_t] = np.log(ALPHA_FLOOR)
    ub[model.idx_t] = 0.0
    lb[model.idx_a] = np.log(ALPHA_FLOOR)
    ub[model.idx_a] = 0.0
    lb[model.idx_z] = np.log(1e-12)
    ub[model.idx_z] = np.log(1e12)
    prog.lb, prog.ub = lb, ub

    # objective: min sum_i -(z0/(1+z0)) ln z_i
    c = np.zeros(nv)
    c[model.idx_z] = -(z_prev / (1.0 + z_prev))
    prog.obj_affine = c

    for i in range(n):
        # relay-side SINR row: z_i (t_i sum_{j!=i} h_bar[j,i] P_j + sigma) / (t_i h_bar[i,i] P_i) <= 1
        coeffs, rows = [], []
        for j in range(n):
            if j == i:
                continue
            expo = np.zeros(nv)
            expo[model.idx_z[i]] = 1.0
            expo[model.idx_P[j]] += 1.0
            expo[model.idx_P[i]] -= 1.0
            coeffs.append(h[j, i] / h[i, i])
            rows.append(expo)
        expo = np.zeros(nv)
        expo[model.idx_z[i]] = 1.0
        expo[model.idx_t[i]] = -1.0
        expo[model.idx_P[i]] -= 1.0
        coeffs.append(sigma / h[i, i])
        rows.append(expo)
        prog.lse_constraints.append(LseFunction(np.array(coeffs), np.array(rows)))

        # user-side SINR row: z_i (sum_{j!=i} g_bar[j,i] p_j + sigma) / (g_bar[i,i] p_i) <= 1
        coeffs, rows = [], []
        for j in range(n):
            if j == i:
                continue
            expo = np.zeros(nv)
            expo[model.idx_z[i]] = 1.0
            expo[model.idx_p[j]] += 1.0
            expo[model.idx_p[i]] -= 1.0
            coeffs.append(g[j, i] / g[i, i])
            rows.append(expo)
        expo = np.zeros(nv)
        expo[model.idx_z[i]] = 1.0
        expo[model.idx_p[i]] -= 1.0
        coeffs.append(sigma / g[i, i])
        rows.append(expo)
        prog.lse_constraints.append(LseFunction(np.array(coeffs), np.array(rows)))

        # t_i + alpha_i <= 1
        A = np.zeros((2, nv))
        A[0, model.idx_t[i]] = 1.0
        A[1, model.idx_a[i]] = 1.0
        prog.lse_constraints.append(LseFunction(np.ones(2), A))

    # harvest cap rows with the DF timeslot factor
    w_monos, lam = eh_monomial_bound(net, params, expansion.P,
                                     idx_P=model.idx_P, idx_alpha=model.idx_a,
                                     n_vars=nv)
    eps_factor = eps_bar / (1.0 - eps_bar)
    for i in range(n):
        row = np.zeros(nv)
        row[model.idx_p[i]] = 1.0
        row -= w_monos[i].expo
        prog.add_affine(row, float(np.log(w_monos[i].coeff) - np.log(eps_factor)))

    cond = CondensationPoint(x_prev=x0, vtilde_weights=[], eh_lambda=lam)
    cond.w_monos = w_monos

    # strictly interior start: shrink t/alpha/p/z slightly inside their rows
    x = x0.copy()
    x[model.idx_t] *= 1.0 - START_SHRINK
    x[model.idx_a] *= 1.0 - START_SHRINK
    cap = (params.eta * x[model.idx_a] / eps_factor
           * (net.h_bar.T @ x[model.idx_P]))
    x[model.idx_p] = np.minimum(x[model.idx_p], cap * (1.0 - START_SHRINK))
    x[model.idx_p] = np.clip(x[model.idx_p], model.p_lo * 2.0, model.p_hi / 2.0)
    # refresh z below both SINRs at the shrunk point
    t_s = x[model.idx_t]
    off = 1.0 - np.eye(n)
    gam_r = t_s * np.diag(h) * x[model.idx_P] / (t_s * ((h.T * off) @ x[model.idx_P]) + sigma)
    gam_u = np.diag(g) * x[model.idx_p] / (((g.T * off) @ x[model.idx_p]) + sigma)
    x[model.idx_z] = np.minimum(gam_r, gam_u) * (1.0 - 1e-6)
    y0 = np.log(x)
    y0[model.idx_P] = np.clip(y0[model.idx_P], np.log(params.p_min) + 1e-12,
                              np.log(params.p_max) - 1e-12)
    return GpSubproblem(prog, y0, model.decode, cond, "df_gp",
                        extras={"model": model})
