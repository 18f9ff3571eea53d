"""DC-path successive convex approximation.

Works in the natural-log variable domain where the throughput splits into
a difference of two convex log-sum-exp terms, log2(1+gamma_i) =
vbar_i - ubar_i.  Each iteration replaces vbar_i by its first-order Taylor
expansion (a global under-estimator, since the gradient of a convex
function is a subgradient) and the harvest cap by an affine row obtained
from the same AGM weights as the GP path.

Variable layout: y = [Pbar, pbar, tbar, alphabar] (4N); xbar is the first
3N entries; tau rides along as a plain extra variable for the max-min
problem.
"""

from dataclasses import dataclass

import numpy as np

from .convexcore import LseFunction, LseProgram, Posynomial
from .linkmodel import Allocation, PhiCoefficients, SystemParams, phi_coeffs
from .netgen import NetworkInstance
from .sca_gp import (ALPHA_FLOOR, START_SHRINK, GpSubproblem,
                     af_uv_posynomials, eh_lambda_weights)

LN2 = float(np.log(2.0))


@dataclass
class LogVars:
    """Natural-log images of one allocation: exp() recovers the original."""

    P_bar: np.ndarray
    p_bar: np.ndarray
    t_bar: np.ndarray
    alpha_bar: np.ndarray

    @classmethod
    def from_allocation(cls, alloc: Allocation) -> "LogVars":
        return cls(np.log(alloc.P), np.log(alloc.p),
                   np.log(alloc.t), np.log(alloc.alpha))

    @property
    def x_bar(self) -> np.ndarray:
        return np.concatenate([self.P_bar, self.p_bar, self.t_bar])

    def decode(self) -> Allocation:
        alpha = np.exp(self.alpha_bar)
        return Allocation(P=np.exp(self.P_bar), p=np.exp(self.p_bar), alpha=alpha)


@dataclass
class DcExpansion:
    """Per-iteration expansion data: the point, vbar values and gradients
    there, and the AGM weights/constants of the affine harvest rows."""

    x_bar: np.ndarray           # (3N,)
    alpha_bar: np.ndarray       # (N,)
    vbar: np.ndarray            # (N,) log2 v_i at the point
    grad: np.ndarray            # (N, 3N) gradients of vbar
    lam: np.ndarray             # (N, N) rows sum to 1
    c: np.ndarray               # (N,) harvest-row constants


def _uv_values(x_bar: np.ndarray, phi: PhiCoefficients):
    """u_i and v_i (linear scale) at exp(x_bar), plus handy intermediates."""
    n = phi.n_cells
    x = np.exp(np.asarray(x_bar, dtype=float))
    P, p, t = x[:n], x[n:2 * n], x[2 * n:3 * n]
    s1 = phi.phi1 @ P                       # [i] sum_j phi1[i,j] P_j
    s2 = phi.phi2 @ P
    s3 = phi.phi3 @ p
    w4 = np.einsum("ijk,k->ij", phi.phi4, P)  # [i, j] sum_k phi4[i,j,k] P_k
    s4 = np.einsum("ij,j->i", w4, p) - np.einsum("ii,i->i", w4, p)  # j != i
    v = s1 * p * t + s2 * t + s3 + s4 * t + 1.0
    num = np.diag(phi.phi1) * P * p * t
    u = v - num
    return u, v, (P, p, t, s1, s2, s3, w4)


def eval_ubar_vbar(x_bar: np.ndarray, phi: PhiCoefficients):
    """(ubar_i, vbar_i) = log2 of the interference and full-signal sums.

    Evaluated through the overflow-safe LSE path; their difference is
    log2(1 + gamma_i)."""
    n = phi.n_cells
    uv = af_uv_posynomials(phi)
    y = np.concatenate([np.asarray(x_bar, dtype=float), np.zeros(n)])
    ubar = np.array([LseFunction.from_posynomial(f).eval(y) for f in uv.u]) / LN2
    vbar = np.array([LseFunction.from_posynomial(f).eval(y) for f in uv.v]) / LN2
    return ubar, vbar


def grad_vbar(x_bar: np.ndarray, phi: PhiCoefficients) -> np.ndarray:
    """Gradient of vbar_i over the 3N log variables, per cell.

    Case split over the variable blocks: the t-components are zero outside
    the own cell; everything is normalized by v_i(x) ln 2."""
    n = phi.n_cells
    _, v, (P, p, t, s1, s2, s3, w4) = _uv_values(x_bar, phi)
    grads = np.zeros((n, 3 * n))
    for i in range(n):
        # d/dPbar_l: (phi1[i,l] p_i t_i + phi2[i,l] t_i + sum_{j!=i} phi4[i,j,l] p_j t_i) P_l
        w4_colsum = p @ phi.phi4[i] - p[i] * phi.phi4[i, i, :]
        dP = (phi.phi1[i] * p[i] * t[i] + phi.phi2[i] * t[i] + w4_colsum * t[i]) * P
        # d/dpbar_j: phi3[i,j] p_j + sum_k phi4[i,j,k] P_k p_j t_i (j != i)
        dp = phi.phi3[i] * p + w4[i] * p * t[i]
        # own cell: phi3[i,i] p_i + sum_j phi1[i,j] P_j p_i t_i
        dp[i] = phi.phi3[i, i] * p[i] + s1[i] * p[i] * t[i]
        # d/dtbar_i: every t_i-carrying term
        dt = np.zeros(n)
        s4_i = float(w4[i] @ p - w4[i, i] * p[i])
        dt[i] = (s1[i] * p[i] + s2[i] + s4_i) * t[i]
        grads[i, :n] = dP
        grads[i, n:2 * n] = dp
        grads[i, 2 * n:] = dt
        grads[i] /= v[i] * LN2
    return grads


def linearize_vbar(expansion: DcExpansion, x_bar: np.ndarray) -> np.ndarray:
    """Affine surrogate vbar_i(x0) + grad_i . (x - x0): touches vbar at the
    expansion point and under-estimates it everywhere (subgradient bound)."""
    dx = np.asarray(x_bar, dtype=float) - expansion.x_bar
    return expansion.vbar + expansion.grad @ dx


def eh_affine_constraint(expansion: DcExpansion):
    """Rows of pbar_i - alphabar_i - sum_j lam[i,j] Pbar_j - c_i <= 0 in the
    4N layout; satisfying a row implies the original harvest cap."""
    n = expansion.lam.shape[0]
    rows = np.zeros((n, 4 * n))
    for i in range(n):
        rows[i, n + i] = 1.0          # pbar_i
        rows[i, 3 * n + i] = -1.0     # -alphabar_i
        rows[i, :n] = -expansion.lam[i]
    return rows, expansion.c.copy()


def make_expansion(alloc: Allocation, net: NetworkInstance, params: SystemParams,
                   phi: PhiCoefficients = None) -> DcExpansion:
    phi = phi if phi is not None else phi_coeffs(net, params.sigma)
    lv = LogVars.from_allocation(alloc)
    x_bar = lv.x_bar
    # direct evaluation; expansion points are feasible allocations whose
    # u/v values sit far from the float range limits
    _, v, _ = _uv_values(x_bar, phi)
    vbar = np.log2(v)
    grad = grad_vbar(x_bar, phi)
    lam = eh_lambda_weights(net.h_bar, alloc.P)
    logh = np.log(net.h_bar.T)  # [i, j] = ln h_bar[j, i]
    c = np.log(params.eta) + np.sum(lam * (logh - np.log(lam)), axis=1)
    return DcExpansion(x_bar=x_bar, alpha_bar=lv.alpha_bar, vbar=vbar,
                       grad=grad, lam=lam, c=c)


class DcModel:
    """Caches the u_i posynomials/LSEs and layout shared by every DC iteration."""

    def __init__(self, net: NetworkInstance, params: SystemParams,
                 phi: PhiCoefficients = None):
        self.net = net
        self.params = params
        self.phi = phi if phi is not None else phi_coeffs(net, params.sigma)
        n = net.n_cells
        self.n_cells = n
        self.n_vars = 4 * n
        self.idx_P = np.arange(n)
        self.idx_p = n + np.arange(n)
        self.idx_t = 2 * n + np.arange(n)
        self.idx_a = 3 * n + np.arange(n)
        self.uv = af_uv_posynomials(self.phi)
        self.u_lse = [LseFunction.from_posynomial(f) for f in self.uv.u]
        cap_full = params.eta * (net.h_bar.T @ np.full(n, params.p_max))
        self.p_hi = 10.0 * float(cap_full.max())
        self.p_lo = self.p_hi * 1e-14

    def encode(self, alloc: Allocation) -> np.ndarray:
        return np.log(np.concatenate([alloc.P, alloc.p, alloc.t, alloc.alpha]))

    def decode(self, y: np.ndarray) -> Allocation:
        x = np.exp(np.asarray(y, dtype=float)[: self.n_vars])
        alpha = np.clip(x[self.idx_a], 1e-12, 1 - 1e-12)
        return Allocation(P=x[self.idx_P], p=x[self.idx_p], alpha=alpha)

    def base_program(self, expansion: DcExpansion, extra_vars: int = 0) -> LseProgram:
        """Constraints shared by every DC subproblem: e^tbar + e^abar <= 1
        per cell, affine harvest rows, and the variable boxes (the abar <= 0
        and tbar <= 0 rows live in the boxes)."""
        n = self.n_cells
        nv = self.n_vars + extra_vars
        prog = LseProgram(n_vars=nv)
        lb = np.full(nv, -np.inf)
        ub = np.full(nv, np.inf)
        lb[self.idx_P] = np.log(self.params.p_min)
        ub[self.idx_P] = np.log(self.params.p_max)
        lb[self.idx_p] = np.log(self.p_lo)
        ub[self.idx_p] = np.log(self.p_hi)
        lb[self.idx_t] = np.log(ALPHA_FLOOR)
        ub[self.idx_t] = 0.0
        lb[self.idx_a] = np.log(ALPHA_FLOOR)
        ub[self.idx_a] = 0.0
        prog.lb, prog.ub = lb, ub
        for i in range(n):
            A = np.zeros((2, nv))
            A[0, self.idx_t[i]] = 1.0
            A[1, self.idx_a[i]] = 1.0
            prog.lse_constraints.append(LseFunction(np.ones(2), A))
        rows, rhs = eh_affine_constraint(expansion)
        for i in range(n):
            row = np.zeros(nv)
            row[: self.n_vars] = rows[i]
            prog.add_affine(row, rhs[i])
        return prog

    def feasible_start(self, alloc: Allocation, extra: int = 0) -> np.ndarray:
        x = np.concatenate([alloc.P, alloc.p, alloc.t, alloc.alpha])
        x[self.idx_t] *= 1.0 - START_SHRINK
        x[self.idx_a] *= 1.0 - START_SHRINK
        cap = self.params.eta * x[self.idx_a] * (self.net.h_bar.T @ x[self.idx_P])
        x[self.idx_p] = np.minimum(x[self.idx_p], cap * (1.0 - START_SHRINK))
        x[self.idx_p] = np.clip(x[self.idx_p], self.p_lo * 2.0, self.p_hi / 2.0)
        y = np.log(x)
        y[self.idx_P] = np.clip(y[self.idx_P], np.log(self.params.p_min) + 1e-12,
                                np.log(self.params.p_max) - 1e-12)
        if extra:
            y = np.concatenate([y, np.zeros(extra)])
        return y


def _surrogate_affine(expansion: DcExpansion, n_vars_out: int):
    """Per-cell affine surrogate of vbar as (coef rows over n_vars_out, consts)."""
    n = expansion.vbar.shape[0]
    rows = np.zeros((n, n_vars_out))
    rows[:, : 3 * n] = expansion.grad
    consts = expansion.vbar - expansion.grad @ expansion.x_bar
    return rows, consts


def build_p1_dc(expansion: DcExpansion, net: NetworkInstance, params: SystemParams,
                model: DcModel = None, start_alloc: Allocation = None) -> GpSubproblem:
    """Sum-rate DC iteration: max sum_i [surrogate_i - ubar_i], compiled as
    min sum_i ubar_i - (affine)."""
    model = model or DcModel(net, params)
    prog = model.base_program(expansion)
    nv = model.n_vars
    srows, sconst = _surrogate_affine(expansion, nv)
    for f in model.u_lse:
        prog.obj_lse.append((1.0 / LN2, f))
    prog.obj_affine = -srows.sum(axis=0)
    prog.obj_const = -float(sconst.sum())
    if start_alloc is None:
        start_alloc = LogVars(expansion.x_bar[:model.n_cells],
                              expansion.x_bar[model.n_cells:2 * model.n_cells],
                              expansion.x_bar[2 * model.n_cells:],
                              expansion.alpha_bar).decode()
    y0 = model.feasible_start(start_alloc)
    return GpSubproblem(prog, y0, model.decode, expansion, "p1_dc")


def _throughput_rows(model: DcModel, expansion: DcExpansion, nv: int,
                     tau_col: np.ndarray = None, tau_offset: float = 0.0):
    """LSE rows ln2*(ubar_i + 2 tau - surrogate_i) <= 0 with the affine part
    folded inside each term."""
    srows, sconst = _surrogate_affine(expansion, nv)
    rows = []
    for i, f in enumerate(model.u_lse):
        extra = -LN2 * srows[i]
        if tau_col is not None:
            extra = extra + tau_col
        offset = LN2 * (tau_offset - float(sconst[i]))
        rows.append(f.padded(nv).shifted(extra, offset))
    return rows


def build_p2_dc(expansion: DcExpansion, net: NetworkInstance, params: SystemParams,
                model: DcModel = None, start_alloc: Allocation = None) -> GpSubproblem:
    """Max-min DC iteration: max tau s.t. surrogate_i - ubar_i >= 2 tau >= 0."""
    model = model or DcModel(net, params)
    prog = model.base_program(expansion, extra_vars=1)
    nv = model.n_vars + 1
    i_tau = nv - 1
    tau_col = np.zeros(nv)
    tau_col[i_tau] = 2.0 * LN2
    rows = _throughput_rows(model, expansion, nv, tau_col=tau_col)
    prog.lse_constraints.extend(rows)
    c = np.zeros(nv)
    c[i_tau] = -1.0
    prog.obj_affine = c
    lb = prog.lb.copy()
    lb[i_tau] = 0.0
    prog.lb = lb
    if start_alloc is None:
        start_alloc = model.decode(np.concatenate([expansion.x_bar,
                                                   expansion.alpha_bar]))
    y0 = model.feasible_start(start_alloc, extra=1)
    r0 = np.array([f.eval(y0) for f in rows])
    tau_max = float((-r0).min()) / (2.0 * LN2)
    y0[i_tau] = max(tau_max * (1.0 - 1e-6), 1e-12)
    return GpSubproblem(prog, y0, model.decode, expansion, "p2_dc",
                        extras={"tau_index": i_tau})


def build_p3_dc(expansion: DcExpansion, net: NetworkInstance, params: SystemParams,
                tau_min: float, model: DcModel = None,
                start_alloc: Allocation = None) -> GpSubproblem:
    """Sum-power DC iteration: min sum_i P_i s.t. surrogate_i - ubar_i >= 2 tau_min."""
    if tau_min < 0:
        raise ValueError("tau_min must be nonnegative")
    model = model or DcModel(net, params)
    prog = model.base_program(expansion)
    nv = model.n_vars
    rows = _throughput_rows(model, expansion, nv, tau_offset=2.0 * tau_min)
    prog.lse_constraints.extend(rows)
    A = np.zeros((model.n_cells, nv))
    A[np.arange(model.n_cells), model.idx_P] = 1.0
    prog.obj_lse = [(1.0, LseFunction(np.ones(model.n_cells), A))]
    if start_alloc is None:
        start_alloc = model.decode(np.concatenate([expansion.x_bar,
                                                   expansion.alpha_bar]))
    y0 = model.feasible_start(start_alloc)
    return GpSubproblem(prog, y0, model.decode, expansion, "p3_dc")
