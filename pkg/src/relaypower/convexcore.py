"""Canonical convex-program form and an embedded barrier interior-point solver.

Every subproblem in this package compiles to an LseProgram: an affine
objective plus weighted log-sum-exp functions, inequality constraints that
are either log-sum-exp (<= 0) or affine (a.y <= b), and per-variable box
bounds.  The solver is a textbook log-barrier method with Newton centering
and Armijo backtracking; phase I (minimize the worst constraint slack)
finds a strictly feasible start or certifies that none exists.
"""

import enum
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


# ----------------------------------------------------------------------
# posynomials and monomials (the GP building blocks)
# ----------------------------------------------------------------------

@dataclass
class Monomial:
    """coeff * prod_k x_k^expo_k over positive variables."""

    coeff: float
    expo: np.ndarray

    def __post_init__(self):
        self.expo = np.asarray(self.expo, dtype=float)
        if not self.coeff > 0:
            raise ValueError("monomial coefficient must be positive")

    def eval(self, x) -> float:
        return self.coeff * np.prod(np.asarray(x, dtype=float) ** self.expo)

    def __mul__(self, other):
        if isinstance(other, Monomial):
            return Monomial(self.coeff * other.coeff, self.expo + other.expo)
        return Monomial(self.coeff * float(other), self.expo)

    def __pow__(self, e: float) -> "Monomial":
        return Monomial(self.coeff ** e, self.expo * e)

    def to_posynomial(self) -> "Posynomial":
        return Posynomial(np.array([self.coeff]), self.expo[None, :])


class Posynomial:
    """Nonnegative sum of monomials, stored as (coeffs, exponent rows)."""

    def __init__(self, coeffs, expo):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.expo = np.asarray(expo, dtype=float)
        if self.expo.ndim != 2 or self.expo.shape[0] != self.coeffs.shape[0]:
            raise ValueError("exponent matrix must have one row per term")
        if np.any(self.coeffs <= 0):
            raise ValueError("posynomial coefficients must be positive")

    @classmethod
    def zero_like(cls, n_vars: int) -> "Posynomial":
        # empty sum; only valid as an accumulator seed
        return cls(np.zeros((0,)), np.zeros((0, n_vars)))

    @classmethod
    def constant(cls, value: float, n_vars: int) -> "Posynomial":
        return cls(np.array([value]), np.zeros((1, n_vars)))

    @property
    def n_terms(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_vars(self) -> int:
        return self.expo.shape[1]

    def eval(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.sum(self.coeffs * np.prod(x[None, :] ** self.expo, axis=1)))

    def eval_terms(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.coeffs * np.prod(x[None, :] ** self.expo, axis=1)

    def __add__(self, other):
        if isinstance(other, Monomial):
            other = other.to_posynomial()
        if isinstance(other, (int, float)):
            other = Posynomial.constant(float(other), self.n_vars)
        return Posynomial(np.concatenate([self.coeffs, other.coeffs]),
                          np.vstack([self.expo, other.expo]))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Posynomial(self.coeffs * float(other), self.expo)
        if isinstance(other, Monomial):
            return Posynomial(self.coeffs * other.coeff, self.expo + other.expo[None, :])
        # full product: expand term by term
        ka, kb = self.n_terms, other.n_terms
        coeffs = np.repeat(self.coeffs, kb) * np.tile(other.coeffs, ka)
        expo = np.repeat(self.expo, kb, axis=0) + np.tile(other.expo, (ka, 1))
        return Posynomial(coeffs, expo)

    __rmul__ = __mul__

    def div_monomial(self, m: Monomial) -> "Posynomial":
        return Posynomial(self.coeffs / m.coeff, self.expo - m.expo[None, :])

    def substitute(self, mapping: list) -> "Posynomial":
        """Rewrite onto a new variable space.

        mapping[v] describes old variable v in the new space: ("var", j),
        ("const", value), ("mono", Monomial), or ("posy", Posynomial); a
        posynomial replacement requires the variable to appear with
        exponent 0 or 1 (sufficient for this package's models).
        """
        n_new = None
        for kind, payload in mapping:
            if kind == "var":
                continue
            n_new = payload.n_vars if kind in ("mono", "posy") else n_new
        if n_new is None:
            n_new = sum(1 for kind, _ in mapping if kind == "var")
        out_coeffs, out_expo = [], []
        for c, row in zip(self.coeffs, self.expo):
            terms = [(c, np.zeros(n_new))]
            for v, e in enumerate(row):
                if e == 0.0:
                    continue
                kind, payload = mapping[v]
                if kind == "var":
                    for _, ex in terms:
                        ex[payload] += e
                elif kind == "const":
                    terms = [(tc * payload ** e, ex) for tc, ex in terms]
                elif kind == "mono":
                    terms = [(tc * payload.coeff ** e, ex + e * payload.expo)
                             for tc, ex in terms]
                elif kind == "posy":
                    if e != 1.0:
                        raise ValueError("posynomial substitution needs exponent 1")
                    terms = [(tc * pc, ex + pe)
                             for tc, ex in terms
                             for pc, pe in zip(payload.coeffs, payload.expo)]
                else:
                    raise ValueError(f"unknown substitution kind {kind!r}")
            for tc, ex in terms:
                out_coeffs.append(tc)
                out_expo.append(ex)
        return Posynomial(np.array(out_coeffs), np.array(out_expo))


@dataclass
class GpStandardForm:
    """min objective s.t. constraints[k] <= 1, equalities[l] == 1 over x > 0."""

    n_vars: int
    objective: Posynomial
    constraints: list
    equalities: list = field(default_factory=list)


# ----------------------------------------------------------------------
# log-sum-exp functions
# ----------------------------------------------------------------------

@dataclass
class ExpTerm:
    """coeff * exp(exponents . y + offset), coeff > 0."""

    coeff: float
    exponents: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        self.exponents = np.asarray(self.exponents, dtype=float)
        if not self.coeff > 0:
            raise ValueError("ExpTerm coefficient must be positive")


class LseFunction:
    """f(y) = log sum_k coeff_k exp(a_k . y + b_k); convex by construction."""

    def __init__(self, coeffs, exponents, offsets=None):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.A = np.asarray(exponents, dtype=float)
        if offsets is None:
            offsets = np.zeros_like(self.coeffs)
        self.offsets = np.asarray(offsets, dtype=float)
        if self.coeffs.size == 0:
            raise ValueError("LseFunction needs at least one term")
        if np.any(self.coeffs <= 0):
            raise ValueError("LseFunction coefficients must be positive")
        self.b = np.log(self.coeffs) + self.offsets

    @classmethod
    def from_terms(cls, terms: list) -> "LseFunction":
        return cls(np.array([t.coeff for t in terms]),
                   np.vstack([t.exponents for t in terms]),
                   np.array([t.offset for t in terms]))

    @classmethod
    def from_posynomial(cls, posy: Posynomial) -> "LseFunction":
        """log posy(e^y): the log change of variables of the GP machinery."""
        return cls(posy.coeffs, posy.expo)

    @property
    def n_terms(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]

    def _softmax(self, y):
        z = self.A @ np.asarray(y, dtype=float) + self.b
        zmax = z.max()
        e = np.exp(z - zmax)
        s = e.sum()
        return zmax + np.log(s), e / s

    def eval(self, y) -> float:
        val, _ = self._softmax(y)
        return float(val)

    def grad(self, y) -> np.ndarray:
        _, p = self._softmax(y)
        return self.A.T @ p

    def hess(self, y) -> np.ndarray:
        _, p = self._softmax(y)
        g = self.A.T @ p
        return (self.A * p[:, None]).T @ self.A - np.outer(g, g)

    def shifted(self, extra_exponents, extra_offset=0.0) -> "LseFunction":
        """Add an affine expression c.y + d inside the log (folds into terms)."""
        extra = np.asarray(extra_exponents, dtype=float)
        return LseFunction(self.coeffs, self.A + extra[None, :],
                           self.offsets + float(extra_offset))

    def padded(self, n_vars: int) -> "LseFunction":
        """Embed into a wider variable space (new columns get exponent 0)."""
        if n_vars < self.n_vars:
            raise ValueError("cannot shrink an LseFunction")
        A = np.zeros((self.n_terms, n_vars))
        A[:, : self.n_vars] = self.A
        return LseFunction(self.coeffs, A, self.offsets)


# ----------------------------------------------------------------------
# programs and solutions
# ----------------------------------------------------------------------

class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


@dataclass
class LseProgram:
    """min c.y + d + sum_j w_j f_j(y)  s.t.  LSE constraints <= 0, G y <= h, lb <= y <= ub."""

    n_vars: int
    obj_affine: np.ndarray = None
    obj_const: float = 0.0
    obj_lse: list = field(default_factory=list)      # (weight, LseFunction)
    lse_constraints: list = field(default_factory=list)
    affine_G: np.ndarray = None
    affine_h: np.ndarray = None
    lb: np.ndarray = None
    ub: np.ndarray = None

    def __post_init__(self):
        n = self.n_vars
        if self.obj_affine is None:
            self.obj_affine = np.zeros(n)
        self.obj_affine = np.asarray(self.obj_affine, dtype=float)
        if self.affine_G is None:
            self.affine_G = np.zeros((0, n))
            self.affine_h = np.zeros(0)
        self.affine_G = np.atleast_2d(np.asarray(self.affine_G, dtype=float))
        self.affine_h = np.atleast_1d(np.asarray(self.affine_h, dtype=float))
        if self.lb is None:
            self.lb = np.full(n, -np.inf)
        if self.ub is None:
            self.ub = np.full(n, np.inf)
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)

    def add_affine(self, a, b: float):
        """Append one affine inequality a.y <= b."""
        self.affine_G = np.vstack([self.affine_G, np.asarray(a, dtype=float)[None, :]])
        self.affine_h = np.append(self.affine_h, float(b))

    def n_inequalities(self) -> int:
        return (len(self.lse_constraints) + self.affine_G.shape[0]
                + int(np.isfinite(self.lb).sum()) + int(np.isfinite(self.ub).sum()))

    def objective_value(self, y) -> float:
        val = float(self.obj_affine @ y + self.obj_const)
        for w, f in self.obj_lse:
            val += w * f.eval(y)
        return val

    def constraint_values(self, y):
        """All inequality values (should be <= 0 when feasible)."""
        vals = [f.eval(y) for f in self.lse_constraints]
        if self.affine_G.shape[0]:
            vals.extend(self.affine_G @ y - self.affine_h)
        fin_lb = np.isfinite(self.lb)
        fin_ub = np.isfinite(self.ub)
        vals.extend(self.lb[fin_lb] - np.asarray(y)[fin_lb])
        vals.extend(np.asarray(y)[fin_ub] - self.ub[fin_ub])
        return np.asarray(vals, dtype=float)

    def to_json(self) -> str:
        """Debug dump of the compiled program (terms, exponent rows, bounds)."""
        def lse_dict(f):
            return {"coeffs": f.coeffs.tolist(), "exponents": f.A.tolist(),
                    "offsets": f.offsets.tolist()}
        return json.dumps({
            "n_vars": self.n_vars,
            "obj_affine": self.obj_affine.tolist(),
            "obj_const": self.obj_const,
            "obj_lse": [{"weight": w, **lse_dict(f)} for w, f in self.obj_lse],
            "lse_constraints": [lse_dict(f) for f in self.lse_constraints],
            "affine_G": self.affine_G.tolist(),
            "affine_h": self.affine_h.tolist(),
            "lb": [None if not np.isfinite(v) else v for v in self.lb],
            "ub": [None if not np.isfinite(v) else v for v in self.ub],
        })

    @classmethod
    def from_json(cls, text: str) -> "LseProgram":
        d = json.loads(text)
        def lse(e):
            return LseFunction(e["coeffs"], e["exponents"], e["offsets"])
        return cls(
            n_vars=d["n_vars"],
            obj_affine=np.array(d["obj_affine"]),
            obj_const=d["obj_const"],
            obj_lse=[(e["weight"], lse(e)) for e in d["obj_lse"]],
            lse_constraints=[lse(e) for e in d["lse_constraints"]],
            affine_G=np.array(d["affine_G"]).reshape(-1, d["n_vars"]),
            affine_h=np.array(d["affine_h"]),
            lb=np.array([-np.inf if v is None else v for v in d["lb"]]),
            ub=np.array([np.inf if v is None else v for v in d["ub"]]),
        )


@dataclass
class Solution:
    y_star: np.ndarray
    objective_value: float
    kkt_residual: float
    status: SolveStatus
    n_newton_steps: int = 0
    barrier_t: float = 0.0


@dataclass
class SolverOptions:
    tol: float = 1e-8               # target KKT residual / duality gap
    mu: float = 10.0                # barrier multiplier
    armijo_alpha: float = 0.01
    backtrack_beta: float = 0.5
    newton_max_steps: int = 200     # per centering stage
    newton_tol: float = 1e-11       # on the Newton decrement lambda^2 / 2
    max_stages: int = 60
    feas_margin: float = 1e-13      # strictness threshold for a usable start


def gp_to_lse(gp: GpStandardForm, eq_slack: float = 1e-6) -> LseProgram:
    """Compile a standard-form GP to an LseProgram via the log change of variables.

    Single-term (monomial) objectives/constraints become affine; monomial
    equalities become paired affine inequalities, each relaxed by eq_slack
    in the log domain so the barrier method keeps a strict interior.
    """
    n = gp.n_vars
    prog = LseProgram(n_vars=n)
    obj = gp.objective
    if obj.n_terms == 1:
        prog.obj_affine = obj.expo[0].copy()
        prog.obj_const = float(np.log(obj.coeffs[0]))
    else:
        prog.obj_lse = [(1.0, LseFunction.from_posynomial(obj))]
    for posy in gp.constraints:
        if posy.n_terms == 1:
            # log c + a.y <= 0
            prog.add_affine(posy.expo[0], -float(np.log(posy.coeffs[0])))
        else:
            prog.lse_constraints.append(LseFunction.from_posynomial(posy))
    for mono in gp.equalities:
        rhs = -float(np.log(mono.coeff))
        prog.add_affine(mono.expo, rhs + eq_slack)
        prog.add_affine(-mono.expo, -rhs + eq_slack)
    return prog


# ----------------------------------------------------------------------
# the barrier solver
# ----------------------------------------------------------------------

def _stack_lse(funcs, n_vars):
    """Concatenate term arrays of several LseFunctions for batch evaluation."""
    if not funcs:
        return np.zeros((0, n_vars)), np.zeros(0), np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    A = np.vstack([f.A for f in funcs])
    b = np.concatenate([f.b for f in funcs])
    lens = np.array([f.n_terms for f in funcs])
    starts = np.concatenate([[0], np.cumsum(lens)[:-1]]).astype(int)
    rep = np.repeat(np.arange(len(funcs)), lens)
    return A, b, starts, rep


def _batch_softmax(A, b, starts, rep, y):
    """Per-function LSE values and softmax weights over stacked terms."""
    if A.shape[0] == 0:
        return np.zeros(0), np.zeros(0)
    z = A @ y + b
    zmax = np.maximum.reduceat(z, starts)
    e = np.exp(z - zmax[rep])
    s = np.add.reduceat(e, starts)
    vals = zmax + np.log(s)
    return vals, e / s[rep]


class _Compiled:
    """Stacked arrays of one LseProgram plus barrier evaluation routines."""

    def __init__(self, prog: LseProgram):
        n = prog.n_vars
        self.n = n
        self.c = prog.obj_affine
        self.d = prog.obj_const
        self.ow = np.array([w for w, _ in prog.obj_lse])
        self.oA, self.ob, self.ostarts, self.orep = _stack_lse(
            [f for _, f in prog.obj_lse], n)
        self.cA, self.cb, self.cstarts, self.crep = _stack_lse(
            prog.lse_constraints, n)
        self.n_lse = len(prog.lse_constraints)
        # affine rows include the finite box bounds
        G_parts = [prog.affine_G]
        h_parts = [prog.affine_h]
        eye = np.eye(n)
        fin_lb = np.isfinite(prog.lb)
        fin_ub = np.isfinite(prog.ub)
        if fin_lb.any():
            G_parts.append(-eye[fin_lb])
            h_parts.append(-prog.lb[fin_lb])
        if fin_ub.any():
            G_parts.append(eye[fin_ub])
            h_parts.append(prog.ub[fin_ub])
        self.G = np.vstack(G_parts)
        self.h = np.concatenate(h_parts)
        self.m = self.n_lse + self.G.shape[0]

    # -- objective ------------------------------------------------------
    def f0(self, y):
        val = float(self.c @ y + self.d)
        if self.n_lse_obj:
            vals, _ = _batch_softmax(self.oA, self.ob, self.ostarts, self.orep, y)
            val += float(self.ow @ vals)
        return val

    @property
    def n_lse_obj(self):
        return self.ow.shape[0]

    # -- feasibility + barrier value (cheap path for line search) -------
    def barrier_value(self, y, t):
        """(feasible, t*f0 + phi) with phi = -sum log(-f_i)."""
        slack_aff = self.h - self.G @ y
        if np.any(slack_aff <= 0):
            return False, np.inf
        phi = -np.log(slack_aff).sum() if slack_aff.size else 0.0
        f0 = float(self.c @ y + self.d)
        if self.n_lse_obj:
            ovals, _ = _batch_softmax(self.oA, self.ob, self.ostarts, self.orep, y)
            f0 += float(self.ow @ ovals)
        if self.n_lse:
            cvals, _ = _batch_softmax(self.cA, self.cb, self.cstarts, self.crep, y)
            if np.any(cvals >= 0):
                return False, np.inf
            phi -= np.log(-cvals).sum()
        return True, t * f0 + phi

    # -- full value/gradient/Hessian ------------------------------------
    def barrier_full(self, y, t):
        n = self.n
        grad = t * self.c.copy()
        H = np.zeros((n, n))
        val = float(self.c @ y + self.d)
        if self.n_lse_obj:
            ovals, p = _batch_softmax(self.oA, self.ob, self.ostarts, self.orep, y)
            val += float(self.ow @ ovals)
            Gm = np.add.reduceat(self.oA * p[:, None], self.ostarts, axis=0)
            w_rep = self.ow[self.orep]
            grad += t * (Gm.T @ self.ow)
            H += t * ((self.oA * (p * w_rep)[:, None]).T @ self.oA
                      - (Gm * self.ow[:, None]).T @ Gm)
        psi = t * val
        # LSE constraints
        if self.n_lse:
            cvals, p = _batch_softmax(self.cA, self.cb, self.cstarts, self.crep, y)
            if np.any(cvals >= 0):
                return np.inf, grad, H, False
            s = 1.0 / (-cvals)
            psi += -np.log(-cvals).sum()
            Gm = np.add.reduceat(self.cA * p[:, None], self.cstarts, axis=0)
            grad += Gm.T @ s
            H += (self.cA * (p * s[self.crep])[:, None]).T @ self.cA
            H += (Gm * ((s * s - s))[:, None]).T @ Gm
        # affine rows (user rows + boxes)
        slack = self.h - self.G @ y
        if np.any(slack <= 0):
            return np.inf, grad, H, False
        if slack.size:
            psi += -np.log(slack).sum()
            inv = 1.0 / slack
            grad += self.G.T @ inv
            H += (self.G * (inv * inv)[:, None]).T @ self.G
        return psi, grad, H, True


def _newton_center(comp: _Compiled, y, t, opts: SolverOptions, early_stop=None):
    """Minimize t*f0 + phi from a strictly feasible y.

    Returns (y, steps, ok, lam2): lam2/2 is the final Newton decrement, an
    affine-invariant bound on the remaining centering suboptimality."""
    steps = 0
    lam2 = np.inf
    for _ in range(opts.newton_max_steps):
        psi, g, H, ok = comp.barrier_full(y, t)
        if not ok:
            raise RuntimeError("barrier evaluated at an infeasible point")
        try:
            cf = scipy.linalg.cho_factor(H, lower=True, check_finite=False)
            delta = scipy.linalg.cho_solve(cf, -g, check_finite=False)
        except scipy.linalg.LinAlgError:
            ridge = 1e-10 * max(1.0, float(np.trace(H)) / comp.n)
            for _ in range(12):
                try:
                    cf = scipy.linalg.cho_factor(H + ridge * np.eye(comp.n), lower=True,
                                                 check_finite=False)
                    delta = scipy.linalg.cho_solve(cf, -g, check_finite=False)
                    break
                except scipy.linalg.LinAlgError:
                    ridge *= 100.0
            else:
                return y, steps, False, lam2
        lam2 = max(float(-g @ delta), 0.0)
        # scale-aware stop: decreases below the fp resolution of psi are
        # not certifiable by the line search
        decrement_tol = max(opts.newton_tol, 32.0 * np.finfo(float).eps * abs(psi))
        if lam2 / 2.0 <= decrement_tol:
            return y, steps, True, lam2
        gTd = float(g @ delta)
        step = 1.0
        accepted = False
        while step > 1e-18:
            y_new = y + step * delta
            feas, psi_new = comp.barrier_value(y_new, t)
            if feas and psi_new <= psi + opts.armijo_alpha * step * gTd:
                accepted = True
                break
            step *= opts.backtrack_beta
        if not accepted:
            return y, steps, True, lam2  # stalled at numerical precision
        y = y_new
        steps += 1
        if early_stop is not None and early_stop(y):
            return y, steps, True, lam2
    return y, steps, False, lam2


def _strictly_feasible(comp: _Compiled, y, margin):
    if comp.n_lse:
        cvals, _ = _batch_softmax(comp.cA, comp.cb, comp.cstarts, comp.crep, y)
        if np.any(cvals > -margin):
            return False
    slack = comp.h - comp.G @ y
    return not np.any(slack < margin)


def _phase1(prog: LseProgram, y0, opts: SolverOptions):
    """Find a strictly feasible point, or certify the interior is empty.

    Solves min s over (y, s) with every inequality relaxed by s; feasible
    interior exists iff the optimum is negative.
    """
    n = prog.n_vars
    aux = LseProgram(n_vars=n + 1)
    aux.obj_affine = np.zeros(n + 1)
    aux.obj_affine[n] = 1.0
    s_col = np.zeros(n + 1)
    s_col[n] = -1.0
    for f in prog.lse_constraints:
        aux.lse_constraints.append(f.padded(n + 1).shifted(s_col))
    rows = [prog.affine_G]
    rhs = [prog.affine_h]
    eye = np.eye(n)
    fin_lb = np.isfinite(prog.lb)
    fin_ub = np.isfinite(prog.ub)
    if fin_lb.any():
        rows.append(-eye[fin_lb])
        rhs.append(-prog.lb[fin_lb])
    if fin_ub.any():
        rows.append(eye[fin_ub])
        rhs.append(prog.ub[fin_ub])
    G = np.vstack(rows)
    h = np.concatenate(rhs)
    aux.affine_G = np.hstack([G, -np.ones((G.shape[0], 1))])
    aux.affine_h = h
    y0 = np.asarray(y0, dtype=float)
    vals = prog.constraint_values(y0)
    s0 = float(max(vals.max() if vals.size else 0.0, 0.0) + 1.0)
    z0 = np.concatenate([y0, [s0]])
    sol = solve(aux, z0, tol=1e-6,
                options=SolverOptions(tol=1e-6, newton_tol=1e-9),
                _early_stop=lambda z: z[n] <= -1e-6)
    if sol.y_star[n] < 0.0:
        return sol.y_star[:n]
    return None


def solve(prog: LseProgram, y0, tol: float = None, options: SolverOptions = None,
          _early_stop=None) -> Solution:
    """Log-barrier interior-point solve of an LseProgram.

    y0 need not be strictly feasible: phase I runs automatically.  Returns
    OPTIMAL once the duality gap m/t and the scaled stationarity residual
    drop below tol, INFEASIBLE when phase I certifies an empty interior,
    MAX_ITER when the stage budget runs out.
    """
    opts = options or SolverOptions()
    if tol is not None:
        opts = SolverOptions(**{**opts.__dict__, "tol": tol})
    comp = _Compiled(prog)
    y = np.asarray(y0, dtype=float).copy()
    if y.shape != (prog.n_vars,):
        raise ValueError("y0 has the wrong length")

    total_steps = 0
    if comp.m == 0:
        # unconstrained: plain Newton on f0; lam2/2 bounds the suboptimality
        y, steps, ok, lam2 = _newton_center(comp, y, 1.0, opts,
                                            early_stop=_early_stop)
        kkt = lam2 / 2.0
        status = SolveStatus.OPTIMAL if ok and kkt <= max(opts.tol, 1e-9) else SolveStatus.MAX_ITER
        return Solution(y, comp.f0(y), kkt, status, steps, 0.0)

    if not _strictly_feasible(comp, y, opts.feas_margin):
        y_feas = _phase1(prog, y, opts)
        if y_feas is None:
            return Solution(y, np.inf, np.inf, SolveStatus.INFEASIBLE)
        y = y_feas

    t = max(1.0, comp.m / max(1.0, abs(comp.f0(y))))
    converged = False
    lam2 = np.inf
    for _ in range(opts.max_stages):
        is_final = comp.m / t <= 0.5 * opts.tol
        y, steps, ok, lam2 = _newton_center(comp, y, t, opts,
                                            early_stop=_early_stop)
        total_steps += steps
        if _early_stop is not None and _early_stop(y):
            converged = True
            break
        if not ok:
            break
        if is_final:
            converged = True
            break
        t *= opts.mu
    # suboptimality bound: duality gap at a centered point plus the
    # remaining centering error, both in objective units
    kkt = comp.m / t + min(lam2, 1e6) / (2.0 * t)
    status = SolveStatus.OPTIMAL if converged and kkt <= opts.tol * (1 + 1e-9) else SolveStatus.MAX_ITER
    if _early_stop is not None and converged:
        status = SolveStatus.OPTIMAL
    return Solution(y, comp.f0(y), kkt, status, total_steps, t)
