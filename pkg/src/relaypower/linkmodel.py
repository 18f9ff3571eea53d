"""Physical-layer quantities: SINR, throughput, harvested energy, relay caps.

Everything is computed in linear watts; dB/dBm conversions happen only at
the I/O boundary (driver).  The AF SINR keeps the literal "+1" in its
denominator: the noise is already normalized into the phi coefficients.
"""

from dataclasses import dataclass, field

import numpy as np

from .netgen import NetworkInstance


@dataclass
class SystemParams:
    """Scenario constants shared by every problem variant."""

    eta: float = 0.5          # energy conversion efficiency
    sigma: float = 7.943282347242789e-17  # noise power (W), -131 dBm
    p_min: float = 0.3981071705534972     # BS min power (W), 26 dBm
    p_max: float = 39.810717055349734     # BS max power (W), 46 dBm
    block_time: float = 1.0   # block duration T (s)
    epsilon: float = 0.5      # DF relay-to-user timeslot fraction, unused for AF

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if not 0.0 < self.p_min <= self.p_max:
            raise ValueError("need 0 < p_min <= p_max")
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")


@dataclass
class Allocation:
    """Decision variables for all N cells: BS powers P, relay powers p,
    power-splitting factors alpha, and the auxiliary t = 1 - alpha."""

    P: np.ndarray
    p: np.ndarray
    alpha: np.ndarray
    t: np.ndarray = None

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        self.alpha = np.asarray(self.alpha, dtype=float)
        if self.t is None:
            self.t = 1.0 - self.alpha
        self.t = np.asarray(self.t, dtype=float)
        n = self.P.shape[0]
        if not (self.p.shape == self.alpha.shape == self.t.shape == (n,)):
            raise ValueError("P, p, alpha, t must share one length")
        if np.any(self.P <= 0) or np.any(self.p <= 0):
            raise ValueError("powers must be strictly positive")
        if np.any(self.alpha <= 0) or np.any(self.alpha >= 1):
            raise ValueError("alpha must lie strictly inside (0, 1)")
        if not np.allclose(self.t + self.alpha, 1.0, rtol=0, atol=1e-12):
            raise ValueError("t + alpha must equal 1 elementwise")

    @property
    def n_cells(self) -> int:
        return self.P.shape[0]

    def copy(self) -> "Allocation":
        return Allocation(self.P.copy(), self.p.copy(), self.alpha.copy(), self.t.copy())


@dataclass
class PhiCoefficients:
    """Normalized channel products of the AF SINR.

    phi1[i, j] = g_bar[i, i] h_bar[j, i] / sigma^2
    phi2[i, j] = h_bar[j, i] / sigma
    phi3[i, j] = g_bar[j, i] / sigma
    phi4[i, j, k] = g_bar[j, i] h_bar[k, i] / sigma^2
    """

    phi1: np.ndarray
    phi2: np.ndarray
    phi3: np.ndarray
    phi4: np.ndarray

    @property
    def n_cells(self) -> int:
        return self.phi1.shape[0]


def phi_coeffs(net: NetworkInstance, sigma: float) -> PhiCoefficients:
    """Precompute the four phi tensors from effective gains and noise power."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    h, g = net.h_bar, net.g_bar
    n = net.n_cells
    g_own = np.diag(g)                      # g_bar[i, i]
    phi1 = g_own[:, None] * h.T / sigma**2  # [i, j] -> g_ii * h_bar[j, i]
    phi2 = h.T / sigma                      # [i, j] -> h_bar[j, i]
    phi3 = g.T / sigma                      # [i, j] -> g_bar[j, i]
    # [i, j, k] -> g_bar[j, i] * h_bar[k, i]
    phi4 = g.T[:, :, None] * h.T[:, None, :] / sigma**2
    assert phi4.shape == (n, n, n)
    return PhiCoefficients(phi1=phi1, phi2=phi2, phi3=phi3, phi4=phi4)


def harvested_energy(alloc: Allocation, net: NetworkInstance,
                     params: SystemParams) -> np.ndarray:
    """Energy (J) harvested per relay over the first half block:
    E_i = eta * alpha_i * (T/2) * sum_j P_j h_bar[j, i]."""
    received = net.h_bar.T @ alloc.P        # sum_j P_j h_bar[j, i]
    return params.eta * alloc.alpha * (params.block_time / 2.0) * received


def relay_cap_af(alloc: Allocation, net: NetworkInstance,
                 params: SystemParams) -> np.ndarray:
    """AF relay transmit-power cap: eta * alpha_i * sum_j P_j h_bar[j, i]."""
    return params.eta * alloc.alpha * (net.h_bar.T @ alloc.P)


def relay_cap_df(alloc: Allocation, net: NetworkInstance,
                 params: SystemParams) -> np.ndarray:
    """DF relay cap: eta * alpha_i * (1-eps)/eps * sum_j P_j h_bar[j, i]."""
    scale = (1.0 - params.epsilon) / params.epsilon
    return params.eta * alloc.alpha * scale * (net.h_bar.T @ alloc.P)


def sinr_af(alloc: Allocation, phi: PhiCoefficients) -> np.ndarray:
    """End-to-end AF SINR per user.

    gamma_i = phi1[i,i] P_i p_i t_i /
              ( sum_{j!=i} phi1[i,j] P_j p_i t_i
                + sum_j (phi2[i,j] P_j t_i + phi3[i,j] p_j)
                + sum_{j!=i} sum_k phi4[i,j,k] P_k p_j t_i + 1 )
    """
    P, p, t = alloc.P, alloc.p, alloc.t
    n = phi.n_cells
    off = 1.0 - np.eye(n)
    num = np.diag(phi.phi1) * P * p * t
    d1 = (phi.phi1 * off) @ P * p * t
    d2 = (phi.phi2 @ P) * t + phi.phi3 @ p
    # sum over j != i and all k of phi4[i,j,k] P_k p_j, times t_i
    d4 = np.einsum("ijk,k,j->i", phi.phi4, P, p) - np.einsum("iik,k->i", phi.phi4, P) * p
    d4 = d4 * t
    return num / (d1 + d2 + d4 + 1.0)


def throughput_af(alloc: Allocation, phi: PhiCoefficients) -> np.ndarray:
    """Per-cell AF throughput tau_i = 0.5 log2(1 + gamma_i) in bps/Hz."""
    return 0.5 * np.log2(1.0 + sinr_af(alloc, phi))


def sinr_df(alloc: Allocation, net: NetworkInstance, params: SystemParams):
    """DF SINRs at the relay and the user of each cell.

    gamma_R_i = (1-a_i) h_bar[i,i] P_i / ((1-a_i) sum_{j!=i} h_bar[j,i] P_j + sigma)
    gamma_U_i = g_bar[i,i] p_i / (sum_{j!=i} g_bar[j,i] p_j + sigma)
    """
    n = net.n_cells
    off = 1.0 - np.eye(n)
    t = 1.0 - alloc.alpha
    h_own = np.diag(net.h_bar)
    g_own = np.diag(net.g_bar)
    interf_r = (net.h_bar.T * off) @ alloc.P   # sum_{j!=i} h_bar[j,i] P_j
    interf_u = (net.g_bar.T * off) @ alloc.p
    gamma_r = t * h_own * alloc.P / (t * interf_r + params.sigma)
    gamma_u = g_own * alloc.p / (interf_u + params.sigma)
    return gamma_r, gamma_u


def throughput_df(alloc: Allocation, net: NetworkInstance,
                  params: SystemParams) -> np.ndarray:
    """Per-cell DF throughput eps * log2(1 + min(gamma_R, gamma_U))."""
    gamma_r, gamma_u = sinr_df(alloc, net, params)
    return params.epsilon * np.log2(1.0 + np.minimum(gamma_r, gamma_u))


@dataclass
class FeasibilityReport:
    """Per-constraint relative violations of an allocation; feasible iff
    the largest one does not exceed tol."""

    residuals: dict
    max_violation: float
    tol: float

    @property
    def feasible(self) -> bool:
        return self.max_violation <= self.tol


def check_feasibility(alloc: Allocation, net: NetworkInstance,
                      params: SystemParams, mode: str = "af",
                      tol: float = 1e-9) -> FeasibilityReport:
    """Exact residuals of the alpha-range, BS-power and relay-cap constraints.

    Residuals are relative (normalized by the bound) so tol is scale-free.
    """
    if alloc.n_cells != net.n_cells:
        raise ValueError("allocation and network dimensions differ")
    if mode == "af":
        cap = relay_cap_af(alloc, net, params)
    elif mode == "df":
        cap = relay_cap_df(alloc, net, params)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    res = {
        "alpha_low": float(np.max(-alloc.alpha)),
        "alpha_high": float(np.max(alloc.alpha - 1.0)),
        "p_bs_low": float(np.max((params.p_min - alloc.P) / params.p_min)),
        "p_bs_high": float(np.max((alloc.P - params.p_max) / params.p_max)),
        "relay_cap": float(np.max((alloc.p - cap) / cap)),
        "t_consistency": float(np.max(np.abs(alloc.t + alloc.alpha - 1.0))),
    }
    worst = max(max(v, 0.0) for v in res.values())
    return FeasibilityReport(residuals=res, max_violation=worst, tol=tol)
