"""Network topology generation and random channel realizations.

Produces the per-link effective gains (small-scale power gain times
distance^-beta path loss) that every downstream computation consumes.
All distances are in meters, all gains dimensionless linear.
"""

from dataclasses import dataclass, field

import numpy as np

# Intra-cell BS-relay and relay-user hop used by the square-grid preset,
# 35*sqrt(2) m (relay midway between BS and cell-edge user).
DEFAULT_HOP_M = 35.0 * np.sqrt(2.0)

# Small-scale power gains below this floor make log-domain solvers blow up;
# such draws are resampled.
MIN_POWER_GAIN = 1e-30


class ConfigurationError(ValueError):
    """Raised for unsupported or inconsistent scenario settings."""


@dataclass
class TopologySpec:
    """Geometry of an N-cell deployment.

    d_bs_relay[i, j] is the BS i -> relay j distance, d_relay_user[j, k]
    the relay j -> user k distance.
    """

    n_cells: int
    cell_size_m: float
    d_bs_relay: np.ndarray
    d_relay_user: np.ndarray
    beta: float = 3.0

    def __post_init__(self):
        self.d_bs_relay = np.asarray(self.d_bs_relay, dtype=float)
        self.d_relay_user = np.asarray(self.d_relay_user, dtype=float)
        n = self.n_cells
        if self.d_bs_relay.shape != (n, n) or self.d_relay_user.shape != (n, n):
            raise ConfigurationError("distance matrices must be n_cells x n_cells")
        if np.any(self.d_bs_relay <= 0) or np.any(self.d_relay_user <= 0):
            raise ConfigurationError("all link distances must be strictly positive")
        if not self.beta > 0:
            raise ConfigurationError("path-loss exponent beta must be positive")


@dataclass
class FadingSpec:
    """Small-scale fading model: Rician on desired BS->relay links, CN(0,1) elsewhere."""

    rician_k_db: float = 10.0
    seed: int = 0
    cross_fading: str = "cn01"  # unit-variance circularly-symmetric complex Gaussian

    def __post_init__(self):
        if not np.isfinite(self.rician_k_db):
            raise ConfigurationError("rician_k_db must be finite")
        if self.cross_fading != "cn01":
            raise ConfigurationError("only unit-variance complex Gaussian cross fading is supported")


@dataclass
class NetworkInstance:
    """Effective per-link channel gains for one fading draw.

    h_bar[j, i] = |h_{j,i}|^2 d^h_{j,i}^-beta  (BS j -> relay i)
    g_bar[j, i] = |g_{j,i}|^2 d^g_{j,i}^-beta  (relay j -> user i)
    """

    h_bar: np.ndarray
    g_bar: np.ndarray
    topo: TopologySpec
    seed: int = 0

    def __post_init__(self):
        self.h_bar = np.asarray(self.h_bar, dtype=float)
        self.g_bar = np.asarray(self.g_bar, dtype=float)
        for m in (self.h_bar, self.g_bar):
            if not np.all(np.isfinite(m)) or np.any(m <= 0.0):
                raise ValueError("effective gains must be strictly positive and finite")

    @property
    def n_cells(self) -> int:
        return self.topo.n_cells


def _grid_node_positions(n_cells: int, cell_size_m: float, hop_dist_m: float):
    """BS/relay/user coordinates for the square-grid preset.

    Relay sits at the cell center, BS and user at center -/+ hop/sqrt(2)
    along the cell diagonal, so the BS-relay and relay-user hops both
    equal hop_dist_m.  Cells tile a row (n=2) or a 2x2 square (n=4).
    """
    offsets = {
        1: [(0, 0)],
        2: [(0, 0), (1, 0)],
        4: [(0, 0), (1, 0), (0, 1), (1, 1)],
    }
    if n_cells not in offsets:
        raise ConfigurationError(
            f"square-grid preset supports n_cells in {{1, 2, 4}}, got {n_cells}; "
            "use TopologySpec/from_coordinates for general layouts"
        )
    if not hop_dist_m > 0:
        raise ConfigurationError("hop_dist_m must be positive")
    s = hop_dist_m / np.sqrt(2.0)
    if 2 * s > cell_size_m:
        raise ConfigurationError("hop distance does not fit inside the cell")
    c = cell_size_m / 2.0
    bs, relay, user = [], [], []
    for ox, oy in offsets[n_cells]:
        x0, y0 = ox * cell_size_m, oy * cell_size_m
        bs.append((x0 + c - s, y0 + c - s))
        relay.append((x0 + c, y0 + c))
        user.append((x0 + c + s, y0 + c + s))
    return np.array(bs), np.array(relay), np.array(user)


def topology_from_coordinates(bs_xy, relay_xy, user_xy, cell_size_m: float = 0.0,
                              beta: float = 3.0) -> TopologySpec:
    """Build a TopologySpec from explicit node coordinates (general n_cells)."""
    bs_xy = np.atleast_2d(np.asarray(bs_xy, dtype=float))
    relay_xy = np.atleast_2d(np.asarray(relay_xy, dtype=float))
    user_xy = np.atleast_2d(np.asarray(user_xy, dtype=float))
    n = bs_xy.shape[0]
    if relay_xy.shape[0] != n or user_xy.shape[0] != n:
        raise ConfigurationError("coordinate arrays must have one row per cell")
    d_br = np.linalg.norm(bs_xy[:, None, :] - relay_xy[None, :, :], axis=2)
    d_ru = np.linalg.norm(relay_xy[:, None, :] - user_xy[None, :, :], axis=2)
    return TopologySpec(n_cells=n, cell_size_m=cell_size_m,
                        d_bs_relay=d_br, d_relay_user=d_ru, beta=beta)


def build_grid_topology(n_cells: int, cell_size_m: float,
                        hop_dist_m: float = DEFAULT_HOP_M,
                        beta: float = 3.0) -> TopologySpec:
    """Square-grid preset: n_cells in {1, 2, 4}, colinear BS/relay/user per cell."""
    bs, relay, user = _grid_node_positions(n_cells, cell_size_m, hop_dist_m)
    return topology_from_coordinates(bs, relay, user, cell_size_m=cell_size_m, beta=beta)


def draw_channels(topo: TopologySpec, fading: FadingSpec, rng=None):
    """Draw one block-fading realization (h, g) of complex coefficients.

    h[j, i] is BS j -> relay i, g[j, i] relay j -> user i.  Desired links
    h[i, i] are Rician with factor K = 10^(rician_k_db/10), normalized so
    E|h|^2 = 1 (deterministic sqrt(K/(K+1)) plus CN(0, 1/(K+1)) diffuse
    part); every other coefficient is CN(0, 1).
    """
    if rng is None:
        rng = np.random.default_rng(fading.seed)
    n = topo.n_cells

    def cn01(shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

    h = cn01((n, n))
    g = cn01((n, n))
    k_lin = 10.0 ** (fading.rician_k_db / 10.0)
    los = np.sqrt(k_lin / (k_lin + 1.0))
    diffuse = np.sqrt(1.0 / (k_lin + 1.0))
    idx = np.arange(n)
    # reuse the CN(0,1) diagonal draws as the diffuse component
    h[idx, idx] = los + diffuse * h[idx, idx]
    return h, g


def effective_gains(topo: TopologySpec, h: np.ndarray, g: np.ndarray,
                    seed: int = 0) -> NetworkInstance:
    """Combine small-scale gains with distance^-beta path loss."""
    h = np.asarray(h)
    g = np.asarray(g)
    n = topo.n_cells
    if h.shape != (n, n) or g.shape != (n, n):
        raise ConfigurationError("channel matrices must conform to the topology")
    h_bar = np.abs(h) ** 2 * topo.d_bs_relay ** (-topo.beta)
    g_bar = np.abs(g) ** 2 * topo.d_relay_user ** (-topo.beta)
    return NetworkInstance(h_bar=h_bar, g_bar=g_bar, topo=topo, seed=seed)


def generate_instance(topo: TopologySpec, fading: FadingSpec,
                      max_resample: int = 100) -> NetworkInstance:
    """Draw channels and build a NetworkInstance, resampling degenerate draws.

    Draws with any small-scale power gain below MIN_POWER_GAIN (probability
    ~0 but fatal in the log domain) are redrawn from the same stream, so
    the result is still a deterministic function of (topo, fading).
    """
    rng = np.random.default_rng(fading.seed)
    for _ in range(max_resample):
        h, g = draw_channels(topo, fading, rng=rng)
        if min(np.abs(h).min(), np.abs(g).min()) ** 2 >= MIN_POWER_GAIN:
            return effective_gains(topo, h, g, seed=fading.seed)
    raise RuntimeError("could not draw a non-degenerate channel realization")
