"""Coupled geodesic random walks.

A walk with discretization parameter k takes k^2 steps per unit of
(rescaled) time.  Each step draws one sample zeta uniform on the unit
ball of R^m, lifts it to the tangent space through the running
orthonormal frame as zeta_tilde = sqrt(2(m+2)) * Phi zeta, and moves

    x <- exp_x( sqrt(tau)/k * zeta_tilde + tau/k^2 * Z(x) ).

The coupled variant drives the second walker with the parallel
transport of the first walker's noise along the connecting minimal
geodesic (identity transport when the pair sits on the diagonal), each
component with its own time scale tau_i.  The frame is transported
along the first walker's step, which realizes a horizontal lift of the
driving noise.

Reproducibility: trajectory j draws from its own counter-based Philox
stream keyed by (seed, j), so results are bit-identical for any chunk
size or degree of parallelism; aggregation happens in trajectory order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import ModelSpace

__all__ = [
    "WalkConfig",
    "CoupledState",
    "CoupledWalkPath",
    "SingleWalkResult",
    "trajectory_rng",
    "sample_unit_ball",
    "step_coupled",
    "run_coupled",
    "run_single",
    "write_path_csv",
]

_CHUNK = 1024
_DIAGONAL_TOL = 1e-12


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """The counter-based stream for one trajectory: Philox keyed by (seed, index)."""
    key = (int(seed) & 0xFFFFFFFFFFFFFFFF) << 64 | (int(index) & 0xFFFFFFFFFFFFFFFF)
    return np.random.Generator(np.random.Philox(key=key))


def sample_unit_ball(m: int, rng: np.random.Generator, size: int | None = None):
    """Uniform samples from the closed unit ball of R^m.

    Direction from a normalized Gaussian, radius as U^(1/m); the
    coordinate covariance is I/(m+2).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n = 1 if size is None else size
    g = rng.standard_normal((n, m))
    norm = np.linalg.norm(g, axis=-1, keepdims=True)
    norm[norm == 0.0] = 1.0
    radii = rng.random((n, 1)) ** (1.0 / m)
    out = g / norm * radii
    return out[0] if size is None else out


@dataclass(frozen=True)
class WalkConfig:
    """Sampling plan for a walk run."""

    k: int = 20
    n_trajectories: int = 1000
    seed: int = 0
    horizon: float = 1.0
    retain_every: Optional[int] = None  # keep every j-th step (plus endpoints)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be >= 1")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")

    @property
    def n_steps(self) -> int:
        return max(1, round(self.k**2 * self.horizon))


@dataclass
class CoupledState:
    """Positions of the two walkers plus the running frame at the first."""

    x1: np.ndarray
    x2: np.ndarray
    frame1: np.ndarray


@dataclass
class Snapshot:
    step: int
    t: float
    x1: np.ndarray
    x2: np.ndarray


@dataclass
class CoupledWalkPath:
    """Trajectory bundle of a coupled run (replayable from the seed)."""

    tau1: float
    tau2: float
    config: WalkConfig
    terminal: CoupledState
    snapshots: list = field(default_factory=list)
    near_cut_events: int = 0

    @property
    def terminal_distances(self):
        return self._distances

    def set_distances(self, d):
        self._distances = d


@dataclass
class SingleWalkResult:
    tau: float
    config: WalkConfig
    terminal: np.ndarray
    snapshots: list = field(default_factory=list)


def _default_frame(space: ModelSpace, x: np.ndarray) -> np.ndarray:
    return space.frame(x)


def _lift(frame: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Map ball coordinates (n, m) through frames (n, m, emb) to tangent vectors."""
    m = zeta.shape[-1]
    scale = math.sqrt(2.0 * (m + 2))
    return scale * np.einsum("...i,...ie->...e", zeta, frame)


def _step_coupled_arrays(space, x1, x2, frame1, zeta, tau1, tau2, k):
    """One update of the coupled chain on batched state arrays."""
    zt1 = _lift(frame1, zeta)
    diag = space.distance(x1, x2) < _DIAGONAL_TOL
    zt2 = space.parallel_transport(x1, x2, zt1)
    if np.any(diag):
        zt2 = np.where(diag[..., None], zt1, zt2)
    inv_k = 1.0 / k
    inv_k2 = inv_k * inv_k
    v1 = math.sqrt(tau1) * inv_k * zt1 + tau1 * inv_k2 * space.drift(x1)
    v2 = math.sqrt(tau2) * inv_k * zt2 + tau2 * inv_k2 * space.drift(x2)
    v1 = space.project_tangent(x1, v1)
    v2 = space.project_tangent(x2, v2)
    new_x1 = space.exp_map(x1, v1)
    new_x2 = space.exp_map(x2, v2)
    new_frame = space.transport_frame(x1, new_x1, frame1)
    return new_x1, new_x2, new_frame


def step_coupled(space: ModelSpace, state: CoupledState, tau1: float, tau2: float,
                 k: int, rng: np.random.Generator) -> CoupledState:
    """One step of the coupled walk from a single state."""
    zeta = sample_unit_ball(space.dim, rng)
    x1, x2, fr = _step_coupled_arrays(
        space, state.x1, state.x2, state.frame1, zeta, tau1, tau2, k)
    return CoupledState(x1=x1, x2=x2, frame1=fr)


def _chunks(n: int, size: int = _CHUNK):
    for lo in range(0, n, size):
        yield lo, min(lo + size, n)


def _draw_chunk_noise(seed, lo, hi, n_steps, m):
    """Ball samples for trajectories lo..hi-1, shape (hi-lo, n_steps, m)."""
    out = np.empty((hi - lo, n_steps, m))
    for j in range(lo, hi):
        rng = trajectory_rng(seed, j)
        out[j - lo] = sample_unit_ball(m, rng, size=n_steps)
    return out


def run_coupled(space: ModelSpace, x, y, tau1: float, tau2: float,
                cfg: WalkConfig,
                initial_frame: Callable[[ModelSpace, np.ndarray], np.ndarray] | None = None,
                ) -> CoupledWalkPath:
    """Run cfg.n_trajectories independent coupled walks from (x, y).

    The terminal pair approximates a coupling of the heat distributions
    at times tau1 (from x) and tau2 (from y).
    """
    if tau1 < 0 or tau2 < 0:
        raise ValueError("time scales must be nonnegative")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    space.check_point(x)
    space.check_point(y)
    n, steps, m = cfg.n_trajectories, cfg.n_steps, space.dim
    frame_fn = initial_frame or _default_frame

    term_x1 = np.empty((n, space.emb_dim))
    term_x2 = np.empty((n, space.emb_dim))
    term_frame = np.empty((n, m, space.emb_dim))
    retained: dict[int, list] = {}
    near_cut = 0

    retain_steps = []
    if cfg.retain_every is not None:
        retain_steps = sorted({0, steps, *range(0, steps + 1, cfg.retain_every)})

    for lo, hi in _chunks(n):
        c = hi - lo
        noise = _draw_chunk_noise(cfg.seed, lo, hi, steps, m)
        x1 = np.broadcast_to(x, (c, space.emb_dim)).copy()
        x2 = np.broadcast_to(y, (c, space.emb_dim)).copy()
        fr = frame_fn(space, x1)
        if 0 in retain_steps:
            retained.setdefault(0, []).append((x1.copy(), x2.copy()))
        for step in range(steps):
            near_cut += int(np.count_nonzero(space.is_near_cut(x1, x2)))
            x1, x2, fr = _step_coupled_arrays(
                space, x1, x2, fr, noise[:, step, :], tau1, tau2, cfg.k)
            if (step + 1) in retain_steps:
                retained.setdefault(step + 1, []).append((x1.copy(), x2.copy()))
        term_x1[lo:hi] = x1
        term_x2[lo:hi] = x2
        term_frame[lo:hi] = fr

    snapshots = []
    dt = cfg.horizon / steps
    for step in retain_steps:
        parts = retained.get(step, [])
        x1s = np.concatenate([p[0] for p in parts], axis=0)
        x2s = np.concatenate([p[1] for p in parts], axis=0)
        snapshots.append(Snapshot(step=step, t=step * dt, x1=x1s, x2=x2s))

    path = CoupledWalkPath(
        tau1=tau1, tau2=tau2, config=cfg,
        terminal=CoupledState(x1=term_x1, x2=term_x2, frame1=term_frame),
        snapshots=snapshots, near_cut_events=near_cut)
    path.set_distances(space.distance(term_x1, term_x2))
    return path


def run_single(space: ModelSpace, x, tau: float, cfg: WalkConfig,
               initial_frame=None) -> SingleWalkResult:
    """Independent single walks from x (or per-trajectory rows of x)."""
    if tau < 0:
        raise ValueError("time scale must be nonnegative")
    x = np.asarray(x, dtype=float)
    space.check_point(x)
    n, steps, m = cfg.n_trajectories, cfg.n_steps, space.dim
    per_traj_starts = x.ndim == 2
    if per_traj_starts and x.shape[0] != n:
        raise ValueError("per-trajectory starts must match n_trajectories")
    frame_fn = initial_frame or _default_frame

    terminal = np.empty((n, space.emb_dim))
    retain_steps = []
    if cfg.retain_every is not None:
        retain_steps = sorted({0, steps, *range(0, steps + 1, cfg.retain_every)})
    retained: dict[int, list] = {}

    for lo, hi in _chunks(n):
        c = hi - lo
        noise = _draw_chunk_noise(cfg.seed, lo, hi, steps, m)
        pos = x[lo:hi].copy() if per_traj_starts else np.broadcast_to(x, (c, space.emb_dim)).copy()
        fr = frame_fn(space, pos)
        if 0 in retain_steps:
            retained.setdefault(0, []).append(pos.copy())
        inv_k = 1.0 / cfg.k
        inv_k2 = inv_k * inv_k
        for step in range(steps):
            zt = _lift(fr, noise[:, step, :])
            v = math.sqrt(tau) * inv_k * zt + tau * inv_k2 * space.drift(pos)
            v = space.project_tangent(pos, v)
            new_pos = space.exp_map(pos, v)
            fr = space.transport_frame(pos, new_pos, fr)
            pos = new_pos
            if (step + 1) in retain_steps:
                retained.setdefault(step + 1, []).append(pos.copy())
        terminal[lo:hi] = pos

    snapshots = []
    dt = cfg.horizon / steps
    for step in retain_steps:
        parts = retained.get(step, [])
        snapshots.append(Snapshot(step=step, t=step * dt,
                                  x1=np.concatenate(parts, axis=0), x2=None))
    return SingleWalkResult(tau=tau, config=cfg, terminal=terminal, snapshots=snapshots)


def write_path_csv(path: CoupledWalkPath, space: ModelSpace, fh) -> None:
    """One row per retained step and trajectory:
    trajectory_id, step, t, x1 coords, x2 coords, distance."""
    emb = space.emb_dim
    cols = (["trajectory_id", "step", "t"]
            + [f"x1_{i}" for i in range(emb)]
            + [f"x2_{i}" for i in range(emb)]
            + ["distance"])
    fh.write(",".join(cols) + "\n")
    for snap in path.snapshots:
        d = space.distance(snap.x1, snap.x2)
        for j in range(snap.x1.shape[0]):
            row = [str(j), str(snap.step), f"{snap.t:.12g}"]
            row += [f"{v:.17g}" for v in snap.x1[j]]
            row += [f"{v:.17g}" for v in snap.x2[j]]
            row.append(f"{d[j]:.17g}")
            fh.write(",".join(row) + "\n")
