"""Heat semigroup evaluation on the model spaces.

The generator is Laplacian + drift throughout, so the Euclidean kernel
at time t has covariance 2tI.  Deterministic backends:

* GaussHermite      - Euclidean, tensor Gauss-Hermite quadrature
* OUMehler          - linear-drift space, the Gaussian transition kernel
  with mean e^{-lam t} x and per-coordinate variance (1-e^{-2 lam t})/lam
* CircleFourier     - circles (1-spheres), Fourier multiplier e^{-(k/rho)^2 t}
* SphereZonal       - zonal functions on 2-spheres, Legendre multiplier
  e^{-l(l+1) t / rho^2}

plus a MonteCarlo backend that reuses the geodesic walk.  Gradients are
geodesic central differences combined over an orthonormal frame;
generator values are central differences in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss

from .geometry import Euclidean, EuclideanOU, ModelSpace, Sphere
from .transport import EmpiricalMeasure
from .walk import WalkConfig, run_single

__all__ = [
    "HeatValue",
    "HeatBackend",
    "GaussHermite",
    "OUMehler",
    "CircleFourier",
    "SphereZonal",
    "MonteCarlo",
    "default_backend",
    "heat_apply",
    "grad_heat",
    "generator_heat",
    "heat_sample",
]


@dataclass(frozen=True)
class HeatValue:
    value: float
    stderr: float = 0.0

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")


class BackendMismatch(TypeError):
    """Backend applied to a space it does not model."""


class HeatBackend:
    deterministic = True

    def applies_to(self, space: ModelSpace) -> bool:  # pragma: no cover
        raise NotImplementedError

    def apply(self, space, f, t, x) -> HeatValue:  # pragma: no cover
        raise NotImplementedError


class GaussHermite(HeatBackend):
    """P_t f(x) = E f(x + sqrt(2t) G) by tensor Gauss-Hermite quadrature."""

    def __init__(self, nodes: int = 64):
        if nodes < 8:
            raise ValueError("need at least 8 nodes")
        self.nodes = nodes
        self._z, self._w = hermgauss(nodes)

    def applies_to(self, space):
        return isinstance(space, Euclidean) and not isinstance(space, EuclideanOU) \
            and space.dim <= 2

    def apply(self, space, f, t, x):
        if not self.applies_to(space):
            raise BackendMismatch("GaussHermite needs a drift-free Euclidean space, m <= 2")
        x = np.asarray(x, dtype=float)
        if t == 0:
            return HeatValue(float(f(x)))
        m = space.dim
        if m == 1:
            pts = x[None, :] + 2.0 * math.sqrt(t) * self._z[:, None]
            vals = np.asarray(f(pts), dtype=float)
            return HeatValue(float(vals @ self._w / math.sqrt(math.pi)))
        Z1, Z2 = np.meshgrid(self._z, self._z, indexing="ij")
        W = np.outer(self._w, self._w).ravel()
        offs = np.stack([Z1.ravel(), Z2.ravel()], axis=-1)
        pts = x[None, :] + 2.0 * math.sqrt(t) * offs
        vals = np.asarray(f(pts), dtype=float)
        return HeatValue(float(vals @ W / math.pi))


class OUMehler(HeatBackend):
    """Gaussian transition kernel of the linear-drift generator."""

    def __init__(self, nodes: int = 64):
        if nodes < 8:
            raise ValueError("need at least 8 nodes")
        self.nodes = nodes
        self._z, self._w = hermgauss(nodes)

    def applies_to(self, space):
        return isinstance(space, EuclideanOU) and space.dim <= 2

    def apply(self, space, f, t, x):
        if not self.applies_to(space):
            raise BackendMismatch("OUMehler needs a linear-drift space, m <= 2")
        x = np.asarray(x, dtype=float)
        if t == 0:
            return HeatValue(float(f(x)))
        lam = space.lam
        mean = math.exp(-lam * t) * x
        var = -math.expm1(-2.0 * lam * t) / lam  # (1 - e^{-2 lam t}) / lam
        sd = math.sqrt(var)
        m = space.dim
        if m == 1:
            pts = mean[None, :] + math.sqrt(2.0) * sd * self._z[:, None]
            vals = np.asarray(f(pts), dtype=float)
            return HeatValue(float(vals @ self._w / math.sqrt(math.pi)))
        Z1, Z2 = np.meshgrid(self._z, self._z, indexing="ij")
        W = np.outer(self._w, self._w).ravel()
        offs = np.stack([Z1.ravel(), Z2.ravel()], axis=-1)
        pts = mean[None, :] + math.sqrt(2.0) * sd * offs
        vals = np.asarray(f(pts), dtype=float)
        return HeatValue(float(vals @ W / math.pi))


class CircleFourier(HeatBackend):
    """Fourier-multiplier semigroup on a circle of radius rho."""

    def __init__(self, n_modes: int = 64):
        if n_modes < 8:
            raise ValueError("need at least 8 modes")
        self.n_modes = n_modes

    def applies_to(self, space):
        return isinstance(space, Sphere) and space.dim == 1

    def _embed(self, space, theta):
        return space.radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)

    def apply(self, space, f, t, x):
        if not self.applies_to(space):
            raise BackendMismatch("CircleFourier needs a 1-sphere")
        x = np.asarray(x, dtype=float)
        if t == 0:
            return HeatValue(float(f(x)))
        n = 2 * self.n_modes
        theta = 2.0 * math.pi * np.arange(n) / n
        vals = np.asarray(f(self._embed(space, theta)), dtype=float)
        coeff = np.fft.rfft(vals) / n
        ks = np.arange(coeff.size)
        decay = np.exp(-((ks / space.radius) ** 2) * t)
        theta0 = math.atan2(x[1], x[0])
        phases = np.exp(1j * ks * theta0)
        val = coeff[0].real * decay[0] + 2.0 * np.sum(
            (coeff[1:] * phases[1:]).real * decay[1:])
        return HeatValue(float(val))


class SphereZonal(HeatBackend):
    """Legendre-multiplier semigroup for zonal functions on a 2-sphere.

    The input f must be rotationally symmetric about `axis`; it is read
    off along a meridian and expanded in Legendre polynomials with
    Gauss-Legendre quadrature.
    """

    def __init__(self, n_modes: int = 64, axis=(0.0, 0.0, 1.0)):
        if n_modes < 8:
            raise ValueError("need at least 8 modes")
        self.n_modes = n_modes
        axis = np.asarray(axis, dtype=float)
        self.axis = axis / np.linalg.norm(axis)
        self._u, self._w = leggauss(2 * n_modes)

    def applies_to(self, space):
        return isinstance(space, Sphere) and space.dim == 2

    def _meridian_point(self, space, u):
        """A point at polar angle arccos(u) from the axis (deterministic azimuth)."""
        a = self.axis
        # deterministic orthogonal direction: smallest-component axis trick
        helper = np.zeros(3)
        helper[np.argmin(np.abs(a))] = 1.0
        perp = helper - (helper @ a) * a
        perp = perp / np.linalg.norm(perp)
        u = np.asarray(u, dtype=float)[..., None]
        return space.radius * (u * a + np.sqrt(np.maximum(1 - u**2, 0.0)) * perp)

    def _coefficients(self, space, f):
        pts = self._meridian_point(space, self._u)
        vals = np.asarray(f(pts), dtype=float)
        ls = np.arange(self.n_modes)
        # P_l(u) on the quadrature nodes via the recurrence
        P = np.zeros((self.n_modes, self._u.size))
        P[0] = 1.0
        if self.n_modes > 1:
            P[1] = self._u
        for l in range(1, self.n_modes - 1):
            P[l + 1] = ((2 * l + 1) * self._u * P[l] - l * P[l - 1]) / (l + 1)
        coeff = (2 * ls + 1) / 2.0 * (P * (self._w * vals)[None, :]).sum(axis=1)
        return coeff, P

    def apply(self, space, f, t, x):
        if not self.applies_to(space):
            raise BackendMismatch("SphereZonal needs a 2-sphere")
        x = np.asarray(x, dtype=float)
        if t == 0:
            return HeatValue(float(f(x)))
        coeff, _ = self._coefficients(space, f)
        ls = np.arange(self.n_modes)
        decay = np.exp(-ls * (ls + 1) * t / space.radius**2)
        u0 = float(x @ self.axis) / space.radius
        u0 = min(1.0, max(-1.0, u0))
        # evaluate Legendre polynomials at u0
        vals = np.zeros(self.n_modes)
        vals[0] = 1.0
        if self.n_modes > 1:
            vals[1] = u0
        for l in range(1, self.n_modes - 1):
            vals[l + 1] = ((2 * l + 1) * u0 * vals[l] - l * vals[l - 1]) / (l + 1)
        return HeatValue(float(np.sum(coeff * decay * vals)))


class MonteCarlo(HeatBackend):
    """Walk-based backend; works on every model space."""

    deterministic = False

    def __init__(self, cfg: WalkConfig):
        self.cfg = cfg

    def applies_to(self, space):
        return True

    def apply(self, space, f, t, x):
        if t == 0:
            return HeatValue(float(f(np.asarray(x, dtype=float))))
        result = run_single(space, x, t, self.cfg)
        vals = np.asarray(f(result.terminal), dtype=float)
        n = vals.size
        return HeatValue(float(vals.mean()),
                         float(vals.std(ddof=1) / math.sqrt(n)))


def default_backend(space: ModelSpace, n_modes: int = 64) -> HeatBackend:
    """The natural deterministic backend for a space, if one exists."""
    if isinstance(space, EuclideanOU):
        return OUMehler(n_modes)
    if isinstance(space, Euclidean):
        return GaussHermite(n_modes)
    if isinstance(space, Sphere) and space.dim == 1:
        return CircleFourier(n_modes)
    if isinstance(space, Sphere) and space.dim == 2:
        return SphereZonal(n_modes)
    raise BackendMismatch(f"no deterministic backend for {space!r}; use MonteCarlo")


def heat_apply(space: ModelSpace, backend: HeatBackend, f, t: float, x) -> HeatValue:
    """P_t f(x)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if not backend.applies_to(space):
        raise BackendMismatch(f"{type(backend).__name__} does not model {space!r}")
    return backend.apply(space, f, t, x)


def grad_heat(space: ModelSpace, backend: HeatBackend, f, t: float, x,
              h: float = 1e-3) -> HeatValue:
    """|grad P_t f|(x) from central geodesic differences.

    The directional derivative along each vector of an orthonormal
    frame is estimated by a symmetric difference over geodesics, and
    the gradient norm is the Euclidean norm of the components (exact
    for smooth fields up to O(h^2) bias).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    frame = space.frame(x)
    comps = np.empty(space.dim)
    errs = np.empty(space.dim)
    for i in range(space.dim):
        e = frame[..., i, :]
        plus = heat_apply(space, backend, f, t, space.exp_map(x, h * e))
        minus = heat_apply(space, backend, f, t, space.exp_map(x, -h * e))
        comps[i] = (plus.value - minus.value) / (2 * h)
        errs[i] = math.hypot(plus.stderr, minus.stderr) / (2 * h)
    norm = float(np.linalg.norm(comps))
    if norm == 0.0:
        return HeatValue(0.0, float(np.linalg.norm(errs)))
    stderr = float(np.sqrt(np.sum((comps / norm) ** 2 * errs**2)))
    return HeatValue(norm, stderr)


def generator_heat(space: ModelSpace, backend: HeatBackend, f, t: float, x,
                   dt: float = 1e-4) -> HeatValue:
    """(Laplacian + drift) P_t f(x) as the symmetric time difference."""
    if not 0 < dt < t:
        raise ValueError("need 0 < dt < t")
    plus = heat_apply(space, backend, f, t + dt, x)
    minus = heat_apply(space, backend, f, t - dt, x)
    return HeatValue((plus.value - minus.value) / (2 * dt),
                     math.hypot(plus.stderr, minus.stderr) / (2 * dt))


def heat_sample(space: ModelSpace, t: float, x, n: int, cfg: WalkConfig) -> EmpiricalMeasure:
    """n samples of the heat distribution at time t started at x."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = np.asarray(x, dtype=float)
    if t == 0:
        return EmpiricalMeasure.uniform(np.broadcast_to(x, (n, x.shape[-1])).copy())
    cfg = WalkConfig(k=cfg.k, n_trajectories=n, seed=cfg.seed,
                     horizon=cfg.horizon, retain_every=None)
    result = run_single(space, x, t, cfg)
    return EmpiricalMeasure.uniform(result.terminal)
