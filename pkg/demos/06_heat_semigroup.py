"""Heat semigroup backends.

Spectral backends give deterministic values (Fourier on circles,
Legendre for zonal fields on 2-spheres, Gauss-Hermite on flat space,
the Gaussian transition kernel under linear drift); the Monte Carlo
backend reuses the geodesic walk and must agree within its noise.
"""

import math

import numpy as np

from ctlab import (
    EuclideanOU,
    MonteCarlo,
    Sphere,
    WalkConfig,
    default_backend,
    generator_heat,
    grad_heat,
    heat_apply,
)

sphere = Sphere(2)
be = default_backend(sphere)
cos_theta = lambda p: p[..., 2]
theta = math.pi / 3
x = np.array([0.0, math.sin(theta), math.cos(theta)])

print("zonal mode on the unit sphere (eigenvalue -2):")
for t in (0.1, 0.5, 1.0):
    hv = heat_apply(sphere, be, cos_theta, t, x)
    print(f"  t={t:3.1f}: P_t cos = {hv.value:+.8f}"
          f"   oracle {math.exp(-2 * t) * math.cos(theta):+.8f}")

gv = grad_heat(sphere, be, cos_theta, 0.5, x)
lv = generator_heat(sphere, be, cos_theta, 0.5, x)
print(f"gradient  |grad P_t f| = {gv.value:.8f}"
      f"   oracle {math.exp(-1.0) * math.sin(theta):.8f}")
print(f"generator  L P_t f     = {lv.value:+.8f}"
      f"   oracle {-2 * math.exp(-1.0) * math.cos(theta):+.8f}")

mc = MonteCarlo(WalkConfig(k=15, n_trajectories=3000, seed=5))
hv = heat_apply(sphere, mc, cos_theta, 0.5, x)
print(f"Monte Carlo            = {hv.value:+.6f} +- {hv.stderr:.6f}")

print("\nlinear drift (rate 1): the transition kernel is Gaussian")
ou = EuclideanOU(1, 1.0)
oube = default_backend(ou)
f = lambda p: np.sin(p[..., 0])
t = 0.4
hv = heat_apply(ou, oube, f, t, np.array([0.7]))
oracle = math.sin(math.exp(-t) * 0.7) * math.exp(-(1 - math.exp(-2 * t)) / 2)
print(f"  P_t sin(0.7) = {hv.value:.10f}   closed form {oracle:.10f}")
