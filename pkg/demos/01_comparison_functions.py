"""Comparison functions and the coefficient measure.

The generalized sine s_k solves u'' + k u = 0 for every sign of k.  The
coefficient measure J_N carries the time cost of comparing heat
distributions at different times; its interval masses and the
exp-weighted contraction coefficient have closed forms that we check
against quadrature here.
"""

import numpy as np
from scipy.integrate import quad

from ctlab import (
    CurvatureDimension,
    coeff_A,
    comp_c,
    comp_s,
    j_measure,
    psi,
    psi_upper_bound,
)

print("generalized trig across curvatures (u = 1):")
for kappa in (1.0, 0.25, 0.0, -1.0):
    print(f"  kappa={kappa:+.2f}: s={comp_s(kappa, 1.0):.6f}  c={comp_c(kappa, 1.0):.6f}")

print("\ncoefficient measure J_N([s, t]) vs quadrature:")
for K in (1.0, 0.0, -1.0):
    cd = CurvatureDimension(K, 2.0)
    closed = j_measure(cd, 0.1, 0.5)
    if K == 0:
        dens = lambda r: np.sqrt(2.0 / (2.0 * r))
    else:
        dens = lambda r: np.sqrt(2.0 * K / (np.exp(2 * K * r) - 1.0))
    numeric = quad(dens, 0.1, 0.5, epsabs=1e-12)[0]
    print(f"  K={K:+.1f}: closed={closed:.12f}  quadrature={numeric:.12f}")

print("\ncontraction coefficient A(s, t) and its single-time limit:")
cd = CurvatureDimension(1.0, 2.0)
for gap in (0.4, 0.1, 0.01, 1e-6):
    print(f"  A({0.5 - gap:.6f}, 0.5) = {coeff_A(cd, 0.5 - gap, 0.5):.8f}"
          f"   (e^-K t = {np.exp(-0.5):.8f})")

print("\nindex-form bound: psi stays below its two-branch elementary bound")
rng = np.random.default_rng(0)
worst = np.inf
for _ in range(2000):
    t1, t2 = rng.uniform(0.1, 2.0, size=2)
    K = rng.uniform(-2.0, 2.0)
    N = rng.uniform(1.5, 8.0)
    cd = CurvatureDimension(K, N)
    rmax = np.pi / np.sqrt(cd.k_star) if cd.k_star > 0 else 4.0
    r = rng.uniform(0.01, 0.99) * rmax
    worst = min(worst, psi_upper_bound(t1, t2, cd, r) - psi(t1, t2, cd, r))
print(f"  min(bound - psi) over 2000 draws: {worst:.3e}  (>= 0 expected)")
