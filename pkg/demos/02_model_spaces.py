"""Closed-form geometry on the model spaces.

Exponential and logarithm maps, parallel transport, and the reported
curvature-dimension parameters of each backend.
"""

import numpy as np

from ctlab import Euclidean, EuclideanOU, Hyperbolic, Sphere

for space in (Euclidean(2), EuclideanOU(2, 1.5), Sphere(2), Hyperbolic(2)):
    cd = space.cd
    print(f"{space!r}: K={cd.K:+.3f}  N={cd.N}")

print("\nround trip on the sphere:")
sphere = Sphere(2)
x = np.array([0.0, 0.0, 1.0])
y = sphere.exp_map(x, np.array([0.9, 0.4, 0.0]))
v = sphere.log_map(x, y)
print(f"  d(x, y)             = {sphere.distance(x, y):.12f}")
print(f"  |log_x(y)|          = {np.linalg.norm(v):.12f}")
print(f"  d(exp_x(log_x y), y) = {sphere.distance(sphere.exp_map(x, v), y):.2e}")

print("\nparallel transport is an isometry (hyperbolic plane):")
hyp = Hyperbolic(2)
a = hyp.origin()
b = hyp.exp_map(a, np.array([0.0, 1.0, 0.5]))
w = hyp.project_tangent(a, np.array([0.0, -0.3, 0.8]))


def mink_norm(u):
    return np.sqrt(np.sum(u[1:] ** 2) - u[0] ** 2)


tw = hyp.parallel_transport(a, b, w)
print(f"  |w| before = {mink_norm(w):.12f}   after = {mink_norm(tw):.12f}")

print("\nmidpoint consistency across a geodesic:")
mid = sphere.geodesic_point(x, y, 0.5)
print(f"  d(x, mid) = {sphere.distance(x, mid):.12f}"
      f"   d(mid, y) = {sphere.distance(mid, y):.12f}")

print("\nthe strict diameter condition of the comparison control:")
native = sphere.cd
print(f"  native (K, N): satisfied? {sphere.swc_diameter_ok(native)}")
from ctlab import CurvatureDimension

lowered = CurvatureDimension(0.9 * native.K, native.N)
print(f"  lowered K' = 0.9 K:      satisfied? {sphere.swc_diameter_ok(lowered)}")
