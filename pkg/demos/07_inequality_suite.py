"""The verification harness end to end.

Builds a small suite of inequality checks - deterministic gradient
estimates, the Laplacian comparison, a Monte Carlo moment contraction -
runs it, and prints the report table.  The same thing is available from
the command line as `ctl verify --config <file>`.
"""

import numpy as np

from ctlab import CheckSpec, CurvatureDimension, Euclidean, Sphere, run_suite

sphere = Sphere(2)
north = np.array([0.0, 0.0, 1.0])
away = sphere.exp_map(north, np.array([1.0, 0.0, 0.0]))

specs = [
    CheckSpec(check_id="bl0", space=sphere, t=0.5, f="cos_theta"),
    CheckSpec(check_id="laplacian_comparison", space=sphere, x=north, y=away),
    CheckSpec(check_id="gamma2", space=sphere, f="cos_theta", delta=0.1),
    CheckSpec(check_id="prectl", space=sphere, cd=CurvatureDimension(0.9, 2.0),
              x=north, y=away, tau1=0.2, tau2=0.4,
              n_trajectories=1500, k=15, seed=7),
    CheckSpec(check_id="w2_control", space=Euclidean(2), x=np.zeros(2),
              y=np.array([1.0, 0.0]), s=0.25, t=1.0,
              n_trajectories=1500, k=15, block_size=300, seed=7),
    # deliberate violation: inflated curvature must fail
    CheckSpec(check_id="bl0", space=sphere, t=0.5, f="cos_theta",
              cd=CurvatureDimension(2.0, 2.0)),
]

reports = run_suite(specs, jobs=2)

print(f"{'check':<22} {'space':<16} {'lhs':>10} {'rhs':>10} "
      f"{'sigma':>9} {'margin':>10}  verdict")
for rep in reports:
    print(f"{rep.check_id:<22} {rep.space:<16} {rep.lhs:>10.4f} {rep.rhs:>10.4f} "
          f"{rep.sigma:>9.2e} {rep.margin:>+10.4f}  {rep.verdict.upper()}")

n_fail = sum(r.verdict == "fail" for r in reports)
print(f"\n{len(reports)} checks, {n_fail} failed "
      "(the inflated-curvature control is supposed to fail)")
