"""Continuation of a symmetric pair of patches in the unit disc.

Starts from the Kirchhoff-Routh critical pair, follows the solution curve
in eps, and prints per step the Newton history, the leading shape
coefficient a_2 / eps, the center drift and the minimal curvature.

Run:  python3 demos/two_patch_curve.py   (about 10 s)
"""
import numpy as np

from gsqg_patches.green import disc
from gsqg_patches.kr import symmetric_pair_distance
from gsqg_patches.solver import continue_in_eps, verify_solution
from gsqg_patches.system import Problem

kernel = disc(1.0, 1.5)
d = symmetric_pair_distance(kernel)
x0 = np.array([[d, 0.0], [-d, 0.0]])
problem = Problem(kernel, [1.0, 1.0], n=32)
res = continue_in_eps(x0, problem, [0.005, 0.01, 0.02, 0.04])
print(f"d* = {d:.12f}; {res.message}")
for st, rep in zip(res.states[1:], res.reports[1:]):
    v = verify_solution(st, problem, x0)
    drift = np.linalg.norm(st.centers[0] - x0[0])
    print(f"eps={st.eps:<6} its={rep.iterations} |r|={v['residual_norm']:.1e} a2/eps={st.shapes[0].a[0] / st.eps:+.4f} "
          f"drift={drift:.2e} min curvature={v['patches'][0]['min_curvature']:.3f}")
