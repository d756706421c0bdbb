"""Critical points of the two-vortex Kirchhoff-Routh function in the disc.

Finds the symmetric pair from a grid of seeds, prints its Hessian
classification, and shows that at zero patch size the first-harmonic rows
of the patch residual are the Kirchhoff-Routh gradient scaled by
1/(4 kappa_i).

Run:  python3 demos/kr_pair.py
"""
import numpy as np

from gsqg_patches.green import disc
from gsqg_patches.kr import VortexConfiguration, default_seeds, find_critical_points, grad_w_m
from gsqg_patches.solver import residual
from gsqg_patches.system import ContinuationState, Problem

kernel = disc(1.0, 1.5)
kappas = [1.0, 1.0]
for cp in find_critical_points(kernel, default_seeds(kernel, kappas, grid=5, max_seeds=60)):
    print("critical pair:", np.round(cp.config.points, 10).tolist())
    print(f"  index {cp.index}, reduced index {cp.reduced_index}, "
          f"reduced nondegenerate {cp.reduced_nondegenerate}")

pts = np.array([[0.4, 0.1], [-0.3, -0.2]])
st = ContinuationState.initial(pts, kappas, 1.5, 8, 0.0)
rows = residual(st, Problem(kernel, kappas, n=8))[-4:].reshape(2, 2)
gw = grad_w_m(kernel, VortexConfiguration(pts, kappas)).reshape(2, 2) / 4.0
print("center rows     :", rows.round(12).tolist())
print("(W_x, -W_y)/4k  :", (gw * [1, -1]).round(12).tolist())
