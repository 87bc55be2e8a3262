"""
Elliptic W-problem with a manufactured solution
===============================================

The exact solution of lambda u - d_x d_W u = f is built from a piecewise
constant flux profile, with the jump of W placed where the flux vanishes.
The L2 error halves at every doubling of N.
"""

import numpy as np

from wlab.elliptic import EllipticProblem, Manufactured1D, solve
from wlab.grid import DiagonalField, norm_l2
from wlab.wstructure import AxisW, WSpec

axis = AxisW(1.0, ((0.618, 0.5),))
ms = Manufactured1D(axis, [0, 0.25, 0.5, 0.75, 1], [1, -2, 0, 1], lam=1.0)

prev = None
for N in (32, 64, 128, 256, 512):
    x = np.arange(N) / N
    sol = solve(EllipticProblem(WSpec((axis,)), DiagonalField.constant(N, 1), 1.0, ms.rhs(x)))
    err = norm_l2(sol.u - ms.u(x))
    ratio = "" if prev is None else f"  ratio {err / prev:.3f}"
    print(f"N={N:4d}  error {err:.3e}  CG iterations {sol.iterations:4d}{ratio}")
    prev = err
