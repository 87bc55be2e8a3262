"""
Derivatives against a conductance with a jump
=============================================

A jump of W acts as a membrane: the W-derivative of a function that is
continuous across the jump is small there, and the operator weight on that
bond shrinks like 1/(N * jump).
"""

import numpy as np

from wlab.grid import DiagonalField, apply_ln, diff_w, inner_n, inner_wj
from wlab.wstructure import WSpec, increments

w = WSpec.with_jumps([[(0.5, 2.0)]])
N = 16
print("increments:", np.round(increments(w, 0, N), 4))
print("sum of increments equals the period increment:", increments(w, 0, N).sum(), w.axes[0].total)

# the W-derivative of x -> W(x) restricted to the grid is one on every
# bond except the wrap-around bond, where W is not periodic
x = np.arange(N) / N
print("d_W W:", np.round(diff_w(w.axes[0](x), 0, w), 3))

# summation by parts holds to rounding
rng = np.random.default_rng(0)
a = DiagonalField(rng.uniform(0.5, 2.0, (1, N)), theta=2.0)
f, g = rng.standard_normal((2, N))
lhs = inner_n(apply_ln(f, a, w), g)
rhs = -inner_wj(a[0] * diff_w(f, 0, w), diff_w(g, 0, w), 0, w)
print(f"<L f, g> = {lhs:.15f}\n-<a dW f, dW g> = {rhs:.15f}")
