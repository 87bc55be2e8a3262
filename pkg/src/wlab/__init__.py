"""Discrete W-Sobolev calculus, W-elliptic/parabolic solvers, homogenization and
exclusion-process experiments on the discrete torus."""

__version__ = "0.1.0"

from .wstructure import AxisW, WSpec, eval_w, increment, increments  # noqa: E402
from .grid import (DiagonalField, apply_ln, diff_w, diff_x, inner_n, inner_wj,  # noqa: E402
                   norm_h1w, project_mean_zero, w_interpolate)
from .elliptic import EllipticProblem, dual_norm, solve, solve_neumann  # noqa: E402
from .parabolic import PhiSpec, energy, integrate, step  # noqa: E402
from .environment import (EnvironmentSpec, h_convergence_experiment,  # noqa: E402
                          homogenized_matrix, sample_field)
from .exclusion import (build_rates, check_detailed_balance, hydro_compare,  # noqa: E402
                        jump_rate, simulate)
