"""
Exclusion process against its hydrodynamic equation
===================================================

Replica-averaged empirical measures of the exclusion process with a slow
membrane bond are paired with test functions and compared with the
parabolic integrator.
"""

import numpy as np

from wlab.config import make_test_functions
from wlab.environment import EnvironmentSpec
from wlab.exclusion import hydro_compare
from wlab.wstructure import WSpec

N, R = 128, 64
tests = make_test_functions("constants", N, 1) + make_test_functions("axis-sinusoids", N, 1, 1)
rep = hydro_compare(lambda x: 0.5 + 0.3 * np.sin(2 * np.pi * x),
                    EnvironmentSpec(law="constant", value=1.0),
                    WSpec.with_jumps([[(0.3, 0.5)]]), 0.5, N, R, [0.01, 0.05], tests, seed=0)

print("events per replica:", int(rep.events.mean()))
for m, t in enumerate(rep.times):
    for k, name in enumerate(["one", "sin1", "cos1"]):
        print(f"t={t:.2f} {name:5s} particles {rep.mean[m, k]: .4f} +- {rep.stderr[m, k]:.4f}"
              f"   pde {rep.pde[m, k]: .4f}")
