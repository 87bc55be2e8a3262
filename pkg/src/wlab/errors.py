"""Exceptions raised by the solvers and simulators."""


class WlabError(Exception):
    """Base class for numerical failures that carry diagnostic context."""


class NonConvergence(WlabError):
    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"CG did not converge: {iterations} iterations, "
                         f"relative residual {residual:.3e}")


class IncompatibleRHS(WlabError):
    def __init__(self, mean: float, tol: float):
        self.mean = mean
        super().__init__(f"right-hand side has mean {mean:.3e} (tolerance {tol:.3e}); "
                         "the lambda = 0 problem needs mean-zero data")


class BoundViolation(WlabError):
    pass


class NewtonDivergence(WlabError):
    def __init__(self, iterations: int, residual: float, t: float | None = None):
        self.iterations = iterations
        self.residual = residual
        self.t = t
        where = "" if t is None else f" at t={t:.6g}"
        super().__init__(f"Newton failed{where}: {iterations} iterations, "
                         f"residual {residual:.3e}")


class RangeViolation(WlabError):
    def __init__(self, lo: float, hi: float, l: float, r: float, t: float | None = None):
        self.t = t
        where = "" if t is None else f" at t={t:.6g}"
        super().__init__(f"state left [{l}, {r}]{where}: range [{lo:.12g}, {hi:.12g}]; "
                         "reduce dt")
