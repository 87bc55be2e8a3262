"""Declarative experiment description (JSON tree) and test-function families."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from itertools import product
from pathlib import Path

import numpy as np

from .elliptic import Manufactured1D
from .environment import LAWS, EnvironmentSpec
from .wstructure import WSpec

KINDS = ("elliptic", "neumann", "parabolic", "homogenize", "hydro", "selftest")
FAMILIES = ("constants", "axis-sinusoids", "products")
PROFILE_KINDS = ("constant", "sinusoid", "manufactured")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


def _default_w():
    return [{"alpha": 1.0, "jumps": []}]


@dataclass
class ExperimentConfig:
    kind: str = "selftest"
    d: int = 1
    w: list = field(default_factory=_default_w)
    environment: dict = field(default_factory=lambda: {"law": "constant", "value": 1.0})
    theta: float = 2.0
    lam: float = 1.0
    b: float = 0.0
    phi: list | None = None
    N: int | None = None
    N_schedule: list = field(default_factory=lambda: [16, 32, 64])
    T: float = 0.1
    dt: float | None = None
    tol: float = 1e-10
    seeds: list = field(default_factory=lambda: [0])
    replicas: int = 16
    sample_times: list = field(default_factory=lambda: [0.01, 0.05])
    source: dict = field(default_factory=lambda: {"kind": "sinusoid", "axis": 0, "k": 1})
    initial: dict = field(default_factory=lambda: {"kind": "sinusoid", "offset": 0.5,
                                                   "amplitude": 0.3, "axis": 0, "k": 1})
    test_functions: dict = field(default_factory=lambda: {"families": ["constants", "axis-sinusoids"],
                                                          "kmax": 1})
    density_dump: bool = False
    output: str = "wlab-out"

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        return out

    @classmethod
    def from_dict(cls, tree: dict) -> "ExperimentConfig":
        tree = dict(tree)
        if "lambda" in tree:
            tree["lam"] = tree.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(tree) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        cfg = cls(**tree)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            tree = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"invalid JSON: {exc}") from None
        if not isinstance(tree, dict):
            raise ConfigError("<file>", "top level must be an object")
        return cls.from_dict(tree)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    # -- validation -------------------------------------------------------
    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError("kind", f"must be one of {KINDS}, got {self.kind!r}")
        if not (isinstance(self.d, int) and 1 <= self.d <= 3):
            raise ConfigError("d", "must be 1, 2 or 3")
        try:
            spec = WSpec.from_list(self.w)
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError("w", str(exc)) from None
        if spec.d != self.d:
            raise ConfigError("w", f"needs one record per axis ({self.d}), got {spec.d}")
        try:
            self.env_spec(self.seeds[0] if self.seeds else 0)
        except (ValueError, TypeError) as exc:
            raise ConfigError("environment", str(exc)) from None
        if not self.theta >= 1:
            raise ConfigError("theta", "must be >= 1")
        if self.kind == "neumann":
            if self.lam != 0:
                raise ConfigError("lambda", "neumann experiments use lambda = 0")
        elif self.kind == "elliptic" and not self.lam >= 0:
            raise ConfigError("lambda", "must be nonnegative")
        elif self.kind == "homogenize" and not self.lam > 0:
            raise ConfigError("lambda", "must be positive")
        if not self.b > -0.5:
            raise ConfigError("b", "must exceed -1/2")
        ns = self.N_schedule
        if not ns or any((not isinstance(n, int)) or n < 2 for n in ns):
            raise ConfigError("N_schedule", "must be a nonempty list of integers >= 2")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError("N_schedule", "must be strictly increasing")
        if self.N is not None and (not isinstance(self.N, int) or self.N < 2):
            raise ConfigError("N", "must be an integer >= 2")
        if not self.T > 0:
            raise ConfigError("T", "must be positive")
        if self.dt is not None and not 0 < self.dt <= self.T:
            raise ConfigError("dt", "must lie in (0, T]")
        if not self.tol > 0:
            raise ConfigError("tol", "must be positive")
        if not self.seeds or any(not isinstance(s, int) or s < 0 for s in self.seeds):
            raise ConfigError("seeds", "must be a nonempty list of nonnegative integers")
        if not isinstance(self.replicas, int) or self.replicas < 1:
            raise ConfigError("replicas", "must be a positive integer")
        st = self.sample_times
        if not st or any(t < 0 for t in st) or any(b < a for a, b in zip(st, st[1:])):
            raise ConfigError("sample_times", "must be nonnegative and nondecreasing")
        for name in ("source", "initial"):
            prof = getattr(self, name)
            if prof.get("kind") not in PROFILE_KINDS:
                raise ConfigError(name, f"kind must be one of {PROFILE_KINDS}")
            if prof["kind"] == "manufactured" and self.d != 1:
                raise ConfigError(name, "manufactured profiles are one-dimensional")
        fams = self.test_functions.get("families", [])
        for fam in fams:
            if fam not in FAMILIES:
                raise ConfigError("test_functions", f"unknown family {fam!r}")
        if self.phi is not None:
            try:
                self.phi_spec()
            except ValueError as exc:
                raise ConfigError("phi", str(exc)) from None

    # -- resolved objects -------------------------------------------------
    def w_spec(self) -> WSpec:
        return WSpec.from_list(self.w)

    def env_spec(self, seed: int) -> EnvironmentSpec:
        e = dict(self.environment)
        law = e.pop("law", "constant")
        if law not in LAWS:
            raise ValueError(f"unknown law {law!r}")
        return EnvironmentSpec(theta=float(e.pop("theta", self.theta)), law=law,
                               p=float(e.pop("p", 0.5)), seed=seed, d=self.d,
                               value=float(e.pop("value", 1.0)))

    def phi_spec(self):
        from .parabolic import PhiSpec
        if self.phi is None:
            return PhiSpec.quadratic(self.b)
        return PhiSpec(tuple(self.phi))

    @property
    def grid_N(self) -> int:
        return self.N if self.N is not None else self.N_schedule[-1]


def profile_function(prof: dict, w: WSpec, lam: float = 1.0):
    """Callable f(*coords) for a named profile."""
    kind = prof["kind"]
    if kind == "constant":
        c = float(prof.get("value", 1.0))
        return lambda *x: np.full(np.shape(x[0]), c)
    if kind == "sinusoid":
        j, k = int(prof.get("axis", 0)), int(prof.get("k", 1))
        off, amp = float(prof.get("offset", 0.0)), float(prof.get("amplitude", 1.0))
        trig = np.cos if prof.get("phase", "sin") == "cos" else np.sin
        return lambda *x: off + amp * trig(2 * np.pi * k * x[j])
    ms = manufactured(prof, w, lam)
    return lambda x: ms.rhs(x)


def manufactured(prof: dict, w: WSpec, lam: float = 1.0) -> Manufactured1D:
    return Manufactured1D(w.axes[0], prof.get("breaks", [0, 0.25, 0.5, 0.75, 1]),
                          prof.get("values", [1.0, -2.0, 0.0, 1.0]), lam=lam,
                          a0=float(prof.get("a0", 1.0)))


def _axis_modes(N: int, kmax: int):
    x = np.arange(N) / N
    out = []
    for k in range(1, kmax + 1):
        out.append((f"sin{k}", np.sin(2 * np.pi * k * x)))
        out.append((f"cos{k}", np.cos(2 * np.pi * k * x)))
    return out


def make_test_functions(family: str, N: int, d: int, kmax: int = 1) -> list[np.ndarray]:
    """Sample a named smooth family on T^d_N.

    ``constants`` gives [1]; ``axis-sinusoids`` gives sin/cos(2 pi k x_j) for
    k <= kmax on each axis; ``products`` gives all tensor products of the
    one-axis modes.
    """
    return [f for _, f in named_test_functions(family, N, d, kmax)]


def named_test_functions(family: str, N: int, d: int, kmax: int = 1):
    if family == "constants":
        return [("one", np.ones((N,) * d))]
    modes = _axis_modes(N, kmax)
    if family == "axis-sinusoids":
        out = []
        for j in range(d):
            shape = [1] * d
            shape[j] = N
            for name, m in modes:
                out.append((f"{name}_x{j}", np.broadcast_to(m.reshape(shape), (N,) * d).copy()))
        return out
    if family == "products":
        out = []
        for combo in product(modes, repeat=d):
            f = np.ones((N,) * d)
            for j, (_, m) in enumerate(combo):
                shape = [1] * d
                shape[j] = N
                f = f * m.reshape(shape)
            out.append(("*".join(f"{n}_x{j}" for j, (n, _) in enumerate(combo)), f))
        return out
    raise ValueError(f"unknown test-function family {family!r}; choose from {FAMILIES}")


def test_set(cfg: ExperimentConfig, N: int):
    """Named test functions for a config; the constant function is always first."""
    fams = list(cfg.test_functions.get("families", []))
    kmax = int(cfg.test_functions.get("kmax", 1))
    if "constants" in fams:
        fams.remove("constants")
    out = named_test_functions("constants", N, cfg.d)
    for fam in fams:
        out += named_test_functions(fam, N, cfg.d, kmax)
    return out
