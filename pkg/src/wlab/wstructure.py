"""Conductance functions W_k: an affine part plus finitely many jumps per axis."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class AxisW:
    """One strictly increasing cadlag W_k, periodic up to its total increment.

    ``jumps`` holds ``(location, size)`` pairs with locations in [0, 1).
    """

    alpha: float = 1.0
    jumps: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        jumps = tuple(sorted((float(d), float(b)) for d, b in self.jumps))
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "alpha", float(self.alpha))
        if not self.alpha > 0:
            raise ValueError(f"slope alpha must be positive, got {self.alpha}")
        locs = [d for d, _ in jumps]
        if len(set(locs)) != len(locs):
            raise ValueError(f"jump locations must be distinct, got {locs}")
        for d, b in jumps:
            if not 0.0 <= d < 1.0:
                raise ValueError(f"jump location {d} outside [0, 1)")
            if not b > 0:
                raise ValueError(f"jump size must be positive, got {b}")

    @property
    def total(self) -> float:
        """W_k(1) - W_k(0)."""
        return self.alpha + sum(b for _, b in self.jumps)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        fl = np.floor(x)
        frac = x - fl
        out = self.alpha * x
        for d, b in self.jumps:
            out = out + b * (fl + (frac >= d))
        return out

    def to_dict(self) -> dict:
        return {"alpha": self.alpha,
                "jumps": [{"location": d, "size": b} for d, b in self.jumps]}

    @classmethod
    def from_dict(cls, rec: dict) -> "AxisW":
        jumps = tuple((j["location"], j["size"]) for j in rec.get("jumps", ()))
        return cls(alpha=rec.get("alpha", 1.0), jumps=jumps)


@dataclass(frozen=True)
class WSpec:
    """Product conductance W(x) = sum_k W_k(x_k)."""

    axes: tuple[AxisW, ...] = field(default_factory=lambda: (AxisW(),))

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise ValueError("WSpec needs at least one axis")

    @property
    def d(self) -> int:
        return len(self.axes)

    @classmethod
    def identity(cls, d: int = 1) -> "WSpec":
        return cls(tuple(AxisW() for _ in range(d)))

    @classmethod
    def with_jumps(cls, jumps: Sequence[Iterable[tuple[float, float]]],
                   alpha: float | Sequence[float] = 1.0) -> "WSpec":
        d = len(jumps)
        alphas = [alpha] * d if np.isscalar(alpha) else list(alpha)
        return cls(tuple(AxisW(a, tuple(j)) for a, j in zip(alphas, jumps)))

    def to_list(self) -> list[dict]:
        return [ax.to_dict() for ax in self.axes]

    @classmethod
    def from_list(cls, recs: Sequence[dict]) -> "WSpec":
        return cls(tuple(AxisW.from_dict(r) for r in recs))


def eval_w(spec: WSpec, k: int, x):
    """W_k(x), right-continuous at jumps and extended by the periodic increment."""
    return spec.axes[k](x)


def increment(spec: WSpec, k: int, i: int, N: int) -> float:
    """W_k((i+1)/N) - W_k(i/N); a jump at d is owned by the cell with i/N < d <= (i+1)/N."""
    if not 0 <= i < N:
        raise IndexError(f"grid index {i} out of range for N={N}")
    ax = spec.axes[k]
    return float(ax((i + 1) / N) - ax(i / N))


def increments(spec: WSpec, k: int, N: int) -> np.ndarray:
    """All N increments of W_k on the grid, same arithmetic as :func:`increment`."""
    ax = spec.axes[k]
    i = np.arange(N)
    return ax((i + 1) / N) - ax(i / N)
