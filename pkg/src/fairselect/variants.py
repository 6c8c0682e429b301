"""Dual-space layout of the three fairness variants.

A dual point is a flat vector whose last coordinate is w. Before w come:

* lower bounds: z_0..z_{m-1}
* box:          z_0..z_{m-1}, u_0..u_{m-1}
* pairwise:     z_{t,t'} for every ordered pair t != t', in row-major order

In every variant the FairMax coefficients are a linear function of the point,
``c = coeff_map @ point``, which is what lets one set cut serve all variants:
the dual row of a set A reads ``(coeff_map.T @ g(A)) . p - w <= -f(A)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .model import Box, FairnessSpec, LowerBounds, Pairwise

P0, PA, PB = "P0", "PA", "PB"


@dataclass(frozen=True, eq=False)
class Variant:
    kind: str
    m: int
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    gamma: np.ndarray | None = None
    mu: float = 1.0
    pairs: tuple[tuple[int, int], ...] = field(default=())

    @classmethod
    def from_fairness(cls, fairness: FairnessSpec, m: int, mu: float = 1.0) -> Variant:
        if isinstance(fairness, LowerBounds):
            return cls(P0, m, alpha=np.asarray(fairness.alpha, dtype=float), mu=mu)
        if isinstance(fairness, Box):
            return cls(PA, m, alpha=np.asarray(fairness.alpha, dtype=float),
                       beta=np.asarray(fairness.beta, dtype=float), mu=mu)
        if isinstance(fairness, Pairwise):
            pairs = tuple((t, t2) for t in range(m) for t2 in range(m) if t != t2)
            return cls(PB, m, gamma=np.asarray(fairness.gamma, dtype=float), pairs=pairs)
        raise TypeError(f"unknown fairness spec {type(fairness).__name__}")

    @property
    def dim(self) -> int:
        if self.kind == P0:
            return self.m + 1
        if self.kind == PA:
            return 2 * self.m + 1
        return len(self.pairs) + 1

    @property
    def signed(self) -> bool:
        """Whether FairMax queries can carry negative coefficients."""
        return self.kind != P0

    @cached_property
    def coeff_map(self) -> np.ndarray:
        m, d = self.m, self.dim
        M = np.zeros((m, d))
        if self.kind == P0:
            M[:, :m] = np.eye(m)
        elif self.kind == PA:
            M[:, :m] = np.eye(m)
            M[:, m:2 * m] = -np.eye(m)
        else:
            for j, (t, t2) in enumerate(self.pairs):
                # (g_t2 - g_t) z_{t,t2}
                M[t, j] -= 1.0
                M[t2, j] += 1.0
        return M

    @cached_property
    def objective_normal(self) -> np.ndarray:
        """Dual objective coefficients; the objective cut is ``a . p <= L``."""
        a = np.zeros(self.dim)
        a[-1] = 1.0
        if self.kind == P0:
            a[: self.m] = -self.mu * self.alpha
        elif self.kind == PA:
            a[: self.m] = -self.mu * self.alpha
            a[self.m:2 * self.m] = self.beta
        else:
            a[:-1] = [self.gamma[t, t2] for t, t2 in self.pairs]
        return a

    def set_cut_normal(self, gvals: np.ndarray) -> np.ndarray:
        a = self.coeff_map.T @ np.asarray(gvals, dtype=float)
        a[-1] = -1.0
        return a

    def positive_bounds(self) -> np.ndarray:
        """Strictly positive right-hand sides (mu-scaled lower bounds, upper bounds, gammas)."""
        if self.kind == P0:
            vals = self.mu * self.alpha
        elif self.kind == PA:
            vals = np.concatenate([self.mu * self.alpha, self.beta])
        else:
            vals = np.array([self.gamma[t, t2] for t, t2 in self.pairs])
        return vals[vals > 0]


def effective_coeffs(variant: Variant, point) -> np.ndarray:
    """FairMax coefficients c with f(S) + c.g(S) equal to the variant's dual row value."""
    p = np.asarray(point, dtype=float)
    if p.shape != (variant.dim,):
        raise ValueError(f"dual point has shape {p.shape}, expected ({variant.dim},)")
    return variant.coeff_map @ p
