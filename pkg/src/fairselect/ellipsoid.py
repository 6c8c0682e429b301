"""Central-cut ellipsoid feasibility test for the dual level sets C(L).

C(L) is the set of nonnegative dual points p = (..., w) with dual objective
at most L and w >= f(S) + c(p).g(S) for every feasible S. The FairMax oracle
is the separation routine for the exponentially many set rows: whenever the
set A it returns violates its row, that row is the cut, and A is recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import _kernels
from .errors import NumericalBreakdown
from .model import Instance, Selection
from .oracle import FairMaxOracle
from .variants import Variant

OBJECTIVE = "objective"
NONNEGATIVITY = "nonnegativity"
BOUND = "bound"
SET = "set"

DEFAULT_FLOOR_RATIO = 1e-7
CUT_TOL = 1e-12


@dataclass(frozen=True)
class Hyperplane:
    """The half-space ``normal . p <= offset`` that the queried point violates."""

    normal: np.ndarray
    offset: float
    source: str
    coordinate: int | None = None
    selection: Selection | None = None

    def margin(self, point) -> float:
        return float(self.normal @ point - self.offset)


@dataclass(frozen=True)
class Inside:
    selection: Selection
    value: float


@dataclass
class EllipsoidState:
    """{center + factor @ v : |v| <= 1}, i.e. shape = factor @ factor.T.

    Storing the factor rather than the shape keeps the shape positive
    semidefinite under rounding, even when the ellipsoid gets very thin.
    ``log_det`` is log det(shape), tracked exactly from the per-cut decrease.
    """

    center: np.ndarray
    factor: np.ndarray
    log_det: float

    @classmethod
    def ball(cls, center, radius: float) -> EllipsoidState:
        center = np.asarray(center, dtype=float)
        d = center.shape[0]
        return cls(center, radius * np.eye(d), 2.0 * d * math.log(radius))

    @property
    def shape(self) -> np.ndarray:
        return self.factor @ self.factor.T

    def logdet(self) -> float:
        """log det(shape) computed from the factor, for diagnostics."""
        sign, val = np.linalg.slogdet(self.factor)
        if sign == 0 or not np.isfinite(val):
            raise NumericalBreakdown("ellipsoid has collapsed to a lower-dimensional set")
        return 2.0 * float(val)


@dataclass(frozen=True)
class EllipsoidConfig:
    radius: float | None = None
    max_iter: int | None = None
    floor_ratio: float = DEFAULT_FLOOR_RATIO


@dataclass(frozen=True)
class MarkedNonEmpty:
    witness: np.ndarray
    selection: Selection
    iterations: int
    violated_sets: tuple[Selection, ...] = field(default=())

    nonempty = True


@dataclass(frozen=True)
class Empty:
    violated_sets: tuple[Selection, ...]
    iterations: int

    nonempty = False


FeasibilityOutcome = Union[MarkedNonEmpty, Empty]


def separation(point, L: float, variant: Variant, oracle: FairMaxOracle,
               instance: Instance | None = None,
               bound: tuple[np.ndarray, float] | None = None) -> Inside | Hyperplane:
    """Classify ``point`` against C(L): nonnegativity, the bounding ball, the objective, the oracle.

    ``bound`` is an optional (center, radius) ball outside which points are cut off.
    """
    p = np.asarray(point, dtype=float)
    if p.shape != (variant.dim,):
        raise ValueError(f"dual point has shape {p.shape}, expected ({variant.dim},)")
    neg = np.flatnonzero(p < 0.0)
    if neg.size:
        j = int(neg[np.argmin(p[neg])])
        normal = np.zeros(variant.dim)
        normal[j] = -1.0
        return Hyperplane(normal, 0.0, NONNEGATIVITY, coordinate=j)
    if bound is not None:
        middle, radius = bound
        offset = p - middle
        dist = float(np.linalg.norm(offset))
        if dist > radius * (1.0 + CUT_TOL):
            normal = offset / dist
            return Hyperplane(normal, float(normal @ middle) + radius, BOUND)
    obj = variant.objective_normal
    if float(obj @ p) - L > CUT_TOL * (1.0 + abs(L)):
        return Hyperplane(obj, float(L), OBJECTIVE)
    res = oracle(variant.coeff_map @ p)
    w = p[-1]
    if res.value - w > CUT_TOL * (1.0 + abs(w)):
        return Hyperplane(variant.set_cut_normal(res.group_values), -res.global_value, SET,
                          selection=res.selection)
    return Inside(res.selection, res.value)


def ellipsoid_step(state: EllipsoidState, cut: Hyperplane) -> EllipsoidState:
    """Central cut through the current center."""
    a = np.asarray(cut.normal, dtype=float)
    if not np.any(a):
        raise ValueError("cut normal must be nonzero")
    center, factor, width = _kernels.central_cut(state.center, state.factor, a)
    if not (width > 0.0 and np.isfinite(width)):
        raise NumericalBreakdown(f"cut direction has non-positive ellipsoid width ({width})")
    if not (np.all(np.isfinite(center)) and np.all(np.isfinite(factor))):
        raise NumericalBreakdown("ellipsoid update produced non-finite values")
    return EllipsoidState(center, factor, state.log_det - central_cut_logdet_drop(center.shape[0]))


def central_cut_logdet_drop(d: int) -> float:
    """Exact decrease of log det(shape) for one central cut in dimension d."""
    if d == 1:
        return math.log(4.0)
    return -(d * math.log(d * d / (d * d - 1.0)) + math.log((d - 1.0) / (d + 1.0)))


def iteration_cap(d: int, floor_ratio: float = DEFAULT_FLOOR_RATIO) -> int:
    return math.ceil(2 * d * (d + 1) * math.log(1.0 / floor_ratio))


def default_radius(variant: Variant, L_hi: float, eps_alpha: float = 1e-6) -> float:
    """d * 10 * (L_hi + 1) / (smallest positive fairness bound, at least eps_alpha).

    With no positive bound at all the divisor is 1.
    """
    pos = variant.positive_bounds()
    divisor = max(eps_alpha, float(pos.min())) if pos.size else 1.0
    return variant.dim * 10.0 * (max(L_hi, 0.0) + 1.0) / divisor


def search_radius(R: float, d: int) -> float:
    """Radius of the ball around (R/2, ..., R/2) that contains the box [0, R]^d."""
    return R * max(1.0, math.sqrt(d) / 2.0)


def ellipsoid_feasible(L: float, variant: Variant, oracle: FairMaxOracle, instance: Instance | None,
                       config: EllipsoidConfig) -> FeasibilityOutcome:
    """Search C(L) inside the ball around (R/2, ..., R/2) that covers [0, R]^d.

    Stops at the first point the oracle certifies (marked non-empty) or when the
    iteration cap or volume floor is reached (empty). Points that leave the
    starting ball are cut back into it, which keeps the ellipsoid from growing
    needle-shaped along unbounded directions of C(L). Violated sets are recorded
    on every set cut, deduplicated, in order of first appearance.
    """
    if config.radius is None:
        raise ValueError("ellipsoid_feasible needs an explicit radius")
    d = variant.dim
    R = float(config.radius)
    cap = config.max_iter if config.max_iter is not None else iteration_cap(d, config.floor_ratio)
    middle = np.full(d, R / 2.0)
    radius = search_radius(R, d)
    state = EllipsoidState.ball(middle, radius)
    log_floor = 2.0 * d * math.log(config.floor_ratio * R)
    violated: dict[Selection, None] = {}
    for it in range(cap):
        verdict = separation(state.center, L, variant, oracle, instance, bound=(middle, radius))
        if isinstance(verdict, Inside):
            return MarkedNonEmpty(state.center.copy(), verdict.selection, it, tuple(violated))
        if verdict.source == SET:
            violated.setdefault(verdict.selection)
        state = ellipsoid_step(state, verdict)
        if state.log_det <= log_floor:
            return Empty(tuple(violated), it + 1)
    return Empty(tuple(violated), cap)
