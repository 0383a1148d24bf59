"""The local averaging operator behind the game p-Laplacian on the tree.

The operator sends the m successor values of a vertex to

    (alpha/2) * (max + min) + (beta/m) * sum,

a convex combination, so constants are fixed and the result always lies
between the smallest and largest input (the discrete maximum principle).
A function whose value at every vertex equals the operator applied to its
successor values is called harmonious here; one-sided inequalities give
the sub/super variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ContractViolationError, MissingValueError, ValidationError
from .tree import Vertex, vertex_from_index

#: residual classifications, also used for whole-field reports
HARMONIOUS = "harmonious"
SUBHARMONIOUS = "subharmonious"
SUPERHARMONIOUS = "superharmonious"
NEITHER = "neither"

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class GameParams:
    """Branching factor and coin weights, with the derived contraction weights.

    theta = alpha/2 + (m-1)*beta/m is the largest weight the operator can
    put on the maximal successor value; delta = 1 - theta = alpha/2 + beta/m
    is the complementary weight.  For any admissible (m, alpha, beta) with
    alpha + beta = 1, delta lies in [1/m, 1/2].

    The endpoints alpha=1 (pure tug-of-war) and alpha=0 (pure averaging)
    are accepted.
    """

    m: int
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not isinstance(self.m, int) or self.m < 2:
            raise ValidationError(
                f"branching factor m must be an integer >= 2, got {self.m!r}"
            )
        for name, value in (("alpha", self.alpha), ("beta", self.beta)):
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {value}")
        if abs(self.alpha + self.beta - 1.0) > 1e-12:
            raise ValidationError(
                f"alpha + beta must equal 1, got {self.alpha} + {self.beta}"
            )

    @property
    def theta(self) -> float:
        return self.alpha / 2.0 + (self.m - 1) * self.beta / self.m

    @property
    def delta(self) -> float:
        return 1.0 - self.theta


@dataclass(frozen=True)
class Residual:
    """Operator average of the successor values minus the value at the vertex."""

    value: float


def dpp_average(params: GameParams, succ_values: Sequence[float]) -> float:
    """Apply the averaging operator to exactly m successor values."""
    values = [float(v) for v in succ_values]
    if len(values) != params.m:
        raise ContractViolationError(
            f"expected {params.m} successor values, got {len(values)}"
        )
    for v in values:
        if not math.isfinite(v):
            raise ContractViolationError(f"successor values must be finite, got {v}")
    return (params.alpha / 2.0) * (max(values) + min(values)) + (
        params.beta / params.m
    ) * math.fsum(values)


def residual_at(
    field: Callable[[Vertex], float], v: Vertex, params: GameParams
) -> Residual:
    """Residual of `field` at vertex `v`: average over S(v) minus field(v).

    The field must be defined at `v` and at all of its successors; an
    oracle may signal a hole by raising or returning None/NaN.
    """

    def probe(vertex: Vertex) -> float:
        try:
            value = field(vertex)
        except MissingValueError:
            raise
        except (KeyError, IndexError) as exc:
            raise MissingValueError(vertex) from exc
        if value is None or (isinstance(value, float) and math.isnan(value)):
            raise MissingValueError(vertex)
        return float(value)

    centre = probe(v)
    succ = [probe(y) for y in v.successors()]
    return Residual(dpp_average(params, succ) - centre)


def classify(
    field: Callable[[Vertex], float],
    v: Vertex,
    params: GameParams,
    tol: float = DEFAULT_TOL,
) -> str:
    """Classify `field` at a single vertex from the sign of its residual.

    A nonnegative residual (value <= operator average) is the
    subharmonious side; nonpositive is the superharmonious side; within
    tol of zero is harmonious.
    """
    r = residual_at(field, v, params).value
    if abs(r) <= tol:
        return HARMONIOUS
    return SUBHARMONIOUS if r > 0 else SUPERHARMONIOUS


@dataclass(frozen=True)
class FieldCheckReport:
    max_abs_residual: float
    worst_vertex: Vertex
    classification: str
    vertices_checked: int


def check_field(field, params: GameParams | None = None, tol: float = DEFAULT_TOL) -> FieldCheckReport:
    """Scan all interior vertices of a level field and report the worst residual.

    `field` is a solver LevelField (or anything exposing ``params``, ``n``
    and per-level value arrays ``levels``).
    """
    if params is None:
        params = field.params
    if params.m != field.params.m:
        raise ContractViolationError("params branching factor differs from the field's")
    m = params.m
    worst = 0.0
    worst_level = 0
    worst_index = 0
    checked = 0
    min_resid = 0.0
    max_resid = 0.0
    for k in range(field.n):
        children = np.asarray(field.levels[k + 1], dtype=float).reshape(-1, m)
        averages = (params.alpha / 2.0) * (children.max(axis=1) + children.min(axis=1)) + (
            params.beta / m
        ) * children.sum(axis=1)
        residuals = averages - np.asarray(field.levels[k], dtype=float)
        checked += residuals.size
        min_resid = min(min_resid, float(residuals.min()))
        max_resid = max(max_resid, float(residuals.max()))
        j = int(np.abs(residuals).argmax())
        if abs(residuals[j]) > worst:
            worst = float(abs(residuals[j]))
            worst_level, worst_index = k, j
    if max_resid <= tol and min_resid >= -tol:
        label = HARMONIOUS
    elif min_resid >= -tol:
        label = SUBHARMONIOUS
    elif max_resid <= tol:
        label = SUPERHARMONIOUS
    else:
        label = NEITHER
    return FieldCheckReport(
        max_abs_residual=worst,
        worst_vertex=vertex_from_index(m, worst_level, worst_index),
        classification=label,
        vertices_checked=checked,
    )
