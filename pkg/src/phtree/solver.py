"""Bottom-up construction of the approximating fields u_n.

``build_un`` seeds level n with the boundary samples and sweeps the
averaging operator upward one level at a time, so every interior value is
exactly the operator applied to its m children.  For Lipschitz boundary
data with constant L the field is within ``L / m**n`` of the limit
solution everywhere, which is what ``error_bound`` certifies and
``solve_to_tolerance`` inverts; without a Lipschitz bound an empirical
Cauchy criterion on consecutive fields is used instead.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .boundary import BoundarySpec, SampledBoundary, modulus_bound, sample_Fn
from .capacity import check_level_size
from .dpp import GameParams
from .errors import (
    CapacityError,
    ContractViolationError,
    UnsupportedError,
    ValidationError,
)
from .tree import Vertex


@dataclass(frozen=True)
class LevelField:
    """Per-level value arrays of u_n up to depth n.

    ``levels[k]`` holds the m**k level-k values in lexicographic order;
    ``levels[n]`` is exactly the boundary sample array.  Below level n the
    field is constant on each subtree, so evaluation at a deeper vertex
    returns its depth-n ancestor's value.
    """

    params: GameParams
    n: int
    levels: tuple[np.ndarray, ...]
    boundary: SampledBoundary

    def __post_init__(self) -> None:
        if len(self.levels) != self.n + 1:
            raise ContractViolationError(
                f"expected {self.n + 1} level arrays, got {len(self.levels)}"
            )
        for k, arr in enumerate(self.levels):
            if arr.shape != (self.params.m**k,):
                raise ContractViolationError(
                    f"level {k} array has shape {arr.shape}, expected ({self.params.m**k},)"
                )

    @property
    def root_value(self) -> float:
        return float(self.levels[0][0])

    def value(self, v: Vertex) -> float:
        if v.m != self.params.m:
            raise ContractViolationError(
                f"vertex branching {v.m} differs from field branching {self.params.m}"
            )
        if v.level <= self.n:
            return float(self.levels[v.level][v.index])
        return float(self.levels[self.n][v.ancestor(self.n).index])

    def __call__(self, v: Vertex) -> float:
        return self.value(v)


def build_un(
    spec: BoundarySpec, params: GameParams, n: int, cap: int | None = None
) -> LevelField:
    """Build u_n for the given boundary data by one bottom-up sweep."""
    if n < 1:
        raise ValidationError(f"depth n must be >= 1, got {n}")
    m = params.m
    check_level_size(m, n, cap)
    sampled = sample_Fn(spec, m, n, cap)
    levels: list[np.ndarray] = [np.array(sampled.values, dtype=float)]
    for k in range(n - 1, -1, -1):
        children = levels[0].reshape(m**k, m)
        parent = (params.alpha / 2.0) * (children.max(axis=1) + children.min(axis=1)) + (
            params.beta / m
        ) * children.sum(axis=1)
        levels.insert(0, parent)
    return LevelField(params=params, n=n, levels=tuple(levels), boundary=sampled)


def evaluate(field: LevelField, v: Vertex) -> float:
    return field.value(v)


def error_bound(spec: BoundarySpec, params: GameParams, n: int) -> float:
    """Certified sup-distance ``L / m**n`` between u_n and the limit solution."""
    if spec.lipschitz_bound is None:
        raise UnsupportedError(
            "boundary data carries no Lipschitz bound; use modulus_bound or "
            "solve_to_tolerance's empirical stopping instead"
        )
    return spec.lipschitz_bound / params.m**n


@dataclass(frozen=True)
class SolveResult:
    field: LevelField
    n_used: int
    certified: bool
    certified_bound: float | None
    empirical_gap: float | None


def solve_to_tolerance(
    spec: BoundarySpec,
    params: GameParams,
    tol: float,
    cap: int | None = None,
    max_n: int = 24,
) -> SolveResult:
    """Find the shallowest field meeting `tol`.

    With Lipschitz metadata this is the least n with ``L / m**n <= tol``
    (certified).  Otherwise n is increased until consecutive fields agree
    to ``tol/2`` on the coarser field's deepest level, which is reported
    as an uncertified empirical bound.  Hitting the size cap or `max_n`
    first yields a partial, not-certified result.
    """
    if tol <= 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    m = params.m
    if spec.lipschitz_bound is not None:
        n = 1
        while spec.lipschitz_bound / m**n > tol and n < max_n:
            try:
                check_level_size(m, n + 1, cap)
            except CapacityError:
                break
            n += 1
        field = build_un(spec, params, n, cap)
        bound = spec.lipschitz_bound / m**n
        return SolveResult(
            field=field,
            n_used=n,
            certified=bound <= tol,
            certified_bound=bound,
            empirical_gap=None,
        )
    current = build_un(spec, params, 1, cap)
    gap = math.inf
    while current.n < max_n:
        try:
            check_level_size(m, current.n + 1, cap)
        except CapacityError:
            break
        finer = build_un(spec, params, current.n + 1, cap)
        coarse_level = current.levels[current.n]
        same_level = finer.levels[current.n]
        gap = float(np.abs(coarse_level - same_level).max())
        current = finer
        if gap <= tol / 2.0:
            return SolveResult(
                field=current,
                n_used=current.n,
                certified=False,
                certified_bound=None,
                empirical_gap=gap,
            )
    return SolveResult(
        field=current,
        n_used=current.n,
        certified=False,
        certified_bound=None,
        empirical_gap=None if math.isinf(gap) else gap,
    )


def compare_fields(field_f: LevelField, field_g: LevelField) -> bool:
    """True iff field_f <= field_g at every stored vertex."""
    pf, pg = field_f.params, field_g.params
    if (pf.m, pf.alpha, pf.beta) != (pg.m, pg.alpha, pg.beta) or field_f.n != field_g.n:
        raise ContractViolationError("fields must share params and depth to compare")
    return all(
        bool(np.all(a <= b)) for a, b in zip(field_f.levels, field_g.levels)
    )


# -- serialization ------------------------------------------------------

CSV_HEADER = ["level", "index", "psi_left", "value"]


def field_to_csv(field: LevelField, stream=None) -> str | None:
    """Write the field as CSV rows ``level,index,psi_left,value``."""
    own = stream is None
    if own:
        stream = io.StringIO()
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    m = field.params.m
    for k, arr in enumerate(field.levels):
        denom = float(m**k)
        for j, value in enumerate(arr):
            writer.writerow([k, j, format(j / denom, ".17g"), format(float(value), ".17g")])
    if own:
        return stream.getvalue()
    return None


def field_from_csv(source, params: GameParams) -> LevelField:
    """Reload a field written by :func:`field_to_csv`."""
    text = source if isinstance(source, str) else source.read()
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows or rows[0] != CSV_HEADER:
        raise ValidationError(f"expected CSV header {','.join(CSV_HEADER)}")
    by_level: dict[int, dict[int, float]] = {}
    for row in rows[1:]:
        k, j, _, value = int(row[0]), int(row[1]), row[2], float(row[3])
        by_level.setdefault(k, {})[j] = value
    n = max(by_level)
    m = params.m
    levels = []
    for k in range(n + 1):
        entries = by_level.get(k, {})
        if len(entries) != m**k:
            raise ValidationError(f"level {k} has {len(entries)} values, expected {m**k}")
        levels.append(np.array([entries[j] for j in range(m**k)], dtype=float))
    boundary = SampledBoundary(m=m, n=n, values=levels[-1], spec=None)
    return LevelField(params=params, n=n, levels=tuple(levels), boundary=boundary)


def field_to_json_obj(field: LevelField) -> dict:
    return {
        "params": {
            "m": field.params.m,
            "alpha": field.params.alpha,
            "beta": field.params.beta,
        },
        "n": field.n,
        "levels": [[float(v) for v in arr] for arr in field.levels],
    }
