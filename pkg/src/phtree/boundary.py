"""Boundary data F on the unit interval and its per-level discretisation.

Builtin families (identity, centred square, constants) are evaluated
exactly; tabulated data is completed to a continuous function by
piecewise-linear interpolation between samples, which makes its Lipschitz
constant computable from the sample slopes.  ``sample_Fn`` produces the
flat array of left-endpoint samples ``F(j / m**n)`` that seeds the solver.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .capacity import check_level_size
from .errors import DomainError, UnsupportedError, ValidationError

KIND_LINEAR = "builtin-linear"
KIND_QUADRATIC = "builtin-quadratic-centered"
KIND_CONSTANT = "builtin-constant"
KIND_TABULATED = "tabulated"


@dataclass(frozen=True)
class BoundarySpec:
    """Description of boundary data F: [0, 1] -> R with continuity metadata.

    ``lipschitz_bound`` may be None to signal that no certified modulus is
    available (the solver then falls back to empirical Cauchy stopping).
    """

    kind: str
    value: float = 0.0
    ts: tuple[float, ...] | None = None
    vs: tuple[float, ...] | None = None
    lipschitz_bound: float | None = None
    sup_norm: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in (KIND_LINEAR, KIND_QUADRATIC, KIND_CONSTANT, KIND_TABULATED):
            raise ValidationError(f"unknown boundary kind {self.kind!r}")
        if self.kind == KIND_TABULATED:
            if not self.ts or not self.vs or len(self.ts) != len(self.vs):
                raise ValidationError("tabulated boundary needs matching t/value samples")
            if len(self.ts) < 2:
                raise ValidationError("tabulated boundary needs at least two samples")
            ts = self.ts
            if ts[0] != 0.0 or ts[-1] != 1.0:
                raise ValidationError("tabulated samples must include t=0 and t=1")
            for a, b in zip(ts, ts[1:]):
                if not a < b:
                    raise ValidationError("tabulated t values must be strictly increasing")
            if any(t < 0.0 or t > 1.0 for t in ts):
                raise ValidationError("tabulated t values must lie in [0, 1]")
        if self.lipschitz_bound is not None and self.lipschitz_bound < 0:
            raise ValidationError("lipschitz_bound must be >= 0")

    # -- constructors -------------------------------------------------

    @classmethod
    def linear(cls) -> "BoundarySpec":
        """F(t) = t."""
        return cls(kind=KIND_LINEAR, lipschitz_bound=1.0, sup_norm=1.0)

    @classmethod
    def quadratic_centered(cls) -> "BoundarySpec":
        """F(t) = (t - 1/2)**2."""
        return cls(kind=KIND_QUADRATIC, lipschitz_bound=1.0, sup_norm=0.25)

    @classmethod
    def constant(cls, c: float) -> "BoundarySpec":
        return cls(kind=KIND_CONSTANT, value=float(c), lipschitz_bound=0.0, sup_norm=abs(float(c)))

    @classmethod
    def tabulated(
        cls,
        ts,
        vs,
        lipschitz_bound: "float | None | str" = "auto",
    ) -> "BoundarySpec":
        """Piecewise-linear completion of (t, value) samples.

        With ``lipschitz_bound="auto"`` (the default) the exact Lipschitz
        constant of the interpolant, the maximal sample slope, is stored.
        Pass None to deliberately drop the metadata.
        """
        ts = tuple(float(t) for t in ts)
        vs = tuple(float(v) for v in vs)
        if lipschitz_bound == "auto":
            if len(ts) != len(vs) or len(ts) < 2:
                raise ValidationError("tabulated boundary needs matching t/value samples")
            slopes = [
                abs(v1 - v0) / (t1 - t0)
                for (t0, t1, v0, v1) in zip(ts, ts[1:], vs, vs[1:])
                if t1 > t0
            ]
            lipschitz_bound = max(slopes) if slopes else 0.0
        return cls(
            kind=KIND_TABULATED,
            ts=ts,
            vs=vs,
            lipschitz_bound=lipschitz_bound,
            sup_norm=max(abs(v) for v in vs),
        )

    @classmethod
    def from_csv(cls, source) -> "BoundarySpec":
        """Load tabulated samples from CSV with header ``t,value``."""
        if isinstance(source, (str, Path)):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = source.read()
        reader = csv.reader(io.StringIO(text))
        rows = [row for row in reader if row]
        if not rows or [h.strip() for h in rows[0]] != ["t", "value"]:
            raise ValidationError('tabulated CSV must start with header "t,value"')
        ts, vs = [], []
        for row in rows[1:]:
            if len(row) != 2:
                raise ValidationError(f"malformed CSV row {row!r}")
            ts.append(float(row[0]))
            vs.append(float(row[1]))
        return cls.tabulated(ts, vs)

    @classmethod
    def parse(cls, text: str) -> "BoundarySpec":
        """Parse a CLI boundary descriptor.

        Accepts "linear", "quadratic-centered", "constant:<c>", or a path
        to a CSV file of samples.
        """
        text = text.strip()
        if text == "linear":
            return cls.linear()
        if text == "quadratic-centered":
            return cls.quadratic_centered()
        if text.startswith("constant:"):
            try:
                return cls.constant(float(text.split(":", 1)[1]))
            except ValueError as exc:
                raise ValidationError(f"malformed constant boundary {text!r}") from exc
        path = Path(text)
        if path.exists():
            return cls.from_csv(path)
        raise ValidationError(
            f"unknown boundary {text!r}: expected linear, quadratic-centered, "
            f"constant:<c>, or a CSV file path"
        )


def eval_F(spec: BoundarySpec, t):
    """Evaluate F at a scalar or array of points in [0, 1]."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"boundary data is defined on [0, 1]; got {t}")
    if spec.kind == KIND_LINEAR:
        out = arr
    elif spec.kind == KIND_QUADRATIC:
        out = (arr - 0.5) ** 2
    elif spec.kind == KIND_CONSTANT:
        out = np.full_like(arr, spec.value)
    else:
        out = np.interp(arr, spec.ts, spec.vs)
    if np.isscalar(t) or arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class SampledBoundary:
    """Left-endpoint samples ``values[j] = F(j / m**n)`` for one level."""

    m: int
    n: int
    values: np.ndarray = field(repr=False)
    spec: BoundarySpec | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (self.m**self.n,):
            raise ValidationError(
                f"expected {self.m**self.n} samples at level {self.n}, got {values.shape}"
            )


def sample_Fn(spec: BoundarySpec, m: int, n: int, cap: int | None = None) -> SampledBoundary:
    """Sample F at the level-n left endpoints ``j / m**n``."""
    if n < 0:
        raise ValidationError(f"level must be >= 0, got {n}")
    count = check_level_size(m, n, cap)
    t = np.arange(count, dtype=float) / float(m**n)
    return SampledBoundary(m=m, n=n, values=np.asarray(eval_F(spec, t), dtype=float), spec=spec)


def modulus_bound(spec: BoundarySpec, scale: float) -> float:
    """Upper bound for ``sup |F(x) - F(y)|`` over ``|x - y| <= scale``."""
    if scale <= 0:
        raise ValidationError(f"scale must be positive, got {scale}")
    if spec.lipschitz_bound is not None:
        return spec.lipschitz_bound * scale
    if spec.kind == KIND_TABULATED:
        # interpolant's exact Lipschitz constant from the sample slopes
        slopes = [
            abs(v1 - v0) / (t1 - t0)
            for (t0, t1, v0, v1) in zip(spec.ts, spec.ts[1:], spec.vs, spec.vs[1:])
        ]
        return (max(slopes) if slopes else 0.0) * scale
    raise UnsupportedError(
        f"no continuity metadata for boundary kind {spec.kind!r}"
    )
