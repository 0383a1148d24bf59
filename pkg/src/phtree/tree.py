"""Exact combinatorics and geometry of the m-branching directed tree.

A vertex is a finite digit sequence over ``{0, ..., m-1}`` (the empty
sequence is the root).  Each vertex ``x`` at level ``k`` owns the closed
interval ``[psi(x), psi(x) + m**-k]`` of the unit segment, where ``psi``
sends a digit sequence to the number it expands in base ``m``.  All
geometry here is exact: interval endpoints are dyadic-style rationals
``numerator / m**level`` and distances are ``fractions.Fraction`` values.

All types are immutable; all operations are pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .capacity import check_level_size
from .errors import ValidationError


def _validate_branching(m: int) -> None:
    if not isinstance(m, int) or m < 2:
        raise ValidationError(f"branching factor m must be an integer >= 2, got {m!r}")


@dataclass(frozen=True)
class Vertex:
    """A tree vertex: branching factor plus its digit sequence from the root."""

    m: int
    digits: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        _validate_branching(self.m)
        digits = tuple(int(d) for d in self.digits)
        object.__setattr__(self, "digits", digits)
        for d in digits:
            if not 0 <= d < self.m:
                raise ValidationError(
                    f"digit {d} out of range for branching factor {self.m}"
                )

    @property
    def level(self) -> int:
        return len(self.digits)

    @property
    def index(self) -> int:
        """Lexicographic offset of this vertex within its level (base-m value)."""
        value = 0
        for d in self.digits:
            value = value * self.m + d
        return value

    def child(self, digit: int) -> "Vertex":
        return Vertex(self.m, self.digits + (int(digit),))

    def successors(self) -> tuple["Vertex", ...]:
        return tuple(self.child(d) for d in range(self.m))

    def parent(self) -> "Vertex | None":
        if not self.digits:
            return None
        return Vertex(self.m, self.digits[:-1])

    def ancestor(self, level: int) -> "Vertex":
        if not 0 <= level <= self.level:
            raise ValidationError(
                f"no ancestor at level {level} for a level-{self.level} vertex"
            )
        return Vertex(self.m, self.digits[:level])

    def is_prefix_of(self, other: "Vertex") -> bool:
        """True when `other` lies in the subtree rooted at this vertex (or equals it)."""
        if self.m != other.m:
            raise ValidationError("vertices belong to trees with different branching")
        return other.digits[: self.level] == self.digits

    def label(self) -> str:
        """Digit-string form, e.g. ``"0.2.1"``; the root is the empty string."""
        return ".".join(str(d) for d in self.digits)

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.label() or "<root>"


def root(m: int) -> Vertex:
    return Vertex(m, ())


def vertex_from_index(m: int, level: int, index: int) -> Vertex:
    """Reconstruct the digit form from the compact (level, offset) encoding."""
    _validate_branching(m)
    if level < 0 or not 0 <= index < m**level:
        raise ValidationError(f"index {index} out of range for level {level}")
    digits = [0] * level
    for pos in range(level - 1, -1, -1):
        index, digits[pos] = divmod(index, m)
    return Vertex(m, tuple(digits))


def parse_vertex(text: str, m: int) -> Vertex:
    """Parse a digit string like ``"0.2.1"`` (empty string = root)."""
    text = text.strip()
    if not text:
        return root(m)
    try:
        digits = tuple(int(part) for part in text.split("."))
    except ValueError as exc:
        raise ValidationError(f"malformed vertex label {text!r}") from exc
    return Vertex(m, digits)


@dataclass(frozen=True)
class ExactPoint:
    """The rational ``numerator / m**level``, kept exact.

    Equality is arithmetic: ``a/m**j == b/m**k`` iff ``a*m**k == b*m**j``,
    so the same point at different levels compares equal.
    """

    m: int
    numerator: int
    level: int

    def __post_init__(self) -> None:
        _validate_branching(self.m)
        if self.level < 0:
            raise ValidationError(f"level must be >= 0, got {self.level}")
        if not 0 <= self.numerator <= self.m**self.level:
            raise ValidationError(
                f"numerator {self.numerator} outside [0, {self.m}**{self.level}]"
            )

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.m**self.level)

    def as_float(self) -> float:
        return self.numerator / self.m**self.level

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ExactPoint):
            if self.m != other.m:
                return self.as_fraction() == other.as_fraction()
            return (
                self.numerator * other.m**other.level
                == other.numerator * self.m**self.level
            )
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.as_fraction())

    def __lt__(self, other: "ExactPoint | Fraction | int") -> bool:
        other_value = other.as_fraction() if isinstance(other, ExactPoint) else other
        return self.as_fraction() < other_value

    def __le__(self, other: "ExactPoint | Fraction | int") -> bool:
        other_value = other.as_fraction() if isinstance(other, ExactPoint) else other
        return self.as_fraction() <= other_value


@dataclass(frozen=True)
class Interval:
    """The closed interval ``[left, left + m**-level]`` owned by a vertex."""

    left: ExactPoint
    level: int

    @property
    def m(self) -> int:
        return self.left.m

    @property
    def width(self) -> Fraction:
        return Fraction(1, self.m**self.level)

    @property
    def right(self) -> Fraction:
        return self.left.as_fraction() + self.width

    def contains_point(self, point: "ExactPoint | Fraction") -> bool:
        value = point.as_fraction() if isinstance(point, ExactPoint) else point
        return self.left.as_fraction() <= value <= self.right

    def contains_interior(self, point: "ExactPoint | Fraction") -> bool:
        value = point.as_fraction() if isinstance(point, ExactPoint) else point
        return self.left.as_fraction() < value < self.right

    def contains_interval(self, other: "Interval") -> bool:
        return (
            self.left.as_fraction() <= other.left.as_fraction()
            and other.right <= self.right
        )

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return f"[{self.left.as_fraction()}, {self.right}]"


def psi(v: Vertex) -> ExactPoint:
    """Base-m expansion of a vertex's digits: ``sum a_j * m**-j`` exactly."""
    return ExactPoint(v.m, v.index, v.level)


def interval_of(v: Vertex) -> Interval:
    return Interval(psi(v), v.level)


def _digits_of(seq: "Vertex | Sequence[int]") -> tuple[int, ...]:
    if isinstance(seq, Vertex):
        return seq.digits
    return tuple(int(d) for d in seq)


def tree_distance(
    p: "Vertex | Sequence[int]", q: "Vertex | Sequence[int]", m: int | None = None
) -> Fraction:
    """Metric on digit sequences (finite vertices or truncated branches).

    If the sequences first differ at 1-based position K the distance is
    ``m**-(K-1)``; if one is a strict prefix of the other with common
    length K it is ``m**-K``; equal sequences are at distance 0.
    """
    if m is None:
        for seq in (p, q):
            if isinstance(seq, Vertex):
                m = seq.m
                break
    if m is None:
        raise ValidationError("branching factor m required for raw digit sequences")
    _validate_branching(m)
    a = _digits_of(p)
    b = _digits_of(q)
    for d in itertools.chain(a, b):
        if not 0 <= d < m:
            raise ValidationError(f"digit {d} out of range for branching factor {m}")
    common = min(len(a), len(b))
    for i in range(common):
        if a[i] != b[i]:
            return Fraction(1, m**i)
    if len(a) == len(b):
        return Fraction(0)
    return Fraction(1, m**common)


def enumerate_level(m: int, k: int, cap: int | None = None) -> Iterator[Vertex]:
    """Yield the ``m**k`` level-k vertices in lexicographic digit order.

    The j-th vertex yielded satisfies ``psi = j / m**k``.
    """
    _validate_branching(m)
    if k < 0:
        raise ValidationError(f"level must be >= 0, got {k}")
    check_level_size(m, k, cap)
    for digits in itertools.product(range(m), repeat=k):
        yield Vertex(m, digits)
