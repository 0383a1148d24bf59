"""Unique-continuation analysis of vertex subsets U of the tree.

The central question is whether every bounded harmonious function that
vanishes on U must vanish everywhere.  Finite computation cannot settle
an infinite-sum criterion from raw membership data alone, so the analyzer
works with structured subset descriptions (digit rules, full levels, and
gap-generated sets) for which the needed level scans collapse onto a
small digit-automaton state space, and it reports a three-valued verdict:
certified, refuted, or inconclusive at the scanned depth.

The machinery:

* ``density_check`` -- does every interval at a given resolution contain
  an image point of U under the base-m expansion map?  Failure refutes
  unique continuation outright (a two-subtree +1/-1 dipole fits in the
  gap).
* ``pa_check`` -- uniform hitting: every vertex has a U descendant within
  n levels.  Success certifies unique continuation.
* ``compute_rho`` -- the gap ladder rho_k between successive U-hitting
  levels, with the uniqueness checks (P1)/(P2) along the way.
* ``criterion_verdict`` -- decides divergence of ``sum delta**rho_k``
  for pattern-described sequences.
* ``build_counterexample`` -- for convergent patterns, the explicit
  bounded harmonious function vanishing on the generated set, with
  per-stage maxima ``M_k = prod 1/(1 - delta**rho_i)``.
* ``unboundedness_probe`` -- the same products as lower bounds forcing
  unboundedness in the divergent case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .capacity import size_cap
from .dpp import GameParams, residual_at
from .errors import (
    CapacityError,
    InsufficientDepthError,
    StructuralCheckError,
    ValidationError,
)
from .tree import Interval, Vertex, interval_of, parse_vertex

#: membership decidable at every depth
UNBOUNDED_DEPTH = 10**9

ARITHMETIC = "arithmetic"
CYCLE = "cycle"
FINITE = "finite"
GEOMETRIC = "geometric"

VERDICT_UCP = "UCP-certified"
VERDICT_NO_UCP = "no-UCP-certified"


# ----------------------------------------------------------------------
# rho sequence descriptors
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class RhoPattern:
    """An explicit prefix of gap lengths plus a continuation rule.

    Continuations: ``finite`` (no terms beyond the prefix), ``cycle``
    (repeat the prefix forever), ``arithmetic`` (keep adding ``step``),
    ``geometric`` (keep multiplying by ``step``).
    """

    prefix: tuple[int, ...]
    continuation: str = FINITE
    step: int = 0

    def __post_init__(self) -> None:
        prefix = tuple(int(r) for r in self.prefix)
        object.__setattr__(self, "prefix", prefix)
        if not prefix:
            raise ValidationError("rho pattern needs at least one explicit term")
        if any(r < 1 for r in prefix):
            raise ValidationError("rho terms must be >= 1")
        if self.continuation not in (FINITE, CYCLE, ARITHMETIC, GEOMETRIC):
            raise ValidationError(f"unknown continuation {self.continuation!r}")
        if self.continuation == ARITHMETIC and self.step < 0:
            raise ValidationError("arithmetic step must be >= 0")
        if self.continuation == GEOMETRIC and self.step < 1:
            raise ValidationError("geometric ratio must be >= 1")

    @property
    def is_finite(self) -> bool:
        return self.continuation == FINITE

    def term(self, k: int) -> int:
        """The k-th gap length, 1-based."""
        if k < 1:
            raise ValidationError(f"stage index must be >= 1, got {k}")
        n = len(self.prefix)
        if k <= n:
            return self.prefix[k - 1]
        if self.continuation == FINITE:
            raise InsufficientDepthError(
                f"rho pattern has only {n} terms, stage {k} requested"
            )
        if self.continuation == CYCLE:
            return self.prefix[(k - 1) % n]
        j = k - n
        if self.continuation == ARITHMETIC:
            return self.prefix[-1] + self.step * j
        return self.prefix[-1] * self.step**j

    def canonical_stage(self, k: int) -> int:
        """Collapse stage indices with identical futures (cyclic patterns)."""
        if self.continuation == CYCLE:
            return (k - 1) % len(self.prefix) + 1
        return k

    def terms(self, count: int) -> tuple[int, ...]:
        return tuple(self.term(k) for k in range(1, count + 1))

    def eta(self, k: int) -> int:
        return sum(self.terms(k))

    def stages_to_depth(self, depth: int) -> int:
        """Least K whose cumulative gap sum reaches `depth`."""
        total = 0
        k = 0
        while total < depth:
            k += 1
            total += self.term(k)
        return k

    @classmethod
    def coerce(cls, value) -> "RhoPattern":
        if isinstance(value, RhoPattern):
            return value
        return cls(tuple(int(r) for r in value), FINITE)

    @classmethod
    def parse(cls, text: str, default_continuation: str = CYCLE) -> "RhoPattern":
        """Parse ``"1,4,1,8"`` with optional ``;finite``/``;cycle``/``;arith=s``/``;geom=r``.

        A bare list defaults to cyclic continuation, which is what makes a
        finite descriptor denote a genuinely infinite set.
        """
        parts = [p.strip() for p in text.split(";") if p.strip()]
        if not parts:
            raise ValidationError("empty rho descriptor")
        try:
            prefix = tuple(int(p) for p in parts[0].split(","))
        except ValueError as exc:
            raise ValidationError(f"malformed rho list {parts[0]!r}") from exc
        continuation = default_continuation
        step = 0
        for suffix in parts[1:]:
            if suffix == "finite":
                continuation = FINITE
            elif suffix == "cycle":
                continuation = CYCLE
            elif suffix.startswith("arith="):
                continuation, step = ARITHMETIC, int(suffix.split("=", 1)[1])
            elif suffix.startswith("geom="):
                continuation, step = GEOMETRIC, int(suffix.split("=", 1)[1])
            else:
                raise ValidationError(f"unknown rho suffix {suffix!r}")
        return cls(prefix, continuation, step)


# ----------------------------------------------------------------------
# digit automata for membership
# ----------------------------------------------------------------------

_DEAD = "<dead>"


class _LastDigitMachine:
    level_sensitive = False
    finite_state = True

    def __init__(self, m: int, digit: int):
        self.m = m
        self.digit = digit

    def initial(self):
        return -1

    def step(self, state, digit):
        return digit

    def is_member(self, state, level) -> bool:
        return state == self.digit


class _DigitAvoidingMachine:
    level_sensitive = False
    finite_state = True

    def __init__(self, m: int, digit: int):
        self.m = m
        self.digit = digit

    def initial(self):
        return "root"

    def step(self, state, digit):
        if state == "tainted" or digit == self.digit:
            return "tainted"
        return "clean"

    def is_member(self, state, level) -> bool:
        return state == "clean"


class _FullLevelsMachine:
    level_sensitive = True
    finite_state = True

    def __init__(self, m: int, spec: "SubsetSpec"):
        self.m = m
        self._spec = spec

    def initial(self):
        return 0

    def step(self, state, digit):
        return 0

    def is_member(self, state, level) -> bool:
        return self._spec.is_full_level(level)


class _RhoGeneratedMachine:
    """Tracks (stage, offset within stage, all-distinguished-so-far,
    stage root in U); membership happens exactly at stage boundaries on
    all-distinguished paths whose stage root was not a member."""

    level_sensitive = False

    def __init__(self, m: int, pattern: RhoPattern, digit: int):
        self.m = m
        self.pattern = pattern
        self.digit = digit
        self.finite_state = pattern.continuation == CYCLE

    def initial(self):
        return (1, 0, True, False)

    def step(self, state, digit):
        k, i, all_d, prev_u = state
        rho_k = self.pattern.term(k)
        if i < rho_k:
            return (k, i + 1, all_d and digit == self.digit, prev_u)
        member_here = all_d and not prev_u
        return (
            self.pattern.canonical_stage(k + 1),
            1,
            digit == self.digit,
            member_here,
        )

    def is_member(self, state, level) -> bool:
        k, i, all_d, prev_u = state
        return i >= 1 and i == self.pattern.term(k) and all_d and not prev_u


class _ExplicitSetMachine:
    level_sensitive = False
    finite_state = True

    def __init__(self, m: int, members: frozenset[tuple[int, ...]]):
        self.m = m
        self.members = members
        prefixes = set()
        for digits in members:
            for k in range(len(digits) + 1):
                prefixes.add(digits[:k])
        self.prefixes = prefixes

    def initial(self):
        return () if self.prefixes else _DEAD

    def step(self, state, digit):
        if state == _DEAD:
            return _DEAD
        child = state + (digit,)
        return child if child in self.prefixes else _DEAD

    def is_member(self, state, level) -> bool:
        return state != _DEAD and state in self.members


class _PredicateMachine:
    level_sensitive = False
    finite_state = False

    def __init__(self, m: int, fn: Callable[[Vertex], bool]):
        self.m = m
        self.fn = fn

    def initial(self):
        return ()

    def step(self, state, digit):
        return state + (digit,)

    def is_member(self, state, level) -> bool:
        return bool(self.fn(Vertex(self.m, state)))


# ----------------------------------------------------------------------
# subset specifications
# ----------------------------------------------------------------------

KIND_PREDICATE = "predicate"
KIND_FULL_LEVELS = "full-levels"
KIND_LAST_DIGIT = "last-digit"
KIND_DIGIT_AVOIDING = "digit-avoiding"
KIND_RHO_GENERATED = "rho-generated"
KIND_EXPLICIT = "explicit"


@dataclass(frozen=True)
class SubsetSpec:
    """A membership-testable subset of the tree, trusted to `depth_bound`."""

    kind: str
    m: int
    depth_bound: int
    digit: int | None = None
    levels: tuple[int, ...] | None = None
    level_rule: str | None = None
    rho: RhoPattern | None = None
    predicate_fn: Callable[[Vertex], bool] | None = field(default=None, compare=False)
    members: frozenset[tuple[int, ...]] | None = None

    # -- constructors ---------------------------------------------------

    @classmethod
    def last_digit(cls, m: int, digit: int) -> "SubsetSpec":
        """Vertices whose final digit is `digit` (members at every level >= 1)."""
        _check_digit(m, digit)
        return cls(kind=KIND_LAST_DIGIT, m=m, depth_bound=UNBOUNDED_DEPTH, digit=digit)

    @classmethod
    def digit_avoiding(cls, m: int, digit: int) -> "SubsetSpec":
        """Vertices none of whose digits equals `digit` (a Cantor-type set)."""
        _check_digit(m, digit)
        return cls(kind=KIND_DIGIT_AVOIDING, m=m, depth_bound=UNBOUNDED_DEPTH, digit=digit)

    @classmethod
    def full_levels(
        cls, m: int, levels: Iterable[int], rule: str | None = None
    ) -> "SubsetSpec":
        """The union of complete tree levels.

        ``rule="doubling"`` continues the listed levels by repeated
        doubling, giving an unbounded family; without a rule the listed
        levels are all there is.
        """
        level_tuple = tuple(sorted({int(l) for l in levels}))
        if not level_tuple or level_tuple[0] < 1:
            raise ValidationError("full-levels needs levels >= 1")
        if rule not in (None, "doubling"):
            raise ValidationError(f"unknown full-levels rule {rule!r}")
        return cls(
            kind=KIND_FULL_LEVELS,
            m=m,
            depth_bound=UNBOUNDED_DEPTH,
            levels=level_tuple,
            level_rule=rule,
        )

    @classmethod
    def rho_generated(
        cls, m: int, rho, digit: int = 0
    ) -> "SubsetSpec":
        """The gap-generated set: below every non-member vertex at each
        stage frontier, the single all-`digit` path of the stage's gap
        length ends in a member."""
        _check_digit(m, digit)
        pattern = RhoPattern.coerce(rho)
        depth = pattern.eta(len(pattern.prefix)) if pattern.is_finite else UNBOUNDED_DEPTH
        return cls(
            kind=KIND_RHO_GENERATED, m=m, depth_bound=depth, digit=digit, rho=pattern
        )

    @classmethod
    def predicate(
        cls, m: int, fn: Callable[[Vertex], bool], depth_bound: int
    ) -> "SubsetSpec":
        if depth_bound < 1:
            raise ValidationError("predicate subsets need a positive depth bound")
        return cls(kind=KIND_PREDICATE, m=m, depth_bound=depth_bound, predicate_fn=fn)

    @classmethod
    def explicit(cls, m: int, vertices: Iterable[Vertex | tuple[int, ...]]) -> "SubsetSpec":
        members = frozenset(
            v.digits if isinstance(v, Vertex) else tuple(int(d) for d in v)
            for v in vertices
        )
        return cls(kind=KIND_EXPLICIT, m=m, depth_bound=UNBOUNDED_DEPTH, members=members)

    @classmethod
    def from_file(cls, path, m: int) -> "SubsetSpec":
        """One digit-string per line, e.g. ``0.2.1``."""
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        vertices = [parse_vertex(line, m) for line in lines if line.strip()]
        return cls.explicit(m, vertices)

    @classmethod
    def parse(cls, text: str, m: int) -> "SubsetSpec":
        """Parse a CLI set descriptor.

        Forms: ``last-digit:<d>``, ``digit-avoiding:<d>``,
        ``full-levels:<l1,l2,...>[;doubling]``,
        ``rho:<r1,r2,...>[;cycle|;finite|;arith=<s>|;geom=<r>][;digit=<d>]``.
        """
        text = text.strip()
        if ":" not in text:
            raise ValidationError(f"malformed set descriptor {text!r}")
        head, rest = text.split(":", 1)
        try:
            if head == "last-digit":
                return cls.last_digit(m, int(rest))
            if head == "digit-avoiding":
                return cls.digit_avoiding(m, int(rest))
            if head == "full-levels":
                parts = [p.strip() for p in rest.split(";") if p.strip()]
                levels = [int(x) for x in parts[0].split(",")]
                rule = None
                for suffix in parts[1:]:
                    if suffix == "doubling":
                        rule = "doubling"
                    else:
                        raise ValidationError(f"unknown full-levels suffix {suffix!r}")
                return cls.full_levels(m, levels, rule)
            if head == "rho":
                digit = 0
                parts = rest.split(";")
                kept = []
                for part in parts:
                    if part.strip().startswith("digit="):
                        digit = int(part.strip().split("=", 1)[1])
                    else:
                        kept.append(part)
                pattern = RhoPattern.parse(";".join(kept))
                return cls.rho_generated(m, pattern, digit)
        except ValidationError:
            raise
        except ValueError as exc:
            raise ValidationError(f"malformed set descriptor {text!r}") from exc
        raise ValidationError(f"unknown set descriptor kind {head!r}")

    # -- structure -------------------------------------------------------

    def machine(self):
        if self.kind == KIND_LAST_DIGIT:
            return _LastDigitMachine(self.m, self.digit)
        if self.kind == KIND_DIGIT_AVOIDING:
            return _DigitAvoidingMachine(self.m, self.digit)
        if self.kind == KIND_FULL_LEVELS:
            return _FullLevelsMachine(self.m, self)
        if self.kind == KIND_RHO_GENERATED:
            return _RhoGeneratedMachine(self.m, self.rho, self.digit)
        if self.kind == KIND_EXPLICIT:
            return _ExplicitSetMachine(self.m, self.members)
        return _PredicateMachine(self.m, self.predicate_fn)

    def contains(self, v: Vertex) -> bool:
        if v.m != self.m:
            raise ValidationError("vertex branching differs from the subset's")
        if v.level > self.depth_bound:
            raise InsufficientDepthError(
                f"membership only trusted to depth {self.depth_bound}, asked at {v.level}"
            )
        machine = self.machine()
        state = machine.initial()
        for d in v.digits:
            state = machine.step(state, d)
        return machine.is_member(state, v.level)

    def is_full_level(self, level: int) -> bool:
        if self.kind != KIND_FULL_LEVELS:
            return False
        if level in self.levels:
            return True
        if self.level_rule == "doubling" and level > self.levels[-1]:
            l = self.levels[-1]
            while l < level:
                l *= 2
            return l == level
        return False

    def next_full_level_after(self, level: int) -> int | None:
        if self.kind != KIND_FULL_LEVELS:
            return None
        for l in self.levels:
            if l > level:
                return l
        if self.level_rule == "doubling":
            l = self.levels[-1]
            while l <= level:
                l *= 2
            return l
        return None

    @property
    def max_member_level(self) -> int | None:
        """Largest member level, when finite; None for unbounded families."""
        if self.kind == KIND_EXPLICIT:
            return max((len(d) for d in self.members), default=0)
        if self.kind == KIND_FULL_LEVELS and self.level_rule is None:
            return self.levels[-1]
        if self.kind == KIND_RHO_GENERATED and self.rho.is_finite:
            return self.depth_bound
        return None


def _check_digit(m: int, digit: int) -> None:
    if not isinstance(m, int) or m < 2:
        raise ValidationError(f"branching factor m must be an integer >= 2, got {m!r}")
    if not 0 <= digit < m:
        raise ValidationError(f"digit {digit} out of range for branching {m}")


# ----------------------------------------------------------------------
# level scans over automaton state classes
# ----------------------------------------------------------------------


@dataclass
class _LevelMap:
    """All vertices of one level, grouped by (automaton state, has a member
    ancestor); each group keeps an exact count and one representative."""

    level: int
    states: dict  # (kind_state, below_member) -> [count, rep_digits]


def _initial_map(machine) -> _LevelMap:
    return _LevelMap(level=0, states={(machine.initial(), False): [1, ()]})


def _advance_map(machine, lmap: _LevelMap, cap: int) -> _LevelMap:
    new: dict = {}
    for (ks, below), (count, rep) in lmap.states.items():
        child_below = below or machine.is_member(ks, lmap.level)
        for d in range(machine.m):
            key = (machine.step(ks, d), child_below)
            entry = new.get(key)
            if entry is None:
                new[key] = [count, rep + (d,)]
            else:
                entry[0] += count
    if len(new) > cap:
        raise CapacityError(
            f"level {lmap.level + 1} scan needs {len(new)} state classes, "
            f"exceeding the size cap of {cap}"
        )
    return _LevelMap(level=lmap.level + 1, states=new)


def _min_member_offset(machine, start_states, start_level: int, max_offset: int):
    """Least offset n >= 1 at which a member is reachable from any start state.

    Returns (offset | None, definitive).  For finite automata whose
    membership does not depend on the level, a repeated reachable-state
    set with no member proves no member exists at any depth.
    """
    current = frozenset(start_states)
    seen = {current}
    use_fixpoint = machine.finite_state and not machine.level_sensitive
    n = 0
    while n < max_offset:
        n += 1
        current = frozenset(
            machine.step(ks, d) for ks in current for d in range(machine.m)
        )
        if any(machine.is_member(ks, start_level + n) for ks in current):
            return n, True
        if use_fixpoint:
            if current in seen:
                return None, True
            seen.add(current)
    return None, False


def _member_count_at_offset(machine, start_state, start_level: int, offset: int) -> int:
    counts = {start_state: 1}
    for _ in range(offset):
        new: dict = {}
        for ks, c in counts.items():
            for d in range(machine.m):
                key = machine.step(ks, d)
                new[key] = new.get(key, 0) + c
        counts = new
    return sum(
        c for ks, c in counts.items() if machine.is_member(ks, start_level + offset)
    )


def _interior_member_below(machine, start_state, start_level: int, max_offset: int):
    """Is there a member strictly below whose expansion point falls in the
    open interior of the start vertex's interval (i.e. its extension is
    not all zeros)?  Returns (found, definitive)."""
    current = frozenset({(start_state, True)})
    seen = {current}
    use_fixpoint = machine.finite_state and not machine.level_sensitive
    n = 0
    while n < max_offset:
        n += 1
        current = frozenset(
            (machine.step(ks, d), az and d == 0)
            for ks, az in current
            for d in range(machine.m)
        )
        if any(
            not az and machine.is_member(ks, start_level + n) for ks, az in current
        ):
            return True, True
        if use_fixpoint:
            if current in seen:
                return False, True
            seen.add(current)
    return False, False


# ----------------------------------------------------------------------
# density and uniform hitting
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DensityResult:
    dense_up_to: bool
    witness_gap: Interval | None
    resolution: int
    definitive: bool


#: offset budget for interior searches on machines without a finite-state
#: fixpoint argument; structured families find members within a stage or two
_DENSITY_OFFSET_LIMIT = 512


def density_check(U: SubsetSpec, resolution_level: int, cap: int | None = None) -> DensityResult:
    """Check that every interval at the given resolution contains an image
    point of U in its interior; on failure return a witness interval."""
    if resolution_level < 0:
        raise ValidationError("resolution level must be >= 0")
    if resolution_level > U.depth_bound:
        raise InsufficientDepthError(
            f"resolution {resolution_level} exceeds trusted depth {U.depth_bound}"
        )
    if U.kind == KIND_FULL_LEVELS:
        # closed form: an interior image point below a level-d vertex exists
        # iff some complete member level lies strictly deeper than d
        if U.next_full_level_after(resolution_level) is not None:
            return DensityResult(True, None, resolution_level, True)
        witness = interval_of(Vertex(U.m, (0,) * resolution_level))
        return DensityResult(False, witness, resolution_level, True)
    machine = U.machine()
    active_cap = size_cap(cap)
    lmap = _initial_map(machine)
    for _ in range(resolution_level):
        lmap = _advance_map(machine, lmap, active_cap)
    max_offset = min(U.depth_bound - resolution_level, _DENSITY_OFFSET_LIMIT)
    definitive = True
    for (ks, _below), (_count, rep) in lmap.states.items():
        found, sure = _interior_member_below(machine, ks, resolution_level, max_offset)
        if not found:
            return DensityResult(
                False, interval_of(Vertex(U.m, rep)), resolution_level, sure
            )
        definitive = definitive and sure
    return DensityResult(True, None, resolution_level, definitive)


@dataclass(frozen=True)
class PaResult:
    holds: bool
    n: int | None
    scan_depth: int
    counterexample: Vertex | None = None


def pa_check(
    U: SubsetSpec, n_max: int, scan_depth: int | None = None, cap: int | None = None
) -> PaResult:
    """Uniform hitting: from every vertex scanned, some descendant within
    n levels is a member.  Returns the least uniform n <= n_max."""
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    if scan_depth is None:
        scan_depth = min(U.depth_bound - n_max, 16)
    if scan_depth < 0 or scan_depth + n_max > U.depth_bound:
        raise InsufficientDepthError(
            f"scanning to level {scan_depth} with lookahead {n_max} exceeds "
            f"trusted depth {U.depth_bound}"
        )
    machine = U.machine()
    active_cap = size_cap(cap)
    lmap = _initial_map(machine)
    worst = 0
    for level in range(scan_depth + 1):
        for (ks, _below), (_count, rep) in lmap.states.items():
            offset, _definitive = _min_member_offset(machine, {ks}, level, n_max)
            if offset is None:
                return PaResult(
                    holds=False,
                    n=None,
                    scan_depth=scan_depth,
                    counterexample=Vertex(U.m, rep),
                )
            worst = max(worst, offset)
        if level < scan_depth:
            lmap = _advance_map(machine, lmap, active_cap)
    return PaResult(holds=True, n=worst, scan_depth=scan_depth)


# ----------------------------------------------------------------------
# the rho ladder
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class UcpReport:
    """Ledger of the structural analysis: the rho ladder, partial sums,
    uniqueness checks, and (after analysis) density/hitting evidence plus
    the final three-valued verdict."""

    m: int
    rho: tuple[int, ...]
    eta: tuple[int, ...]
    partial_sum: float
    p1_ok: bool | None
    p2_ok: bool | None
    p2_failed_stages: tuple[int, ...]
    quantifier_divergence: tuple[int, ...]
    frontier_empty_at: int | None
    ladder_terminated: bool
    inconclusive_ladder: bool
    depth_scanned: int
    notes: tuple[str, ...]
    density: DensityResult | None = None
    pa: PaResult | None = None
    verdict: str | None = None
    verdict_reason: str = ""

    def to_json_obj(self) -> dict:
        return {
            "m": self.m,
            "rho": list(self.rho),
            "eta": list(self.eta),
            "partial_sum": self.partial_sum,
            "p1_ok": self.p1_ok,
            "p2_ok": self.p2_ok,
            "p2_failed_stages": list(self.p2_failed_stages),
            "quantifier_divergence": list(self.quantifier_divergence),
            "frontier_empty_at": self.frontier_empty_at,
            "ladder_terminated": self.ladder_terminated,
            "inconclusive_ladder": self.inconclusive_ladder,
            "depth_scanned": self.depth_scanned,
            "density_dense": None if self.density is None else self.density.dense_up_to,
            "density_witness": (
                None
                if self.density is None or self.density.witness_gap is None
                else {
                    "left": self.density.witness_gap.left.as_float(),
                    "right": float(self.density.witness_gap.right),
                }
            ),
            "pa_holds": None if self.pa is None else self.pa.holds,
            "pa_n": None if self.pa is None else self.pa.n,
            "verdict": self.verdict,
            "verdict_reason": self.verdict_reason,
            "notes": list(self.notes),
        }


#: ceiling on single-stage probes when the trusted depth is unbounded
_RHO_PROBE_LIMIT = 65536


def compute_rho(
    U: SubsetSpec, params: GameParams, k_max: int, cap: int | None = None
) -> UcpReport:
    """Compute the gap ladder rho_1..rho_K (K <= k_max) with its checks.

    rho_1 is the first level meeting U; later gaps are the least offsets
    at which some non-member frontier vertex has a member descendant.
    (P1) asks for a unique member at level rho_1; (P2) asks, per frontier
    vertex untouched by earlier members, for a unique member at the next
    gap.  Violations are recorded and the ladder continues for
    diagnostics.
    """
    if params.m != U.m:
        raise ValidationError("params branching factor differs from the subset's")
    if k_max < 0:
        raise ValidationError("k_max must be >= 0")
    machine = U.machine()
    active_cap = size_cap(cap)
    delta = params.delta

    lmap = _initial_map(machine)
    rho: list[int] = []
    eta: list[int] = []
    notes: list[str] = []
    p1_ok: bool | None = None
    p2_ok: bool | None = None
    p2_failed: list[int] = []
    divergence: list[int] = []
    frontier_empty_at: int | None = None
    terminated = False
    inconclusive = False

    if machine.is_member(machine.initial(), 0):
        notes.append("the root itself is a member; ladder starts at level 1")

    for k in range(1, k_max + 1):
        base = lmap.level
        if k == 1:
            eligible = list(lmap.states.items())
        else:
            eligible = [
                (key, entry)
                for key, entry in lmap.states.items()
                if not machine.is_member(key[0], base)
            ]
            if not eligible:
                frontier_empty_at = base
                notes.append(f"level {base} is fully contained in U")
                break
        a_k = [
            (key[0], entry[1])
            for key, entry in eligible
            if not key[1] and not machine.is_member(key[0], base)
        ]
        probe = frozenset(key[0] for key, _entry in eligible)
        probe_seen = {probe}
        use_fixpoint = machine.finite_state and not machine.level_sensitive
        max_probe = min(U.depth_bound - base, _RHO_PROBE_LIMIT)

        offset = None
        steps = 0
        while steps < max_probe:
            steps += 1
            lmap = _advance_map(machine, lmap, active_cap)
            probe = frozenset(
                machine.step(ks, d) for ks in probe for d in range(machine.m)
            )
            if any(machine.is_member(ks, base + steps) for ks in probe):
                offset = steps
                break
            if use_fixpoint:
                if probe in probe_seen:
                    terminated = True
                    break
                probe_seen.add(probe)
        if offset is None:
            if terminated:
                notes.append(
                    f"no members exist below the level-{base} frontier at any depth"
                )
            else:
                inconclusive = True
                notes.append(
                    f"no member found below level {base} within the trusted depth"
                )
            break

        rho.append(offset)
        eta.append(base + offset)
        if k == 1:
            total = sum(
                entry[0]
                for key, entry in lmap.states.items()
                if machine.is_member(key[0], lmap.level)
            )
            p1_ok = total == 1
            if not p1_ok:
                notes.append(f"{total} members at level {eta[0]}, so (P1) fails")
        else:
            counts = {
                ks: _member_count_at_offset(machine, ks, base, offset)
                for ks, _rep in a_k
            }
            if counts:
                stage_ok = all(c == 1 for c in counts.values())
                if not stage_ok:
                    p2_failed.append(k)
                if all(c == 0 for c in counts.values()):
                    # the witness for this gap lives below a frontier vertex
                    # that already sits under an earlier member
                    divergence.append(k)
            else:
                notes.append(f"stage {k} has an empty untouched frontier")
    if len(rho) >= 2:
        p2_ok = not p2_failed

    return UcpReport(
        m=U.m,
        rho=tuple(rho),
        eta=tuple(eta),
        partial_sum=math.fsum(delta**r for r in rho),
        p1_ok=p1_ok,
        p2_ok=p2_ok,
        p2_failed_stages=tuple(p2_failed),
        quantifier_divergence=tuple(divergence),
        frontier_empty_at=frontier_empty_at,
        ladder_terminated=terminated,
        inconclusive_ladder=inconclusive,
        depth_scanned=lmap.level,
        notes=tuple(notes),
    )


# ----------------------------------------------------------------------
# the series criterion
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CriterionVerdict:
    diverges: bool | None
    partial_sum: float
    limit_sum: float | None
    reason: str


def criterion_verdict(
    rho_pattern, params: GameParams | None = None, delta: float | None = None
) -> CriterionVerdict:
    """Decide whether ``sum_k delta**rho_k`` diverges for a described sequence.

    Explicit finite lists are undecidable (returns unknown with the
    partial sum); any infinitely repeated finite value forces divergence;
    arithmetic or geometric growth gives a convergent tail with a
    computable limit.
    """
    if delta is None:
        if params is None:
            raise ValidationError("need params or an explicit delta")
        delta = params.delta
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie strictly between 0 and 1, got {delta}")
    pattern = RhoPattern.coerce(rho_pattern)
    partial = math.fsum(delta**r for r in pattern.prefix)
    if pattern.continuation == FINITE:
        return CriterionVerdict(
            diverges=None,
            partial_sum=partial,
            limit_sum=None,
            reason="finite data cannot decide an infinite sum",
        )
    constant_tail = (pattern.continuation == ARITHMETIC and pattern.step == 0) or (
        pattern.continuation == GEOMETRIC and pattern.step == 1
    )
    if pattern.continuation == CYCLE or constant_tail:
        repeated = (
            min(pattern.prefix) if pattern.continuation == CYCLE else pattern.prefix[-1]
        )
        return CriterionVerdict(
            diverges=True,
            partial_sum=partial,
            limit_sum=math.inf,
            reason=(
                f"the value {repeated} recurs infinitely often, so the terms "
                f"delta**{repeated} alone sum to infinity"
            ),
        )
    last = pattern.prefix[-1]
    if pattern.continuation == ARITHMETIC:
        ratio = delta**pattern.step
        tail = delta**last * ratio / (1.0 - ratio)
        return CriterionVerdict(
            diverges=False,
            partial_sum=partial,
            limit_sum=partial + tail,
            reason=f"gaps grow by {pattern.step} per stage; geometric tail converges",
        )
    # geometric growth: terms decay doubly exponentially
    tail = 0.0
    exponent = last
    while True:
        exponent *= pattern.step
        term = delta**exponent if exponent * math.log(delta) > -745 else 0.0
        if term < 1e-18:
            break
        tail += term
    return CriterionVerdict(
        diverges=False,
        partial_sum=partial,
        limit_sum=partial + tail,
        reason=f"gaps grow geometrically by factor {pattern.step}; tail converges",
    )


# ----------------------------------------------------------------------
# the explicit bounded counterexample
# ----------------------------------------------------------------------


class CounterexampleField:
    """The bounded harmonious function vanishing on a gap-generated set.

    Stage k replaces the constant region of height ``M_{k-1}`` below each
    untouched frontier vertex with: a distinguished path whose values
    ``M_k * (1 - delta**(rho_k - i))`` descend to 0 at the member vertex,
    and constant off-path subtrees at the new height
    ``M_k = M_{k-1} / (1 - delta**rho_k)``.  Values are computed lazily
    from the stage structure; nothing is materialised per vertex.
    """

    def __init__(
        self, pattern: RhoPattern, params: GameParams, depth: int, digit: int = 0
    ):
        _check_digit(params.m, digit)
        if depth < 1:
            raise ValidationError("depth must be >= 1")
        self.pattern = pattern
        self.params = params
        self.digit = digit
        self.depth = depth
        self._delta = params.delta
        self._rho: list[int] = []
        self._eta: list[int] = [0]
        self._maxima: list[float] = [1.0]  # M_0 = 1 at index 0
        self._ensure_depth(depth)
        self.stages = self.pattern.stages_to_depth(depth)

    def _ensure_depth(self, level: int) -> None:
        while self._eta[-1] < level:
            k = len(self._rho) + 1
            r = self.pattern.term(k)
            self._rho.append(r)
            self._eta.append(self._eta[-1] + r)
            self._maxima.append(self._maxima[-1] / (1.0 - self._delta**r))

    @property
    def rho_terms(self) -> tuple[int, ...]:
        return tuple(self._rho[: self.stages])

    @property
    def eta(self) -> tuple[int, ...]:
        return tuple(self._eta[1 : self.stages + 1])

    @property
    def stage_maxima(self) -> tuple[float, ...]:
        """M_1..M_K for the stages covering the built depth."""
        return tuple(self._maxima[1 : self.stages + 1])

    @property
    def max_built_value(self) -> float:
        return self._maxima[self.stages]

    def subset(self) -> SubsetSpec:
        """The generated set this field vanishes on."""
        return SubsetSpec.rho_generated(self.params.m, self.pattern, self.digit)

    def value(self, v: Vertex) -> float:
        if v.m != self.params.m:
            raise ValidationError("vertex branching differs from the field's")
        self._ensure_depth(v.level)
        digits = v.digits
        k = 1
        while True:
            start, end = self._eta[k - 1], self._eta[k]
            if len(digits) <= start:
                return self._maxima[k - 1]
            segment = digits[start : min(len(digits), end)]
            branch = next(
                (i for i, d in enumerate(segment, 1) if d != self.digit), None
            )
            if branch is None:
                if len(digits) >= end:
                    # at or strictly below the stage's member vertex
                    return 0.0
                i = len(digits) - start
                r = self._rho[k - 1]
                return self._maxima[k] * (1.0 - self._delta ** (r - i))
            if len(digits) <= end:
                return self._maxima[k]
            k += 1

    __call__ = value

    # -- verification ---------------------------------------------------

    def _classify(self, digits: tuple[int, ...]):
        """Self-similarity class of a vertex; values and whole subtrees
        coincide within a class, so one representative per class covers
        every vertex of its level."""
        self._ensure_depth(len(digits))
        k = 1
        while True:
            start, end = self._eta[k - 1], self._eta[k]
            if len(digits) <= start:
                return ("frontier", k)
            segment = digits[start : min(len(digits), end)]
            branch = next(
                (i for i, d in enumerate(segment, 1) if d != self.digit), None
            )
            if branch is None:
                if len(digits) >= end:
                    return ("zero",)
                return ("path", k, len(digits) - start)
            if len(digits) <= end:
                return ("const", k, len(digits) - start)
            k += 1

    def class_representatives(self, max_level: int):
        """One representative vertex per (level, class), levels 0..max_level."""
        current: dict = {("frontier", 1): ()}
        yield 0, dict(current)
        for level in range(1, max_level + 1):
            nxt: dict = {}
            for rep in current.values():
                for d in range(self.params.m):
                    child = rep + (d,)
                    tag = self._classify(child)
                    if tag not in nxt:
                        nxt[tag] = child
            current = nxt
            yield level, dict(current)

    def residual_certificate(self, max_level: int | None = None) -> "ResidualCertificate":
        """Max operator residual over all vertices up to `max_level`.

        The walk visits one representative per self-similarity class and
        level; since the field value of every vertex (and of its whole
        subtree) depends only on its class, the per-class residuals cover
        every vertex of the scanned levels exactly.

        Residuals at level L need values at L+1, so for a strictly finite
        gap pattern the certificate reaches at most one level short of the
        built depth.
        """
        if max_level is None:
            max_level = self.depth if not self.pattern.is_finite else self.depth - 1
        worst = 0.0
        worst_vertex = Vertex(self.params.m, ())
        classes = 0
        for level, reps in self.class_representatives(max_level):
            for rep in reps.values():
                classes += 1
                r = residual_at(self.value, Vertex(self.params.m, rep), self.params).value
                if abs(r) > worst:
                    worst = abs(r)
                    worst_vertex = Vertex(self.params.m, rep)
        return ResidualCertificate(
            max_abs_residual=worst,
            worst_vertex=worst_vertex,
            levels_covered=max_level,
            classes_checked=classes,
        )


@dataclass(frozen=True)
class ResidualCertificate:
    max_abs_residual: float
    worst_vertex: Vertex
    levels_covered: int
    classes_checked: int


def build_counterexample(
    rho, params: GameParams, depth: int, digit: int = 0
) -> CounterexampleField:
    """Build the bounded vanishing-on-U field for a convergent gap pattern.

    Refused when the series criterion diverges (no bounded counterexample
    exists) or cannot be decided from the descriptor.
    """
    pattern = RhoPattern.coerce(rho)
    verdict = criterion_verdict(pattern, params=params)
    if verdict.diverges is True:
        raise StructuralCheckError(
            "the gap series diverges: every bounded harmonious function "
            "vanishing on this set vanishes everywhere, so no counterexample exists"
        )
    if verdict.diverges is None:
        raise StructuralCheckError(
            "cannot certify convergence of the gap series from a bare finite "
            "list; describe the continuation (cycle/arith/geom)"
        )
    return CounterexampleField(pattern, params, depth, digit)


def unboundedness_probe(
    U: SubsetSpec, params: GameParams, k_stages: int, cap: int | None = None
) -> tuple[float, ...]:
    """Per-stage lower bounds ``M_k = prod 1/(1 - delta**rho_i)`` forcing
    any nonzero vanishing-on-U harmonious function to be unbounded when
    the gap series diverges.  Requires the uniqueness checks to hold."""
    if k_stages < 0:
        raise ValidationError("number of stages must be >= 0")
    if k_stages == 0:
        return ()
    report = compute_rho(U, params, k_max=k_stages, cap=cap)
    if len(report.rho) < k_stages:
        raise StructuralCheckError(
            f"only {len(report.rho)} ladder stages are available "
            f"(requested {k_stages})"
        )
    if report.p1_ok is not True:
        raise StructuralCheckError("the first-stage uniqueness check (P1) failed")
    if k_stages >= 2 and report.p2_ok is not True:
        raise StructuralCheckError("the per-frontier uniqueness check (P2) failed")
    delta = params.delta
    bounds = []
    product = 1.0
    for r in report.rho[:k_stages]:
        product /= 1.0 - delta**r
        bounds.append(product)
    return tuple(bounds)


# ----------------------------------------------------------------------
# the full analysis
# ----------------------------------------------------------------------


def analyze(
    U: SubsetSpec,
    params: GameParams,
    k_max: int = 6,
    resolution: int = 3,
    pa_n_max: int = 6,
    pa_scan_depth: int | None = None,
    cap: int | None = None,
) -> UcpReport:
    """Run the structural ladder, density, and hitting checks, then assemble
    a three-valued verdict with the certifying mechanism spelled out."""
    report = compute_rho(U, params, k_max, cap)
    notes = list(report.notes)

    # bounded families provably lose density just past their deepest member
    effective_resolution = resolution
    if U.max_member_level is not None:
        effective_resolution = max(resolution, U.max_member_level + 1)
    effective_resolution = min(effective_resolution, U.depth_bound)
    density = density_check(U, effective_resolution, cap)

    pa = None
    try:
        pa = pa_check(U, pa_n_max, pa_scan_depth, cap)
    except InsufficientDepthError:
        notes.append("hitting check skipped: trusted depth too small")

    verdict: str | None = None
    reason = ""
    if U.kind == KIND_FULL_LEVELS and U.level_rule is not None:
        verdict = VERDICT_UCP
        reason = (
            "complete member levels recur unboundedly; a vanishing function "
            "propagates zero upward from each and is squeezed between them"
        )
    elif density.definitive and not density.dense_up_to:
        verdict = VERDICT_NO_UCP
        reason = (
            "image of U misses an interval: a bounded +1/-1 two-subtree field "
            "inside the gap vanishes on U but not everywhere"
        )
    elif (
        U.rho is not None
        and not U.rho.is_finite
        and report.p1_ok is True
        and report.p2_ok is True
        and density.dense_up_to
        and report.frontier_empty_at is None
    ):
        series = criterion_verdict(U.rho, params=params)
        if series.diverges is True:
            verdict = VERDICT_UCP
            reason = f"gap series diverges: {series.reason}"
        elif series.diverges is False:
            verdict = VERDICT_NO_UCP
            reason = (
                f"gap series converges (limit {series.limit_sum:.6g}): the "
                f"explicit bounded construction vanishes on U but not everywhere"
            )
    if verdict is None and pa is not None and pa.holds:
        verdict = VERDICT_UCP
        reason = f"every scanned vertex has a member descendant within {pa.n} levels"
    if verdict is None:
        depth = max(report.depth_scanned, effective_resolution)
        verdict = f"inconclusive-at-depth-{depth}"
        reason = "finite-depth evidence does not decide unique continuation"

    return UcpReport(
        m=report.m,
        rho=report.rho,
        eta=report.eta,
        partial_sum=report.partial_sum,
        p1_ok=report.p1_ok,
        p2_ok=report.p2_ok,
        p2_failed_stages=report.p2_failed_stages,
        quantifier_divergence=report.quantifier_divergence,
        frontier_empty_at=report.frontier_empty_at,
        ladder_terminated=report.ladder_terminated,
        inconclusive_ladder=report.inconclusive_ladder,
        depth_scanned=report.depth_scanned,
        notes=tuple(notes),
        density=density,
        pa=pa,
        verdict=verdict,
        verdict_reason=reason,
    )
