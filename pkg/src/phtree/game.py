"""Monte Carlo tug-of-war plays on the tree.

Each step of a play flips a biased coin: with probability alpha a fair
coin hands the move to Player I or Player II (whose strategy picks a
successor), and with probability beta the token moves to a uniformly
random successor.  The infinite game is truncated at a configurable depth
N and paid off with ``F(psi(x_N))``; every branch extension of ``x_N``
stays within tree distance ``m**-N``, so :func:`truncation_error` turns
the boundary modulus at that scale into a rigorous payoff uncertainty.

Randomness contract: ``estimate_value`` draws all coin, turn, and random-
move variates as ``(plays, depth)`` blocks from ``default_rng(master_seed)``
in a fixed order; play p consumes row p, so each play's stream is a fixed
function of (master_seed, play index) and estimates are reproducible
bit-for-bit.  Means and standard errors use numpy's pairwise summation,
so merging is order-independent at the 1e-12 level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import BoundarySpec, eval_F, modulus_bound
from .dpp import GameParams
from .errors import ValidationError
from .solver import LevelField
from .tree import Vertex

TAG_PLAYER_I = "player-I"
TAG_PLAYER_II = "player-II"
TAG_RANDOM = "random"


class Strategy:
    """A deterministic rule mapping a play history to a successor index.

    Builtins are Markov (they only look at the last vertex), but `choose`
    receives the whole history so custom history-dependent strategies fit
    the same interface.  Subclasses may provide `choose_batch` for the
    vectorised estimator; those without it are called play by play.
    """

    def choose(self, history: tuple[Vertex, ...]) -> int:
        raise NotImplementedError

    choose_batch = None  # type: ignore[assignment]


class GreedyMaxStrategy(Strategy):
    """Step to an argmax of the advice field over the successors.

    Ties break to the lowest successor index (fixed for reproducibility).
    """

    def __init__(self, advice: LevelField):
        self.advice = advice

    def choose(self, history: tuple[Vertex, ...]) -> int:
        v = history[-1]
        values = [self.advice.value(y) for y in v.successors()]
        return int(np.argmax(values))

    def choose_batch(self, level: int, indices: np.ndarray) -> np.ndarray:
        return _greedy_batch(self.advice, level, indices, maximize=True)


class GreedyMinStrategy(Strategy):
    """Step to an argmin of the advice field (lowest index on ties)."""

    def __init__(self, advice: LevelField):
        self.advice = advice

    def choose(self, history: tuple[Vertex, ...]) -> int:
        v = history[-1]
        values = [self.advice.value(y) for y in v.successors()]
        return int(np.argmin(values))

    def choose_batch(self, level: int, indices: np.ndarray) -> np.ndarray:
        return _greedy_batch(self.advice, level, indices, maximize=False)


def _greedy_batch(
    advice: LevelField, level: int, indices: np.ndarray, maximize: bool
) -> np.ndarray:
    m = advice.params.m
    if level + 1 > advice.n:
        # advice is constant on subtrees below its depth: every move ties,
        # and ties break to index 0
        return np.zeros(indices.shape, dtype=np.int64)
    child_values = advice.levels[level + 1][
        indices[:, None] * m + np.arange(m)[None, :]
    ]
    picker = np.argmax if maximize else np.argmin
    return picker(child_values, axis=1).astype(np.int64)


class FixedDigitStrategy(Strategy):
    """Always extend by the same digit."""

    def __init__(self, digit: int, m: int):
        if not 0 <= digit < m:
            raise ValidationError(f"digit {digit} out of range for branching {m}")
        self.digit = int(digit)
        self.m = m

    def choose(self, history: tuple[Vertex, ...]) -> int:
        return self.digit

    def choose_batch(self, level: int, indices: np.ndarray) -> np.ndarray:
        return np.full(indices.shape, self.digit, dtype=np.int64)


class UniformRandomStrategy(Strategy):
    """Seeded uniform moves, derived statelessly from (seed, step, position).

    Stateless derivation keeps the strategy a pure function of the history,
    so shared instances stay safe under concurrent plays.
    """

    def __init__(self, seed: int, m: int):
        self.seed = int(seed)
        self.m = m

    def choose(self, history: tuple[Vertex, ...]) -> int:
        step = len(history) - 1
        rng = np.random.default_rng((self.seed, step) + history[-1].digits)
        return int(rng.integers(self.m))


def strategy_from_name(name: str, m: int, advice: LevelField | None) -> Strategy:
    """Build a strategy from a CLI descriptor."""
    name = name.strip()
    if name == "greedy-max" or name == "greedy-min":
        if advice is None:
            raise ValidationError(f"strategy {name!r} needs an advice field")
        return GreedyMaxStrategy(advice) if name == "greedy-max" else GreedyMinStrategy(advice)
    if name.startswith("fixed:"):
        return FixedDigitStrategy(int(name.split(":", 1)[1]), m)
    if name.startswith("random:"):
        return UniformRandomStrategy(int(name.split(":", 1)[1]), m)
    raise ValidationError(
        f"unknown strategy {name!r}: expected greedy-max, greedy-min, "
        f"fixed:<digit>, or random:<seed>"
    )


@dataclass(frozen=True)
class PlayRecord:
    """One truncated play: the visited path, per-step move tags, and payoff."""

    path: tuple[Vertex, ...]
    coin_outcomes: tuple[str, ...]
    payoff: float
    truncation_depth: int


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    plays: int
    params: GameParams
    truncation_depth: int


def play_once(
    x0: Vertex,
    strategy_i: Strategy,
    strategy_ii: Strategy,
    spec: BoundarySpec,
    params: GameParams,
    depth: int,
    rng_seed,
) -> PlayRecord:
    """Run a single seeded play of `depth` steps starting at `x0`."""
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    if x0.m != params.m:
        raise ValidationError("starting vertex and params disagree on branching")
    rng = np.random.default_rng(rng_seed)
    path = [x0]
    tags: list[str] = []
    for _ in range(depth):
        if rng.random() < params.alpha:
            if rng.random() < 0.5:
                tags.append(TAG_PLAYER_I)
                digit = strategy_i.choose(tuple(path))
            else:
                tags.append(TAG_PLAYER_II)
                digit = strategy_ii.choose(tuple(path))
        else:
            tags.append(TAG_RANDOM)
            digit = int(rng.integers(params.m))
        path.append(path[-1].child(digit))
    final = path[-1]
    payoff = float(eval_F(spec, final.index / params.m**final.level))
    return PlayRecord(
        path=tuple(path),
        coin_outcomes=tuple(tags),
        payoff=payoff,
        truncation_depth=depth,
    )


@dataclass(frozen=True)
class SimulationBatch:
    payoffs: np.ndarray
    moves_player_i: int
    moves_player_ii: int
    moves_random: int


def simulate_batch(
    x0: Vertex,
    strategy_i: Strategy,
    strategy_ii: Strategy,
    spec: BoundarySpec,
    params: GameParams,
    depth: int,
    plays: int,
    master_seed,
) -> SimulationBatch:
    """Advance `plays` independent plays in lockstep and collect payoffs."""
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    if plays < 1:
        raise ValidationError(f"plays must be >= 1, got {plays}")
    if x0.m != params.m:
        raise ValidationError("starting vertex and params disagree on branching")
    m = params.m
    final_level = x0.level + depth
    if final_level * math.log2(m) >= 62:
        raise ValidationError(
            f"depth {depth} from level {x0.level} overflows exact 64-bit indices "
            f"at branching {m}; reduce the truncation depth"
        )
    rng = np.random.default_rng(master_seed)
    coin = rng.random((plays, depth))
    turn = rng.random((plays, depth))
    random_digits = rng.integers(0, m, size=(plays, depth), dtype=np.int64)

    batched = all(
        s.choose_batch is not None for s in (strategy_i, strategy_ii)
    )
    digit_history = None if batched else np.zeros((plays, depth), dtype=np.int64)

    indices = np.full(plays, x0.index, dtype=np.int64)
    n_i = n_ii = n_rand = 0
    for step in range(depth):
        level = x0.level + step
        competitive = coin[:, step] < params.alpha
        to_i = competitive & (turn[:, step] < 0.5)
        to_ii = competitive & ~to_i
        digits = random_digits[:, step].copy()
        for mask, strat in ((to_i, strategy_i), (to_ii, strategy_ii)):
            if not mask.any():
                continue
            if strat.choose_batch is not None:
                digits[mask] = strat.choose_batch(level, indices[mask])
            else:
                for p in np.nonzero(mask)[0]:
                    history = _rebuild_history(x0, digit_history[p, :step])
                    digits[p] = strat.choose(history)
        if digit_history is not None:
            digit_history[:, step] = digits
        indices = indices * m + digits
        n_i += int(to_i.sum())
        n_ii += int(to_ii.sum())
        n_rand += int((~competitive).sum())

    t = indices / float(m**final_level)
    payoffs = np.asarray(eval_F(spec, t), dtype=float)
    return SimulationBatch(
        payoffs=payoffs,
        moves_player_i=n_i,
        moves_player_ii=n_ii,
        moves_random=n_rand,
    )


def _rebuild_history(x0: Vertex, digits: np.ndarray) -> tuple[Vertex, ...]:
    history = [x0]
    for d in digits:
        history.append(history[-1].child(int(d)))
    return tuple(history)


def estimate_value(
    x0: Vertex,
    strategy_i: Strategy,
    strategy_ii: Strategy,
    spec: BoundarySpec,
    params: GameParams,
    depth: int,
    plays: int,
    master_seed,
) -> McEstimate:
    """Estimate the expected payoff from `plays` independent seeded plays."""
    if plays < 2:
        raise ValidationError(f"plays must be >= 2 for a standard error, got {plays}")
    batch = simulate_batch(
        x0, strategy_i, strategy_ii, spec, params, depth, plays, master_seed
    )
    mean = float(np.mean(batch.payoffs))
    std_error = float(np.std(batch.payoffs, ddof=1) / math.sqrt(plays))
    return McEstimate(
        mean=mean,
        std_error=std_error,
        plays=plays,
        params=params,
        truncation_depth=depth,
    )


def truncation_error(spec: BoundarySpec, params: GameParams, depth: int) -> float:
    """Payoff uncertainty from stopping at `depth` instead of playing forever."""
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    return modulus_bound(spec, params.m ** (-depth))
