"""Strategy dynamics: conjectured-gradient play and the naive gradient baseline.

Each leader descends its conjectured objective, built by substituting its
conjectures about the other players into its own payoff, so one leader's
update depends only on that leader's scalar action. Updates use snapshot
semantics: all gradients within an iteration are evaluated at the same
time-t profile, so evaluating the leaders in any order (or in parallel)
produces the identical trajectory. Maximizing players are handled by an
internal sign flip so everything is descent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .conjectures import ConjectureSet
from .games import ConfigError, GameSpec, follower_best_response

STACKELBERG = "stackelberg"
SIMULTANEOUS = "simultaneous"

DIVERGENCE_LIMIT = 1e8


class DivergenceError(RuntimeError):
    """An iterate left the numerically sane range."""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


@dataclass(frozen=True)
class ConstantStep:
    eta: float

    def __post_init__(self) -> None:
        if self.eta <= 0.0:
            raise ConfigError("step size must be positive")

    def step(self, t: int) -> float:
        return self.eta


@dataclass(frozen=True)
class RobbinsMonroStep:
    """eta0 / (1 + t)^alpha; 0.5 < alpha <= 1 gives a divergent sum of steps
    with a convergent sum of squares."""

    eta0: float
    alpha: float

    def __post_init__(self) -> None:
        if self.eta0 <= 0.0:
            raise ConfigError("step size must be positive")
        if not 0.5 < self.alpha <= 1.0:
            raise ConfigError(
                f"decay exponent must satisfy 0.5 < alpha <= 1, got {self.alpha}"
            )

    def step(self, t: int) -> float:
        return self.eta0 / (1.0 + t) ** self.alpha


StepSchedule = ConstantStep | RobbinsMonroStep


@dataclass(frozen=True)
class PlayConfig:
    iterations: int
    schedule: StepSchedule
    mode: str = STACKELBERG
    gradient_noise_std: float = 0.0
    seed: int = 0
    stop_tolerance: float = 0.0

    def __post_init__(self) -> None:
        if self.iterations <= 0:
            raise ConfigError("iterations must be positive")
        if self.gradient_noise_std < 0.0 or self.stop_tolerance < 0.0:
            raise ConfigError("noise level and stop tolerance must be nonnegative")
        if self.mode not in (STACKELBERG, SIMULTANEOUS):
            raise ConfigError(f"unknown play mode {self.mode!r}")


class GradientParts(NamedTuple):
    """Descent-direction components of one leader's conjectured gradient.

    `own` is the direct partial, `others` the chain through the peer
    conjectures, `follower` the chain through the follower conjecture; they
    are already sign-adjusted for the leader's sense, so total is their sum.
    """

    own: float
    others: float
    follower: float
    total: float


@dataclass(frozen=True)
class TraceRow:
    t: int
    actions: tuple[float, ...]
    follower: float | None
    gradients: tuple[GradientParts, ...]
    objectives: tuple[float, ...]
    follower_objective: float | None


@dataclass
class RunTrace:
    """Per-iteration record of one dynamics run; row 0 is the initial profile."""

    game_name: str
    rows: list[TraceRow]

    @property
    def final(self) -> TraceRow:
        return self.rows[-1]

    def to_rows(self) -> list[list[str]]:
        """Trace CSV: t, x_1..x_N, y, grad_1..grad_N, f_1..f_N, g."""
        n = len(self.rows[0].actions)
        header = (
            ["t"]
            + [f"x_{i + 1}" for i in range(n)]
            + ["y"]
            + [f"grad_{i + 1}" for i in range(n)]
            + [f"f_{i + 1}" for i in range(n)]
            + ["g"]
        )
        out = [header]
        for row in self.rows:
            cells = [str(row.t)]
            cells += [repr(v) for v in row.actions]
            cells.append("" if row.follower is None else repr(row.follower))
            cells += [repr(p.total) for p in row.gradients]
            cells += [repr(v) for v in row.objectives]
            cells.append("" if row.follower_objective is None else repr(row.follower_objective))
            out.append(cells)
        return out


def _checked_mode(game: GameSpec, cfg: PlayConfig) -> None:
    if cfg.mode == STACKELBERG and game.follower is None:
        raise ConfigError(f"stackelberg play needs a follower; {game.name!r} has none")
    if cfg.mode == SIMULTANEOUS and game.follower is not None:
        raise ConfigError(
            f"simultaneous play drops the follower; build {game.name!r} without one"
        )


def conjectured_gradient(
    game: GameSpec, conjectures: ConjectureSet, player: int, x_i: float
) -> GradientParts:
    """Descent gradient of leader `player`'s conjectured objective at x_i.

    The partials of the true objective are evaluated at the conjectured
    profile (own action as-is, every other coordinate replaced by the
    owner's conjecture at x_i), then chained with the conjectures' input
    derivatives. Conjecture outputs are used unclamped so the chain rule
    stays exact.
    """
    n = game.leader_count
    if not 0 <= player < n:
        raise ConfigError(f"unknown leader id {player}")
    lc = conjectures.leaders[player]
    x_conj = [0.0] * n
    x_conj[player] = x_i
    for j in range(n):
        if j == player:
            continue
        if j not in lc.about:
            raise ConfigError(f"leader {player} has no conjecture about leader {j}")
        x_conj[j] = lc.about[j].predict(x_i)
    y_conj = None
    if game.follower is not None:
        if lc.follower is None:
            raise ConfigError(f"leader {player} has no follower conjecture")
        y_conj = lc.follower.predict(x_i)

    d_own = game.d_own(player, x_conj, y_conj)
    d_others = 0.0
    for j in range(n):
        if j != player:
            d_others += game.d_cross(player, j, x_conj, y_conj) * lc.about[j].input_derivative(x_i)
    d_follower = 0.0
    if game.follower is not None:
        d_follower = game.d_y(player, x_conj, y_conj) * lc.follower.input_derivative(x_i)
    sign = game.descent_sign(player)
    return GradientParts(
        own=sign * d_own,
        others=sign * d_others,
        follower=sign * d_follower,
        total=sign * (d_own + d_others + d_follower),
    )


def _record(
    game: GameSpec,
    t: int,
    x: tuple[float, ...],
    y: float | None,
    parts: tuple[GradientParts, ...],
) -> TraceRow:
    objectives = tuple(game.objectives[i](x, y) for i in range(game.leader_count))
    follower_objective = (
        game.follower.objective(x, y) if game.follower is not None else None
    )
    values = list(objectives) + [v.total for v in parts]
    if follower_objective is not None:
        values.append(follower_objective)
    if not all(math.isfinite(v) for v in values):
        raise DivergenceError(f"non-finite trace values at iteration {t}", t)
    return TraceRow(t, x, y, parts, objectives, follower_objective)


def _iterate(
    game: GameSpec,
    cfg: PlayConfig,
    x0: Sequence[float],
    gradient_fn,
) -> RunTrace:
    from .games import _check_leader_actions  # shared box validation

    _checked_mode(game, cfg)
    x = tuple(float(v) for v in x0)
    _check_leader_actions(game, x)
    n = game.leader_count
    rng = np.random.default_rng(cfg.seed)
    y = follower_best_response(game, x) if game.follower is not None else None
    rows: list[TraceRow] = []
    for t in range(cfg.iterations + 1):
        parts = tuple(gradient_fn(i, x, y) for i in range(n))
        rows.append(_record(game, t, x, y, parts))
        if t == cfg.iterations:
            break
        if cfg.stop_tolerance > 0.0 and all(
            abs(p.total) < cfg.stop_tolerance for p in parts
        ):
            break
        eta = cfg.schedule.step(t)
        if cfg.gradient_noise_std > 0.0:
            noise = [float(v) for v in rng.normal(0.0, cfg.gradient_noise_std, size=n)]
        else:
            noise = [0.0] * n
        new_x = []
        for i in range(n):
            value = x[i] - eta * (parts[i].total + noise[i])
            if not math.isfinite(value) or abs(value) > DIVERGENCE_LIMIT:
                raise DivergenceError(
                    f"leader {i} iterate {value} out of range at iteration {t}", t
                )
            new_x.append(game.boxes[i].clamp(value))
        x = tuple(new_x)
        if game.follower is not None:
            y = follower_best_response(game, x)
    return RunTrace(game_name=game.name, rows=rows)


def costal_run(
    game: GameSpec,
    conjectures: ConjectureSet,
    cfg: PlayConfig,
    x0: Sequence[float],
) -> RunTrace:
    """Conjectured-gradient play from x0.

    Every iteration evaluates each leader's conjectured gradient at the
    time-t snapshot, adds seeded Gaussian exploration noise when configured,
    steps with the schedule, projects onto the boxes, and (in stackelberg
    mode) lets the follower best-respond to the updated leader profile.
    Stops early once every leader's gradient magnitude falls below
    `stop_tolerance` (when positive).
    """
    conjectures.validate(game.leader_count, game.follower is not None)

    def gradient(i: int, x: tuple[float, ...], y: float | None) -> GradientParts:
        return conjectured_gradient(game, conjectures, i, x[i])

    return _iterate(game, cfg, x0, gradient)


def gd_baseline_run(game: GameSpec, cfg: PlayConfig, x0: Sequence[float]) -> RunTrace:
    """Naive benchmark: each leader steps on its own partial at the true profile.

    Unlike conjectured play this needs full access to the other players'
    current actions, so it cannot be decentralized; it is the comparison
    dynamics, with the follower handled exactly as in `costal_run`.
    """

    def gradient(i: int, x: tuple[float, ...], y: float | None) -> GradientParts:
        sign = game.descent_sign(i)
        own = sign * game.d_own(i, x, y)
        return GradientParts(own=own, others=0.0, follower=0.0, total=own)

    return _iterate(game, cfg, x0, gradient)


def read_trace_csv(path) -> RunTrace:
    """Rebuild a trace from its CSV. Gradient components collapse to totals."""
    import csv as _csv

    with open(path, newline="") as handle:
        reader = _csv.reader(handle)
        header = next(reader, None)
        if not header or header[0] != "t":
            raise ConfigError(f"{path}: not a trace file (missing header)")
        n = sum(1 for c in header if c.startswith("x_"))
        rows: list[TraceRow] = []
        for cells in reader:
            t = int(cells[0])
            actions = tuple(float(v) for v in cells[1 : 1 + n])
            y_cell = cells[1 + n]
            y = None if y_cell == "" else float(y_cell)
            grads = tuple(float(v) for v in cells[2 + n : 2 + 2 * n])
            objectives = tuple(float(v) for v in cells[2 + 2 * n : 2 + 3 * n])
            g_cell = cells[2 + 3 * n]
            g = None if g_cell == "" else float(g_cell)
            rows.append(
                TraceRow(
                    t,
                    actions,
                    y,
                    tuple(GradientParts(0.0, 0.0, 0.0, v) for v in grads),
                    objectives,
                    g,
                )
            )
    if not rows:
        raise ConfigError(f"{path}: empty trace")
    return RunTrace(game_name="", rows=rows)
