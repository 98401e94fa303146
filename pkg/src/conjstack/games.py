"""Multi-leader single-follower games with box-constrained scalar actions.

Leaders act simultaneously; an optional follower best-responds to the joint
leader profile. Every objective carries analytic first partials so gradient
dynamics and equilibrium residuals never need internal finite differences.
All types are immutable and every operation here is a pure function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

MAXIMIZE = "max"
MINIMIZE = "min"


class DomainError(ValueError):
    """An action or profile lies outside its declared box."""


class ConfigError(ValueError):
    """Invalid game, model, or run configuration."""


class SolverError(RuntimeError):
    """A scalar solve failed to reach the required stationarity."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class ActionBox:
    """Closed feasible interval; `upper` may be a finite cap standing in for +inf."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise ConfigError(
                f"action box needs lower < upper, got [{self.lower}, {self.upper}]"
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def clamp(self, value: float) -> float:
        return min(max(value, self.lower), self.upper)

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol


@dataclass(frozen=True)
class StrategyProfile:
    """One joint strategy: a scalar action per leader plus the follower's action."""

    leaders: tuple[float, ...]
    follower: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "leaders", tuple(float(v) for v in self.leaders))
        if self.follower is not None:
            object.__setattr__(self, "follower", float(self.follower))


class Partials(NamedTuple):
    """First partials of one player's objective at a profile.

    For a leader: d/dx_own, d/dx_others (ascending over the other leaders) and
    d/dy. For the follower only the `follower` slot is defined.
    """

    own: float | None
    others: tuple[float, ...]
    follower: float | None


@dataclass(frozen=True)
class FollowerSpec:
    """Follower problem: unique optimizer of `objective` over `box` for any x."""

    box: ActionBox
    sense: str
    objective: Callable[[Sequence[float], float], float]
    d_dy: Callable[[Sequence[float], float], float]
    closed_form: Callable[[Sequence[float]], float] | None = None


@dataclass(frozen=True)
class GameSpec:
    """A multi-leader game, optionally with a single best-responding follower.

    `objectives[i](x, y)` evaluates leader i's payoff at leader vector x and
    follower action y (y is None for games without a follower). The partial
    callables mirror that signature. Lipschitz constants are optional; the
    analysis module estimates them by sampling when absent.
    """

    name: str
    boxes: tuple[ActionBox, ...]
    senses: tuple[str, ...]
    objectives: tuple[Callable[[Sequence[float], float | None], float], ...]
    d_own: Callable[[int, Sequence[float], float | None], float]
    d_cross: Callable[[int, int, Sequence[float], float | None], float]
    d_y: Callable[[int, Sequence[float], float | None], float] | None
    follower: FollowerSpec | None = None
    leader_closed_br: Callable[[int, Sequence[float], float | None], float] | None = None
    lipschitz_objective: float | None = None
    lipschitz_response: float | None = None

    @property
    def leader_count(self) -> int:
        return len(self.boxes)

    def descent_sign(self, player: int) -> float:
        """+1 for minimizers, -1 for maximizers, so descent is one code path."""
        sense = self.senses[player] if player < self.leader_count else self.follower.sense
        return 1.0 if sense == MINIMIZE else -1.0


def _check_leader_actions(game: GameSpec, leaders: Sequence[float]) -> None:
    if len(leaders) != game.leader_count:
        raise DomainError(
            f"profile has {len(leaders)} leader actions, game declares {game.leader_count}"
        )
    for i, value in enumerate(leaders):
        if not game.boxes[i].contains(value):
            box = game.boxes[i]
            raise DomainError(
                f"leader {i} action {value} outside [{box.lower}, {box.upper}]"
            )


def _check_profile(game: GameSpec, profile: StrategyProfile) -> None:
    _check_leader_actions(game, profile.leaders)
    if game.follower is not None:
        if profile.follower is None:
            raise DomainError("game has a follower but the profile carries no follower action")
        if not game.follower.box.contains(profile.follower):
            box = game.follower.box
            raise DomainError(
                f"follower action {profile.follower} outside [{box.lower}, {box.upper}]"
            )


def evaluate(game: GameSpec, profile: StrategyProfile, player: int) -> float:
    """Raw objective value for `player` (leaders 0..N-1, follower at index N).

    The value is returned in the objective's own units; the declared sense is
    metadata consumed by the dynamics and analysis layers.
    """
    _check_profile(game, profile)
    n = game.leader_count
    if 0 <= player < n:
        return game.objectives[player](profile.leaders, profile.follower)
    if player == n and game.follower is not None:
        return game.follower.objective(profile.leaders, profile.follower)
    raise DomainError(f"unknown player id {player} for game {game.name!r}")


def partials(game: GameSpec, profile: StrategyProfile, player: int) -> Partials:
    """Analytic first partials of the player's objective at `profile`."""
    _check_profile(game, profile)
    n = game.leader_count
    if 0 <= player < n:
        x, y = profile.leaders, profile.follower
        others = tuple(game.d_cross(player, j, x, y) for j in range(n) if j != player)
        dy = game.d_y(player, x, y) if (game.d_y is not None and game.follower is not None) else None
        return Partials(own=game.d_own(player, x, y), others=others, follower=dy)
    if player == n and game.follower is not None:
        return Partials(own=None, others=(), follower=game.follower.d_dy(profile.leaders, profile.follower))
    raise DomainError(f"unknown player id {player} for game {game.name!r}")


def projected_stationarity_gap(
    derivative: float, point: float, box: ActionBox, sense: str
) -> float:
    """|pi_box(x - sign * f'(x)) - x|: zero iff x is projected-stationary."""
    sign = 1.0 if sense == MINIMIZE else -1.0
    return abs(box.clamp(point - sign * derivative) - point)


def solve_scalar_box(
    objective: Callable[[float], float],
    derivative: Callable[[float], float],
    box: ActionBox,
    sense: str,
    *,
    tol: float = 1e-10,
    grid: int = 256,
    max_iter: int = 200,
) -> float:
    """Optimize a smooth scalar objective over a box.

    Brackets sign changes of the (sense-adjusted) derivative on a uniform
    grid, polishes each bracket with safeguarded Newton falling back to
    bisection, then compares all stationary candidates against the endpoints.
    Ties break toward the lower endpoint. The winner satisfies projected
    stationarity to `tol`; failure to polish a bracket raises SolverError.
    """
    if sense not in (MINIMIZE, MAXIMIZE):
        raise ConfigError(f"unknown sense {sense!r}")
    sign = 1.0 if sense == MINIMIZE else -1.0

    def phi(x: float) -> float:
        return sign * derivative(x)

    xs = [box.lower + box.width * k / grid for k in range(grid + 1)]
    phis = [phi(x) for x in xs]
    candidates = [box.lower, box.upper]
    for k in range(grid):
        a, b, pa, pb = xs[k], xs[k + 1], phis[k], phis[k + 1]
        if pa == 0.0:
            candidates.append(a)
        elif pa * pb < 0.0:
            candidates.append(_polish_root(phi, a, b, pa, pb, max_iter))
    if phis[-1] == 0.0:
        candidates.append(box.upper)

    best_x = None
    best_val = math.inf
    for x in sorted(candidates):
        val = sign * objective(x)
        if val < best_val:  # strict: ties keep the lower candidate
            best_val, best_x = val, x
    gap = projected_stationarity_gap(derivative(best_x), best_x, box, sense)
    if gap > tol:
        raise SolverError(
            f"scalar solve on [{box.lower}, {box.upper}] left stationarity gap {gap:.3e}",
            residual=gap,
        )
    return best_x


def _polish_root(
    phi: Callable[[float], float],
    lo: float,
    hi: float,
    plo: float,
    phi_hi: float,
    max_iter: int,
) -> float:
    """Root of phi in [lo, hi] via Newton steps safeguarded by the bracket."""
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        px = phi(x)
        if px == 0.0 or hi - lo < 4.0 * math.ulp(max(abs(lo), abs(hi), 1.0)):
            return x
        if (px < 0.0) == (plo < 0.0):
            lo, plo = x, px
        else:
            hi, phi_hi = x, px
        h = 1e-7 * max(1.0, abs(x))
        dpx = (phi(x + h) - phi(x - h)) / (2.0 * h)
        step_ok = dpx != 0.0 and math.isfinite(dpx)
        x_new = x - px / dpx if step_ok else 0.5 * (lo + hi)
        if not (lo < x_new < hi) or not math.isfinite(x_new):
            x_new = 0.5 * (lo + hi)
        x = x_new
    residual = abs(phi(x))
    raise SolverError(
        f"bracketed root polish did not converge after {max_iter} iterations",
        residual=residual,
    )


def follower_best_response(game: GameSpec, leader_actions: Sequence[float]) -> float:
    """Unique optimizer of the follower's objective given the leader profile."""
    if game.follower is None:
        raise ConfigError(f"game {game.name!r} has no follower")
    _check_leader_actions(game, leader_actions)
    spec = game.follower
    x = tuple(leader_actions)
    if spec.closed_form is not None:
        return spec.box.clamp(spec.closed_form(x))
    return solve_scalar_box(
        lambda y: spec.objective(x, y),
        lambda y: spec.d_dy(x, y),
        spec.box,
        spec.sense,
    )


def leader_best_response(
    game: GameSpec, player: int, others: Sequence[float], y: float | None
) -> float:
    """Leader `player`'s optimal action with peers fixed at `others` and follower at `y`.

    `others` lists the remaining leaders' actions in ascending player order.
    """
    n = game.leader_count
    if not 0 <= player < n:
        raise DomainError(f"unknown leader id {player}")
    if len(others) != n - 1:
        raise DomainError(f"expected {n - 1} peer actions, got {len(others)}")
    peers = list(others)
    for j, value in zip((j for j in range(n) if j != player), peers):
        if not game.boxes[j].contains(value):
            box = game.boxes[j]
            raise DomainError(f"leader {j} action {value} outside [{box.lower}, {box.upper}]")
    if y is not None and game.follower is not None and not game.follower.box.contains(y):
        box = game.follower.box
        raise DomainError(f"follower action {y} outside [{box.lower}, {box.upper}]")

    def full(xi: float) -> tuple[float, ...]:
        vec = peers[:player] + [xi] + peers[player:]
        return tuple(vec)

    if game.leader_closed_br is not None:
        return game.boxes[player].clamp(game.leader_closed_br(player, tuple(peers), y))
    return solve_scalar_box(
        lambda xi: game.objectives[player](full(xi), y),
        lambda xi: game.d_own(player, full(xi), y),
        game.boxes[player],
        game.senses[player],
    )


# ---------------------------------------------------------------------------
# Built-in games
# ---------------------------------------------------------------------------


def leaders_dilemma(k: float = -1.5, lower: float = -2.0, upper: float = 2.0) -> GameSpec:
    """Two maximizing leaders chasing a follower target at the leader mean.

    Leader i earns -(x_i - y)^2 - k*(1 - exp(-(x_j - y)^2)); the follower
    minimizes ((x1 + x2)/2 - y)^2, so its best response is the clamped mean.
    Requires k < -1: the separation reward must dominate near the target.
    """
    if k >= -1.0:
        raise ConfigError(f"leaders_dilemma requires k < -1, got {k}")
    box = ActionBox(lower, upper)

    def f(i: int):
        def value(x: Sequence[float], y: float | None) -> float:
            j = 1 - i
            return -((x[i] - y) ** 2) - k * (1.0 - math.exp(-((x[j] - y) ** 2)))

        return value

    def d_own(i: int, x: Sequence[float], y: float | None) -> float:
        return -2.0 * (x[i] - y)

    def d_cross(i: int, j: int, x: Sequence[float], y: float | None) -> float:
        u = x[j] - y
        return -2.0 * k * u * math.exp(-(u**2))

    def d_y(i: int, x: Sequence[float], y: float | None) -> float:
        u = x[1 - i] - y
        return 2.0 * (x[i] - y) + 2.0 * k * u * math.exp(-(u**2))

    follower = FollowerSpec(
        box=box,
        sense=MINIMIZE,
        objective=lambda x, y: (0.5 * (x[0] + x[1]) - y) ** 2,
        d_dy=lambda x, y: -2.0 * (0.5 * (x[0] + x[1]) - y),
        closed_form=lambda x: 0.5 * (x[0] + x[1]),
    )
    return GameSpec(
        name=f"leaders_dilemma(k={k})",
        boxes=(box, box),
        senses=(MAXIMIZE, MAXIMIZE),
        objectives=(f(0), f(1)),
        d_own=d_own,
        d_cross=d_cross,
        d_y=d_y,
        follower=follower,
        leader_closed_br=lambda i, peers, y: y,
    )


def _olsder_f1(x1: float, x2: float) -> float:
    return (x1 - 84.0) * (-12.5 * x1 + 21.0 * x2 + 756.0)


def _olsder_f2(x1: float, x2: float) -> float:
    return (x2 - 50.0) * (25.0 * x1 - 50.0 * x2 + 560.0)


def olsder(mode: str = "simultaneous", cap: float = 400.0) -> GameSpec:
    """Two-player quadratic market game, both players maximizing on [0, cap].

    `simultaneous` treats both players as leaders with no follower.
    `stackelberg` keeps player 1 as the single leader and lets player 2
    best-respond as the follower. The nominal action space is unbounded
    above; `cap` is a finite stand-in chosen well beyond every reference
    point of interest (welfare optimum ~ 300).
    """
    box = ActionBox(0.0, cap)
    if mode == "simultaneous":

        def d_own(i, x, y):
            if i == 0:
                return -25.0 * x[0] + 21.0 * x[1] + 1806.0
            return 25.0 * x[0] - 100.0 * x[1] + 3060.0

        def d_cross(i, j, x, y):
            if i == 0:
                return 21.0 * (x[0] - 84.0)
            return 25.0 * (x[1] - 50.0)

        def closed_br(i, peers, y):
            if i == 0:
                return (21.0 * peers[0] + 1806.0) / 25.0
            return (25.0 * peers[0] + 3060.0) / 100.0

        return GameSpec(
            name="olsder_simultaneous",
            boxes=(box, box),
            senses=(MAXIMIZE, MAXIMIZE),
            objectives=(
                lambda x, y: _olsder_f1(x[0], x[1]),
                lambda x, y: _olsder_f2(x[0], x[1]),
            ),
            d_own=d_own,
            d_cross=d_cross,
            d_y=None,
            follower=None,
            leader_closed_br=closed_br,
        )
    if mode == "stackelberg":
        follower = FollowerSpec(
            box=box,
            sense=MAXIMIZE,
            objective=lambda x, y: _olsder_f2(x[0], y),
            d_dy=lambda x, y: 25.0 * x[0] - 100.0 * y + 3060.0,
            closed_form=lambda x: (25.0 * x[0] + 3060.0) / 100.0,
        )
        return GameSpec(
            name="olsder_stackelberg",
            boxes=(box,),
            senses=(MAXIMIZE,),
            objectives=(lambda x, y: _olsder_f1(x[0], y),),
            d_own=lambda i, x, y: -25.0 * x[0] + 21.0 * y + 1806.0,
            d_cross=lambda i, j, x, y: 0.0,
            d_y=lambda i, x, y: 21.0 * (x[0] - 84.0),
            follower=follower,
            leader_closed_br=lambda i, peers, y: (21.0 * y + 1806.0) / 25.0,
        )
    raise ConfigError(f"unknown olsder mode {mode!r}")


def linear_quadratic(
    a: Sequence[float],
    b: Sequence[Sequence[float]],
    c: Sequence[float],
    follower_curvature: float = 1.0,
    follower_offset: float = 0.0,
    follower_coupling: Sequence[float] | None = None,
    leader_box: tuple[float, float] = (-1.0, 1.0),
    follower_box: tuple[float, float] = (-10.0, 10.0),
) -> GameSpec:
    """Leaders with linear payoffs a_i x_i + sum_j b[i][j] x_j + c_i y, minimizing.

    The follower minimizes the strictly convex quadratic
    0.5*q*y^2 - (r + s.x)*y, so its best response is affine with slope s_i/q
    in each leader action. b[i][i] is ignored.
    """
    n = len(a)
    if follower_curvature <= 0.0:
        raise ConfigError("follower problem must be strictly convex (curvature > 0)")
    s = tuple(follower_coupling) if follower_coupling is not None else tuple(1.0 for _ in range(n))
    if any(len(row) != n for row in b) or len(b) != n or len(c) != n or len(s) != n:
        raise ConfigError("linear_quadratic coefficient shapes disagree with leader count")
    a = tuple(float(v) for v in a)
    b = tuple(tuple(float(v) for v in row) for row in b)
    c = tuple(float(v) for v in c)
    q, r = float(follower_curvature), float(follower_offset)
    box = ActionBox(*leader_box)

    def f(i: int):
        def value(x: Sequence[float], y: float | None) -> float:
            return a[i] * x[i] + sum(b[i][j] * x[j] for j in range(n) if j != i) + c[i] * y

        return value

    follower = FollowerSpec(
        box=ActionBox(*follower_box),
        sense=MINIMIZE,
        objective=lambda x, y: 0.5 * q * y * y - (r + sum(s[j] * x[j] for j in range(n))) * y,
        d_dy=lambda x, y: q * y - (r + sum(s[j] * x[j] for j in range(n))),
        closed_form=lambda x: (r + sum(s[j] * x[j] for j in range(n))) / q,
    )
    return GameSpec(
        name="linear_quadratic",
        boxes=tuple(box for _ in range(n)),
        senses=tuple(MINIMIZE for _ in range(n)),
        objectives=tuple(f(i) for i in range(n)),
        d_own=lambda i, x, y: a[i],
        d_cross=lambda i, j, x, y: b[i][j],
        d_y=lambda i, x, y: c[i],
        follower=follower,
    )


BUILTIN_GAMES = {
    "leaders_dilemma": leaders_dilemma,
    "olsder": olsder,
    "linear_quadratic": linear_quadratic,
}
