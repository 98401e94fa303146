"""Equilibrium certificates and reference oracles.

Residual checks ask whether a profile is stationary for every leader's
conjectured objective (first order), locally stable (second order, on the
internally negated descent form for maximizers), and whether the follower
is at its optimum. Consistency gaps compare each conjecture's slope with
the local slope of the true best response; near-zero gaps are the
consistency refinement. The objective-bound check certifies that payoff
gaps between two equilibria are controlled by the leaders' action distance
times M1 * sqrt(1 + M2^2) for Lipschitz constants M1 (payoffs) and M2
(follower response).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .conjectures import ConjectureSet
from .dynamics import RunTrace, conjectured_gradient
from .games import (
    ConfigError,
    DomainError,
    GameSpec,
    MINIMIZE,
    StrategyProfile,
    follower_best_response,
    leader_best_response,
    olsder,
)


@dataclass(frozen=True)
class ResidualReport:
    """First- and second-order conditions at a candidate profile."""

    gradient_norms: tuple[float, ...]
    projected_residuals: tuple[float, ...]
    second_derivatives: tuple[float, ...]
    second_order_ok: tuple[bool, ...]
    follower_residual: float | None


@dataclass(frozen=True)
class ReportTolerances:
    stationarity: float = 1e-6
    consistency: float = 1e-3


@dataclass(frozen=True)
class EquilibriumReport:
    actions: tuple[float, ...]
    follower: float | None
    residual: ResidualReport
    consistency_gaps: dict[tuple[int, int | None], float]
    cse_candidate: bool
    ccse_candidate: bool
    reference_action_distance: dict[str, float] = field(default_factory=dict)
    reference_objective_gaps: dict[str, tuple[float, ...]] = field(default_factory=dict)


def cse_residual(
    game: GameSpec,
    conjectures: ConjectureSet,
    profile: StrategyProfile,
    second_order_step: float = 1e-4,
) -> ResidualReport:
    """Stationarity and curvature of every leader's conjectured objective.

    The second derivative is a central difference of the analytic conjectured
    gradient of the descent form, so a positive value means local stability
    for the leader's own problem. Interior stationarity is measured as the
    projected residual, which also handles box boundaries.
    """
    norms, projected, seconds, flags = [], [], [], []
    for i in range(game.leader_count):
        x_i = profile.leaders[i]
        parts = conjectured_gradient(game, conjectures, i, x_i)
        norms.append(abs(parts.total))
        box = game.boxes[i]
        projected.append(abs(box.clamp(x_i - parts.total) - x_i))
        h = second_order_step
        up = conjectured_gradient(game, conjectures, i, x_i + h).total
        down = conjectured_gradient(game, conjectures, i, x_i - h).total
        second = (up - down) / (2.0 * h)
        seconds.append(second)
        flags.append(second > 0.0)
    follower_residual = None
    if game.follower is not None:
        if profile.follower is None:
            raise DomainError("profile carries no follower action")
        spec = game.follower
        sign = 1.0 if spec.sense == MINIMIZE else -1.0
        dy = sign * spec.d_dy(profile.leaders, profile.follower)
        follower_residual = abs(
            spec.box.clamp(profile.follower - dy) - profile.follower
        )
    return ResidualReport(
        gradient_norms=tuple(norms),
        projected_residuals=tuple(projected),
        second_derivatives=tuple(seconds),
        second_order_ok=tuple(flags),
        follower_residual=follower_residual,
    )


def consistency_gap(
    game: GameSpec,
    conjectures: ConjectureSet,
    profile: StrategyProfile,
    step: float = 1e-5,
) -> dict[tuple[int, int | None], float]:
    """|conjecture slope - best-response slope| per (owner, target) pair.

    Best-response derivatives come from central differences of the (closed
    form or solver-based) best-response maps around the profile.
    """
    gaps: dict[tuple[int, int | None], float] = {}
    x = profile.leaders
    y = profile.follower
    for i, lc in enumerate(conjectures.leaders):
        x_i = x[i]
        for j, model in lc.about.items():

            def peer_response(v: float, j=j) -> float:
                shifted = list(x)
                shifted[i] = v
                others = tuple(shifted[k] for k in range(game.leader_count) if k != j)
                return leader_best_response(game, j, others, y)

            br_slope = (peer_response(x_i + step) - peer_response(x_i - step)) / (2.0 * step)
            gaps[(i, j)] = abs(model.input_derivative(x_i) - br_slope)
        if lc.follower is not None:

            def follower_response(v: float) -> float:
                shifted = list(x)
                shifted[i] = v
                return follower_best_response(game, shifted)

            br_slope = (
                follower_response(x_i + step) - follower_response(x_i - step)
            ) / (2.0 * step)
            gaps[(i, None)] = abs(lc.follower.input_derivative(x_i) - br_slope)
    return gaps


def equilibrium_report(
    game: GameSpec,
    conjectures: ConjectureSet,
    profile: StrategyProfile,
    references: "ReferenceEquilibria | None" = None,
    tolerances: ReportTolerances = ReportTolerances(),
) -> EquilibriumReport:
    residual = cse_residual(game, conjectures, profile)
    gaps = consistency_gap(game, conjectures, profile)
    stationary = all(r <= tolerances.stationarity for r in residual.projected_residuals)
    if residual.follower_residual is not None:
        stationary = stationary and residual.follower_residual <= tolerances.stationarity
    cse = stationary and all(residual.second_order_ok)
    ccse = cse and all(g <= tolerances.consistency for g in gaps.values())
    report = EquilibriumReport(
        actions=profile.leaders,
        follower=profile.follower,
        residual=residual,
        consistency_gaps=gaps,
        cse_candidate=cse,
        ccse_candidate=ccse,
    )
    if references is not None:
        actions = _player_actions_at(game, profile)
        objectives = _player_objectives_at(game, profile)
        for name, point in references.entries.items():
            report.reference_action_distance[name] = math.dist(actions, point.actions)
            report.reference_objective_gaps[name] = tuple(
                o - r for o, r in zip(objectives, point.objectives)
            )
    return report


def _player_actions_at(game: GameSpec, profile: StrategyProfile) -> tuple[float, ...]:
    if game.follower is not None and game.leader_count == 1:
        return profile.leaders + (profile.follower,)
    return profile.leaders


def _player_objectives_at(game: GameSpec, profile: StrategyProfile) -> tuple[float, ...]:
    """Objectives of the game's human players.

    A single-leader game with a follower is a two-player hierarchy, so the
    follower's payoff is the second player's; otherwise the leaders are the
    players.
    """
    x, y = profile.leaders, profile.follower
    values = [game.objectives[i](x, y) for i in range(game.leader_count)]
    if game.follower is not None and game.leader_count == 1:
        values.append(game.follower.objective(x, y))
    return tuple(values)


# ---------------------------------------------------------------------------
# Lipschitz estimation and the objective bound
# ---------------------------------------------------------------------------


def estimate_lipschitz(
    game: GameSpec, samples: int = 2000, seed: int = 0, safety: float = 1.1
) -> tuple[float, float]:
    """(M1, M2) from sampled gradient norms over the boxes, inflated by 10%.

    M1 bounds the leaders' payoff gradients over joint (x, y) space; M2
    bounds the follower best-response slope, measured by central differences
    at sampled leader profiles. Game-supplied constants short-circuit the
    sampling.
    """
    if game.lipschitz_objective is not None and game.lipschitz_response is not None:
        return game.lipschitz_objective, game.lipschitz_response
    if game.follower is None:
        raise ConfigError("Lipschitz response bound needs a follower")
    rng = np.random.default_rng(seed)
    n = game.leader_count
    fb = game.follower.box
    m1 = 0.0
    m2 = 0.0
    for _ in range(samples):
        x = tuple(
            rng.uniform(b.lower + 1e-6 * b.width, b.upper - 1e-6 * b.width)
            for b in game.boxes
        )
        y = rng.uniform(fb.lower, fb.upper)
        for i in range(n):
            grad = [game.d_own(i, x, y)]
            grad += [game.d_cross(i, j, x, y) for j in range(n) if j != i]
            grad.append(game.d_y(i, x, y))
            m1 = max(m1, math.hypot(*grad))
        slope = []
        h = 1e-6 * max(b.width for b in game.boxes)
        for i in range(n):
            up = list(x)
            down = list(x)
            up[i] = min(x[i] + h, game.boxes[i].upper)
            down[i] = max(x[i] - h, game.boxes[i].lower)
            width = up[i] - down[i]
            slope.append(
                (follower_best_response(game, up) - follower_best_response(game, down)) / width
            )
        m2 = max(m2, math.hypot(*slope))
    return safety * m1, safety * m2


@dataclass(frozen=True)
class BoundCheck:
    lhs: tuple[float, ...]
    rhs: float
    holds: bool


def bound_check(
    game: GameSpec,
    se_profile: Sequence[float],
    cse_profile: Sequence[float],
    m1: float,
    m2: float,
) -> BoundCheck:
    """Payoff-gap bound between two leader profiles under true follower replies.

    lhs_i = |f_i at the first profile - f_i at the second|, both evaluated
    with the follower best-responding; rhs = M1*sqrt(1+M2^2) times the
    Euclidean distance between the leader profiles.
    """
    if m1 <= 0.0 or m2 < 0.0:
        raise ConfigError("Lipschitz constants must be positive")
    a = tuple(float(v) for v in se_profile)
    b = tuple(float(v) for v in cse_profile)
    y_a = follower_best_response(game, a)
    y_b = follower_best_response(game, b)
    lhs = tuple(
        abs(game.objectives[i](a, y_a) - game.objectives[i](b, y_b))
        for i in range(game.leader_count)
    )
    rhs = m1 * math.sqrt(1.0 + m2 * m2) * math.dist(a, b)
    slack = 1e-9 * max(1.0, rhs)
    return BoundCheck(lhs=lhs, rhs=rhs, holds=all(v <= rhs + slack for v in lhs))


# ---------------------------------------------------------------------------
# Reference equilibria
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RefPoint:
    actions: tuple[float, ...]
    objectives: tuple[float, ...]
    source: str


@dataclass(frozen=True)
class ReferenceEquilibria:
    game: str
    entries: dict[str, RefPoint]


# Published two-player reference rows for the quadratic market game; the
# conjectural equilibrium is stored (not derived) and the published
# hierarchical row is kept alongside our exact solve for comparison.
OLSDER_TABLE = {
    "CCE": ((164.4, 81.0), (32320.8, 19220.0)),
    "SE_table": ((138.04, 65.11), (21411.6, 11415.8)),
}


def olsder_reference() -> ReferenceEquilibria:
    """Closed-form NE, SE, SWO for the quadratic market game, plus stored rows.

    Reaction lines: x1 = 0.84 x2 + 72.24 and x2 = 0.25 x1 + 30.6. The Nash
    point solves both; the hierarchical optimum maximizes player 1 along
    player 2's line; the welfare optimum solves the joint stationarity of
    f1 + f2. Computed entries are verified against their defining equations
    to 1e-8 before being returned.
    """
    game = olsder("simultaneous")
    f1 = lambda x: game.objectives[0](x, None)
    f2 = lambda x: game.objectives[1](x, None)

    # Nash: substitute one line into the other.
    x1_ne = (0.84 * 30.6 + 72.24) / (1.0 - 0.84 * 0.25)
    x2_ne = 0.25 * x1_ne + 30.6
    # Leader-follower: d/dx1 [f1(x1, 0.25 x1 + 30.6)] = -14.5 x1 + 2007.6.
    x1_se = 2007.6 / 14.5
    x2_se = 0.25 * x1_se + 30.6
    # Welfare: d(f1+f2)/dx1 = -25 x1 + 46 x2 + 556, d/dx2 = 46 x1 - 100 x2 + 1296.
    x2_swo = (46.0 * 556.0 / 25.0 + 1296.0) / (100.0 - 46.0 * 46.0 / 25.0)
    x1_swo = (46.0 * x2_swo + 556.0) / 25.0

    checks = [
        abs((21.0 * x2_ne + 1806.0) / 25.0 - x1_ne),
        abs((25.0 * x1_ne + 3060.0) / 100.0 - x2_ne),
        abs(-14.5 * x1_se + 2007.6),
        abs(-25.0 * x1_swo + 46.0 * x2_swo + 556.0),
        abs(46.0 * x1_swo - 100.0 * x2_swo + 1296.0),
    ]
    if max(checks) > 1e-8:
        raise RuntimeError(f"reference stationarity drifted: {checks}")

    entries = {
        "NE": RefPoint((x1_ne, x2_ne), (f1((x1_ne, x2_ne)), f2((x1_ne, x2_ne))), "closed-form"),
        "SE": RefPoint((x1_se, x2_se), (f1((x1_se, x2_se)), f2((x1_se, x2_se))), "closed-form"),
        "SWO": RefPoint(
            (x1_swo, x2_swo), (f1((x1_swo, x2_swo)), f2((x1_swo, x2_swo))), "closed-form"
        ),
    }
    for name, (actions, objectives) in OLSDER_TABLE.items():
        entries[name] = RefPoint(actions, objectives, "stored")
    return ReferenceEquilibria(game="olsder", entries=entries)


@dataclass(frozen=True)
class DilemmaReference:
    """Equilibrium continuum of the two-leader target-chasing game.

    Stationary separated profiles satisfy x2 = x1 +/- separation; the saddle
    line x1 = x2 pays zero, while any continuum point pays `payoff` to both
    leaders.
    """

    k: float
    separation: float
    payoff: float
    saddle_payoff: float = 0.0


def dilemma_reference(k: float) -> DilemmaReference:
    if k >= -1.0:
        raise DomainError(f"continuum exists only for k < -1, got {k}")
    magnitude = abs(k)
    return DilemmaReference(
        k=k,
        separation=2.0 * math.sqrt(math.log(magnitude)),
        payoff=-math.log(magnitude) + magnitude - 1.0,
    )


# ---------------------------------------------------------------------------
# Run comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    objectives: tuple[float, ...]
    deltas: dict[str, tuple[float, ...]]
    flags: dict[str, bool]


def final_player_objectives(game: GameSpec, trace: RunTrace) -> tuple[float, ...]:
    final = trace.final
    values = list(final.objectives)
    if game.follower is not None and game.leader_count == 1:
        values.append(final.follower_objective)
    return tuple(values)


def compare_runs(
    game: GameSpec,
    traces: Sequence[tuple[str, RunTrace]],
    references: ReferenceEquilibria | DilemmaReference,
) -> list[ComparisonRow]:
    """Final payoffs per labelled run with deltas and beat/bound flags."""
    rows = []
    for label, trace in traces:
        if not trace.rows:
            raise ValueError(f"trace {label!r} is empty")
        objectives = final_player_objectives(game, trace)
        deltas: dict[str, tuple[float, ...]] = {}
        flags: dict[str, bool] = {}
        if isinstance(references, ReferenceEquilibria):
            for name, point in references.entries.items():
                deltas[name] = tuple(o - r for o, r in zip(objectives, point.objectives))
            for p, value in enumerate(objectives):
                flags[f"beats_NE_{p + 1}"] = value >= references.entries["NE"].objectives[p]
                flags[f"below_SE_{p + 1}"] = value <= references.entries["SE"].objectives[p]
        else:
            top = references.payoff
            deltas["optimum"] = tuple(o - top for o in objectives)
            deltas["saddle"] = tuple(o - references.saddle_payoff for o in objectives)
            for p, value in enumerate(objectives):
                flags[f"beats_saddle_{p + 1}"] = value > references.saddle_payoff
                flags[f"below_optimum_{p + 1}"] = value <= top + 1e-3
        rows.append(ComparisonRow(label, objectives, deltas, flags))
    return rows
