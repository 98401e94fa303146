"""Conjectured-gradient play, the naive baseline, schedules, and traces."""
import math

import numpy as np
import pytest

from conjstack.conjectures import Affine, ConjectureSet, LeaderConjectures, NeuralNet, Polynomial
from conjstack.games import ConfigError, DomainError, leaders_dilemma, linear_quadratic, olsder
from conjstack.dynamics import (
    ConstantStep,
    DivergenceError,
    GradientParts,
    PlayConfig,
    RobbinsMonroStep,
    RunTrace,
    conjectured_gradient,
    costal_run,
    gd_baseline_run,
    read_trace_csv,
)

# Closed-form Olsder references (derived from the reaction lines
# x1 = 0.84 x2 + 72.24 and x2 = 0.25 x1 + 30.6).
NE_X = (123.97974683544304, 61.59493670886076)
NE_F = (19979.75196282647, 6722.127864124338)
SE_X = (138.45517241379311, 65.21379310344827)
SE_F = (21498.90206896551, 11572.975029726513)


def frozen_quadratic_set():
    quad = lambda: Polynomial((0.0, 0.0, 1.0), trainable=False)
    return ConjectureSet(
        [
            LeaderConjectures(about={1: quad()}, follower=quad()),
            LeaderConjectures(about={0: quad()}, follower=quad()),
        ]
    )


def identity_set():
    ident = lambda: Affine(1.0, 0.0)
    return ConjectureSet(
        [
            LeaderConjectures(about={1: ident()}, follower=ident()),
            LeaderConjectures(about={0: ident()}, follower=ident()),
        ]
    )


def olsder_affine_sets(mode):
    if mode == "stackelberg":
        return ConjectureSet([LeaderConjectures(about={}, follower=Affine(0.25, 30.6))])
    return ConjectureSet(
        [
            LeaderConjectures(about={1: Affine(0.25, 30.6)}),
            LeaderConjectures(about={0: Affine(0.84, 72.24)}),
        ]
    )


class TestSchedules:
    def test_constant_positive(self):
        assert ConstantStep(0.1).step(0) == 0.1
        assert ConstantStep(0.1).step(999) == 0.1
        with pytest.raises(ConfigError):
            ConstantStep(0.0)

    def test_robbins_monro_decay(self):
        sched = RobbinsMonroStep(0.5, 0.6)
        assert sched.step(0) == 0.5
        assert sched.step(99) == pytest.approx(0.5 / 100**0.6)

    def test_robbins_monro_exponent_window(self):
        # The square-summable-but-not-summable window is 0.5 < alpha <= 1.
        RobbinsMonroStep(0.1, 0.51)
        RobbinsMonroStep(0.1, 1.0)
        for bad in (0.5, 0.3, 1.01):
            with pytest.raises(ConfigError):
                RobbinsMonroStep(0.1, bad)

    def test_play_config_validation(self):
        sched = ConstantStep(0.1)
        with pytest.raises(ConfigError):
            PlayConfig(iterations=0, schedule=sched)
        with pytest.raises(ConfigError):
            PlayConfig(iterations=10, schedule=sched, gradient_noise_std=-1.0)
        with pytest.raises(ConfigError):
            PlayConfig(iterations=10, schedule=sched, mode="alternating")


class TestConjecturedGradient:
    def test_constant_conjectures_reduce_to_own_partial(self):
        # Zero input-derivative kills both chain terms; minimizing leaders
        # make the descent total equal the raw own-partial a_i.
        game = linear_quadratic(
            a=(0.7, -0.4), b=((0.0, 0.3), (-0.2, 0.0)), c=(0.5, 0.6),
            follower_curvature=2.0, follower_coupling=(1.0, -0.5),
        )
        const = lambda v: Affine(0.0, v)
        conj = ConjectureSet(
            [
                LeaderConjectures(about={1: const(0.2)}, follower=const(0.1)),
                LeaderConjectures(about={0: const(-0.3)}, follower=const(0.4)),
            ]
        )
        parts = conjectured_gradient(game, conj, 0, 0.5)
        assert parts.total == 0.7
        assert parts.others == 0.0 and parts.follower == 0.0
        assert conjectured_gradient(game, conj, 1, -0.1).total == -0.4

    def test_linear_game_chain_formula(self):
        # total must equal a_i + sum_j b_ij * dgamma_ij + c_i * dgamma_iy, term by term.
        a = (0.7, -0.4)
        b = ((0.0, 0.3), (-0.2, 0.0))
        c = (0.5, 0.6)
        game = linear_quadratic(a=a, b=b, c=c, follower_curvature=2.0)
        conj = ConjectureSet(
            [
                LeaderConjectures(about={1: Affine(1.7, 0.2)}, follower=Polynomial((0.1, -0.4, 0.9))),
                LeaderConjectures(about={0: Affine(-0.6, 0.0)}, follower=Affine(0.33, 1.0)),
            ]
        )
        for i in (0, 1):
            j = 1 - i
            x = 0.37 if i == 0 else -0.21
            parts = conjectured_gradient(game, conj, i, x)
            d_peer = conj.leaders[i].about[j].input_derivative(x)
            d_fol = conj.leaders[i].follower.input_derivative(x)
            assert parts.own == a[i]
            assert parts.others == b[i][j] * d_peer
            assert parts.follower == c[i] * d_fol
            assert parts.total == a[i] + b[i][j] * d_peer + c[i] * d_fol

    def test_identity_conjectures_at_origin(self):
        game = leaders_dilemma(-1.5)
        parts = conjectured_gradient(game, identity_set(), 0, 0.0)
        assert parts.total == 0.0

    def test_missing_conjecture_is_config_error(self):
        game = leaders_dilemma(-1.5)
        conj = ConjectureSet(
            [
                LeaderConjectures(about={}, follower=Affine(0.5, 0.0)),
                LeaderConjectures(about={0: Affine(0.0, 0.0)}, follower=Affine(0.5, 0.0)),
            ]
        )
        with pytest.raises(ConfigError, match="no conjecture about"):
            conjectured_gradient(game, conj, 0, 0.1)


class TestCostalRun:
    def test_fixed_point_is_constant_trace(self):
        # Identity conjectures make the dilemma's conjectured payoff
        # identically zero, so every point is stationary.
        game = leaders_dilemma(-1.5)
        cfg = PlayConfig(iterations=50, schedule=ConstantStep(0.1), mode="stackelberg", seed=0)
        trace = costal_run(game, identity_set(), cfg, (0.3, -0.7))
        assert len(trace.rows) == 51
        for row in trace.rows:
            assert row.actions == (0.3, -0.7)
            assert all(p.total == 0.0 for p in row.gradients)

    def test_olsder_stackelberg_brackets(self):
        """Converged hierarchical play sits between Nash and Stackelberg payoffs."""
        game = olsder("stackelberg")
        cfg = PlayConfig(
            iterations=5000, schedule=ConstantStep(1e-3), mode="stackelberg", seed=1
        )
        trace = costal_run(game, olsder_affine_sets("stackelberg"), cfg, (200.0,))
        final = trace.final
        f1, f2 = final.objectives[0], final.follower_objective
        assert final.actions[0] == pytest.approx(SE_X[0], abs=1e-3)
        assert final.follower == pytest.approx(SE_X[1], abs=1e-3)
        assert f1 >= NE_F[0] - 1e-6 and f2 >= NE_F[1] - 1e-6
        assert f1 <= SE_F[0] * 1.02 and f2 <= SE_F[1] * 1.02

    def test_dilemma_quadratic_conjectures_separate_leaders(self):
        """Frozen square conjectures drive the leaders to distinct targets.

        Oracle: the conjectured payoff is -(x - x^2)^2, whose maxima on
        [-2, 2] are exactly {0, 1} (verified by grid scan below), so a start
        straddling the interior minimum at 1/2 must end with separation 1 and
        the payoff of a unit-separated symmetric profile. The optimal
        separation 2*sqrt(ln 1.5) of the underlying game yields 0.09453;
        the reached profile sits within the 0.02 band the flat optimum allows.
        """
        grid = np.linspace(-2.0, 2.0, 400001)
        conjectured_payoff = -((grid - grid**2) ** 2)
        top = grid[conjectured_payoff >= conjectured_payoff.max() - 1e-12]
        assert np.allclose(sorted({round(v) for v in top}), [0.0, 1.0])

        game = leaders_dilemma(-1.5)
        cfg = PlayConfig(
            iterations=10000, schedule=RobbinsMonroStep(0.3, 0.6), mode="stackelberg", seed=2
        )
        trace = costal_run(game, frozen_quadratic_set(), cfg, (0.2, 0.6))
        final = trace.final
        separation = abs(final.actions[0] - final.actions[1])
        assert separation == pytest.approx(1.0, abs=1e-3)
        expected = -0.25 + 1.5 * (1.0 - math.exp(-0.25))
        assert final.objectives[0] == pytest.approx(expected, abs=1e-3)
        assert final.objectives[1] == pytest.approx(expected, abs=1e-3)
        assert abs(final.objectives[0] - 0.09453489189183562) <= 0.02

    def test_stop_tolerance_and_fixed_point_consistency(self):
        game = olsder("stackelberg")
        conj = olsder_affine_sets("stackelberg")
        cfg = PlayConfig(
            iterations=5000, schedule=ConstantStep(0.01), mode="stackelberg",
            seed=0, stop_tolerance=1e-6,
        )
        trace = costal_run(game, conj, cfg, (200.0,))
        assert len(trace.rows) < 5001
        final = trace.final
        for i in range(game.leader_count):
            parts = conjectured_gradient(game, conj, i, final.actions[i])
            assert abs(parts.total) < 1e-6

    def test_monotone_descent_small_constant_step(self):
        game = leaders_dilemma(-1.5)
        conj = frozen_quadratic_set()
        cfg = PlayConfig(iterations=400, schedule=ConstantStep(0.01), mode="stackelberg", seed=0)
        trace = costal_run(game, conj, cfg, (0.8, 0.8))

        def descent_value(i, x):
            lc = conj.leaders[i]
            profile = [0.0, 0.0]
            profile[i] = x
            profile[1 - i] = lc.about[1 - i].predict(x)
            return -game.objectives[i](profile, lc.follower.predict(x))

        for prev, cur in zip(trace.rows, trace.rows[1:]):
            for i in (0, 1):
                assert descent_value(i, cur.actions[i]) <= descent_value(i, prev.actions[i]) + 1e-12

    def test_projection_safety_under_heavy_noise(self):
        game = leaders_dilemma(-1.5)
        cfg = PlayConfig(
            iterations=500, schedule=ConstantStep(0.5), mode="stackelberg",
            gradient_noise_std=10.0, seed=123,
        )
        trace = costal_run(game, frozen_quadratic_set(), cfg, (0.0, 0.0))
        for row in trace.rows:
            for i, v in enumerate(row.actions):
                assert game.boxes[i].contains(v)
            assert game.follower.box.contains(row.follower)

    def test_deterministic_traces(self):
        game = leaders_dilemma(-1.5)
        mk = lambda seed: costal_run(
            game,
            frozen_quadratic_set(),
            PlayConfig(iterations=200, schedule=ConstantStep(0.1), mode="stackelberg",
                       gradient_noise_std=0.05, seed=seed),
            (0.5, 0.5),
        )
        assert mk(9).rows == mk(9).rows
        assert mk(9).rows != mk(10).rows

    def test_parallel_equivalence_snapshot_semantics(self):
        """Updating leaders in reverse order from the snapshot matches exactly."""
        game = olsder("simultaneous")
        conj = olsder_affine_sets("simultaneous")
        cfg = PlayConfig(iterations=100, schedule=ConstantStep(0.01), mode="simultaneous", seed=0)
        trace = costal_run(game, conj, cfg, (150.0, 80.0))
        x = (150.0, 80.0)
        for row in trace.rows[1:]:
            parts = [conjectured_gradient(game, conj, i, x[i]) for i in (1, 0)]
            x = tuple(
                game.boxes[i].clamp(x[i] - 0.01 * parts[1 - i].total) for i in (0, 1)
            )
            assert x == row.actions

    def test_divergence_guard(self):
        # Quartic conjectured objective with a step far past the curvature
        # bound; a huge box keeps the projection from rescuing the iterates.
        game = leaders_dilemma(-1.5, lower=-1e12, upper=1e12)
        cfg = PlayConfig(iterations=500, schedule=ConstantStep(5.0), mode="stackelberg", seed=0)
        with pytest.raises(DivergenceError):
            costal_run(game, frozen_quadratic_set(), cfg, (2.0, 2.0))

    def test_mode_game_mismatch(self):
        game = olsder("simultaneous")
        cfg = PlayConfig(iterations=10, schedule=ConstantStep(0.01), mode="stackelberg", seed=0)
        with pytest.raises(ConfigError):
            costal_run(game, olsder_affine_sets("simultaneous"), cfg, (1.0, 1.0))

    def test_initial_profile_validated(self):
        game = leaders_dilemma(-1.5)
        cfg = PlayConfig(iterations=10, schedule=ConstantStep(0.01), mode="stackelberg", seed=0)
        with pytest.raises(DomainError):
            costal_run(game, frozen_quadratic_set(), cfg, (0.0, 5.0))


class TestGdBaseline:
    def test_dilemma_saddle_trap(self):
        game = leaders_dilemma(-1.5)
        cfg = PlayConfig(iterations=10000, schedule=RobbinsMonroStep(0.05, 0.6),
                         mode="stackelberg", seed=0)
        trace = gd_baseline_run(game, cfg, (0.5, 0.5))
        final = trace.final
        assert abs(final.actions[0] - final.actions[1]) < 1e-3
        assert abs(final.objectives[0]) < 1e-3
        assert abs(final.objectives[1]) < 1e-3

    def test_olsder_simultaneous_reaches_nash(self):
        game = olsder("simultaneous")
        cfg = PlayConfig(iterations=5000, schedule=RobbinsMonroStep(0.01, 0.6),
                         mode="simultaneous", seed=0)
        final = gd_baseline_run(game, cfg, (200.0, 200.0)).final
        assert final.actions[0] == pytest.approx(123.98, abs=0.5)
        assert final.actions[1] == pytest.approx(61.6, abs=0.5)

    def test_constant_trace_at_stationary_start(self):
        game = leaders_dilemma(-1.5)
        cfg = PlayConfig(iterations=100, schedule=ConstantStep(0.1), mode="stackelberg", seed=0)
        trace = gd_baseline_run(game, cfg, (0.25, 0.25))
        for row in trace.rows:
            assert row.actions == (0.25, 0.25)


class TestTraceCsv:
    def test_round_trip(self, tmp_path):
        game = olsder("stackelberg")
        cfg = PlayConfig(iterations=20, schedule=ConstantStep(0.01), mode="stackelberg", seed=0)
        trace = costal_run(game, olsder_affine_sets("stackelberg"), cfg, (100.0,))
        rows = trace.to_rows()
        assert rows[0] == ["t", "x_1", "y", "grad_1", "f_1", "g"]
        path = tmp_path / "trace.csv"
        with open(path, "w") as handle:
            handle.write("\n".join(",".join(r) for r in rows))
        loaded = read_trace_csv(path)
        assert len(loaded.rows) == len(trace.rows)
        for a, b in zip(trace.rows, loaded.rows):
            assert a.actions == b.actions
            assert a.follower == b.follower
            assert a.objectives == b.objectives
            assert a.follower_objective == b.follower_objective
            assert all(x.total == y.total for x, y in zip(a.gradients, b.gradients))

    def test_no_follower_columns_empty(self):
        game = olsder("simultaneous")
        cfg = PlayConfig(iterations=5, schedule=ConstantStep(0.01), mode="simultaneous", seed=0)
        trace = costal_run(game, olsder_affine_sets("simultaneous"), cfg, (100.0, 100.0))
        rows = trace.to_rows()
        assert rows[0] == ["t", "x_1", "x_2", "y", "grad_1", "grad_2", "f_1", "f_2", "g"]
        y_idx = rows[0].index("y")
        g_idx = rows[0].index("g")
        assert all(r[y_idx] == "" and r[g_idx] == "" for r in rows[1:])
