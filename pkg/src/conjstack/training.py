"""Conjecture training: noisy best-response sampling and mini-batch SGD.

Stage one of the two-stage procedure. `generate_samples` draws uniform
profiles, records each player's noisy best response, and builds one dataset
per (owner, target) pair. `train_conjectures` then fits every trainable
model by stochastic gradient descent on the mean squared prediction error.

SGD runs in an internally standardized coordinate frame (inputs and
responses shifted/scaled to unit spread) and the fitted parameters are
folded back exactly afterwards; without this the Olsder action scale
(hundreds) would force uselessly small learning rates. The reported loss
curve is always in raw response units.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conjectures import Affine, ConjectureModel, ConjectureSet, NeuralNet, Polynomial
from .games import ConfigError, GameSpec, follower_best_response, leader_best_response


class TrainingError(RuntimeError):
    """Training produced a non-finite loss."""


@dataclass(frozen=True)
class SamplePair:
    own_action: float
    observed_response: float


@dataclass(frozen=True)
class SampleSet:
    """Dataset of (own action, noisy observed response) pairs.

    `target` is the observed leader's index, or None for the follower.
    """

    owner: int
    target: int | None
    pairs: tuple[SamplePair, ...]

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.array([p.own_action for p in self.pairs])
        ys = np.array([p.observed_response for p in self.pairs])
        return xs, ys


@dataclass(frozen=True)
class TrainConfig:
    samples: int
    noise_std: float
    batch_size: int
    epochs: int
    learning_rate: float
    seed: int

    def __post_init__(self) -> None:
        if self.samples <= 0 or self.batch_size <= 0 or self.epochs <= 0:
            raise ConfigError("samples, batch_size and epochs must be positive")
        if self.learning_rate <= 0.0:
            raise ConfigError("learning_rate must be positive")
        if self.noise_std < 0.0:
            raise ConfigError("noise_std must be nonnegative")
        if self.batch_size > self.samples:
            raise ConfigError(
                f"batch_size {self.batch_size} exceeds sample count {self.samples}"
            )


def model_id(owner: int, target: int | None) -> str:
    suffix = "follower" if target is None else f"leader{target}"
    return f"leader{owner}.{suffix}"


def generate_samples(game: GameSpec, cfg: TrainConfig) -> list[SampleSet]:
    """Draw T uniform profiles and record every player's noisy best response.

    Per round: a fresh uniform action per leader, a uniform follower action
    (when a follower exists), then one independent Gaussian disturbance per
    observation. Each leader's best response is computed against the round's
    sampled peers and follower action; the follower responds to the sampled
    leader profile. Observations are stored unclipped. Deterministic for a
    fixed seed: the draw order is leaders ascending, follower, follower
    noise, then per-leader noise.
    """
    rng = np.random.default_rng(cfg.seed)
    n = game.leader_count
    has_follower = game.follower is not None
    response_pairs: dict[tuple[int, int | None], list[SamplePair]] = {}
    for i in range(n):
        for j in range(n):
            if j != i:
                response_pairs[(i, j)] = []
        if has_follower:
            response_pairs[(i, None)] = []

    for _ in range(cfg.samples):
        x = tuple(rng.uniform(b.lower, b.upper) for b in game.boxes)
        y = None
        y_observed = None
        if has_follower:
            fb = game.follower.box
            y = rng.uniform(fb.lower, fb.upper)
            y_observed = follower_best_response(game, x) + rng.normal(0.0, cfg.noise_std)
        responses = []
        for i in range(n):
            others = tuple(x[j] for j in range(n) if j != i)
            best = leader_best_response(game, i, others, y)
            responses.append(best + rng.normal(0.0, cfg.noise_std))
        for i in range(n):
            if has_follower:
                response_pairs[(i, None)].append(SamplePair(x[i], y_observed))
            for j in range(n):
                if j != i:
                    response_pairs[(i, j)].append(SamplePair(x[i], responses[j]))

    out = []
    for i in range(n):
        for j in sorted(j for j in range(n) if j != i):
            out.append(SampleSet(i, j, tuple(response_pairs[(i, j)])))
        if has_follower:
            out.append(SampleSet(i, None, tuple(response_pairs[(i, None)])))
    return out


# ---------------------------------------------------------------------------
# Standardized-frame parameter maps (exact in both directions)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Frame:
    mu_x: float
    s_x: float
    mu_y: float
    s_y: float


def _frame_from(xs: np.ndarray, ys: np.ndarray) -> _Frame:
    s_x = float(np.std(xs))
    s_y = float(np.std(ys))
    return _Frame(
        mu_x=float(np.mean(xs)),
        s_x=s_x if s_x > 0.0 else 1.0,
        mu_y=float(np.mean(ys)),
        s_y=s_y if s_y > 0.0 else 1.0,
    )


def _poly_affine_compose(coeffs: Sequence[float], shift: float, scale: float) -> np.ndarray:
    """Coefficients of p(shift + scale * t) given p's coefficients."""
    acc = np.array([coeffs[-1]], dtype=float)
    for c in list(coeffs[-2::-1]):
        acc = np.polynomial.polynomial.polymul(acc, np.array([shift, scale]))
        acc = np.polynomial.polynomial.polyadd(acc, np.array([c]))
    return acc


def _standardized_seed(model: ConjectureModel) -> ConjectureModel:
    """Fresh same-kind model whose parameters are read in the standardized frame.

    A trainable model's initial parameters are an optimization seed, not a
    raw-space function, so they are reused verbatim in the frame where SGD
    actually runs: zeros predict the response mean and the seeded network
    weights keep initial derivatives O(1) regardless of the game's scale.
    """
    if isinstance(model, Affine):
        return Affine(model.a, model.b)
    if isinstance(model, Polynomial):
        return Polynomial(model.coefficients)
    if isinstance(model, NeuralNet):
        return NeuralNet(
            w1=model.w1.copy(), b1=model.b1.copy(), w2=model.w2.copy(), b2=model.b2
        )
    raise ConfigError(f"unknown model type {type(model).__name__}")


def _fold_back(model: ConjectureModel, std: ConjectureModel, fr: _Frame) -> None:
    """Write the trained standardized parameters back into `model`, exactly."""
    if isinstance(model, Affine):
        a = std.a * fr.s_y / fr.s_x
        model.a = a
        model.b = fr.mu_y + fr.s_y * std.b - a * fr.mu_x
    elif isinstance(model, Polynomial):
        composed = _poly_affine_compose(std.coefficients, -fr.mu_x / fr.s_x, 1.0 / fr.s_x)
        composed = composed * fr.s_y
        composed[0] += fr.mu_y
        padded = np.zeros(len(model.coefficients))
        padded[: len(composed)] = composed
        model.coefficients = tuple(padded)
    elif isinstance(model, NeuralNet):
        w1 = std.w1 / fr.s_x
        model.w1 = w1
        model.b1 = std.b1 - w1 * fr.mu_x
        model.w2 = std.w2 * fr.s_y
        model.b2 = std.b2 * fr.s_y + fr.mu_y
    else:
        raise ConfigError(f"unknown model type {type(model).__name__}")


def _design_matrix(model: ConjectureModel, xs: np.ndarray) -> np.ndarray:
    """Columns ordered to match the model's parameter vector."""
    if isinstance(model, Affine):
        return np.column_stack([xs, np.ones_like(xs)])
    return np.vander(xs, N=len(model.coefficients), increasing=True)


def _batch_loss_gradient(model: ConjectureModel, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Gradient of the batch loss (1/B) * sum (y - pred)^2 w.r.t. the params."""
    b = xs.shape[0]
    if isinstance(model, (Affine, Polynomial)):
        design = _design_matrix(model, xs)
        residual = design @ model.get_params() - ys
        return (2.0 / b) * (design.T @ residual)
    if isinstance(model, NeuralNet):
        z = np.outer(xs, model.w1) + model.b1
        t = np.tanh(z)
        pred = t @ model.w2 + model.b2
        common = (2.0 / b) * (pred - ys)
        sech2 = 1.0 - t * t
        d_w1 = (common[:, None] * sech2 * xs[:, None]).T @ np.ones(b) * model.w2
        d_b1 = (common[:, None] * sech2).T @ np.ones(b) * model.w2
        d_w2 = t.T @ common
        d_b2 = float(np.sum(common))
        return np.concatenate([d_w1, d_b1, d_w2, [d_b2]])
    raise ConfigError(f"unknown model type {type(model).__name__}")


def _mean_squared_error(model: ConjectureModel, xs: np.ndarray, ys: np.ndarray) -> float:
    if isinstance(model, (Affine, Polynomial)):
        pred = _design_matrix(model, xs) @ model.get_params()
    else:
        pred = np.tanh(np.outer(xs, model.w1) + model.b1) @ model.w2 + model.b2
    return float(np.mean((ys - pred) ** 2))


def train_conjectures(
    sample_sets: Sequence[SampleSet],
    conjectures: ConjectureSet,
    cfg: TrainConfig,
) -> tuple[ConjectureSet, dict[str, list[float]]]:
    """Fit every trainable model to its dataset; frozen models are skipped.

    Models are trained independently, each with a seed derived from the
    config seed XOR the model's canonical index, so results do not depend on
    training order. Returns the same ConjectureSet (mutated in place) and a
    per-model curve of the post-epoch mean squared error in raw units.
    """
    lookup = {(s.owner, s.target): s for s in sample_sets}
    losses: dict[str, list[float]] = {}
    for index, (i, j, model) in enumerate(conjectures.iter_models()):
        if not model.trainable:
            continue
        key = (i, j)
        if key not in lookup:
            raise ConfigError(f"no dataset for trainable conjecture {model_id(i, j)}")
        xs_raw, ys_raw = lookup[key].arrays()
        fr = _frame_from(xs_raw, ys_raw)
        xs = (xs_raw - fr.mu_x) / fr.s_x
        ys = (ys_raw - fr.mu_y) / fr.s_y
        std = _standardized_seed(model)
        rng = np.random.default_rng(cfg.seed ^ index)
        curve: list[float] = []
        for epoch in range(cfg.epochs):
            order = rng.permutation(len(xs))
            for start in range(0, len(xs), cfg.batch_size):
                batch = order[start : start + cfg.batch_size]
                grad = _batch_loss_gradient(std, xs[batch], ys[batch])
                std.set_params(std.get_params() - cfg.learning_rate * grad)
            epoch_loss = fr.s_y**2 * _mean_squared_error(std, xs, ys)
            if not np.isfinite(epoch_loss):
                raise TrainingError(
                    f"non-finite loss for {model_id(i, j)} at epoch {epoch}"
                )
            curve.append(epoch_loss)
        _fold_back(model, std, fr)
        losses[model_id(i, j)] = curve
    return conjectures, losses


# ---------------------------------------------------------------------------
# CSV persistence
# ---------------------------------------------------------------------------


def samples_to_rows(sample_sets: Sequence[SampleSet]) -> list[list[str]]:
    rows = [["t", "owner", "target", "own_action", "observed_response"]]
    for dataset in sample_sets:
        target = "y" if dataset.target is None else str(dataset.target)
        for t, pair in enumerate(dataset.pairs):
            rows.append(
                [str(t), str(dataset.owner), target, repr(pair.own_action), repr(pair.observed_response)]
            )
    return rows


def read_samples_csv(path) -> list[SampleSet]:
    grouped: dict[tuple[int, int | None], list[SamplePair]] = {}
    order: list[tuple[int, int | None]] = []
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            owner = int(row["owner"])
            target = None if row["target"] == "y" else int(row["target"])
            key = (owner, target)
            if key not in grouped:
                grouped[key] = []
                order.append(key)
            grouped[key].append(
                SamplePair(float(row["own_action"]), float(row["observed_response"]))
            )
    return [SampleSet(owner, target, tuple(grouped[(owner, target)])) for owner, target in order]


def losses_to_rows(losses: dict[str, list[float]]) -> list[list[str]]:
    rows = [["model_id", "epoch", "loss"]]
    for mid, curve in losses.items():
        for epoch, loss in enumerate(curve):
            rows.append([mid, str(epoch), repr(loss)])
    return rows
