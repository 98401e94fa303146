"""Conjecture families: affine, polynomial, and one-hidden-layer tanh networks.

Each model maps a leader's own scalar action to a prediction of another
player's action and exposes three views the rest of the engine needs: the
value, the exact derivative with respect to the input, and the gradient of
the per-sample squared loss with respect to the parameter vector.
Prediction and derivatives are pure; parameters change only through
`set_params`, which the trainer owns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .games import ConfigError


class ParseError(ValueError):
    """A conjecture document failed validation; the message carries the path."""


@dataclass
class Affine:
    a: float
    b: float
    trainable: bool = True
    kind: str = field(default="affine", init=False, repr=False)

    def predict(self, x: float) -> float:
        return self.a * x + self.b

    def input_derivative(self, x: float) -> float:
        return self.a

    def get_params(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=float)

    def set_params(self, params: np.ndarray) -> None:
        self.a, self.b = float(params[0]), float(params[1])

    def parameter_gradient(self, x: float, residual: float) -> np.ndarray:
        return np.array([-residual * x, -residual], dtype=float)

    def params_doc(self) -> dict:
        return {"a": self.a, "b": self.b}


@dataclass
class Polynomial:
    coefficients: tuple[float, ...]
    trainable: bool = True
    kind: str = field(default="polynomial", init=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.coefficients) == 0:
            raise ConfigError("polynomial conjecture needs at least one coefficient")
        self.coefficients = tuple(float(c) for c in self.coefficients)

    def predict(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def input_derivative(self, x: float) -> float:
        acc = 0.0
        for g in range(len(self.coefficients) - 1, 0, -1):
            acc = acc * x + g * self.coefficients[g]
        return acc

    def get_params(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=float)

    def set_params(self, params: np.ndarray) -> None:
        self.coefficients = tuple(float(c) for c in params)

    def parameter_gradient(self, x: float, residual: float) -> np.ndarray:
        powers = np.array([x**g for g in range(len(self.coefficients))], dtype=float)
        return -residual * powers

    def params_doc(self) -> dict:
        return {"coefficients": list(self.coefficients)}


@dataclass
class NeuralNet:
    """b2 + sum_h w2[h] * tanh(w1[h] * x + b1[h]); smooth by construction."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    trainable: bool = True
    kind: str = field(default="neural", init=False, repr=False)

    def __post_init__(self) -> None:
        self.w1 = np.asarray(self.w1, dtype=float)
        self.b1 = np.asarray(self.b1, dtype=float)
        self.w2 = np.asarray(self.w2, dtype=float)
        self.b2 = float(self.b2)
        h = self.w1.shape[0]
        if not (self.b1.shape == (h,) and self.w2.shape == (h,)):
            raise ConfigError("neural conjecture weight vectors disagree on hidden width")

    @classmethod
    def initialize(cls, hidden_width: int, seed: int, trainable: bool = True) -> "NeuralNet":
        """Seeded uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero biases."""
        if hidden_width < 1:
            raise ConfigError(f"hidden width must be positive, got {hidden_width}")
        rng = np.random.default_rng(seed)
        bound = 1.0 / math.sqrt(hidden_width)
        return cls(
            w1=rng.uniform(-bound, bound, size=hidden_width),
            b1=np.zeros(hidden_width),
            w2=rng.uniform(-bound, bound, size=hidden_width),
            b2=0.0,
            trainable=trainable,
        )

    @property
    def hidden_width(self) -> int:
        return int(self.w1.shape[0])

    def predict(self, x: float) -> float:
        return float(self.b2 + self.w2 @ np.tanh(self.w1 * x + self.b1))

    def input_derivative(self, x: float) -> float:
        t = np.tanh(self.w1 * x + self.b1)
        return float(self.w2 @ (self.w1 * (1.0 - t * t)))

    def get_params(self) -> np.ndarray:
        return np.concatenate([self.w1, self.b1, self.w2, [self.b2]])

    def set_params(self, params: np.ndarray) -> None:
        h = self.hidden_width
        self.w1 = np.array(params[:h], dtype=float)
        self.b1 = np.array(params[h : 2 * h], dtype=float)
        self.w2 = np.array(params[2 * h : 3 * h], dtype=float)
        self.b2 = float(params[3 * h])

    def parameter_gradient(self, x: float, residual: float) -> np.ndarray:
        t = np.tanh(self.w1 * x + self.b1)
        sech2 = 1.0 - t * t
        d_w1 = self.w2 * sech2 * x
        d_b1 = self.w2 * sech2
        d_w2 = t
        return -residual * np.concatenate([d_w1, d_b1, d_w2, [1.0]])

    def params_doc(self) -> dict:
        return {
            "hidden_width": self.hidden_width,
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2,
        }


ConjectureModel = Affine | Polynomial | NeuralNet


@dataclass
class LeaderConjectures:
    """One leader's models: one per other leader, plus one for the follower."""

    about: dict[int, ConjectureModel]
    follower: ConjectureModel | None = None


@dataclass
class ConjectureSet:
    leaders: list[LeaderConjectures]

    def validate(self, leader_count: int, has_follower: bool) -> None:
        if len(self.leaders) != leader_count:
            raise ConfigError(
                f"conjecture set covers {len(self.leaders)} leaders, game has {leader_count}"
            )
        for i, lc in enumerate(self.leaders):
            expected = {j for j in range(leader_count) if j != i}
            if set(lc.about) != expected:
                raise ConfigError(
                    f"leader {i} must conjecture about exactly {sorted(expected)}, "
                    f"got {sorted(lc.about)}"
                )
            if has_follower and lc.follower is None:
                raise ConfigError(f"leader {i} is missing its follower conjecture")
            if not has_follower and lc.follower is not None:
                raise ConfigError(f"leader {i} has a follower conjecture but no follower exists")

    def iter_models(self) -> Iterator[tuple[int, int | None, ConjectureModel]]:
        """Canonical order: per leader ascending, peers ascending, follower last.

        The position in this iteration is the model index used for derived
        training seeds.
        """
        for i, lc in enumerate(self.leaders):
            for j in sorted(lc.about):
                yield i, j, lc.about[j]
            if lc.follower is not None:
                yield i, None, lc.follower


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def serialize(conjectures: ConjectureSet) -> dict:
    """Plain-dict document; render with `dumps_document` for the wire format."""
    doc_leaders = []
    for lc in conjectures.leaders:
        about = [
            {
                "target": j,
                "kind": lc.about[j].kind,
                "frozen": not lc.about[j].trainable,
                "params": lc.about[j].params_doc(),
            }
            for j in sorted(lc.about)
        ]
        follower = None
        if lc.follower is not None:
            follower = {
                "kind": lc.follower.kind,
                "frozen": not lc.follower.trainable,
                "params": lc.follower.params_doc(),
            }
        doc_leaders.append({"about": about, "follower": follower})
    return {"version": 1, "leaders": doc_leaders}


def dumps_document(doc) -> str:
    """JSON text with every float at 17 significant digits (bit-exact reload)."""
    pieces: list[str] = []
    _write_json(doc, pieces)
    return "".join(pieces)


def _write_json(node, out: list[str]) -> None:
    if isinstance(node, dict):
        out.append("{")
        for idx, (key, value) in enumerate(node.items()):
            if idx:
                out.append(", ")
            out.append(f'"{key}": ')
            _write_json(value, out)
        out.append("}")
    elif isinstance(node, (list, tuple)):
        out.append("[")
        for idx, value in enumerate(node):
            if idx:
                out.append(", ")
            _write_json(value, out)
        out.append("]")
    elif isinstance(node, bool):
        out.append("true" if node else "false")
    elif isinstance(node, (int, np.integer)):
        out.append(str(int(node)))
    elif isinstance(node, (float, np.floating)):
        out.append(format(float(node), ".17g"))
    elif node is None:
        out.append("null")
    elif isinstance(node, str):
        out.append('"' + node.replace("\\", "\\\\").replace('"', '\\"') + '"')
    else:
        raise TypeError(f"cannot serialize {type(node).__name__}")


def _expect(doc: dict, key: str, path: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(f"{path}: missing field {key!r}")
    return doc[key]


def _float_field(doc: dict, key: str, path: str) -> float:
    value = _expect(doc, key, path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{path}.{key}: expected a number, got {type(value).__name__}")
    return float(value)


def _float_list(doc: dict, key: str, path: str) -> list[float]:
    value = _expect(doc, key, path)
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ParseError(f"{path}.{key}: expected a list of numbers")
    return [float(v) for v in value]


def _model_from_doc(doc: dict, path: str) -> ConjectureModel:
    kind = _expect(doc, "kind", path)
    frozen = bool(doc.get("frozen", False))
    params = _expect(doc, "params", path)
    ppath = f"{path}.params"
    if kind == "affine":
        return Affine(
            a=_float_field(params, "a", ppath),
            b=_float_field(params, "b", ppath),
            trainable=not frozen,
        )
    if kind == "polynomial":
        coeffs = _float_list(params, "coefficients", ppath)
        if not coeffs:
            raise ParseError(f"{ppath}.coefficients: must not be empty")
        return Polynomial(tuple(coeffs), trainable=not frozen)
    if kind == "neural":
        width = _expect(params, "hidden_width", ppath)
        if not isinstance(width, int) or width < 1:
            raise ParseError(f"{ppath}.hidden_width: expected a positive integer")
        vectors = {key: _float_list(params, key, ppath) for key in ("w1", "b1", "w2")}
        for key, vec in vectors.items():
            if len(vec) != width:
                raise ParseError(
                    f"{ppath}.{key}: expected {width} values, got {len(vec)}"
                )
        return NeuralNet(
            w1=np.array(vectors["w1"]),
            b1=np.array(vectors["b1"]),
            w2=np.array(vectors["w2"]),
            b2=_float_field(params, "b2", ppath),
            trainable=not frozen,
        )
    raise ParseError(f"{path}.kind: unknown conjecture kind {kind!r}")


def deserialize(doc: dict) -> ConjectureSet:
    leaders_doc = _expect(doc, "leaders", "$")
    if not isinstance(leaders_doc, list):
        raise ParseError("$.leaders: expected a list")
    leaders = []
    for i, leader_doc in enumerate(leaders_doc):
        path = f"$.leaders[{i}]"
        about_doc = _expect(leader_doc, "about", path)
        if not isinstance(about_doc, list):
            raise ParseError(f"{path}.about: expected a list")
        about: dict[int, ConjectureModel] = {}
        for k, entry in enumerate(about_doc):
            epath = f"{path}.about[{k}]"
            target = _expect(entry, "target", epath)
            if not isinstance(target, int) or isinstance(target, bool):
                raise ParseError(f"{epath}.target: expected an integer leader index")
            if target in about:
                raise ParseError(f"{epath}.target: duplicate target {target}")
            about[target] = _model_from_doc(entry, epath)
        follower_doc = leader_doc.get("follower") if isinstance(leader_doc, dict) else None
        follower = (
            _model_from_doc(follower_doc, f"{path}.follower")
            if follower_doc is not None
            else None
        )
        leaders.append(LeaderConjectures(about=about, follower=follower))
    return ConjectureSet(leaders=leaders)
