"""Conjecture models: values, derivatives, loss gradients, wire format."""
import json

import numpy as np
import pytest

from conjstack.conjectures import (
    Affine,
    ConjectureSet,
    LeaderConjectures,
    NeuralNet,
    ParseError,
    Polynomial,
    deserialize,
    dumps_document,
    serialize,
)


def central_diff(fn, x, h=1e-6):
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1.0)


def random_model(kind, rng):
    if kind == "affine":
        return Affine(a=rng.uniform(-3, 3), b=rng.uniform(-3, 3))
    if kind == "polynomial":
        degree = int(rng.integers(1, 5))
        return Polynomial(tuple(rng.uniform(-2, 2, size=degree + 1)))
    return NeuralNet.initialize(int(rng.integers(2, 12)), seed=int(rng.integers(1 << 30)))


class TestPredict:
    def test_affine_reaction_line(self):
        # The Olsder follower line through the Nash point.
        assert Affine(0.25, 30.6).predict(123.98) == pytest.approx(61.595, abs=1e-12)

    def test_zero_polynomial(self):
        model = Polynomial((0.0,))
        for x in (-2.0, 0.0, 1.7, 35.0):
            assert model.predict(x) == 0.0

    def test_identity_affine(self):
        assert Affine(1.0, 0.0).predict(7.0) == 7.0

    def test_neural_formula(self):
        net = NeuralNet(w1=[0.5, -1.0], b1=[0.1, 0.2], w2=[2.0, 0.3], b2=-0.7)
        x = 0.9
        manual = -0.7 + 2.0 * np.tanh(0.5 * x + 0.1) + 0.3 * np.tanh(-1.0 * x + 0.2)
        assert net.predict(x) == pytest.approx(manual, abs=1e-15)


class TestInputDerivative:
    def test_affine_constant_slope(self):
        model = Affine(-1.3, 4.0)
        for x in (-5.0, 0.0, 2.5):
            assert model.input_derivative(x) == -1.3

    def test_square_polynomial(self):
        assert Polynomial((0.0, 0.0, 1.0)).input_derivative(1.5) == 3.0

    def test_neural_matches_finite_difference(self):
        net = NeuralNet.initialize(10, seed=5)
        fd = central_diff(net.predict, 0.3)
        assert rel_close(net.input_derivative(0.3), fd, 1e-6)

    @pytest.mark.parametrize("kind", ["affine", "polynomial", "neural"])
    def test_derivative_sweep(self, kind):
        """1000 random (model, x) pairs per family against central differences."""
        rng = np.random.default_rng(hash(kind) % (1 << 32))
        for _ in range(100):
            model = random_model(kind, rng)
            for x in rng.uniform(-2, 2, size=10):
                fd = central_diff(model.predict, x)
                assert rel_close(model.input_derivative(x), fd, 1e-6)


class TestParameterGradient:
    def test_zero_residual(self):
        model = Affine(0.3, -1.0)
        assert np.all(model.parameter_gradient(2.0, 0.0) == 0.0)

    def test_affine_unit_residual(self):
        grad = Affine(0.3, -1.0).parameter_gradient(2.0, 1.0)
        assert grad.tolist() == [-2.0, -1.0]

    @pytest.mark.parametrize("kind", ["affine", "polynomial", "neural"])
    def test_gradient_sweep(self, kind):
        """Gradient of the half-squared loss vs finite differences, 1000 cases."""
        rng = np.random.default_rng(1 + hash(kind) % (1 << 32))
        for _ in range(100):
            model = random_model(kind, rng)
            for _ in range(10):
                x = rng.uniform(-2, 2)
                target = rng.uniform(-2, 2)
                theta = model.get_params()
                residual = target - model.predict(x)
                grad = model.parameter_gradient(x, residual)

                def loss(vec):
                    model.set_params(vec)
                    value = 0.5 * (target - model.predict(x)) ** 2
                    model.set_params(theta)
                    return value

                for p in range(len(theta)):
                    step = np.zeros_like(theta)
                    step[p] = 1e-6
                    fd = (loss(theta + step) - loss(theta - step)) / 2e-6
                    assert rel_close(grad[p], fd, 1e-5)


class TestAffinePolynomialAgreement:
    def test_bitwise_equality(self):
        rng = np.random.default_rng(99)
        for _ in range(1000):
            a, b = rng.uniform(-4, 4, size=2)
            x = rng.uniform(-4, 4)
            affine = Affine(a, b)
            poly = Polynomial((b, a))
            assert affine.predict(x) == poly.predict(x)
            assert affine.input_derivative(x) == poly.input_derivative(x)


def example_set(with_follower=True):
    rng = np.random.default_rng(17)
    leaders = []
    for i in range(2):
        about = {1 - i: random_model(("affine", "polynomial")[i], rng)}
        follower = NeuralNet.initialize(4, seed=20 + i) if with_follower else None
        leaders.append(LeaderConjectures(about=about, follower=follower))
    return ConjectureSet(leaders=leaders)


class TestSerialization:
    def test_round_trip_bit_exact(self):
        original = example_set()
        doc = json.loads(dumps_document(serialize(original)))
        restored = deserialize(doc)
        for (i1, j1, m1), (i2, j2, m2) in zip(
            original.iter_models(), restored.iter_models()
        ):
            assert (i1, j1) == (i2, j2)
            assert m1.kind == m2.kind
            assert m1.trainable == m2.trainable
            assert np.array_equal(m1.get_params(), m2.get_params())

    def test_seventeen_digit_floats_reload_exactly(self):
        values = np.random.default_rng(3).uniform(-1e3, 1e3, size=200)
        for v in values:
            assert float(format(v, ".17g")) == v

    def test_affine_document(self):
        doc = {
            "leaders": [
                {
                    "about": [{"target": 1, "kind": "affine", "params": {"a": 1, "b": 0}}],
                    "follower": None,
                },
                {
                    "about": [{"target": 0, "kind": "affine", "params": {"a": 2, "b": 1}}],
                    "follower": None,
                },
            ]
        }
        restored = deserialize(doc)
        model = restored.leaders[0].about[1]
        assert isinstance(model, Affine)
        assert (model.a, model.b) == (1.0, 0.0)

    def test_neural_width_mismatch(self):
        doc = serialize(example_set())
        doc["leaders"][0]["follower"]["params"]["w2"] = [0.0] * 9
        doc["leaders"][0]["follower"]["params"]["hidden_width"] = 10
        with pytest.raises(ParseError, match=r"\$\.leaders\[0\]\.follower\.params\.w1"):
            deserialize(doc)

    def test_unknown_kind(self):
        doc = {
            "leaders": [
                {"about": [{"target": 1, "kind": "cubic-spline", "params": {}}], "follower": None}
            ]
        }
        with pytest.raises(ParseError, match="unknown conjecture kind"):
            deserialize(doc)

    def test_missing_field_path(self):
        doc = {
            "leaders": [
                {"about": [{"target": 1, "kind": "affine", "params": {"a": 1.0}}], "follower": None}
            ]
        }
        with pytest.raises(ParseError, match=r"\$\.leaders\[0\]\.about\[0\]\.params"):
            deserialize(doc)

    def test_validate_counts(self):
        conj = example_set(with_follower=True)
        conj.validate(leader_count=2, has_follower=True)
        with pytest.raises(Exception):
            conj.validate(leader_count=2, has_follower=False)
        with pytest.raises(Exception):
            conj.validate(leader_count=3, has_follower=True)

    def test_model_count_invariant(self):
        conj = example_set(with_follower=True)
        models = list(conj.iter_models())
        # N*(N-1) peer conjectures plus N follower conjectures for N=2.
        assert len(models) == 2 * 1 + 2
