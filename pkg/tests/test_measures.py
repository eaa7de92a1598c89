import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import measures, random_measure
from swarmkin.errors import DimensionMismatch, EmptyMeasure, NonpositiveMass
from swarmkin.measures import (
    DiscreteMeasure,
    PhasePoint,
    SpatialMeasure,
    first_marginal,
    integrate,
    mean_velocity,
    normalize,
    push_forward,
    support_radius,
    translate,
    velocity_diameter,
)


def P(x, v):
    return PhasePoint(np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(v, float)))


class TestNormalize:
    def test_proportional(self):
        f = normalize([(P(0, 0), 2.0), (P(1, 1), 2.0)])
        assert np.array_equal(f.m, [0.5, 0.5])

    def test_single_atom(self):
        assert normalize([(P(3, 1), 7.0)]).m.tolist() == [1.0]

    def test_negative_mass(self):
        with pytest.raises(NonpositiveMass):
            normalize([(P(0, 0), 1.0), (P(1, 0), -1.0)])

    def test_zero_mass(self):
        with pytest.raises(NonpositiveMass):
            normalize([(P(0, 0), 0.0)])

    def test_empty(self):
        with pytest.raises(EmptyMeasure):
            normalize([])

    def test_order_preserved(self):
        f = normalize([(P(k, -k), k + 1.0) for k in range(5)])
        assert f.x[:, 0].tolist() == [0, 1, 2, 3, 4]

    def test_mixed_dims(self):
        with pytest.raises(DimensionMismatch):
            normalize([(P([0, 0], [0, 0]), 1.0), (P(0, 0), 1.0)])

    @given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=50))
    def test_sums_to_one(self, ms):
        f = normalize([(P(i, 0), m) for i, m in enumerate(ms)])
        assert abs(f.m.sum() - 1.0) <= 1e-12


class TestConstruction:
    def test_rejects_unnormalized(self):
        with pytest.raises(NonpositiveMass):
            DiscreteMeasure(np.zeros((2, 1)), np.zeros((2, 1)), np.array([0.5, 0.6]))

    def test_rejects_tiny_mass(self):
        with pytest.raises(NonpositiveMass):
            DiscreteMeasure.from_arrays([[0.0], [1.0]], [[0.0], [0.0]], [1.0, 1e-16])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            DiscreteMeasure.from_arrays([[np.nan]], [[0.0]])

    def test_immutable(self):
        f = DiscreteMeasure.from_arrays([[0.0]], [[0.0]])
        with pytest.raises(ValueError):
            f.x[0, 0] = 1.0

    def test_json_roundtrip(self, rng):
        f = random_measure(rng, 7, 2)
        g = DiscreteMeasure.from_json(f.to_json())
        assert np.array_equal(f.x, g.x) and np.array_equal(f.v, g.v)
        assert np.allclose(f.m, g.m, rtol=0, atol=1e-15)

    def test_json_schema(self):
        f = DiscreteMeasure.from_arrays([[1.0, 2.0]], [[3.0, 4.0]])
        assert json.loads(f.to_json()) == {"dim": 2, "atoms": [{"x": [1.0, 2.0], "v": [3.0, 4.0], "m": 1.0}]}

    def test_json_load_tolerance(self):
        ok = {"dim": 1, "atoms": [{"x": [0], "v": [0], "m": 0.5}, {"x": [1], "v": [0], "m": 0.5 + 5e-10}]}
        assert abs(DiscreteMeasure.from_dict(ok).m.sum() - 1) < 1e-12
        bad = {"dim": 1, "atoms": [{"x": [0], "v": [0], "m": 0.5}, {"x": [1], "v": [0], "m": 0.5 + 1e-8}]}
        with pytest.raises(NonpositiveMass):
            DiscreteMeasure.from_dict(bad)

    def test_duplicates_kept(self):
        f = DiscreteMeasure.from_arrays([[0.0], [0.0]], [[1.0], [1.0]])
        assert f.n == 2


class TestPushForward:
    def test_identity(self, rng):
        f = random_measure(rng, 6, 2)
        g = push_forward(f, lambda p: p)
        assert np.array_equal(f.x, g.x) and np.array_equal(f.v, g.v) and np.array_equal(f.m, g.m)

    def test_translation_of_dirac(self):
        f = DiscreteMeasure.from_arrays([[0.0, 0.0]], [[0.0, 0.0]])
        a = np.array([1.5, -2.0])
        g = push_forward(f, lambda p: PhasePoint(p.x + a, p.v))
        assert g.x.tolist() == [[1.5, -2.0]] and g.v.tolist() == [[0.0, 0.0]]

    def test_composition(self, rng):
        for _ in range(10):
            f = random_measure(rng, 8, 2)
            A1, A2 = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
            b1, b2 = rng.normal(size=4), rng.normal(size=4)

            def aff(A, b):
                def T(p):
                    z = A @ np.concatenate([p.x, p.v]) + b
                    return PhasePoint(z[:2], z[2:])
                return T

            T1, T2 = aff(A1, b1), aff(A2, b2)
            g = push_forward(push_forward(f, T1), T2)
            h = push_forward(f, lambda p: T2(T1(p)))
            assert np.array_equal(g.x, h.x) and np.array_equal(g.v, h.v)

    def test_vectorized_matches(self, rng):
        f = random_measure(rng, 9, 1)
        a = push_forward(f, lambda x, v: (x + v, 2 * v), vectorized=True)
        b = push_forward(f, lambda p: PhasePoint(p.x + p.v, 2 * p.v))
        assert np.array_equal(a.x, b.x) and np.array_equal(a.v, b.v)

    def test_integral_identity(self, rng):
        f = random_measure(rng, 10, 2)
        T = lambda p: PhasePoint(np.sin(p.x), p.v * p.x)
        zeta = lambda p: float(np.exp(-np.sum(p.x**2)) + p.v[0])
        lhs = math.fsum(m * zeta(T(f.atom(i))) for i, m in enumerate(f.m))
        assert abs(lhs - integrate(push_forward(f, T), zeta)) < 1e-12

    @given(measures(max_atoms=10), st.floats(-5, 5), st.floats(-5, 5))
    def test_mass_preserved(self, f, a, b):
        g = push_forward(f, lambda p: PhasePoint(p.x * a + b, p.v - a))
        assert np.array_equal(g.m, f.m)


class TestMarginal:
    def test_dirac(self):
        rho = first_marginal(DiscreteMeasure.from_arrays([[2.0]], [[5.0]]))
        assert rho.x.tolist() == [[2.0]] and rho.m.tolist() == [1.0]

    def test_no_merging(self):
        rho = first_marginal(DiscreteMeasure.from_arrays([[0.0], [0.0]], [[1.0], [-1.0]]))
        assert rho.n == 2 and rho.m.tolist() == [0.5, 0.5]

    def test_integral(self, rng):
        f = random_measure(rng, 12, 2)
        phi = lambda x: float(np.cos(x[0]) * x[1])
        direct = math.fsum(m * phi(x) for x, m in zip(f.x, f.m))
        assert abs(first_marginal(f).integrate(phi) - direct) < 1e-13

    @given(measures(max_atoms=8, dim=2), st.floats(-4, 4), st.floats(-4, 4))
    def test_translate_commutes(self, f, a0, a1):
        a = np.array([a0, a1])
        lhs = first_marginal(push_forward(f, lambda p: PhasePoint(p.x + a, p.v)))
        rhs = translate(first_marginal(f), a)
        assert np.array_equal(lhs.x, rhs.x) and np.array_equal(lhs.m, rhs.m)

    def test_spatial_measure_validation(self):
        with pytest.raises(NonpositiveMass):
            SpatialMeasure(np.zeros((2, 1)), np.array([0.7, 0.7]))


class TestDiagnostics:
    def test_support_radius_origin(self):
        assert support_radius(DiscreteMeasure.from_arrays([[0.0]], [[0.0]])) == 0.0

    def test_support_radius_345(self):
        f = DiscreteMeasure.from_arrays([[3.0], [0.0]], [[4.0], [1.0]])
        assert support_radius(f) == 5.0

    @given(measures(max_atoms=12))
    def test_support_radius_scan(self, f):
        norms = np.linalg.norm(np.hstack([f.x, f.v]), axis=1)
        r = support_radius(f)
        assert np.all(norms <= r) and np.any(norms == r)

    @given(measures(max_atoms=10, dim=2), st.floats(0, 2 * math.pi))
    def test_support_radius_rotation(self, f, th):
        R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        g = push_forward(f, lambda p: PhasePoint(R @ p.x, R @ p.v))
        assert abs(support_radius(g) - support_radius(f)) <= 1e-12 * (1 + support_radius(f))

    def test_mean_velocity(self):
        assert mean_velocity(DiscreteMeasure.from_arrays([[1.0]], [[2.5]])).tolist() == [2.5]
        f = DiscreteMeasure.from_arrays([[0.0], [1.0]], [[1.3], [-1.3]])
        assert mean_velocity(f).tolist() == [0.0]

    def test_mean_velocity_sum(self, rng):
        f = random_measure(rng, 9, 3)
        direct = sum(m * v for m, v in zip(f.m, f.v))
        assert np.allclose(mean_velocity(f), direct, rtol=0, atol=1e-14)

    def test_velocity_diameter(self):
        assert velocity_diameter(DiscreteMeasure.from_arrays([[0.0]], [[4.0]])) == 0.0
        f = DiscreteMeasure.from_arrays([[0.0], [0.0]], [[1.0], [-1.0]])
        assert velocity_diameter(f) == 1.0

    @given(measures(max_atoms=10, dim=2), st.floats(-10, 10), st.floats(-10, 10))
    def test_velocity_diameter_shift(self, f, a, b):
        g = f.with_state(f.x, f.v + np.array([a, b]))
        assert abs(velocity_diameter(g) - velocity_diameter(f)) <= 1e-9
