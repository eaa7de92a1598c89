import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmkin.errors import InvalidSpec, ShockSuspected
from swarmkin.hydro import (
    HydroConfig,
    HydroState,
    cell_measure,
    fields_csv,
    hydro_run,
    hydro_step,
    monokinetic_init,
    monokineticity_deviation,
    reconstruct_fields,
    stable_dt,
    total_variation,
)
from swarmkin.measures import DiscreteMeasure
from swarmkin.models import AlignmentSpec, ModelSpec, PotentialSpec, SelfPropulsionSpec
from swarmkin.transport import w1_1d

FREE = ModelSpec(dim=1, self_propulsion=SelfPropulsionSpec(0.0, 0.0))
DORSOGNA = ModelSpec(dim=1, self_propulsion=SelfPropulsionSpec(0.5, 0.5),
                     potential=PotentialSpec(C_A=1.0, C_R=0.5, l_A=1.0, l_R=0.5))


def bump(L, c, w):
    return lambda x: np.where(np.abs(x - c) < w, 1 + np.cos(np.pi * (x - c) / w), 0.0)


def uniform_state(n, L=1.0, u=0.0):
    return HydroState(n, L, np.full(n, 1.0 / L), np.full(n, float(u)))


class TestState:
    def test_mass_checked(self):
        with pytest.raises(ValueError):
            HydroState(4, 1.0, np.full(4, 2.0), np.zeros(4))

    def test_negative_density(self):
        with pytest.raises(ValueError):
            HydroState(2, 1.0, np.array([2.1, -0.1]), np.zeros(2))

    def test_from_profiles_normalizes(self):
        s = HydroState.from_profiles(100, 10.0, bump(10, 5, 2), lambda x: 0 * x)
        assert abs(s.mass - 1.0) < 1e-14

    def test_config_validation(self):
        with pytest.raises(InvalidSpec):
            HydroConfig(ModelSpec(dim=2))
        with pytest.raises(InvalidSpec):
            HydroConfig(ModelSpec(dim=1, alignment=AlignmentSpec(0.1)))
        with pytest.raises(InvalidSpec):
            HydroConfig(FREE, cfl=1.5)


class TestSolver:
    def test_constant_steady(self):
        s = uniform_state(64, u=0.0)
        out = hydro_run(s, HydroConfig(FREE, t_end=1.0))
        assert np.allclose(out[-1].rho, 1.0, atol=1e-13, rtol=0) and np.all(out[-1].u == 0.0)

    def test_uniform_with_potential(self):
        # constant density feels no net force on a periodic grid
        s = uniform_state(100, L=10.0, u=0.0)
        model = ModelSpec(dim=1, potential=PotentialSpec(C_A=1.0, C_R=0.5, l_A=1.0, l_R=0.5))
        out = hydro_run(s, HydroConfig(model, t_end=0.5))
        assert np.max(np.abs(out[-1].u)) < 1e-12

    def test_periodic_advection(self):
        L, c = 1.0, 0.5
        errs = []
        for n in (100, 200, 400):
            s = HydroState.from_profiles(n, L, bump(L, 0.5, 0.25), lambda x: c + 0 * x)
            sT = hydro_run(s, HydroConfig(FREE, t_end=L / c))[-1]
            errs.append(np.sum(np.abs(sT.rho - s.rho)) * s.dx)
            assert errs[-1] <= 40 * s.dx
        assert errs[0] / errs[1] > 1.7 and errs[1] / errs[2] > 1.7

    def test_scalar_ode(self):
        # uniform density: u' = u (alpha - beta u^2) has a closed form
        alpha, beta, u0, T = 1.0, 1.0, 0.5, 1.0
        model = ModelSpec(dim=1, self_propulsion=SelfPropulsionSpec(alpha, beta))
        sT = hydro_run(uniform_state(400, u=u0), HydroConfig(model, t_end=T))[-1]
        exact = u0 * math.exp(T) / math.sqrt(1 - u0**2 + u0**2 * math.exp(2 * T))
        assert np.max(np.abs(sT.u - exact)) / exact < 1e-4

    def test_mass_per_step(self):
        s = HydroState.from_profiles(200, 10.0, bump(10, 5, 2), lambda x: 0.2 * np.sin(2 * np.pi * x / 10))
        cfg = HydroConfig(DORSOGNA, t_end=0.5)
        for _ in range(50):
            s2 = hydro_step(s, cfg)
            assert abs(s2.mass - s.mass) <= 1e-12
            s = s2

    def test_tv_nonincreasing(self):
        s = HydroState.from_profiles(128, 1.0, bump(1, 0.4, 0.2), lambda x: 0.7 + 0 * x)
        cfg = HydroConfig(FREE)
        tv = total_variation(s.rho)
        for _ in range(100):
            s = hydro_step(s, cfg)
            assert total_variation(s.rho) <= tv + 1e-12
            tv = total_variation(s.rho)

    def test_shock_detected(self):
        u = np.zeros(20)
        u[10:] = 1.0
        s = HydroState(20, 1.0, np.ones(20), u)
        with pytest.raises(ShockSuspected):
            hydro_step(s, HydroConfig(FREE))

    def test_stable_dt_cfl(self):
        s = uniform_state(50, u=2.0)
        dt = stable_dt(s, HydroConfig(FREE, cfl=0.4))
        assert dt * 2.0 / s.dx <= 0.4

    def test_run_hits_end(self):
        out = hydro_run(uniform_state(32, u=0.3), HydroConfig(FREE, t_end=0.37), record_every=5)
        assert out[0].t == 0.0 and abs(out[-1].t - 0.37) < 1e-14
        assert all(a.t < b.t for a, b in zip(out, out[1:]))


class TestBridge:
    def test_quantiles_uniform(self):
        f = monokinetic_init(uniform_state(8, u=0.25), 4)
        assert np.allclose(f.x[:, 0], [0.125, 0.375, 0.625, 0.875], atol=1e-15, rtol=0)
        assert np.all(f.v == 0.25) and np.all(f.m == 0.25)

    def test_zero_deviation(self):
        s = HydroState.from_profiles(100, 10.0, bump(10, 5, 2), lambda x: 0.2 * np.sin(x))
        f = monokinetic_init(s, 300)
        assert monokineticity_deviation(f, s) == 0.0

    def test_perturbed_deviation(self):
        s = HydroState.from_profiles(100, 10.0, bump(10, 5, 2), lambda x: 0.2 * np.sin(x))
        f = monokinetic_init(s, 50)
        v = f.v.copy()
        v[7, 0] += 1e-3
        assert abs(monokineticity_deviation(f.with_state(f.x, v), s) - 1e-3) < 1e-12

    @settings(max_examples=30)
    @given(st.integers(20, 200), st.integers(10, 400), st.floats(0.5, 3.0))
    def test_position_w1(self, n_cells, n_atoms, width):
        s = HydroState.from_profiles(n_cells, 10.0, bump(10, 5, width), lambda x: 0 * x)
        f = monokinetic_init(s, n_atoms)
        xc, mc = cell_measure(s)
        keep = mc > 0
        grid = DiscreteMeasure(xc[keep, None], np.zeros((keep.sum(), 1)), mc[keep] / mc[keep].sum())
        atoms = f.with_state(f.x, np.zeros_like(f.v))
        assert w1_1d(atoms, grid) <= s.dx + 1.0 / n_atoms

    def test_reconstruct_roundtrip(self):
        s = HydroState.from_profiles(50, 10.0, bump(10, 5, 2), lambda x: 0.1 * np.cos(x))
        n = 20000
        r = reconstruct_fields(monokinetic_init(s, n), 50, 10.0)
        assert np.max(np.abs(r.rho - s.rho)) * s.dx <= 2.0 / n
        assert abs(r.mass - 1.0) < 1e-12

    def test_reconstruct_single_atom(self):
        f = DiscreteMeasure.from_arrays([[0.35]], [[0.7]])
        r = reconstruct_fields(f, 10, 1.0)
        assert r.rho[3] == 10.0 and r.u[3] == 0.7
        assert r.empty.sum() == 9 and np.all(r.u[r.empty] == 0.0)

    def test_reconstruct_opposite_velocities(self):
        f = DiscreteMeasure.from_arrays([[0.51], [0.52]], [[1.0], [-1.0]])
        assert reconstruct_fields(f, 4, 1.0).u[2] == 0.0

    def test_reconstruct_wraps(self):
        f = DiscreteMeasure.from_arrays([[-0.05], [1.05]], [[0.0], [0.0]])
        r = reconstruct_fields(f, 10, 1.0)
        assert r.rho[9] == 5.0 and r.rho[0] == 5.0


def test_fields_csv():
    s = uniform_state(3, u=0.5)
    rows = list(csv.reader(io.StringIO(fields_csv([s, s]))))
    assert rows[0] == ["t", "cell_center", "rho", "u"] and len(rows) == 7
    assert float(rows[1][3]) == 0.5
