"""1-D periodic finite-volume solver for the mono-kinetic system

    rho_t + (rho u)_x = 0
    u_t + u u_x = u (alpha - beta u^2) - (U' * rho)

and the bridge between grid fields and atomic measures.

First-order upwind in space, explicit Euler in time. The domain is
[0, L) with periodic wrap; the convolution uses the minimal-image
displacement with the non-periodized kernel, so scenarios must keep the
density support well inside the box.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpec, ShockSuspected
from .measures import DiscreteMeasure
from .models import ModelSpec, potential_gradient

MASS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class HydroState:
    n_cells: int
    domain_length: float
    rho: np.ndarray
    u: np.ndarray
    t: float = 0.0
    empty: np.ndarray | None = None

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=np.float64)
        u = np.asarray(self.u, dtype=np.float64)
        if rho.shape != (self.n_cells,) or u.shape != (self.n_cells,):
            raise ValueError(f"fields must have {self.n_cells} cells")
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(u))):
            raise ValueError("hydro fields must be finite")
        if np.any(rho < -1e-12):
            raise ValueError("density must be nonnegative")
        mass = float(np.sum(rho) * self.dx)
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {mass!r} differs from 1")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "u", u)

    @property
    def dx(self) -> float:
        return self.domain_length / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def mass(self) -> float:
        return float(np.sum(self.rho) * self.dx)

    @classmethod
    def from_profiles(cls, n_cells: int, domain_length: float, rho_fn, u_fn, t: float = 0.0) -> "HydroState":
        """Cell values sampled at centers; density rescaled to unit mass."""
        xc = (np.arange(n_cells) + 0.5) * (domain_length / n_cells)
        rho = np.asarray(rho_fn(xc), dtype=np.float64)
        rho = rho / (np.sum(rho) * domain_length / n_cells)
        return cls(n_cells, domain_length, rho, np.asarray(u_fn(xc), dtype=np.float64), t)


@dataclass
class HydroConfig:
    model: ModelSpec
    cfl: float = 0.4
    t_end: float = 1.0
    shock_threshold: float = 0.5
    speed_floor: float = 1e-3
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model.dim != 1:
            raise InvalidSpec("hydro solver is one-dimensional")
        if self.model.alignment is not None or self.model.lle is not None:
            raise InvalidSpec("hydro system supports self-propulsion and potential terms only")
        if not 0 < self.cfl < 1:
            raise InvalidSpec("cfl must lie in (0, 1)")


def _minimal_image(d: np.ndarray, L: float) -> np.ndarray:
    return d - L * np.round(d / L)


def convolution_gradient(state: HydroState, model: ModelSpec) -> np.ndarray:
    """(U' * rho)(x_i) by midpoint quadrature over cells."""
    if model.potential is None:
        return np.zeros(state.n_cells)
    xc = state.centers
    disp = _minimal_image(xc[:, None] - xc[None, :], state.domain_length)
    G = potential_gradient(disp[..., None], model.potential)[..., 0]
    return G @ (state.rho * state.dx)


def stable_dt(state: HydroState, config: HydroConfig) -> float:
    dt = config.cfl * state.dx / (np.max(np.abs(state.u)) + config.speed_floor)
    sp = config.model.self_propulsion
    if sp is not None:
        rate = sp.alpha + 3.0 * sp.beta * float(np.max(state.u**2))
        if rate > 0:
            dt = min(dt, config.cfl / rate)
    return float(dt)


def shock_indicator(state: HydroState) -> float:
    """max |du/dx| * dx, i.e. the largest jump between neighbouring cells."""
    return float(np.max(np.abs(np.roll(state.u, -1) - state.u)))


def hydro_step(state: HydroState, config: HydroConfig, dt: float | None = None) -> HydroState:
    ind = shock_indicator(state)
    if ind > config.shock_threshold:
        raise ShockSuspected(state.t, ind, config.shock_threshold)
    if dt is None:
        dt = stable_dt(state, config)
    rho, u, dx = state.rho, state.u, state.dx
    # mass: upwind flux at face i+1/2 with averaged face velocity
    uf = 0.5 * (u + np.roll(u, -1))
    flux = np.maximum(uf, 0.0) * rho + np.minimum(uf, 0.0) * np.roll(rho, -1)
    rho_new = rho - (dt / dx) * (flux - np.roll(flux, 1))
    # velocity: upwind transport plus explicit sources
    back = (u - np.roll(u, 1)) / dx
    fwd = (np.roll(u, -1) - u) / dx
    adv = np.maximum(u, 0.0) * back + np.minimum(u, 0.0) * fwd
    src = np.zeros_like(u)
    sp = config.model.self_propulsion
    if sp is not None:
        src = src + u * (sp.alpha - sp.beta * u * u)
    src = src - convolution_gradient(state, config.model)
    u_new = u - dt * adv + dt * src
    return HydroState(state.n_cells, state.domain_length, rho_new, u_new, state.t + dt)


def hydro_run(state: HydroState, config: HydroConfig, record_every: int = 0) -> list[HydroState]:
    """Advance to ``config.t_end``; returns recorded states (always first and last)."""
    out = [state]
    k = 0
    while state.t < config.t_end - 1e-14:
        dt = min(stable_dt(state, config), config.t_end - state.t)
        state = hydro_step(state, config, dt)
        k += 1
        if record_every and k % record_every == 0:
            out.append(state)
    if out[-1] is not state:
        out.append(state)
    return out


def total_variation(a: np.ndarray) -> float:
    return float(np.sum(np.abs(np.roll(a, -1) - a)))


def interpolate_u(state: HydroState, x) -> np.ndarray:
    """Periodic linear interpolation of the cell-centered velocity."""
    x = np.mod(np.asarray(x, dtype=np.float64), state.domain_length)
    s = x / state.dx - 0.5
    i0 = np.floor(s).astype(int)
    w = s - i0
    n = state.n_cells
    return (1.0 - w) * state.u[i0 % n] + w * state.u[(i0 + 1) % n]


def monokinetic_init(state: HydroState, n_atoms: int) -> DiscreteMeasure:
    """Deterministic quantile atoms of rho with velocities u(x_k).

    Atom k sits where the cumulative mass reaches (k - 1/2)/n_atoms, with
    linear interpolation inside cells.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be positive")
    cell_mass = state.rho * state.dx
    cum = np.concatenate([[0.0], np.cumsum(cell_mass)])
    cum /= cum[-1]
    q = (np.arange(n_atoms) + 0.5) / n_atoms
    idx = np.searchsorted(cum, q, side="right") - 1
    idx = np.clip(idx, 0, state.n_cells - 1)
    frac = (q - cum[idx]) / np.where(cell_mass[idx] > 0, cum[idx + 1] - cum[idx], 1.0)
    x = (idx + np.clip(frac, 0.0, 1.0)) * state.dx
    v = interpolate_u(state, x)
    return DiscreteMeasure(x[:, None], v[:, None], np.full(n_atoms, 1.0 / n_atoms))


def reconstruct_fields(f: DiscreteMeasure, n_cells: int, domain_length: float = 1.0, t: float = 0.0) -> HydroState:
    """Histogram density and mass-weighted mean velocity per cell.

    Positions are wrapped into [0, L). Cells without atoms get u = 0 and
    are flagged in ``empty``.
    """
    if f.dim != 1:
        raise InvalidSpec("reconstruction is one-dimensional")
    dx = domain_length / n_cells
    x = np.mod(f.x[:, 0], domain_length)
    cell = np.minimum((x / dx).astype(int), n_cells - 1)
    mass = np.bincount(cell, weights=f.m, minlength=n_cells)
    mom = np.bincount(cell, weights=f.m * f.v[:, 0], minlength=n_cells)
    empty = mass == 0
    u = np.where(empty, 0.0, mom / np.where(empty, 1.0, mass))
    rho = mass / dx
    rho = rho / (np.sum(rho) * dx)
    return HydroState(n_cells, domain_length, rho, u, t, empty)


def monokineticity_deviation(f: DiscreteMeasure, state: HydroState) -> float:
    """max_k |v_k - u(x_k)| with periodic interpolation of u."""
    if f.dim != 1:
        raise InvalidSpec("monokineticity is measured in one dimension")
    return float(np.max(np.abs(f.v[:, 0] - interpolate_u(state, f.x[:, 0]))))


def cell_measure(state: HydroState) -> tuple[np.ndarray, np.ndarray]:
    """Cell centers and cell masses of rho (the grid's spatial measure)."""
    return state.centers, state.rho * state.dx


def fields_csv(states: list[HydroState]) -> str:
    """Long-format CSV with columns t, cell_center, rho, u."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "cell_center", "rho", "u"])
    for s in states:
        for xc, r, uu in zip(s.centers, s.rho, s.u):
            w.writerow([repr(float(s.t)), repr(float(xc)), repr(float(r)), repr(float(uu))])
    return buf.getvalue()
