"""Atomic probability measures on phase space R^d x R^d.

A measure is stored as three parallel arrays (positions, velocities,
masses) addressed by atom index. Order is part of the representation:
nothing here sorts or merges atoms, and duplicate locations are allowed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .errors import DimensionMismatch, EmptyMeasure, NonpositiveMass

MASS_TOL = 1e-12
LOAD_MASS_TOL = 1e-9
MIN_MASS = 1e-14


class PhasePoint(NamedTuple):
    x: np.ndarray
    v: np.ndarray


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def _check_masses(m: np.ndarray) -> None:
    if m.size == 0:
        raise EmptyMeasure("measure has no atoms")
    if not np.all(np.isfinite(m)) or np.any(m <= 0.0):
        raise NonpositiveMass("all masses must be finite and strictly positive")
    if np.any(m < MIN_MASS):
        raise NonpositiveMass(f"masses below {MIN_MASS:g} are rejected")


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability measure sum_i m_i delta_(x_i, v_i).

    ``x`` and ``v`` have shape (n, d), ``m`` has shape (n,). The arrays are
    copied and made read-only on construction.
    """

    x: np.ndarray
    v: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=np.float64))
        v = np.atleast_2d(np.asarray(self.v, dtype=np.float64))
        m = np.atleast_1d(np.asarray(self.m, dtype=np.float64))
        if x.shape != v.shape or x.ndim != 2 or x.shape[1] < 1:
            raise DimensionMismatch(f"x{x.shape} and v{v.shape} must both be (n, d)")
        if m.shape != (x.shape[0],):
            raise DimensionMismatch(f"masses {m.shape} do not match {x.shape[0]} atoms")
        _check_masses(m)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise ValueError("atom coordinates must be finite")
        if abs(m.sum() - 1.0) > MASS_TOL:
            raise NonpositiveMass(f"masses sum to {m.sum()!r}, expected 1")
        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "v", _readonly(v))
        object.__setattr__(self, "m", _readonly(m))

    @property
    def n(self) -> int:
        return self.m.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def __len__(self) -> int:
        return self.n

    def atom(self, i: int) -> PhasePoint:
        return PhasePoint(self.x[i], self.v[i])

    def points(self) -> np.ndarray:
        """Atoms as rows of R^{2d}, position coordinates first."""
        return np.hstack([self.x, self.v])

    @classmethod
    def from_arrays(cls, x, v, m=None, normalize_masses: bool = True) -> "DiscreteMeasure":
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        v = np.atleast_2d(np.asarray(v, dtype=np.float64))
        if m is None:
            m = np.full(x.shape[0], 1.0 / max(x.shape[0], 1))
        m = np.atleast_1d(np.asarray(m, dtype=np.float64))
        if normalize_masses:
            m = _normalized(m)
        return cls(x, v, m)

    @classmethod
    def empirical(cls, x, v) -> "DiscreteMeasure":
        """Equal-mass atoms, m_i = 1/N."""
        return cls.from_arrays(x, v, None)

    def with_state(self, x, v) -> "DiscreteMeasure":
        """Same masses, new coordinates. Used by the integrator."""
        return DiscreteMeasure(x, v, self.m)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "atoms": [
                {"x": self.x[i].tolist(), "v": self.v[i].tolist(), "m": float(self.m[i])}
                for i in range(self.n)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteMeasure":
        atoms = data.get("atoms") or []
        if not atoms:
            raise EmptyMeasure("measure has no atoms")
        dim = int(data["dim"])
        x = np.array([a["x"] for a in atoms], dtype=np.float64).reshape(len(atoms), -1)
        v = np.array([a["v"] for a in atoms], dtype=np.float64).reshape(len(atoms), -1)
        if x.shape[1] != dim or v.shape[1] != dim:
            raise DimensionMismatch(f"atoms do not have declared dim {dim}")
        m = np.array([a["m"] for a in atoms], dtype=np.float64)
        _check_masses(m)
        if abs(m.sum() - 1.0) > LOAD_MASS_TOL:
            raise NonpositiveMass(f"masses sum to {m.sum()!r}; must be 1 +- {LOAD_MASS_TOL:g}")
        return cls(x, v, m / m.sum())

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "DiscreteMeasure":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class SpatialMeasure:
    """Probability measure on positions only: sum_i m_i delta_(x_i)."""

    x: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=np.float64))
        m = np.atleast_1d(np.asarray(self.m, dtype=np.float64))
        if m.shape != (x.shape[0],):
            raise DimensionMismatch(f"masses {m.shape} do not match {x.shape[0]} atoms")
        _check_masses(m)
        if abs(m.sum() - 1.0) > MASS_TOL:
            raise NonpositiveMass(f"masses sum to {m.sum()!r}, expected 1")
        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "m", _readonly(m))

    @property
    def n(self) -> int:
        return self.m.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def points(self) -> np.ndarray:
        return self.x

    def integrate(self, phi: Callable[[np.ndarray], float]) -> float:
        return float(sum(self.m[i] * phi(self.x[i]) for i in range(self.n)))


def _normalized(m: np.ndarray) -> np.ndarray:
    if m.size == 0:
        raise EmptyMeasure("measure has no atoms")
    if not np.all(np.isfinite(m)) or np.any(m <= 0.0):
        raise NonpositiveMass("all masses must be finite and strictly positive")
    total = m.sum()
    if total <= 0.0:
        raise NonpositiveMass("total mass is zero")
    return m / total


def normalize(atoms: Iterable) -> DiscreteMeasure:
    """Build a probability measure from ``(point, mass)`` pairs.

    ``point`` is a :class:`PhasePoint` or any ``(x, v)`` pair. Masses are
    divided by their total; atom order is kept.
    """
    atoms = list(atoms)
    if not atoms:
        raise EmptyMeasure("measure has no atoms")
    xs, vs, ms = [], [], []
    for point, mass in atoms:
        x, v = point
        xs.append(np.atleast_1d(np.asarray(x, dtype=np.float64)))
        vs.append(np.atleast_1d(np.asarray(v, dtype=np.float64)))
        ms.append(float(mass))
    dims = {a.shape for a in xs} | {a.shape for a in vs}
    if len(dims) != 1:
        raise DimensionMismatch(f"atoms have inconsistent shapes {sorted(dims)}")
    return DiscreteMeasure(np.vstack(xs), np.vstack(vs), _normalized(np.asarray(ms)))


def push_forward(
    f: DiscreteMeasure,
    T: Callable,
    vectorized: bool = False,
) -> DiscreteMeasure:
    """Image measure T#f: atom i moves to T(x_i, v_i) and keeps mass m_i.

    With ``vectorized=True``, ``T`` receives the full (n, d) arrays and
    returns the mapped arrays.
    """
    if vectorized:
        x, v = T(f.x, f.v)
    else:
        out = [T(PhasePoint(f.x[i], f.v[i])) for i in range(f.n)]
        x = np.vstack([np.atleast_1d(p[0]) for p in out])
        v = np.vstack([np.atleast_1d(p[1]) for p in out])
    x = np.asarray(x, dtype=np.float64).reshape(f.n, -1)
    v = np.asarray(v, dtype=np.float64).reshape(f.n, -1)
    return DiscreteMeasure(x, v, f.m)


def first_marginal(f: DiscreteMeasure) -> SpatialMeasure:
    """Position marginal rho; atoms are projected, never merged."""
    return SpatialMeasure(f.x, f.m)


def translate(rho: SpatialMeasure, a) -> SpatialMeasure:
    return SpatialMeasure(rho.x + np.asarray(a, dtype=np.float64), rho.m)


def support_radius(f: DiscreteMeasure) -> float:
    """Largest Euclidean norm of an atom (x_i, v_i) in R^{2d}."""
    return float(np.max(np.linalg.norm(np.hstack([f.x, f.v]), axis=1)))


def mean_velocity(f: DiscreteMeasure) -> np.ndarray:
    return f.m @ f.v


def center_of_mass(f: DiscreteMeasure) -> np.ndarray:
    return f.m @ f.x


def velocity_diameter(f: DiscreteMeasure) -> float:
    """Radius of the velocity support about the mean velocity."""
    dv = f.v - mean_velocity(f)
    return float(np.sqrt(np.max(np.sum(dv**2, axis=1))))


def spatial_radius(f: DiscreteMeasure, center=None) -> float:
    c = center_of_mass(f) if center is None else np.asarray(center, dtype=np.float64)
    return float(np.sqrt(np.max(np.sum((f.x - c) ** 2, axis=1))))


def integrate(f: DiscreteMeasure, zeta: Callable[[PhasePoint], float]) -> float:
    """sum_i m_i zeta(x_i, v_i)."""
    return float(sum(f.m[i] * zeta(f.atom(i)) for i in range(f.n)))
