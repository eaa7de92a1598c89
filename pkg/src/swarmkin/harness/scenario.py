"""Scenario files: model, initial data and experiment parameters.

Schema (all keys except ``model`` optional unless an experiment needs
them)::

    {
      "name": "cs_small",
      "model": {ModelSpec JSON},
      "initial": {initial-data block, see ``build_initial``},
      "dt": 0.001,
      "t_end": 5.0,
      "record_every": 100,
      "experiment": {...}            # experiment-specific keys
    }
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq
from scipy.stats import qmc, truncnorm

from ..errors import InvalidSpec
from ..measures import DiscreteMeasure
from ..models import ModelSpec

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@dataclass(frozen=True)
class Density1D:
    """Compactly supported density on the line with pdf and quantile function.

    kinds: ``uniform`` (low, high), ``cosine_bump`` (center, half_width;
    density proportional to cos^2), ``gaussian`` (mean, std, truncate in
    units of std), ``point`` (value).
    """

    kind: str
    params: tuple

    @classmethod
    def from_dict(cls, d: dict) -> "Density1D":
        d = dict(d)
        kind = d.pop("kind")
        keys = {
            "uniform": ("low", "high"),
            "cosine_bump": ("center", "half_width"),
            "gaussian": ("mean", "std", "truncate"),
            "point": ("value",),
        }
        if kind not in keys:
            raise InvalidSpec(f"unknown density kind {kind!r}")
        if kind == "gaussian":
            d.setdefault("truncate", 4.0)
        missing = [k for k in keys[kind] if k not in d]
        if missing:
            raise InvalidSpec(f"density {kind!r} missing {missing}")
        return cls(kind, tuple(float(d[k]) for k in keys[kind]))

    def to_dict(self) -> dict:
        names = {"uniform": ("low", "high"), "cosine_bump": ("center", "half_width"),
                 "gaussian": ("mean", "std", "truncate"), "point": ("value",)}[self.kind]
        return {"kind": self.kind, **dict(zip(names, self.params))}

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "uniform":
            lo, hi = self.params
            return np.where((x >= lo) & (x < hi), 1.0 / (hi - lo), 0.0)
        if self.kind == "cosine_bump":
            c, h = self.params
            z = (x - c) / h
            return np.where(np.abs(z) < 1, np.cos(0.5 * np.pi * z) ** 2 / h, 0.0)
        if self.kind == "gaussian":
            mu, sd, tr = self.params
            return truncnorm.pdf(x, -tr, tr, loc=mu, scale=sd)
        raise InvalidSpec("a point mass has no density")

    def ppf(self, q):
        q = np.asarray(q, dtype=np.float64)
        if self.kind == "uniform":
            lo, hi = self.params
            return lo + q * (hi - lo)
        if self.kind == "point":
            return np.full_like(q, self.params[0])
        if self.kind == "gaussian":
            mu, sd, tr = self.params
            return truncnorm.ppf(q, -tr, tr, loc=mu, scale=sd)
        c, h = self.params
        # CDF on z in [-1, 1]: (z + 1 + sin(pi z)/pi) / 2
        cdf = lambda z, t: 0.5 * (z + 1.0 + math.sin(math.pi * z) / math.pi) - t
        z = np.array([brentq(cdf, -1.0, 1.0, args=(float(t),), xtol=1e-15) for t in q.ravel()])
        return c + h * z.reshape(q.shape)


def halton_points(n: int, dim: int) -> np.ndarray:
    """First ``n`` unscrambled Halton points after the origin; nested in ``n``."""
    eng = qmc.Halton(d=dim, scramble=False)
    eng.fast_forward(1)
    return eng.random(n)


def sample_product(n: int, dim: int, x_density: Density1D, v_density: Density1D, method: str = "halton",
                   seed: int = 0) -> DiscreteMeasure:
    """Equal-mass atoms from the product density prod_k x_density(x_k) v_density(v_k).

    ``halton`` is deterministic and nested (the first n atoms of a larger
    sample equal the smaller sample); ``quantile`` is the 1-D midpoint
    rule (dim 1, point-mass velocities only); ``random`` uses a seeded
    generator.
    """
    if method == "halton":
        u = halton_points(n, 2 * dim)
    elif method == "random":
        u = np.random.default_rng(seed).uniform(size=(n, 2 * dim))
    elif method == "quantile":
        if dim != 1:
            raise InvalidSpec("quantile sampling is one-dimensional")
        q = (np.arange(n) + 0.5) / n
        u = np.column_stack([q, np.full(n, 0.5)])
    else:
        raise InvalidSpec(f"unknown sampling method {method!r}")
    x = np.column_stack([x_density.ppf(u[:, k]) for k in range(dim)])
    v = np.column_stack([v_density.ppf(u[:, dim + k]) for k in range(dim)])
    return DiscreteMeasure.empirical(x, v)


def random_cloud(n: int, dim: int, x_radius: float, v_radius: float, seed: int = 0,
                 v_mean=None) -> DiscreteMeasure:
    """Seeded uniform samples in a position ball and a velocity ball, equal masses."""
    rng = np.random.default_rng(seed)

    def ball(r):
        z = rng.normal(size=(n, dim))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        return z * (r * rng.uniform(size=(n, 1)) ** (1.0 / dim))

    x = ball(x_radius)
    v = ball(v_radius)
    if v_mean is not None:
        v = v + np.asarray(v_mean, dtype=np.float64)
    return DiscreteMeasure.empirical(x, v)


def build_initial(block: dict, dim: int, n: int | None = None) -> DiscreteMeasure:
    """Initial measure from an ``initial`` block.

    ``{"type": "atoms", "dim": d, "atoms": [...]}`` - explicit measure;
    ``{"type": "file", "path": "..."}`` - measure JSON file;
    ``{"type": "random_cloud", "n", "seed", "x_radius", "v_radius", "v_mean"}``;
    ``{"type": "product", "n", "method", "x": Density1D, "v": Density1D}``.
    """
    kind = block.get("type", "atoms")
    if kind == "atoms":
        return DiscreteMeasure.from_dict(block)
    if kind == "file":
        return DiscreteMeasure.from_json(Path(block["path"]).read_text())
    if kind == "random_cloud":
        return random_cloud(int(n or block["n"]), dim, float(block["x_radius"]), float(block["v_radius"]),
                            int(block.get("seed", 0)), block.get("v_mean"))
    if kind == "product":
        return sample_product(int(n or block["n"]), dim, Density1D.from_dict(block["x"]),
                              Density1D.from_dict(block["v"]), block.get("method", "halton"),
                              int(block.get("seed", 0)))
    raise InvalidSpec(f"unknown initial data type {kind!r}")


def perturb(f: DiscreteMeasure, size: float, seed: int = 0) -> DiscreteMeasure:
    """Move every atom by a seeded random phase-space vector of norm ``size``."""
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(f.n, 2 * f.dim))
    z *= size / np.linalg.norm(z, axis=1, keepdims=True)
    return f.with_state(f.x + z[:, : f.dim], f.v + z[:, f.dim:])


def velocity_field_1d(block: dict, L: float):
    kind = block.get("kind", "constant")
    if kind == "constant":
        val = float(block["value"])
        return lambda x: np.full_like(np.asarray(x, dtype=np.float64), val)
    if kind == "sine":
        a, k = float(block["amplitude"]), float(block.get("wavenumber", 1))
        ph = float(block.get("phase", 0.0))
        return lambda x: a * np.sin(2 * np.pi * k * np.asarray(x) / L + ph)
    raise InvalidSpec(f"unknown velocity field kind {kind!r}")


@dataclass
class Scenario:
    raw: dict
    name: str
    model: ModelSpec
    dt: float
    t_end: float
    record_every: int
    experiment: dict

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        if "model" not in d:
            raise InvalidSpec("scenario needs a 'model' block")
        model = ModelSpec.from_dict(d["model"])
        return cls(
            raw=copy.deepcopy(d),
            name=str(d.get("name", "scenario")),
            model=model,
            dt=float(d.get("dt", 1e-3)),
            t_end=float(d.get("t_end", 1.0)),
            record_every=int(d.get("record_every", 1)),
            experiment=dict(d.get("experiment", {})),
        )

    @classmethod
    def load(cls, path) -> "Scenario":
        p = Path(path)
        if not p.exists() and (SCENARIO_DIR / p).exists():
            p = SCENARIO_DIR / p
        if not p.exists() and (SCENARIO_DIR / f"{p}.json").exists():
            p = SCENARIO_DIR / f"{p}.json"
        return cls.from_dict(json.loads(p.read_text()))

    def initial(self, n: int | None = None) -> DiscreteMeasure:
        if "initial" not in self.raw:
            raise InvalidSpec("scenario has no 'initial' block")
        return build_initial(self.raw["initial"], self.model.dim, n)

    def resolved(self) -> dict:
        d = copy.deepcopy(self.raw)
        d["model"] = self.model.to_dict()
        d["dt"], d["t_end"], d["record_every"] = self.dt, self.t_end, self.record_every
        return d

    def content_hash(self) -> str:
        return content_hash(self.resolved())


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def content_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def list_scenarios() -> list[str]:
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.json"))
