"""Interaction kernels and the acceleration operator H[f].

The acceleration felt by a phase point p = (x, v) under a measure f is

    F_self(v) - (grad U * rho)(x) + sum_j m_j w(|x - x_j|) (v_j - v)
        + (Li-Lukeman-Edelstein front/behind forces)

with every term optional. Pairwise sums run over *all* atoms; the self
pair contributes exactly zero for every kernel here (grad U(0) = 0 for
radial potentials, v - v = 0 for alignment, zero direction vectors for
LLE), so this matches the j != i particle sums.

Vectorized kernels take explicit target points. A single-point call and
an all-atoms call perform the same floating point operations per target,
and each target's neighbour sum is accumulated in ascending index order,
so results do not depend on the numba thread count.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numba
import numpy as np
from numba import prange
from scipy.optimize import minimize_scalar

from .errors import DimensionMismatch, InvalidSpec, SupportViolation
from .measures import DiscreteMeasure, PhasePoint, SpatialMeasure, first_marginal, support_radius

GAUSSIAN_MORSE = "gaussian_morse"
SMOOTHED_MORSE = "smoothed_morse"
CUSTOM = "custom"


# --------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class SelfPropulsionSpec:
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not (self.alpha >= 0 and self.beta >= 0):
            raise InvalidSpec("alpha and beta must be nonnegative")


@dataclass(frozen=True)
class Profile:
    """Scalar radial profile r -> value, used by LLE forces and custom potentials.

    kinds: ``zero``, ``constant`` (value), ``exponential`` (amplitude,
    length: A e^{-r/l}), ``gaussian`` (amplitude, length: A e^{-r^2/l^2}),
    ``morse`` (C_A, C_R, l_A, l_R: C_A e^{-r/l_A} - C_R e^{-r/l_R}).
    """

    kind: str = "zero"
    params: dict = field(default_factory=dict)

    _KINDS = {
        "zero": (),
        "constant": ("value",),
        "exponential": ("amplitude", "length"),
        "gaussian": ("amplitude", "length"),
        "morse": ("C_A", "C_R", "l_A", "l_R"),
    }

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise InvalidSpec(f"unknown profile kind {self.kind!r}")
        missing = [k for k in self._KINDS[self.kind] if k not in self.params]
        if missing:
            raise InvalidSpec(f"profile {self.kind!r} missing {missing}")
        for k in ("length", "l_A", "l_R"):
            if k in self.params and not self.params[k] > 0:
                raise InvalidSpec(f"profile length {k} must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        p = self.params
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "constant":
            return np.full_like(r, float(p["value"]))
        if self.kind == "exponential":
            return p["amplitude"] * np.exp(-r / p["length"])
        if self.kind == "gaussian":
            return p["amplitude"] * np.exp(-(r**2) / p["length"] ** 2)
        return p["C_A"] * np.exp(-r / p["l_A"]) - p["C_R"] * np.exp(-r / p["l_R"])

    def derivative(self, r):
        r = np.asarray(r, dtype=np.float64)
        p = self.params
        if self.kind in ("zero", "constant"):
            return np.zeros_like(r)
        if self.kind == "exponential":
            return -p["amplitude"] / p["length"] * np.exp(-r / p["length"])
        if self.kind == "gaussian":
            return -2.0 * p["amplitude"] * r / p["length"] ** 2 * np.exp(-(r**2) / p["length"] ** 2)
        return -p["C_A"] / p["l_A"] * np.exp(-r / p["l_A"]) + p["C_R"] / p["l_R"] * np.exp(-r / p["l_R"])

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "Profile":
        d = dict(d)
        return cls(d.pop("kind"), d)


@dataclass(frozen=True)
class PotentialSpec:
    """Radial interaction potential U(x) = k(|x|).

    ``gaussian_morse``: U = -C_A e^{-|x|^2/l_A^2} + C_R e^{-|x|^2/l_R^2}.
    ``smoothed_morse``: Morse profile evaluated at s = sqrt(|x|^2 + eps^2).
    ``custom``: any radial ``profile`` (callable with ``derivative``).
    """

    kind: str = GAUSSIAN_MORSE
    C_A: float = 1.0
    C_R: float = 0.5
    l_A: float = 1.0
    l_R: float = 0.5
    epsilon: float | None = None
    profile: object = None

    def __post_init__(self):
        if self.kind not in (GAUSSIAN_MORSE, SMOOTHED_MORSE, CUSTOM):
            raise InvalidSpec(f"unknown potential kind {self.kind!r}")
        if self.kind == CUSTOM:
            if self.profile is None or not hasattr(self.profile, "derivative"):
                raise InvalidSpec("custom potential needs a profile with a derivative")
            return
        if not (self.C_A >= 0 and self.C_R >= 0):
            raise InvalidSpec("C_A and C_R must be nonnegative")
        if not (self.l_A > 0 and self.l_R > 0):
            raise InvalidSpec("l_A and l_R must be positive")
        if self.kind == SMOOTHED_MORSE:
            if self.epsilon is None:
                object.__setattr__(self, "epsilon", 1e-3 * min(self.l_A, self.l_R))
            if not self.epsilon > 0:
                raise InvalidSpec("smoothed Morse needs epsilon > 0")

    def to_dict(self) -> dict:
        if self.kind == CUSTOM:
            prof = self.profile.to_dict() if isinstance(self.profile, Profile) else repr(self.profile)
            return {"kind": CUSTOM, "profile": prof}
        d = {"kind": self.kind, "C_A": self.C_A, "C_R": self.C_R, "l_A": self.l_A, "l_R": self.l_R}
        if self.kind == SMOOTHED_MORSE:
            d["epsilon"] = self.epsilon
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        d = dict(d)
        if d.get("kind") == CUSTOM:
            return cls(kind=CUSTOM, profile=Profile.from_dict(d["profile"]))
        return cls(**d)


@dataclass(frozen=True)
class AlignmentSpec:
    """Cucker-Smale alignment with communication rate (1 + r^2)^-gamma."""

    gamma: float = 0.25

    def __post_init__(self):
        if not self.gamma >= 0:
            raise InvalidSpec("gamma must be nonnegative")


@dataclass(frozen=True)
class LLESpec:
    """Front/behind interaction forces.

    ``g_plus``/``g_minus`` act along x_j - x_i (positive attracts) and
    ``h_plus``/``h_minus`` along v_j - v_i, for neighbours in front of /
    behind the target. The front/behind switch is the logistic sigmoid of
    ((x_j - x_i) . v_i) / blend_width; unit directions u/|u| are
    regularized to u / sqrt(|u|^2 + vel_epsilon^2).
    """

    g_plus: Callable = field(default_factory=Profile)
    g_minus: Callable = field(default_factory=Profile)
    h_plus: Callable = field(default_factory=Profile)
    h_minus: Callable = field(default_factory=Profile)
    blend_width: float = 0.1
    vel_epsilon: float = 1e-6

    def __post_init__(self):
        if not (self.blend_width > 0 and self.vel_epsilon > 0):
            raise InvalidSpec("blend_width and vel_epsilon must be positive")

    def to_dict(self) -> dict:
        out = {}
        for k in ("g_plus", "g_minus", "h_plus", "h_minus"):
            p = getattr(self, k)
            out[k] = p.to_dict() if isinstance(p, Profile) else repr(p)
        out["blend_width"] = self.blend_width
        out["vel_epsilon"] = self.vel_epsilon
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "LLESpec":
        kw = {k: Profile.from_dict(d[k]) for k in ("g_plus", "g_minus", "h_plus", "h_minus") if k in d}
        for k in ("blend_width", "vel_epsilon"):
            if k in d:
                kw[k] = float(d[k])
        return cls(**kw)


@dataclass(frozen=True)
class ModelSpec:
    dim: int
    self_propulsion: SelfPropulsionSpec | None = None
    potential: PotentialSpec | None = None
    alignment: AlignmentSpec | None = None
    lle: LLESpec | None = None

    def __post_init__(self):
        if not (isinstance(self.dim, int) and self.dim >= 1):
            raise InvalidSpec("dim must be a positive integer")
        if all(t is None for t in (self.self_propulsion, self.potential, self.alignment, self.lle)):
            raise InvalidSpec("a model needs at least one term")

    def terms(self) -> list[str]:
        return [k for k in ("self_propulsion", "potential", "alignment", "lle") if getattr(self, k) is not None]

    def to_dict(self) -> dict:
        d: dict = {"dim": self.dim}
        if self.self_propulsion is not None:
            d["self_propulsion"] = asdict(self.self_propulsion)
        if self.potential is not None:
            d["potential"] = self.potential.to_dict()
        if self.alignment is not None:
            d["alignment"] = asdict(self.alignment)
        if self.lle is not None:
            d["lle"] = self.lle.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        known = {"dim", "self_propulsion", "potential", "alignment", "lle"}
        extra = set(d) - known
        if extra:
            raise InvalidSpec(f"unknown model keys {sorted(extra)}")
        return cls(
            dim=int(d["dim"]),
            self_propulsion=SelfPropulsionSpec(**d["self_propulsion"]) if d.get("self_propulsion") else None,
            potential=PotentialSpec.from_dict(d["potential"]) if d.get("potential") else None,
            alignment=AlignmentSpec(**d["alignment"]) if d.get("alignment") else None,
            lle=LLESpec.from_dict(d["lle"]) if d.get("lle") else None,
        )


# --------------------------------------------------------------------------
# potentials


def _pot_code(spec: PotentialSpec) -> int:
    return {GAUSSIAN_MORSE: 0, SMOOTHED_MORSE: 1}.get(spec.kind, -1)


def potential_value(x, spec: PotentialSpec):
    """U(x) for x of shape (..., d)."""
    x = np.asarray(x, dtype=np.float64)
    r2 = np.sum(x * x, axis=-1)
    if spec.kind == GAUSSIAN_MORSE:
        return -spec.C_A * np.exp(-r2 / spec.l_A**2) + spec.C_R * np.exp(-r2 / spec.l_R**2)
    if spec.kind == SMOOTHED_MORSE:
        s = np.sqrt(r2 + spec.epsilon**2)
        return -spec.C_A * np.exp(-s / spec.l_A) + spec.C_R * np.exp(-s / spec.l_R)
    return spec.profile(np.sqrt(r2))


def radial_gradient(r, spec: PotentialSpec):
    """psi(r) with grad U(x) = psi(|x|) x/|x|."""
    r = np.asarray(r, dtype=np.float64)
    if spec.kind == GAUSSIAN_MORSE:
        a = 2.0 * spec.C_A / spec.l_A**2
        b = 2.0 * spec.C_R / spec.l_R**2
        return (a * np.exp(-r * r / spec.l_A**2) - b * np.exp(-r * r / spec.l_R**2)) * r
    if spec.kind == SMOOTHED_MORSE:
        s = np.sqrt(r * r + spec.epsilon**2)
        return (spec.C_A / spec.l_A * np.exp(-s / spec.l_A) - spec.C_R / spec.l_R * np.exp(-s / spec.l_R)) * r / s
    return spec.profile.derivative(r)


def potential_gradient(x, spec: PotentialSpec):
    """grad U(x) for x of shape (..., d); grad U(0) = 0."""
    x = np.asarray(x, dtype=np.float64)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    if spec.kind == GAUSSIAN_MORSE:
        a = 2.0 * spec.C_A / spec.l_A**2
        b = 2.0 * spec.C_R / spec.l_R**2
        return (a * np.exp(-r2 / spec.l_A**2) - b * np.exp(-r2 / spec.l_R**2)) * x
    if spec.kind == SMOOTHED_MORSE:
        s = np.sqrt(r2 + spec.epsilon**2)
        return (spec.C_A / spec.l_A * np.exp(-s / spec.l_A) - spec.C_R / spec.l_R * np.exp(-s / spec.l_R)) / s * x
    r = np.sqrt(r2)
    safe = np.where(r > 0, r, 1.0)
    return np.where(r > 0, spec.profile.derivative(r) / safe, 0.0) * x


@numba.njit(cache=True, parallel=True)
def _potential_field_kernel(xt, xs, ms, kind, cA, cR, lA, lR, eps):
    k, d = xt.shape
    n = xs.shape[0]
    out = np.zeros((k, d))
    ia = 1.0 / (lA * lA)
    ir = 1.0 / (lR * lR)
    for i in prange(k):
        for j in range(n):
            r2 = 0.0
            for c in range(d):
                diff = xt[i, c] - xs[j, c]
                r2 += diff * diff
            if kind == 0:
                coef = 2.0 * cA * ia * math.exp(-r2 * ia) - 2.0 * cR * ir * math.exp(-r2 * ir)
            else:
                s = math.sqrt(r2 + eps * eps)
                coef = (cA / lA * math.exp(-s / lA) - cR / lR * math.exp(-s / lR)) / s
            w = ms[j] * coef
            for c in range(d):
                out[i, c] -= w * (xt[i, c] - xs[j, c])
    return out


def potential_field(xt: np.ndarray, xs: np.ndarray, ms: np.ndarray, spec: PotentialSpec) -> np.ndarray:
    """E(x) = -sum_j m_j grad U(x - x_j) at every row of ``xt``."""
    xt = np.ascontiguousarray(xt, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ms = np.ascontiguousarray(ms, dtype=np.float64)
    code = _pot_code(spec)
    if code >= 0:
        eps = spec.epsilon if spec.epsilon is not None else 0.0
        return _potential_field_kernel(xt, xs, ms, code, spec.C_A, spec.C_R, spec.l_A, spec.l_R, eps)
    out = np.empty_like(xt)
    for i in range(xt.shape[0]):
        out[i] = -(ms @ potential_gradient(xt[i] - xs, spec))
    return out


def interaction_field(x, rho: SpatialMeasure, spec: PotentialSpec) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.shape != (rho.dim,):
        raise DimensionMismatch(f"point of shape {x.shape} vs measure dim {rho.dim}")
    return potential_field(x[None, :], rho.x, rho.m, spec)[0]


def gradient_lipschitz_bound(spec: PotentialSpec, R: float | None = None) -> float:
    """Analytic bound on Lip(grad U) for the Gaussian Morse potential.

    With grad U(x) = phi(|x|^2) x, the Hessian has eigenvalues phi(s) and
    phi(s) + 2 s phi'(s); both are bounded by a + b where a = 2 C_A/l_A^2,
    b = 2 C_R/l_R^2, because |e^{-t}(1 - 2t)| <= 1 for t >= 0. The bound
    holds on every ball, so ``R`` is accepted only for interface symmetry.
    """
    if spec.kind != GAUSSIAN_MORSE:
        raise InvalidSpec("analytic Lipschitz bound only available for gaussian_morse")
    return 2.0 * spec.C_A / spec.l_A**2 + 2.0 * spec.C_R / spec.l_R**2


def gradient_growth_constant(spec: PotentialSpec) -> float:
    """C with |grad U(x)| <= C (1 + |x|); for Gaussian Morse max r e^{-r^2/l^2} = l/sqrt(2e)."""
    if spec.kind != GAUSSIAN_MORSE:
        raise InvalidSpec("analytic growth constant only available for gaussian_morse")
    a = 2.0 * spec.C_A / spec.l_A**2
    b = 2.0 * spec.C_R / spec.l_R**2
    return (a * spec.l_A + b * spec.l_R) / math.sqrt(2.0 * math.e)


def max_gradient_norm(spec: PotentialSpec, R: float, n_grid: int = 4097) -> float:
    """max of |grad U| over the ball B_R: grid scan refined by a bounded 1-D search."""
    r = np.linspace(0.0, R, n_grid)
    vals = np.abs(radial_gradient(r, spec))
    best = float(vals.max())
    k = int(vals.argmax())
    lo, hi = r[max(k - 1, 0)], r[min(k + 1, n_grid - 1)]
    if hi > lo:
        res = minimize_scalar(lambda t: -abs(float(radial_gradient(t, spec))), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        best = max(best, -float(res.fun))
    return best


def sampled_gradient_lipschitz(spec: PotentialSpec, R: float, n: int = 4000, seed: int = 0) -> float:
    """Empirical Lip(grad U) on B_R from random nearby pairs (an estimate, not a bound)."""
    rng = np.random.default_rng(seed)
    d = 3
    x = _uniform_ball(rng, n, d, R)
    h = rng.normal(size=(n, d))
    h *= (1e-4 * max(R, 1.0)) / np.linalg.norm(h, axis=1, keepdims=True)
    y = x + h
    num = np.linalg.norm(potential_gradient(x, spec) - potential_gradient(y, spec), axis=1)
    return float(np.max(num / np.linalg.norm(h, axis=1)))


def _uniform_ball(rng, n, d, R):
    z = rng.normal(size=(n, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z * (R * rng.uniform(size=(n, 1)) ** (1.0 / d))


# --------------------------------------------------------------------------
# other terms


def self_propulsion_force(v, spec: SelfPropulsionSpec) -> np.ndarray:
    """(alpha - beta |v|^2) v, row-wise for v of shape (..., d)."""
    v = np.asarray(v, dtype=np.float64)
    return (spec.alpha - spec.beta * np.sum(v * v, axis=-1, keepdims=True)) * v


def communication_rate(r, gamma: float):
    return (1.0 + np.asarray(r, dtype=np.float64) ** 2) ** (-gamma)


@numba.njit(cache=True, parallel=True)
def _alignment_kernel(xt, vt, xs, vs, ms, gamma):
    k, d = xt.shape
    n = xs.shape[0]
    out = np.zeros((k, d))
    for i in prange(k):
        for j in range(n):
            r2 = 0.0
            for c in range(d):
                diff = xt[i, c] - xs[j, c]
                r2 += diff * diff
            w = ms[j] * (1.0 + r2) ** (-gamma)
            for c in range(d):
                out[i, c] += w * (vs[j, c] - vt[i, c])
    return out


def alignment_field_arrays(xt, vt, xs, vs, ms, spec: AlignmentSpec) -> np.ndarray:
    """-xi[f] = sum_j m_j w(|x - x_j|) (v_j - v) at every target row."""
    c = np.ascontiguousarray
    return _alignment_kernel(c(xt, dtype=np.float64), c(vt, dtype=np.float64), c(xs, dtype=np.float64),
                             c(vs, dtype=np.float64), c(ms, dtype=np.float64), float(spec.gamma))


def _as_point(p, dim):
    x = np.atleast_1d(np.asarray(p[0], dtype=np.float64))
    v = np.atleast_1d(np.asarray(p[1], dtype=np.float64))
    if x.shape != (dim,) or v.shape != (dim,):
        raise DimensionMismatch(f"point of dim {x.shape}/{v.shape} vs measure dim {dim}")
    return x, v


def alignment_field(p: PhasePoint, f: DiscreteMeasure, spec: AlignmentSpec) -> np.ndarray:
    x, v = _as_point(p, f.dim)
    return alignment_field_arrays(x[None], v[None], f.x, f.v, f.m, spec)[0]


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def lle_force_arrays(xt, vt, xs, vs, ms, spec: LLESpec) -> np.ndarray:
    out = np.empty_like(np.asarray(xt, dtype=np.float64))
    eps2 = spec.vel_epsilon**2
    for i in range(out.shape[0]):
        dx = xs - xt[i]
        dv = vs - vt[i]
        r = np.sqrt(np.sum(dx * dx, axis=1))
        s = np.sqrt(np.sum(dv * dv, axis=1))
        theta = _sigmoid((dx @ vt[i]) / spec.blend_width)
        gx = theta * spec.g_plus(r) + (1.0 - theta) * spec.g_minus(r)
        hv = theta * spec.h_plus(s) + (1.0 - theta) * spec.h_minus(s)
        coef_x = ms * gx / np.sqrt(r * r + eps2)
        coef_v = ms * hv / np.sqrt(s * s + eps2)
        out[i] = coef_x @ dx + coef_v @ dv
    return out


def lle_force(p: PhasePoint, f: DiscreteMeasure, spec: LLESpec) -> np.ndarray:
    x, v = _as_point(p, f.dim)
    return lle_force_arrays(x[None], v[None], f.x, f.v, f.m, spec)[0]


# --------------------------------------------------------------------------
# full operator


def acceleration(xt, vt, f: DiscreteMeasure, model: ModelSpec) -> np.ndarray:
    """H[f] at every target row (xt[i], vt[i]).

    Terms are added in the fixed order self-propulsion, potential,
    alignment, LLE, so a multi-term model equals the sum of its
    single-term evaluations exactly.
    """
    xt = np.atleast_2d(np.asarray(xt, dtype=np.float64))
    vt = np.atleast_2d(np.asarray(vt, dtype=np.float64))
    if xt.shape[1] != model.dim or f.dim != model.dim:
        raise DimensionMismatch(f"model dim {model.dim} vs data dim {xt.shape[1]}/{f.dim}")
    acc = np.zeros_like(xt)
    if model.self_propulsion is not None:
        acc = acc + self_propulsion_force(vt, model.self_propulsion)
    if model.potential is not None:
        acc = acc + potential_field(xt, f.x, f.m, model.potential)
    if model.alignment is not None:
        acc = acc + alignment_field_arrays(xt, vt, f.x, f.v, f.m, model.alignment)
    if model.lle is not None:
        acc = acc + lle_force_arrays(xt, vt, f.x, f.v, f.m, model.lle)
    return acc


def operator_eval(p: PhasePoint, f: DiscreteMeasure, model: ModelSpec) -> np.ndarray:
    x, v = _as_point(p, f.dim)
    return acceleration(x[None], v[None], f, model)[0]


def field_w1_report(
    f: DiscreteMeasure,
    g: DiscreteMeasure,
    spec: PotentialSpec,
    R: float,
    n_samples: int = 128,
    seed: int = 0,
) -> dict:
    """Sampled check of sup_{B_R} |E[f] - E[g]| <= Lip_{2R}(grad U) W1(f, g)."""
    from .transport import w1

    for mu in (f, g):
        if support_radius(mu) > R * (1.0 + 1e-12):
            raise SupportViolation(f"support radius {support_radius(mu):.6g} exceeds R={R:.6g}")
    rng = np.random.default_rng(seed)
    pts = np.vstack([_uniform_ball(rng, n_samples, f.dim, R), np.zeros((1, f.dim)), f.x, g.x])
    diff = potential_field(pts, f.x, f.m, spec) - potential_field(pts, g.x, g.m, spec)
    lhs = float(np.max(np.linalg.norm(diff, axis=1)))
    if spec.kind == GAUSSIAN_MORSE:
        lip, estimated = gradient_lipschitz_bound(spec, 2 * R), False
    else:
        lip, estimated = sampled_gradient_lipschitz(spec, 2 * R, seed=seed), True
    dist = w1(f, g)
    rhs = lip * dist
    return {"lhs": lhs, "lipschitz": lip, "lipschitz_estimated": estimated, "w1": dist, "rhs": rhs,
            "ok": lhs <= rhs + 1e-9, "n_points": int(pts.shape[0])}


def field_w1_bound_check(f: DiscreteMeasure, g: DiscreteMeasure, spec: PotentialSpec, R: float, **kw) -> bool:
    return bool(field_w1_report(f, g, spec, R, **kw)["ok"])


def marginal_field(f: DiscreteMeasure, spec: PotentialSpec, points) -> np.ndarray:
    rho = first_marginal(f)
    return potential_field(np.atleast_2d(points), rho.x, rho.m, spec)
