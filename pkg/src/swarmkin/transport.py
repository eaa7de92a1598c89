"""Exact Wasserstein-1 distance between discrete measures.

The solver is a primal network simplex on the complete bipartite graph
between the atoms of ``f`` (supplies) and ``g`` (demands), with an
artificial root node. Details that matter for exactness:

* Masses are scaled to int64 by 2**50, so flows (and degeneracy tests)
  are exact. Plan entries are converted back to floats at the end.
* Artificial arcs carry a lexicographic big-M cost (an integer M-level
  next to the real part), so no large float constant pollutes the
  potentials.
* Anti-cycling uses strongly feasible trees: the leaving arc is the
  last blocking arc met when walking the pivot cycle from its apex in
  the direction of the entering arc.
* Pricing is a deterministic block search; inside a block the most
  negative reduced cost wins, ties go to the lowest arc index.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import DimensionMismatch, NotLipschitz, NotOneDimensional, SizeCapExceeded, SolverFailure
from .measures import DiscreteMeasure, SpatialMeasure

DEFAULT_CAP = 4000
PLAN_TOL = 1e-10
MASS_SCALE = 2**50

Measure = DiscreteMeasure | SpatialMeasure


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Sparse coupling pi_ij between atoms of f (rows) and g (cols)."""

    rows: np.ndarray
    cols: np.ndarray
    entries: np.ndarray
    cost: float
    shape: tuple[int, int]

    def dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        np.add.at(out, (self.rows, self.cols), self.entries)
        return out

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.entries))

    def to_dict(self) -> dict:
        order = np.lexsort((self.cols, self.rows))
        return {
            "cost": float(self.cost),
            "entries": [
                [int(self.rows[k]), int(self.cols[k]), float(self.entries[k])] for k in order
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass(frozen=True, eq=False)
class DualPotential:
    """Values of a test function at the atoms of f and of g."""

    phi_f: np.ndarray
    phi_g: np.ndarray


@dataclass(frozen=True, eq=False)
class W1Solution:
    distance: float
    plan: TransportPlan
    dual: DualPotential
    pivots: int = 0
    extras: dict = field(default_factory=dict)


def _coords(mu: Measure, metric: str) -> np.ndarray:
    if isinstance(mu, SpatialMeasure):
        return mu.x
    if metric == "phase":
        return mu.points()
    if metric == "position":
        return mu.x
    raise ValueError(f"unknown metric {metric!r}; use 'phase' or 'position'")


def _check_pair(f: Measure, g: Measure, metric: str) -> tuple[np.ndarray, np.ndarray]:
    if f.dim != g.dim:
        raise DimensionMismatch(f"dim {f.dim} != dim {g.dim}")
    P, Q = _coords(f, metric), _coords(g, metric)
    if P.shape[1] != Q.shape[1]:
        raise DimensionMismatch("phase-space and position-only measures cannot be compared")
    return P, Q


def cost_matrix(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Euclidean distances |P_i - Q_j|, computed coordinate by coordinate."""
    sq = np.zeros((P.shape[0], Q.shape[0]))
    for k in range(P.shape[1]):
        diff = P[:, k, None] - Q[None, :, k]
        sq += diff * diff
    return np.sqrt(sq)


def _integer_masses(m: np.ndarray) -> np.ndarray:
    q = np.rint(m * MASS_SCALE).astype(np.int64)
    q = np.maximum(q, 1)
    q[int(np.argmax(q))] += MASS_SCALE - int(q.sum())
    return q


@numba.njit(cache=True)
def _arc_ends(e, n_f, n_g, E):
    if e < E:
        return e // n_g, n_f + e % n_g
    if e < E + n_f:
        return e - E, n_f + n_g
    return n_f + n_g, n_f + (e - E - n_f)


@numba.njit(cache=True)
def _tree_potentials(tree_arc, n_f, n_g, E, C, parent, pslot, depth, potk, potr, deg, start, adj, queue):
    """BFS from the root; potentials make every tree arc's reduced cost zero."""
    N = n_f + n_g + 1
    root = N - 1
    for u in range(N):
        deg[u] = 0
    for s in range(N - 1):
        t, h = _arc_ends(tree_arc[s], n_f, n_g, E)
        deg[t] += 1
        deg[h] += 1
    start[0] = 0
    for u in range(N):
        start[u + 1] = start[u] + deg[u]
        deg[u] = 0
    for s in range(N - 1):
        t, h = _arc_ends(tree_arc[s], n_f, n_g, E)
        adj[start[t] + deg[t]] = s
        deg[t] += 1
        adj[start[h] + deg[h]] = s
        deg[h] += 1
    for u in range(N):
        parent[u] = -2
    parent[root] = -1
    pslot[root] = -1
    depth[root] = 0
    potk[root] = 0
    potr[root] = 0.0
    head = 0
    tail = 1
    queue[0] = root
    while head < tail:
        p = queue[head]
        head += 1
        for q in range(start[p], start[p + 1]):
            s = adj[q]
            e = tree_arc[s]
            t, h = _arc_ends(e, n_f, n_g, E)
            c = h if t == p else t
            if parent[c] != -2:
                continue
            if e < E:
                ck = 0
                cr = C[e // n_g, e % n_g]
            else:
                ck = 1
                cr = 0.0
            if t == p:
                potk[c] = potk[p] + ck
                potr[c] = potr[p] + cr
            else:
                potk[c] = potk[p] - ck
                potr[c] = potr[p] - cr
            parent[c] = p
            pslot[c] = s
            depth[c] = depth[p] + 1
            queue[tail] = c
            tail += 1
    return tail == N


@numba.njit(cache=True)
def _network_simplex(a, b, C, tol, max_iter):
    n_f = a.shape[0]
    n_g = b.shape[0]
    E = n_f * n_g
    A = E + n_f + n_g
    N = n_f + n_g + 1
    tree_arc = np.empty(N - 1, np.int64)
    tree_flow = np.empty(N - 1, np.int64)
    for i in range(n_f):
        tree_arc[i] = E + i
        tree_flow[i] = a[i]
    for j in range(n_g):
        tree_arc[n_f + j] = E + n_f + j
        tree_flow[n_f + j] = b[j]

    parent = np.empty(N, np.int64)
    pslot = np.empty(N, np.int64)
    depth = np.empty(N, np.int64)
    potk = np.empty(N, np.int64)
    potr = np.empty(N, np.float64)
    deg = np.empty(N, np.int64)
    start = np.empty(N + 1, np.int64)
    adj = np.empty(2 * (N - 1), np.int64)
    queue = np.empty(N, np.int64)
    path_s = np.empty(N, np.int64)
    path_c = np.empty(N, np.int64)
    path_up = np.empty(N, np.bool_)

    block = max(int(math.sqrt(A)), 16)
    pos = 0
    it = 0
    status = 0
    while True:
        ok = _tree_potentials(tree_arc, n_f, n_g, E, C, parent, pslot, depth, potk, potr, deg, start, adj, queue)
        if not ok:
            status = 2
            break
        if it >= max_iter:
            status = 1
            break
        # block pricing
        best = -1
        best_k = 0
        best_r = 0.0
        scanned = 0
        e = pos
        while scanned < A:
            stop = min(scanned + block, A)
            while scanned < stop:
                if e < E:
                    i = e // n_g
                    j = n_f + e % n_g
                    k = potk[i] - potk[j]
                    r = C[i, e % n_g] + potr[i] - potr[j]
                elif e < E + n_f:
                    i = e - E
                    k = 1 + potk[i]
                    r = potr[i]
                else:
                    j = n_f + (e - E - n_f)
                    k = 1 - potk[j]
                    r = -potr[j]
                if k < 0 or (k == 0 and r < -tol):
                    if best < 0 or k < best_k or (k == best_k and (r < best_r or (r == best_r and e < best))):
                        best = e
                        best_k = k
                        best_r = r
                scanned += 1
                e += 1
                if e == A:
                    e = 0
            if best >= 0:
                break
        pos = e
        if best < 0:
            break

        # cycle through the apex
        kt, lh = _arc_ends(best, n_f, n_g, E)
        u = kt
        w = lh
        nK = 0
        nL = 0
        # path_* store K-side entries from the front, L-side from the back
        while u != w:
            if depth[u] >= depth[w]:
                path_s[nK] = pslot[u]
                path_c[nK] = u
                nK += 1
                u = parent[u]
            else:
                nL += 1
                path_s[N - nL] = pslot[w]
                path_c[N - nL] = w
                w = parent[w]
        # walk order: K-side reversed (apex -> tail), then L-side (head -> apex)
        delta = -1
        leave = -1
        for q in range(nK - 1, -1, -1):
            s = path_s[q]
            c = path_c[q]
            t, h = _arc_ends(tree_arc[s], n_f, n_g, E)
            fwd = h == c  # traversed parent -> child
            path_up[q] = fwd
            if not fwd:
                if delta < 0 or tree_flow[s] <= delta:
                    delta = tree_flow[s]
                    leave = s
        for q in range(nL):
            idx = N - 1 - q
            s = path_s[idx]
            c = path_c[idx]
            t, h = _arc_ends(tree_arc[s], n_f, n_g, E)
            fwd = t == c  # traversed child -> parent
            path_up[idx] = fwd
            if not fwd:
                if delta < 0 or tree_flow[s] <= delta:
                    delta = tree_flow[s]
                    leave = s
        if leave < 0:
            status = 3
            break
        for q in range(nK):
            s = path_s[q]
            if path_up[q]:
                tree_flow[s] += delta
            else:
                tree_flow[s] -= delta
        for q in range(nL):
            idx = N - 1 - q
            s = path_s[idx]
            if path_up[idx]:
                tree_flow[s] += delta
            else:
                tree_flow[s] -= delta
        tree_arc[leave] = best
        tree_flow[leave] = delta
        it += 1
    return tree_arc, tree_flow, potk, potr, it, status


def _lipschitz_envelope(r_f: np.ndarray, C_ff: np.ndarray, C_fg: np.ndarray):
    """phi(z) = min_i (r_i + |z - p_i|), evaluated at the atoms of f and g."""
    phi_f = np.min(r_f[:, None] + C_ff, axis=0)
    phi_g = np.min(r_f[:, None] + C_fg, axis=0)
    return phi_f, phi_g


def solve_w1(
    f: Measure,
    g: Measure,
    metric: str = "phase",
    cap: int = DEFAULT_CAP,
    max_iter: int | None = None,
) -> W1Solution:
    """Exact W1 with optimal plan and a 1-Lipschitz dual certificate."""
    P, Q = _check_pair(f, g, metric)
    if f.n + g.n > cap:
        raise SizeCapExceeded(f"{f.n} + {g.n} atoms exceeds cap {cap}")
    C = cost_matrix(P, Q)
    cmax = float(C.max())
    tol = 1e-11 * cmax
    a = _integer_masses(f.m)
    b = _integer_masses(g.m)
    if max_iter is None:
        max_iter = 50 * (f.n + g.n) ** 2 + 1000
    tree_arc, tree_flow, potk, potr, pivots, status = _network_simplex(a, b, C, tol, max_iter)
    if status != 0:
        raise SolverFailure(f"network simplex failed (status {status}) after {pivots} pivots")
    n_f, n_g = f.n, g.n
    E = n_f * n_g
    levels = np.unique(potk[: n_f + n_g])
    if levels.size != 1:
        raise SolverFailure("optimal tree has inconsistent artificial levels")
    real = (tree_arc < E) & (tree_flow > 0)
    arcs = tree_arc[real]
    order = np.argsort(arcs, kind="stable")
    arcs = arcs[order]
    rows = (arcs // n_g).astype(np.int64)
    cols = (arcs % n_g).astype(np.int64)
    entries = tree_flow[real][order].astype(np.float64) / MASS_SCALE
    cost = math.fsum((entries * C[rows, cols]).tolist())
    plan = TransportPlan(rows, cols, entries, cost, (n_f, n_g))

    r_f = potr[:n_f]
    C_ff = cost_matrix(P, P)
    phi_f, phi_g = _lipschitz_envelope(r_f, C_ff, C)
    dual = DualPotential(phi_f, phi_g)
    return W1Solution(cost, plan, dual, int(pivots), {"tol": tol})


def w1_exact(f: Measure, g: Measure, metric: str = "phase", cap: int = DEFAULT_CAP):
    """W1(f, g) and an optimal transport plan.

    ``metric="phase"`` uses |(x, v) - (y, w)| on R^{2d}; ``"position"``
    compares positions only.
    """
    sol = solve_w1(f, g, metric=metric, cap=cap)
    return sol.distance, sol.plan


def w1(f: Measure, g: Measure, metric: str = "phase", cap: int = DEFAULT_CAP) -> float:
    return solve_w1(f, g, metric=metric, cap=cap).distance


def w1_1d_arrays(xa, wa, xb, wb) -> float:
    """W1 on the line via the CDF difference: integral of |F - G|."""
    xa = np.asarray(xa, dtype=np.float64).ravel()
    xb = np.asarray(xb, dtype=np.float64).ravel()
    vals = np.concatenate([xa, xb])
    wts = np.concatenate([np.asarray(wa, dtype=np.float64), -np.asarray(wb, dtype=np.float64)])
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    cdf = np.cumsum(wts[order])
    return float(np.sum(np.abs(cdf[:-1]) * np.diff(vals)))


def w1_1d(f: Measure, g: Measure, coordinate: int | None = None, metric: str = "phase") -> float:
    """Fast W1 for measures whose atoms differ in a single coordinate.

    Every other coordinate must take one common value over all atoms of
    both measures; otherwise :class:`NotOneDimensional` is raised.
    """
    P, Q = _check_pair(f, g, metric)
    allp = np.vstack([P, Q])
    varying = [k for k in range(allp.shape[1]) if np.any(allp[:, k] != allp[0, k])]
    if coordinate is None:
        if len(varying) > 1:
            raise NotOneDimensional(f"atoms vary in coordinates {varying}")
        coordinate = varying[0] if varying else 0
    elif any(k != coordinate for k in varying):
        raise NotOneDimensional(f"atoms vary outside coordinate {coordinate}: {varying}")
    return w1_1d_arrays(P[:, coordinate], f.m, Q[:, coordinate], g.m)


def check_lipschitz(points: np.ndarray, values: np.ndarray, tol: float = 1e-12, chunk: int = 1024) -> bool:
    values = np.asarray(values, dtype=np.float64)
    scale = 1.0 + float(np.max(np.abs(values))) if values.size else 1.0
    n = points.shape[0]
    for s in range(0, n, chunk):
        D = cost_matrix(points[s : s + chunk], points)
        gap = np.abs(values[s : s + chunk, None] - values[None, :]) - D
        if np.any(gap > tol * (scale + D)):
            return False
    return True


def dual_value(f: Measure, g: Measure, phi: DualPotential, metric: str = "phase") -> float:
    """|sum_f m_i phi(p_i) - sum_g m_j phi(q_j)| for a 1-Lipschitz phi."""
    P, Q = _check_pair(f, g, metric)
    phi_f = np.asarray(phi.phi_f, dtype=np.float64)
    phi_g = np.asarray(phi.phi_g, dtype=np.float64)
    if phi_f.shape != (f.n,) or phi_g.shape != (g.n,):
        raise DimensionMismatch("potential must give one value per atom of f and of g")
    if not check_lipschitz(np.vstack([P, Q]), np.concatenate([phi_f, phi_g])):
        raise NotLipschitz("potential is not 1-Lipschitz on the atoms")
    return abs(math.fsum((f.m * phi_f).tolist()) - math.fsum((g.m * phi_g).tolist()))


def verify_plan(plan: TransportPlan, f: Measure, g: Measure, metric: str = "phase", tol: float = PLAN_TOL) -> bool:
    """Marginals match the masses of f and g, and the stored cost is the plan's cost."""
    try:
        P, Q = _check_pair(f, g, metric)
    except DimensionMismatch:
        return False
    if plan.shape != (f.n, g.n):
        return False
    rows, cols, ent = plan.rows, plan.cols, plan.entries
    if np.any(ent < 0) or np.any(rows < 0) or np.any(rows >= f.n) or np.any(cols < 0) or np.any(cols >= g.n):
        return False
    if np.any(np.abs(np.bincount(rows, ent, minlength=f.n) - f.m) > tol):
        return False
    if np.any(np.abs(np.bincount(cols, ent, minlength=g.n) - g.m) > tol):
        return False
    dist = np.sqrt(np.sum((P[rows] - Q[cols]) ** 2, axis=1))
    return abs(math.fsum((ent * dist).tolist()) - plan.cost) <= tol


def thin(f: DiscreteMeasure, max_atoms: int, metric: str = "phase") -> tuple[DiscreteMeasure, float]:
    """Deterministic stratified thinning to at most ``max_atoms`` atoms.

    Index order is split into contiguous strata; each stratum is replaced
    by its middle atom carrying the stratum's mass. The returned bound is
    the cost of the coupling that sends every atom to its representative,
    an upper bound on W1(f, thinned).
    """
    if f.n <= max_atoms:
        return f, 0.0
    edges = np.linspace(0, f.n, max_atoms + 1).round().astype(int)
    P = _coords(f, metric)
    reps, masses, bound = [], [], 0.0
    for s, e in zip(edges[:-1], edges[1:]):
        if e <= s:
            continue
        r = (s + e - 1) // 2
        reps.append(r)
        masses.append(f.m[s:e].sum())
        bound += float(f.m[s:e] @ np.sqrt(np.sum((P[s:e] - P[r]) ** 2, axis=1)))
    m = np.asarray(masses)
    return DiscreteMeasure(f.x[reps], f.v[reps], m / m.sum()), bound
