"""Independent reference implementations used only by the tests."""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog


SCALE = 2**40


def vertex_enumeration_w1(a, b, C) -> float:
    """Minimum of sum pi_ij C_ij over the vertices of the transport polytope.

    Every vertex is supported on a spanning forest of the bipartite
    graph, so it can be built by repeatedly taking a leaf line (row or
    column) and sending its whole remaining mass to one partner line.
    The search branches over every (leaf, partner) choice, which reaches
    every vertex. Remaining masses are held as exact integers so states
    reached in a different order are merged by the memo. Branch-and-bound
    with an admissible bound (each line ships its mass at its cheapest
    cost) skips subtrees that cannot beat the incumbent vertex; pruning
    never discards the minimizing vertex.
    """
    n, m = len(a), len(b)
    q = [int(round(float(x) * SCALE)) for x in list(a) + list(b)]
    q[int(np.argmax(q[:n]))] += SCALE - sum(q[:n])
    q[n + int(np.argmax(q[n:]))] += SCALE - sum(q[n:])
    N = n + m
    W = [[0.0] * N for _ in range(N)]
    for i in range(n):
        for j in range(m):
            W[i][n + j] = W[n + j][i] = float(C[i][j]) / SCALE
    exact, lower = {}, {}

    def lb(alive, mass):
        rows = [l for l in range(n) if alive >> l & 1]
        cols = [l for l in range(n, N) if alive >> l & 1]
        s1 = sum(mass[i] * min(W[i][j] for j in cols) for i in rows) if cols else 0.0
        s2 = sum(mass[j] * min(W[i][j] for i in rows) for j in cols) if rows else 0.0
        return max(s1, s2)

    def solve(alive, mass, ub):
        key = (alive, mass)
        if key in exact:
            return exact[key], True
        if lower.get(key, -1.0) >= ub:
            return lower[key], False
        rows = [l for l in range(n) if alive >> l & 1]
        cols = [l for l in range(n, N) if alive >> l & 1]
        if len(rows) <= 1 or len(cols) <= 1:
            if not rows or not cols:
                v = 0.0
            elif len(rows) == 1:
                v = sum(mass[j] * W[rows[0]][j] for j in cols)
            else:
                v = sum(mass[i] * W[i][cols[0]] for i in rows)
            exact[key] = v
            return v, True
        best = ub
        children = []
        for L in rows + cols:
            mL = mass[L]
            for P in (cols if L < n else rows):
                mP = mass[P]
                if mL <= mP:
                    nm = list(mass); nm[L] = 0; nm[P] = mP - mL
                    child = (alive & ~(1 << L), tuple(nm))
                    c = mL * W[L][P]
                    children.append((c + lb(*child), c, child))
        children.sort(key=lambda t: t[0])
        for bound, c, child in children:
            if bound >= best:
                break
            r, ok = solve(child[0], child[1], best - c)
            if ok and c + r < best:
                best = c + r
        if best < ub:
            exact[key] = best
            return best, True
        lower[key] = max(lower.get(key, -1.0), ub)
        return ub, False
    return solve((1 << N) - 1, tuple(q), math.inf)[0]


def linprog_w1(a, b, C) -> float:
    n, m = len(a), len(b)
    A = np.zeros((n + m, n * m))
    for i in range(n):
        A[i, i * m:(i + 1) * m] = 1.0
    for j in range(m):
        A[n + j, j::m] = 1.0
    res = linprog(np.asarray(C).ravel(), A_eq=A, b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs")
    assert res.status == 0
    return float(res.fun)


def pairwise_cost(P, Q) -> np.ndarray:
    return np.array([[math.dist(p, q) for q in Q] for p in P])


def naive_potential_field(xt, xs, ms, grad):
    out = np.zeros_like(xt, dtype=np.float64)
    for i in range(xt.shape[0]):
        for j in range(xs.shape[0]):
            out[i] -= ms[j] * grad(xt[i] - xs[j])
    return out


def gaussian_morse_grad(x, C_A, C_R, l_A, l_R):
    r2 = float(np.dot(x, x))
    return (2 * C_A / l_A**2) * math.exp(-r2 / l_A**2) * x - (2 * C_R / l_R**2) * math.exp(-r2 / l_R**2) * x


def naive_alignment(xt, vt, xs, vs, ms, gamma):
    out = np.zeros_like(vt, dtype=np.float64)
    for i in range(xt.shape[0]):
        for j in range(xs.shape[0]):
            r = math.dist(xt[i], xs[j])
            out[i] += ms[j] * (1 + r * r) ** (-gamma) * (vs[j] - vt[i])
    return out


def rotation_exact(x0, v0, t):
    """Solution of x' = v, v' = -x."""
    c, s = math.cos(t), math.sin(t)
    return c * x0 + s * v0, -s * x0 + c * v0


def linear_oscillator(x, v, m, t):
    return -x
