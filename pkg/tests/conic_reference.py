"""Dense textbook HSDE splitting, kept deliberately plain to serve as a test oracle.

No equilibration, no over-relaxation, no factorization caching; the only
shared idea with the package solver is the embedding itself.
"""

import numpy as np
import scipy.sparse as sp

from quietpath.model import ConeDims, ConicModel


def make_model(c, A, b, cones: ConeDims) -> ConicModel:
    empty = np.zeros(0, dtype=int)
    return ConicModel(c=np.asarray(c, float), A=sp.csc_matrix(np.asarray(A, float)), b=np.asarray(b, float),
                      cones=cones, binaries=empty, bound_cols=empty, lo_rows=empty, hi_rows=empty,
                      lo=np.zeros(0), hi=np.zeros(0))


def _soc(v):
    t, x = v[0], v[1:]
    r = np.sqrt(x @ x)
    if r <= t:
        return v
    if r <= -t:
        return 0 * v
    a = (t + r) / 2
    return np.concatenate([[a], a * x / r])


def _dual_cone(y, cones):
    out = y.copy()
    z, l = cones.z, cones.l
    out[z:z + l] = np.maximum(out[z:z + l], 0)
    k = z + l
    for q in cones.q:
        out[k:k + q] = _soc(out[k:k + q])
        k += q
    return out


def reference_solve(c, A, b, cones, tol=1e-11, max_iters=400_000):
    """Returns (objective, x) from the plain iteration u <- P(Q^-1 (u + v) - v)."""
    A = np.asarray(A, float)
    m, n = A.shape
    N = n + m + 1
    Q = np.zeros((N, N))
    Q[:n, n:n + m] = A.T
    Q[:n, -1] = c
    Q[n:n + m, :n] = -A
    Q[n:n + m, -1] = b
    Q[-1, :n] = -c
    Q[-1, n:n + m] = -b
    W = np.linalg.inv(np.eye(N) + Q)
    u = np.zeros(N)
    v = np.zeros(N)
    u[-1] = v[-1] = 1.0
    for it in range(max_iters):
        ut = W @ (u + v)
        w = ut - v
        un = w.copy()
        un[n:n + m] = _dual_cone(w[n:n + m], cones)
        un[-1] = max(w[-1], 0.0)
        v = v - ut + un
        u = un
        if it % 50 == 0 and u[-1] > 0:
            tau = u[-1]
            x, y, s = u[:n] / tau, u[n:n + m] / tau, v[n:n + m] / tau
            pr = np.linalg.norm(A @ x + s - b) / (1 + np.linalg.norm(b))
            dr = np.linalg.norm(A.T @ y + c) / (1 + np.linalg.norm(c))
            gap = abs(c @ x + b @ y) / (1 + abs(c @ x) + abs(b @ y))
            if max(pr, dr, gap) < tol:
                return float(c @ x), x
    raise RuntimeError("reference iteration did not converge")


def random_program(rng, n=8, z=2, l=6, q=(3, 3, 4)):
    """Feasible, bounded program built from a complementary primal-dual pair."""
    cones = ConeDims(z, l, list(q))
    m = cones.m
    A = rng.normal(size=(m, n))
    x = rng.normal(size=n)
    s = np.zeros(m)
    y = np.zeros(m)
    y[:z] = rng.normal(size=z)
    for i in range(z, z + l):
        if rng.random() < 0.5:
            s[i] = rng.uniform(0.1, 1)
        else:
            y[i] = rng.uniform(0.1, 1)
    k = z + l
    for d in q:
        dirn = rng.normal(size=d - 1)
        dirn /= np.linalg.norm(dirn)
        kind = rng.integers(3)
        if kind == 0:                                  # s interior, y = 0
            s[k] = 2.0
            s[k + 1:k + d] = dirn
        elif kind == 1:                                # y interior, s = 0
            y[k] = 2.0
            y[k + 1:k + d] = dirn
        else:                                          # both on the boundary, orthogonal
            a, bb = rng.uniform(0.5, 1.5, 2)
            s[k], s[k + 1:k + d] = a, a * dirn
            y[k], y[k + 1:k + d] = bb, -bb * dirn
        k += d
    b = A @ x + s
    c = -A.T @ y
    return c, A, b, cones
