"""Continuous conic solves: a native homogeneous self-dual ADMM and library backends.

All backends take a :class:`~quietpath.model.ConicModel` and return a
:class:`ConicSolution` in the model's own variables (x, y, s) with the sign
conventions ``A x + s = b``, ``s in K``, ``A^T y + c = 0``, ``y in K*``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import QuietPathError
from ..model import ConeDims, ConicModel


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITER_LIMIT = "IterLimit"


@dataclass
class ConicSolution:
    status: Status
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    objective: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class ConicConfig:
    eps_abs: float = 1e-6
    eps_rel: float = 1e-6
    max_iters: int = 100_000
    relaxation: float = 1.5
    equilibrate: bool = True
    ruiz_passes: int = 15
    check_every: int = 10
    backend: str = "native"     # "native", "scs" or "clarabel"


# ----------------------------------------------------------------------------
# cones


def soc_blocks(cones: ConeDims) -> list[tuple[int, int]]:
    out, start = [], cones.z + cones.l
    for q in cones.q:
        out.append((start, start + q))
        start += q
    return out


def project_soc(v: np.ndarray) -> np.ndarray:
    t, x = v[0], v[1:]
    nx = np.linalg.norm(x)
    if nx <= t:
        return v.copy()
    if nx <= -t:
        return np.zeros_like(v)
    a = 0.5 * (t + nx)
    return np.concatenate([[a], (a / nx) * x])


def _project_soc_batch(V: np.ndarray) -> np.ndarray:
    """Row-wise projection of an (N, d) array onto SOC(d)."""
    t = V[:, 0]
    X = V[:, 1:]
    nx = np.linalg.norm(X, axis=1)
    out = V.copy()
    zero = nx <= -t
    mid = (nx > np.abs(t))
    out[zero] = 0.0
    a = 0.5 * (t[mid] + nx[mid])
    out[mid, 0] = a
    out[mid, 1:] = X[mid] * (a / nx[mid])[:, None]
    return out


class ConeProjector:
    """Projection onto K* restricted to the dual variables (zero cone -> free)."""

    def __init__(self, cones: ConeDims):
        self.z, self.l = cones.z, cones.l
        self.groups: list[tuple[np.ndarray, int]] = []
        start = cones.z + cones.l
        by_dim: dict[int, list[int]] = {}
        for q in cones.q:
            by_dim.setdefault(q, []).append(start)
            start += q
        for d, starts in by_dim.items():
            idx = np.asarray(starts)[:, None] + np.arange(d)[None, :]
            self.groups.append((idx, d))

    def dual(self, y: np.ndarray) -> np.ndarray:
        out = y.copy()
        sl = slice(self.z, self.z + self.l)
        out[sl] = np.maximum(out[sl], 0.0)
        for idx, _ in self.groups:
            out[idx] = _project_soc_batch(y[idx])
        return out

    def primal(self, s: np.ndarray) -> np.ndarray:
        out = s.copy()
        out[: self.z] = 0.0
        sl = slice(self.z, self.z + self.l)
        out[sl] = np.maximum(out[sl], 0.0)
        for idx, _ in self.groups:
            out[idx] = _project_soc_batch(s[idx])
        return out


# ----------------------------------------------------------------------------
# equilibration


def ruiz_equilibrate(A: sp.csc_matrix, cones: ConeDims, passes: int = 15):
    """Row/column scalings D, E with D A E roughly unit-normed.

    Rows of one second-order cone share a single factor so the cone is preserved.
    """
    m, n = A.shape
    D = np.ones(m)
    E = np.ones(n)
    M = A.tocsc(copy=True)
    blocks = soc_blocks(cones)
    for _ in range(passes):
        Mabs = abs(M)
        row = np.sqrt(np.asarray(Mabs.max(axis=1).todense()).ravel())
        col = np.sqrt(np.asarray(Mabs.max(axis=0).todense()).ravel())
        for a, b in blocks:
            row[a:b] = row[a:b].max()
        row[row < 1e-8] = 1.0
        col[col < 1e-8] = 1.0
        M = sp.diags(1.0 / row) @ M @ sp.diags(1.0 / col)
        D /= row
        E /= col
    return sp.csc_matrix(M), D, E


# ----------------------------------------------------------------------------
# native HSDE ADMM


class NativeWorkspace:
    """Factorized (I + Q) for one constraint matrix; b and c may change between solves."""

    def __init__(self, model: ConicModel, cfg: ConicConfig | None = None):
        self.cfg = cfg or ConicConfig()
        self.cones = model.cones
        A = sp.csc_matrix(model.A)
        if self.cfg.equilibrate:
            self.A, self.D, self.E = ruiz_equilibrate(A, model.cones, self.cfg.ruiz_passes)
        else:
            self.A, self.D, self.E = A, np.ones(A.shape[0]), np.ones(A.shape[1])
        self.m, self.n = self.A.shape
        self.proj = ConeProjector(model.cones)
        # (I + A^T A) zx = rhs, from the block system [[I, A^T], [-A, I]]
        K = sp.identity(self.n, format="csc") + (self.A.T @ self.A)
        self._lu = spla.splu(sp.csc_matrix(K), permc_spec="MMD_AT_PLUS_A")
        self.c = model.c.copy()
        self.b = model.b.copy()
        self._prepare()

    def update(self, b=None, c=None) -> None:
        if b is not None:
            self.b = np.asarray(b, dtype=float).copy()
        if c is not None:
            self.c = np.asarray(c, dtype=float).copy()
        self._prepare()

    def _prepare(self):
        self.bh = self.D * self.b
        self.ch = self.E * self.c
        nb, nc = np.linalg.norm(self.bh), np.linalg.norm(self.ch)
        # normalise data so the embedding is well balanced
        self.sb = 1.0 / max(nb, 1e-4) if nb > 0 else 1.0
        self.sc = 1.0 / max(nc, 1e-4) if nc > 0 else 1.0
        self.sb = min(self.sb, 1e4)
        self.sc = min(self.sc, 1e4)
        self.bh = self.bh * self.sb
        self.ch = self.ch * self.sc
        self.g = self._solve_M(self.ch, self.bh)
        self.hg = self.ch @ self.g[0] + self.bh @ self.g[1]

    def _solve_M(self, rx, ry):
        """Solve [[I, A^T], [-A, I]] (zx, zy) = (rx, ry)."""
        zx = self._lu.solve(rx - self.A.T @ ry)
        zy = ry + self.A @ zx
        return zx, zy

    def _lin(self, wx, wy, wt):
        px, py = self._solve_M(wx, wy)
        tau = (wt + self.ch @ px + self.bh @ py) / (1.0 + self.hg)
        return px - tau * self.g[0], py - tau * self.g[1], tau

    def solve(self, warm: ConicSolution | None = None) -> ConicSolution:
        cfg = self.cfg
        _A, bh, ch, proj = self.A, self.bh, self.ch, self.proj
        n, m = self.n, self.m
        ux, uy, ut = np.zeros(n), np.zeros(m), 1.0
        vx, vy, vt = np.zeros(n), np.zeros(m), 1.0
        if warm is not None and warm.x is not None and len(warm.x) == n:
            ux = warm.x / self.E * self.sb
            uy = warm.y / self.D * self.sc
            vy = warm.s * self.D * self.sb
        alpha = cfg.relaxation
        nb, nc = np.linalg.norm(bh), np.linalg.norm(ch)
        best = None
        k = 0
        for k in range(1, cfg.max_iters + 1):
            tx, ty, tt = self._lin(ux + vx, uy + vy, ut + vt)
            rx = alpha * tx + (1 - alpha) * ux
            ry = alpha * ty + (1 - alpha) * uy
            rt = alpha * tt + (1 - alpha) * ut
            ux_new = rx - vx
            uy_new = proj.dual(ry - vy)
            ut_new = max(rt - vt, 0.0)
            vx = vx - rx + ux_new
            vy = vy - ry + uy_new
            vt = vt - rt + ut_new
            ux, uy, ut = ux_new, uy_new, ut_new
            if k % cfg.check_every and k != cfg.max_iters:
                continue
            res = self._residuals(ux, uy, vy, ut, vt, nb, nc)
            if res is not None:
                status, sol = res
                if status is not None:
                    sol.iterations = k
                    return sol
                best = sol
        if best is None:
            best = self._unscaled(ux, uy, vy, max(ut, 1e-12), Status.ITER_LIMIT)
        best.status = Status.ITER_LIMIT
        best.iterations = k
        return best

    def _residuals(self, ux, uy, vy, ut, vt, nb, nc):
        cfg = self.cfg
        A, bh, ch = self.A, self.bh, self.ch
        s = vy
        if ut > 1e-10:
            x, y, sl = ux / ut, uy / ut, s / ut
            Ax = A @ x
            ATy = A.T @ y
            pr = Ax + sl - bh
            dr = ATy + ch
            cx, by = ch @ x, bh @ y
            # convergence is judged in unscaled space
            p_un = np.linalg.norm(pr / self.D) / self.sb
            d_un = np.linalg.norm(dr / self.E) / self.sc
            Ax_un = np.linalg.norm(Ax / self.D) / self.sb
            s_un = np.linalg.norm(sl / self.D) / self.sb
            b_un = np.linalg.norm(self.b)
            ATy_un = np.linalg.norm(ATy / self.E) / self.sc
            c_un = np.linalg.norm(self.c)
            scale_obj = self.sb * self.sc
            pobj, dobj = cx / scale_obj, -by / scale_obj
            gap = abs(pobj - dobj)
            sol = self._unscaled(ux, uy, vy, ut, None)
            sol.primal_residual, sol.dual_residual, sol.gap = p_un, d_un, gap
            if (p_un <= cfg.eps_abs + cfg.eps_rel * max(Ax_un, s_un, b_un)
                    and d_un <= cfg.eps_abs + cfg.eps_rel * max(ATy_un, c_un)
                    and gap <= cfg.eps_abs + cfg.eps_rel * max(abs(pobj), abs(dobj))):
                sol.status = Status.OPTIMAL
                return Status.OPTIMAL, sol
        else:
            sol = None
        # certificates
        by = bh @ uy
        if by < 0:
            ATy = A.T @ uy
            if np.linalg.norm(ATy / self.E) / (-by) * self.sb / self.sc <= cfg.eps_abs * 10:
                y = uy / (-by)
                cert = ConicSolution(Status.INFEASIBLE, np.full(self.n, np.nan), self.D * y * self.sb,
                                     np.full(self.m, np.nan), math.inf, math.nan, math.nan, math.nan)
                return Status.INFEASIBLE, cert
        cx = ch @ ux
        if cx < 0:
            r = A @ ux + s
            if np.linalg.norm(r / self.D) / (-cx) * self.sc / self.sb <= cfg.eps_abs * 10:
                cert = ConicSolution(Status.UNBOUNDED, self.E * ux / (-cx) * self.sc, np.full(self.m, np.nan),
                                     np.full(self.m, np.nan), -math.inf, math.nan, math.nan, math.nan)
                return Status.UNBOUNDED, cert
        if sol is None:
            return None
        return None, sol

    def _unscaled(self, ux, uy, vy, ut, status):
        x = self.E * (ux / ut) / self.sb
        y = self.D * (uy / ut) / self.sc
        s = (vy / ut) / self.D / self.sb
        obj = float(self.c @ x)
        return ConicSolution(status, x, y, s, obj, math.nan, math.nan, math.nan)


# ----------------------------------------------------------------------------
# library backends


class ScsWorkspace:
    def __init__(self, model: ConicModel, cfg: ConicConfig | None = None):
        import scs

        self.cfg = cfg or ConicConfig(backend="scs")
        self.model = model
        data = {"A": sp.csc_matrix(model.A), "b": model.b.copy(), "c": model.c.copy()}
        self._solver = scs.SCS(
            data, model.cones.as_scs(), verbose=False,
            eps_abs=self.cfg.eps_abs, eps_rel=self.cfg.eps_rel, max_iters=self.cfg.max_iters,
            acceleration_lookback=10,
        )

    def update(self, b=None, c=None) -> None:
        self._solver.update(b=None if b is None else np.asarray(b, float),
                            c=None if c is None else np.asarray(c, float))

    def solve(self, warm: ConicSolution | None = None) -> ConicSolution:
        if warm is not None and warm.ok:
            out = self._solver.solve(warm_start=True, x=warm.x, y=warm.y, s=warm.s)
        else:
            out = self._solver.solve(warm_start=False)
        info = out["info"]
        sv = info["status_val"]
        if sv in (1, 2):
            status = Status.OPTIMAL
        elif sv in (-2, -7):
            status = Status.INFEASIBLE
        elif sv in (-1, -6):
            status = Status.UNBOUNDED
        else:
            status = Status.ITER_LIMIT
        x = out["x"]
        obj = float(info["pobj"]) if status is Status.OPTIMAL else (
            math.inf if status is Status.INFEASIBLE else float(self.model.c @ x))
        return ConicSolution(status, x, out["y"], out["s"], obj,
                             float(info["res_pri"]), float(info["res_dual"]), float(info["gap"]),
                             int(info["iter"]))


class ClarabelWorkspace:
    def __init__(self, model: ConicModel, cfg: ConicConfig | None = None):
        self.cfg = cfg or ConicConfig(backend="clarabel")
        self.model = model
        self.b = model.b.copy()
        self.c = model.c.copy()

    def update(self, b=None, c=None) -> None:
        if b is not None:
            self.b = np.asarray(b, float).copy()
        if c is not None:
            self.c = np.asarray(c, float).copy()

    def solve(self, warm: ConicSolution | None = None) -> ConicSolution:
        import clarabel

        mod = self.model
        cones = []
        if mod.cones.z:
            cones.append(clarabel.ZeroConeT(mod.cones.z))
        if mod.cones.l:
            cones.append(clarabel.NonnegativeConeT(mod.cones.l))
        cones += [clarabel.SecondOrderConeT(q) for q in mod.cones.q]
        st = clarabel.DefaultSettings()
        st.verbose = False
        st.tol_gap_abs = st.tol_gap_rel = st.tol_feas = min(self.cfg.eps_abs, 1e-8)
        P = sp.csc_matrix((mod.n, mod.n))
        solver = clarabel.DefaultSolver(P, self.c, sp.csc_matrix(mod.A), self.b, cones, st)
        out = solver.solve()
        name = str(out.status)
        x, y, s = np.array(out.x), np.array(out.z), np.array(out.s)
        if name in ("Solved", "AlmostSolved"):
            status = Status.OPTIMAL
        elif "PrimalInfeasible" in name:
            status = Status.INFEASIBLE
        elif "DualInfeasible" in name:
            status = Status.UNBOUNDED
        else:
            status = Status.ITER_LIMIT
        obj = float(self.c @ x) if status is not Status.INFEASIBLE else math.inf
        pr = float(np.linalg.norm(mod.A @ x + s - self.b)) if status is Status.OPTIMAL else math.nan
        dr = float(np.linalg.norm(mod.A.T @ y + self.c)) if status is Status.OPTIMAL else math.nan
        gap = abs(obj + float(self.b @ y)) if status is Status.OPTIMAL else math.nan
        return ConicSolution(status, x, y, s, obj, pr, dr, gap, int(out.iterations))


BACKENDS = {"native": NativeWorkspace, "scs": ScsWorkspace, "clarabel": ClarabelWorkspace}


def make_workspace(model: ConicModel, cfg: ConicConfig | None = None):
    cfg = cfg or ConicConfig()
    try:
        cls = BACKENDS[cfg.backend]
    except KeyError:
        raise QuietPathError(f"unknown conic backend {cfg.backend!r}") from None
    return cls(model, cfg)


def solve_conic(model: ConicModel, cfg: ConicConfig | None = None) -> ConicSolution:
    """Solve the continuous conic program (binaries are ignored)."""
    return make_workspace(model, cfg).solve()
