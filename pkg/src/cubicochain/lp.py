"""Linear programs in standard form ``min c.x  s.t.  A x = b, x >= 0``.

Two backends share one result contract:

* ``"highs"``: scipy's HiGHS interface (default, sparse, fast);
* ``"simplex"``: a dense two-phase revised simplex with Bland's rule, used for
  small problems and as an independent cross-check.

Both return primal ``x`` and equality duals ``y`` (a solution of
``max b.y  s.t.  A^T y <= c``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog


class LpError(RuntimeError):
    """Solver failure; ``bound`` carries the best objective bound known."""

    def __init__(self, msg: str, bound: float = float("nan")):
        super().__init__(msg)
        self.bound = bound


class LpInfeasible(LpError):
    pass


@dataclass
class LpResult:
    x: np.ndarray
    y: np.ndarray
    value: float
    iterations: int
    backend: str


def solve_lp(c, A, b, backend: str = "highs", tol: float = 1e-10, max_iter: int | None = None) -> LpResult:
    c = np.asarray(c, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if backend == "highs":
        return _solve_highs(c, A, b, tol, max_iter)
    if backend == "simplex":
        A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=np.float64)
        return RevisedSimplex(A, b, c, tol=tol, max_iter=max_iter or 50_000).solve()
    raise ValueError(f"unknown LP backend {backend!r}")


def _solve_highs(c, A, b, tol, max_iter) -> LpResult:
    opts = {
        "primal_feasibility_tolerance": max(tol, 1e-10),
        "dual_feasibility_tolerance": max(tol, 1e-10),
        "presolve": True,
    }
    if max_iter:
        opts["maxiter"] = int(max_iter)
    res = linprog(c, A_eq=sp.csr_matrix(A), b_eq=b, bounds=(0, None), method="highs", options=opts)
    if res.status == 2:
        raise LpInfeasible("LP infeasible")
    if res.status == 1:
        raise LpError("LP iteration cap exceeded", bound=float(getattr(res, "fun", np.nan) or np.nan))
    if res.status != 0:
        raise LpError(f"LP failed: {res.message}")
    return LpResult(res.x, np.asarray(res.eqlin.marginals), float(res.fun), int(res.nit), "highs")


class RevisedSimplex:
    """Dense two-phase revised simplex with Bland's anti-cycling rule.

    Intended for problems with at most a few hundred rows.  Every iteration
    solves with the current basis matrix directly, so no factorization drift
    accumulates.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, c: np.ndarray, tol: float = 1e-10, max_iter: int = 50_000):
        self.A = np.array(A, dtype=np.float64)
        self.b = np.array(b, dtype=np.float64)
        self.c = np.array(c, dtype=np.float64)
        self.tol = tol
        self.max_iter = max_iter
        self.iterations = 0

    def _run(self, A, b, c, basis, allowed):
        m = A.shape[0]
        while True:
            if self.iterations >= self.max_iter:
                xb = np.linalg.solve(A[:, basis], b)
                raise LpError("simplex iteration cap exceeded", bound=float(c[basis] @ xb))
            self.iterations += 1
            B = A[:, basis]
            xb = np.linalg.solve(B, b)
            y = np.linalg.solve(B.T, c[basis])
            reduced = c - A.T @ y
            scale = 1.0 + np.abs(c).max(initial=0.0)
            cand = np.flatnonzero((reduced < -self.tol * scale) & allowed)
            cand = cand[~np.isin(cand, basis)]
            if cand.size == 0:
                return basis, xb, y
            q = int(cand[0])  # Bland: lowest index enters
            d = np.linalg.solve(B, A[:, q])
            pos = d > self.tol
            if not pos.any():
                raise LpError("LP unbounded")
            ratios = np.full(m, np.inf)
            ratios[pos] = np.maximum(xb[pos], 0.0) / d[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + self.tol * (1 + best))
            leave = ties[np.argmin(np.asarray(basis)[ties])]  # Bland: lowest basic index leaves
            basis = list(basis)
            basis[leave] = q

    def solve(self) -> LpResult:
        A, b, c = self.A.copy(), self.b.copy(), self.c
        m, nv = A.shape
        flip = b < 0
        A[flip] *= -1
        b[flip] *= -1
        # phase one on [A | I]
        A1 = np.hstack([A, np.eye(m)])
        c1 = np.concatenate([np.zeros(nv), np.ones(m)])
        allowed = np.ones(nv + m, dtype=bool)
        basis = list(range(nv, nv + m))
        basis, xb, _ = self._run(A1, b, c1, basis, allowed)
        infeas = float(c1[basis] @ xb)
        if infeas > self.tol * (1 + np.abs(b).sum()):
            raise LpInfeasible("LP infeasible", bound=infeas)
        # drive artificial variables out of the basis; drop redundant rows
        keep_rows = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] < nv:
                continue
            B = A1[:, basis]
            row = np.linalg.solve(B, A1[:, :nv].copy())[r]
            nonbasic = [j for j in np.flatnonzero(np.abs(row) > 1e-9) if j not in basis]
            if nonbasic:
                basis[r] = int(nonbasic[0])
            else:
                keep_rows[r] = False
        rows = np.flatnonzero(keep_rows)
        A2 = A[rows]
        b2 = b[rows]
        basis2 = [basis[r] for r in rows]
        allowed2 = np.ones(nv, dtype=bool)
        basis2, xb, y2 = self._run(A2, b2, c, basis2, allowed2)
        x = np.zeros(nv)
        x[basis2] = xb
        x[x < 0] = 0.0
        y = np.zeros(m)
        y[rows] = y2
        y[flip] *= -1
        return LpResult(x, y, float(c @ x), self.iterations, "simplex")
