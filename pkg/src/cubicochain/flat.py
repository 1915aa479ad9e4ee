"""Flat norm, weighted flat norm and filling volume as linear programs.

For an m-chain ``T`` the flat norm is ``min mass(R) + mass(V)`` over
``T = R + dV`` and the filling volume is ``min mass(S)`` over ``dS = T``
(``+inf`` if no filling exists).  Free variables are split into nonnegative
pairs so that both problems are classical L1 programs.

Every solve is certified: the solver's equality duals are clipped and scaled
into the dual feasible region, which yields a rigorous lower bound; the
reported ``gap`` is primal value minus that bound.

Unweighted problems are solved on the support bounding box enlarged by
``margin`` (default 0).  This does not change the optimum: clamping every
coordinate onto the box is a cellular map that fixes ``T`` and does not
increase mass, so it sends any decomposition to one inside the box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .grid import Chain, GridDomain, boundary, mass
from .lp import solve_lp


@dataclass
class FlatDecomposition:
    value: float
    R: Chain
    V: Chain
    residual: float
    dual_value: float
    gap: float

    @property
    def mass_R(self) -> float:
        return mass(self.R)

    @property
    def mass_V(self) -> float:
        return mass(self.V)


@dataclass
class Filling:
    value: float
    S: Chain | None
    residual: float
    dual_value: float
    gap: float
    certificate: np.ndarray | None = field(default=None, repr=False)

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.value)


def _work_domain(T: Chain, margin: int | None) -> GridDomain:
    dom = T.domain
    if margin is None or T.is_zero():
        return dom
    lo, hi = T.bbox()
    lo = np.maximum(lo - margin, dom.lo)
    hi = np.minimum(hi + margin, dom.hi)
    # keep at least one cell of thickness so the box is a valid domain
    grow = hi <= lo
    hi = np.where(grow, np.minimum(lo + 1, dom.hi), hi)
    lo = np.where(hi <= lo, hi - 1, lo)
    return GridDomain(dom.n, dom.h, tuple(lo.tolist()), tuple(hi.tolist()))


def cell_weights(domain: GridDomain, dim: int, density: np.ndarray | None) -> np.ndarray:
    """Per-cell LP weights ``h^m * mean of density over incident n-cells`` (all cells)."""
    w = np.full(domain.num_cells(dim), domain.h**dim)
    if density is None:
        return w
    idx = domain.all_cells(dim)
    block_ids, bases = domain.decode(dim, idx)
    rel = bases - np.asarray(domain.lo)
    masks = domain.axes_masks(dim)[block_ids]
    return w * _kernels.incident_mean(np.asarray(density, dtype=np.float64).reshape(domain.cell_shape), rel, masks)


def _restrict_density(density, parent: GridDomain, sub: GridDomain):
    if density is None or parent == sub:
        return density
    d = np.asarray(density).reshape(parent.cell_shape)
    sl = tuple(slice(a - pa, b - pa) for a, b, pa in zip(sub.lo, sub.hi, parent.lo))
    return d[sl]


def _dual_bound(b, y, blocks) -> float:
    """Rigorous lower bound ``b.y / s`` after making ``y`` dual feasible.

    ``blocks`` is a list of ``(M, w)`` pairs requiring ``|M^T y| <= w``; the
    identity block is handled by clipping, the others by scaling.
    """
    y = np.asarray(y, dtype=np.float64).copy()
    s = 1.0
    for M, w in blocks:
        if M is None:
            y = np.clip(y, -w, w)
    for M, w in blocks:
        if M is None:
            continue
        t = np.abs(M.T @ y)
        pos = w > 0
        if np.any(t[~pos] > 0):
            return 0.0
        if pos.any():
            s = max(s, float(np.max(t[pos] / w[pos])))
    return max(float(b @ y) / s, 0.0)


def is_fillable(T: Chain, tol: float = 1e-12) -> bool:
    """True iff ``dS = T`` is solvable (box domains have trivial homology)."""
    if T.dim >= T.domain.n:
        return T.is_zero()
    if T.is_zero():
        return True
    scale = 1.0 + float(np.abs(T.coeff).sum())
    if T.dim == 0:
        return abs(float(T.coeff.sum())) <= tol * scale
    bd = boundary(T)
    return bd.is_zero() or float(np.abs(bd.coeff).max()) <= tol * scale


def _farkas(T: Chain, dom: GridDomain) -> np.ndarray:
    """Certificate ``y`` with ``B_{m+1}^T y = 0`` and ``T.y > 0``."""
    Td = T.rebase(dom).dense()
    if T.dim == 0:
        return np.ones_like(Td)
    return dom.boundary_matrix(T.dim).T @ (dom.boundary_matrix(T.dim) @ Td)


def fill_volume(T: Chain, tol: float = 1e-9, margin: int | None = 0, backend: str = "highs", density=None) -> Filling:
    """Minimal mass of a filling ``S`` with ``dS = T``; ``+inf`` when none exists.

    With ``density`` the objective is the density-weighted mass and the LP runs
    on the full domain unless ``margin`` is given explicitly.
    """
    m = T.dim
    if m > T.domain.n - 1:
        raise ValueError("filling needs dim <= n-1")
    if T.is_zero():
        return Filling(0.0, Chain.zero(T.domain, m + 1), 0.0, 0.0, 0.0)
    dom = _work_domain(T, margin if density is None else (margin if margin else None))
    if not is_fillable(T):
        y = _farkas(T, dom)
        return Filling(math.inf, None, math.inf, math.inf, 0.0, certificate=y)
    B = dom.boundary_matrix(m + 1).tocsr()
    b = T.rebase(dom).dense()
    w = cell_weights(dom, m + 1, _restrict_density(density, T.domain, dom))
    A = sp.hstack([B, -B]).tocsr()
    res = solve_lp(np.concatenate([w, w]), A, b, backend=backend, tol=tol * 1e-1)
    nv = B.shape[1]
    x = res.x[:nv] - res.x[nv:]
    x[np.abs(x) <= 1e-13 * (1 + np.abs(x).max(initial=0))] = 0.0
    S_local = Chain.from_dense(dom, m + 1, x)
    residual = float(np.abs(B @ x - b).max(initial=0.0))
    value = float(np.abs(x) @ w)
    dual = _dual_bound(b, res.y, [(B, w)])
    S = S_local.rebase(T.domain) if dom != T.domain else S_local
    return Filling(value, S, residual, dual, value - dual)


def flat_norm(T: Chain, tol: float = 1e-9, margin: int | None = 0, backend: str = "highs", h_density=None, g_density=None) -> FlatDecomposition:
    """Flat norm ``min mass(R) + mass(V)`` over ``T = R + dV`` with certificate.

    ``R`` is recomputed as ``T - dV`` from the solver's ``V`` so the
    decomposition is exact; the value reported is that of this exact
    decomposition and is therefore a true upper bound.
    """
    m = T.dim
    if m > T.domain.n - 1:
        raise ValueError("flat norm needs dim <= n-1")
    if T.is_zero():
        z = Chain.zero(T.domain, m)
        return FlatDecomposition(0.0, z, Chain.zero(T.domain, m + 1), 0.0, 0.0, 0.0)
    weighted = h_density is not None or g_density is not None
    dom = _work_domain(T, margin if not weighted else (margin if margin else None))
    B = dom.boundary_matrix(m + 1).tocsr()
    b = T.rebase(dom).dense()
    wR = cell_weights(dom, m, _restrict_density(h_density, T.domain, dom))
    wV = cell_weights(dom, m + 1, _restrict_density(g_density, T.domain, dom))
    nR, nV = B.shape
    I = sp.identity(nR, format="csr")
    A = sp.hstack([I, -I, B, -B]).tocsr()
    c = np.concatenate([wR, wR, wV, wV])
    res = solve_lp(c, A, b, backend=backend, tol=tol * 1e-1)
    v = res.x[2 * nR : 2 * nR + nV] - res.x[2 * nR + nV :]
    v[np.abs(v) <= 1e-13 * (1 + np.abs(v).max(initial=0))] = 0.0
    r = b - B @ v
    r[np.abs(r) <= 1e-13 * (1 + np.abs(b).max(initial=0))] = 0.0
    value = float(np.abs(r) @ wR + np.abs(v) @ wV)
    R = Chain.from_dense(dom, m, r)
    V = Chain.from_dense(dom, m + 1, v)
    residual = float(np.abs(r + B @ v - b).max(initial=0.0))
    dual = _dual_bound(b, res.y, [(None, wR), (B, wV)])
    if dom != T.domain:
        R, V = R.rebase(T.domain), V.rebase(T.domain)
    return FlatDecomposition(value, R, V, residual, dual, value - dual)


def weighted_flat_norm(T: Chain, h_density, g_density, tol: float = 1e-9, margin: int | None = None, backend: str = "highs") -> float:
    """``min int h d||R|| + int g d||V||`` over ``T = R + dV`` (densities on n-cells)."""
    if T.is_zero():
        return 0.0
    return flat_norm(T, tol, margin, backend, h_density=h_density, g_density=g_density).value


def fillvol_equals_flat_check(T: Chain, tol: float = 1e-8, margin: int | None = 0, backend: str = "highs", filling: Filling | None = None) -> dict:
    """Check ``Fillvol(T) = F(T)`` for a cycle whose filling volume is at most its mass.

    A previously computed ``filling`` of ``T`` may be passed to skip that solve.
    """
    if T.dim >= 1 and not boundary(T).is_zero():
        raise ValueError("expected a cycle")
    fv = filling if filling is not None else fill_volume(T, tol, margin, backend)
    ms = mass(T)
    if not fv.value <= ms + tol * (1 + ms):
        return {"status": "hypothesis-not-met", "fillvol": fv.value, "mass": ms, "flat": None, "difference": None, "pass": True}
    fl = flat_norm(T, tol, margin, backend)
    diff = abs(fv.value - fl.value)
    ok = diff <= tol * (1 + fv.value)
    return {"status": "equal" if ok else "unequal", "fillvol": fv.value, "mass": ms, "flat": fl.value, "difference": diff, "pass": ok}
