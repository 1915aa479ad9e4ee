"""p-modulus of finite chain families, capacity bounds, annuli densities and
mass-growth profiles.

Densities are piecewise constant on n-cells.  An m-cell sees the mean of the
density over its incident n-cells that exist in the domain, so a constant
density pairs with a chain to give constant times mass.

For ``p > 1`` the modulus is computed from its concave dual
``D(lam) = sum(lam) - (p-1) sum mu f^p`` with ``f = (s / (p mu))^(1/(p-1))``,
``s = sum_T lam_T sigma_T``, by projected Newton ascent (for ``p = 2`` this is
the active-set method for the quadratic program).  The returned density is
rescaled to be exactly admissible, so ``value`` is attained and ``D(lam)`` is a
certified lower bound.  ``p = 1`` is solved as a linear program.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from . import _kernels
from .grid import Chain, GridDomain, boundary, mass, mass_vector


@dataclass
class Density:
    """Nonnegative function on the n-cells of a domain."""

    domain: GridDomain
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(self.domain.cell_shape)
        if np.any(self.values < 0) or np.any(np.isnan(self.values)):
            raise ValueError("density values must be nonnegative")

    @classmethod
    def constant(cls, domain: GridDomain, c: float = 1.0) -> "Density":
        return cls(domain, np.full(domain.cell_shape, float(c)))

    @classmethod
    def zeros(cls, domain: GridDomain) -> "Density":
        return cls(domain, np.zeros(domain.cell_shape))

    def energy(self, p: float, mu=None) -> float:
        return energy(self, p, mu)

    def norm(self, p: float, mu=None) -> float:
        return energy(self, p, mu) ** (1.0 / p)

    def __add__(self, other: "Density") -> "Density":
        return Density(self.domain, self.values + _values(other, self.domain))

    def __mul__(self, c: float) -> "Density":
        return Density(self.domain, self.values * float(c))

    __rmul__ = __mul__


def _values(f, domain: GridDomain) -> np.ndarray:
    if isinstance(f, Density):
        if f.domain != domain:
            raise ValueError("domain mismatch")
        return f.values
    f = np.asarray(f, dtype=np.float64)
    if f.ndim == 0:
        return np.full(domain.cell_shape, float(f))
    if f.size != math.prod(domain.cell_shape):
        raise ValueError("domain mismatch")
    return f.reshape(domain.cell_shape)


def measure_weights(domain: GridDomain, mu=None) -> np.ndarray:
    """Flat array of n-cell weights; default ``h^n`` per cell.

    A :class:`Density` is read as a density against Lebesgue measure (weight
    ``value * h^n``); a plain array or scalar gives the per-cell weights directly.
    """
    if mu is None:
        return np.full(math.prod(domain.cell_shape), domain.h**domain.n)
    if isinstance(mu, Density):
        mu = _values(mu, domain) * domain.h**domain.n
    mu = np.asarray(mu, dtype=np.float64)
    if mu.ndim == 0:
        return np.full(math.prod(domain.cell_shape), float(mu))
    mu = mu.ravel()
    if mu.size != math.prod(domain.cell_shape) or np.any(mu <= 0):
        raise ValueError("measure weights must be positive, one per n-cell")
    return mu


def energy(f, p: float, mu=None) -> float:
    """``sum mu f^p`` (the p-th power of the L^p norm)."""
    dom = f.domain
    v = f.values.ravel()
    return float(measure_weights(dom, mu) @ v**p)


def lp_norm(f, p: float, mu=None, mask=None) -> float:
    dom = f.domain
    v = f.values.ravel() ** p * measure_weights(dom, mu)
    if mask is not None:
        v = v[np.asarray(mask, dtype=bool).ravel()]
    return float(v.sum()) ** (1.0 / p)


def line_integral(f, T: Chain) -> float:
    """``int f d||T||``: cell masses against the incident-mean of ``f``."""
    if isinstance(f, Density) and f.domain != T.domain:
        raise ValueError("domain mismatch")
    if T.is_zero():
        return 0.0
    vals = _values(f, T.domain)
    block_ids, bases = T.cells()
    rel = bases - np.asarray(T.domain.lo)
    masks = T.domain.axes_masks(T.dim)[block_ids]
    fbar = _kernels.incident_mean(vals, rel, masks)
    return float(mass_vector(T) @ fbar)


def incidence(T: Chain) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Triples ``(support position, flat n-cell, weight)`` with weights ``1/count``."""
    dom = T.domain
    block_ids, bases = T.cells()
    rel = bases - np.asarray(dom.lo)
    masks = dom.axes_masks(T.dim)[block_ids]
    shape = np.asarray(dom.cell_shape)
    rows, cols = [], []
    for pat in range(1 << dom.n):
        d = -np.array([(pat >> j) & 1 for j in range(dom.n)], dtype=np.int64)
        ok = ~np.any((d != 0)[None, :] & masks, axis=1)
        pos = rel + d
        ok &= np.all((pos >= 0) & (pos < shape), axis=1)
        rows.append(np.flatnonzero(ok))
        cols.append(np.ravel_multi_index(tuple(pos[ok].T), dom.cell_shape))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    count = np.bincount(rows, minlength=len(T))
    return rows, cols, 1.0 / count[rows]


def pairing_matrix(family: Sequence[Chain], domain: GridDomain) -> sp.csr_matrix:
    """Rows ``sigma_T`` with ``sigma_T . f = line_integral(f, T)``."""
    data, rr, cc = [], [], []
    for k, T in enumerate(family):
        if T.domain != domain:
            raise ValueError("domain mismatch")
        if T.is_zero():
            continue
        rows, cols, w = incidence(T)
        data.append(mass_vector(T)[rows] * w)
        cc.append(cols)
        rr.append(np.full(len(rows), k))
    ncell = math.prod(domain.cell_shape)
    if not data:
        return sp.csr_matrix((len(family), ncell))
    mat = sp.csr_matrix((np.concatenate(data), (np.concatenate(rr), np.concatenate(cc))), shape=(len(family), ncell))
    mat.sum_duplicates()
    return mat


@dataclass
class ModulusSolution:
    value: float
    density: Density | None
    duals: np.ndarray
    kkt_residual: float
    lower_bound: float
    iterations: int = 0
    pairings: np.ndarray = field(default=None, repr=False)

    @property
    def gap(self) -> float:
        return self.value - self.lower_bound


class ModulusError(RuntimeError):
    def __init__(self, msg: str, lower: float, upper: float):
        super().__init__(f"{msg} (bracket [{lower:.6g}, {upper:.6g}])")
        self.lower = lower
        self.upper = upper


def modulus(family: Sequence[Chain], p: float, mu=None, tol: float = 1e-10, max_iter: int = 500, domain: GridDomain | None = None) -> ModulusSolution:
    """``inf sum mu f^p`` over ``f >= 0`` with ``line_integral(f, T) >= 1`` for all ``T``."""
    if p < 1:
        raise ValueError("modulus needs p >= 1")
    family = list(family)
    if domain is None:
        if not family:
            raise ValueError("empty family needs an explicit domain")
        domain = family[0].domain
    if not family:
        return ModulusSolution(0.0, Density.zeros(domain), np.zeros(0), 0.0, 0.0)
    if any(T.is_zero() for T in family):
        return ModulusSolution(math.inf, None, np.zeros(len(family)), 0.0, math.inf)
    Sig = pairing_matrix(family, domain)
    mu_all = measure_weights(domain, mu)
    active = np.flatnonzero(np.asarray(Sig.getnnz(axis=0)) > 0)
    Sa = Sig[:, active].tocsr()
    mua = mu_all[active]
    if p == 1:
        fa, lam, value, lower, it = _solve_lp1(Sa, mua)
    else:
        fa, lam, value, lower, it = _solve_newton(Sa, mua, p, tol, max_iter)
    f = np.zeros(mu_all.size)
    f[active] = fa
    pair = Sa @ fa
    infeas = float(np.maximum(1.0 - pair, 0.0).max(initial=0.0))
    comp = float(np.max(lam * np.abs(pair - 1.0), initial=0.0)) / max(float(lam.sum()), 1e-300)
    rel_gap = max(value - lower, 0.0) / max(abs(value), 1e-300)
    kkt = max(infeas, comp, rel_gap)
    return ModulusSolution(value, Density(domain, f), lam, kkt, lower, it, pair)


def _solve_lp1(Sa, mua):
    res = linprog(mua, A_ub=-Sa, b_ub=-np.ones(Sa.shape[0]), bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise ModulusError(f"p=1 LP failed: {res.message}", 0.0, math.inf)
    f = res.x
    pair = Sa @ f
    f = f / min(1.0, float(pair.min()))
    lam = np.maximum(-np.asarray(res.ineqlin.marginals), 0.0)
    s = max(1.0, float(np.max((Sa.T @ lam) / mua, initial=0.0)))
    lower = float(lam.sum()) / s
    return f, lam, float(mua @ f), lower, int(res.nit)


def _solve_newton(Sa, mua, p, tol, max_iter):
    q = 1.0 / (p - 1.0)
    K = Sa.shape[0]
    St = Sa.T.tocsr()

    def primal(lam):
        s = St @ lam
        return s, (np.maximum(s, 0.0) / (p * mua)) ** q

    def dual(lam):
        _, f = primal(lam)
        return float(lam.sum() - (p - 1.0) * (mua @ f**p))

    # start from each member's one-constraint multiplier, shared evenly
    row_sum = np.asarray(Sa.power(1.0 + q) @ ((p * mua) ** -q)).ravel()
    lam = row_sum ** (-1.0 / q) / K
    it = 0
    best = None
    for it in range(1, max_iter + 1):
        s, f = primal(lam)
        g = 1.0 - Sa @ f
        Dl = float(lam.sum() - (p - 1.0) * (mua @ f**p))
        fs, val = _admissible(Sa, mua, f, p)
        if best is None or val - Dl < best[2] - best[3]:
            best = (fs, lam.copy(), val, Dl)
        pg = np.where(lam > 0, g, np.maximum(g, 0.0))
        comp = float(np.max(lam * np.abs(g))) / max(float(lam.sum()), 1e-300)
        if max(float(np.abs(pg).max()), comp, (val - Dl) / max(val, 1e-300)) <= tol:
            break
        w = np.zeros_like(s)
        pos = s > 0
        w[pos] = q * f[pos] / s[pos]
        H = (Sa.multiply(w[None, :]) @ St).toarray()
        fixed = (lam <= 1e-14 * max(float(lam.max()), 1e-300)) & (g < 0)
        free = ~fixed
        d = np.zeros(K)
        Hf = H[np.ix_(free, free)]
        reg = 1e-13 * max(float(np.trace(Hf)) / max(Hf.shape[0], 1), 1e-300)
        try:
            d[free] = np.linalg.solve(Hf + reg * np.eye(Hf.shape[0]), g[free])
        except np.linalg.LinAlgError:
            d[free] = g[free]
        t = 1.0
        moved = False
        while t > 1e-16:
            new = np.maximum(lam + t * d, 0.0)
            if dual(new) >= Dl + 1e-4 * float(g @ (new - lam)) and np.any(new != lam):
                lam = new
                moved = True
                break
            t *= 0.5
        if not moved:
            break
    fs, lam_b, val, Dl = best
    return fs, lam_b, val, Dl, it


def _admissible(Sa, mua, f, p):
    pair = Sa @ f
    lo = float(pair.min())
    if lo <= 0:
        return f, math.inf
    fs = f / lo
    return fs, float(mua @ fs**p)


def modulus_single_closed_form(T: Chain, p: float, mu=None) -> tuple[float, Density | None]:
    """Exact one-constraint modulus ``(sum sigma^(p/(p-1)) mu^(-1/(p-1)))^(1-p)``."""
    if p < 1:
        raise ValueError("need p >= 1")
    if T.is_zero():
        return math.inf, None
    dom = T.domain
    sig = np.asarray(pairing_matrix([T], dom).todense()).ravel()
    mu_all = measure_weights(dom, mu)
    f = np.zeros_like(sig)
    pos = sig > 0
    if p == 1:
        ratio = np.where(pos, sig / mu_all, 0.0)
        k = int(np.argmax(ratio))
        f[k] = 1.0 / sig[k]
        return float(mu_all[k] / sig[k]), Density(dom, f)
    q = 1.0 / (p - 1.0)
    total = float(np.sum(sig[pos] ** (p * q) * mu_all[pos] ** (-q)))
    f[pos] = (sig[pos] / mu_all[pos]) ** q
    f /= float(sig @ f)
    return total ** (1.0 - p), Density(dom, f)


def capacity_lower(Lambda: Sequence[Chain], fillings: Sequence[Chain], p: float, mu=None, tol: float = 1e-10, domain: GridDomain | None = None) -> ModulusSolution:
    """Modulus of a finite filling subfamily: a lower bound for the capacity of ``Lambda``."""
    Lambda = list(Lambda)
    for k, S in enumerate(fillings):
        bd = boundary(S)
        if not any(bd.domain == L.domain and bd.dim == L.dim and np.array_equal(bd.idx, L.idx) and np.array_equal(bd.coeff, L.coeff) for L in Lambda):
            raise ValueError(f"filling {k} has boundary outside the given family")
    if domain is None:
        domain = fillings[0].domain if fillings else (Lambda[0].domain if Lambda else None)
    return modulus(list(fillings), p, mu, tol, domain=domain)


def capacity_upper_certificate(f, fillings: Sequence[Chain], p: float, mu=None) -> tuple[float, float]:
    """``(energy(f), min over fillings of line_integral(f, S))``."""
    e = energy(f, p, mu)
    pairs = [line_integral(f, S) for S in fillings]
    return e, (min(pairs) if pairs else math.inf)


# ---------------------------------------------------------------------------
# annuli densities
# ---------------------------------------------------------------------------


@dataclass
class AnnuliDensity:
    density: Density
    layers: list
    radii: list
    distance: np.ndarray
    outer_radius: float

    def layer_energy(self, p: float, mu=None) -> list:
        return [energy(Density(self.density.domain, L), p, mu) for L in self.layers]


def _set_boxes(A, domain: GridDomain) -> np.ndarray:
    """Closed lattice boxes ``(lo, hi)`` of the cells making up ``A``."""
    if isinstance(A, Chain):
        if A.is_zero():
            raise ValueError("A must be nonempty")
        block_ids, bases = A.cells()
        tops = bases + domain.axes_masks(A.dim)[block_ids]
        return np.stack([bases, tops], axis=1)
    mask = np.asarray(A, dtype=bool).reshape(domain.cell_shape)
    pos = np.argwhere(mask)
    if len(pos) == 0:
        raise ValueError("A must be nonempty")
    lo = pos + np.asarray(domain.lo)
    return np.stack([lo, lo + 1], axis=1)


def sup_distance_to_set(domain: GridDomain, A) -> np.ndarray:
    """Max-norm distance (physical) from each n-cell to the union of the closed cells of ``A``."""
    boxes = _set_boxes(A, domain)
    grids = np.meshgrid(*[np.arange(a, b) for a, b in zip(domain.lo, domain.hi)], indexing="ij")
    best = np.full(domain.cell_shape, np.iinfo(np.int64).max, dtype=np.int64)
    for lo, hi in boxes:
        gap = np.zeros(domain.cell_shape, dtype=np.int64)
        for j, g in enumerate(grids):
            gap = np.maximum(gap, np.maximum(np.maximum(lo[j] - (g + 1), g - hi[j]), 0))
        np.minimum(best, gap, out=best)
    return best * domain.h


def annuli_density(A, levels: int, p: float, radius: float | None = None, mu=None, domain: GridDomain | None = None) -> AnnuliDensity:
    """Average of ``levels`` disjoint dyadic max-norm annuli densities around ``A``.

    Layer k is ``1/r_k`` on cells at max-norm distance in ``[r_k, 2 r_k)`` from
    ``A``, with ``r_k = R 2^-k``.  Each layer pairs to at least 1 with every
    1-chain from ``A`` to distance ``R``, so their mean is admissible; by
    disjointness its energy is ``levels^-p`` times the sum of layer energies.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if domain is None:
        if not isinstance(A, Chain):
            raise ValueError("pass the domain when A is a cell mask")
        domain = A.domain
    h = domain.h
    boxes = _set_boxes(A, domain)
    k_lo = boxes[:, 0].min(axis=0)
    k_hi = boxes[:, 1].max(axis=0)
    room = int(min(np.min(k_lo - np.asarray(domain.lo)), np.min(np.asarray(domain.hi) - k_hi)))
    unit = 2**levels
    if radius is None:
        k = room // unit
        if k < 1:
            raise ValueError("insufficient room for the annuli")
        R_lat = k * unit
    else:
        R_lat = radius / h
        if abs(R_lat - round(R_lat)) > 1e-9 or round(R_lat) % unit:
            raise ValueError(f"radius must be a multiple of 2^levels h = {unit * h}")
        R_lat = int(round(R_lat))
        if R_lat > room:
            raise ValueError("insufficient room for the annuli")
    dist = sup_distance_to_set(domain, A)
    layers, radii = [], []
    total = np.zeros(domain.cell_shape)
    for k in range(1, levels + 1):
        r = R_lat * h / 2**k
        ring = (dist >= r - 1e-12 * h) & (dist < 2 * r - 1e-12 * h)
        L = np.where(ring, 1.0 / r, 0.0)
        if np.any((total > 0) & ring):
            raise AssertionError("annuli layers overlap")
        total += L
        layers.append(L)
        radii.append(r)
    return AnnuliDensity(Density(domain, total / levels), layers, radii, dist, R_lat * h)


# ---------------------------------------------------------------------------
# growth profile
# ---------------------------------------------------------------------------


@dataclass
class GrowthProfile:
    radii: np.ndarray
    ratio: np.ndarray  # LHS(r) / mass(T)
    A: float
    alpha: float
    residual: float


def growth_lhs(T: Chain, p: float, radii) -> np.ndarray:
    """``sum_c ||T||(B(bary_c, r))^(1/(p-1)) ||T||(c)`` for each radius."""
    pts = T.barycenters()
    w = mass_vector(T)
    balls = _kernels.ball_mass(pts, w, pts, np.asarray(radii, dtype=np.float64))
    return (balls ** (1.0 / (p - 1.0))) @ w


def growth_profile(T: Chain, p: float, radii) -> GrowthProfile:
    """Least-squares fit of ``log(LHS/M) = log(A)/(p-1) + alpha log(r)/(p-1)``."""
    if p <= 1:
        raise ValueError("growth profile needs p > 1")
    M = mass(T)
    if M == 0:
        raise ValueError("mass(T) = 0")
    radii = np.asarray(radii, dtype=np.float64)
    if np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be positive and increasing")
    ratio = growth_lhs(T, p, radii) / M
    x = np.log(radii)
    y = np.log(ratio)
    if len(radii) >= 2:
        slope, icpt = np.polyfit(x, y, 1)
        resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    else:
        slope, icpt, resid = 0.0, float(y[0]), 0.0
    return GrowthProfile(radii, ratio, float(np.exp(icpt * (p - 1.0))), float(slope * (p - 1.0)), resid)


def max_ball_mass(T: Chain, radii, centers=None) -> np.ndarray:
    """``max_x ||T||(B(x, r))`` over centers (default: support barycenters)."""
    pts = T.barycenters()
    centers = pts if centers is None else np.asarray(centers, dtype=np.float64)
    balls = _kernels.ball_mass(pts, mass_vector(T), centers, np.asarray(radii, dtype=np.float64))
    return balls.max(axis=1)
