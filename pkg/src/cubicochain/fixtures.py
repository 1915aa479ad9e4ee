"""Standard chains: cube boundaries, lattice spheres, segments, and the
multi-scale current whose fillings have zero capacity."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .grid import Chain, GridDomain, boundary, dyadic_scale, mass, sum_chains


def solid_cube(domain: GridDomain, dim: int, side: int = 1, corner=None, axes=None) -> Chain:
    """All ``dim``-cells of the cube ``corner + [0, side]^axes`` with coefficient 1."""
    axes = tuple(range(dim)) if axes is None else tuple(sorted(axes))
    if len(axes) != dim:
        raise ValueError("need exactly dim axes")
    corner = np.zeros(domain.n, dtype=np.int64) if corner is None else np.asarray(corner, dtype=np.int64)
    offs = np.array(list(itertools.product(range(side), repeat=dim)), dtype=np.int64).reshape(-1, dim)
    bases = np.repeat(corner[None, :], len(offs), axis=0)
    bases[:, list(axes)] += offs
    block = domain.block_index(dim, axes)
    return Chain.from_arrays(domain, dim, np.full(len(bases), block), bases, np.ones(len(bases)))


def cube_boundary_cycle(domain: GridDomain, m: int, side: int = 1, corner=None, axes=None) -> Chain:
    """Boundary of the (m+1)-cube of lattice side ``side``: an m-cycle of mass ``2(m+1) (side h)^m``."""
    return boundary(solid_cube(domain, m + 1, side, corner, axes))


def square_cycle(domain: GridDomain, corner, side: int, axes=(0, 1)) -> Chain:
    return cube_boundary_cycle(domain, 1, side, corner, axes)


def segment(domain: GridDomain, start, length: int, axis: int = 0) -> Chain:
    """Straight 1-chain of ``length`` unit edges from ``start`` along ``axis``."""
    start = np.asarray(start, dtype=np.int64)
    bases = np.repeat(start[None, :], length, axis=0)
    bases[:, axis] += np.arange(length)
    return Chain.from_arrays(domain, 1, np.full(length, axis), bases, np.ones(length))


def sphere_like_cycle(domain: GridDomain, m: int, radius: float, center=None, axes=None) -> Chain:
    """Lattice m-sphere: boundary of the union of (m+1)-cells, in the coordinate
    plane through ``center`` spanned by ``axes``, whose barycenters lie within
    ``radius`` (physical units) of ``center`` (physical point)."""
    axes = tuple(range(m + 1)) if axes is None else tuple(sorted(axes))
    h = domain.h
    center = np.zeros(domain.n) if center is None else np.asarray(center, dtype=np.float64)
    k = int(math.ceil(radius / h)) + 1
    c_lat = np.floor(center / h).astype(np.int64)
    offs = np.array(list(itertools.product(range(-k, k + 1), repeat=m + 1)), dtype=np.int64)
    bases = np.repeat(c_lat[None, :], len(offs), axis=0)
    for t, a in enumerate(axes):
        bases[:, a] += offs[:, t]
    off_plane = [a for a in range(domain.n) if a not in axes]
    bases[:, off_plane] = np.round(center[off_plane] / h).astype(np.int64)
    bary = bases * h
    bary[:, list(axes)] += 0.5 * h
    inside = np.linalg.norm(bary - center, axis=1) <= radius
    bases = bases[inside]
    if len(bases) == 0:
        raise ValueError("radius too small for the lattice")
    block = domain.block_index(m + 1, axes)
    disk = Chain.from_arrays(domain, m + 1, np.full(len(bases), block), bases, np.ones(len(bases)))
    return boundary(disk)


# ---------------------------------------------------------------------------
# multi-scale current with zero capacity
# ---------------------------------------------------------------------------


def zerocap_counts(j: int, alpha: float, m: int) -> tuple[int, int]:
    """``(N_j, M_j)``: multiplicity ``floor(r_j^(alpha-m))`` and block count
    ``floor(j^-2 r_j^-alpha)`` at scale ``r_j = 2^-j``."""
    n_j = math.floor(2.0 ** (j * (m - alpha)) * (1 + 1e-15))
    m_j = math.floor(2.0 ** (j * alpha) / j**2 * (1 + 1e-15))
    return n_j, m_j


@dataclass(frozen=True)
class ZerocapReference:
    """Reference block: boundary of ``[-1, 1]^(m+1) x {0}`` at ``s`` cells per unit."""

    domain: GridDomain
    T: Chain
    s: int
    m: int

    @property
    def unit_mass(self) -> float:
        return mass(self.T)


def zerocap_reference(n: int, m: int, s: int = 4, pad: int = 3) -> ZerocapReference:
    if not 0 <= m <= n - 1:
        raise ValueError("need 0 <= m <= n-1")
    dom = GridDomain(n, 1.0 / s, (-pad * s,) * n, (pad * s,) * n)
    corner = np.zeros(n, dtype=np.int64)
    corner[: m + 1] = -s
    T = cube_boundary_cycle(dom, m, side=2 * s, corner=corner)
    return ZerocapReference(dom, T, s, m)


def zerocap_cube_mass(m: int) -> float:
    """Mass of the boundary of ``[-1,1]^(m+1)``: the cubical constant of the mass bound."""
    return 2.0 * (m + 1) * 2.0**m


def zerocap_anchor(j: int, k: int, n: int, spacing: int = 4) -> np.ndarray:
    """Physical centre ``x_j^k = spacing (j, k, 0, ..)`` of block ``k`` at level ``j``."""
    x = np.zeros(n)
    x[0], x[1] = spacing * j, spacing * k
    return x


def zerocap_domain(J: int, alpha: float, m: int, n: int, s: int = 4, spacing: int = 4) -> GridDomain:
    """Box of spacing ``2^-J / s`` holding every block up to level ``J``."""
    scale = s * 2**J
    m_max = max([zerocap_counts(j, alpha, m)[1] for j in range(1, J + 1)] + [1])
    lo = [0, 0] + [-1] * (n - 2)
    hi = [spacing * (J + 1), spacing * (m_max + 1)] + [1] * (n - 2)
    return GridDomain(n, 1.0 / scale, tuple(v * scale for v in lo), tuple(v * scale for v in hi))


def zerocap_blocks(J: int, alpha: float, m: int, n: int, ref_chain: Chain, s: int = 4, spacing: int = 4, target=None) -> Chain:
    """``sum_j sum_k N_j F^{j,k}_# C`` for a reference chain ``C`` on the
    reference grid (``F^{j,k}(x) = x_j^k + 2^-j x``)."""
    target = zerocap_domain(J, alpha, m, n, s, spacing) if target is None else target
    scale = s * 2**J
    parts = []
    for j in range(1, J + 1):
        n_j, m_j = zerocap_counts(j, alpha, m)
        for k in range(1, m_j + 1):
            anchor = np.rint(zerocap_anchor(j, k, n, spacing) * scale).astype(np.int64)
            parts.append(dyadic_scale(ref_chain, j, anchor, target) * n_j)
    if not parts:
        return Chain.zero(target, ref_chain.dim)
    return sum_chains(parts)


def zerocap_current(J: int, alpha: float, m: int, n: int | None = None, s: int = 4, spacing: int = 4) -> Chain:
    """Truncation at level ``J`` of ``sum_j sum_k N_j F^{j,k}_# T_0``.

    ``T_0`` is the boundary of the cube ``[-1,1]^(m+1)``, ``F^{j,k}(x) = x_j^k + 2^-j x``
    with centres ``spacing (j, k, 0, ..)``.  The result lives on a grid of spacing
    ``2^-J / s``.  ``J = 0`` gives the zero chain.
    """
    n = m + 2 if n is None else n
    if n < 2:
        raise ValueError("need n >= 2")
    if not 0 <= alpha <= m <= n - 1:
        raise ValueError("need 0 <= alpha <= m <= n-1")
    ref = zerocap_reference(n, m, s)
    return zerocap_blocks(J, alpha, m, n, ref.T, s, spacing)
