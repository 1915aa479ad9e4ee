"""Helpers shared by the experiment runners."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..cochains import DiscreteForm
from ..grid import Chain, GridDomain, mass
from ..modulus import growth_lhs


def bump(points: np.ndarray, center, radius: float) -> np.ndarray:
    """Smooth bump ``exp(1 - 1/(1 - |x-c|^2/R^2))`` with peak 1, zero outside ``B(c, R)``."""
    t = ((np.asarray(points) - np.asarray(center)) ** 2).sum(axis=-1) / radius**2
    out = np.zeros(t.shape)
    inside = t < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside]))
    return out


def bump_form(domain: GridDomain, center, radius: float, axis: int = 0) -> DiscreteForm:
    """1-form ``psi dx_axis`` with ``psi`` a smooth bump."""
    return DiscreteForm.from_function(domain, 1, lambda b, m: bump(b, center, radius) * m[:, axis])


def neighborhood_mask(T: Chain, s: float) -> np.ndarray:
    """n-cells whose barycenter lies within ``s`` of a barycenter of ``spt T``."""
    dom = T.domain
    tree = cKDTree(T.barycenters())
    grids = np.meshgrid(*[(np.arange(a, b) + 0.5) * dom.h for a, b in zip(dom.lo, dom.hi)], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    d, _ = tree.query(pts, k=1)
    return (d <= s).reshape(dom.cell_shape)


def growth_constant(T: Chain, p: float, alpha: float, radii) -> float:
    """Smallest ``A`` with ``LHS(r) <= A^(1/(p-1)) r^(alpha/(p-1)) M(T)`` on ``radii``."""
    lhs = growth_lhs(T, p, radii)
    ratio = lhs / (mass(T) * np.asarray(radii) ** (alpha / (p - 1)))
    return float(ratio.max() ** (p - 1))


def dyadic_radii(h: float, diameter: float) -> np.ndarray:
    """``h, 2h, 4h, ...`` up to and including the first value ``>= diameter``."""
    out = [h]
    while out[-1] < diameter:
        out.append(out[-1] * 2)
    return np.array(out)


def support_diameter(T: Chain) -> float:
    lo, hi = T.bbox()
    return float(np.linalg.norm((hi - lo) * T.domain.h))
