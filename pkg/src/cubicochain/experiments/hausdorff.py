"""Annuli densities and the modulus of paths leaving a small set.

Around a compact cell set ``A`` the mean ``rho^l`` of ``l`` disjoint dyadic
max-norm annuli densities pairs to at least 1 with every lattice path from
``A`` to distance ``R`` and has energy at most ``l^(1-p)`` times that of a
single annulus when ``p <= n``.  The modulus of the crossing family is thus at
most ``l^(1-p) C``, which tends to 0 as ``l`` grows when ``p > 1``.
"""

from __future__ import annotations

import numpy as np

from ..grid import Chain, GridDomain, chain_from_lattice_path, loop_erase
from ..modulus import annuli_density, energy, line_integral
from .config import ExperimentConfig, HypothesisError
from .report import ExperimentReport

COLUMNS = ["p", "levels", "energy", "bound", "ratio", "bound_ok", "min_pairing", "admissible"]

DEFAULTS = {"n": 3, "box": 34, "h": 1.0 / 16, "levels": 4, "radius_cells": 16, "paths": 500, "ps": [1.5, 2.0, 3.0], "set": "point", "tol": 1e-6}


def crossing_paths(domain: GridDomain, start, radius_cells: int, count: int, rng) -> list:
    """Loop-erased lattice random walks from ``start`` until max-norm distance ``radius_cells``."""
    start = np.asarray(start, dtype=np.int64)
    n = domain.n
    steps = np.vstack([np.eye(n, dtype=np.int64), -np.eye(n, dtype=np.int64)])
    out = []
    for _ in range(count):
        pos = start.copy()
        path = [pos.copy()]
        while np.abs(pos - start).max() < radius_cells:
            pos = pos + steps[rng.integers(0, 2 * n)]
            path.append(pos.copy())
        out.append(loop_erase(np.array(path)))
    return out


def run_hausdorff_cap(cfg: ExperimentConfig) -> ExperimentReport:
    cfg = cfg.with_defaults(DEFAULTS)
    n = int(cfg.n)
    box = int(cfg.box)
    h = float(cfg.h)
    L = int(cfg.levels)
    Rc = int(cfg.get("radius_cells"))
    ps = [float(v) for v in (cfg.get("ps") if cfg.p is None else [cfg.p])]
    if any(p < 1 for p in ps):
        raise HypothesisError("need p >= 1")
    dom = GridDomain(n, h, (0,) * n, (box,) * n)
    c = np.full(n, box // 2, dtype=np.int64)
    kind = cfg.get("set")
    if kind == "point":
        A = Chain.vertex(dom, c)
        start = c
    elif kind == "segment":
        A = Chain.from_cells(dom, 1, [(c, (0,), 1.0)])
        start = c
    else:
        raise HypothesisError(f"unknown set {kind!r}")
    if Rc + 1 > box // 2:
        raise HypothesisError("insufficient room for the crossing radius")
    rng = np.random.default_rng(cfg.seed)
    paths = [chain_from_lattice_path(dom, pth) for pth in crossing_paths(dom, start, Rc, int(cfg.get("paths")), rng)]

    rep = ExperimentReport("hausdorff_cap", COLUMNS)
    densities = [annuli_density(A, l, 2.0, radius=Rc * h) for l in range(1, L + 1)]
    pairings = [min(line_integral(d.density, P) for P in paths) for d in densities]
    for p in ps:
        e1 = energy(densities[0].density, p)
        for l, d in enumerate(densities, start=1):
            e = energy(d.density, p)
            bound = l ** (1 - p) * e1
            ok = e <= bound * (1 + cfg.tol)
            rep.add(p=p, levels=l, energy=e, bound=bound, ratio=e / bound, bound_ok=bool(ok),
                    min_pairing=pairings[l - 1], admissible=bool(pairings[l - 1] >= 1 - cfg.tol))
    rep.fitted = {f"energy_1_p{p:g}": energy(densities[0].density, p) for p in ps}
    rep.slopes = {}
    rep.residuals = {}
    decay = {}
    for p in ps:
        es = [r["energy"] for r in rep.rows if r["p"] == p]
        decay[f"p{p:g}"] = es[-1] / es[0]
    rep.verdicts = {
        "energy_decay_bound": all(r["bound_ok"] for r in rep.rows),
        "annuli_admissible": all(r["admissible"] for r in rep.rows),
    }
    rep.diagnostics = {"modulus_upper_bound_ratio_last_to_first": decay, "paths": len(paths), "radius": Rc * h}
    return rep
