"""Positive capacity for a cycle with growth exponent ``alpha`` when ``p > n - alpha``.

The filling family consists of an LP-optimal filling ``V`` of ``T`` and the
composites ``S_x = tau_x V - P_x`` where ``P_x`` is the prism joining ``T`` to
its translate ``tau_x T``; each has boundary ``T``.  Its modulus is a
certified lower bound for the capacity of ``{T}``.  Separately the modulus of
the translate family ``{tau_x T}`` is reported.
"""

from __future__ import annotations

import numpy as np

from ..cochains import ball_shifts
from ..fixtures import square_cycle
from ..flat import fill_volume
from ..grid import GridDomain, boundary, prism_fill, translate
from ..modulus import capacity_lower, growth_profile, modulus
from .config import ExperimentConfig, HypothesisError
from .report import ExperimentReport

COLUMNS = ["family", "members", "value", "lower_bound", "kkt_residual", "certified", "monotone"]

DEFAULTS = {"n": 3, "box": 24, "h": 1.0 / 8, "p": 2.5, "alpha": 1.0, "side": 2, "shift_radius": 2.0, "threshold": 1e-8}


def filling_family(T, V, shifts) -> list:
    """``V`` followed by ``tau_x V - P_x`` for every nonzero shift."""
    out = [V]
    for x in shifts:
        if not np.any(x):
            continue
        P, R = prism_fill(T, x)
        if not R.is_zero():
            raise ValueError("T must be a cycle")
        out.append(translate(V, x) - P)
    return out


def run_caplower(cfg: ExperimentConfig) -> ExperimentReport:
    cfg = cfg.with_defaults(DEFAULTS)
    n, box, h, p, alpha = int(cfg.n), int(cfg.box), float(cfg.h), float(cfg.p), float(cfg.alpha)
    side = int(cfg.get("side"))
    if p <= n - alpha or p < 1:
        raise HypothesisError(f"need p > n - alpha = {n - alpha}, got p = {p}")
    dom = GridDomain(n, h, (0,) * n, (box,) * n)
    corner = [box // 2 - side // 2] * n
    T = square_cycle(dom, corner, side) if side > 0 else None
    if T is None or T.is_zero():
        raise HypothesisError("T must be nonzero")
    return caplower_report(T, p, alpha, float(cfg.get("shift_radius")), float(cfg.get("threshold")), cfg.tol)


def caplower_report(T, p: float, alpha: float, shift_radius: float, threshold: float = 1e-8, tol: float = 1e-9) -> ExperimentReport:
    if T.is_zero():
        raise HypothesisError("T must be nonzero")
    if T.dim >= 1 and not boundary(T).is_zero():
        raise HypothesisError("T must be a cycle")
    dom = T.domain
    h = dom.h
    fv = fill_volume(T)
    shifts = ball_shifts(dom.n, h, shift_radius * h)
    fam = filling_family(T, fv.S, shifts)
    rep = ExperimentReport("caplower", COLUMNS)
    prev = 0.0
    mono = True
    sizes = sorted({1, max(1, len(fam) // 4), max(1, len(fam) // 2), len(fam)})
    sol = None
    for k in sizes:
        sol = capacity_lower([T], fam[:k], p)
        ok = sol.lower_bound >= prev * (1 - 1e-9) - 1e-15
        mono &= ok
        prev = max(prev, sol.lower_bound)
        rep.add(family="fillings", members=k, value=sol.value, lower_bound=sol.lower_bound,
                kkt_residual=sol.kkt_residual, certified=bool(sol.lower_bound > threshold), monotone=bool(ok))
    translates = [translate(T, x) for x in shifts]
    tsol = modulus(translates, p)
    rep.add(family="translates", members=len(translates), value=tsol.value, lower_bound=tsol.lower_bound,
            kkt_residual=tsol.kkt_residual, certified=bool(tsol.lower_bound > threshold), monotone=True)
    gp = growth_profile(T, p, h * np.array([0.5, 1.5, 2.5])) if T.dim > 0 else None
    rep.fitted = {"capacity_lower": sol.lower_bound, "translate_modulus_lower": tsol.lower_bound}
    rep.slopes = {"growth_alpha": gp.alpha if gp else float("nan")}
    rep.residuals = {"kkt_fillings": sol.kkt_residual, "kkt_translates": tsol.kkt_residual}
    rep.verdicts = {
        "capacity_lower_positive": bool(sol.lower_bound > threshold),
        "translate_modulus_positive": bool(tsol.lower_bound > threshold),
        "kkt_certified": bool(sol.kkt_residual <= 1e-8 and tsol.kkt_residual <= 1e-8),
        "monotone_in_family": bool(mono),
    }
    rep.diagnostics = {"p": p, "alpha": alpha, "fillings": len(fam), "fillvol": fv.value}
    return rep
