"""Hölder continuity with respect to the flat norm for chains with boundary.

Samples are differences ``T = S - tau_x S`` of segments ``S`` and their
lattice translates.  With ``delta = max(alpha/p, beta/q)``,
``lambda = min(n/p, n/q)`` and ``gamma = max((n-alpha)/p, (n-beta)/q)`` the
runner checks

    |omega(T)| <= C (F(T)^(1 - lambda/(1+delta)) + F(T)^(1 - (gamma+delta)/(1+delta))) (||h||_q + ||g||_p)

with one fitted constant ``C``.
"""

from __future__ import annotations

import math

import numpy as np

from ..cochains import FormCochain, check_upper_gradient, check_upper_norm, upper_gradient_density, upper_norm_density
from ..fixtures import segment
from ..flat import flat_norm
from ..grid import GridDomain, boundary, translate
from ..modulus import growth_profile, lp_norm
from ._common import bump_form
from .config import ExperimentConfig, HypothesisError
from .report import ExperimentReport, fit_split

COLUMNS = [
    "sample", "length", "shift", "flat", "mass_R", "mass_V", "omega", "term", "norm", "ratio",
    "alpha_fit", "beta_fit", "norm_margin", "grad_margin", "fit_half", "bound_ok",
]

DEFAULTS = {"n": 3, "box": 24, "samples": 20, "lengths": [1, 2, 4, 8, 12], "max_shift": 3}


def flat_holder_exponents(n: int, p: float, q: float, alpha: float, beta: float) -> tuple[float, float, float, float, float]:
    """``(delta, lambda, gamma, e1, e2)``."""
    delta = max(alpha / p, beta / q)
    lam = min(n / p, n / q)
    gam = max((n - alpha) / p, (n - beta) / q)
    return delta, lam, gam, 1 - lam / (1 + delta), 1 - (gam + delta) / (1 + delta)


def run_flat_holder(cfg: ExperimentConfig) -> ExperimentReport:
    cfg = cfg.with_defaults(DEFAULTS)
    n = int(cfg.n)
    m = 1
    alpha = float(cfg.alpha if cfg.alpha is not None else m)
    beta = float(cfg.beta if cfg.beta is not None else m - 1)
    p = float(cfg.p if cfg.p is not None else 2 * n)
    q = float(cfg.q if cfg.q is not None else 2 * n)
    if p <= max(1.0, n - alpha) or q <= max(1.0, n - beta):
        raise HypothesisError(
            f"need p > max(1, n - alpha) = {max(1.0, n - alpha)} and q > max(1, n - beta) = {max(1.0, n - beta)}"
        )
    box = int(cfg.box)
    h = float(cfg.h if cfg.h is not None else 1.0 / box)
    dom = GridDomain(n, h, (0,) * n, (box,) * n)
    rng = np.random.default_rng(cfg.seed)
    delta, lam, gam, e1, e2 = flat_holder_exponents(n, p, q, alpha, beta)

    form = bump_form(dom, np.full(n, box * h / 2), 0.45 * box * h, axis=0)
    omega = FormCochain(form)
    hD = upper_norm_density(form)
    gD = upper_gradient_density(form)
    norm = lp_norm(hD, q) + lp_norm(gD, p)

    lengths = [int(v) for v in cfg.get("lengths")]
    kmax = int(cfg.get("max_shift"))
    margin = kmax + 1
    rep = ExperimentReport("flat_holder", COLUMNS)
    alpha_fits, beta_fits = [], []
    for k in range(int(cfg.get("samples"))):
        L = lengths[k % len(lengths)]
        if L + 2 * margin >= box:
            raise HypothesisError(f"segment length {L} does not fit the box")
        start = [int(rng.integers(margin, box - margin - L))] + [int(rng.integers(margin, box - margin)) for _ in range(n - 1)]
        S = segment(dom, start, L, axis=0)
        shift = np.zeros(n, dtype=np.int64)
        while not shift.any():
            shift = rng.integers(-kmax, kmax + 1, size=n) * (rng.random(n) < 0.6)
        T = S - translate(S, shift)
        dec = flat_norm(T, tol=cfg.tol)
        F = dec.value
        val = abs(omega(T))
        term = F**e1 + F**e2
        nrm = check_upper_norm(omega, hD, [T], tol=cfg.tol)
        grd = check_upper_gradient(omega, gD, [(boundary(dec.V), dec.V)], tol=cfg.tol) if not dec.V.is_zero() else None
        a_fit = b_fit = math.nan
        if L >= 8:
            radii = h * np.array([1.5, 2.5, 3.5])
            a_fit = growth_profile(S, p, radii).alpha
            b_fit = growth_profile(boundary(S), q, radii).alpha
            alpha_fits.append(a_fit)
            beta_fits.append(b_fit)
        rep.add(
            sample=k, length=L, shift=" ".join(str(int(v)) for v in shift), flat=F, mass_R=dec.mass_R, mass_V=dec.mass_V,
            omega=val, term=term, norm=norm, ratio=val / (term * norm) if term > 0 else 0.0,
            alpha_fit=a_fit, beta_fit=b_fit, norm_margin=nrm.rows[0]["margin"],
            grad_margin=(grd.rows[0]["margin"] if grd else math.inf),
        )
    F = np.array([r["flat"] for r in rep.rows])
    ratio = np.array([r["ratio"] for r in rep.rows])
    C, fit, holds = fit_split(F, ratio)
    for r, f in zip(rep.rows, fit):
        r["fit_half"] = bool(f)
        r["bound_ok"] = bool(r["ratio"] <= C * (1 + 1e-12))
    rep.fitted = {"C": C}
    rep.slopes = {"e1": e1, "e2": e2, "delta": delta, "lambda": lam, "gamma": gam}
    rep.residuals = {}
    rep.verdicts = {
        "single_constant_bound": holds,
        "upper_norm_certified": all(r["norm_margin"] >= -cfg.tol * (1 + r["omega"]) for r in rep.rows),
        "upper_gradient_certified": all(r["grad_margin"] >= -cfg.tol * (1 + r["omega"]) for r in rep.rows),
    }
    rep.diagnostics = {
        "alpha_fits": alpha_fits, "beta_fits": beta_fits,
        "flat_octaves": float(np.log2(F.max() / F.min())), "max_ratio": float(ratio.max()),
    }
    return rep
