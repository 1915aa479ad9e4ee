"""Hölder continuity of cochains with respect to the filling distance.

For a family of lattice cycles ``T_i`` and a smooth compactly supported test
form ``omega`` with upper gradient ``g = C2 |d omega|`` the runner checks that

    |omega(T_i) - omega(T_j)| <= C Fillvol(T_i - T_j)^(1 - n/(p+alpha)) ||g||_p

with one fitted constant ``C``, and reports the log-log slope of the
difference against the distance.
"""

from __future__ import annotations

import math

import numpy as np

from ..cochains import FormCochain, average_translate, ball_shifts, check_upper_gradient, upper_gradient_density
from ..fixtures import square_cycle
from ..flat import fill_volume, fillvol_equals_flat_check
from ..grid import GridDomain, mass, prism_fill, translate
from ..modulus import growth_profile, line_integral, lp_norm
from ._common import bump_form, dyadic_radii, growth_constant, neighborhood_mask, support_diameter
from .config import ExperimentConfig, HypothesisError
from .report import ExperimentReport, envelope_slope, fit_split, loglog_slope

COLUMNS = [
    "i", "j", "side_i", "side_j", "fillvol", "flat", "fillvol_flat_equal", "V", "g_norm", "ratio",
    "growth_A", "Lambda", "s0", "g_norm_nbhd", "ratio_nbhd", "fit_half", "bound_ok", "grad_margin",
]

DEFAULTS = {
    2: {"n": 2, "box": 48, "per_side": 2, "sides": [1, 2, 4, 8, 16, 24], "E": 1.0, "avg_checks": 6},
    3: {"n": 3, "box": 24, "per_side": 2, "sides": [1, 2, 4, 8, 16], "E": 1.0, "avg_checks": 4},
}


def holder_exponent(n: int, p: float, alpha: float) -> float:
    return 1.0 - n / (p + alpha)


def _family(dom: GridDomain, cfg: ExperimentConfig, rng) -> list:
    """Squares in the (0, 1) plane: ``per_side`` seeded positions for every side
    length, each followed by a unit translate of itself."""
    n, box = dom.n, int(cfg.get("box"))
    margin = 3
    fam = []
    for s in cfg.get("sides"):
        s = int(s)
        if s + 2 * margin + 1 > box:
            raise HypothesisError(f"side {s} does not fit the box")
        for _ in range(int(cfg.get("per_side"))):
            corner = [int(rng.integers(margin, box - margin - s)) for _ in range(n)]
            fam.append((s, corner))
            c2 = list(corner)
            c2[int(rng.integers(0, n))] += 1
            fam.append((s, c2))
    return [(s, c, square_cycle(dom, c, s)) for s, c in fam]


def run_holder(cfg: ExperimentConfig) -> ExperimentReport:
    n = int(cfg.n or 2)
    cfg = cfg.with_defaults(DEFAULTS.get(n, DEFAULTS[3]))
    m = 1
    p = float(cfg.p if cfg.p is not None else n + 1)
    alpha = float(cfg.alpha if cfg.alpha is not None else m)
    if p <= max(1.0, n - alpha):
        raise HypothesisError(f"need p > max(1, n - alpha) = {max(1.0, n - alpha)}, got p = {p}")
    if not 0 <= alpha <= m:
        raise HypothesisError("need 0 <= alpha <= m")
    box = int(cfg.box)
    h = float(cfg.h if cfg.h is not None else 1.0 / box)
    dom = GridDomain(n, h, (0,) * n, (box,) * n)
    rng = np.random.default_rng(cfg.seed)
    e = holder_exponent(n, p, alpha)
    E = float(cfg.get("E"))

    center = np.full(n, box * h / 2)
    omega_form = bump_form(dom, center, 0.45 * box * h, axis=0)
    omega = FormCochain(omega_form)
    g = upper_gradient_density(omega_form)
    g_norm = lp_norm(g, p)

    fam = _family(dom, cfg, rng)
    values = [omega(T) for _, _, T in fam]

    # growth exponent of the family members large enough to resolve it
    alphas = []
    for s, _, T in fam:
        if s >= 8:
            # half-integer radii: a ball then holds exactly 2r of a straight side
            alphas.append(growth_profile(T, p, h * np.array([1.5, 2.5, 3.5])).alpha)
    alpha_ok = bool(alphas) and all(abs(a - alpha) <= 0.1 for a in alphas)

    rep = ExperimentReport("holder", COLUMNS)
    theta = (1.0 - alpha / m) / (p + alpha)
    pairs = []
    for i in range(len(fam)):
        for j in range(i + 1, len(fam)):
            T = fam[i][2] - fam[j][2]
            if T.is_zero():
                continue
            fv = fill_volume(T, tol=cfg.tol)
            D = fv.value
            V = abs(values[i] - values[j])
            grad = check_upper_gradient(omega, g, [(T, fv.S)], tol=cfg.tol)
            M = mass(T)
            eq = fillvol_equals_flat_check(T, tol=1e-8, filling=fv)
            A = max(1.0, growth_constant(T, p, alpha, dyadic_radii(h, support_diameter(T))))
            s0 = E * D ** (1.0 / (m + 1)) * (1.0 + A ** (-1.0 / (p + alpha)) * M**theta)
            g_nb = lp_norm(g, p, mask=neighborhood_mask(T, s0))
            Lam = (1.0 + p / (p + alpha - n)) * (A * M ** (p - 1)) ** (n / (p * (p + alpha)))
            rep.add(
                i=i, j=j, side_i=fam[i][0], side_j=fam[j][0], fillvol=D, flat=eq["flat"],
                fillvol_flat_equal=eq["pass"], V=V, g_norm=g_norm, ratio=V / (D**e * g_norm),
                growth_A=A, Lambda=Lam, s0=s0, g_norm_nbhd=g_nb,
                ratio_nbhd=(V / (Lam * D**e * g_nb) if g_nb > 0 else (0.0 if V == 0 else math.inf)),
                grad_margin=grad.rows[0]["margin"],
            )
            pairs.append((i, j, T, fv.S))

    D = np.array([r["fillvol"] for r in rep.rows])
    ratio = np.array([r["ratio"] for r in rep.rows])
    C, fit, holds = fit_split(D, ratio)
    for r, f in zip(rep.rows, fit):
        r["fit_half"] = bool(f)
        r["bound_ok"] = bool(r["ratio"] <= C * (1 + 1e-12))
    Vs = np.array([r["V"] for r in rep.rows])
    s_env, b_env, res_env, nbins = envelope_slope(D, Vs)
    pos = Vs > 0
    s_all, _, res_all = loglog_slope(D[pos], Vs[pos]) if pos.sum() >= 2 else (math.nan, 0, math.nan)
    rt = np.array([r["ratio_nbhd"] for r in rep.rows])
    C_thm, _, holds_thm = fit_split(D, rt)

    avg = _average_checks(omega, g, pairs[: int(cfg.get("avg_checks"))], h, cfg.tol)

    rep.fitted = {"C": C, "C_nbhd": C_thm}
    rep.slopes = {"envelope": s_env, "regression": s_all, "theoretical_exponent": e, "distance_octaves": float(np.log2(D.max() / D.min()))}
    rep.residuals = {"envelope": res_env, "regression": res_all}
    rep.verdicts = {
        "single_constant_bound": holds,
        "slope_at_least_exponent": bool(s_env >= e - 0.15),
        "upper_gradient_on_fillings": all(r["grad_margin"] >= -cfg.tol * (1 + r["V"]) for r in rep.rows),
        "growth_alpha_within_0.1": alpha_ok,
        "fillvol_equals_flat": all(r["fillvol_flat_equal"] for r in rep.rows),
    }
    rep.diagnostics = {
        "growth_alpha_fits": alphas,
        "nbhd_bound_holds": holds_thm,
        "envelope_bins": nbins,
        **avg,
    }
    return rep


def _average_checks(omega, g, pairs, h, tol) -> dict:
    """Translate-average inequalities on cycles ``T = dS`` with ``tau = 1``:
    the average of ``|omega(tau_x T)|`` is at most the average of
    ``int g d||tau_x S||``, and ``|omega(T)|`` is at most that average plus the
    average prism-filling term."""
    r = 2 * h
    shifts = ball_shifts(pairs[0][2].domain.n, h, r) if pairs else []
    ok_avg = ok_tech = 0
    worst = math.inf
    for _, _, T, S in pairs:
        wplus = average_translate(omega, T, r)
        rhs_avg = float(np.mean([line_integral(g, translate(S, x)) for x in shifts]))
        prism_term = float(np.mean([line_integral(g, prism_fill(T, x)[0]) for x in shifts]))
        lhs = abs(omega(T))
        ok_avg += wplus <= rhs_avg * (1 + tol) + tol
        ok_tech += lhs <= (wplus + prism_term) * (1 + tol) + tol
        worst = min(worst, rhs_avg - wplus, wplus + prism_term - lhs)
    return {"average_checks": len(pairs), "average_bound_passed": int(ok_avg), "prism_bound_passed": int(ok_tech), "average_min_margin": worst}
