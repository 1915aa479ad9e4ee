"""A current whose fillings have zero p-capacity when ``p < n - alpha``.

Level ``j`` of the current holds ``M_j`` copies of the cube boundary
``T_0 = d[-1, 1]^(m+1)`` scaled by ``r_j = 2^-j``, each with multiplicity
``N_j``.  The density

    g = sum_j M_j^-1 N_j^-1 r_j^-(m+1) sum_k 1_{B(x_j^k, 2 r_j)}

has ``||g||_p^p = sum_j M_j (M_j N_j r_j^(m+1))^-p |B(0, 2 r_j)|`` (the balls
are disjoint), a convergent series when ``p < n - alpha``, while each nonempty
level contributes a fixed amount to the pairing with any filling.  Scaling
``g`` to be admissible therefore gives capacity upper bounds tending to 0.
"""

from __future__ import annotations

import math

import numpy as np

from ..fixtures import zerocap_anchor, zerocap_blocks, zerocap_counts, zerocap_current, zerocap_domain, zerocap_reference
from ..flat import fill_volume
from ..grid import Chain, boundary, mass, mass_vector
from ..modulus import Density, capacity_upper_certificate
from .config import ExperimentConfig, HypothesisError
from .report import ExperimentReport

COLUMNS = [
    "j", "N_j", "M_j", "r_j", "energy_term", "energy_partial", "energy_tail", "level_pairing", "pairing_partial",
    "capacity_upper", "divergent_term", "divergent_partial",
]

DEFAULTS = {"n": 3, "alpha": 1.0, "p": 1.1, "J": 20, "m": 1, "s": 4, "tail_levels": 200, "p_divergent": 2.5,
            "explicit_levels": 2, "eps": [0.25, 0.5, 1.0, 2.0, 4.0]}


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def energy_term(j: int, p: float, n: int, m: int, alpha: float) -> float:
    """``||g_j||_p^p`` for level ``j`` (0 for empty levels)."""
    n_j, m_j = zerocap_counts(j, alpha, m)
    if m_j == 0:
        return 0.0
    r = 2.0**-j
    height = 1.0 / (m_j * n_j * r ** (m + 1))
    return m_j * height**p * unit_ball_volume(n) * (2 * r) ** n


def density_at(points: np.ndarray, J: int, alpha: float, m: int, n: int) -> np.ndarray:
    """Pointwise value of the level-``<= J`` density."""
    out = np.zeros(len(points))
    for j in range(1, J + 1):
        n_j, m_j = zerocap_counts(j, alpha, m)
        r = 2.0**-j
        for k in range(1, m_j + 1):
            inside = np.linalg.norm(points - zerocap_anchor(j, k, n), axis=1) < 2 * r
            out[inside] += 1.0 / (m_j * n_j * r ** (m + 1))
    return out


def reference_filling(n: int, m: int, s: int):
    """LP filling of the reference block and the LP lower bound for the mass any
    filling puts in ``B(0, 2)``."""
    ref = zerocap_reference(n, m, s)
    fill = fill_volume(ref.T)
    dom = ref.domain
    centers = np.stack(np.meshgrid(*[(np.arange(a, b) + 0.5) * dom.h for a, b in zip(dom.lo, dom.hi)], indexing="ij"), axis=-1)
    ball = (np.linalg.norm(centers, axis=-1) < 2).astype(float)
    inner = fill_volume(ref.T, density=ball, margin=None)
    return ref, fill, inner


def run_zerocap(cfg: ExperimentConfig) -> ExperimentReport:
    cfg = cfg.with_defaults(DEFAULTS)
    n, m, alpha, p = int(cfg.n), int(cfg.get("m")), float(cfg.alpha), float(cfg.p)
    J = int(cfg.get("J"))
    s = int(cfg.get("s"))
    if not 0 <= alpha <= m <= n - 1:
        raise HypothesisError("need 0 <= alpha <= m <= n - 1")
    if p >= n - alpha:
        raise HypothesisError(f"the construction needs p < n - alpha = {n - alpha}, got p = {p}")
    if p < 1:
        raise HypothesisError("need p >= 1")
    if J < 0:
        raise HypothesisError("need J >= 0")
    p_div = float(cfg.get("p_divergent"))
    tail_levels = int(cfg.get("tail_levels"))

    ref, fill, inner = reference_filling(n, m, s)
    per_level = fill.value  # = mass(S_ref): the canonical filling's pairing per level

    terms = np.array([energy_term(j, p, n, m, alpha) for j in range(1, tail_levels + 1)])
    div_terms = np.array([energy_term(j, p_div, n, m, alpha) for j in range(1, J + 1)])
    rep = ExperimentReport("zerocap", COLUMNS)
    E = P = Ed = 0.0
    for j in range(1, J + 1):
        n_j, m_j = zerocap_counts(j, alpha, m)
        E += terms[j - 1]
        Ed += div_terms[j - 1]
        lp = per_level if m_j > 0 else 0.0
        P += lp
        rep.add(j=j, N_j=n_j, M_j=m_j, r_j=2.0**-j, energy_term=terms[j - 1], energy_partial=E,
                energy_tail=float(terms[j:].sum()), level_pairing=lp, pairing_partial=P,
                capacity_upper=(E / P**p if P > 0 else math.inf), divergent_term=div_terms[j - 1], divergent_partial=Ed)

    js = np.array([r["j"] for r in rep.rows], dtype=float)
    Ps = np.array([r["pairing_partial"] for r in rep.rows])
    if len(js) >= 2:
        slope, icpt = np.polyfit(js, Ps, 1)
        pred = slope * js + icpt
        ss = float(((Ps - Ps.mean()) ** 2).sum())
        r2 = 1.0 - float(((Ps - pred) ** 2).sum()) / ss if ss > 0 else 0.0
    else:
        slope, icpt, r2 = 0.0, 0.0, 0.0
    caps = [r["capacity_upper"] for r in rep.rows if math.isfinite(r["capacity_upper"])]
    explicit = _explicit_levels(min(int(cfg.get("explicit_levels")), J), n, m, alpha, p, s, fill.S, cfg.get("eps"))
    tail = float(terms[J:].sum()) if J > 0 else float(terms.sum())
    rep.fitted = {"pairing_slope": float(slope), "pairing_intercept": float(icpt), "per_level_pairing": per_level,
                  "block_ball_lower_bound": inner.value}
    rep.slopes = {"pairing_vs_J": float(slope)}
    rep.residuals = {"pairing_r2": r2, "energy_tail": tail}
    rep.verdicts = {
        "energy_tail_below_1e-3": bool(tail < 1e-3),
        "pairing_linear_r2_0.99": bool(r2 >= 0.99 and slope > 0),
        "divergent_series_not_cauchy": bool(J >= 5 and div_terms[-1] > 1e-3 and np.all(np.diff(div_terms[-5:]) > 0)),
        "capacity_bound_decreasing": bool(len(caps) >= 2 and all(b <= a * (1 + 1e-12) for a, b in zip(caps, caps[1:])) and caps[-1] < caps[0]),
        "block_lower_bound_positive": bool(inner.value > 0),
        "explicit_chains_consistent": explicit["consistent"],
    }
    rep.diagnostics = {"p": p, "p_divergent": p_div, "explicit": explicit, "final_capacity_upper": caps[-1] if caps else math.inf}
    return rep


def _explicit_levels(J: int, n: int, m: int, alpha: float, p: float, s: int, S_ref: Chain, eps_list) -> dict:
    """Build ``T_J`` and its filling on a grid, check ``dS_J = T_J`` and compare
    the pairing and energy of the discretized density with the series."""
    if J < 1:
        return {"levels": 0, "consistent": True}
    dom = zerocap_domain(J, alpha, m, n, s)
    T = zerocap_current(J, alpha, m, n, s)
    S = zerocap_blocks(J, alpha, m, n, S_ref, s, target=dom)
    ok_bd = boundary(S).equals(T)
    centers = np.stack(np.meshgrid(*[(np.arange(a, b) + 0.5) * dom.h for a, b in zip(dom.lo, dom.hi)], indexing="ij"), axis=-1)
    g = Density(dom, density_at(centers.reshape(-1, n), J, alpha, m, n).reshape(dom.cell_shape))
    pair_point = float(mass_vector(S) @ density_at(S.barycenters(), J, alpha, m, n))
    expected = sum(mass(S_ref) for j in range(1, J + 1) if zerocap_counts(j, alpha, m)[1] > 0)
    certs = []
    for eps in eps_list:
        e, pair = capacity_upper_certificate(g * float(eps), [S], p)
        certs.append({"eps": float(eps), "energy": e, "pairing": pair, "admissible": bool(pair >= 1 - 1e-12)})
    series = sum(energy_term(j, p, n, m, alpha) for j in range(1, J + 1))
    pair_line = certs[0]["pairing"] / float(eps_list[0])
    consistent = ok_bd and abs(pair_point - expected) <= 1e-9 * (1 + expected) and abs(pair_line - expected) <= 1e-9 * (1 + expected)
    return {"levels": J, "boundary_matches": ok_bd, "pairing_point": pair_point, "pairing_line_integral": pair_line,
            "pairing_expected": expected, "discrete_energy": g.energy(p), "series_energy": series,
            "certificates": certs, "consistent": bool(consistent)}
