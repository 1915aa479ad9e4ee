"""Borderline exponent: a form with a log-log singularity along a line.

In ``R^3`` the 1-form ``omega = phi(x_3) LL(|x~|) dx_3`` with
``LL(r) = max(log log(1/r), 0)`` and ``x~ = (x_1, x_2)`` has ``d omega`` in
``L^(n-m) = L^2`` while ``omega(T_k)`` on the segment ``{x~ = (2^-k, 0)} x [-1, 1]``
equals ``2 LL(2^-k) = 2 log(k log 2)``, which is unbounded.  The cochain is
therefore not Hölder continuous at the borderline exponent ``p = n - m``.

The form is sampled lazily on a lattice of spacing ``2^-K``; the integrability
of ``|d omega|^2`` is checked on dyadic annuli with 2D slice grids against the
closed form ``2 pi / (log 2 k (k+1)) * int phi^2``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from ..cochains import SampledFormCochain
from ..fixtures import segment
from ..grid import GridDomain, mass, translate
from .config import ExperimentConfig, HypothesisError
from .report import ExperimentReport

COLUMNS = ["k", "offset", "omega", "mass", "omega_per_mass", "loglog", "quadrature", "deficit", "domega_sq_increment", "closed_increment"]

DEFAULTS = {"n": 3, "m": 1, "K": 12, "k_min": 3, "k_max": 10, "slice_cells": 64}


def loglog(r) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    out = np.zeros(r.shape)
    ok = (r > 0) & (r < math.exp(-1))
    out[ok] = np.log(np.log(1.0 / r[ok]))
    return out


def cutoff(t) -> np.ndarray:
    """Smooth ``phi`` equal to 1 on ``[-1, 1]`` and 0 outside ``(-2, 2)``."""
    t = np.abs(np.asarray(t, dtype=np.float64))

    def s(x):
        return np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)

    a = s(2.0 - t)
    return a / (a + s(t - 1.0))


def _coefficient(bary: np.ndarray, masks: np.ndarray, axis: int, plane) -> np.ndarray:
    r = np.linalg.norm(bary[:, plane], axis=1)
    return cutoff(bary[:, axis]) * loglog(r) * masks[:, axis]


def annulus_energy(k: int, cells: int) -> float:
    """``int |grad LL|^2`` over ``2^-(k+1) <= |x~| < 2^-k`` from a discrete 0-form
    on a ``cells x cells`` grid covering ``[-2^-k, 2^-k]^2``: forward
    differences on both axes, summed over cells centred in the annulus."""
    R = 2.0**-k
    h = 2 * R / cells
    xs = -R + h * np.arange(cells + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    f = loglog(np.hypot(X, Y))
    dx = np.diff(f, axis=0) / h
    dy = np.diff(f, axis=1) / h
    gx = 0.5 * (dx[:, 1:] + dx[:, :-1])
    gy = 0.5 * (dy[1:, :] + dy[:-1, :])
    cx = -R + h * (np.arange(cells) + 0.5)
    CX, CY = np.meshgrid(cx, cx, indexing="ij")
    rc = np.hypot(CX, CY)
    ring = (rc >= R / 2) & (rc < R)
    return float(((gx**2 + gy**2)[ring]).sum() * h * h)


def run_sharp(cfg: ExperimentConfig) -> ExperimentReport:
    cfg = cfg.with_defaults(DEFAULTS)
    n = int(cfg.n)
    m = int(cfg.get("m"))
    if n != 3 or m != 1:
        if not (n >= 3 and 1 <= m <= n - 2):
            raise HypothesisError("need n >= 3 and 1 <= m <= n - 2")
        raise HypothesisError("this runner implements n = 3, m = 1")
    K = int(cfg.get("K"))
    k_min, k_max = int(cfg.get("k_min")), int(cfg.get("k_max"))
    if not 2 <= k_min <= k_max < K:
        raise HypothesisError("need 2 <= k_min <= k_max < K")
    N = 2**K
    dom = GridDomain(n, 1.0 / N, (-2 * N,) * n, (2 * N,) * n)
    axis, plane = n - 1, list(range(n - 1))
    omega = SampledFormCochain(1, lambda b, msk: _coefficient(b, msk, axis, plane))
    T0 = segment(dom, [0] * (n - 1) + [-N], 2 * N, axis=axis)
    phi_sq = quad(lambda t: float(cutoff(t)) ** 2, -2, 2, points=[-1, 1])[0]
    cells = int(cfg.get("slice_cells"))

    rep = ExperimentReport("sharp", COLUMNS)
    for k in range(k_min, k_max + 1):
        shift = np.zeros(n, dtype=np.int64)
        shift[0] = 2 ** (K - k)
        T = translate(T0, shift)
        val = omega(T)
        M = mass(T)
        r = 2.0**-k
        oracle = quad(lambda t: float(cutoff(t)) * float(loglog(r)), -1, 1)[0]
        ll = math.log(math.log(2.0**k))
        inc = annulus_energy(k, cells) * phi_sq
        closed = 2 * math.pi / (math.log(2) * k * (k + 1)) * phi_sq
        rep.add(k=k, offset=r, omega=val, mass=M, omega_per_mass=val / M, loglog=ll, quadrature=oracle,
                deficit=ll - val / M, domega_sq_increment=inc, closed_increment=closed)
    rows = rep.rows
    vals = np.array([r["omega"] for r in rows])
    c = max(r["deficit"] for r in rows)
    incs = np.array([r["domega_sq_increment"] for r in rows])
    closed = np.array([r["closed_increment"] for r in rows])
    total_closed = 2 * math.pi / (math.log(2) * k_min) * phi_sq
    rep.fitted = {"c": c}
    rep.slopes = {}
    rep.residuals = {
        "quadrature_max_abs": float(max(abs(r["omega"] - r["quadrature"]) for r in rows)),
        "increment_max_rel": float(np.max(np.abs(incs - closed) / closed)),
    }
    rep.verdicts = {
        "omega_increasing": bool(np.all(np.diff(vals) > 0)),
        "tracks_loglog_within_0.5": bool(max(abs(r["deficit"]) for r in rows) <= 0.5),
        "matches_quadrature": rep.residuals["quadrature_max_abs"] <= 1e-9 * (1 + float(np.abs(vals).max())),
        "increments_decreasing": bool(np.all(np.diff(incs) < 0)),
        "increments_match_closed_form": rep.residuals["increment_max_rel"] <= 0.25,
        "borderline_bound_fails": bool(vals[-1] > vals[0]),
    }
    rep.diagnostics = {
        "partial_sum": float(incs.sum()), "closed_form_tail_from_k_min": total_closed,
        "phi_sq_integral": phi_sq, "spacing": 1.0 / N,
    }
    return rep
