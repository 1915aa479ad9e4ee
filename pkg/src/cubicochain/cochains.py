"""Cochains on cubical chains: discrete forms, the coboundary, tuple cochains
``T -> T(f, pi_1, ..., pi_m)``, 0-cochains of functions, pointwise Lipschitz
surrogates, upper-norm / upper-gradient verification and translation fields.

A form of degree m holds one coefficient per m-cell; on a cell it integrates
to ``coeff * h^m``.  Its coboundary ``d omega = B^T omega / h`` satisfies the
discrete Stokes identity ``(d omega)(S) = omega(dS)`` exactly up to rounding.

Cochain values are floats; ``math.inf`` marks an infinite value and sums
propagate it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .grid import Chain, GridDomain, boundary, translate
from .grid import prism as unit_prism
from .modulus import Density, energy, line_integral


# ---------------------------------------------------------------------------
# scalar fields on vertices
# ---------------------------------------------------------------------------


@dataclass
class ScalarField:
    """Real values on the lattice vertices ``lo..hi`` (inclusive) with spacing ``h``."""

    lo: np.ndarray
    hi: np.ndarray
    h: float
    values: np.ndarray

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=np.int64)
        self.hi = np.asarray(self.hi, dtype=np.int64)
        shape = tuple((self.hi - self.lo + 1).tolist())
        self.values = np.asarray(self.values, dtype=np.float64).reshape(shape)

    @classmethod
    def on_domain(cls, domain: GridDomain, values) -> "ScalarField":
        return cls(domain.lo, domain.hi, domain.h, values)

    @classmethod
    def from_function(cls, domain: GridDomain, fn: Callable[[np.ndarray], np.ndarray]) -> "ScalarField":
        """Sample ``fn`` (taking an ``(N, n)`` array of points) at every vertex."""
        pts = vertex_points(domain)
        return cls.on_domain(domain, np.asarray(fn(pts), dtype=np.float64).reshape(domain.vertex_shape))

    def at(self, points) -> np.ndarray:
        rel = np.asarray(points, dtype=np.int64).reshape(-1, len(self.lo)) - self.lo
        if np.any(rel < 0) or np.any(rel > self.hi - self.lo):
            raise ValueError("out of domain")
        return self.values[tuple(rel.T)]


def vertex_points(domain: GridDomain) -> np.ndarray:
    axes = [np.arange(a, b + 1) * domain.h for a, b in zip(domain.lo, domain.hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, domain.n)


def _pairwise_max(arr: np.ndarray, axis: int) -> np.ndarray:
    a = np.moveaxis(arr, axis, 0)
    return np.moveaxis(np.maximum(a[:-1], a[1:]), 0, axis)


def vertex_max_density(domain: GridDomain, values: np.ndarray) -> Density:
    """n-cell density: max of a vertex field over each cell's corners."""
    out = np.asarray(values, dtype=np.float64).reshape(domain.vertex_shape)
    for j in range(domain.n):
        out = _pairwise_max(out, j)
    return Density(domain, out)


# ---------------------------------------------------------------------------
# discrete forms
# ---------------------------------------------------------------------------


class DiscreteForm:
    """Degree-m coefficients on every m-cell of a domain."""

    def __init__(self, domain: GridDomain, degree: int, coeff):
        if not 0 <= degree <= domain.n:
            raise ValueError("degree out of range")
        coeff = np.asarray(coeff, dtype=np.float64).ravel()
        if coeff.size != domain.num_cells(degree):
            raise ValueError("one coefficient per cell required")
        self.domain = domain
        self.degree = degree
        self.coeff = coeff

    @classmethod
    def from_function(cls, domain: GridDomain, degree: int, fn) -> "DiscreteForm":
        """``fn(barycenters (K, n), axes_mask (K, n)) -> (K,)`` sampled on all cells."""
        idx = domain.all_cells(degree)
        block_ids, bases = domain.decode(degree, idx)
        masks = domain.axes_masks(degree)[block_ids]
        return cls(domain, degree, fn((bases + 0.5 * masks) * domain.h, masks))

    def __call__(self, T: Chain) -> float:
        return eval_form(self, T)

    def __add__(self, other: "DiscreteForm") -> "DiscreteForm":
        if other.domain != self.domain or other.degree != self.degree:
            raise ValueError("forms differ in domain or degree")
        return DiscreteForm(self.domain, self.degree, self.coeff + other.coeff)

    def __mul__(self, c: float) -> "DiscreteForm":
        return DiscreteForm(self.domain, self.degree, self.coeff * c)

    __rmul__ = __mul__


def eval_form(omega: DiscreteForm, T: Chain) -> float:
    """``sum_c T_c omega_c h^m``."""
    if T.dim != omega.degree:
        raise ValueError(f"degree mismatch: form {omega.degree}, chain {T.dim}")
    if T.domain != omega.domain:
        raise ValueError("domain mismatch")
    return float(T.coeff @ omega.coeff[T.idx]) * T.domain.h**T.dim


def exterior_derivative(omega: DiscreteForm) -> DiscreteForm:
    """Cubical coboundary, normalized so that ``eval(d omega, S) = eval(omega, dS)``."""
    m = omega.degree
    dom = omega.domain
    if m >= dom.n:
        raise ValueError("no exterior derivative of a top-degree form")
    B = dom.boundary_matrix(m + 1)
    return DiscreteForm(dom, m + 1, (B.T @ omega.coeff) / dom.h)


def form_abs_density(omega: DiscreteForm) -> Density:
    """n-cell density ``sqrt(sum_I max_{faces c of Q with axes I} omega_c^2)``.

    It dominates ``|omega_c|`` on every incident cell of every m-cell ``c``.
    """
    dom = omega.domain
    m = omega.degree
    offsets = dom.block_offsets(m)
    total = np.zeros(dom.cell_shape)
    for k, axes in enumerate(dom.blocks(m)):
        arr = omega.coeff[offsets[k] : offsets[k + 1]].reshape(dom.block_shape(axes)) ** 2
        for j in range(dom.n):
            if j not in axes:
                arr = _pairwise_max(arr, j)
        total += arr
    return Density(dom, np.sqrt(total))


def norm_constant(n: int, m: int) -> float:
    """``sqrt(C(n, m))``: ratio of the summed to the largest coordinate component."""
    return math.sqrt(math.comb(n, m))


def upper_norm_density(omega: DiscreteForm) -> Density:
    """``C1 |omega|`` with ``C1 = sqrt(C(n, m))``."""
    return form_abs_density(omega) * norm_constant(omega.domain.n, omega.degree)


def upper_gradient_density(omega: DiscreteForm) -> Density:
    """``C2 |d omega|`` with ``C2 = sqrt(C(n, m+1))``."""
    return form_abs_density(exterior_derivative(omega)) * norm_constant(omega.domain.n, omega.degree + 1)


# ---------------------------------------------------------------------------
# cochains
# ---------------------------------------------------------------------------


class Cochain:
    kind = "custom"
    linear = False

    def evaluate(self, T: Chain) -> float:  # pragma: no cover - interface
        raise NotImplementedError

    def __call__(self, T: Chain) -> float:
        if T.is_zero():
            return 0.0
        return self.evaluate(T)

    def __add__(self, other: "Cochain") -> "Cochain":
        return add_cochains(self, other)


class FormCochain(Cochain):
    kind = "form"
    linear = True

    def __init__(self, form: DiscreteForm):
        self.form = form
        self.degree = form.degree

    def evaluate(self, T: Chain) -> float:
        return eval_form(self.form, T)


class SampledFormCochain(Cochain):
    """Form whose coefficients are sampled on demand from a function of
    ``(barycenters, axes_mask)``; suited to domains too large for dense arrays."""

    kind = "form"
    linear = True

    def __init__(self, degree: int, fn):
        self.degree = degree
        self.fn = fn

    def evaluate(self, T: Chain) -> float:
        if T.dim != self.degree:
            raise ValueError("degree mismatch")
        view = T.view()
        vals = np.asarray(self.fn(view.barycenter, view.axes), dtype=np.float64)
        return float(T.coeff @ vals) * T.domain.h**T.dim


class TupleCochain(Cochain):
    """``T -> T(f, pi_1, ..., pi_m)`` on cubical chains.

    On an m-cell with axes ``(i_1..i_m)`` and base ``b`` the contribution is
    ``f(barycenter) det(D) h^m`` with ``D_jk = (pi_j(b + h e_{i_k}) - pi_j(b)) / h``
    and ``f`` interpolated multilinearly (the mean of the cell's corners).
    """

    kind = "tuple"
    linear = True

    def __init__(self, f: ScalarField, pis: Sequence[ScalarField]):
        self.f = f
        self.pis = list(pis)
        self.degree = len(self.pis)

    def cell_values(self, T: Chain) -> np.ndarray:
        if T.dim != self.degree:
            raise ValueError(f"tuple cochain needs {T.dim} functions, got {self.degree}")
        view = T.view()
        base = view.base
        masks = view.axes
        K, n = base.shape
        m = self.degree
        corners = np.zeros(K)
        cnt = 2**m
        for pat in itertools.product((0, 1), repeat=n):
            pat = np.asarray(pat)
            ok = ~np.any((pat[None, :] == 1) & ~masks, axis=1)
            corners[ok] += self.f.at(base[ok] + pat)
        fval = corners / cnt
        if m == 0:
            return fval
        axes = np.argwhere(masks)[:, 1].reshape(K, m)
        D = np.zeros((K, m, m))
        h = self.f.h
        for j, pi in enumerate(self.pis):
            p0 = pi.at(base)
            for k in range(m):
                step = base.copy()
                step[np.arange(K), axes[:, k]] += 1
                D[:, j, k] = (pi.at(step) - p0) / h
        return fval * np.linalg.det(D)

    def evaluate(self, T: Chain) -> float:
        return float(T.coeff @ self.cell_values(T)) * T.domain.h**T.dim

    def as_form(self, domain: GridDomain) -> DiscreteForm:
        """The same linear cochain as a form on ``domain``."""
        allc = Chain(domain, self.degree, domain.all_cells(self.degree), np.ones(domain.num_cells(self.degree)), canonical=True)
        return DiscreteForm(domain, self.degree, self.cell_values(allc))


def tuple_cochain(f: ScalarField, pis: Sequence[ScalarField]) -> TupleCochain:
    return TupleCochain(f, pis)


class ZeroCochain(Cochain):
    """``sum theta_i [x_i] -> sum theta_i u(x_i)``."""

    kind = "function"
    linear = True
    degree = 0

    def __init__(self, u: ScalarField):
        self.u = u

    def evaluate(self, T: Chain) -> float:
        if T.dim != 0:
            raise ValueError("0-cochain evaluates 0-chains")
        _, bases = T.cells()
        return float(T.coeff @ self.u.at(bases))


def zero_cochain(u: ScalarField) -> ZeroCochain:
    return ZeroCochain(u)


class SumCochain(Cochain):
    kind = "sum"

    def __init__(self, a: Cochain, b: Cochain):
        self.a = a
        self.b = b
        self.linear = a.linear and b.linear
        self.degree = getattr(a, "degree", None)

    def evaluate(self, T: Chain) -> float:
        va = self.a(T)
        vb = self.b(T)
        if math.isinf(va) or math.isinf(vb):
            return math.inf
        return va + vb


class CallableCochain(Cochain):
    def __init__(self, fn: Callable[[Chain], float], linear: bool = False, degree: int | None = None):
        self.fn = fn
        self.linear = linear
        self.degree = degree

    def evaluate(self, T: Chain) -> float:
        return float(self.fn(T))


def add_cochains(a: Cochain, b: Cochain) -> SumCochain:
    """Sum with infinite values propagating to ``+inf``."""
    return SumCochain(a, b)


def negate(c: Cochain) -> Cochain:
    if isinstance(c, FormCochain):
        return FormCochain(c.form * -1.0)
    return CallableCochain(lambda T: -c(T), linear=c.linear, degree=getattr(c, "degree", None))


# ---------------------------------------------------------------------------
# tuple cochain densities
# ---------------------------------------------------------------------------


def _cell_gradient_bound(domain: GridDomain, values: np.ndarray) -> np.ndarray:
    """Per n-cell ``sqrt(sum_i (max over the cell's i-edges of |df| / h)^2)``."""
    v = np.asarray(values, dtype=np.float64).reshape(domain.vertex_shape)
    total = np.zeros(domain.cell_shape)
    for i in range(domain.n):
        e = np.abs(np.diff(v, axis=i)) / domain.h
        for j in range(domain.n):
            if j != i:
                e = _pairwise_max(e, j)
        total += e**2
    return np.sqrt(total)


def tuple_upper_norm_density(f: ScalarField, pis: Sequence[ScalarField], domain: GridDomain) -> Density:
    """``max_Q |f| * prod_j L_Q(pi_j)``: an upper norm of the tuple cochain
    (Hadamard's inequality bounds each cell determinant)."""
    out = vertex_max_density(domain, np.abs(f.values)).values
    for pi in pis:
        out = out * _cell_gradient_bound(domain, pi.values)
    return Density(domain, out)


def tuple_upper_gradient_density(f: ScalarField, pis: Sequence[ScalarField], domain: GridDomain) -> Density:
    """``L_Q(f) * prod_j L_Q(pi_j)``; an upper gradient of the tuple cochain
    for affine data, where the discrete cochain integrates ``f dpi`` exactly."""
    out = _cell_gradient_bound(domain, f.values)
    for pi in pis:
        out = out * _cell_gradient_bound(domain, pi.values)
    return Density(domain, out)


# ---------------------------------------------------------------------------
# pointwise Lipschitz surrogates
# ---------------------------------------------------------------------------


@dataclass
class LipEstimate:
    lip: np.ndarray
    Lip: np.ndarray
    radii: tuple
    scales: np.ndarray  # per radius, per vertex: max_{0<|y-x|<=s} |f(y)-f(x)| / s


def lattice_ball(n: int, radius_lat: float, include_origin: bool = True) -> np.ndarray:
    """Integer vectors with Euclidean norm at most ``radius_lat``."""
    k = int(math.floor(radius_lat + 1e-9))
    offs = np.array(list(itertools.product(range(-k, k + 1), repeat=n)), dtype=np.int64).reshape(-1, n)
    keep = (offs**2).sum(axis=1) <= radius_lat**2 + 1e-9
    if not include_origin:
        keep &= np.any(offs != 0, axis=1)
    return offs[keep]


def lip_field(f: ScalarField, radii: Sequence[float] | None = None, use_numba=None) -> LipEstimate:
    """Scale-s Lipschitz quotients ``max_{0<|y-x|<=s} |f(y)-f(x)| / s``.

    ``Lip`` is the quotient at the smallest scale and ``lip`` the minimum over
    the schedule (default ``h, 2h, 4h``), so ``lip <= Lip`` everywhere.
    """
    h = f.h
    radii = (h, 2 * h, 4 * h) if radii is None else tuple(float(r) for r in radii)
    if not radii:
        raise ValueError("empty radius schedule")
    if min(radii) < h * (1 - 1e-12):
        raise ValueError("radii must be >= h")
    radii = tuple(sorted(radii))
    n = f.values.ndim
    scales = []
    for s in radii:
        offs = lattice_ball(n, s / h, include_origin=False)
        scales.append(_kernels.neighbor_max(f.values, offs, np.full(len(offs), s), use_numba=use_numba))
    scales = np.stack(scales)
    return LipEstimate(scales.min(axis=0), scales[0], radii, scales)


def morrey_upper_gradient(u: ScalarField, domain: GridDomain) -> Density:
    """n-cell density ``max of Lip u over the cell's corners``; along every edge
    it dominates ``|du| / h``, so it is an upper gradient for lattice paths."""
    est = lip_field(u, (u.h,))
    return vertex_max_density(domain, est.Lip)


# ---------------------------------------------------------------------------
# verification reports
# ---------------------------------------------------------------------------


@dataclass
class CheckReport:
    rows: list
    passed: bool

    @property
    def min_margin(self) -> float:
        return min((r["margin"] for r in self.rows), default=math.inf)


def check_upper_norm(omega: Cochain, h_density, family: Sequence[Chain], tol: float = 1e-9) -> CheckReport:
    """Margins ``int h d||T|| - |omega(T)|``; passes iff all are ``>= -tol (1 + rhs)``."""
    rows = []
    for k, T in enumerate(family):
        lhs = abs(omega(T))
        rhs = line_integral(h_density, T)
        margin = rhs - lhs
        rows.append({"member": k, "lhs": lhs, "rhs": rhs, "margin": margin, "pass": bool(margin >= -tol * (1 + rhs))})
    return CheckReport(rows, all(r["pass"] for r in rows))


def check_upper_gradient(omega: Cochain, g_density, pairs: Sequence[tuple], tol: float = 1e-9, atol: float = 0.0) -> CheckReport:
    """Margins ``int g d||S|| - |omega(T)|`` over pairs with ``dS = T`` (validated)."""
    rows = []
    for k, (T, S) in enumerate(pairs):
        if not boundary(S).equals(T, atol=atol):
            raise ValueError(f"pair {k}: boundary(S) != T")
        lhs = abs(omega(T))
        rhs = line_integral(g_density, S)
        margin = rhs - lhs
        rows.append({"member": k, "lhs": lhs, "rhs": rhs, "margin": margin, "pass": bool(margin >= -tol * (1 + rhs))})
    return CheckReport(rows, all(r["pass"] for r in rows))


def sobolev_norm(omega: Cochain, h_candidates, g_candidates, q: float, p: float, family, pairs, mu=None, tol: float = 1e-9) -> float:
    """Smallest ``||h||_q + ||g||_p`` over candidates passing both checks (``+inf`` if none).

    This bounds the true infimum from above.
    """
    hs = [energy(h, q, mu) ** (1 / q) for h in h_candidates if check_upper_norm(omega, h, family, tol).passed]
    gs = [energy(g, p, mu) ** (1 / p) for g in g_candidates if check_upper_gradient(omega, g, pairs, tol).passed]
    if not hs or not gs:
        return math.inf
    return min(hs) + min(gs)


# ---------------------------------------------------------------------------
# translation fields
# ---------------------------------------------------------------------------


def _check_shifts(T: Chain, shifts: np.ndarray):
    lo, hi = T.bbox()
    dom = T.domain
    if np.any(lo + shifts.min(axis=0) < np.asarray(dom.lo)) or np.any(hi + shifts.max(axis=0) > np.asarray(dom.hi)):
        raise ValueError("out of domain")


def translate_values(omega: Cochain, T: Chain, shifts, use_numba=None) -> np.ndarray:
    """``omega(translate(T, x))`` for each lattice shift ``x``."""
    shifts = np.asarray(shifts, dtype=np.int64).reshape(-1, T.domain.n)
    if T.is_zero():
        return np.zeros(len(shifts))
    _check_shifts(T, shifts)
    if isinstance(omega, FormCochain):
        dom = T.domain
        block_ids, bases = T.cells()
        w = T.coeff * dom.h**T.dim
        return _kernels.shifted_sum(
            omega.form.coeff, dom.block_offsets(T.dim), dom.block_shapes(T.dim), block_ids,
            bases - np.asarray(dom.lo), w, shifts, use_numba=use_numba,
        )
    return np.array([omega(translate(T, x)) for x in shifts])


def translate_field(omega: Cochain, T: Chain, region_lo, region_hi, use_numba=None) -> ScalarField:
    """``u(x) = |omega(translate(T, x))|`` on the lattice box of shifts ``[region_lo, region_hi]``."""
    lo = np.asarray(region_lo, dtype=np.int64)
    hi = np.asarray(region_hi, dtype=np.int64)
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    shifts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    vals = np.abs(translate_values(omega, T, shifts, use_numba=use_numba))
    return ScalarField(lo, hi, T.domain.h, vals)


def ball_shifts(n: int, h: float, r: float) -> np.ndarray:
    return lattice_ball(n, r / h)


def average_translate(omega: Cochain, T: Chain, r: float) -> float:
    """Mean of ``|omega(translate(T, x))|`` over lattice vectors with ``|x| <= r``."""
    if r < T.domain.h * (1 - 1e-12):
        raise ValueError("empty lattice ball: need r >= h")
    shifts = ball_shifts(T.domain.n, T.domain.h, r)
    return float(np.mean(np.abs(translate_values(omega, T, shifts))))


def translate_step_bound(T: Chain, g_density, h_density, x, axis: int, step: int) -> float:
    """Upper bound for ``|u(x + step e_axis) - u(x)|`` from the unit prism
    between the two translates: ``int g d||P tau_x T|| + int h d||P d tau_x T||``."""
    Tx = translate(T, x)
    val = line_integral(g_density, unit_prism(Tx, axis, step))
    if T.dim > 0 and h_density is not None:
        bd = boundary(Tx)
        if not bd.is_zero():
            val += line_integral(h_density, unit_prism(bd, axis, step))
    return val


def translate_path_bound(T: Chain, g_density, h_density, path) -> float:
    """Sum of :func:`translate_step_bound` along a lattice path of shifts."""
    path = np.asarray(path, dtype=np.int64)
    total = 0.0
    for a, b in zip(path[:-1], path[1:]):
        d = b - a
        axis = int(np.argmax(np.abs(d)))
        if np.abs(d).sum() != 1:
            raise ValueError("path steps must be unit lattice steps")
        total += translate_step_bound(T, g_density, h_density, a, axis, int(d[axis]))
    return total
