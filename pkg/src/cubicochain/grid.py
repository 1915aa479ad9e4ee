"""Cubical chains on a lattice box.

An m-cell is a pair ``(base, axes)``: the cube ``base*h + prod_{i in axes} [0, h]``.
Cells of one dimension are numbered densely, first by axis subset (in
``itertools.combinations`` order) and then row-major by base, so sorting the
dense index sorts cells lexicographically by ``(axes block, base)``.

A :class:`Chain` stores the sorted dense indices of its support together with
real coefficients.  Boundary uses the cubical sign rule
``d(b, I) = sum_k (-1)^k [(b + e_{I_k}, I - I_k) - (b, I - I_k)]``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

_INDEX_LIMIT = 2**62


@dataclass(frozen=True)
class GridDomain:
    """Axis-aligned lattice box ``[lo, hi]`` (lattice units) with spacing ``h``."""

    n: int
    h: float
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lo)
        hi = tuple(int(v) for v in self.hi)
        if self.n < 1 or len(lo) != self.n or len(hi) != self.n:
            raise ValueError("lo and hi must have length n >= 1")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("need lo < hi componentwise")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError("spacing h must be positive")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "h", float(self.h))
        for m in range(self.n + 1):
            if sum(math.prod(self.block_shape(ax)) for ax in self.blocks(m)) >= _INDEX_LIMIT:
                raise ValueError("domain too large for 64-bit cell indices")

    @classmethod
    def box(cls, shape: Sequence[int], h: float = 1.0, lo: Sequence[int] | None = None) -> "GridDomain":
        """Box with ``shape[i]`` cells along axis i, lower corner ``lo`` (default 0)."""
        lo = [0] * len(shape) if lo is None else list(lo)
        return cls(len(shape), h, tuple(lo), tuple(a + s for a, s in zip(lo, shape)))

    @property
    def extents(self) -> tuple:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def cell_shape(self) -> tuple:
        """Shape of the array of n-cells."""
        return self.extents

    @property
    def vertex_shape(self) -> tuple:
        return tuple(e + 1 for e in self.extents)

    def blocks(self, m: int) -> tuple:
        return _blocks(self.n, m)

    def block_index(self, m: int, axes: Sequence[int]) -> int:
        return _block_lookup(self.n, m)[tuple(axes)]

    def block_shape(self, axes: Sequence[int]) -> tuple:
        ax = set(axes)
        return tuple(e if i in ax else e + 1 for i, e in enumerate(self.extents))

    def block_offsets(self, m: int) -> np.ndarray:
        return _block_tables(self, m)[0]

    def block_shapes(self, m: int) -> np.ndarray:
        return _block_tables(self, m)[1]

    def axes_masks(self, m: int) -> np.ndarray:
        return _block_tables(self, m)[2]

    def num_cells(self, m: int) -> int:
        if m < 0 or m > self.n:
            return 0
        return int(_block_tables(self, m)[0][-1])

    def cell_volume(self, m: int) -> float:
        return self.h**m

    # -- dense indexing ----------------------------------------------------

    def encode(self, m: int, block_ids: np.ndarray, bases: np.ndarray) -> np.ndarray:
        """Dense indices of cells given block ids and absolute lattice bases."""
        offsets, shapes, _ = _block_tables(self, m)
        block_ids = np.asarray(block_ids, dtype=np.int64)
        rel = np.asarray(bases, dtype=np.int64) - np.asarray(self.lo, dtype=np.int64)
        shp = shapes[block_ids]
        if rel.size and (np.any(rel < 0) or np.any(rel >= shp)):
            raise ValueError("out of domain")
        flat = np.zeros(len(block_ids), dtype=np.int64)
        for j in range(self.n):
            flat = flat * shp[:, j] + rel[:, j]
        return offsets[block_ids] + flat

    def contains(self, m: int, block_ids: np.ndarray, bases: np.ndarray) -> np.ndarray:
        _, shapes, _ = _block_tables(self, m)
        rel = np.asarray(bases, dtype=np.int64) - np.asarray(self.lo, dtype=np.int64)
        shp = shapes[np.asarray(block_ids, dtype=np.int64)]
        return np.all((rel >= 0) & (rel < shp), axis=1)

    def decode(self, m: int, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Inverse of :meth:`encode`: block ids and absolute bases."""
        offsets, shapes, _ = _block_tables(self, m)
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= offsets[-1]):
            raise ValueError("cell index out of range")
        block_ids = np.searchsorted(offsets, idx, side="right") - 1
        flat = idx - offsets[block_ids]
        shp = shapes[block_ids]
        bases = np.empty((len(idx), self.n), dtype=np.int64)
        for j in range(self.n - 1, -1, -1):
            bases[:, j] = flat % shp[:, j]
            flat = flat // shp[:, j]
        return block_ids, bases + np.asarray(self.lo, dtype=np.int64)

    def barycenters(self, m: int, idx: np.ndarray) -> np.ndarray:
        block_ids, bases = self.decode(m, idx)
        return (bases + 0.5 * self.axes_masks(m)[block_ids]) * self.h

    def all_cells(self, m: int) -> np.ndarray:
        return np.arange(self.num_cells(m), dtype=np.int64)

    def boundary_matrix(self, m: int) -> sp.csr_matrix:
        """Sparse matrix of the boundary map from m-cells to (m-1)-cells."""
        return _boundary_matrix(self, m)

    def n_cell_flat(self, bases: np.ndarray) -> np.ndarray:
        """Row-major position of n-cells in an array of shape :attr:`cell_shape`."""
        rel = np.asarray(bases, dtype=np.int64) - np.asarray(self.lo, dtype=np.int64)
        return np.ravel_multi_index(tuple(rel.T), self.cell_shape)


@functools.lru_cache(maxsize=None)
def _blocks(n: int, m: int) -> tuple:
    if m < 0 or m > n:
        return ()
    return tuple(itertools.combinations(range(n), m))


@functools.lru_cache(maxsize=None)
def _block_lookup(n: int, m: int) -> dict:
    return {ax: k for k, ax in enumerate(_blocks(n, m))}


@functools.lru_cache(maxsize=None)
def _block_tables(domain: GridDomain, m: int):
    blocks = domain.blocks(m)
    shapes = np.array([domain.block_shape(ax) for ax in blocks], dtype=np.int64).reshape(len(blocks), domain.n)
    sizes = np.array([math.prod(s) for s in shapes.tolist()], dtype=np.int64)
    offsets = np.zeros(len(blocks) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(sizes)
    masks = np.zeros((len(blocks), domain.n), dtype=bool)
    for k, ax in enumerate(blocks):
        masks[k, list(ax)] = True
    return offsets, shapes, masks


class CellView(NamedTuple):
    """Vectorized description of a chain's support, passed to predicates."""

    base: np.ndarray
    axes: np.ndarray
    barycenter: np.ndarray
    coeff: np.ndarray


class Chain:
    """Finitely supported real chain of dimension ``dim`` on a :class:`GridDomain`."""

    __slots__ = ("domain", "dim", "idx", "coeff")

    def __init__(self, domain: GridDomain, dim: int, idx=None, coeff=None, *, canonical: bool = False):
        if dim < 0 or dim > domain.n + 1:
            raise ValueError(f"chain dimension {dim} invalid for n={domain.n}")
        idx = np.zeros(0, dtype=np.int64) if idx is None else np.asarray(idx, dtype=np.int64).ravel()
        coeff = np.zeros(0) if coeff is None else np.asarray(coeff, dtype=np.float64).ravel()
        if idx.shape != coeff.shape:
            raise ValueError("idx and coeff must have equal length")
        if not canonical:
            idx, coeff = _merge(idx, coeff)
            if idx.size and (idx[0] < 0 or idx[-1] >= domain.num_cells(dim)):
                raise ValueError("out of domain")
        self.domain = domain
        self.dim = dim
        self.idx = idx
        self.coeff = coeff

    # -- construction ------------------------------------------------------

    @classmethod
    def zero(cls, domain: GridDomain, dim: int) -> "Chain":
        return cls(domain, dim, canonical=True)

    @classmethod
    def from_arrays(cls, domain: GridDomain, dim: int, block_ids, bases, coeff) -> "Chain":
        bases = np.asarray(bases, dtype=np.int64).reshape(-1, domain.n)
        return cls(domain, dim, domain.encode(dim, block_ids, bases), coeff)

    @classmethod
    def from_cells(cls, domain: GridDomain, dim: int, cells) -> "Chain":
        """Build from an iterable of ``(base, axes, coeff)`` triples."""
        cells = list(cells)
        if not cells:
            return cls.zero(domain, dim)
        block_ids = []
        for _, axes, _ in cells:
            axes = tuple(int(a) for a in axes)
            if len(axes) != dim or list(axes) != sorted(set(axes)):
                raise ValueError(f"axes {axes} are not {dim} strictly increasing indices")
            if axes and (axes[0] < 0 or axes[-1] >= domain.n):
                raise ValueError(f"axes {axes} out of range")
            block_ids.append(domain.block_index(dim, axes))
        bases = np.array([c[0] for c in cells], dtype=np.int64).reshape(-1, domain.n)
        coeff = np.array([c[2] for c in cells], dtype=np.float64)
        return cls.from_arrays(domain, dim, np.array(block_ids, dtype=np.int64), bases, coeff)

    @classmethod
    def vertex(cls, domain: GridDomain, point, weight: float = 1.0) -> "Chain":
        return cls.from_cells(domain, 0, [(point, (), weight)])

    # -- views -------------------------------------------------------------

    def __len__(self) -> int:
        return int(self.idx.size)

    def cells(self) -> tuple[np.ndarray, np.ndarray]:
        """Block ids and absolute bases of the support."""
        return self.domain.decode(self.dim, self.idx)

    def axes_mask(self) -> np.ndarray:
        block_ids, _ = self.cells()
        return self.domain.axes_masks(self.dim)[block_ids]

    def barycenters(self) -> np.ndarray:
        return self.domain.barycenters(self.dim, self.idx)

    def view(self) -> CellView:
        block_ids, bases = self.cells()
        masks = self.domain.axes_masks(self.dim)[block_ids]
        return CellView(bases, masks, (bases + 0.5 * masks) * self.domain.h, self.coeff)

    def to_cells(self) -> list:
        block_ids, bases = self.cells()
        blocks = self.domain.blocks(self.dim)
        return [
            (tuple(int(v) for v in b), blocks[k], float(c))
            for k, b, c in zip(block_ids.tolist(), bases, self.coeff.tolist())
        ]

    def dense(self) -> np.ndarray:
        out = np.zeros(self.domain.num_cells(self.dim))
        out[self.idx] = self.coeff
        return out

    @classmethod
    def from_dense(cls, domain: GridDomain, dim: int, values: np.ndarray, atol: float = 0.0) -> "Chain":
        values = np.asarray(values, dtype=np.float64)
        nz = np.flatnonzero(np.abs(values) > atol)
        return cls(domain, dim, nz, values[nz], canonical=True)

    # -- algebra -----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.idx.size == 0

    @property
    def is_integral(self) -> bool:
        return bool(np.all(self.coeff == np.round(self.coeff)))

    def _check(self, other: "Chain"):
        if other.domain != self.domain or other.dim != self.dim:
            raise ValueError("chains live on different domains or dimensions")

    def __add__(self, other: "Chain") -> "Chain":
        self._check(other)
        return Chain(self.domain, self.dim, np.concatenate([self.idx, other.idx]), np.concatenate([self.coeff, other.coeff]))

    def __neg__(self) -> "Chain":
        return Chain(self.domain, self.dim, self.idx, -self.coeff, canonical=True)

    def __sub__(self, other: "Chain") -> "Chain":
        return self + (-other)

    def __mul__(self, s: float) -> "Chain":
        if s == 0:
            return Chain.zero(self.domain, self.dim)
        return Chain(self.domain, self.dim, self.idx, self.coeff * float(s), canonical=True)

    __rmul__ = __mul__

    def equals(self, other: "Chain", atol: float = 0.0) -> bool:
        if other.domain != self.domain or other.dim != self.dim:
            return False
        diff = self - other
        return bool(diff.is_zero() or np.max(np.abs(diff.coeff)) <= atol)

    def __repr__(self) -> str:
        return f"Chain(dim={self.dim}, cells={len(self)}, mass={mass(self):.6g})"

    def rebase(self, domain: GridDomain) -> "Chain":
        """Same geometric chain re-indexed on another domain with equal n and h."""
        if domain.n != self.domain.n or domain.h != self.domain.h:
            raise ValueError("rebase needs equal dimension and spacing")
        if domain == self.domain:
            return self
        block_ids, bases = self.cells()
        return Chain(domain, self.dim, domain.encode(self.dim, block_ids, bases), self.coeff)

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        """Lattice bounding box (vertex coordinates) of the support."""
        if self.is_zero():
            raise ValueError("empty chain has no bounding box")
        block_ids, bases = self.cells()
        tops = bases + self.domain.axes_masks(self.dim)[block_ids]
        return bases.min(axis=0), tops.max(axis=0)


def _merge(idx: np.ndarray, coeff: np.ndarray):
    if idx.size == 0:
        return idx.astype(np.int64), coeff.astype(np.float64)
    uniq, inv = np.unique(idx, return_inverse=True)
    if uniq.size == idx.size:
        order = np.argsort(idx, kind="stable")
        idx, coeff = idx[order], coeff[order]
    else:
        coeff = np.bincount(inv, weights=coeff, minlength=uniq.size)
        idx = uniq
    keep = coeff != 0
    return idx[keep], coeff[keep]


# ---------------------------------------------------------------------------
# boundary and mass
# ---------------------------------------------------------------------------


def _boundary_parts(domain: GridDomain, m: int, block_ids, bases, coeff):
    """Face (block id, base, coeff) arrays of the boundary of the given cells."""
    blocks = domain.blocks(m)
    lookup = _block_lookup(domain.n, m - 1)
    out_b, out_base, out_c = [], [], []
    for k in np.unique(block_ids).tolist():
        sel = block_ids == k
        b = bases[sel]
        c = coeff[sel]
        axes = blocks[k]
        for pos, i in enumerate(axes):
            face = lookup[axes[:pos] + axes[pos + 1 :]]
            sign = 1.0 if pos % 2 == 0 else -1.0
            front = b.copy()
            front[:, i] += 1
            out_b += [np.full(len(c), face), np.full(len(c), face)]
            out_base += [front, b]
            out_c += [sign * c, -sign * c]
    if not out_b:
        return np.zeros(0, np.int64), np.zeros((0, domain.n), np.int64), np.zeros(0)
    return np.concatenate(out_b), np.vstack(out_base), np.concatenate(out_c)


def boundary(T: Chain) -> Chain:
    """Cubical boundary of ``T``."""
    if T.dim == 0:
        raise ValueError("no boundary in dimension 0")
    if T.is_zero():
        return Chain.zero(T.domain, T.dim - 1)
    block_ids, bases = T.cells()
    fb, fbase, fc = _boundary_parts(T.domain, T.dim, block_ids, bases, T.coeff)
    return Chain(T.domain, T.dim - 1, T.domain.encode(T.dim - 1, fb, fbase), fc)


@functools.lru_cache(maxsize=32)
def _boundary_matrix(domain: GridDomain, m: int) -> sp.csr_matrix:
    rows_n = domain.num_cells(m - 1)
    cols_n = domain.num_cells(m)
    if m < 1 or m > domain.n:
        raise ValueError(f"no boundary matrix in dimension {m}")
    idx = domain.all_cells(m)
    block_ids, bases = domain.decode(m, idx)
    fb, fbase, fc = _boundary_parts(domain, m, block_ids, bases, np.ones(len(idx)))
    rows = domain.encode(m - 1, fb, fbase)
    cols = _face_columns(block_ids, idx, m)
    mat = sp.csr_matrix((fc, (rows, cols)), shape=(rows_n, cols_n))
    mat.sum_duplicates()
    return mat


def _face_columns(block_ids, idx, m):
    # _boundary_parts emits faces grouped by block, then by face position, then
    # front/back, each in the original cell order within the block
    cols = []
    for k in np.unique(block_ids).tolist():
        sel = idx[block_ids == k]
        cols += [sel] * (2 * m)
    return np.concatenate(cols)


def mass_vector(T: Chain) -> np.ndarray:
    """Per-cell mass ``|coeff| h^m`` over the support of ``T`` (support order)."""
    return np.abs(T.coeff) * T.domain.h**T.dim


def mass(T: Chain) -> float:
    return float(np.abs(T.coeff).sum() * T.domain.h**T.dim)


def restrict(T: Chain, predicate) -> Chain:
    """Keep the coefficients of ``T`` where ``predicate`` holds.

    ``predicate`` is a boolean array over the support (in support order) or a
    callable taking a :class:`CellView` and returning such an array.
    """
    if T.is_zero():
        return T
    keep = predicate(T.view()) if callable(predicate) else predicate
    keep = np.asarray(keep, dtype=bool)
    if keep.shape != T.idx.shape:
        raise ValueError("predicate must give one boolean per support cell")
    return Chain(T.domain, T.dim, T.idx[keep], T.coeff[keep], canonical=True)


# ---------------------------------------------------------------------------
# translation, prisms, scaling, paths
# ---------------------------------------------------------------------------


def translate(T: Chain, v) -> Chain:
    """Translate ``T`` by the integer lattice vector ``v``."""
    v = np.asarray(v, dtype=np.int64).reshape(T.domain.n)
    if T.is_zero() or not v.any():
        return T
    block_ids, bases = T.cells()
    bases = bases + v
    if not np.all(T.domain.contains(T.dim, block_ids, bases)):
        raise ValueError("out of domain")
    # translation preserves the per-block row-major order
    return Chain(T.domain, T.dim, T.domain.encode(T.dim, block_ids, bases), T.coeff, canonical=True)


def _prism_parts(domain: GridDomain, dim: int, block_ids, bases, coeff, axis: int):
    """Cells of the unit prism ``P_axis`` applied to the given m-cells."""
    blocks = domain.blocks(dim)
    lookup = _block_lookup(domain.n, dim + 1)
    new_b = np.empty(len(block_ids), dtype=np.int64)
    sign = np.empty(len(block_ids))
    keep = np.ones(len(block_ids), dtype=bool)
    for k in np.unique(block_ids).tolist():
        sel = block_ids == k
        axes = blocks[k]
        if axis in axes:
            keep[sel] = False
            continue
        pos = sum(1 for a in axes if a < axis)
        new_b[sel] = lookup[tuple(sorted(axes + (axis,)))]
        sign[sel] = 1.0 if pos % 2 == 0 else -1.0
    return new_b[keep], bases[keep], (sign * coeff)[keep]


def prism(T: Chain, axis: int, step: int = 1) -> Chain:
    """Unit-shift homotopy chain along ``axis``; ``step`` is +1 or -1.

    Satisfies ``translate(T, step*e_axis) - T = boundary(prism(T)) + prism(boundary(T))``.
    """
    dom = T.domain
    if step not in (1, -1):
        raise ValueError("step must be +1 or -1")
    if step == -1:
        e = np.zeros(dom.n, dtype=np.int64)
        e[axis] = -1
        return -prism(translate(T, e), axis, 1)
    if T.is_zero():
        return Chain.zero(dom, T.dim + 1)
    block_ids, bases = T.cells()
    nb, nbase, nc = _prism_parts(dom, T.dim, block_ids, bases, T.coeff, axis)
    if not np.all(dom.contains(T.dim + 1, nb, nbase)):
        raise ValueError("out of domain")
    return Chain(dom, T.dim + 1, dom.encode(T.dim + 1, nb, nbase), nc)


def prism_fill(T: Chain, v) -> tuple[Chain, Chain]:
    """Homotopy chains ``(S, R)`` with ``translate(T, v) - T = boundary(S) + R``.

    The shift is realized by unit steps, axis by axis in increasing order.
    ``R`` is the prism of ``boundary(T)`` and vanishes for cycles.
    """
    dom = T.domain
    v = np.asarray(v, dtype=np.int64).reshape(dom.n)
    s_parts, r_parts = [], []
    cur = T
    bd = boundary(T) if T.dim > 0 else None
    cur_bd = bd
    for axis in range(dom.n):
        step = 1 if v[axis] > 0 else -1
        e = np.zeros(dom.n, dtype=np.int64)
        e[axis] = step
        for _ in range(abs(int(v[axis]))):
            s_parts.append(prism(cur, axis, step))
            if cur_bd is not None and not cur_bd.is_zero():
                r_parts.append(prism(cur_bd, axis, step))
            cur = translate(cur, e)
            if cur_bd is not None:
                cur_bd = translate(cur_bd, e)
    S = _sum_chains(dom, T.dim + 1, s_parts)
    R = _sum_chains(dom, T.dim, r_parts)
    return S, R


def _sum_chains(domain: GridDomain, dim: int, parts) -> Chain:
    if not parts:
        return Chain.zero(domain, dim)
    return Chain(domain, dim, np.concatenate([p.idx for p in parts]), np.concatenate([p.coeff for p in parts]))


def sum_chains(parts: Sequence[Chain]) -> Chain:
    """Sum of a nonempty list of chains with one merge pass."""
    parts = list(parts)
    if not parts:
        raise ValueError("need at least one chain")
    for p in parts[1:]:
        parts[0]._check(p)
    return _sum_chains(parts[0].domain, parts[0].dim, parts)


def refined_domain(domain: GridDomain, k: int) -> GridDomain:
    """Same physical box with spacing ``h / 2^k``."""
    f = 2**k
    return GridDomain(domain.n, domain.h / f, tuple(a * f for a in domain.lo), tuple(b * f for b in domain.hi))


def dyadic_scale(T: Chain, k: int, anchor=None, target: GridDomain | None = None) -> Chain:
    """Push ``T`` forward under ``x -> anchor*h_t + 2^{-k} x``.

    ``target`` defaults to :func:`refined_domain` ``(T.domain, k)``; its spacing
    must divide ``h 2^{-k}``.  Each m-cell maps onto the block of ``s^m`` target
    cells (``s = h 2^{-k} / h_t``) carrying the same coefficient.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    dom = T.domain
    target = refined_domain(dom, k) if target is None else target
    if target.n != dom.n:
        raise ValueError("refinement mismatch: dimensions differ")
    ratio = dom.h * 2.0**-k / target.h
    s = int(round(ratio))
    if s < 1 or abs(ratio - s) > 1e-12 * ratio:
        raise ValueError(f"refinement mismatch: h 2^-k / h_target = {ratio} is not an integer")
    anchor = np.zeros(dom.n, dtype=np.int64) if anchor is None else np.asarray(anchor, dtype=np.int64).reshape(dom.n)
    if T.is_zero():
        return Chain.zero(target, T.dim)
    block_ids, bases = T.cells()
    masks = dom.axes_masks(T.dim)[block_ids]
    start = anchor + s * bases
    if s == 1 or T.dim == 0:
        return Chain(target, T.dim, target.encode(T.dim, block_ids, start), T.coeff)
    offs = np.array(list(itertools.product(range(s), repeat=dom.n)), dtype=np.int64)
    ids, bs, cs = [], [], []
    for o in offs:
        ok = ~np.any((o[None, :] != 0) & ~masks, axis=1)
        ids.append(block_ids[ok])
        bs.append(start[ok] + o)
        cs.append(T.coeff[ok])
    ids = np.concatenate(ids)
    bs = np.vstack(bs)
    if not np.all(target.contains(T.dim, ids, bs)):
        raise ValueError("out of domain")
    return Chain(target, T.dim, target.encode(T.dim, ids, bs), np.concatenate(cs))


def chain_from_lattice_path(domain: GridDomain, path) -> Chain:
    """1-chain traced by a lattice path (consecutive vertices adjacent)."""
    pts = np.asarray(path, dtype=np.int64).reshape(-1, domain.n)
    if len(pts) < 2:
        return Chain.zero(domain, 1)
    steps = np.diff(pts, axis=0)
    if np.any(np.abs(steps).sum(axis=1) != 1):
        raise ValueError("consecutive path vertices must be lattice neighbours")
    axis = np.argmax(np.abs(steps), axis=1)
    sign = steps[np.arange(len(steps)), axis]
    bases = np.where((sign < 0)[:, None], pts[1:], pts[:-1])
    return Chain(domain, 1, domain.encode(1, axis, bases), sign.astype(np.float64))


def loop_erase(path) -> np.ndarray:
    """Chronological loop erasure of a vertex path."""
    out: list = []
    seen: dict = {}
    for p in map(tuple, np.asarray(path, dtype=np.int64)):
        if p in seen:
            cut = seen[p]
            for q in out[cut + 1 :]:
                del seen[q]
            out = out[: cut + 1]
        else:
            seen[p] = len(out)
            out.append(p)
    return np.array(out, dtype=np.int64)


def cells_where(domain: GridDomain, m: int, predicate: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """Dense indices of all m-cells whose (barycenter, axes mask) satisfy ``predicate``."""
    idx = domain.all_cells(m)
    block_ids, bases = domain.decode(m, idx)
    masks = domain.axes_masks(m)[block_ids]
    keep = predicate((bases + 0.5 * masks) * domain.h, masks)
    return idx[np.asarray(keep, dtype=bool)]
