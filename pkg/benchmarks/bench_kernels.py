"""Time the numba kernels against their numpy fallbacks.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--scale 1]

Each kernel runs on the same inputs through both paths.  The first numba
call (compilation, or loading the on-disk cache) is timed separately.
Results must agree to 1e-12 relative; the script exits nonzero otherwise.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from cubicochain import _kernels
from cubicochain.cochains import lattice_ball
from cubicochain.fixtures import sphere_like_cycle
from cubicochain.grid import GridDomain


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(scale: int, rng):
    # ball masses: growth profiles of a lattice circle
    d = GridDomain.box([64 * scale] * 3, 1 / 32, [-32 * scale] * 3)
    T = sphere_like_cycle(d, 1, 0.8 * scale)
    pts = T.barycenters()
    w = np.full(len(pts), d.h)
    yield "ball_mass", lambda u: _kernels.ball_mass(pts, w, pts, np.array([0.05, 0.1, 0.2, 0.4]), use_numba=u)

    # incident means: line integrals of a density over all edges
    d = GridDomain.box([40 * scale] * 3)
    vals = rng.random(d.cell_shape)
    blocks, bases = d.decode(1, d.all_cells(1))
    masks = d.axes_masks(1)[blocks]
    yield "incident_mean", lambda u: _kernels.incident_mean(vals, bases, masks, use_numba=u)

    # shifted sums: a form evaluated on every translate of a cycle
    d = GridDomain.box([48 * scale] * 3, 1 / 16)
    T = sphere_like_cycle(d, 1, 0.5 * scale, center=np.full(3, 1.5 * scale))
    coeff = rng.normal(size=d.num_cells(1))
    b, base = T.cells()
    shifts = lattice_ball(3, 6.0)
    args = (coeff, d.block_offsets(1), d.block_shapes(1), b, base - np.asarray(d.lo), T.coeff, shifts)
    yield "shifted_sum", lambda u: _kernels.shifted_sum(*args, use_numba=u)

    # neighbour maxima: Lipschitz quotients of a vertex field at radius 3
    grid = rng.random((160 * scale, 160 * scale))
    offs = lattice_ball(2, 3.0, include_origin=False)
    den = np.linalg.norm(offs, axis=1)
    yield "neighbor_max", lambda u: _kernels.neighbor_max(grid, offs, den, use_numba=u)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=int, default=1)
    a = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 0
    rng = np.random.default_rng(0)
    print(f"{'kernel':<15}{'first numba':>13}{'numba':>11}{'numpy':>11}{'speedup':>10}")
    ok = True
    for name, fn in cases(a.scale, rng):
        t0 = time.perf_counter()
        ref_nb = fn(True)
        first = time.perf_counter() - t0
        ref_np = fn(False)
        ok &= bool(np.allclose(ref_nb, ref_np, rtol=1e-12, atol=1e-12))
        t_nb = best_of(lambda: fn(True), a.repeat)
        t_np = best_of(lambda: fn(False), a.repeat)
        print(f"{name:<15}{first:>12.4f}s{t_nb:>10.4f}s{t_np:>10.4f}s{t_np / t_nb:>9.1f}x")
    print("outputs agree" if ok else "OUTPUTS DIFFER")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
