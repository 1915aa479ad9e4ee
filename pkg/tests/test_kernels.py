"""Numba kernels agree with their numpy fallbacks; the environment switch works."""

import os
import subprocess
import sys

import numpy as np
import pytest

from cubicochain import _kernels
from cubicochain.cochains import lattice_ball
from cubicochain.fixtures import square_cycle
from cubicochain.grid import GridDomain

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def test_ball_mass(rng):
    pts = rng.random((200, 3))
    w = rng.random(200)
    centers = rng.random((30, 3))
    radii = np.array([0.1, 0.3, 2.0])
    a = _kernels.ball_mass(pts, w, centers, radii, use_numba=True)
    b = _kernels.ball_mass(pts, w, centers, radii, use_numba=False)
    np.testing.assert_allclose(a, b, rtol=1e-13)
    np.testing.assert_allclose(a[-1], w.sum())


def test_incident_mean(rng):
    d = GridDomain.box([5, 4, 3])
    vals = rng.random(d.cell_shape)
    for m in range(4):
        idx = d.all_cells(m)
        blocks, bases = d.decode(m, idx)
        masks = d.axes_masks(m)[blocks]
        rel = bases - np.asarray(d.lo)
        a = _kernels.incident_mean(vals, rel, masks, use_numba=True)
        b = _kernels.incident_mean(vals, rel, masks, use_numba=False)
        np.testing.assert_allclose(a, b, rtol=1e-13)
    # top cells: the mean over the single incident cell is the value itself
    np.testing.assert_allclose(b, vals.ravel())


def test_shifted_sum(rng):
    d = GridDomain.box([8, 8], 0.5)
    T = square_cycle(d, (2, 2), 3)
    coeff = rng.normal(size=d.num_cells(1))
    blocks, bases = T.cells()
    shifts = lattice_ball(2, 2.0)
    args = (coeff, d.block_offsets(1), d.block_shapes(1), blocks, bases - np.asarray(d.lo), T.coeff, shifts)
    np.testing.assert_allclose(_kernels.shifted_sum(*args, use_numba=True), _kernels.shifted_sum(*args, use_numba=False), atol=1e-13)


def test_neighbor_max(rng):
    grid = rng.random((9, 7))
    offs = lattice_ball(2, 2.0, include_origin=False)
    denom = np.linalg.norm(offs, axis=1)
    a = _kernels.neighbor_max(grid, offs, denom, use_numba=True)
    b = _kernels.neighbor_max(grid, offs, denom, use_numba=False)
    np.testing.assert_allclose(a, b, rtol=1e-13)


def test_environment_switch():
    code = "from cubicochain import _kernels; print(_kernels.numba_enabled())"
    env = dict(os.environ, CUBICOCHAIN_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
    env["CUBICOCHAIN_NO_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "True"
