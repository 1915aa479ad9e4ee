"""Cells, chains, boundary, mass, translation, prisms and dyadic rescaling."""

import numpy as np
import pytest

from cubicochain.fixtures import cube_boundary_cycle, segment, solid_cube, sphere_like_cycle, zerocap_counts, zerocap_current
from cubicochain.grid import (
    Chain,
    GridDomain,
    boundary,
    chain_from_lattice_path,
    dyadic_scale,
    loop_erase,
    mass,
    prism,
    prism_fill,
    restrict,
    translate,
)

from .conftest import random_chain


def test_domain_validation():
    with pytest.raises(ValueError):
        GridDomain(2, 1.0, (0, 0), (0, 3))
    with pytest.raises(ValueError):
        GridDomain(2, -1.0, (0, 0), (2, 3))
    with pytest.raises(ValueError):
        GridDomain(2, 1.0, (0,), (2,))


def test_encode_decode_roundtrip(rng):
    d = GridDomain.box([3, 4, 2], 0.5, [-1, 2, 0])
    for m in range(4):
        idx = d.all_cells(m)
        assert idx.size == d.num_cells(m)
        blocks, bases = d.decode(m, idx)
        np.testing.assert_array_equal(d.encode(m, blocks, bases), idx)


def test_cell_counts_2d():
    d = GridDomain.box([3, 2])
    assert d.num_cells(0) == 12
    assert d.num_cells(1) == 3 * 3 + 4 * 2
    assert d.num_cells(2) == 6


def test_chain_merges_duplicates():
    d = GridDomain.box([3, 3])
    T = Chain(d, 1, [2, 2, 5], [1.0, -1.0, 3.0])
    assert len(T) == 1
    assert T.coeff[0] == 3.0


def test_boundary_of_unit_square():
    d = GridDomain.box([2, 2])
    T = boundary(solid_cube(d, 2))
    assert len(T) == 4
    assert mass(T) == 4.0
    assert boundary(T).is_zero()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_boundary_squared_zero(n, rng):
    d = GridDomain.box([3] * n, 0.5)
    for m in range(2, n + 1):
        for _ in range(20):
            T = random_chain(d, m, rng, cells=8)
            assert boundary(boundary(T)).is_zero()


def test_boundary_of_vertex_chain_raises_or_zero():
    d = GridDomain.box([2, 2])
    with pytest.raises(ValueError):
        boundary(Chain.vertex(d, (0, 0)))


def test_boundary_matrix_matches_operator(rng):
    d = GridDomain.box([3, 3, 2])
    for m in (1, 2, 3):
        T = random_chain(d, m, rng)
        B = d.boundary_matrix(m)
        np.testing.assert_array_equal(B @ T.dense(), boundary(T).dense())


def test_mass_scales_with_h():
    for h in (1.0, 0.5, 0.125):
        d = GridDomain.box([4, 4, 4], h)
        assert mass(cube_boundary_cycle(d, 1, 2)) == pytest.approx(8 * h)
        assert mass(cube_boundary_cycle(d, 2, 2)) == pytest.approx(24 * h**2)


def test_translate_commutes_with_boundary(rng):
    d = GridDomain.box([6, 6, 6])
    T = solid_cube(d, 2, 2, (1, 1, 1))
    v = np.array([2, -1, 1])
    assert boundary(translate(T, v)).equals(translate(boundary(T), v))
    with pytest.raises(ValueError):
        translate(T, (5, 0, 0))


def test_prism_homotopy_formula(rng):
    d = GridDomain.box([8, 8, 8])
    for _ in range(20):
        T = translate(random_chain(GridDomain.box([3, 3, 3]), 1, rng).rebase(d), (2, 2, 2))
        v = rng.integers(-2, 3, size=3)
        S, R = prism_fill(T, v)
        # tau T - T = dS + R, with R built from the boundary of T
        lhs = translate(T, v) - T
        assert lhs.equals(boundary(S) + R)
        assert mass(S) <= 2 * np.abs(v).sum() * mass(T) + 1e-12


def test_prism_single_axis_mass():
    d = GridDomain.box([6, 6])
    T = segment(d, (1, 1), 3)
    P = prism(T, 1, 1)
    assert mass(P) == pytest.approx(3.0)
    assert (translate(T, (0, 1)) - T).equals(boundary(P) + prism(boundary(T), 1, 1))
    with pytest.raises(ValueError):
        prism(T, 1, 2)


def test_restrict_and_bbox():
    d = GridDomain.box([6, 6])
    T = segment(d, (0, 2), 6)
    half = restrict(T, lambda view: view.barycenter[:, 0] < 3)
    assert mass(half) == 3.0
    lo, hi = T.bbox()
    np.testing.assert_array_equal(lo, [0, 2])
    np.testing.assert_array_equal(hi, [6, 2])


def test_dyadic_scale_masses():
    d = GridDomain.box([8, 8], 1.0, [-4, -4])
    T = cube_boundary_cycle(d, 1, 2, (-1, -1))
    for k in (1, 2, 3):
        Tk = dyadic_scale(T, k)
        assert mass(Tk) == pytest.approx(mass(T) / 2**k)
        assert boundary(Tk).is_zero()


def test_lattice_path_and_loop_erase():
    d = GridDomain.box([4, 4])
    path = np.array([(0, 0), (1, 0), (1, 1), (1, 0), (2, 0)])
    le = loop_erase(path)
    np.testing.assert_array_equal(le, [(0, 0), (1, 0), (2, 0)])
    P = chain_from_lattice_path(d, le)
    assert boundary(P).equals(Chain.vertex(d, (2, 0)) - Chain.vertex(d, (0, 0)))


def test_sphere_like_cycle_closed():
    d = GridDomain.box([16, 16, 16], 0.25, [-8, -8, -8])
    S = sphere_like_cycle(d, 1, 1.0)
    assert boundary(S).is_zero()
    assert mass(S) > 2 * np.pi * 0.9


def test_zerocap_counts_and_current():
    assert zerocap_counts(1, 1, 1) == (1, 2)
    assert zerocap_counts(3, 1, 1)[1] == 0
    T = zerocap_current(3, 1.0, 1, 3)
    assert boundary(T).is_zero()
    assert zerocap_current(0, 1.0, 1, 3).is_zero()
    with pytest.raises(ValueError):
        zerocap_current(2, 2.5, 1, 3)
