"""Discrete forms, cochains, upper norms and gradients, Lipschitz fields and translates."""

import math

import numpy as np
import pytest

from cubicochain.cochains import (
    CallableCochain,
    DiscreteForm,
    FormCochain,
    ScalarField,
    add_cochains,
    average_translate,
    check_upper_gradient,
    check_upper_norm,
    eval_form,
    exterior_derivative,
    lattice_ball,
    lip_field,
    morrey_upper_gradient,
    negate,
    norm_constant,
    sobolev_norm,
    translate_field,
    translate_path_bound,
    translate_step_bound,
    translate_values,
    tuple_cochain,
    tuple_upper_gradient_density,
    tuple_upper_norm_density,
    upper_gradient_density,
    upper_norm_density,
    zero_cochain,
)
from cubicochain.fixtures import segment, solid_cube, square_cycle
from cubicochain.grid import Chain, GridDomain, boundary, translate

from .conftest import random_chain


def random_form(domain, m, rng, integer=False):
    k = domain.num_cells(m)
    coeff = rng.integers(-4, 5, size=k).astype(float) if integer else rng.normal(size=k)
    return DiscreteForm(domain, m, coeff)


def smooth_form(domain, m):
    def fn(bary, masks):
        x = bary
        base = np.sin(1.3 * x[:, 0] + 0.4) * np.cos(0.7 * x[:, -1]) + 0.3 * x[:, 0] * x[:, -1]
        sign = 1.0 + 0.5 * np.argmax(masks, axis=1) if m > 0 else 1.0
        return base * sign

    return DiscreteForm.from_function(domain, m, fn)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_d_squared_zero_exact(n, rng):
    d = GridDomain.box([3] * n, 0.5)
    for m in range(n - 1):
        for _ in range(10):
            w = random_form(d, m, rng, integer=True)
            dd = exterior_derivative(exterior_derivative(w))
            assert np.all(dd.coeff == 0.0)


def test_stokes(rng):
    d = GridDomain.box([4, 4, 4], 0.25)
    for m in range(3):
        for _ in range(10):
            w = random_form(d, m, rng)
            S = random_chain(d, m + 1, rng)
            assert abs(eval_form(exterior_derivative(w), S) - eval_form(w, boundary(S))) <= 1e-12


def test_eval_form_checks():
    d = GridDomain.box([3, 3])
    w = DiscreteForm(d, 1, np.ones(d.num_cells(1)))
    with pytest.raises(ValueError):
        eval_form(w, Chain.zero(d, 2))
    with pytest.raises(ValueError):
        DiscreteForm(d, 1, np.ones(3))
    with pytest.raises(ValueError):
        exterior_derivative(DiscreteForm(d, 2, np.ones(d.num_cells(2))))


def test_form_arithmetic():
    d = GridDomain.box([3, 3], 0.5)
    a = smooth_form(d, 1)
    T = segment(d, (0, 1), 3)
    assert (a + a * 2.0)(T) == pytest.approx(3 * a(T))
    assert negate(FormCochain(a))(T) == pytest.approx(-a(T))


def test_norm_constants():
    assert norm_constant(3, 1) == pytest.approx(math.sqrt(3))
    assert norm_constant(4, 2) == pytest.approx(math.sqrt(6))
    assert norm_constant(3, 3) == 1.0


@pytest.mark.parametrize("n", [2, 3])
def test_upper_norm_and_gradient_random_pairs(n, rng):
    d = GridDomain.box([5] * n, 0.25)
    for m in range(n):
        for w in (smooth_form(d, m), random_form(d, m, rng)):
            om = FormCochain(w)
            fam = [random_chain(d, m, rng, cells=5) for _ in range(10)]
            assert check_upper_norm(om, upper_norm_density(w), fam).passed
            fillings = [random_chain(d, m + 1, rng, cells=5) for _ in range(10)]
            pairs = [(boundary(S), S) for S in fillings]
            assert check_upper_gradient(om, upper_gradient_density(w), pairs).passed


def test_upper_gradient_rejects_bad_pair():
    d = GridDomain.box([4, 4])
    w = smooth_form(d, 1)
    S = solid_cube(d, 2, 2)
    with pytest.raises(ValueError, match="boundary"):
        check_upper_gradient(FormCochain(w), upper_gradient_density(w), [(square_cycle(d, (1, 1), 2), S)])


def test_upper_norm_too_small_fails():
    d = GridDomain.box([4, 4], 0.5)
    w = smooth_form(d, 1)
    fam = [segment(d, (0, k), 4) for k in range(5)]
    small = upper_norm_density(w) * 0.1
    rep = check_upper_norm(FormCochain(w), small, fam)
    assert not rep.passed
    assert rep.min_margin < 0


def affine(domain, a, b=0.0):
    return ScalarField.from_function(domain, lambda x: x @ np.asarray(a, dtype=float) + b)


@pytest.mark.parametrize("n,m", [(2, 1), (3, 1), (3, 2)])
def test_tuple_cochain_affine(n, m, rng):
    d = GridDomain.box([4] * n, 0.5)
    for _ in range(5):
        f = affine(d, rng.normal(size=n), 0.3)
        pis = [affine(d, rng.normal(size=n)) for _ in range(m)]
        om = tuple_cochain(f, pis)
        fam = [random_chain(d, m, rng, cells=6) for _ in range(10)]
        assert check_upper_norm(om, tuple_upper_norm_density(f, pis, d), fam).passed
        if m < n:
            pairs = [(boundary(S), S) for S in (random_chain(d, m + 1, rng, cells=6) for _ in range(10))]
            assert check_upper_gradient(om, tuple_upper_gradient_density(f, pis, d), pairs).passed


def test_tuple_cochain_matches_form_and_is_closed_on_boundaries():
    d = GridDomain.box([4, 4], 0.5)
    f = affine(d, [1.0, 0.0], 1.0)
    pi = affine(d, [0.0, 1.0])
    om = tuple_cochain(f, [pi])
    w = om.as_form(d)
    T = segment(d, (0, 0), 4, axis=1)
    assert om(T) == pytest.approx(w(T))
    # f = 1 + x, pi = y: integral of (1 + x) dy over a vertical segment at x = 0
    assert om(T) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        om(Chain.vertex(d, (0, 0)))


def test_zero_cochain_and_sum():
    d = GridDomain.box([3, 3], 1.0)
    u = affine(d, [1.0, 2.0])
    c = zero_cochain(u)
    T = Chain.vertex(d, (1, 1)) * 2.0 - Chain.vertex(d, (0, 0))
    assert c(T) == pytest.approx(6.0)
    s = add_cochains(c, CallableCochain(lambda T: math.inf))
    assert math.isinf(s(T))
    assert s(Chain.zero(d, 0)) == 0.0


def test_lattice_ball():
    assert len(lattice_ball(2, 1.0)) == 5
    assert len(lattice_ball(3, 1.0, include_origin=False)) == 6


def test_lip_field_linear():
    d = GridDomain.box([8, 8], 0.25)
    u = affine(d, [2.0, 0.0])
    est = lip_field(u)
    assert np.all(est.lip <= est.Lip + 1e-12)
    np.testing.assert_allclose(est.Lip, 2.0)
    with pytest.raises(ValueError):
        lip_field(u, [0.1])
    with pytest.raises(ValueError):
        lip_field(u, [])


def test_morrey_upper_gradient_on_edges():
    d = GridDomain.box([10, 10], 0.2)
    u = ScalarField.from_function(d, lambda x: np.sin(3 * x[:, 0]) * np.cos(2 * x[:, 1]))
    g = morrey_upper_gradient(u, d)
    c = zero_cochain(u)
    pairs = []
    for idx in d.all_cells(1):
        S = Chain(d, 1, [idx], [1.0])
        pairs.append((boundary(S), S))
    assert check_upper_gradient(c, g, pairs).passed


def test_sobolev_norm_picks_smallest_valid():
    d = GridDomain.box([4, 4], 0.5)
    w = smooth_form(d, 1)
    om = FormCochain(w)
    fam = [segment(d, (0, k), 4) for k in range(5)]
    pairs = [(boundary(S), S) for S in [solid_cube(d, 2, 2, (1, 1))]]
    h, g = upper_norm_density(w), upper_gradient_density(w)
    val = sobolev_norm(om, [h * 0.01, h, h * 2], [g, g * 3], 2.0, 2.0, fam, pairs)
    assert val == pytest.approx(h.norm(2.0) + g.norm(2.0))
    assert math.isinf(sobolev_norm(om, [h * 0.01], [g], 2.0, 2.0, fam, pairs))


def test_translate_values_kernel_matches_direct():
    d = GridDomain.box([8, 8], 0.5)
    w = smooth_form(d, 1)
    T = square_cycle(d, (2, 2), 2)
    shifts = lattice_ball(2, 2.0)
    direct = np.array([w(translate(T, x)) for x in shifts])
    for use in (True, False):
        np.testing.assert_allclose(translate_values(FormCochain(w), T, shifts, use_numba=use), direct, atol=1e-13)
    np.testing.assert_allclose(translate_values(CallableCochain(w), T, shifts), direct, atol=1e-13)
    with pytest.raises(ValueError):
        translate_values(FormCochain(w), T, [(6, 0)])


def test_translate_field_and_average():
    d = GridDomain.box([8, 8], 0.5)
    w = smooth_form(d, 1)
    T = square_cycle(d, (3, 3), 2)
    fld = translate_field(FormCochain(w), T, (-1, -1), (1, 1))
    assert fld.values.shape == (3, 3)
    assert fld.values[1, 1] == pytest.approx(abs(w(T)))
    avg = average_translate(FormCochain(w), T, 0.5)
    assert avg == pytest.approx(np.mean([abs(w(translate(T, x))) for x in lattice_ball(2, 1.0)]))
    with pytest.raises(ValueError):
        average_translate(FormCochain(w), T, 0.1)


def test_translate_step_bound_dominates(rng):
    d = GridDomain.box([10, 10, 10], 0.25)
    w = smooth_form(d, 1)
    om = FormCochain(w)
    g, h = upper_gradient_density(w), upper_norm_density(w)
    T = translate(segment(d, (0, 0, 0), 3), (3, 3, 3))
    for _ in range(20):
        x = rng.integers(-2, 3, size=3)
        axis = int(rng.integers(3))
        step = int(rng.choice([-1, 1]))
        e = np.zeros(3, dtype=int)
        e[axis] = step
        diff = abs(om(translate(T, x + e)) - om(translate(T, x)))
        assert diff <= translate_step_bound(T, g, h, x, axis, step) + 1e-12
    path = np.array([(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1)])
    total = abs(om(translate(T, path[-1])) - om(T))
    assert total <= translate_path_bound(T, g, h, path) + 1e-12
    with pytest.raises(ValueError):
        translate_path_bound(T, g, h, np.array([(0, 0, 0), (2, 0, 0)]))
