import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbox.zp import (Poly2, PolyMulti, check_prime, delta, difference_axis, finite_difference,
                     format_poly, fp_inv, is_additively_separable, lagrange_index_poly, parse_poly,
                     poly2_eval, poly2_interpolate)

from conftest import EXAMPLE_F


@pytest.mark.parametrize("p,x,expected", [(3, 2, 2), (5, 3, 2), (2, 1, 1)])
def test_fp_inv_examples(p, x, expected):
    assert fp_inv(x, p) == expected


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 97])
def test_fp_inv_all(p):
    for x in range(1, p):
        assert x * fp_inv(x, p) % p == 1


def test_fp_inv_zero():
    with pytest.raises(ZeroDivisionError):
        fp_inv(0, 7)


@pytest.mark.parametrize("bad", [1, 4, 9, 100, 101])
def test_check_prime_rejects(bad):
    with pytest.raises(ValueError):
        check_prime(bad)


def test_eval_examples():
    f = parse_poly(EXAMPLE_F, 3)
    assert poly2_eval(f, 1, 1) == 0
    g = parse_poly("x*y + 2*x + 1", 3)
    assert g(2, 2) == 0
    h = parse_poly("4*x + 3*y + 2", 5)
    assert h(0, 0) == 2


def test_eval_modulus_mismatch():
    with pytest.raises(ValueError):
        parse_poly("x", 3) + parse_poly("x", 5)


def test_interpolate_and():
    table = [[x & y for y in range(2)] for x in range(2)]
    assert poly2_interpolate(table, 2) == Poly2(2, {(1, 1): 1})


def test_interpolate_roundtrip_example():
    f1 = parse_poly("2*x*y^2 + y + 2", 3)
    assert poly2_interpolate(f1.table(), 3) == f1
    assert poly2_interpolate({(x, y): f1(x, y) for x in range(3) for y in range(3)}, 3) == f1


def test_interpolate_incomplete():
    with pytest.raises(ValueError):
        poly2_interpolate({(0, 0): 1}, 2)
    with pytest.raises(ValueError):
        poly2_interpolate([[0, 1]], 2)


@pytest.mark.parametrize("p", [2, 3])
def test_interpolate_exhaustive(p):
    for flat in itertools.product(range(p), repeat=p * p):
        table = [list(flat[x * p:(x + 1) * p]) for x in range(p)]
        f = poly2_interpolate(table, p)
        assert f.table() == table


def test_interpolate_random_p5(rng):
    for _ in range(30):
        table = rng.integers(5, size=(5, 5)).tolist()
        assert poly2_interpolate(table, 5).table() == table


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=49, max_size=49))
def test_interpolate_roundtrip_p7(flat):
    table = [flat[7 * x:7 * x + 7] for x in range(7)]
    assert poly2_interpolate(table, 7).table() == table


def test_finite_difference_example_chain():
    f = parse_poly(EXAMPLE_F, 3)
    f1 = finite_difference(f, "x")
    assert f1 == parse_poly("2*x*y^2 + y + 2", 3)
    assert finite_difference(f1, "y") == parse_poly("x*y + 2*x + 1", 3)


@pytest.mark.parametrize("axis", ["x", "y"])
def test_finite_difference_constant(axis):
    assert finite_difference(parse_poly("2", 5), axis).is_zero()


def test_finite_difference_bad_axis():
    with pytest.raises(ValueError):
        finite_difference(parse_poly("x", 3), "z")


poly_tables = st.integers(0, 4).flatmap(
    lambda _: st.lists(st.integers(0, 4), min_size=25, max_size=25))


@settings(max_examples=40, deadline=None)
@given(poly_tables, st.sampled_from(["x", "y"]))
def test_finite_difference_commutes_with_eval(flat, axis):
    p = 5
    f = poly2_interpolate([flat[5 * x:5 * x + 5] for x in range(5)], p)
    d = finite_difference(f, axis)
    for a in range(p):
        for b in range(p):
            shifted = f(a + 1, b) if axis == "x" else f(a, b + 1)
            assert d(a, b) == (shifted - f(a, b)) % p


def test_delta_examples():
    assert delta(parse_poly(EXAMPLE_F, 3)) == 4
    assert delta(parse_poly("2*x*y^2 + y + 2", 3)) == 3
    assert delta(parse_poly("x^2 + 2*y + 1", 3)) == 0
    assert delta(parse_poly("0", 3)) == 0


@pytest.mark.parametrize("text,p,expected", [
    ("x^2 + 2*y", 3, True),
    ("x*y + 2*x + 1", 3, False),
    ("x*y", 2, False),
])
def test_separable(text, p, expected):
    assert is_additively_separable(parse_poly(text, p)) is expected


@pytest.mark.parametrize("p", [2, 3])
def test_separable_matches_definition(p):
    # brute force: f separable iff f(x,y) - f(x,0) - f(0,y) + f(0,0) == 0 everywhere
    for flat in itertools.product(range(p), repeat=p * p):
        table = [list(flat[x * p:(x + 1) * p]) for x in range(p)]
        direct = all((table[x][y] - table[x][0] - table[0][y] + table[0][0]) % p == 0
                     for x in range(p) for y in range(p))
        f = poly2_interpolate(table, p)
        assert is_additively_separable(f) == direct
        assert (delta(f) >= 2) == (not direct)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=25, max_size=25))
def test_delta_drops_by_one(flat):
    f = poly2_interpolate([flat[5 * x:5 * x + 5] for x in range(5)], 5)
    if delta(f) >= 3:
        assert delta(finite_difference(f, difference_axis(f))) == delta(f) - 1


def test_difference_axis_prefers_x():
    assert difference_axis(parse_poly("x^2*y + x*y^2", 5)) == "x"
    assert difference_axis(parse_poly("x*y^2 + x^2*y^0", 5)) == "y"


def test_lagrange_p2_n2():
    assert lagrange_index_poly(2, 2) == [[1, 0], [1, 1]]


def test_lagrange_n1():
    assert lagrange_index_poly(7, 1) == [[1]]


@pytest.mark.parametrize("p,N", [(2, 2), (3, 2), (3, 3), (5, 4), (5, 5)])
def test_lagrange_identity_exhaustive(p, N):
    F = lagrange_index_poly(p, N)
    for xs in itertools.product(range(p), repeat=N):
        for y in range(N):
            val = sum(pow(y, k, p) * sum(c * v for c, v in zip(F[k], xs)) for k in range(N)) % p
            assert val == xs[y]


def test_lagrange_too_long():
    with pytest.raises(ValueError):
        lagrange_index_poly(3, 4)


def test_parse_format_roundtrip():
    f = parse_poly(EXAMPLE_F, 3)
    assert format_poly(f) == EXAMPLE_F.replace(" ", "").replace("+", " + ")
    assert parse_poly(format_poly(f), 3) == f
    assert parse_poly("5*x^4", 3) == parse_poly("2*x^2", 3)  # x^3 == x on Z_3
    assert parse_poly("x*x*y", 3) == parse_poly("x^2*y", 3)


@pytest.mark.parametrize("text", ["", "x +", "3x", "x^", "z", "x**2", "x - y"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_poly(text, 3)


def test_polymulti_from_function():
    F = PolyMulti.from_function(lambda xs, ys: xs[0] * ys[0] + xs[1] * ys[1] + xs[0], 2, 2, 2)
    assert len(F.terms) == 3
    for xs in itertools.product(range(2), repeat=2):
        for ys in itertools.product(range(2), repeat=2):
            assert F(xs, ys) == (xs[0] * ys[0] + xs[1] * ys[1] + xs[0]) % 2


def test_polymulti_from_poly2():
    f = parse_poly(EXAMPLE_F, 3)
    F = PolyMulti.from_poly2(f)
    assert all(F((x,), (y,)) == f(x, y) for x in range(3) for y in range(3))
