"""Sphere-core tests: points, chordal metric, roots, maps, derivative norms."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ratsemi.sphere import (
    INF,
    BIG_MODULUS,
    Polynomial,
    RationalMap,
    SpherePoint,
    chordal_distance,
    chordal_distance_many,
    polynomial_map,
    poly_roots,
    sphere_embed,
)

import oracles

RNG = np.random.default_rng(20260815)


def rand_complex(rng, n, scale=1.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def random_rational_map(rng, max_num_deg=4, max_den_deg=2):
    """A validated random map; retries on accidental shared roots."""
    for _ in range(50):
        dn = rng.integers(1, max_num_deg + 1)
        dd = rng.integers(0, max_den_deg + 1)
        num = rand_complex(rng, dn + 1)
        den = rand_complex(rng, dd + 1) if dd > 0 else np.array([1.0 + 0j])
        num[-1] += 1.0  # keep the leading coefficient well away from zero
        if dd > 0:
            den[-1] += 1.0
        try:
            return RationalMap(num, den)
        except ValueError:
            continue
    raise AssertionError("could not build a random map")


# ---------------------------------------------------------------------------
# points and metric


def test_overflow_and_nan_route_to_infinity():
    assert SpherePoint.of(complex(2.0 * BIG_MODULUS, 0.0)) is INF or SpherePoint.of(
        complex(2.0 * BIG_MODULUS, 0.0)
    ).is_infinite
    assert SpherePoint.of(complex(float("nan"), 0.0)).is_infinite
    assert SpherePoint.of(complex(0.0, float("inf"))).is_infinite
    assert not SpherePoint.of(1.0 + 2.0j).is_infinite


def test_chordal_reference_values():
    assert chordal_distance(0.0, INF) == pytest.approx(2.0, abs=1e-15)
    assert chordal_distance(1.0, -1.0) == pytest.approx(2.0, abs=1e-15)
    assert chordal_distance(INF, INF) == 0.0
    assert chordal_distance(3.0 + 4.0j, 3.0 + 4.0j) == 0.0
    # antipode of z is -1/conj(z); distance must be exactly 2
    z = 0.7 - 0.2j
    assert chordal_distance(z, -1.0 / z.conjugate()) == pytest.approx(2.0, rel=1e-12)


def test_chordal_matches_bruteforce_including_infinity():
    rng = np.random.default_rng(7)
    pts = list(rand_complex(rng, 40, scale=3.0)) + ["inf"]
    for a in pts:
        for b in pts:
            lib = chordal_distance(
                INF if isinstance(a, str) else a, INF if isinstance(b, str) else b
            )
            assert lib == pytest.approx(oracles.chordal_bf(a, b), abs=1e-13)


finite_pts = st.complex_numbers(
    max_magnitude=1e8, allow_nan=False, allow_infinity=False
)
sphere_pts = st.one_of(finite_pts, st.just("inf"))


def _pt(x):
    return INF if isinstance(x, str) else SpherePoint.of(x)


@settings(max_examples=300, deadline=None)
@given(sphere_pts, sphere_pts, sphere_pts)
def test_chordal_metric_axioms(a, b, c):
    pa, pb, pc = _pt(a), _pt(b), _pt(c)
    dab = chordal_distance(pa, pb)
    assert dab == chordal_distance(pb, pa)
    assert 0.0 <= dab <= 2.0 + 1e-15
    assert chordal_distance(pa, pa) == 0.0
    assert dab <= chordal_distance(pa, pc) + chordal_distance(pc, pb) + 1e-12


def test_chordal_many_matches_scalar():
    rng = np.random.default_rng(11)
    z1 = rand_complex(rng, 30, 5.0)
    z2 = rand_complex(rng, 30, 5.0)
    i1 = rng.random(30) < 0.2
    i2 = rng.random(30) < 0.2
    d = chordal_distance_many(z1, i1, z2, i2)
    for k in range(30):
        a = INF if i1[k] else z1[k]
        b = INF if i2[k] else z2[k]
        assert d[k] == pytest.approx(chordal_distance(a, b), abs=1e-14)


def test_sphere_embedding_is_isometric_to_chordal():
    rng = np.random.default_rng(3)
    z = rand_complex(rng, 25, 4.0)
    inf = np.zeros(25, dtype=bool)
    inf[-1] = True
    X = sphere_embed(z, inf)
    for i in range(25):
        for j in range(25):
            a = INF if inf[i] else z[i]
            b = INF if inf[j] else z[j]
            assert np.linalg.norm(X[i] - X[j]) == pytest.approx(
                chordal_distance(a, b), abs=1e-12
            )


# ---------------------------------------------------------------------------
# polynomial roots


def test_cubic_roots_of_eight():
    roots = poly_roots([-8.0, 0.0, 0.0, 1.0])
    expect = oracles.sorted_points(oracles.np_roots([-8.0, 0.0, 0.0, 1.0]))
    got = oracles.sorted_points(roots)
    for g, e in zip(got, expect):
        assert abs(g - e) < 1e-10
    assert any(abs(r - 2.0) < 1e-12 for r in roots)


def test_roots_meet_residual_bound_on_random_polynomials():
    rng = np.random.default_rng(101)
    for _ in range(200):
        deg = int(rng.integers(1, 9))
        c = rand_complex(rng, deg + 1)
        c /= np.max(np.abs(c))  # coefficients in the closed unit disc
        if abs(c[-1]) < 1e-3:
            c[-1] = 1e-3 + 0.0j
        roots = poly_roots(c)
        assert len(roots) == deg
        p = Polynomial(c)
        for r in roots:
            bound = 1e-8 * (1.0 + np.max(np.abs(c))) * (1.0 + abs(r)) ** deg
            assert abs(p(r)) <= bound


def test_roots_match_companion_matrix_solver():
    rng = np.random.default_rng(55)
    for _ in range(40):
        deg = int(rng.integers(2, 7))
        c = rand_complex(rng, deg + 1)
        c[-1] += 1.0
        got = oracles.sorted_points(poly_roots(c))
        ref = oracles.sorted_points(oracles.np_roots(c))
        for g, e in zip(got, ref):
            assert abs(g - e) <= 1e-6 * (1.0 + abs(e))


def test_multiple_root_reported_with_multiplicity():
    # (z - 1)^2 (z + 2) = z^3 - 3 z + 2
    roots = poly_roots([2.0, -3.0, 0.0, 1.0])
    near_one = [r for r in roots if abs(r - 1.0) < 1e-5]
    near_neg2 = [r for r in roots if abs(r + 2.0) < 1e-8]
    assert len(near_one) == 2 and len(near_neg2) == 1


def test_roots_deterministic():
    c = [0.3 - 1.0j, 0.0, 2.0, -0.7j, 1.0]
    assert poly_roots(c) == poly_roots(c)


# ---------------------------------------------------------------------------
# rational map evaluation


def test_eval_scaled_square():
    f = RationalMap([0.0, 0.0, 0.25])
    assert f(2.0).value == pytest.approx(1.0)


def test_eval_at_infinity_follows_degree_comparison():
    assert polynomial_map([0.0, 0.0, 1.0])(INF).is_infinite          # z^2
    assert RationalMap([1.0], [0.0, 0.0, 1.0])(INF).value == 0.0     # 1/z^2
    f = RationalMap([1.0, 0.0, 2.0], [0.0, 0.0, 1.0])                # (2z^2+1)/z^2
    assert f(INF).value == pytest.approx(2.0)


def test_eval_pole_gives_infinity():
    f = RationalMap([1.0], [0.0, 1.0])  # 1/z
    assert f(0.0).is_infinite
    g = RationalMap([1.0, 0.0, 1.0], [-1.0, 1.0])  # (z^2+1)/(z-1)
    assert g(1.0).is_infinite


def test_eval_overflow_routes_to_infinity():
    f = polynomial_map([0.0, 0.0, 0.0, 1.0])  # z^3
    assert f(1e60).is_infinite


def test_eval_many_matches_scalar():
    rng = np.random.default_rng(21)
    for _ in range(10):
        f = random_rational_map(rng)
        z = rand_complex(rng, 50, scale=3.0)
        vals, inf = f.eval_many(z)
        for k in range(50):
            ref = f(z[k])
            if inf[k]:
                assert ref.is_infinite
            else:
                assert not ref.is_infinite
                assert chordal_distance(vals[k], ref) < 1e-10


# ---------------------------------------------------------------------------
# spherical derivative norm


def test_derivative_norm_of_square_at_one():
    f = polynomial_map([0.0, 0.0, 1.0])
    assert f.spherical_derivative_norm(1.0) == pytest.approx(2.0, rel=1e-14)


def test_derivative_norm_of_powers_on_circle():
    for d in (2, 3, 4, 5):
        coeffs = [0.0] * d + [1.0]
        f = polynomial_map(coeffs)
        for k in range(16):
            z = np.exp(2j * np.pi * k / 16)
            assert f.spherical_derivative_norm(z) == pytest.approx(float(d), rel=1e-12)


def test_derivative_norm_matches_quotient_rule_formula():
    rng = np.random.default_rng(31)
    for _ in range(15):
        f = random_rational_map(rng)
        for z in rand_complex(rng, 8, scale=0.9):
            denom = f.den(z)
            if abs(denom) < 1e-3:
                continue
            ref = oracles.sph_deriv_bf(f.num.coeffs, f.den.coeffs, z)
            assert f.spherical_derivative_norm(z) == pytest.approx(ref, rel=1e-10)


def test_derivative_norm_chart_consistency_on_overlap():
    rng = np.random.default_rng(41)
    for _ in range(15):
        f = random_rational_map(rng)
        r = rng.uniform(0.5, 2.0, size=12)
        th = rng.uniform(0.0, 2.0 * np.pi, size=12)
        z = r * np.exp(1j * th)
        fwd = f._deriv_fwd(z)
        rev = f._deriv_rev(1.0 / z)
        ok = fwd > 1e-12  # skip points essentially on a critical point
        assert np.allclose(fwd[ok], rev[ok], rtol=1e-10)


def test_derivative_norm_finite_at_infinity_and_poles():
    f = polynomial_map([0.0, 0.0, 1.0])  # z^2: superattracting at infinity
    assert f.spherical_derivative_norm(INF) == pytest.approx(0.0, abs=1e-14)
    g = RationalMap([1.0], [0.0, 1.0])  # 1/z: an isometry-like rotation at 0
    assert math.isfinite(g.spherical_derivative_norm(0.0))
    assert g.spherical_derivative_norm(0.0) == pytest.approx(1.0, rel=1e-12)


def test_derivative_norm_many_matches_scalar_with_infinity():
    rng = np.random.default_rng(51)
    f = random_rational_map(rng)
    z = rand_complex(rng, 30, scale=2.0)
    inf = np.zeros(30, dtype=bool)
    inf[5] = True
    vals = f.spherical_derivative_norm_many(z, inf)
    for k in range(30):
        pt = INF if inf[k] else z[k]
        assert vals[k] == pytest.approx(f.spherical_derivative_norm(pt), rel=1e-12)


def test_chain_rule_against_explicit_composition():
    rng = np.random.default_rng(61)
    for _ in range(10):
        cf = rand_complex(rng, 3)
        cg = rand_complex(rng, 4)
        cf[-1] += 1.0
        cg[-1] += 1.0
        f = polynomial_map(cf)
        g = polynomial_map(cg)
        h = polynomial_map(oracles.poly_compose(cf, cg))  # f(g(z))
        for z in rand_complex(rng, 6, scale=0.7):
            gz = g(z)
            lhs = h.spherical_derivative_norm(z)
            rhs = f.spherical_derivative_norm(gz) * g.spherical_derivative_norm(z)
            assert lhs == pytest.approx(rhs, rel=1e-8)


# ---------------------------------------------------------------------------
# preimages


def test_preimages_of_scaled_square():
    f = RationalMap([0.0, 0.0, 0.5])
    pts = f.preimages(2.0)
    vals = sorted((p.value for p in pts if not p.is_infinite), key=lambda w: w.real)
    assert vals == pytest.approx([-2.0, 2.0])


def test_preimages_count_equals_degree_and_round_trip():
    rng = np.random.default_rng(71)
    for _ in range(12):
        f = random_rational_map(rng)
        for z in rand_complex(rng, 9, scale=2.0):
            pts = f.preimages(z)
            assert len(pts) == f.degree
            for y in pts:
                assert chordal_distance(f(y), z) <= 1e-6


def test_preimages_of_infinity():
    f = RationalMap([1.0, 0.0, 1.0], [0.0, 1.0])  # (z^2+1)/z
    pts = f.preimages(INF)
    assert len(pts) == 2
    assert sum(p.is_infinite for p in pts) == 1
    assert any((not p.is_infinite) and abs(p.value) < 1e-12 for p in pts)

    g = RationalMap([1.0], [0.0, 0.0, 1.0])  # 1/z^2: no infinite preimage of inf
    pts = g.preimages(INF)
    assert len(pts) == 2
    assert all(not p.is_infinite and abs(p.value) < 1e-6 for p in pts)


def test_preimages_leading_cancellation_pads_with_infinity():
    f = RationalMap([1.0, 0.0, 1.0], [0.0, 0.0, 1.0])  # (z^2+1)/z^2
    pts = f.preimages(1.0)  # (z^2+1)/z^2 = 1 has no finite solution
    assert len(pts) == 2
    assert all(p.is_infinite for p in pts)
    assert f(INF).value == pytest.approx(1.0)


def test_preimages_many_matches_scalar():
    rng = np.random.default_rng(81)
    for _ in range(8):
        f = random_rational_map(rng)
        z = rand_complex(rng, 40, scale=2.0)
        roots, infm = f.preimages_many(z)
        assert roots.shape == (40, f.degree)
        for i in range(40):
            got = [
                INF if infm[i, k] else SpherePoint.of(roots[i, k])
                for k in range(f.degree)
            ]
            ref = f.preimages(z[i])
            got = sorted(got, key=SpherePoint.sort_key)
            for a, b in zip(got, ref):
                assert chordal_distance(a, b) < 1e-6


# ---------------------------------------------------------------------------
# critical and fixed points


def test_critical_points_of_shifted_square():
    f = polynomial_map([-1.0, 0.0, 1.0])  # z^2 - 1
    pts = f.critical_points()
    assert len(pts) == 2
    assert sum(p.is_infinite for p in pts) == 1
    assert any((not p.is_infinite) and abs(p.value) < 1e-12 for p in pts)


def test_critical_points_of_cube_have_multiplicity_two():
    f = polynomial_map([0.0, 0.0, 0.0, 1.0])  # z^3
    pts = f.critical_points()
    assert len(pts) == 4
    assert sum(p.is_infinite for p in pts) == 2
    assert sum((not p.is_infinite) and abs(p.value) < 1e-4 for p in pts) == 2


def test_mobius_map_has_no_critical_points():
    f = RationalMap([1.0, 2.0], [2.0, 1.0])
    assert f.critical_points() == []


def test_fixed_points_of_squared_minus_two():
    f = polynomial_map([-2.0, 0.0, 1.0])  # z^2 - 2
    fps = f.fixed_points()
    assert len(fps) == 3
    table = {}
    for p, norm in fps:
        key = "inf" if p.is_infinite else round(p.value.real)
        table[key] = norm
    assert table[-1] == pytest.approx(2.0, rel=1e-9)
    assert table[2] == pytest.approx(4.0, rel=1e-9)
    assert table["inf"] == pytest.approx(0.0, abs=1e-12)


def test_fixed_points_of_doubling_affine_map():
    p = 0.3 + 0.1j
    f = polynomial_map([-p, 2.0])  # 2(z - p) + p
    fps = f.fixed_points()
    assert len(fps) == 2
    finite = [(q, n) for q, n in fps if not q.is_infinite]
    at_inf = [(q, n) for q, n in fps if q.is_infinite]
    assert len(finite) == 1 and len(at_inf) == 1
    assert abs(finite[0][0].value - p) < 1e-12
    assert finite[0][1] == pytest.approx(2.0, rel=1e-12)
    assert at_inf[0][1] == pytest.approx(0.5, rel=1e-12)


# ---------------------------------------------------------------------------
# validation


def test_validation_rejects_shared_roots_and_constants():
    with pytest.raises(ValueError):
        RationalMap([0.0, 1.0], [0.0, 1.0])  # z / z
    with pytest.raises(ValueError):
        RationalMap([2.0], [1.0])  # constant
    with pytest.raises(ValueError):
        RationalMap([0.0], [1.0])  # zero numerator
    with pytest.raises(ValueError):
        RationalMap([-1.0, 0.0, 1.0], [1.0, 1.0])  # shares root z = -1
