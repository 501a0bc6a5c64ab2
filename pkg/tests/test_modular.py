import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from equidist.arith import L1_chi, fundamental_discriminants
from equidist.errors import DomainError
from equidist.modular import (
    FormClassEnsemble,
    closed_geodesics,
    geodesic_annulus_length,
    heegner_points,
    hyperbolic_distance,
    in_fundamental_domain,
    mobius,
    pell,
    quotient_distance,
    reduce_to_fd,
    reduced_forms,
)

S = ((0, -1), (1, 0))
T = ((1, 1), (0, 1))
TI = ((1, -1), (0, 1))


def matmul(g, h):
    (a, b), (c, d) = g
    (e, f), (p, q) = h
    return ((a * e + b * p, a * f + b * q), (c * e + d * p, c * f + d * q))


def brute_reduced_definite(D):
    """All reduced primitive forms with |b| <= a <= c by exhaustive scan."""
    out = []
    amax = math.isqrt(-D // 3) + 1
    for a in range(1, amax + 1):
        for b in range(-a, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or math.gcd(math.gcd(a, abs(b)), c) != 1:
                continue
            if b < 0 and (a == -b or a == c):
                continue
            out.append((a, b, c))
    return sorted(out)


def test_reduced_forms_examples():
    assert [(f.a, f.b, f.c) for f in reduced_forms(-3)] == [(1, 1, 1)]
    assert sorted((f.a, f.b, f.c) for f in reduced_forms(-23)) == [(1, 1, 6), (2, -1, 3), (2, 1, 3)]
    assert len(reduced_forms(5)) == 1


@pytest.mark.parametrize("D", fundamental_discriminants(-3000, -3))
def test_reduced_forms_match_scan(D):
    forms = reduced_forms(D)
    assert sorted((f.a, f.b, f.c) for f in forms) == brute_reduced_definite(D)
    for f in forms:
        assert f.discriminant == D and f.primitive and f.is_reduced


def test_class_number_formula_negative():
    from equidist.arith import Discriminant

    for D in fundamental_discriminants(-10**4, -3):
        h = len(reduced_forms(D))
        formula = Discriminant(D).w * math.sqrt(-D) * L1_chi(D) / (2 * math.pi)
        assert abs(h - formula) <= 1e-6 * h


def test_heegner_examples():
    assert heegner_points(-3)[0] == pytest.approx((-1 + 1j * math.sqrt(3)) / 2)
    assert heegner_points(-4)[0] == pytest.approx(1j)
    pts = heegner_points(-23)
    assert sorted(z.imag for z in pts) == pytest.approx(sorted(math.sqrt(23) / (2 * a) for a in (1, 2, 2)))
    with pytest.raises(DomainError):
        heegner_points(5)


def test_heegner_in_fundamental_domain():
    for D in fundamental_discriminants(-5000, -3):
        for z in heegner_points(D):
            assert in_fundamental_domain(z)
            assert z.imag >= math.sqrt(3) / 2 - 1e-12


def test_geodesic_examples():
    (g,) = closed_geodesics(5)
    assert pell(5) == (3, 1)
    assert g.length == pytest.approx(2 * math.log((3 + math.sqrt(5)) / 2), rel=1e-14)
    assert g.length == pytest.approx(1.9248, abs=1e-4)
    (g8,) = closed_geodesics(8)
    assert pell(8) == (6, 2)
    assert g8.length == pytest.approx(2 * math.log(3 + 2 * math.sqrt(2)), rel=1e-14)
    assert g8.length == pytest.approx(3.5255, abs=1e-4)
    assert g.length == pytest.approx(2 * math.sqrt(5) * L1_chi(5), rel=1e-12)
    for bad in (-4, 9):
        with pytest.raises(DomainError):
            closed_geodesics(bad)


def smallest_pell_u(D, umax=200000):
    """Least u <= umax with D u^2 + 4 a perfect square, or None."""
    u = np.arange(1, umax + 1, dtype=np.int64)
    t2 = D * u * u + 4
    t = np.floor(np.sqrt(t2.astype(float))).astype(np.int64)
    t += (t + 1) ** 2 <= t2
    t -= t * t > t2
    hit = np.flatnonzero(t * t == t2)
    return int(u[hit[0]]) if len(hit) else None


@pytest.mark.parametrize("D", fundamental_discriminants(5, 200))
def test_pell_is_fundamental_solution(D):
    t, u = pell(D)
    assert t * t - D * u * u == 4
    # no smaller solution exists; searched exhaustively up to 2e5
    expected = smallest_pell_u(D)
    assert expected == u if u <= 200000 else expected is None


def test_geodesic_endpoints_conjugate():
    for D in fundamental_discriminants(5, 300):
        for g in closed_geodesics(D):
            e1, e2 = g.endpoints
            a, b = g.form.a, g.form.b
            assert e1 + e2 == pytest.approx(-b / a)
            assert g.length > 0


def test_total_length_identity():
    for D in fundamental_discriminants(5, 500):
        ens = FormClassEnsemble.build(D)
        formula = 2 * math.sqrt(D) * L1_chi(D)
        assert abs(ens.total_length - formula) <= 1e-6 * formula


def test_hyperbolic_distance_examples():
    assert hyperbolic_distance(1j, 1j) == 0
    assert hyperbolic_distance(1j, 2j) == pytest.approx(math.log(2))
    assert hyperbolic_distance(1j, 1 + 1j) == pytest.approx(2 * math.asinh(0.5))
    assert hyperbolic_distance(1j, 1 + 1j) == pytest.approx(0.9624, abs=1e-4)
    with pytest.raises(DomainError):
        hyperbolic_distance(1j, -1j)


def log_formula(z, w):
    return math.log((abs(z - w.conjugate()) + abs(z - w)) / (abs(z - w.conjugate()) - abs(z - w)))


upper = st.builds(complex, st.floats(-3, 3), st.floats(0.05, 5))


@given(upper, upper)
def test_distance_matches_log_formula(z, w):
    if abs(z - w) < 1e-6:
        return
    assert hyperbolic_distance(z, w) == pytest.approx(log_formula(z, w), rel=1e-9, abs=1e-12)
    assert hyperbolic_distance(z, w) == pytest.approx(hyperbolic_distance(w, z))


def test_quotient_distance_examples():
    assert quotient_distance(1j, 1 + 1j) == pytest.approx(0, abs=1e-12)
    assert quotient_distance(1j, 2j) == pytest.approx(math.log(2))
    rho = (-1 + 1j * math.sqrt(3)) / 2
    assert quotient_distance(rho, rho + 1) == pytest.approx(0, abs=1e-12)


words = st.lists(st.sampled_from([S, T, TI]), max_size=5)


@given(upper, upper, words)
def test_quotient_distance_invariance(z, w, word):
    g = ((1, 0), (0, 1))
    for h in word:
        g = matmul(h, g)
    gz = complex(mobius(g, z))
    d = quotient_distance(z, w)
    assert quotient_distance(gz, w) == pytest.approx(d, abs=1e-9)
    assert d <= hyperbolic_distance(z, w) + 1e-12


@given(upper)
def test_reduction(z):
    z0, g = reduce_to_fd(z)
    assert in_fundamental_domain(z0)
    (a, b), (c, d) = g
    assert a * d - b * c == 1
    assert complex(mobius(g, z)) == pytest.approx(z0, abs=1e-9)


def test_annulus_length_full_and_empty():
    g = closed_geodesics(12)[0]
    assert geodesic_annulus_length(g, 1j, 0.0, 10.0) == pytest.approx(g.length, rel=1e-9)
    assert geodesic_annulus_length(g, 50j, 0.0, 0.5) == 0.0
    with pytest.raises(DomainError):
        geodesic_annulus_length(g, 1j, 0.5, 0.5)


@pytest.mark.parametrize("R", [0.02, 0.05, 0.1])
def test_small_ball_on_path(R):
    # D = 12 geodesic is not reciprocal: its image is traced once
    g = closed_geodesics(12)[0]
    center = complex(g.point(0.3))
    val, err = geodesic_annulus_length(g, center, 0.0, R, return_error=True)
    assert abs(val - 2 * R) <= 10 * R**3 + err
    orbit = geodesic_annulus_length(g, center, 0.0, R, mode="orbit")
    assert abs(orbit - 2 * R) <= 10 * R**3


def test_reciprocal_geodesic_doubles():
    (g,) = closed_geodesics(5)
    center = complex(g.point(0.4))
    val = geodesic_annulus_length(g, center, 0.0, 0.05, mode="orbit")
    assert abs(val - 4 * 0.05) <= 10 * 0.05**3


def test_annulus_modes_agree_small_radius():
    (g,) = closed_geodesics(13)
    center = complex(g.point(0.2)) + 0.03j
    q, err = geodesic_annulus_length(g, center, 0.05, 0.15, return_error=True)
    o = geodesic_annulus_length(g, center, 0.05, 0.15, mode="orbit")
    assert abs(q - o) <= err + 1e-9
