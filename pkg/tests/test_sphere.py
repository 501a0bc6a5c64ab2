import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from equidist.errors import DomainError
from equidist.lattice import enumerate_points
from equidist.modular import hyperbolic_distance, in_fundamental_domain
from equidist.sphere import (
    FD_AREA,
    FD_PROPOSAL_MASS,
    AnnulusSpec,
    RandomSource,
    SphereIndex,
    annulus_volume,
    count_in_annulus,
    count_sphere_many,
    fundamental_domain_points,
    sample,
    spherical_theta,
)

E1, E3 = np.array([1.0, 0, 0]), np.array([0, 0, 1.0])


def test_theta_examples():
    assert spherical_theta(E3, E3) == 0
    assert spherical_theta(E3, -E3) == pytest.approx(math.pi)
    assert spherical_theta(E3, E1) == pytest.approx(math.pi / 2)
    with pytest.raises(DomainError):
        spherical_theta(2 * E3, E1)


unit = st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.1)


@given(unit, unit)
def test_theta_u_relation(a, b):
    a = np.array(a) / np.linalg.norm(a)
    b = np.array(b) / np.linalg.norm(b)
    th = spherical_theta(a, b)
    assert 0 <= th <= math.pi
    assert (1 - a @ b) / 2 == pytest.approx(math.sin(th / 2) ** 2, abs=1e-12)


def test_volume_examples():
    assert annulus_volume("sphere", 0, math.pi) == pytest.approx(4 * math.pi)
    assert annulus_volume("sphere", math.pi / 3, math.pi / 2) == pytest.approx(math.pi)
    # area element sinh(rho) d rho d phi integrated by Simpson
    x = np.linspace(0, 1, 2001)
    f = np.sinh(x)
    simpson = (x[1] - x[0]) / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum())
    assert annulus_volume("hyperbolic", 0, 1) == pytest.approx(2 * math.pi * simpson, rel=1e-12)
    assert annulus_volume("hyperbolic", 0, 1) == pytest.approx(3.41228, abs=1e-5)


def test_annulus_spec_errors():
    with pytest.raises(DomainError):
        AnnulusSpec("sphere", E3, 0.5, 0.4)
    with pytest.raises(DomainError):
        AnnulusSpec("sphere", E3, 0.5, 4.0)
    with pytest.raises(DomainError):
        AnnulusSpec("hyperbolic", -1j, 0.1, 0.4)
    A = AnnulusSpec("sphere", E3, 0.1, 0.3)
    assert A.measure == pytest.approx(annulus_volume("sphere", 0.1, 0.3))


def test_random_source_reproducible():
    a = sample("sphere_point", RandomSource(5, 1), 10)
    b = sample("sphere_point", RandomSource(5, 1), 10)
    c = sample("sphere_point", RandomSource(5, 2), 10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    big = RandomSource(2**64 - 1, 0).generator(3).random()
    assert 0 <= big < 1


def test_sphere_points_mean():
    pts = sample("sphere_point", RandomSource(0), 10**6)
    assert abs(pts[:, 2].mean()) <= 3e-3
    assert np.allclose(np.linalg.norm(pts, axis=1), 1)


def test_rotations_orthogonal():
    R = sample("rotation", RandomSource(1), 1000)
    eye = np.einsum("kij,kil->kjl", R, R)
    assert np.allclose(eye, np.eye(3), atol=1e-12)
    assert np.allclose(np.linalg.det(R), 1)
    v = sample("sphere_point", RandomSource(2), 2)
    a = np.einsum("kij,j->ki", R, v[0])
    b = np.einsum("kij,j->ki", R, v[1])
    assert np.allclose((a * b).sum(axis=1), v[0] @ v[1], atol=1e-12)


def test_rotated_axis_is_uniform():
    R = sample("rotation", RandomSource(3), 200000)
    z = R[:, :, 2]
    assert np.allclose(z.mean(axis=0), 0, atol=0.01)
    # second moment of each coordinate of a uniform point is 1/3
    assert np.allclose((z**2).mean(axis=0), 1 / 3, atol=0.01)


def test_fundamental_domain_sampler():
    gen = RandomSource(4).generator()
    z, rate, tried = fundamental_domain_points(gen, 200000, return_rate=True)
    assert all(in_fundamental_domain(w) for w in z[:2000])
    est = rate * FD_PROPOSAL_MASS
    se = FD_PROPOSAL_MASS * math.sqrt(rate * (1 - rate) / tried)
    assert abs(est - FD_AREA) <= 3 * se
    # the region y > 2 has measure 1/2 out of pi/3
    frac = np.mean(z.imag > 2)
    p = 0.5 / FD_AREA
    assert abs(frac - p) <= 4 * math.sqrt(p * (1 - p) / len(z))


def test_count_examples():
    pts = enumerate_points(3)
    assert count_in_annulus(pts, AnnulusSpec("sphere", E3, 0, math.pi)) == 8
    c = np.ones(3) / math.sqrt(3)
    assert count_in_annulus(pts, AnnulusSpec("sphere", c, 0, 0.1)) == 1
    off = np.array([1.0, 0.3, 0.1]) / math.sqrt(1.1)
    assert count_in_annulus(pts, AnnulusSpec("sphere", off, 0.001, 0.002)) == 0


@pytest.mark.parametrize("n", [3, 11, 19, 101, 531, 999])
def test_additivity_over_partitions(n):
    pts = enumerate_points(n)
    rng = np.random.default_rng(n)
    for _ in range(50):
        cuts = np.sort(rng.uniform(0, math.pi, 4))
        edges = np.concatenate([[0], cuts, [math.pi]])
        c = rng.normal(size=3)
        c /= np.linalg.norm(c)
        # half-open pieces except the last so boundary points are counted once
        total = 0
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += count_in_annulus(pts, AnnulusSpec("sphere", c, lo, hi))
        boundary = sum(count_in_annulus(pts, AnnulusSpec("sphere", c, x, x + 1e-15)) for x in cuts)
        assert total - boundary == len(pts)


@given(st.integers(0, 10**6), st.floats(0, 3.0), st.floats(0.01, 0.2))
def test_index_matches_brute_force(seed, r, width):
    pts = enumerate_points(4009)
    c = np.random.default_rng(seed).normal(size=3)
    c /= np.linalg.norm(c)
    R = min(r + width, math.pi)
    th = np.arccos(np.clip(pts.unit_points @ c, -1, 1))
    brute = int(np.count_nonzero((th >= r) & (th <= R)))
    assert count_in_annulus(pts, AnnulusSpec("sphere", c, r, R)) == brute
    assert count_sphere_many(pts.unit_points, c[None], r, R)[0] == brute


def test_mean_count_identity():
    pts = enumerate_points(59)
    r, R = 0.3, 0.6
    centers = sample("sphere_point", RandomSource(9), 10**4)
    counts = count_sphere_many(pts.unit_points, centers, r, R)
    expected = len(pts) * annulus_volume("sphere", r, R) / (4 * math.pi)
    assert abs(counts.mean() - expected) <= 3 * counts.std() / math.sqrt(len(counts))


def test_rotation_and_center_averages_agree():
    pts = enumerate_points(35)
    r, R = 0.4, 0.7
    src = RandomSource(10)
    centers = sample("sphere_point", src.child(1), 20000)
    rots = sample("rotation", src.child(2), 20000)
    via_rot = np.einsum("kij,j->ki", rots, E3)
    a = count_sphere_many(pts.unit_points, centers, r, R)
    b = count_sphere_many(pts.unit_points, via_rot, r, R)
    se = math.sqrt(a.var() / len(a) + b.var() / len(b))
    assert abs(a.mean() - b.mean()) <= 3 * se
    assert abs((a**2).mean() - (b**2).mean()) <= 3 * math.sqrt((a**2).var() / len(a) + (b**2).var() / len(b))


def test_hyperbolic_count_quotient_and_orbit():
    pts = [1j, 2j, 0.3 + 1.2j]
    A = AnnulusSpec("hyperbolic", 1.1j, 0.0, 1.0)
    brute = sum(1 for z in pts if hyperbolic_distance(z, 1.1j) <= 1.0)
    assert count_in_annulus(pts, A) == brute
    assert count_in_annulus(pts, A, mode="orbit") >= brute
    with pytest.raises(DomainError):
        count_in_annulus(np.ones((2, 2)), A)


def test_index_linear_fallback():
    pts = np.array([[0, 0, 1.0], [1.0, 0, 0]])
    idx = SphereIndex(pts)
    assert idx.count(E3, 0, 0.1) == 1
    assert len(idx) == 2
