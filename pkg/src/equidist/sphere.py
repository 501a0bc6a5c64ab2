"""Spherical geometry, annulus measures, random sampling and annulus counting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from equidist.errors import DomainError

SQRT3_2 = math.sqrt(3.0) / 2.0
FD_PROPOSAL_MASS = 2.0 / math.sqrt(3.0)
FD_AREA = math.pi / 3.0


def _unit(v, name="vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v, axis=-1)
    if np.any(np.abs(nrm - 1.0) > 1e-9):
        raise DomainError(f"{name} is not a unit vector within 1e-9")
    return v


def spherical_theta(z, zeta) -> float:
    """Great-circle angle between two unit vectors."""
    z = _unit(z, "z")
    zeta = _unit(zeta, "zeta")
    return float(np.arccos(np.clip(np.dot(z, zeta), -1.0, 1.0)))


def annulus_volume(space: str, r: float, R: float) -> float:
    """Measure of the annulus r <= dist <= R on the unit sphere or in H."""
    if not (0 <= r < R):
        raise DomainError(f"need 0 <= r < R, got r={r}, R={R}")
    if space == "sphere":
        if R > math.pi:
            raise DomainError("spherical annulus needs R <= pi")
        return 4 * math.pi * (math.sin(R / 2) ** 2 - math.sin(r / 2) ** 2)
    if space == "hyperbolic":
        return 4 * math.pi * (math.sinh(R / 2) ** 2 - math.sinh(r / 2) ** 2)
    raise DomainError(f"unknown space {space!r}")


@dataclass(frozen=True)
class AnnulusSpec:
    """Closed annulus r <= dist(., center) <= R on S^2 or in the upper half-plane."""

    space: str
    center: Any
    r: float
    R: float
    measure: float = field(init=False)

    def __post_init__(self):
        if self.space == "sphere":
            object.__setattr__(self, "center", _unit(self.center, "center"))
        elif self.space == "hyperbolic":
            c = complex(self.center)
            if c.imag <= 0:
                raise DomainError("hyperbolic center must lie in the upper half-plane")
            object.__setattr__(self, "center", c)
        else:
            raise DomainError(f"unknown space {self.space!r}")
        object.__setattr__(self, "measure", annulus_volume(self.space, self.r, self.R))

    @property
    def total_measure(self) -> float:
        """Measure of the ambient space (S^2, or the modular surface)."""
        return 4 * math.pi if self.space == "sphere" else FD_AREA


@dataclass(frozen=True)
class RandomSource:
    """Counter-based random stream keyed by (seed, stream).

    Independent blocks of a stream are addressed by a block number so that
    block-parallel Monte Carlo gives the same draws for any worker count.
    """

    seed: int
    stream: int = 0

    def generator(self, block: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed) & (2**64 - 1), spawn_key=(int(self.stream), int(block)))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, stream: int) -> "RandomSource":
        return RandomSource(self.seed, stream)


def sphere_points(gen: np.random.Generator, size: int) -> np.ndarray:
    v = gen.standard_normal((size, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def quaternion_rotations(gen: np.random.Generator, size: int) -> np.ndarray:
    """Haar-random rotation matrices from normalized Gaussian quaternions."""
    q = gen.standard_normal((size, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q.T
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], axis=-1),
            np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], axis=-1),
            np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], axis=-1),
        ],
        axis=1,
    )


def fundamental_domain_points(gen: np.random.Generator, size: int, return_rate: bool = False):
    """mu-uniform points in the standard fundamental domain by rejection.

    Proposal: x uniform on [-1/2, 1/2), y with density proportional to y^-2
    on [sqrt(3)/2, inf); accepted when |z| >= 1.  The proposal has
    hyperbolic mass 2/sqrt(3), so acceptance rate times that mass estimates
    the area pi/3.
    """
    out = []
    have = 0
    tried = accepted = 0
    while have < size:
        m = max(16, int(1.3 * (size - have)) + 8)
        x = gen.random(m) - 0.5
        y = SQRT3_2 / (1.0 - gen.random(m))
        ok = x * x + y * y >= 1.0
        tried += m
        accepted += int(ok.sum())
        z = (x + 1j * y)[ok]
        out.append(z)
        have += len(z)
    z = np.concatenate(out)[:size]
    if return_rate:
        return z, accepted / tried, tried
    return z


def sample(kind: str, src: RandomSource, size: int = 1, block: int = 0):
    """Draw `size` samples of the given kind from one block of a random stream.

    kind is one of "sphere_point", "rotation", "fundamental_domain_point".
    """
    gen = src.generator(block)
    if kind == "sphere_point":
        return sphere_points(gen, size)
    if kind == "rotation":
        return quaternion_rotations(gen, size)
    if kind == "fundamental_domain_point":
        return fundamental_domain_points(gen, size)
    raise DomainError(f"unknown sample kind {kind!r}")


class SphereIndex:
    """Latitude-band index over unit vectors for annulus queries.

    Points are bucketed by polar angle; a query scans only the bands that can
    meet the outer cap.  Small sets fall back to a linear scan.
    """

    LINEAR_BELOW = 100

    def __init__(self, unit_points: np.ndarray, band_width: float | None = None):
        self.points = np.asarray(unit_points, dtype=float).reshape(-1, 3)
        n = len(self.points)
        if band_width is None:
            band_width = math.pi / max(1, math.ceil(math.sqrt(max(n, 1))))
        self.band_width = band_width
        self.nbands = max(1, math.ceil(math.pi / band_width))
        polar = np.arccos(np.clip(self.points[:, 2], -1.0, 1.0)) if n else np.zeros(0)
        band = np.minimum((polar / band_width).astype(np.int64), self.nbands - 1)
        self.order = np.argsort(band, kind="stable")
        self.starts = np.searchsorted(band[self.order], np.arange(self.nbands + 1))

    def __len__(self) -> int:
        return len(self.points)

    def candidates(self, center: np.ndarray, R: float) -> np.ndarray:
        if len(self) < self.LINEAR_BELOW:
            return np.arange(len(self))
        theta_c = math.acos(max(-1.0, min(1.0, float(center[2]))))
        lo = max(0, int((theta_c - R) / self.band_width) - 1)
        hi = min(self.nbands - 1, int((theta_c + R) / self.band_width) + 1)
        return self.order[self.starts[lo] : self.starts[hi + 1]]

    def query(self, center, r: float, R: float) -> np.ndarray:
        """Indices of points with r <= angle(point, center) <= R."""
        center = np.asarray(center, dtype=float)
        idx = self.candidates(center, R)
        dots = np.clip(self.points[idx] @ center, -1.0, 1.0)
        keep = (dots >= math.cos(R)) & (dots <= math.cos(r))
        return np.sort(idx[keep])

    def count(self, center, r: float, R: float) -> int:
        return len(self.query(center, r, R))


def count_sphere_many(unit_points: np.ndarray, centers: np.ndarray, r: float, R: float, chunk: int = 4096) -> np.ndarray:
    """Closed-annulus counts for many centers at once (dense dot products)."""
    pts = np.asarray(unit_points, dtype=float)
    centers = np.asarray(centers, dtype=float)
    cr, cR = math.cos(r), math.cos(R)
    out = np.empty(len(centers), dtype=np.int64)
    for s in range(0, len(centers), chunk):
        dots = np.clip(centers[s : s + chunk] @ pts.T, -1.0, 1.0)
        out[s : s + chunk] = ((dots >= cR) & (dots <= cr)).sum(axis=1)
    return out


def count_in_annulus(points, A: AnnulusSpec, mode: str = "quotient") -> int:
    """Number of points in the closed annulus A.

    Sphere: points is a LatticePointSet or an (N, 3) array of unit vectors.
    Hyperbolic: points is a sequence of upper half-plane points, taken modulo
    the modular group.  mode "quotient" counts points of the modular surface
    whose quotient distance to the center lies in [r, R]; mode "orbit" counts
    all distinct orbit points in the annulus of H (the unfolded kernel count).
    """
    if A.space == "sphere":
        if hasattr(points, "unit_points"):
            index = points.index
        else:
            arr = np.asarray(points, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise DomainError("sphere annulus needs an array of unit 3-vectors")
            index = SphereIndex(arr)
        return index.count(A.center, A.r, A.R)
    from equidist import modular

    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    if pts.ndim != 1:
        raise DomainError("hyperbolic annulus needs a flat sequence of complex points")
    if mode == "orbit":
        return int(sum(modular.orbit_count(z, A.center, A.r, A.R) for z in pts))
    if mode == "quotient":
        d = modular.quotient_distances(pts, A.center, cutoff=A.R)
        return int(np.count_nonzero((d >= A.r) & (d <= A.R)))
    raise DomainError(f"unknown mode {mode!r}")
