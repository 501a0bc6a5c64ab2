"""Integer points on spheres x1^2 + x2^2 + x3^2 = n, Linnik searches and covering radii."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from equidist.arith import Discriminant, L1_chi, is_squarefree
from equidist.errors import DomainError, ResourceCapError
from equidist.modular import class_number
from equidist.sphere import RandomSource, SphereIndex, sphere_points

ENUMERATION_CAP = 10**9
CSV_HEADER = ("n", "x1", "x2", "x3", "ux", "uy", "uz")

_SIGNED_PERMS = np.array(
    [
        np.diag(s) @ np.eye(3)[list(p)]
        for p in itertools.permutations(range(3))
        for s in itertools.product((1, -1), repeat=3)
    ],
    dtype=np.int64,
)


def _isqrt_array(a: np.ndarray) -> np.ndarray:
    """Exact floor square roots of a nonnegative int64 array."""
    s = np.floor(np.sqrt(a.astype(float))).astype(np.int64)
    s -= (s * s > a).astype(np.int64)
    s += ((s + 1) * (s + 1) <= a).astype(np.int64)
    return s


def canonical_representations(n: int) -> np.ndarray:
    """Triples x1 >= x2 >= x3 >= 0 with x1^2 + x2^2 + x3^2 = n."""
    out = []
    x1_lo = math.isqrt(max(0, (n - 1) // 3))
    for x1 in range(x1_lo, math.isqrt(n) + 1):
        rem = n - x1 * x1
        if rem < 0:
            break
        lo = math.isqrt(max(0, (rem - 1) // 2))
        hi = min(x1, math.isqrt(rem))
        if hi < lo:
            continue
        x2 = np.arange(lo, hi + 1, dtype=np.int64)
        r3 = rem - x2 * x2
        x3 = _isqrt_array(r3)
        ok = (x3 * x3 == r3) & (x3 <= x2)
        if ok.any():
            k = int(ok.sum())
            out.append(np.column_stack([np.full(k, x1), x2[ok], x3[ok]]))
    if not out:
        return np.zeros((0, 3), dtype=np.int64)
    return np.vstack(out)


@dataclass(frozen=True)
class LatticePointSet:
    """E(n) with unit vectors E(n)/sqrt(n) and a latitude-band index."""

    n: int
    points: np.ndarray
    unit_points: np.ndarray = field(init=False, repr=False)
    index: SphereIndex = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, 3)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        unit = pts / math.sqrt(self.n)
        unit.setflags(write=False)
        object.__setattr__(self, "unit_points", unit)
        object.__setattr__(self, "index", SphereIndex(unit))

    def __len__(self) -> int:
        return len(self.points)

    def csv_rows(self):
        for p, u in zip(self.points, self.unit_points):
            yield (self.n, int(p[0]), int(p[1]), int(p[2]), float(u[0]), float(u[1]), float(u[2]))


def enumerate_points(n: int) -> LatticePointSet:
    """All integer solutions of x1^2 + x2^2 + x3^2 = n in lexicographic order."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be a positive integer")
    if n > ENUMERATION_CAP:
        raise ResourceCapError(f"n = {n} exceeds enumeration cap {ENUMERATION_CAP}")
    base = canonical_representations(n)
    if len(base) == 0:
        return LatticePointSet(n, np.zeros((0, 3), dtype=np.int64))
    allp = np.einsum("kij,mj->mki", _SIGNED_PERMS, base).reshape(-1, 3)
    return LatticePointSet(n, np.unique(allp, axis=0))


def count_check(n: int) -> dict:
    """Compare #E(n) with 48 h(-n)/w and with 24 sqrt(n) L(1, chi_{-n}) / pi."""
    n = int(n)
    problems = []
    if n % 8 != 3:
        problems.append(f"n = {n} is not 3 mod 8")
    if not is_squarefree(n):
        problems.append(f"n = {n} is not squarefree")
    if problems:
        raise DomainError("; ".join(problems))
    D = Discriminant(-n)
    count = len(enumerate_points(n))
    h = class_number(D)
    exact = 48 * h // D.w
    formula = 24 * math.sqrt(n) * L1_chi(D) / math.pi
    rel = abs(count - formula) / count
    return {
        "n": n,
        "count": count,
        "h": h,
        "w": D.w,
        "class_count": exact,
        "formula_value": formula,
        "rel_err": rel,
        "agree": count == exact and rel <= 1e-6,
    }


def linnik_min(n_or_set, w=(0.0, 0.0, 1.0)) -> float:
    """min over x in E(n) of |x . w|; the default axis gives min |x3|."""
    pts = n_or_set if isinstance(n_or_set, LatticePointSet) else enumerate_points(n_or_set)
    if len(pts) == 0:
        raise DomainError(f"E({pts.n}) is empty")
    w = np.asarray(w, dtype=float)
    if np.allclose(w, [0, 0, 1]):
        return float(np.min(np.abs(pts.points[:, 2])))
    return float(np.min(np.abs(pts.points @ w)))


def rotated_linnik_measure(n, psi: float, samples: int, seed: int = 0, stream: int = 0) -> tuple[float, float]:
    """Fraction of uniform w on S^2 with min |x . w| <= psi, and its standard error."""
    pts = n if isinstance(n, LatticePointSet) else enumerate_points(n)
    if len(pts) == 0:
        raise DomainError(f"E({pts.n}) is empty")
    if samples < 1:
        raise DomainError("samples must be positive")
    src = RandomSource(seed, stream)
    X = pts.points.astype(float)
    hits = 0
    block = 65536
    for s in range(0, samples, block):
        m = min(block, samples - s)
        w = sphere_points(src.generator(s // block), m)
        hits += int(np.count_nonzero(np.min(np.abs(w @ X.T), axis=1) <= psi))
    p = hits / samples
    return p, math.sqrt(max(p * (1 - p), 0.0) / samples)


def latlong_grid(h: float) -> np.ndarray:
    """Quasi-uniform grid whose every point of S^2 lies within angle h of a node.

    Latitude bands of angular width h' = pi/ceil(pi/h) carry ceil(2 pi sin(theta)/h)
    longitudes; the Voronoi cell of a node has angular radius at most h.
    """
    nb = math.ceil(math.pi / h)
    hb = math.pi / nb
    pts = []
    for i in range(nb):
        th = (i + 0.5) * hb
        k = max(1, math.ceil(2 * math.pi * math.sin(th + hb / 2 if th < math.pi / 2 else th - hb / 2) / h))
        ph = (np.arange(k) + 0.5) * 2 * math.pi / k
        pts.append(np.column_stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.full(k, math.cos(th))]))
    return np.vstack(pts)


def covering_radius(n, grid_resolution: float = 0.01) -> dict:
    """Covering radius of the normalized lattice points, bracketed by grid spacing.

    The largest nearest-point angle over the grid is a lower bound L; since
    every point of the sphere is within grid_resolution of a node, L +
    grid_resolution is an upper bound.
    """
    pts = n if isinstance(n, LatticePointSet) else enumerate_points(n)
    if len(pts) == 0:
        raise DomainError(f"E({pts.n}) is empty")
    grid = latlong_grid(grid_resolution)
    tree = cKDTree(pts.unit_points)
    chord, _ = tree.query(grid)
    ang = 2 * np.arcsin(np.clip(chord / 2, 0.0, 1.0))
    lower = float(ang.max())
    upper = lower + grid_resolution
    return {"n": pts.n, "estimate": lower, "lower": lower, "upper": upper, "grid_resolution": grid_resolution, "grid_size": len(grid)}


def squarefree_sieve(N: int) -> np.ndarray:
    sf = np.ones(N + 1, dtype=bool)
    sf[0] = False
    for p in range(2, math.isqrt(N) + 1):
        sf[p * p :: p * p] = False
    return sf


def sum_of_two_squares_sieve(N: int) -> np.ndarray:
    """Boolean table of m <= N representable as a^2 + b^2."""
    ok = np.zeros(N + 1, dtype=bool)
    for a in range(math.isqrt(N) + 1):
        b = np.arange(a, math.isqrt(N - a * a) + 1)
        ok[a * a + b * b] = True
    return ok


def linnik_scan(lo: int, hi: int, delta: float = 1.0 / 18) -> dict:
    """min |x3| over E(n) against n^(1/2 - delta) for squarefree n = 3 mod 8 in [lo, hi]."""
    sf = squarefree_sieve(hi)
    two = sum_of_two_squares_sieve(hi)
    ns = np.arange(lo, hi + 1)
    ns = ns[(ns % 8 == 3) & sf[ns]]
    mins = np.full(len(ns), -1, dtype=np.int64)
    todo = np.ones(len(ns), dtype=bool)
    x3 = 0
    while todo.any():
        rem = ns - x3 * x3
        hit = todo & (rem >= 0) & two[np.maximum(rem, 0)]
        mins[hit] = x3
        todo &= ~hit
        x3 += 1
        if x3 * x3 > hi:
            break
    bound = ns.astype(float) ** (0.5 - delta)
    viol = ns[(mins > bound) | (mins < 0)]
    ratio = mins / bound
    return {
        "lo": lo,
        "hi": hi,
        "delta": delta,
        "count": int(len(ns)),
        "violations": [int(v) for v in viol],
        "max_min_x3": int(mins.max()) if len(mins) else 0,
        "max_ratio": float(ratio.max()) if len(ns) else 0.0,
        "n": ns,
        "min_x3": mins,
    }


# public alias under the operation's name (shadows the builtin only for importers)
enumerate = enumerate_points  # noqa: A001
