"""Variance of annulus counts for lattice points on S^2, Heegner points and closed geodesics.

The statistic is the mean over centers w of

    (vol(X) / vol(A) * local(w) / total - 1)^2

where local(w) is the number of points (or geodesic length) in the annulus
around w and total is the global count (or length).  On the sphere it is also
computed exactly from the Legendre pair sums S_l = sum_{x,y} P_l(x.y).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from equidist.errors import DomainError
from equidist.io import csv_text
from equidist.lattice import LatticePointSet, enumerate_points
from equidist.sphere import (
    FD_AREA,
    RandomSource,
    annulus_volume,
    count_sphere_many,
    fundamental_domain_points,
    quaternion_rotations,
    sphere_points,
)
from equidist.transforms import legendre_all, shc_sphere_all

BLOCK = 8192
AGGREGATE_HEADER = ("id", "r", "R", "mc", "mc_se", "spec", "tail", "pred", "ratio_mc", "ratio_spec")


# --------------------------------------------------------------------------
# spectral route on the sphere


def dot_histogram(pts: LatticePointSet, chunk: int = 2048) -> np.ndarray:
    """c[k + n] = number of ordered pairs (x, y) in E(n)^2 with x.y = k."""
    X = pts.points
    n = pts.n
    hist = np.zeros(2 * n + 1, dtype=np.int64)
    for s in range(0, len(X), chunk):
        dots = X[s : s + chunk] @ X.T
        hist += np.bincount((dots + n).ravel(), minlength=2 * n + 1)
    return hist


def pair_legendre_all(pts: LatticePointSet, L: int) -> np.ndarray:
    """S_l = sum over ordered pairs of P_l(x^.y^) for l = 0..L.

    The pair sum is taken over the integer dot-product histogram.  Pairs with
    dot products k and -k are folded together, so odd l give exactly 0 for
    antipodally closed sets such as E(n).
    """
    n = pts.n
    hist = dot_histogram(pts)
    k = np.arange(1, n + 1)
    pos, neg = hist[n + 1 :], hist[n - 1 :: -1][:n]
    if not np.array_equal(pos, neg):
        P = legendre_all(L, np.arange(-n, n + 1) / n)
        return P @ hist.astype(float)
    P = legendre_all(L, np.concatenate([[0.0], k / n]))
    P_neg = legendre_all(L, -k / n)
    folded = (P[:, 1:] + P_neg) @ pos.astype(float)
    return folded + P[:, 0] * float(hist[n])


def pair_legendre_sum(pts, l: int) -> float:
    """S_l for a single degree l."""
    if l < 0:
        raise DomainError("l must be nonnegative")
    pts = pts if isinstance(pts, LatticePointSet) else _nonempty(pts)
    return float(pair_legendre_all(pts, l)[l])


def even_parseval_total(r: float, R: float) -> float:
    """sum over even l >= 0 of (2l + 1) h~(l)^2, in closed form.

    Parseval for the even part of the normalized indicator kernel gives
    2 pi (1 + sigma(A cap -A) / sigma(A)) / sigma(A), where -A is the
    antipodal annulus pi - R <= theta <= pi - r.
    """
    sigma = annulus_volume("sphere", r, R)
    lo, hi = max(r, math.pi - R), min(R, math.pi - r)
    overlap = 2 * math.pi * (math.cos(lo) - math.cos(hi)) if hi > lo else 0.0
    return 2 * math.pi * (1 + overlap / sigma) / sigma


def _nonempty(n) -> LatticePointSet:
    pts = enumerate_points(n)
    if len(pts) == 0:
        raise DomainError(f"empty point set: E(n) is empty for n = {pts.n}")
    return pts


def variance_spectral_sphere(n, r: float, R: float, Lmax: int) -> tuple[float, float]:
    """Parseval estimate sum_{1 <= l <= Lmax} (2l + 1) h~(l)^2 S_l / N^2 and a rigorous tail bound.

    The tail uses |S_l| <= N^2, the vanishing of odd l, and the exact value of
    the full even sum of (2l + 1) h~(l)^2.
    """
    if Lmax < 1:
        raise DomainError("Lmax must be >= 1")
    pts = n if isinstance(n, LatticePointSet) else _nonempty(n)
    if len(pts) == 0:
        raise DomainError(f"empty point set: E(n) is empty for n = {pts.n}")
    N = len(pts)
    S = pair_legendre_all(pts, Lmax)
    if np.any(S[1::2] != 0):
        raise AssertionError("odd-degree pair sums must vanish for an antipodal set")
    h = shc_sphere_all(r, R, Lmax)
    l = np.arange(Lmax + 1)
    w = (2 * l + 1) * h * h
    terms = w[1:] * S[1:] / (N * N)
    estimate = math.fsum(terms[1::2])  # even l only; odd terms are exactly zero
    total = even_parseval_total(r, R)
    partial = math.fsum(w[0::2])
    tail = max(total - partial, 0.0) + 1e-13 * total
    return max(estimate, 0.0), tail


# --------------------------------------------------------------------------
# Monte Carlo


def _block_sizes(samples: int, block: int):
    for b, s in enumerate(range(0, samples, block)):
        yield b, min(block, samples - s)


def _moments(values: np.ndarray) -> tuple[int, float, float]:
    return len(values), math.fsum(values), math.fsum(values * values)


def _combine(parts) -> tuple[float, float, int]:
    n = sum(p[0] for p in parts)
    s = math.fsum(p[1] for p in parts)
    s2 = math.fsum(p[2] for p in parts)
    mean = s / n
    var = max(s2 / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return mean, math.sqrt(var / n), n


def _run_blocks(fn, samples: int, threads: int, block: int):
    jobs = list(_block_sizes(samples, block))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda j: fn(*j), jobs))
    else:
        parts = [fn(*j) for j in jobs]
    return parts


def _sphere_values(unit_points, r, R, centers):
    N = len(unit_points)
    scale = 4 * math.pi / annulus_volume("sphere", r, R)
    counts = count_sphere_many(unit_points, centers, r, R)
    return (scale * counts / N - 1.0) ** 2


def variance_montecarlo(
    space: str,
    objects,
    r: float,
    R: float,
    samples: int,
    src: RandomSource,
    threads: int = 1,
    centers: str = "haar",
    block: int = BLOCK,
) -> tuple[float, float]:
    """Monte Carlo mean of the squared normalized deviation over random centers.

    space "sphere": objects is a LatticePointSet, an integer n, or an (N, 3)
    array of unit vectors; centers "haar" draws uniform centers, "rotation"
    moves the annulus by Haar-random rotations.
    space "hyperbolic": objects is a FormClassEnsemble or discriminant D; for
    D < 0 the local count is the number of Heegner orbit points in the
    annulus, for D > 0 the total length of the closed geodesics in it (both
    unfolded, so each has mean exactly 1 after normalization).

    Block b of the stream gives the centers of block b, so the result does
    not depend on the number of threads.
    """
    if samples < 100:
        raise DomainError("samples must be >= 100")
    if not (0 <= r < R):
        raise DomainError(f"need 0 <= r < R, got r={r}, R={R}")
    if space == "sphere":
        if isinstance(objects, (int, np.integer)):
            objects = _nonempty(objects)
        unit = objects.unit_points if isinstance(objects, LatticePointSet) else np.asarray(objects, dtype=float)
        if len(unit) == 0:
            raise DomainError("empty point set")
        annulus_volume("sphere", r, R)

        def fn(b, m):
            gen = src.generator(b)
            if centers == "haar":
                c = sphere_points(gen, m)
            elif centers == "rotation":
                c = quaternion_rotations(gen, m)[:, :, 2]
            else:
                raise DomainError(f"unknown centers mode {centers!r}")
            return _moments(_sphere_values(unit, r, R, c))

    elif space == "hyperbolic":
        fn = _hyperbolic_block_fn(objects, r, R, src)
    else:
        raise DomainError(f"unknown space {space!r}")
    mean, se, _ = _combine(_run_blocks(fn, samples, threads, block))
    return mean, se


def hyperbolic_values(objects, r: float, R: float):
    """Function mapping an array of centers w to vol(F)/vol(A) * local(w) / total."""
    from equidist import modular

    ens = objects if isinstance(objects, modular.FormClassEnsemble) else modular.FormClassEnsemble.build(objects)
    scale = FD_AREA / annulus_volume("hyperbolic", r, R)
    if ens.D.value < 0:
        pts = list(ens.heegner_points)
        if not pts:
            raise DomainError("empty point set")
        total = len(pts)

        def local(w):
            return sum(modular.orbit_count(z, w, r, R) for z in pts)

    else:
        geos = list(ens.geodesics)
        if not geos:
            raise DomainError("empty geodesic set")
        total = math.fsum(C.length for C in geos)

        def local(w):
            return math.fsum(modular.geodesic_annulus_length(C, w, r, R, mode="orbit") for C in geos)

    def values(ws):
        return np.array([scale * local(w) / total for w in ws])

    return values


def _hyperbolic_block_fn(objects, r, R, src, squared=True):
    values = hyperbolic_values(objects, r, R)

    def fn(b, m):
        v = values(fundamental_domain_points(src.generator(b), m))
        return _moments((v - 1.0) ** 2 if squared else v)

    return fn


def hyperbolic_mean(objects, r: float, R: float, samples: int, src: RandomSource, threads: int = 1, block: int = 1024) -> tuple[float, float]:
    """Mean of the normalized local count or length over mu-uniform centers, with its stderr.

    Unfolding makes the exact mean 1.
    """
    if samples < 100:
        raise DomainError("samples must be >= 100")
    fn = _hyperbolic_block_fn(objects, r, R, src, squared=False)
    mean, se, _ = _combine(_run_blocks(fn, samples, threads, block))
    return mean, se


def grid_variance_sphere(n, r: float, R: float, n_theta: int = 600, n_phi: int = 1200) -> float:
    """Deterministic quadrature of the variance over an equal-area (cos theta, phi) midpoint grid."""
    pts = n if isinstance(n, LatticePointSet) else _nonempty(n)
    z = 1 - (np.arange(n_theta) + 0.5) * 2 / n_theta
    phi = (np.arange(n_phi) + 0.5) * 2 * math.pi / n_phi
    s = np.sqrt(1 - z * z)
    c = np.stack(
        [np.outer(s, np.cos(phi)).ravel(), np.outer(s, np.sin(phi)).ravel(), np.repeat(z, n_phi)], axis=1
    )
    vals = _sphere_values(pts.unit_points, r, R, c)
    return math.fsum(vals) / len(vals)


# --------------------------------------------------------------------------
# i.i.d. random points


def random_model_montecarlo(N: int, r: float, R: float, samples: int, src: RandomSource, blocks: int = 50) -> dict:
    """Variance for N i.i.d. uniform points, with a fresh point set per block.

    The standard error comes from the spread of the block means.  For i.i.d.
    points the count is Binomial(N, p), p = sigma(A)/4 pi, so the exact
    expectation is prediction * (1 - p).
    """
    if blocks < 2 or samples < blocks:
        raise DomainError("need at least 2 blocks and one sample per block")
    m = samples // blocks
    means = []
    for b in range(blocks):
        gen = src.generator(b)
        pts = sphere_points(gen, N)
        c = sphere_points(gen, m)
        means.append(math.fsum(_sphere_values(pts, r, R, c)) / m)
    means = np.array(means)
    sigma = annulus_volume("sphere", r, R)
    p = sigma / (4 * math.pi)
    pred = 4 * math.pi / (sigma * N)
    mc = float(np.mean(means))
    se = float(np.std(means, ddof=1) / math.sqrt(blocks))
    return {
        "N": N,
        "r": r,
        "R": R,
        "mc_estimate": mc,
        "mc_stderr": se,
        "prediction": pred,
        "expected": pred * (1 - p),
        "ratio_mc": mc / pred,
        "ratio_se": se / pred,
        "p": p,
        "samples": m * blocks,
        "blocks": blocks,
        "seed": src.seed,
    }


# --------------------------------------------------------------------------
# reports


@dataclass
class VarianceReport:
    space: str
    id: int
    r: float
    R: float
    mc_estimate: float
    mc_stderr: float
    spectral_estimate: Optional[float]
    spectral_tail_bound: Optional[float]
    prediction: float
    ratio_mc: float
    ratio_spectral: Optional[float]
    samples: int
    seed: int
    Lmax: Optional[int]
    count: float

    def to_dict(self) -> dict:
        return asdict(self)

    def aggregate_row(self):
        return (
            self.id,
            self.r,
            self.R,
            self.mc_estimate,
            self.mc_stderr,
            self.spectral_estimate,
            self.spectral_tail_bound,
            self.prediction,
            self.ratio_mc,
            self.ratio_spectral,
        )


def brs_report(obj, r: float, R: float, samples: int, Lmax: Optional[int], src: RandomSource, space: str = "sphere", threads: int = 1) -> VarianceReport:
    """Monte Carlo (and on the sphere spectral) variance with the random-point prediction and ratios.

    space "sphere": obj is n.  space "hyperbolic": obj is a discriminant D.
    """
    if space == "sphere":
        pts = _nonempty(obj)
        N = len(pts)
        mc, se = variance_montecarlo("sphere", pts, r, R, samples, src, threads=threads)
        pred = 4 * math.pi / (annulus_volume("sphere", r, R) * N)
        spec = tail = ratio_spec = None
        if Lmax:
            spec, tail = variance_spectral_sphere(pts, r, R, Lmax)
            ratio_spec = spec / pred
        return VarianceReport("sphere", pts.n, r, R, mc, se, spec, tail, pred, mc / pred, ratio_spec, samples, src.seed, Lmax, N)
    if space == "hyperbolic":
        from equidist import modular

        ens = modular.FormClassEnsemble.build(obj)
        total = len(ens.heegner_points) if ens.D.value < 0 else ens.total_length
        mc, se = variance_montecarlo("hyperbolic", ens, r, R, samples, src, threads=threads, block=1024)
        pred = FD_AREA / (annulus_volume("hyperbolic", r, R) * total)
        return VarianceReport("hyperbolic", ens.D.value, r, R, mc, se, None, None, pred, mc / pred, None, samples, src.seed, None, total)
    raise DomainError(f"unknown space {space!r}")


def aggregate_csv(reports) -> str:
    return csv_text(AGGREGATE_HEADER, (rep.aggregate_row() for rep in reports))
