"""Binary quadratic forms, Heegner points, closed geodesics and distances on the modular surface.

Points of the modular surface are represented by points of the standard
fundamental domain

    F = {z : -1/2 <= Re z < 1/2, |z| >= 1, and Re z <= 0 when |z| = 1}.

Distances on the quotient are computed exactly by enumerating the orbit of a
point inside a Euclidean box (hyperbolic balls are Euclidean disks), so no
fixed word-length search radius is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np

from equidist.arith import DISCRIMINANT_CAP, Discriminant, L1_chi, _as_disc, divisors
from equidist.errors import DomainError, ResourceCapError

BOUNDARY_TOL = 1e-12


# --------------------------------------------------------------------------
# hyperbolic geometry


def _check_upper(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise DomainError("point not in the upper half-plane")
    return z


def hyperbolic_distance(z, w):
    """rho(z, w) = 2 asinh(|z - w| / (2 sqrt(Im z Im w))); broadcasts over arrays."""
    z = _check_upper(z)
    w = _check_upper(w)
    d = 2 * np.arcsinh(np.abs(z - w) / (2 * np.sqrt(z.imag * w.imag)))
    return float(d) if d.ndim == 0 else d


def mobius(g, z):
    (a, b), (c, d) = g
    return (a * z + b) / (c * z + d)


def _matmul(g, h):
    (a, b), (c, d) = g
    (e, f), (p, q) = h
    return ((a * e + b * p, a * f + b * q), (c * e + d * p, c * f + d * q))


def _inverse(g):
    (a, b), (c, d) = g
    return ((d, -b), (-c, a))


IDENTITY = ((1, 0), (0, 1))


def reduce_to_fd(z: complex) -> tuple[complex, tuple]:
    """Reduce z to the fundamental domain; returns (z0, g) with z0 = g z, g in SL2(Z)."""
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("point not in the upper half-plane")
    g = IDENTITY
    for _ in range(10000):
        k = math.floor(z.real + 0.5)
        if k:
            z -= k
            g = _matmul(((1, -k), (0, 1)), g)
        if abs(z) < 1 - BOUNDARY_TOL:
            z = -1 / z
            g = _matmul(((0, -1), (1, 0)), g)
            continue
        break
    else:  # pragma: no cover
        raise RuntimeError("reduction did not terminate")
    # boundary tie-breaks
    if abs(abs(z) - 1) <= BOUNDARY_TOL and z.real > BOUNDARY_TOL:
        z = -1 / z
        g = _matmul(((0, -1), (1, 0)), g)
    if z.real >= 0.5 - BOUNDARY_TOL:
        z -= 1
        g = _matmul(((1, -1), (0, 1)), g)
    return z, g


def reduce_many(zs) -> np.ndarray:
    """Vectorized reduction to the fundamental domain (points only)."""
    z = _check_upper(np.atleast_1d(zs)).copy()
    active = np.ones(len(z), dtype=bool)
    for _ in range(10000):
        if not active.any():
            break
        za = z[active]
        za = za - np.floor(za.real + 0.5)
        inside = np.abs(za) < 1 - BOUNDARY_TOL
        za[inside] = -1 / za[inside]
        z[active] = za
        idx = np.flatnonzero(active)
        active[idx[~inside]] = False
    on_arc = (np.abs(np.abs(z) - 1) <= BOUNDARY_TOL) & (z.real > BOUNDARY_TOL)
    z[on_arc] = -1 / z[on_arc]
    z[z.real >= 0.5 - BOUNDARY_TOL] -= 1
    return z


def in_fundamental_domain(z, tol: float = 1e-9) -> bool:
    z = complex(z)
    return -0.5 - tol <= z.real < 0.5 + tol and abs(z) >= 1 - tol


@lru_cache(maxsize=4096)
def _inverse_table(c: int) -> np.ndarray:
    t = np.zeros(c, dtype=np.int64)
    for x in range(c):
        if math.gcd(x, c) == 1:
            t[x] = pow(x, -1, c) if c > 1 else 0
    return t


def orbit_points_in_box(w0: complex, xlo: float, xhi: float, ylo: float, yhi: float, max_points: int = 5_000_000) -> np.ndarray:
    """All points of the PSL2(Z)-orbit of w0 lying in [xlo, xhi] x [ylo, yhi].

    Cosets are indexed by coprime bottom rows (c, d) with c > 0, or (0, 1);
    Im(g w0) = Im w0 / |c w0 + d|^2 bounds them, and the remaining freedom is
    a horizontal translation.  Elliptic w0 give repeated points, which are
    returned with multiplicity.
    """
    u, v = w0.real, w0.imag
    if ylo <= 0:
        raise DomainError("box must lie in the upper half-plane")
    B = v / ylo
    bases = []
    if ylo <= v <= yhi:
        bases.append(np.array([w0]))
    cmax = int(math.floor(math.sqrt(B) / v + 1e-12))
    total = 0
    for c in range(1, cmax + 1):
        rad2 = B - (c * v) ** 2
        if rad2 < 0:
            continue
        rad = math.sqrt(rad2)
        dlo = math.ceil(-c * u - rad)
        dhi = math.floor(-c * u + rad)
        if dhi < dlo:
            continue
        d = np.arange(dlo, dhi + 1, dtype=np.int64)
        d = d[np.gcd(d, c) == 1]
        if len(d) == 0:
            continue
        a = _inverse_table(c)[d % c]
        b = (a * d - 1) // c
        base = (a * w0 + b) / (c * w0 + d)
        base = base[(base.imag >= ylo) & (base.imag <= yhi)]
        bases.append(base)
        total += len(base)
        if total > max_points:
            raise ResourceCapError("orbit enumeration exceeded its point cap")
    if not bases:
        return np.zeros(0, dtype=complex)
    base = np.concatenate(bases)
    klo = np.ceil(xlo - base.real).astype(np.int64)
    khi = np.floor(xhi - base.real).astype(np.int64)
    reps = np.maximum(khi - klo + 1, 0)
    if reps.sum() > max_points:
        raise ResourceCapError("orbit enumeration exceeded its point cap")
    starts = np.repeat(klo, reps)
    offs = np.arange(reps.sum()) - np.repeat(np.cumsum(reps) - reps, reps)
    return np.repeat(base, reps) + (starts + offs)


def _ball_box(w: complex, radius: float):
    """Bounding box of the hyperbolic ball B(w, radius), a Euclidean disk."""
    x, y = w.real, w.imag
    return x - y * math.sinh(radius), x + y * math.sinh(radius), y * math.exp(-radius), y * math.exp(radius)


def _is_elliptic(z0: complex) -> bool:
    return abs(z0 - 1j) < 1e-9 or abs(z0 - complex(-0.5, math.sqrt(3) / 2)) < 1e-9


def _dedupe(points: np.ndarray) -> np.ndarray:
    if len(points) == 0:
        return points
    key = np.round(points.real * 1e8) + 1j * np.round(points.imag * 1e8)
    _, idx = np.unique(key, return_index=True)
    return points[np.sort(idx)]


def orbit_points_in_ball(z, w, R: float) -> np.ndarray:
    """Distinct orbit points of z within hyperbolic distance R of w (up to translation of w to F).

    Both points are reduced first; the returned points surround the reduced
    center.  Only distances to the center are meaningful to callers.
    """
    z0, _ = reduce_to_fd(z)
    w0, _ = reduce_to_fd(w)
    box = _ball_box(w0, R * (1 + 1e-12) + 1e-12)
    pts = orbit_points_in_box(z0, *box)
    if _is_elliptic(z0):
        pts = _dedupe(pts)
    d = hyperbolic_distance(pts, w0) if len(pts) else np.zeros(0)
    return pts[d <= R]


def orbit_count(z, w, r: float, R: float) -> int:
    """Number of distinct orbit points g z with r <= rho(g z, w) <= R."""
    z0, _ = reduce_to_fd(z)
    w0, _ = reduce_to_fd(w)
    pts = orbit_points_in_box(z0, *_ball_box(w0, R))
    if _is_elliptic(z0):
        pts = _dedupe(pts)
    if len(pts) == 0:
        return 0
    d = 2 * np.arcsinh(np.abs(pts - w0) / (2 * np.sqrt(pts.imag * w0.imag)))
    return int(np.count_nonzero((d >= r) & (d <= R)))


def quotient_distance(z, w) -> float:
    """min over g in SL2(Z) of rho(g z, w), certified by exhaustive orbit enumeration.

    The distance between the reduced representatives is an upper bound U; every
    orbit point within U of the reduced center is enumerated and the minimum
    taken.
    """
    _check_upper(z)
    _check_upper(w)
    z0, _ = reduce_to_fd(z)
    w0, _ = reduce_to_fd(w)
    U = hyperbolic_distance(z0, w0)
    pts = orbit_points_in_box(z0, *_ball_box(w0, U * (1 + 1e-9) + 1e-12))
    if len(pts) == 0:
        return U
    return float(min(U, np.min(hyperbolic_distance(pts, w0))))


def quotient_distances(zs, w, cutoff: Optional[float] = None, group: int = 256) -> np.ndarray:
    """Quotient distances from many points to one center.

    With a cutoff, values above it are reported as inf (enough for annulus
    membership tests and much cheaper).
    """
    z0 = reduce_many(zs)
    w0, _ = reduce_to_fd(w)
    out = np.empty(len(z0))
    order = np.argsort(z0.imag)
    for s in range(0, len(z0), group):
        idx = order[s : s + group]
        zz = z0[idx]
        upper = hyperbolic_distance(zz, w0)
        radius = float(upper.max()) if cutoff is None else min(float(upper.max()), float(cutoff))
        radius = radius * (1 + 1e-9) + 1e-12
        # orbit of w0 near the points, by symmetry of the distance
        xlo = float(np.min(zz.real - zz.imag * math.sinh(radius)))
        xhi = float(np.max(zz.real + zz.imag * math.sinh(radius)))
        ylo = float(np.min(zz.imag)) * math.exp(-radius)
        yhi = float(np.max(zz.imag)) * math.exp(radius)
        pts = orbit_points_in_box(w0, xlo, xhi, ylo, yhi)
        best = upper.copy()
        if len(pts):
            for t in range(0, len(pts), 4096):
                p = pts[t : t + 4096]
                dd = 2 * np.arcsinh(np.abs(zz[:, None] - p[None, :]) / (2 * np.sqrt(zz.imag[:, None] * p.imag[None, :])))
                best = np.minimum(best, dd.min(axis=1))
        if cutoff is not None:
            best[best > cutoff] = np.inf
        out[idx] = best
    return out


# --------------------------------------------------------------------------
# binary quadratic forms


@dataclass(frozen=True, order=True)
class BinaryForm:
    """Integral binary quadratic form a x^2 + b x y + c y^2."""

    a: int
    b: int
    c: int

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def primitive(self) -> bool:
        return math.gcd(math.gcd(self.a, self.b), self.c) == 1

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        D = self.discriminant
        if D < 0:
            return a > 0 and abs(b) <= a <= c and not (b < 0 and (abs(b) == a or a == c))
        s = math.isqrt(D)
        # |sqrt(D) - 2|a|| < b < sqrt(D), in exact integer arithmetic
        return 0 < b <= s and (2 * abs(a) + b) ** 2 > D and (2 * abs(a) - b <= 0 or (2 * abs(a) - b) ** 2 < D)

    def heegner_point(self) -> complex:
        D = self.discriminant
        if D >= 0:
            raise DomainError("Heegner points need D < 0")
        return complex(-self.b / (2 * self.a), math.sqrt(-D) / (2 * self.a))

    def roots(self) -> tuple[float, float]:
        """Endpoints (-b +- sqrt(D)) / 2a, larger first."""
        D = self.discriminant
        if D <= 0:
            raise DomainError("real roots need D > 0")
        s = math.sqrt(D)
        e = sorted([(-self.b + s) / (2 * self.a), (-self.b - s) / (2 * self.a)], reverse=True)
        return e[0], e[1]


def _reduced_definite(D: int) -> list[BinaryForm]:
    amax = math.isqrt(-D // 3)
    a = np.arange(1, amax + 1, dtype=np.int64)[:, None]
    b = np.arange(-amax, amax + 1, dtype=np.int64)[None, :]
    num = b * b - D
    ok = (np.abs(b) <= a) & ((num % (4 * a)) == 0)
    c = np.where(ok, num // (4 * a), 0)
    ok &= c >= a
    ok &= ~((b < 0) & ((-b == a) | (a == c)))
    ok &= np.gcd(np.gcd(a, b), c) == 1
    ai, bi = np.nonzero(ok)
    forms = [BinaryForm(int(a[i, 0]), int(b[0, j]), int(c[i, j])) for i, j in zip(ai, bi)]
    return sorted(forms)


def _rho(f: BinaryForm, s: int, D: int) -> BinaryForm:
    """Reduction step (a, b, c) -> (c, b', a') with b' = -b mod 2c chosen in (sqrt D - 2|c|, sqrt D)."""
    c2 = 2 * abs(f.c)
    bp = s - ((s + f.b) % c2)
    return BinaryForm(f.c, bp, (bp * bp - D) // (4 * f.c))


def _reduced_indefinite(D: int) -> list[BinaryForm]:
    s = math.isqrt(D)
    forms = []
    for b in range(1 if D % 2 else 2, s + 1, 2):
        m = (D - b * b) // 4
        for a0 in divisors(m):
            for a in (a0, -a0):
                f = BinaryForm(a, b, -m // a)
                if f.is_reduced() and f.primitive:
                    forms.append(f)
    return sorted(set(forms))


def narrow_class_cycles(D) -> list[list[BinaryForm]]:
    """Reduction cycles of reduced indefinite forms; each cycle is one narrow class."""
    D = _as_disc(D).value
    if D < 0:
        raise DomainError("cycles exist only for D > 0")
    s = math.isqrt(D)
    remaining = set(_reduced_indefinite(D))
    cycles = []
    while remaining:
        start = min(remaining)
        cyc = [start]
        f = _rho(start, s, D)
        while f != start:
            if f not in remaining:
                raise ArithmeticError(f"reduction operator left the reduced set at {f}")
            cyc.append(f)
            f = _rho(f, s, D)
        remaining.difference_update(cyc)
        cycles.append(cyc)
    return sorted(cycles, key=lambda c: c[0])


def reduced_forms(D) -> list[BinaryForm]:
    """One reduced representative per class (D < 0) or per narrow class (D > 0)."""
    D = _as_disc(D).value
    if abs(D) > DISCRIMINANT_CAP:
        raise ResourceCapError(f"|D| = {abs(D)} exceeds cap {DISCRIMINANT_CAP}")
    if D < 0:
        return _reduced_definite(D)
    return [cyc[0] for cyc in narrow_class_cycles(D)]


def class_number(D) -> int:
    return len(reduced_forms(D))


def heegner_points(D) -> list[complex]:
    D = _as_disc(D).value
    if D > 0:
        raise DomainError("Heegner points are defined for D < 0")
    return [f.heegner_point() for f in reduced_forms(D)]


# --------------------------------------------------------------------------
# Pell equation and closed geodesics


def continued_fraction_period(D: int) -> list[int]:
    """Partial quotients of one period of omega = (b + sqrt D)/2, b the largest integer < sqrt D with b = D mod 2.

    omega is a reduced quadratic irrational, so its expansion is purely periodic.
    """
    s = math.isqrt(D)
    if s * s == D:
        raise DomainError("D must not be a square")
    b = s if (s - D) % 2 == 0 else s - 1
    P, Q = b, 2
    quotients = []
    while True:
        a = (P + s) // Q
        quotients.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
        if (P, Q) == (b, 2):
            return quotients


def pell(D, narrow: bool = True) -> tuple[int, int]:
    """Fundamental solution (t, u) of t^2 - D u^2 = 4 (or -4 if allowed and narrow=False)."""
    D = int(D)
    if D <= 0:
        raise DomainError("Pell equation needs D > 0")
    quots = continued_fraction_period(D)
    s = math.isqrt(D)
    b = s if (s - D) % 2 == 0 else s - 1
    q_prev, q = 0, 1
    for a in quots[1:]:
        q_prev, q = q, a * q + q_prev
    # epsilon = q_{l-1} omega + q_{l-2}, convergent denominators with q_{-1} = 0, q_0 = 1
    t = q * b + 2 * q_prev
    u = q
    norm = t * t - D * u * u
    if norm not in (4, -4):
        raise ArithmeticError(f"continued fraction gave t^2 - D u^2 = {norm}")
    if norm == -4 and narrow:
        t, u = (t * t + D * u * u) // 2, t * u
    return t, u


def _log_unit(t: int) -> float:
    """log((t + sqrt(t^2 - 4))/2) for integer t >= 3."""
    if t < 10**300:
        return math.acosh(t / 2)
    return math.log(t) - 1.0 / t**2


@dataclass(frozen=True)
class Geodesic:
    """Primitive closed geodesic attached to an indefinite form Q = (a, b, c).

    The lift is the semicircle through the roots of Q; the generator of its
    stabilizer is the automorph [[(t - b u)/2, -c u], [a u, (t + b u)/2]].
    """

    form: BinaryForm
    t: int
    u: int
    length: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "length", 2 * _log_unit(self.t))

    @property
    def D(self) -> int:
        return self.form.discriminant

    @property
    def endpoints(self) -> tuple[float, float]:
        return self.form.roots()

    @property
    def automorph(self):
        a, b, c = self.form.a, self.form.b, self.form.c
        t, u = self.t, self.u
        return (((t - b * u) // 2, -c * u), (a * u, (t + b * u) // 2))

    def point(self, tau):
        """Point of the lift at signed arc length tau from the top of the semicircle."""
        e1, e2 = self.endpoints
        wv = 1j * np.exp(np.asarray(tau, dtype=float))
        return (e2 * wv - e1) / (wv - 1)

    def frame(self, z):
        """(signed distance to the lift, arc-length coordinate of the foot) for points z."""
        e1, e2 = self.endpoints
        f = (np.asarray(z, dtype=complex) - e1) / (np.asarray(z, dtype=complex) - e2)
        d = np.arcsinh(np.abs(f.real) / f.imag)
        return d, np.log(np.abs(f))

    def sample_path(self, step: float = 1e-3) -> np.ndarray:
        """Points of one period reduced to the fundamental domain, consecutive ones <= step apart."""
        n = max(2, math.ceil(self.length / step))
        tau = -self.length / 2 + (np.arange(n) + 0.5) * (self.length / n)
        return reduce_many(self.point(tau))

    @cached_property
    def _segments(self):
        """Pieces of one period of length <= 1/2, each moved next to F.

        Returns (tau_lo, tau_hi, g, samples) per piece, where g maps the piece
        near F and samples are the moved sample points.
        """
        J = max(1, math.ceil(self.length / 0.5))
        edges = -self.length / 2 + self.length * np.arange(J + 1) / J
        pieces = []
        for j in range(J):
            lo, hi = float(edges[j]), float(edges[j + 1])
            _, g = reduce_to_fd(complex(self.point(0.5 * (lo + hi))))
            samples = mobius(g, self.point(np.linspace(lo, hi, 9)))
            pieces.append((lo, hi, g, samples))
        return pieces


def closed_geodesics(D) -> list[Geodesic]:
    D = _as_disc(D).value
    if D < 0:
        raise DomainError("closed geodesics need D > 0")
    t, u = pell(D)
    return [Geodesic(f, t, u) for f in reduced_forms(D)]


def _chord(rho: float, d: np.ndarray) -> np.ndarray:
    """Length of a geodesic inside a ball of radius rho whose center is at distance d."""
    out = np.zeros_like(d)
    inside = d <= rho
    out[inside] = 2 * np.arccosh(np.maximum(math.cosh(rho) / np.cosh(d[inside]), 1.0))
    return out


def _length_orbit(C: Geodesic, center: complex, r: float, R: float) -> float:
    w0, _ = reduce_to_fd(center)
    total = 0.0
    # sample points on a piece are at most this far apart
    delta = C.length / max(1, len(C._segments)) / 8 / 2
    for lo, hi, g, samples in C._segments:
        rad = R + delta
        xlo = float(np.min(samples.real - samples.imag * math.sinh(rad)))
        xhi = float(np.max(samples.real + samples.imag * math.sinh(rad)))
        ylo = float(np.min(samples.imag)) * math.exp(-rad)
        yhi = float(np.max(samples.imag)) * math.exp(rad)
        pts = orbit_points_in_box(w0, xlo, xhi, ylo, yhi)
        if len(pts) == 0:
            continue
        p = mobius(_inverse(g), pts)
        d, tau = C.frame(p)
        keep = (tau >= lo) & (tau < hi) & (d <= R)
        if keep.any():
            dk = d[keep]
            total += float(np.sum(_chord(R, dk) - _chord(r, dk)))
    return total


def geodesic_annulus_length(C: Geodesic, center, r: float, R: float, mode: str = "quotient", step: float = 1e-3, return_error: bool = False):
    """Length of the closed geodesic C inside the annulus r <= dist <= R around center.

    mode "quotient": arc length of the points of C (on the modular surface)
    whose quotient distance to the center lies in [r, R]; measured by sampling
    the path at spacing <= step, with an error bound of one step per boundary
    crossing.

    mode "orbit": sum over lifts of the center of the exact chord lengths
    2 acosh(cosh R / cosh d) - 2 acosh(cosh r / cosh d), i.e. the length with
    multiplicity counted by the unfolded kernel.  This is the quantity whose
    average over the center equals length(C) * area(annulus) / area(F).
    """
    if not (0 <= r < R):
        raise DomainError(f"need 0 <= r < R, got r={r}, R={R}")
    center = complex(center)
    if center.imag <= 0:
        raise DomainError("center must lie in the upper half-plane")
    if mode == "orbit":
        val = _length_orbit(C, center, r, R)
        return (val, 1e-12 * max(1.0, val)) if return_error else val
    if mode != "quotient":
        raise DomainError(f"unknown mode {mode!r}")
    n = max(2, math.ceil(C.length / step))
    h = C.length / n
    pts = C.sample_path(step)
    d = quotient_distances(pts, center, cutoff=R)
    inside = (d >= r) & (d <= R)
    val = h * int(np.count_nonzero(inside))
    crossings = int(np.count_nonzero(inside != np.roll(inside, 1)))
    err = h * crossings
    return (val, err) if return_error else val


# --------------------------------------------------------------------------
# ensembles and exports


@dataclass(frozen=True)
class FormClassEnsemble:
    """Class representatives of discriminant D with their Heegner points or geodesics."""

    D: Discriminant
    forms: tuple
    heegner_points: tuple = ()
    geodesics: tuple = ()

    @classmethod
    def build(cls, D) -> "FormClassEnsemble":
        D = _as_disc(D)
        forms = tuple(reduced_forms(D))
        if D.value < 0:
            return cls(D, forms, heegner_points=tuple(f.heegner_point() for f in forms))
        t, u = pell(D.value)
        return cls(D, forms, geodesics=tuple(Geodesic(f, t, u) for f in forms))

    @property
    def class_number(self) -> int:
        return len(self.forms)

    def class_number_formula(self) -> float:
        """w sqrt|D| L(1, chi_D) / 2 pi for D < 0, total length for D > 0."""
        D = self.D.value
        if D < 0:
            return self.D.w * math.sqrt(-D) * L1_chi(D) / (2 * math.pi)
        return 2 * math.sqrt(D) * L1_chi(D)

    @property
    def total_length(self) -> float:
        return float(sum(g.length for g in self.geodesics))


FORMS_HEADER = ("D", "a", "b", "c")
HEEGNER_HEADER = ("D", "re", "im")
GEODESICS_HEADER = ("D", "e1", "e2", "length")


def forms_rows(ens: FormClassEnsemble):
    return [(ens.D.value, f.a, f.b, f.c) for f in ens.forms]


def heegner_rows(ens: FormClassEnsemble):
    return [(ens.D.value, z.real, z.imag) for z in ens.heegner_points]


def geodesic_rows(ens: FormClassEnsemble):
    return [(ens.D.value, *g.endpoints, g.length) for g in ens.geodesics]
