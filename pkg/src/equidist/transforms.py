"""Legendre and conical functions and the Selberg/Harish-Chandra transforms of annulus kernels.

For the annulus A(r, R) the normalized indicator kernel has spectral multipliers

    sphere:      h~(m) = 2 pi / sigma(A) * int_r^R P_m(cos th) sin th dth
    hyperbolic:  h(t)  = 2 pi / mu(A)    * int_r^R P_{-1/2+it}(cosh rho) sinh rho drho

with h~(0) = h(i/2) = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import j0, jv, loggamma, rgamma

from equidist.errors import DomainError, ResourceCapError
from equidist.io import csv_text
from equidist.sphere import annulus_volume

CONICAL_T_CAP = 1e3
PROFILE_HEADER = ("space", "r", "R", "freq", "exact", "hilb", "asym_main_sq", "quad_err")


@lru_cache(maxsize=32)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def composite_nodes(a: float, b: float, panels: int, order: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Gauss-Legendre on [a, b]."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


# --------------------------------------------------------------------------
# Legendre polynomials


def legendre_p(m: int, x):
    """P_m(x) by the three-term recurrence; x in [-1, 1]."""
    m = int(m)
    if m < 0:
        raise DomainError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1):
        raise DomainError("legendre_p needs |x| <= 1")
    p0 = np.ones_like(x)
    if m == 0:
        return float(p0) if p0.ndim == 0 else p0
    p1 = x.copy()
    for k in range(1, m):
        p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
    return float(p1) if p1.ndim == 0 else p1


def legendre_all(L: int, x) -> np.ndarray:
    """Array of P_l(x) for l = 0..L, shape (L + 1,) + shape(x).

    The recurrence commutes exactly with x -> -x, so P_l(-x) = (-1)^l P_l(x)
    holds bit for bit.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((L + 1,) + x.shape)
    out[0] = 1.0
    if L >= 1:
        out[1] = x
    for k in range(1, L):
        out[k + 1] = ((2 * k + 1) * x * out[k] - k * out[k - 1]) / (k + 1)
    return out


def bessel_j0(x):
    """J_0 (scipy's Cephes implementation)."""
    return j0(x)


def bessel_j0_series(x: float, terms: int = 80) -> float:
    """Power series of J_0; accurate for |x| <= 8 or so."""
    s, term = 0.0, 1.0
    q = -(x * x) / 4
    for k in range(terms):
        s += term
        term *= q / ((k + 1) ** 2)
    return s


def bessel_j0_integral(x: float, n: int = 64) -> float:
    """(1/pi) int_0^pi cos(x sin phi) dphi by Gauss-Legendre."""
    nodes, weights = composite_nodes(0.0, math.pi, max(1, int(abs(x) / 4) + 1), order=n)
    return float(np.dot(weights, np.cos(x * np.sin(nodes))) / math.pi)


# --------------------------------------------------------------------------
# conical functions


def _check_t(t) -> complex:
    t = complex(t)
    if t.imag != 0 and (t.real != 0 or abs(t.imag) > 0.5):
        raise DomainError("t must be real or purely imaginary with |Im t| <= 1/2")
    if abs(t) > CONICAL_T_CAP:
        raise ResourceCapError(f"|t| = {abs(t)} exceeds cap {CONICAL_T_CAP}")
    return t


def _conical_rho(t: complex, rho: np.ndarray, order: int = 20) -> np.ndarray:
    """P_{-1/2+it}(cosh rho) for an array of rho > 0 by the Mehler-Dirichlet integral.

    P = (2/pi) int_0^rho cos(t u) / sqrt(2 (cosh rho - cosh u)) du, with u =
    rho sin(psi) and cosh rho - cosh u = 2 sinh((rho+u)/2) sinh(rho s^2),
    s = sin(pi/4 - psi/2), which removes the endpoint singularity and the
    cancellation in the denominator.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    rmax = float(rho.max()) if rho.size else 0.0
    panels = 1 + int(math.ceil(abs(t) * rmax / 3.0)) + int(math.ceil(math.sqrt(rmax)))
    psi, w = composite_nodes(0.0, math.pi / 2, panels, order)
    s = np.sin(math.pi / 4 - psi / 2)
    c = np.cos(math.pi / 4 - psi / 2)
    R_ = rho[:, None]
    u = R_ * np.sin(psi)[None, :]
    num = R_ * 2 * s * c
    den = 2 * np.sqrt(np.sinh((R_ + u) / 2) * np.sinh(R_ * s * s))
    vals = np.cos(t * u) * num / den
    out = (2 / math.pi) * (vals @ w)
    return out.real


def conical_p(t, y, return_error: bool = False):
    """Conical function P_{-1/2+it}(y) for y >= 1.

    t may be real, or purely imaginary with |Im t| <= 1/2 (t = i/2 gives 1).
    With return_error, also returns the change under a higher-order rule.
    """
    t = _check_t(t)
    y = np.asarray(y, dtype=float)
    if np.any(y < 1):
        raise DomainError("conical_p needs y >= 1")
    scalar = y.ndim == 0
    yy = np.atleast_1d(y)
    rho = np.arccosh(yy)
    out = np.ones_like(rho)
    pos = rho > 0
    err = np.zeros_like(rho)
    if pos.any():
        out[pos] = _conical_rho(t, rho[pos])
        if return_error:
            err[pos] = np.abs(_conical_rho(t, rho[pos], order=32) - out[pos])
    if scalar:
        return (float(out[0]), float(err[0])) if return_error else float(out[0])
    return (out, err) if return_error else out


def conical_p_hypergeometric(t: float, y: float, tol: float = 1e-17, max_terms: int = 100000) -> float:
    """2F1(1/2 - it, 1/2 + it; 1; (1 - y)/2) summed directly; converges for 1 <= y < 3."""
    x = (1 - y) / 2
    if abs(x) >= 1:
        raise DomainError("series needs |1 - y| < 2")
    term, s = 1.0, 1.0
    for k in range(max_terms):
        term *= ((k + 0.5) ** 2 + t * t) / ((k + 1) ** 2) * x
        s += term
        if abs(term) < tol * abs(s):
            break
    return s


# --------------------------------------------------------------------------
# Selberg / Harish-Chandra transforms


def _check_annulus(r, R, space):
    if not (0 <= r < R):
        raise DomainError(f"need 0 <= r < R, got r={r}, R={R}")
    if space == "sphere" and R > math.pi:
        raise DomainError("spherical annulus needs R <= pi")


def shc_sphere_all(r: float, R: float, L: int) -> np.ndarray:
    """h~(m) for m = 0..L from int P_m = (P_{m+1} - P_{m-1}) / (2m + 1)."""
    _check_annulus(r, R, "sphere")
    sigma = annulus_volume("sphere", r, R)
    P = legendre_all(L + 1, np.array([math.cos(r), math.cos(R)]))
    out = np.empty(L + 1)
    out[0] = 1.0
    if L >= 1:
        m = np.arange(1, L + 1)
        F = (P[m + 1] - P[m - 1]) / (2 * m + 1)[:, None]
        out[1:] = 2 * math.pi / sigma * (F[:, 0] - F[:, 1])
    return out


def shc_sphere(r: float, R: float, m: int) -> float:
    m = int(m)
    if m < 0:
        raise DomainError("m must be nonnegative")
    return float(shc_sphere_all(r, R, m)[m])


def _shc_hyperbolic_direct(r: float, R: float, t: complex, refine: int = 1) -> float:
    panels = refine * (1 + int(math.ceil(abs(t) * (R - r) / 3.0)))
    rho, w = composite_nodes(r, R, panels)
    P = _conical_rho(t, rho, order=20 if refine == 1 else 32)
    mu = annulus_volume("hyperbolic", r, R)
    return float(2 * math.pi / mu * np.dot(w, P * np.sinh(rho)))


def _sqrt_gap(c: float, u: np.ndarray) -> np.ndarray:
    """sqrt(2 (cosh c - cosh u)) for 0 <= u <= c, without cancellation."""
    return np.sqrt(4 * np.sinh((c + u) / 2) * np.sinh((c - u) / 2))


def _shc_hyperbolic_abel(r: float, R: float, t: complex, order: int = 20) -> float:
    """Single-integral form (4/mu) int_0^R cos(tu) [g_R(u) - 1_{u<r} g_r(u)] du,
    g_c(u) = sqrt(2 (cosh c - cosh u)); obtained by swapping the order of
    integration in the Mehler-Dirichlet representation.
    """
    mu = annulus_volume("hyperbolic", r, R)
    total = 0.0
    # u in [0, r]: u = r sin(psi), both square roots smooth in psi
    if r > 0:
        panels = 1 + int(math.ceil(abs(t) * r / 3.0))
        psi, w = composite_nodes(0.0, math.pi / 2, panels, order)
        u = r * np.sin(psi)
        jac = r * np.cos(psi)
        f = np.cos(t * u) * (_sqrt_gap(R, u) - _sqrt_gap(r, u)) * jac
        total += float(np.real(np.dot(w, f)))
    # u in [r, R]: u = R sin(psi)
    a = math.asin(r / R)
    panels = 1 + int(math.ceil(abs(t) * (R - r) / 3.0))
    psi, w = composite_nodes(a, math.pi / 2, panels, order)
    u = R * np.sin(psi)
    f = np.cos(t * u) * _sqrt_gap(R, u) * R * np.cos(psi)
    total += float(np.real(np.dot(w, f)))
    return 4 / mu * total


def shc_hyperbolic(r: float, R: float, t, method: str = "direct", return_error: bool = False):
    """h_{r,R}(t) for real t or t = i*tau with |tau| <= 1/2.

    method "direct" integrates conical_p against sinh; "abel" uses the
    equivalent single integral.  The error estimate is the change under a
    refined rule.
    """
    _check_annulus(r, R, "hyperbolic")
    t = _check_t(t)
    if method == "direct":
        val = _shc_hyperbolic_direct(r, R, t)
        err = abs(_shc_hyperbolic_direct(r, R, t, refine=2) - val) if return_error else 0.0
    elif method == "abel":
        val = _shc_hyperbolic_abel(r, R, t)
        err = abs(_shc_hyperbolic_abel(r, R, t, order=32) - val) if return_error else 0.0
    else:
        raise DomainError(f"unknown method {method!r}")
    return (val, err) if return_error else val


def hilb_sphere(r: float, R: float, m: int, order: int = 20) -> float:
    """Transform with P_m(cos th) replaced by sqrt(th/sin th) J0(th (m + 1/2))."""
    _check_annulus(r, R, "sphere")
    k = m + 0.5
    panels = 1 + int(math.ceil(k * (R - r) / 3.0))
    th, w = composite_nodes(r, R, panels, order)
    safe = np.where(th > 0, th, 1.0)
    amp = np.where(th > 0, np.sqrt(safe * np.sin(safe)), 0.0)
    sigma = annulus_volume("sphere", r, R)
    return float(2 * math.pi / sigma * np.dot(w, amp * j0(th * k)))


def hilb_hyperbolic(r: float, R: float, t, order: int = 20) -> float:
    """Transform with the conical function replaced by sqrt(rho/sinh rho) J0(rho t).

    Purely imaginary t is allowed (J0 of an imaginary argument is I0).
    """
    _check_annulus(r, R, "hyperbolic")
    t = _check_t(t)
    panels = 1 + int(math.ceil(abs(t) * (R - r) / 3.0))
    rho, w = composite_nodes(r, R, panels, order)
    amp = np.sqrt(rho * np.sinh(rho))
    mu = annulus_volume("hyperbolic", r, R)
    bes = j0(rho * t.real) if t.imag == 0 else jv(0, rho * t).real
    return float(2 * math.pi / mu * np.dot(w, amp * bes))


def hilb_envelope(space: str, r: float, R: float, freq: float, C: float = 1.0) -> float:
    """Transform of the pointwise Hilb error bound C theta^2 (freq <= 1/theta) or C sqrt(theta)/freq^(3/2)."""
    panels = 4
    th, w = composite_nodes(r, R, panels)
    pointwise = np.where(freq * th <= 1, th**2, np.sqrt(th) / max(freq, 1e-300) ** 1.5)
    jac = np.sin(th) if space == "sphere" else np.sinh(th)
    meas = annulus_volume(space, r, R)
    return float(C * 2 * math.pi / meas * np.dot(w, pointwise * jac))


def shc_asymptotic_main(space: str, r: float, R: float, freq: float, phase: str = "corrected") -> float:
    """Main term of the squared transform for thin annuli (R - r << r).

    With k = m + 1/2 (sphere) or k = |t| (hyperbolic), integrating the large-
    argument form of J0 by parts gives

        h^2 ~ 8 / (s((R - r)/2) vol(A)) * k^-3 * sin^2((R - r) k / 2) * cos^2((R + r) k / 2 - pi/4)

    with s = sin or sinh.  phase="display" replaces the last factor by
    sin^2((R + r) k / 2), a variant whose error is not O(k^-3) (kept for
    comparison).  Outside the regime R - r <= r, freq >= 1/r the value is
    still returned; see `asymptotic_regime`.
    """
    _check_annulus(r, R, space)
    if space == "sphere":
        k = freq + 0.5
        pref = 8 / (math.sin((R - r) / 2) * annulus_volume("sphere", r, R))
    elif space == "hyperbolic":
        k = abs(freq)
        pref = 8 / (math.sinh((R - r) / 2) * annulus_volume("hyperbolic", r, R))
    else:
        raise DomainError(f"unknown space {space!r}")
    if k == 0:
        raise DomainError("main term needs nonzero frequency")
    if phase == "corrected":
        osc = math.cos((R + r) * k / 2 - math.pi / 4) ** 2
    elif phase == "display":
        osc = math.sin((R + r) * k / 2) ** 2
    else:
        raise DomainError(f"unknown phase {phase!r}")
    return pref / k**3 * math.sin((R - r) * k / 2) ** 2 * osc


def asymptotic_regime(r: float, R: float, freq: float) -> str:
    """'outside', 'middle' (1/r <= freq <= 1/(R-r)) or 'high' (freq >= 1/(R-r))."""
    if R - r > r or abs(freq) < 1 / r:
        return "outside"
    return "middle" if abs(freq) <= 1 / (R - r) else "high"


def asymptotic_envelope(r: float, R: float, freq: float) -> float:
    """Displayed error size 1/(r^3 k^3) (middle) or 1/(r^3 (R-r)^2 k^5) (high)."""
    k = abs(freq)
    if abs(freq) <= 1 / (R - r):
        return 1 / (r**3 * k**3)
    return 1 / (r**3 * (R - r) ** 2 * k**5)


def decay_bound(r: float, R: float, freq: float) -> float:
    """Three-regime upper bound shape: 1, 1/sqrt(r k), 1/(sqrt(r) (R - r) k^(3/2))."""
    k = abs(freq)
    if k <= 1 / r:
        return 1.0
    if k <= 1 / (R - r):
        return 1 / math.sqrt(r * k)
    return 1 / (math.sqrt(r) * (R - r) * k**1.5)


# --------------------------------------------------------------------------
# profiles


@dataclass
class SHCProfile:
    space: str
    r: float
    R: float
    grid: list
    exact: list = field(default_factory=list)
    hilb: list = field(default_factory=list)
    asymptotic: list = field(default_factory=list)
    quadrature_error: list = field(default_factory=list)

    def rows(self):
        for f, e, h, a, q in zip(self.grid, self.exact, self.hilb, self.asymptotic, self.quadrature_error):
            yield (self.space, self.r, self.R, f, e, h, a, q)

    def to_csv(self) -> str:
        return csv_text(PROFILE_HEADER, self.rows())

    def decay_constants(self) -> dict:
        """max |exact| / decay_bound over each regime of the frequency grid."""
        out = {}
        for f, e in zip(self.grid, self.exact):
            k = abs(f)
            if k == 0 or isinstance(f, complex):
                continue
            reg = "low" if k <= 1 / self.r else ("middle" if k <= 1 / (self.R - self.r) else "high")
            c = abs(e) / decay_bound(self.r, self.R, k)
            out[reg] = max(out.get(reg, 0.0), c)
        return out


def build_profile(space: str, r: float, R: float, grid) -> SHCProfile:
    """Tabulate exact, Hilb-approximate and asymptotic main-term values.

    For the sphere the exact value is the closed form and quad_err is its
    difference from direct Gauss-Legendre quadrature; for the hyperbolic
    plane it is the change of the quadrature under refinement.  The
    hyperbolic grid may contain t = 0.5j, the normalization point.
    """
    _check_annulus(r, R, space)
    prof = SHCProfile(space, r, R, list(grid))
    for f in prof.grid:
        if space == "sphere":
            m = int(f)
            ex = shc_sphere(r, R, m)
            qe = abs(ex - _shc_sphere_quadrature(r, R, m))
            hb = hilb_sphere(r, R, m) if m > 0 else 1.0
        else:
            ex, qe = shc_hyperbolic(r, R, f, return_error=True)
            hb = hilb_hyperbolic(r, R, f)
        real_nonzero = space == "sphere" or (complex(f).imag == 0 and f != 0)
        asym = shc_asymptotic_main(space, r, R, abs(f)) if real_nonzero else float("nan")
        prof.exact.append(ex)
        prof.hilb.append(hb)
        prof.asymptotic.append(asym)
        prof.quadrature_error.append(qe)
    return prof


def _shc_sphere_quadrature(r: float, R: float, m: int) -> float:
    panels = 1 + int(math.ceil((m + 0.5) * (R - r) / 3.0))
    th, w = composite_nodes(r, R, panels)
    sigma = annulus_volume("sphere", r, R)
    return float(2 * math.pi / sigma * np.dot(w, legendre_p(m, np.cos(th)) * np.sin(th)))


# --------------------------------------------------------------------------
# convolution on the sphere


def _azimuth_measure(theta: float, alpha: np.ndarray, r: float, R: float) -> np.ndarray:
    """Measure of phi in [0, 2 pi) with r <= angle(z, w) <= R, where w is at angle alpha
    and azimuth phi around zeta, and z is at angle theta from zeta."""
    alpha = np.asarray(alpha, dtype=float)
    a = math.cos(theta) * np.cos(alpha)
    b = math.sin(theta) * np.sin(alpha)

    def above(c):  # measure of phi with a + b cos(phi) >= c
        safe = np.where(b > 0, b, 1.0)
        x = np.where(b > 0, (c - a) / safe, np.where(a >= c, -2.0, 2.0))
        return 2 * np.arccos(np.clip(x, -1.0, 1.0))

    return above(math.cos(R)) - above(math.cos(r))


def _mapped_nodes(breaks, order: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on each piece after x = a + (b - a) sin^2(pi u / 2), which
    smooths square-root behaviour at both ends of every piece."""
    xg, wg = gauss_legendre(order)
    u = (xg + 1) / 2
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        nodes.append(a + (b - a) * np.sin(np.pi * u / 2) ** 2)
        weights.append((b - a) * np.pi / 2 * np.sin(np.pi * u) / 2 * wg)
    return np.concatenate(nodes), np.concatenate(weights)


def _convolved_many(thetas: np.ndarray, r: float, R: float, rho: float, order: int = 40) -> np.ndarray:
    s1 = annulus_volume("sphere", r, R)
    s2 = annulus_volume("sphere", 0.0, rho)
    out = np.empty(len(thetas))
    for i, th in enumerate(thetas):
        # kinks where the cap boundary at angle alpha touches an annulus edge,
        # directly or after passing through the antipode of zeta
        kinks = (abs(th - R), abs(th - r), th + r, th + R, 2 * math.pi - th - r, 2 * math.pi - th - R)
        brk = sorted({0.0, rho, *(x for x in kinks if 0 < x < rho)})
        al, w = _mapped_nodes(brk, order)
        out[i] = np.dot(w, _azimuth_measure(th, al, r, R) * np.sin(al))
    return out / (s1 * s2)


def convolved_kernel(theta: float, r: float, R: float, rho: float) -> float:
    """(k_{r,R} * k_{0,rho})(theta): normalized indicator kernels convolved on S^2.

    Equals sigma(A_{r,R}(z) cap B_rho(zeta)) / (sigma(A_{r,R}) sigma(B_rho)) for
    points at angle theta; computed by integrating the exact azimuthal
    measure over the polar angle of the cap.
    """
    return float(_convolved_many(np.array([theta]), r, R, rho)[0])


def convolution_check(r: float, R: float, rho: float, m: int, order: int = 40) -> dict:
    """Transform of the numerically convolved kernel vs the product of the two transforms."""
    if not (0 < rho < R) or not (0 <= r < R):
        raise DomainError("need 0 < rho < R and 0 <= r < R")
    lo, hi = max(0.0, r - rho), min(math.pi, R + rho)
    edges = (r - rho, r + rho, R - rho, R + rho, rho - r, rho - R, 2 * math.pi - r - rho, 2 * math.pi - R - rho)
    cuts = {lo, hi, *(x for x in edges if lo < x < hi)}
    # refine so that each piece holds only a few oscillations of P_m
    pieces = []
    srt = sorted(cuts)
    for a, b in zip(srt[:-1], srt[1:]):
        k = 1 + int((b - a) * (m + 1) / 2)
        pieces.extend(np.linspace(a, b, k + 1)[:-1])
    pieces.append(srt[-1])
    th, w = _mapped_nodes(pieces, order)
    vals = _convolved_many(th, r, R, rho, order)
    lhs = 2 * math.pi * float(np.dot(w, legendre_p(m, np.cos(th)) * vals * np.sin(th)))
    rhs = shc_sphere(r, R, m) * shc_sphere(0.0, rho, m)
    return {"lhs": lhs, "rhs": rhs, "diff": abs(lhs - rhs)}


def sandwich_check(theta: float, R: float, rho: float) -> dict:
    """Pointwise bounds for the ball kernel k_{0,R} by convolutions with k_{0,rho}:

    sigma(B_{R-rho})/sigma(B_R) * (k_{0,R-rho} * k_{0,rho})(theta) <= k_{0,R}(theta)
        <= sigma(B_{R+rho})/sigma(B_R) * (k_{0,R+rho} * k_{0,rho})(theta)
    """
    if not (0 < rho < R) or R + rho > math.pi:
        raise DomainError("need 0 < rho < R and R + rho <= pi")
    sR = annulus_volume("sphere", 0.0, R)
    k = (1.0 / sR) if theta <= R else 0.0
    low = annulus_volume("sphere", 0.0, R - rho) / sR * convolved_kernel(theta, 0.0, R - rho, rho)
    high = annulus_volume("sphere", 0.0, R + rho) / sR * convolved_kernel(theta, 0.0, R + rho, rho)
    tol = 1e-10 / sR
    return {"kernel": k, "lower": low, "upper": high, "ok": low <= k + tol and k <= high + tol}


# --------------------------------------------------------------------------
# test function


@dataclass(frozen=True)
class TestFunctionParams:
    r: float
    R: float
    T1: float
    T2: float
    M: int = 100

    def __post_init__(self):
        if not (0 <= self.r < self.R):
            raise DomainError("need 0 <= r < R")
        if not (0 < self.T1 < self.T2):
            raise DomainError("need 0 < T1 < T2")
        if int(self.M) != self.M or self.M < 20:
            raise DomainError("M must be an integer >= 20")

    @classmethod
    def from_alpha(cls, r: float, R: float, alpha: float, M: int = 100) -> "TestFunctionParams":
        """T1 = (R - r)^(alpha - 1), T2 = (R - r)^(-1 - alpha)."""
        d = R - r
        return cls(r, R, d ** (-1 + alpha), d ** (-1 - alpha), M)


TestFunctionParams.__test__ = False  # not a pytest class


def h2_factor(t, M: int = 100):
    """(2 pi)^(-4M-2) (4M+3)^(-3) Gamma(2M/(4M+3) + it/(4M+3))^(4M+3) Gamma(2M/(4M+3) - it/(4M+3))^(4M+3)
    / (Gamma(1/2+it) Gamma(1/2-it)).

    Accepts complex t (analytic continuation).  Near the real axis and for
    |t| <= 8 the denominator is applied through 1/Gamma, so the zeros at
    t = +-i(n - 1/2) are exact; elsewhere everything is done in log space.
    """
    t = np.asarray(t, dtype=complex)
    n = 4 * M + 3
    a = 2 * M / n
    lg = n * (loggamma(a + 1j * t / n) + loggamma(a - 1j * t / n))
    lg = lg - (4 * M + 2) * math.log(2 * math.pi) - 3 * math.log(n)
    small = np.abs(t) <= 8
    val = np.empty_like(t)
    val[small] = np.exp(lg[small]) * rgamma(0.5 + 1j * t[small]) * rgamma(0.5 - 1j * t[small])
    big = ~small
    tb = t[big]
    # 1/(Gamma(1/2+it) Gamma(1/2-it)) = cosh(pi t)/pi, as exponentials to avoid overflow
    sgn = np.where(tb.real >= 0, 1.0, -1.0)
    val[big] = np.exp(lg[big] + sgn * np.pi * tb - math.log(2 * math.pi)) * (1 + np.exp(-2 * sgn * np.pi * tb))
    if np.all(t.imag == 0):
        val = val.real
    return val if val.ndim else val[()]


def test_function_h(t, p: TestFunctionParams):
    """h(t) = h1(t) h2(t) h3(t): smooth window, Gamma-ratio factor, and sin^2 sin^2."""
    t = np.asarray(t, dtype=complex)
    M = p.M
    with np.errstate(over="ignore"):
        h1 = np.exp(-((t / p.T2) ** (2 * M))) * (1 - np.exp(-((t / p.T1) ** (2 * M))))
    h2 = np.asarray(h2_factor(t, M), dtype=complex)
    h3 = np.sin((p.R - p.r) * t / 2) ** 2 * np.sin((p.R + p.r) * t / 2) ** 2
    val = h1 * h2 * h3
    if np.all(t.imag == 0):
        val = val.real
    return val if val.ndim else val[()]


test_function_h.__test__ = False


def test_function_envelope(t: float, p: TestFunctionParams) -> float:
    """Error size for h(t) - h3(t)/|t|^3 on T1 <= |t| <= T2 (two sub-ranges split at 1/(R - r))."""
    t = abs(float(t))
    d = p.R - p.r
    M = p.M
    upper = math.exp((2 * M - 1) * math.log(t) - 2 * M * math.log(p.T2))
    if t <= 1 / d:
        low = math.exp(-math.exp(2 * M * math.log(t / p.T1))) if t > 0 else 1.0
        return d * d / t**2 + d * d * upper + d * d * low / t
    return 1 / t**4 + upper / t**2


test_function_envelope.__test__ = False
