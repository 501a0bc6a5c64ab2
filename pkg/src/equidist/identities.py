"""Numerical checks of Mellin transforms of Bessel kernels, the H(t) factor, Voronoi residues,
a Gauss-sum identity, residues of a multiple Dirichlet series, and a main-term integral."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma, jn_zeros, jv, loggamma, rgamma, sici, y0, y0_zeros, y1, zeta

from equidist.arith import L1_chi, QuadChar, divisors, factor, gauss_sum, is_squarefree, mobius, units
from equidist.errors import DomainError
from equidist.transforms import composite_nodes

POLE_TOL = 1e-6


@dataclass
class IdentityCheck:
    name: str
    lhs: complex
    rhs: complex
    tolerance: float
    parameters: dict = field(default_factory=dict)
    abs_diff: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        self.abs_diff = float(abs(complex(self.lhs) - complex(self.rhs)))
        self.passed = bool(self.abs_diff <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": complex(self.lhs),
            "rhs": complex(self.rhs),
            "abs_diff": self.abs_diff,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "parameters": dict(self.parameters),
        }


def _e(x):
    return np.exp(2j * np.pi * x)


def _as_char(chi) -> QuadChar:
    return chi if isinstance(chi, QuadChar) else QuadChar(chi)


# --------------------------------------------------------------------------
# Mellin transforms of Bessel kernels


def _check_poles(args, label):
    """Raise if any Gamma argument is within POLE_TOL of a nonpositive integer."""
    for a in args:
        a = complex(a)
        if a.real <= POLE_TOL and abs(a - round(a.real)) < POLE_TOL:
            raise DomainError(f"s is within {POLE_TOL} of a pole of {label}")


def mellin_J(kind: str, s, t: float = 0.0, k: int = 2) -> complex:
    """Closed-form Mellin transform int_0^inf J(x) x^s dx/x.

    kind "J0_plus":  J(x) = -2 pi Y0(4 pi x);  (2 pi)^-s Gamma(s/2)^2 cos(pi s/2)
    kind "J_minus":  J(x) = 4 cosh(pi t) K_{2it}(4 pi x);  (2 pi)^-s Gamma(s/2+it) Gamma(s/2-it) cosh(pi t)
    kind "J_hol":    (2 pi)^-s Gamma((s+k-1)/2) Gamma((s-k+1)/2) times cos(pi s/2) (k even) or
                     sin(pi s/2) (k odd); this is the transform of 2 pi (-1)^floor(k/2) J_{k-1}(4 pi x).

    The hol form is evaluated as pi (-1)^floor(k/2) Gamma((s+k-1)/2) / Gamma((k+1-s)/2),
    which is the same function with its removable singularities filled in.
    """
    s = complex(s)
    if kind == "J0_plus":
        _check_poles([s / 2], kind)
        return complex((2 * np.pi) ** (-s) * gamma(s / 2) ** 2 * np.cos(np.pi * s / 2))
    if kind == "J_minus":
        _check_poles([s / 2 + 1j * t, s / 2 - 1j * t], kind)
        return complex((2 * np.pi) ** (-s) * gamma(s / 2 + 1j * t) * gamma(s / 2 - 1j * t) * math.cosh(math.pi * t))
    if kind == "J_hol":
        k = int(k)
        if k < 1:
            raise DomainError("weight k must be a positive integer")
        _check_poles([(s + k - 1) / 2], kind)
        sign = -1 if (k // 2) % 2 else 1
        return complex((2 * np.pi) ** (-s) * np.pi * sign * gamma((s + k - 1) / 2) * rgamma((k + 1 - s) / 2))
    raise DomainError(f"unknown kernel {kind!r}")


def _iterated_average(partial: np.ndarray, depth: int) -> complex:
    """Repeated averaging of consecutive partial sums (Euler transform for alternating tails)."""
    S = np.asarray(partial[-(depth + 1) :], dtype=complex)
    while len(S) > 1:
        S = 0.5 * (S[:-1] + S[1:])
    return complex(S[0])


def _mellin_oscillatory(f, zeros: np.ndarray, s: complex, power: float = 0.0, order: int = 24, depth: int = 40) -> complex:
    """int_0^inf f(x) x^(s-1) dx for f with simple zeros at `zeros` and algebraic decay.

    f(x) ~ x^power (up to logarithms) as x -> 0.  [0, z1] is done in the
    variable v with x = z1 e^-v; each interval between consecutive zeros
    gives one term of an essentially alternating series whose partial sums
    are accelerated by iterated averaging.
    """
    z1 = zeros[0]
    rate = s.real + power
    if rate <= 0:
        raise DomainError("Mellin integral diverges at 0")
    V = min((40.0 + 5 * math.log(1 + abs(s))) / rate, 600.0)
    v, w = composite_nodes(0.0, V, max(8, int(V)), order)
    logx = math.log(z1) - v
    head = complex(np.dot(w, f(np.exp(logx)) * np.exp(s * logx)))
    xg, wg = np.polynomial.legendre.leggauss(order)
    a, b = zeros[:-1], zeros[1:]
    mid, half = (a + b) / 2, (b - a) / 2
    X = mid[:, None] + half[:, None] * xg[None, :]
    terms = (f(X) * X ** (s - 1)) @ wg * half
    partial = head + np.cumsum(terms)
    return _iterated_average(partial, depth)


def y0_zero_table(n: int) -> np.ndarray:
    """First n positive zeros of Y0.

    scipy's table is used for the first 100; later zeros start from the
    McMahon expansion and are refined by Newton steps with Y0' = -Y1.
    """
    m = min(n, 100)
    z = [y0_zeros(m)[0].real]
    if n > m:
        k = np.arange(m + 1, n + 1)
        b = (k - 0.75) * np.pi
        x = b + 1 / (8 * b) - 31 / (384 * b**3)
        for _ in range(4):
            x = x + y0(x) / y1(x)
        z.append(x)
    return np.concatenate(z)


def mellin_numeric(kind: str, s, t: float = 0.0, k: int = 2, segments: int = 600) -> complex:
    """Independent numerical Mellin transform of the kernel named by `kind`."""
    s = complex(s)
    if kind == "J0_plus":
        if not (0 < s.real < 1.5):
            raise DomainError("J0_plus Mellin integral needs 0 < Re s < 3/2")
        zeros = y0_zero_table(segments) / (4 * np.pi)
        return _mellin_oscillatory(lambda x: -2 * np.pi * y0(4 * np.pi * x), zeros, s)
    if kind == "J_hol":
        k = int(k)
        if not (1 - k < s.real < 1.5):
            raise DomainError("J_hol Mellin integral needs 1 - k < Re s < 3/2")
        sign = -1 if (k // 2) % 2 else 1
        zeros = jn_zeros(k - 1, segments) / (4 * np.pi)
        return _mellin_oscillatory(lambda x: sign * 2 * np.pi * jv(k - 1, 4 * np.pi * x), zeros, s, power=k - 1)
    if kind == "J_minus":
        import mpmath

        if s.real <= 0:
            raise DomainError("J_minus Mellin integral needs Re s > 0")
        with mpmath.workdps(25):
            ss = mpmath.mpc(s.real, s.imag)
            c = 4 * mpmath.cosh(mpmath.pi * t)

            def g(u):  # x = e^u
                x = mpmath.exp(u)
                return c * mpmath.besselk(2j * t, 4 * mpmath.pi * x) * mpmath.exp(ss * u)

            lo = -(40.0 / s.real)
            pts = list(np.linspace(lo, 0.0, 2 + int(abs(lo) * (1 + abs(t)) / 2))) + [1.0, 2.0, 3.0]
            val = mpmath.quad(g, pts)
        return complex(val)
    raise DomainError(f"unknown kernel {kind!r}")


def mellin_check(kind: str, s, t: float = 0.0, k: int = 2, tol: float = 1e-6) -> IdentityCheck:
    lhs = mellin_numeric(kind, s, t=t, k=k)
    rhs = mellin_J(kind, s, t=t, k=k)
    return IdentityCheck("mellin", lhs, rhs, tol, {"kind": kind, "s": complex(s), "t": t, "k": k})


# --------------------------------------------------------------------------
# H(t)


def H_factor(t):
    """Gamma(1/4 + it/2)^2 Gamma(1/4 - it/2)^2 / (Gamma(1/2 + it) Gamma(1/2 - it)), via log-Gamma."""
    t = np.asarray(t, dtype=float)
    a = 0.25 + 0.5j * t
    b = 0.5 + 1j * t
    val = np.exp((2 * (loggamma(a) + loggamma(np.conj(a))) - loggamma(b) - loggamma(np.conj(b))).real)
    return float(val) if val.ndim == 0 else val


def H_asymptotic_constant(ts) -> float:
    """max over ts of |H(t) - 4 pi/(|t| + 1)| (|t| + 1)^2."""
    ts = np.abs(np.asarray(ts, dtype=float))
    return float(np.max(np.abs(H_factor(ts) - 4 * np.pi / (ts + 1)) * (ts + 1) ** 2))


# --------------------------------------------------------------------------
# Voronoi residue


def voronoi_series(chi, d: int, c: int, s: float) -> complex:
    """L(s, E_{chi,1}, d/c) = sum_m (sum_{ab=m} chi(a)) e(m d/c) m^-s for real s > 1.

    Evaluated exactly through Hurwitz zeta functions: with M = lcm(q, c),
    a = alpha (mod M) and b = beta (mod c) fix both chi(a) and e(a b d/c).
    """
    chi = _as_char(chi)
    q = chi.modulus
    M = q * c // math.gcd(q, c)
    alpha = np.arange(1, M + 1)
    beta = np.arange(1, c + 1)
    ca = chi(alpha).astype(float)
    nz = ca != 0
    alpha, ca = alpha[nz], ca[nz]
    za = M ** (-s) * zeta(s, alpha / M)
    zb = c ** (-s) * zeta(s, beta / c)
    phase = _e(((alpha[:, None] % c) * beta[None, :] * (d % c) % c) / c)
    return complex((ca * za) @ phase @ zb)


def voronoi_residue_closed_form(chi, d: int, c: int) -> complex:
    chi = _as_char(chi)
    q = chi.modulus
    if c % q == 0:
        return gauss_sum(chi) * np.conj(chi(d)) * L1_chi(chi.D) / c
    if math.gcd(c, q) == 1:
        return chi(c) * L1_chi(chi.D) / c
    return 0j


def voronoi_residue_check(chi, d: int, c: int, eps=(0.1, 0.05, 0.025), tol: float = 1e-3) -> IdentityCheck:
    """(s - 1) L(s, E_{chi,1}, d/c) at s = 1 + eps, Richardson-extrapolated to eps -> 0."""
    chi = _as_char(chi)
    if c < 1 or math.gcd(d, c) != 1:
        raise DomainError("need c >= 1 and gcd(d, c) = 1")
    vals = [e * voronoi_series(chi, d, c, 1 + e) for e in eps]
    table = [vals]
    for j in range(1, len(eps)):
        prev = table[-1]
        table.append([(prev[i + 1] * eps[i] - prev[i] * eps[i + j]) / (eps[i] - eps[i + j]) for i in range(len(prev) - 1)])
    lhs = table[-1][0]
    rhs = voronoi_residue_closed_form(chi, d, c)
    q = chi.modulus
    case = "q|c" if c % q == 0 else ("coprime" if math.gcd(c, q) == 1 else "other")
    return IdentityCheck("voronoi", lhs, rhs, tol, {"D": chi.D, "d": d, "c": c, "case": case, "eps": list(eps)})


# --------------------------------------------------------------------------
# Gauss-sum identity


def miyake_check(chi, c: int, m: int, tol: float = 1e-9) -> IdentityCheck:
    """sum_{a in (Z/cZ)^x} chi(a) e(ma/c) against tau(chi) sum_{d | (c/q, m)} d mu(c/qd) chi(c/qd) conj(chi)(m/d)."""
    chi = _as_char(chi)
    q = chi.modulus
    if c % q:
        raise DomainError(f"q = {q} does not divide c = {c}")
    a = units(c)
    ang = 2 * np.pi * ((m % c) * a % c) / c
    vals = chi(a).astype(float)
    lhs = complex(math.fsum(vals * np.cos(ang)), math.fsum(vals * np.sin(ang)))
    g = math.gcd(c // q, m)
    acc = 0.0
    for d in divisors(g):
        e = c // (q * d)
        acc += d * mobius(e) * chi(e) * chi(m // d)
    rhs = gauss_sum(chi) * acc
    return IdentityCheck("miyake", lhs, rhs, tol, {"D": chi.D, "c": c, "m": m})


# --------------------------------------------------------------------------
# multiple Dirichlet series residue


def dirichlet_L(chi, s: float) -> float:
    """L(s, chi) for real s > 1 as q^-s sum_a chi(a) zeta(s, a/q)."""
    chi = _as_char(chi)
    q = chi.modulus
    a = np.arange(1, q + 1)
    return float(q ** (-s) * np.dot(chi(a).astype(float), zeta(s, a / q)))


def dirichlet_L_euler(chi, s: float, P: int = 200000) -> float:
    """Euler product over p <= P, with the remaining factor bounded by the tail of zeta."""
    from sympy import primerange

    chi = _as_char(chi)
    p = np.array(list(primerange(2, P + 1)), dtype=float)
    x = chi(p.astype(np.int64)).astype(float)
    return float(np.exp(-np.sum(np.log1p(-x * p ** (-s)))))


def _partial_L(chi, s: float, N: int, L: float) -> float:
    """L^N(s, chi) = L(s, chi) prod_{p | N} (1 - chi(p) p^-s)."""
    for p in factor(N):
        L *= 1 - chi(p) * p ** (-s)
    return L


def mds_residue(chi, N: int, sign: int, w: float, route: str = "A") -> complex:
    """Closed-form residue at s/2 + w = 1 of the c = 0 (mod N) series.

    mu(N) chi(N) / (N^2w L^N(2w, chi)) * (chi(+-1) tau^2 L(1, conj chi) / q^2w + L(1, chi)).
    route "A" uses the exact finite L(1) and the Hurwitz form of L(2w); route
    "B" uses the accelerated series for L(1) and an Euler product for L(2w).
    """
    chi = _as_char(chi)
    q = chi.modulus
    if route == "A":
        L1 = L1_chi(chi.D)
        L2 = dirichlet_L(chi, 2 * w)
    else:
        L1 = L1_chi(chi.D, method="series")
        L2 = dirichlet_L_euler(chi, 2 * w)
    tau = gauss_sum(chi)
    LN = _partial_L(chi, 2 * w, N, L2)
    bracket = chi(sign) * tau**2 * np.conj(L1) / q ** (2 * w) + L1
    return mobius(N) * chi(N) / (N ** (2 * w) * LN) * bracket


def mds_residue_bar(chi, N: int, sign: int, w: float) -> complex:
    """Closed-form residue for the (c, N) = 1 series."""
    chi = _as_char(chi)
    q = chi.modulus
    L1 = L1_chi(chi.D)
    LN = _partial_L(chi, 2 * w, N, dirichlet_L(chi, 2 * w))
    return (chi(sign * N) * gauss_sum(chi) ** 2 * L1 / q ** (2 * w) + L1) / LN


def _twisted_inverse_sum(chi, c: int, sign: int, Nbar: int = 1) -> complex:
    """sum_{d in (Z/cZ)^x} conj(chi)(d) e(+- Nbar dbar / c), by brute force."""
    d = units(c)
    if c == 1:
        dbar = d
    else:
        dbar = np.array([pow(int(x), -1, c) for x in d], dtype=np.int64)
    vals = chi(d).astype(float)
    ang = 2 * np.pi * ((sign * Nbar * dbar) % c) / c
    return complex(math.fsum(vals * np.cos(ang)), math.fsum(vals * np.sin(ang)))


def mds_csum(chi, N: int, sign: int, w: float, bar: bool = False, brute: int = 1500, cmax: int = 10**6) -> tuple[complex, float]:
    """Residue assembled from the sum over moduli c before the Gauss-sum identity is applied.

    The twisted sums over d are brute-forced for c <= brute; beyond that they
    are replaced by chi(+-1) tau mu(c/q) chi(c/q) (the brute-forced range
    checks this substitution), and the remainder past cmax is bounded.
    Returns (value, tail bound).
    """
    chi = _as_char(chi)
    q = chi.modulus
    tau = gauss_sum(chi)
    L1 = L1_chi(chi.D, method="series")
    mu_tab = _mobius_sieve(cmax)
    Nbar_of = (lambda c: pow(N, -1, c) if c > 1 else 0) if bar else (lambda c: 1)

    def ok_first(c):
        return c % q == 0 and (math.gcd(c, N) == 1 if bar else c % N == 0)

    first = []
    for c in range(1, brute + 1):
        if ok_first(c):
            first.append(_twisted_inverse_sum(chi, c, sign, Nbar_of(c)) * c ** (-2 * w))
    cs = np.arange(brute + 1, cmax + 1)
    cs = cs[(cs % q == 0)]
    cs = cs[np.gcd(cs, N) == 1] if bar else cs[cs % N == 0]
    k = cs // q
    unit = chi(sign * N) if bar else chi(sign)
    tail_terms = unit * tau * mu_tab[k] * chi(k).astype(float) * cs.astype(float) ** (-2 * w)
    S1 = math.fsum(np.real(first)) + 1j * math.fsum(np.imag(first)) + math.fsum(np.real(tail_terms)) + 1j * math.fsum(np.imag(tail_terms))

    c2 = np.arange(1, cmax + 1)
    c2 = c2[np.gcd(c2, N) == 1] if bar else c2[c2 % N == 0]
    S2 = math.fsum(chi(c2).astype(float) * mu_tab[c2] * c2.astype(float) ** (-2 * w))
    value = tau * np.conj(L1) * S1 + L1 * S2
    tail = (abs(tau) * abs(L1) / q ** (2 * w) + abs(L1)) * cmax ** (1 - 2 * w) / (2 * w - 1)
    return complex(value), tail


def _mobius_sieve(n: int) -> np.ndarray:
    mu = np.ones(n + 1, dtype=np.int64)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, n + 1):
        if is_p[p]:
            is_p[2 * p :: p] = False
            mu[p::p] *= -1
            if p * p <= n:
                mu[p * p :: p * p] = 0
    mu[0] = 0
    return mu


def mds_residue_check(chi, N: int, sign: int, w: float, tol: float = 1e-8) -> IdentityCheck:
    """Constituents-only check of the residue formula.

    lhs: the residue assembled from the c-sum (before the Gauss-sum identity),
    with route-B constituents; rhs: the closed form with route-A constituents.
    Also reports the route A/B constituent difference and the N = 1 coincidence
    of the two residue formulas.
    """
    chi = _as_char(chi)
    q = chi.modulus
    if not is_squarefree(N) or math.gcd(N, q) != 1:
        raise DomainError("N must be squarefree and coprime to q")
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    if not w > 1.25:
        raise DomainError("w must exceed 5/4")
    rhs = mds_residue(chi, N, sign, w, route="A")
    rhs_b = mds_residue(chi, N, sign, w, route="B")
    lhs, tail = mds_csum(chi, N, sign, w)
    bar_closed = mds_residue_bar(chi, N, sign, w)
    bar_sum, bar_tail = mds_csum(chi, N, sign, w, bar=True)
    params = {
        "D": chi.D,
        "N": N,
        "sign": sign,
        "w": w,
        "scope": "constituents-only",
        "route_ab_diff": abs(rhs - rhs_b),
        "csum_tail_bound": tail,
        "bar_closed_form": bar_closed,
        "bar_csum_diff": abs(bar_sum - bar_closed),
        "bar_tail_bound": bar_tail,
        "n1_coincidence": abs(mds_residue(chi, 1, sign, w) - mds_residue_bar(chi, 1, sign, w)),
    }
    return IdentityCheck("mds_residue", lhs, rhs, tol + tail, params)


# --------------------------------------------------------------------------
# main-term integral


def Si(x):
    return sici(x)[0]


def _cos_over_t2_antiderivative(c: float, t: float) -> float:
    """Antiderivative of cos(c t)/t^2: -cos(c t)/t - c Si(c t)."""
    return -math.cos(c * t) / t - c * float(Si(c * t))


def main_term_integral_closed(r: float, R: float, T1: float, T2: float) -> float:
    """int_T1^T2 sin^2((R-r)t/2) sin^2((R+r)t/2) / t^2 dt via the sine integral.

    The numerator is (1 - cos((R-r)t) - cos((R+r)t) + (cos(2Rt) + cos(2rt))/2) / 4.
    """

    def F(t):
        val = -1 / t
        val -= _cos_over_t2_antiderivative(R - r, t)
        val -= _cos_over_t2_antiderivative(R + r, t)
        val += 0.5 * _cos_over_t2_antiderivative(2 * R, t)
        val += 0.5 * (_cos_over_t2_antiderivative(2 * r, t) if r > 0 else -1 / t)
        return val / 4

    return F(T2) - F(T1)


def main_term_integral_quadrature(r: float, R: float, T1: float, T2: float) -> float:
    """Gauss-Legendre on panels between zeros of sin((R+r)t/2)."""
    step = 2 * math.pi / (R + r)
    edges = np.arange(math.ceil(T1 / step), math.floor(T2 / step) + 1) * step
    edges = np.concatenate([[T1], edges[(edges > T1) & (edges < T2)], [T2]])
    xg, wg = np.polynomial.legendre.leggauss(16)
    a, b = edges[:-1], edges[1:]
    t = (a + b)[:, None] / 2 + (b - a)[:, None] / 2 * xg[None, :]
    f = np.sin((R - r) * t / 2) ** 2 * np.sin((R + r) * t / 2) ** 2 / t**2
    return math.fsum(((f @ wg) * (b - a) / 2).tolist())


def main_term_envelope(r: float, R: float, T1: float, T2: float) -> float:
    return 1 / T2 + 1 / (r * T1**2) + (R - r) ** 2 * T1


def main_term_integral_check(r: float, R: float, T1: float, T2: float, C_max: float = 10.0) -> IdentityCheck:
    """Integral against pi (R - r)/8; passes when the fitted constant is <= C_max.

    The quadrature and closed-form values are both reported.
    """
    if not (0 < r < R) or not (0 < T1 < T2):
        raise DomainError("need 0 < r < R and 0 < T1 < T2")
    value = main_term_integral_quadrature(r, R, T1, T2)
    closed = main_term_integral_closed(r, R, T1, T2)
    main = math.pi * (R - r) / 8
    env = main_term_envelope(r, R, T1, T2)
    C = abs(value - main) / env
    in_regime = T1 >= 1 / r**2 and (R - r) * T1 < 1 < (R - r) * T2
    return IdentityCheck(
        "main_term",
        value,
        main,
        C_max * env,
        {"r": r, "R": R, "T1": T1, "T2": T2, "fitted_C": C, "closed_form": closed, "quadrature_vs_closed": abs(value - closed), "in_regime": in_regime},
    )


# --------------------------------------------------------------------------
# suites


def _primitive_quadratic(qmax: int, odd_squarefree: bool = False) -> list[QuadChar]:
    from equidist.arith import fundamental_discriminants

    out = []
    for D in fundamental_discriminants(-qmax, qmax):
        if D == 1:
            continue
        if odd_squarefree and (D % 2 == 0 or not is_squarefree(abs(D))):
            continue
        out.append(QuadChar(D))
    return out


def suite_miyake(qmax: int = 30, kmax: int = 20, mmax: int = 50):
    for chi in _primitive_quadratic(qmax):
        q = chi.modulus
        for k in range(1, kmax + 1):
            for m in range(1, mmax + 1):
                yield miyake_check(chi, q * k, m)


def voronoi_grid() -> list[tuple[int, int, int]]:
    """50 (D, d, c) cases, balanced over the three residue cases (q | c, (c, q) = 1, otherwise)."""
    by_case = {"q|c": [], "coprime": [], "other": []}
    for D in (-3, 5, -7, -15, 21, -35, 33, -11, 13, -39):
        q = abs(D)
        primes = list(factor(q))
        for c in (q, 2 * q, 3 * q, 1, 2, 4, 8, *primes, *(2 * p for p in primes), *(p * p for p in primes)):
            g = math.gcd(c, q)
            case = "q|c" if g == q else ("coprime" if g == 1 else "other")
            for d in (1, c - 1, 2) if c > 2 else (1,):
                if math.gcd(d, c) == 1 and (D, d, c) not in by_case[case]:
                    by_case[case].append((D, d, c))
    out = by_case["q|c"][:17] + by_case["coprime"][:17] + by_case["other"][:16]
    return out


def suite_voronoi():
    for D, d, c in voronoi_grid():
        yield voronoi_residue_check(QuadChar(D), d, c)


MELLIN_POINTS = (
    ("J0_plus", 0.5, 0.0, 2),
    ("J0_plus", 0.3 + 0.7j, 0.0, 2),
    ("J0_plus", 1.1 - 1.3j, 0.0, 2),
    ("J0_plus", 0.8 + 2.0j, 0.0, 2),
    ("J_hol", 1.0, 0.0, 2),
    ("J_hol", 0.4 + 0.5j, 0.0, 4),
    ("J_hol", -1.5 + 0.2j, 0.0, 6),
    ("J_minus", 0.7, 1.3, 2),
    ("J_minus", 1.5 + 0.4j, 0.4, 2),
    ("J_minus", 2.5 - 1.0j, 2.0, 2),
)


def suite_mellin(points=MELLIN_POINTS):
    for kind, s, t, k in points:
        yield mellin_check(kind, s, t=t, k=k)


def suite_H(ts=None, C_max: float = 20.0):
    ts = np.linspace(0, 200, 1001) if ts is None else np.asarray(ts)
    vals = H_factor(ts)
    yield IdentityCheck("H_even_grid", float(np.max(np.abs(H_factor(-ts) - vals))), 0.0, 1e-12 * float(np.max(vals)), {"points": len(ts)})
    yield IdentityCheck("H_zero", H_factor(0.0), gamma(0.25) ** 4 / math.pi, 1e-10, {})
    C = H_asymptotic_constant(ts[ts >= 10])
    yield IdentityCheck("H_asymptotic", C, 0.0, C_max, {"fitted_C": C, "t_min": 10.0, "t_max": float(ts.max())})


def suite_mds():
    for D, N, sign, w in ((5, 2, 1, 1.5), (5, 1, -1, 1.5), (-3, 2, 1, 1.5), (-3, 5, -1, 2.0), (-7, 3, 1, 1.3), (13, 6, -1, 1.75)):
        yield mds_residue_check(QuadChar(D), N, sign, w)


def main_term_draws(count: int = 10, seed: int = 0) -> list[tuple[float, float, float, float]]:
    """Parameters with T1 = (R - r)^(alpha - 1) >= 1/r^2 and T2 = (R - r)^(-1 - alpha)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        r = float(rng.uniform(0.05, 0.5))
        d = float(10 ** rng.uniform(-5, -3))
        alpha = float(rng.uniform(0.02, 0.1))
        T1, T2 = d ** (alpha - 1), d ** (-1 - alpha)
        if T1 >= 1 / r**2:
            out.append((r, r + d, T1, T2))
    return out


def suite_main_term(count: int = 10, seed: int = 0):
    for r, R, T1, T2 in main_term_draws(count, seed):
        yield main_term_integral_check(r, R, T1, T2)


SUITES = {
    "miyake": suite_miyake,
    "voronoi": suite_voronoi,
    "mellin": suite_mellin,
    "H": suite_H,
    "mds": suite_mds,
    "main_term": suite_main_term,
}
