"""Quadratic characters, L(1, chi), Gauss sums and Kloosterman sums.

Characters are attached to fundamental discriminants and evaluated through the
Kronecker symbol.  Tables of values over one period are built with numpy from
the factorization of the discriminant into prime discriminants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from sympy import factorint

from equidist.errors import DomainError, ResourceCapError

KLOOSTERMAN_CAP = 10**6
DISCRIMINANT_CAP = 10**8


def factor(n: int) -> dict[int, int]:
    """Prime factorization of |n| as {p: exponent}."""
    n = abs(int(n))
    if n < 2:
        return {}
    return {int(p): int(e) for p, e in factorint(n).items()}


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factor(n).values())


def mobius(n: int) -> int:
    f = factor(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int) -> int:
    out = int(n)
    for p in factor(n):
        out = out // p * (p - 1)
    return out


def divisors(n: int) -> list[int]:
    """Positive divisors of n in increasing order."""
    divs = [1]
    for p, e in factor(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def is_fundamental(D: int) -> bool:
    D = int(D)
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return is_squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def fundamental_discriminants(lo: int, hi: int) -> list[int]:
    """Fundamental discriminants D with lo <= D <= hi, in increasing order."""
    return [D for D in range(lo, hi + 1) if D % 4 in (0, 1) and is_fundamental(D)]


@dataclass(frozen=True)
class Discriminant:
    """A fundamental discriminant D (positive or negative, D != 1)."""

    value: int

    def __post_init__(self):
        v = int(self.value)
        object.__setattr__(self, "value", v)
        if not is_fundamental(v):
            raise DomainError(f"{v} is not a fundamental discriminant")

    def __int__(self) -> int:
        return self.value

    @property
    def sign(self) -> int:
        return 1 if self.value > 0 else -1

    @property
    def w(self) -> int:
        """Number of roots of unity in the quadratic order (2 for D > 0)."""
        return {-3: 6, -4: 4}.get(self.value, 2)


def _as_disc(D) -> Discriminant:
    return D if isinstance(D, Discriminant) else Discriminant(D)


def kronecker(a: int, b: int) -> int:
    """Kronecker symbol (a|b) for arbitrary integers."""
    a, b = int(a), int(b)
    if b == 0:
        return 1 if abs(a) == 1 else 0
    if a % 2 == 0 and b % 2 == 0:
        return 0
    v = 0
    while b % 2 == 0:
        b //= 2
        v += 1
    k = 1
    if v % 2 and a % 8 in (3, 5):
        k = -k
    if b < 0:
        b = -b
        if a < 0:
            k = -k
    # Jacobi symbol (a|b), b odd positive
    a %= b
    while a:
        while a % 2 == 0:
            a //= 2
            if b % 8 in (3, 5):
                k = -k
        a, b = b, a
        if a % 4 == 3 and b % 4 == 3:
            k = -k
        a %= b
    return k if b == 1 else 0


@lru_cache(maxsize=256)
def _character_table(D: int) -> np.ndarray:
    q = abs(D)
    f = factor(q)
    a = np.arange(q, dtype=np.int64)
    table = np.ones(q, dtype=np.int64)
    odd = 1
    for p in f:
        if p == 2:
            continue
        leg = -np.ones(p, dtype=np.int64)
        leg[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
        leg[0] = 0
        table *= leg[a % p]
        odd *= p if p % 4 == 1 else -p
    two_part = {
        -4: [0, 1, 0, -1, 0, 1, 0, -1],
        8: [0, 1, 0, -1, 0, -1, 0, 1],
        -8: [0, 1, 0, 1, 0, -1, 0, -1],
    }.get(D // odd)
    if two_part is not None:
        table *= np.array(two_part)[a % 8]
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class QuadChar:
    """Primitive quadratic character chi_D = (D|.) of modulus |D|."""

    discriminant: Discriminant

    def __init__(self, D):
        object.__setattr__(self, "discriminant", _as_disc(D))

    @property
    def D(self) -> int:
        return self.discriminant.value

    @property
    def modulus(self) -> int:
        return abs(self.D)

    @property
    def table(self) -> np.ndarray:
        """Values chi(a) for a = 0, ..., |D|-1."""
        return _character_table(self.D)

    def __call__(self, m):
        """Evaluate at an integer or an integer array."""
        if np.ndim(m) == 0:
            return int(self.table[int(m) % self.modulus])
        return self.table[np.asarray(m, dtype=np.int64) % self.modulus]


def chi_eval(D, m: int) -> int:
    """Kronecker symbol (D|m) for a fundamental discriminant D."""
    D = _as_disc(D)
    return kronecker(D.value, m)


def _l1_exact(D: int) -> float:
    q = abs(D)
    chi = _character_table(D).astype(float)
    a = np.arange(q, dtype=float)
    if D < 0:
        return -math.pi * float(np.dot(chi[1:], a[1:])) / q**1.5
    logsin = np.log(np.sin(np.pi * a[1:] / q))
    return -float(np.dot(chi[1:], logsin)) / math.sqrt(q)


def _l1_series(D: int, levels: int = 7, base_periods: int = 8) -> float:
    """Partial sums of chi(m)/m at N = q*K*2^j, Richardson-extrapolated in 1/N.

    Over whole periods the remainder has an asymptotic expansion in powers of
    1/K, so repeated Richardson steps with ratio 2 remove successive orders.
    """
    q = abs(D)
    chi = _character_table(D).astype(float)
    nmax = q * base_periods * 2 ** (levels - 1)
    m = np.arange(1, nmax + 1, dtype=float)
    terms = chi[np.arange(1, nmax + 1) % q] / m
    csum = np.cumsum(terms)
    S = [csum[q * base_periods * 2**j - 1] for j in range(levels)]
    table = [S]
    for k in range(1, levels):
        prev = table[-1]
        f = 2.0**k
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
    return float(table[-1][0])


def _l1_digamma(D: int) -> float:
    from scipy.special import digamma

    q = abs(D)
    chi = _character_table(D).astype(float)
    a = np.arange(1, q)
    return -float(np.dot(chi[1:], digamma(a / q))) / q


def L1_chi(D, method: str = "exact") -> float:
    """L(1, chi_D).

    Args:
        D: fundamental discriminant.
        method: "exact" uses the finite closed form (a weighted sum of chi(a)*a
            for D < 0 and of chi(a)*log sin(pi a/D) for D > 0); "series" sums
            chi(m)/m with Richardson acceleration; "digamma" uses
            -(1/q) sum chi(a) psi(a/q).
    """
    D = _as_disc(D).value
    if abs(D) > DISCRIMINANT_CAP:
        raise ResourceCapError(f"|D| = {abs(D)} exceeds cap {DISCRIMINANT_CAP}")
    if method == "exact":
        return _l1_exact(D)
    if method == "series":
        return _l1_series(D)
    if method == "digamma":
        return _l1_digamma(D)
    raise DomainError(f"unknown method {method!r}")


def _modinv_array(d: np.ndarray, c: int) -> np.ndarray:
    """Inverses of units d modulo c via d^(phi(c)-1), vectorized in int64."""
    e = euler_phi(c) - 1
    result = np.ones_like(d)
    base = d % c
    while e:
        if e & 1:
            result = (result * base) % c
        base = (base * base) % c
        e >>= 1
    return result


def units(c: int) -> np.ndarray:
    """Residues in [0, c) coprime to c."""
    a = np.arange(c, dtype=np.int64)
    if c == 1:
        return np.zeros(1, dtype=np.int64)
    return a[np.gcd(a, c) == 1]


def kloosterman(m: int, n: int, c: int, return_complex: bool = False):
    """Kloosterman sum S(m, n; c) = sum over units d of e((m d + n dbar)/c)."""
    c = int(c)
    if c < 1:
        raise DomainError("modulus c must be positive")
    if c > KLOOSTERMAN_CAP:
        raise ResourceCapError(f"c = {c} exceeds cap {KLOOSTERMAN_CAP}")
    d = units(c)
    dbar = _modinv_array(d, c) if c > 1 else d
    phase = ((int(m) % c) * d + (int(n) % c) * dbar) % c
    ang = 2 * np.pi * phase / c
    re = math.fsum(np.cos(ang))
    im = math.fsum(np.sin(ang))
    if return_complex:
        return complex(re, im)
    if abs(im) > 1e-9 * max(1.0, math.sqrt(len(d))):
        raise ArithmeticError(f"Kloosterman imaginary part {im} did not cancel")
    return re


def gauss_sum(chi: QuadChar) -> complex:
    """tau(chi) = sum_{a mod q} chi(a) e(a/q)."""
    if not isinstance(chi, QuadChar):
        chi = QuadChar(chi)
    q = chi.modulus
    a = np.arange(q)
    vals = chi.table.astype(float)
    ang = 2 * np.pi * a / q
    return complex(math.fsum(vals * np.cos(ang)), math.fsum(vals * np.sin(ang)))


def _char_value(chi: Optional[QuadChar], m: int) -> int:
    return 1 if chi is None else chi(m)


def lambda_pair(chi1: Optional[QuadChar], chi2: Optional[QuadChar], m: int, t: float) -> complex:
    """sum_{ab=m} chi1(a) a^{it} chi2(b) b^{-it}; None stands for the trivial character."""
    m = int(m)
    if m < 1:
        raise DomainError("m must be a positive integer")
    total = 0j
    for a in divisors(m):
        b = m // a
        coeff = _char_value(chi1, a) * _char_value(chi2, b)
        if coeff:
            total += coeff * complex(math.cos(t * math.log(a / b)), math.sin(t * math.log(a / b)))
    return total


@dataclass(frozen=True)
class PairCoefficient:
    """lambda_{chi1,chi2}(m, t) with None for trivial characters."""

    chi1: Optional[QuadChar]
    chi2: Optional[QuadChar]
    m: int
    t: float = 0.0
    value: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "value", lambda_pair(self.chi1, self.chi2, self.m, self.t))
