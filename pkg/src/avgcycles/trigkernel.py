"""Closed-form evaluation of trigonometric and exponential-weighted integrals.

Every coefficient of the averaged functions reduces to definite integrals of
``s^k * e^(mu*s) * cos^p(s) * sin^q(s)``.  These have finite closed forms:
``cos^p sin^q`` linearizes into complex harmonics ``e^(i*n*s)`` and each
``s^k e^(lam*s)`` term has an elementary antiderivative.  The public kernels
below are thin wrappers over that machinery, memoized because the polynomial
assembly re-requests the same exponent keys many times.
"""

from __future__ import annotations

import cmath
import math
import os
import pickle
import threading
from dataclasses import dataclass
from functools import lru_cache

TWO_PI = 2.0 * math.pi

# Below this |lambda| the closed form has a 1/lambda cancellation; switch to a
# short Taylor expansion of e^(lam*s) instead.
_LAM_SMALL = 1e-8

_CACHE_ENV = "AVGCYCLES_CACHE_DIR"


class KernelError(ValueError):
    """Invalid integral key."""


@dataclass(frozen=True)
class TrigKey:
    p: int
    q: int
    phi: float

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise KernelError(f"exponents must be nonnegative, got p={self.p} q={self.q}")
        if not (0.0 < self.phi <= TWO_PI + 1e-12):
            raise KernelError(f"phi must lie in (0, 2*pi], got {self.phi}")


@dataclass(frozen=True)
class ExpTrigKey:
    mu: float
    p: int
    q: int
    a: float
    b: float

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise KernelError(f"exponents must be nonnegative, got p={self.p} q={self.q}")
        if self.a > self.b:
            raise KernelError(f"integration limits reversed: a={self.a} > b={self.b}")
        if not math.isfinite(self.mu):
            raise KernelError("mu must be finite")


# ---------------------------------------------------------------------------
# Harmonic sums: finite sums of c * s^k * e^(lam*s) with complex c, lam.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _harmonics(p: int, q: int) -> tuple:
    """Linearize cos^p(s) sin^q(s) into harmonics: tuple of (n, coeff)."""
    coeffs = {0: 1.0 + 0.0j}
    for _ in range(p):
        nxt = {}
        for n, c in coeffs.items():
            for dn, f in ((1, 0.5), (-1, 0.5)):
                nxt[n + dn] = nxt.get(n + dn, 0.0j) + c * f
        coeffs = nxt
    for _ in range(q):
        nxt = {}
        for n, c in coeffs.items():
            for dn, f in ((1, -0.5j), (-1, 0.5j)):
                nxt[n + dn] = nxt.get(n + dn, 0.0j) + c * f
        coeffs = nxt
    return tuple(sorted(coeffs.items()))


class HarmonicSum:
    """Finite sum of terms coeff * s^k * e^(lam*s)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        # key (k, lam), value complex coefficient
        self.terms: dict = dict(terms) if terms else {}

    def _accum(self, k, lam, c):
        key = (k, lam)
        v = self.terms.get(key, 0.0j) + c
        if v == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = v

    def __add__(self, other):
        out = HarmonicSum(self.terms)
        for (k, lam), c in other.terms.items():
            out._accum(k, lam, c)
        return out

    def scaled(self, c):
        return HarmonicSum({key: v * c for key, v in self.terms.items()})

    def __mul__(self, other):
        out = HarmonicSum()
        for (k1, l1), c1 in self.terms.items():
            for (k2, l2), c2 in other.terms.items():
                out._accum(k1 + k2, l1 + l2, c1 * c2)
        return out

    def shifted(self, lam):
        """Multiply by e^(lam*s)."""
        return HarmonicSum({(k, l + lam): c for (k, l), c in self.terms.items()})

    def antiderivative(self) -> "HarmonicSum":
        out = HarmonicSum()
        for (k, lam), c in self.terms.items():
            for (k2, l2), c2 in _antider_term(k, lam):
                out._accum(k2, l2, c * c2)
        return out

    def eval(self, s: float) -> complex:
        return sum(c * s**k * cmath.exp(lam * s) for (k, lam), c in self.terms.items())

    def definite(self, a: float, b: float) -> float:
        anti = self.antiderivative()
        return (anti.eval(b) - anti.eval(a)).real


@lru_cache(maxsize=None)
def _antider_term(k: int, lam: complex) -> tuple:
    """Antiderivative of s^k e^(lam*s) as a tuple of ((k, lam), coeff) terms."""
    if lam == 0:
        return (((k + 1, 0.0j), 1.0 / (k + 1)),)
    if abs(lam) < _LAM_SMALL:
        # e^(lam*s) ~ sum lam^t s^t / t!; truncation error O(lam^6).
        out = []
        fact = 1.0
        lam_t = 1.0 + 0.0j
        for t in range(6):
            if t > 0:
                fact *= t
                lam_t *= lam
            out.append(((k + t + 1, 0.0j), lam_t / (fact * (k + t + 1))))
        return tuple(out)
    # integration by parts: F(k) = s^k e/lam - (k/lam) F(k-1)
    coeffs = [0.0j] * (k + 1)
    coeffs[k] = 1.0 / lam
    for j in range(k, 0, -1):
        coeffs[j - 1] = -j * coeffs[j] / lam
    return tuple(((j, lam), coeffs[j]) for j in range(k + 1))


def trig_monomial(p: int, q: int, k: int = 0, lam: complex = 0.0j) -> HarmonicSum:
    """HarmonicSum of s^k e^(lam*s) cos^p(s) sin^q(s)."""
    out = HarmonicSum()
    for n, c in _harmonics(p, q):
        out._accum(k, lam + 1j * n, c)
    return out


# ---------------------------------------------------------------------------
# Public kernels.
# ---------------------------------------------------------------------------

_I_CACHE: dict = {}
_I_LOCK = threading.Lock()


def _trig_I(p: int, q: int, phi: float) -> float:
    """I_(p,q,phi) by the two-term power reduction recurrence, memoized."""
    key = (p, q, phi)
    hit = _I_CACHE.get(key)
    if hit is not None:
        return hit
    cphi = math.cos(phi)
    sphi = math.sin(phi)
    if p >= 2:
        val = (cphi ** (p - 1) * sphi ** (q + 1)) / (p + q) + (p - 1) / (p + q) * _trig_I(p - 2, q, phi)
    elif q >= 2:
        val = -(cphi ** (p + 1) * sphi ** (q - 1)) / (p + q) + (q - 1) / (p + q) * _trig_I(p, q - 2, phi)
    elif (p, q) == (0, 0):
        val = phi
    elif (p, q) == (1, 0):
        val = sphi
    elif (p, q) == (0, 1):
        val = 1.0 - cphi
    else:  # (1, 1)
        val = 0.5 * sphi * sphi
    with _I_LOCK:
        _I_CACHE[key] = val
    return val


def trig_I(key: TrigKey) -> float:
    """Integral of cos^p s sin^q s over [0, phi]."""
    return _trig_I(key.p, key.q, key.phi)


def trig_J(key: TrigKey) -> float:
    """Integral of cos^p s sin^q s over [phi, 2*pi]."""
    return _trig_I(key.p, key.q, TWO_PI) - _trig_I(key.p, key.q, key.phi)


def _running_I(p: int, q: int) -> HarmonicSum:
    """I_(p,q,s) as a closed-form function of s (vanishing at s=0)."""
    anti = trig_monomial(p, q).antiderivative()
    c0 = anti.eval(0.0)
    out = HarmonicSum(anti.terms)
    out._accum(0, 0.0j, -c0)
    return out


def _check_exponents(*es):
    if any(e < 0 for e in es):
        raise KernelError(f"exponents must be nonnegative, got {es}")


def nested_I(i: int, j: int, p: int, q: int, phi: float) -> float:
    """Integral over [0, phi] of cos^i s sin^j s * I_(p,q,s)."""
    _check_exponents(i, j, p, q)
    TrigKey(p, q, phi)  # validate phi range
    return (trig_monomial(i, j) * _running_I(p, q)).definite(0.0, phi)


def nested_J(i: int, j: int, p: int, q: int, phi: float) -> float:
    """Integral over [phi, 2*pi] of cos^i s sin^j s * I_(p,q,s)."""
    _check_exponents(i, j, p, q)
    TrigKey(p, q, phi)
    return (trig_monomial(i, j) * _running_I(p, q)).definite(phi, TWO_PI)


def exp_trig(key: ExpTrigKey) -> float:
    """Integral of e^(mu*s) cos^p s sin^q s over [a, b]."""
    return trig_monomial(key.p, key.q, lam=complex(key.mu)).definite(key.a, key.b)


def double_exp_trig(i: int, j: int, p: int, q: int, mu: float, a: float, b: float) -> float:
    """Integral over [a, b] of cos^i s sin^j s * int_0^s e^(mu(s-tau)) cos^p tau sin^q tau dtau."""
    _check_exponents(i, j, p, q)
    if a > b:
        raise KernelError(f"integration limits reversed: a={a} > b={b}")
    inner_anti = trig_monomial(p, q, lam=complex(-mu)).antiderivative()
    inner = HarmonicSum(inner_anti.terms)
    inner._accum(0, 0.0j, -inner_anti.eval(0.0))
    inner = inner.shifted(complex(mu))
    return (trig_monomial(i, j) * inner).definite(a, b)


# ---------------------------------------------------------------------------
# Vanishing predictions of the parity lemma (test-suite support).
# ---------------------------------------------------------------------------


def lemma_vanish_predicate(interval: str, kind: str, exponents, phi: float) -> bool:
    """Parity-lemma prediction of whether a kernel integral vanishes.

    ``interval`` is "first" ([0, phi]) or "second" ([phi, 2*pi]); ``kind`` is
    "plain" for I/J or "nested" for the iterated integrals.  ``exponents`` is
    (p, q) for plain and (i, j, p, q) for nested.  The lemma covers phi = pi
    (both kinds) and phi = 2*pi (plain only); elsewhere nothing vanishes.
    """
    if interval not in ("first", "second"):
        raise ValueError(f"unknown interval {interval!r}")
    if kind == "plain":
        p, q = exponents
        _check_exponents(p, q)
    elif kind == "nested":
        i, j, p, q = exponents
        _check_exponents(i, j, p, q)
    else:
        raise ValueError(f"unknown kind {kind!r}")

    at_pi = abs(phi - math.pi) < 1e-12
    at_2pi = abs(phi - TWO_PI) < 1e-12
    if not (at_pi or at_2pi):
        return False
    if at_2pi:
        if kind != "plain":
            raise ValueError("no vanishing prediction for nested integrals at phi=2*pi")
        if interval == "second":
            return True  # empty interval
        return not (p % 2 == 0 and q % 2 == 0)
    # phi = pi
    if kind == "plain":
        return p % 2 == 1
    # nested: the four parity cases all reduce to i odd and p odd
    return i % 2 == 1 and p % 2 == 1


# ---------------------------------------------------------------------------
# Optional on-disk persistence of the I-recurrence memo.
# ---------------------------------------------------------------------------


def _cache_path(cache_dir: str) -> str:
    return os.path.join(cache_dir, "trig_i_cache.pkl")


def load_cache(cache_dir: str | None = None) -> int:
    cache_dir = cache_dir or os.environ.get(_CACHE_ENV)
    if not cache_dir:
        return 0
    path = _cache_path(cache_dir)
    if not os.path.exists(path):
        return 0
    with open(path, "rb") as fh:
        data = pickle.load(fh)
    with _I_LOCK:
        _I_CACHE.update(data)
    return len(data)


def save_cache(cache_dir: str | None = None) -> int:
    cache_dir = cache_dir or os.environ.get(_CACHE_ENV)
    if not cache_dir:
        return 0
    os.makedirs(cache_dir, exist_ok=True)
    with _I_LOCK:
        data = dict(_I_CACHE)
    with open(_cache_path(cache_dir), "wb") as fh:
        pickle.dump(data, fh)
    return len(data)
