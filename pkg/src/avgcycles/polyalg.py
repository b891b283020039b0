"""Sparse multivariate polynomials over the averaged-function variables.

Variables are ordered (r, z_1, ..., z_m); a monomial is a dense exponent
tuple of length nvars.  Coefficients below PRUNE_TOL are dropped so that
round-off from the integral kernels does not accumulate into spurious terms.
"""

from __future__ import annotations

import numpy as np

PRUNE_TOL = 1e-15

VAR_NAMES_MAX = 8


class Poly:
    """Sparse polynomial: dict of exponent-tuple -> float coefficient."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms=None):
        self.nvars = nvars
        self.terms: dict = {}
        if terms:
            for mono, c in dict(terms).items():
                self._accum(mono, c)

    def _accum(self, mono, c):
        if len(mono) != self.nvars:
            raise ValueError(f"monomial {mono} has wrong length for nvars={self.nvars}")
        if any(e < 0 for e in mono):
            raise ValueError(f"negative exponent in monomial {mono}")
        v = self.terms.get(mono, 0.0) + c
        if abs(v) < PRUNE_TOL:
            self.terms.pop(mono, None)
        else:
            self.terms[mono] = v

    @classmethod
    def constant(cls, nvars: int, c: float) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, idx: int) -> "Poly":
        mono = tuple(1 if k == idx else 0 for k in range(nvars))
        return cls(nvars, {mono: 1.0})

    def copy(self) -> "Poly":
        return Poly(self.nvars, self.terms)

    def is_zero(self, tol: float = 0.0) -> bool:
        if tol <= 0.0:
            return not self.terms
        return all(abs(c) <= tol for c in self.terms.values())

    def max_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        out = self.copy()
        for mono, c in other.terms.items():
            out._accum(mono, c)
        return out

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other.scaled(-1.0)

    def scaled(self, c: float) -> "Poly":
        return Poly(self.nvars, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        out = Poly(self.nvars)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out._accum(tuple(a + b for a, b in zip(m1, m2)), c1 * c2)
        return out

    def _check(self, other):
        if self.nvars != other.nvars:
            raise ValueError(f"variable-count mismatch: {self.nvars} vs {other.nvars}")

    def diff(self, var: int) -> "Poly":
        if not (0 <= var < self.nvars):
            raise ValueError(f"variable index {var} out of range for nvars={self.nvars}")
        out = Poly(self.nvars)
        for mono, c in self.terms.items():
            e = mono[var]
            if e > 0:
                m2 = tuple(v - 1 if k == var else v for k, v in enumerate(mono))
                out._accum(m2, c * e)
        return out

    def __call__(self, point) -> float:
        point = np.asarray(point, dtype=float)
        if point.shape != (self.nvars,):
            raise ValueError(f"point has shape {point.shape}, expected ({self.nvars},)")
        # deterministic summation order for reproducibility
        total = 0.0
        for mono in sorted(self.terms):
            val = self.terms[mono]
            for x, e in zip(point, mono):
                if e:
                    val *= x**e
            total += val
        return total

    def pretty(self, names=None) -> str:
        if not self.terms:
            return "0"
        if names is None:
            names = ["r"] + [f"z{k}" for k in range(1, self.nvars)]
        # graded lexicographic order
        parts = []
        for mono in sorted(self.terms, key=lambda m: (sum(m), tuple(-e for e in m))):
            c = self.terms[mono]
            factors = [f"{c:.12g}"]
            for nm, e in zip(names, mono):
                if e == 1:
                    factors.append(nm)
                elif e > 1:
                    factors.append(f"{nm}^{e}")
            parts.append("*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Poly({self.pretty()})"


class PolyVec:
    """Ordered list of polynomials sharing the same variables."""

    __slots__ = ("components",)

    def __init__(self, components):
        components = list(components)
        if not components:
            raise ValueError("PolyVec must be nonempty")
        n = components[0].nvars
        if any(p.nvars != n for p in components):
            raise ValueError("components have differing variable counts")
        self.components = components

    @property
    def nvars(self) -> int:
        return self.components[0].nvars

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __call__(self, point):
        return np.array([p(point) for p in self.components])

    def pretty(self, names=None) -> str:
        return "\n".join(f"[{k}] {p.pretty(names)}" for k, p in enumerate(self.components))


def jacobian(F: PolyVec, point):
    """Jacobian matrix of a square system at a point, and its determinant."""
    n = len(F)
    if F.nvars != n:
        raise ValueError(f"system is not square: {n} equations, {F.nvars} variables")
    J = np.empty((n, n))
    for i, p in enumerate(F.components):
        for j in range(n):
            J[i, j] = p.diff(j)(point)
    return J, float(np.linalg.det(J))


def bezout_bound(F: PolyVec) -> int:
    """Product of total degrees; 0 for a system with an unsolvable or degenerate row."""
    bound = 1
    for p in F.components:
        d = p.degree()
        if d <= 0:
            # nonzero constant: no solutions; zero polynomial: degenerate row
            return 0
        bound *= d
    return bound
