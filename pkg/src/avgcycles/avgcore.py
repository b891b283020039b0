"""Closed-form averaged functions and their quadrature oracle.

The first- and second-order averaged functions of a system are polynomials in
nu = (r, z_1, ..., z_m).  They are assembled here exactly, by representing
every integrand as a finite sum of terms

    coeff * r^a * z^k * s^j * e^(lam*s)        (lam complex)

and integrating termwise with the closed forms from :mod:`trigkernel`.  An
independent route, :func:`numeric_g`, evaluates the same objects by adaptive
quadrature of the variation-of-constants integrals along the unperturbed
flow; the two must agree and the tests enforce it.

Conventions fixed here (and pinned against the oracle):

* the slave components use the exponential weight e^(-mu_w * s) derived from
  the fundamental matrix (``literal_gamma=True`` reproduces the plain e^(-s)
  weight of the source text instead);
* ``numeric_g(order=2)`` returns the half-second-variation g_2 such that the
  displacement of the 2*pi return map is eps*g_1 + eps^2*g_2 + O(eps^3), and
  f_2 = 2*(d(xi g_1)/dv) gamma + 2*xi g_2;
* ``build_f2`` returns the polynomials r*f_2l (f_2l itself carries a 1/r
  term); their zeros with r > 0 are exactly the zeros of f_2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .polyalg import Poly, PolyVec
from .sysspec import SystemSpec
from .trigkernel import TWO_PI, HarmonicSum, trig_monomial

F1_ZERO_TOL = 1e-10
DEGENERATE_TOL = 1e-12


class DegenerateEigenvalueError(ValueError):
    """1 - e^(-2*pi*mu) is numerically singular for some tail eigenvalue."""


class FirstOrderNotZeroError(ValueError):
    """build_f2 requires the first-order averaged function to vanish."""


class InfeasibleConstraintError(ValueError):
    """A kernel constraint pins a coefficient through vanishing integrals."""


class QuadratureFailure(RuntimeError):
    """Adaptive refinement exceeded its depth cap."""


# ---------------------------------------------------------------------------
# nu-monomial x harmonic series
# ---------------------------------------------------------------------------


class NuTrigSeries:
    """Sum of terms (r^a * z-monomial) * HarmonicSum(s); a may be -1."""

    __slots__ = ("m", "terms")

    def __init__(self, m: int, terms=None):
        self.m = m
        self.terms: dict = {}  # (r_exp, zexps) -> HarmonicSum
        if terms:
            for mono, hs in terms.items():
                self.terms[mono] = HarmonicSum(hs.terms)

    def accum(self, r_exp, zexps, hs: HarmonicSum, factor=1.0):
        mono = (r_exp, tuple(zexps))
        cur = self.terms.get(mono)
        if cur is None:
            cur = HarmonicSum()
            self.terms[mono] = cur
        for (k, lam), c in hs.terms.items():
            cur._accum(k, lam, c * factor)

    def __add__(self, other: "NuTrigSeries") -> "NuTrigSeries":
        out = NuTrigSeries(self.m, self.terms)
        for mono, hs in other.terms.items():
            out.accum(mono[0], mono[1], hs)
        return out

    def scaled(self, c) -> "NuTrigSeries":
        out = NuTrigSeries(self.m)
        for mono, hs in self.terms.items():
            out.accum(mono[0], mono[1], hs.scaled(c))
        return out

    def __mul__(self, other: "NuTrigSeries") -> "NuTrigSeries":
        out = NuTrigSeries(self.m)
        for (a1, z1), h1 in self.terms.items():
            for (a2, z2), h2 in other.terms.items():
                out.accum(a1 + a2, tuple(x + y for x, y in zip(z1, z2)), h1 * h2)
        return out

    def shifted(self, lam) -> "NuTrigSeries":
        out = NuTrigSeries(self.m)
        for mono, hs in self.terms.items():
            out.accum(mono[0], mono[1], hs.shifted(lam))
        return out

    def antider(self) -> "NuTrigSeries":
        """s-antiderivative vanishing at s = 0."""
        out = NuTrigSeries(self.m)
        for mono, hs in self.terms.items():
            anti = hs.antiderivative()
            c0 = anti.eval(0.0)
            fixed = HarmonicSum(anti.terms)
            fixed._accum(0, 0.0j, -c0)
            out.accum(mono[0], mono[1], fixed)
        return out

    def diff_r(self) -> "NuTrigSeries":
        out = NuTrigSeries(self.m)
        for (a, z), hs in self.terms.items():
            if a != 0:
                out.accum(a - 1, z, hs.scaled(float(a)))
        return out

    def diff_z(self, rho: int) -> "NuTrigSeries":
        """Formal derivative in z_rho (1-based index into the z block)."""
        out = NuTrigSeries(self.m)
        for (a, z), hs in self.terms.items():
            e = z[rho - 1]
            if e:
                z2 = tuple(v - 1 if k == rho - 1 else v for k, v in enumerate(z))
                out.accum(a, z2, hs.scaled(float(e)))
        return out

    def definite(self, a: float, b: float, rshift: int = 0) -> Poly:
        """Integrate over [a, b] (b may be below a) into a Poly in nu."""
        poly = Poly(self.m + 1)
        for (re, zex), hs in self.terms.items():
            val = hs.definite(a, b)
            re2 = re + rshift
            if re2 < 0:
                if abs(val) > 1e-11:
                    raise ValueError(f"residual 1/r term with weight {val}")
                continue
            poly._accum((re2,) + zex, val)
        return poly


# ---------------------------------------------------------------------------
# symbolic field components restricted to the cycle manifold (tail z = 0)
# ---------------------------------------------------------------------------


def _field_series(spec: SystemSpec, order: int, sign: str, comp: int, tail_pick: int | None = None) -> NuTrigSeries:
    """Symbolic A (order 1) or B (order 2) component at tail z = 0.

    ``comp`` follows the cylindrical numbering: 1 is the angular component
    (with its 1/r prefactor), 2 the radial one, l+2 the z_l components.
    """
    m = spec.m
    fam_a, fam_b, fam_c = ("a", "b", "c") if order == 1 else ("alpha", "beta", "gamma")
    out = NuTrigSeries(m)

    def add(table, dp, dq, r_off, scale):
        for idx, coeff in table.entries.items():
            i, j = idx[0], idx[1]
            head = idx[2 : 2 + m]
            tail = idx[2 + m :]
            if tail_pick is None:
                if any(tail):
                    continue
            else:
                want = tuple(1 if k == tail_pick - 1 else 0 for k in range(spec.d - m))
                if tail != want:
                    continue
            out.accum(i + j + r_off, head, trig_monomial(i + dp, j + dq), coeff * scale)

    if comp == 1:
        add(spec.table(fam_b, sign), 1, 0, -1, 1.0)
        add(spec.table(fam_a, sign), 0, 1, -1, -1.0)
    elif comp == 2:
        add(spec.table(fam_a, sign), 1, 0, 0, 1.0)
        add(spec.table(fam_b, sign), 0, 1, 0, 1.0)
    else:
        add(spec.table(fam_c, sign, comp - 3), 0, 0, 0, 1.0)
    return out


def _zone_bounds(spec: SystemSpec, sign: str):
    """(start, end) of the y-integration for each zone; minus zone runs backward."""
    return (0.0, spec.phi) if sign == "+" else (0.0, spec.phi - TWO_PI)


def _g_contribution(spec: SystemSpec, sign: str, series: NuTrigSeries, rshift: int = 0) -> Poly:
    """Contribution of one zone to g = y+(phi) - y-(phi - 2*pi)."""
    a, b = _zone_bounds(spec, sign)
    poly = series.definite(a, b, rshift=rshift)
    return poly if sign == "+" else poly.scaled(-1.0)


# ---------------------------------------------------------------------------
# first order
# ---------------------------------------------------------------------------


def build_f1(spec: SystemSpec) -> PolyVec:
    """Closed-form first-order averaged function (m+1 components in nu)."""
    comps = []
    for ell in range(spec.m + 1):
        poly = Poly(spec.m + 1)
        for sign in ("+", "-"):
            poly = poly + _g_contribution(spec, sign, _field_series(spec, 1, sign, ell + 2))
        comps.append(poly)
    return PolyVec(comps)


@dataclass
class KernelConstraint:
    """Linear relation on spec coefficients forcing one f_1 monomial to zero."""

    component: int  # 0 for the radial equation, 1..m for z_l
    monomial: tuple  # (r_exp, k_1, ..., k_m)
    terms: list  # list of (family, sign, index, weight)

    def residual(self, spec: SystemSpec) -> float:
        total = 0.0
        for fam, sign, idx, w in self.terms:
            ell = self.component - 1 if fam == "c" else None
            total += w * spec.table(fam, sign, ell).get(idx)
        return total


def _zero_tail(spec: SystemSpec):
    return (0,) * (spec.d - spec.m)


def f1_kernel_constraints(spec: SystemSpec) -> list:
    """One linear constraint per potential monomial of each f_1 component."""
    from .trigkernel import TrigKey, trig_I, trig_J

    n, m, phi = spec.n, spec.m, spec.phi
    tail = _zero_tail(spec)
    constraints = []
    from .sysspec import multi_indices

    heads = sorted(set(multi_indices(n, m)))
    for ell in range(m + 1):
        for kvec in heads:
            ksum = sum(kvec)
            for e in range(0, n - ksum + 1):
                terms = []
                for i in range(e + 1):
                    j = e - i
                    idx = (i, j) + kvec + tail
                    if ell == 0:
                        terms.append(("a", "+", idx, trig_I(TrigKey(i + 1, j, phi))))
                        terms.append(("b", "+", idx, trig_I(TrigKey(i, j + 1, phi))))
                        terms.append(("a", "-", idx, trig_J(TrigKey(i + 1, j, phi))))
                        terms.append(("b", "-", idx, trig_J(TrigKey(i, j + 1, phi))))
                    else:
                        terms.append(("c", "+", idx, trig_I(TrigKey(i, j, phi))))
                        terms.append(("c", "-", idx, trig_J(TrigKey(i, j, phi))))
                constraints.append(KernelConstraint(ell, (e,) + kvec, terms))
    return constraints


def project_to_kernel(spec: SystemSpec, weight_tol: float = 1e-12) -> SystemSpec:
    """Nearest spec with f_1 identically zero, solving one coefficient per constraint."""
    out = spec.copy()
    for con in f1_kernel_constraints(out):
        res = con.residual(out)
        if abs(res) < 1e-14:
            continue
        fam, sign, idx, w = max(con.terms, key=lambda t: (abs(t[3]), t[:3]))
        if abs(w) < weight_tol:
            raise InfeasibleConstraintError(
                f"constraint on component {con.component}, monomial {con.monomial}: "
                f"all integral weights vanish but the residual is {res:.3e}"
            )
        ell = con.component - 1 if fam == "c" else None
        table = out.table(fam, sign, ell)
        table.set(idx, table.get(idx) - res / w)
    return out


# ---------------------------------------------------------------------------
# slave components and second order
# ---------------------------------------------------------------------------


def _delta_entries(spec: SystemSpec):
    out = []
    for w in range(spec.m + 1, spec.d + 1):
        mu = spec.mu[w - 1]
        denom = 1.0 - math.exp(-TWO_PI * mu)
        if abs(denom) < DEGENERATE_TOL:
            raise DegenerateEigenvalueError(f"mu_{w} = {mu} makes 1 - e^(-2*pi*mu) vanish")
        out.append((w, mu, denom))
    return out


def build_gamma(spec: SystemSpec, literal_gamma: bool = False) -> list:
    """Slave components gamma_w(nu) as polynomials, w = m+1..d."""
    gammas = []
    for w, mu, denom in _delta_entries(spec):
        poly = Poly(spec.m + 1)
        for sign in ("+", "-"):
            series = _field_series(spec, 1, sign, w + 2)
            a, b = _zone_bounds(spec, sign)
            if literal_gamma:
                # the source text's weight: e^(-s) on [0,phi] and e^(-2*pi)e^(-s) on [phi,2*pi]
                part = series.shifted(complex(-1.0))
                if sign == "+":
                    poly = poly + part.definite(0.0, spec.phi)
                else:
                    poly = poly + part.definite(spec.phi, TWO_PI).scaled(math.exp(-TWO_PI))
            else:
                part = series.shifted(complex(-mu))
                contrib = part.definite(a, b)
                if sign == "-":
                    contrib = contrib.scaled(-math.exp(-TWO_PI * mu))
                poly = poly + contrib
        gammas.append(poly.scaled(-1.0 / denom))
    return gammas


def _dg1_dtail(spec: SystemSpec) -> list:
    """Rows: for each master component l, the list over w of d(g_1l)/dz_w as Poly."""
    rows = []
    for ell in range(spec.m + 1):
        row = []
        for w in range(spec.m + 1, spec.d + 1):
            mu = spec.mu[w - 1]
            poly = Poly(spec.m + 1)
            for sign in ("+", "-"):
                series = _field_series(spec, 1, sign, ell + 2, tail_pick=w - spec.m)
                poly = poly + _g_contribution(spec, sign, series.shifted(complex(mu)))
            row.append(poly)
        rows.append(row)
    return rows


def _y1_series(spec: SystemSpec, sign: str) -> list:
    """Closed forms of y_1 components (functions of s) for one zone, tail z = 0."""
    out = []
    for comp in range(spec.d + 1):
        series = _field_series(spec, 1, sign, comp + 2)
        if comp <= spec.m:
            out.append(series.antider())
        else:
            mu = spec.mu[comp - 1]
            out.append(series.shifted(complex(-mu)).antider().shifted(complex(mu)))
    return out


def check_f1_zero(spec: SystemSpec, tol: float = F1_ZERO_TOL):
    f1 = build_f1(spec)
    worst = max(p.max_coeff() for p in f1.components)
    if worst > tol:
        raise FirstOrderNotZeroError(
            f"f_1 is not identically zero: largest polynomial coefficient {worst:.3e} exceeds {tol:g}"
        )


def build_f2(spec: SystemSpec, literal_gamma: bool = False, check_f1: bool = True) -> PolyVec:
    """Second-order averaged function, returned as the polynomials r*f_2l.

    Requires f_1 to vanish identically (kernel-projected spec).  Components
    have total degree <= 2n; divide values by r to evaluate f_2 itself.
    """
    if check_f1:
        check_f1_zero(spec)
    m = spec.m
    if m < spec.d:
        gammas = build_gamma(spec, literal_gamma=literal_gamma)
        dg_rows = _dg1_dtail(spec)
    else:
        gammas, dg_rows = [], [[] for _ in range(m + 1)]
    r_poly = Poly.variable(m + 1, 0)

    comps = []
    for ell in range(m + 1):
        total = Poly(m + 1)
        # 2 * G~_l, promoted by one power of r
        for dg, gam in zip(dg_rows[ell], gammas):
            total = total + (dg * gam * r_poly).scaled(2.0)
        for sign in ("+", "-"):
            a1 = _field_series(spec, 1, sign, 1)
            f1l = _field_series(spec, 1, sign, ell + 2)
            f2l = _field_series(spec, 2, sign, ell + 2) + (a1 * f1l).scaled(-1.0)
            y1 = _y1_series(spec, sign)
            ftil = f1l.diff_r() * y1[0]
            for rho in range(1, m + 1):
                ftil = ftil + f1l.diff_z(rho) * y1[rho]
            for w in range(m + 1, spec.d + 1):
                dfw = _field_series(spec, 1, sign, ell + 2, tail_pick=w - m)
                ftil = ftil + dfw * y1[w]
            total = total + _g_contribution(spec, sign, f2l + ftil, rshift=1).scaled(2.0)
        comps.append(total)
    return PolyVec(comps)


def eval_f2(rf2: PolyVec, nu) -> np.ndarray:
    """Evaluate f_2 from the r*f_2 polynomials (requires r > 0)."""
    nu = np.asarray(nu, dtype=float)
    return rf2(nu) / nu[0]


@dataclass
class AveragedSystem:
    """Averaged functions of one spec: f_1, optional r*f_2, slave components."""

    spec: SystemSpec
    f1: PolyVec
    rf2: PolyVec | None = None
    gamma: list = field(default_factory=list)
    kernel_constraints: list = field(default_factory=list)


def build_averaged_system(spec: SystemSpec, order: int = 2, literal_gamma: bool = False) -> AveragedSystem:
    f1 = build_f1(spec)
    constraints = f1_kernel_constraints(spec)
    gamma = build_gamma(spec, literal_gamma=literal_gamma) if spec.m < spec.d else []
    rf2 = None
    if order >= 2:
        worst = max(p.max_coeff() for p in f1.components)
        if worst <= F1_ZERO_TOL:
            rf2 = build_f2(spec, literal_gamma=literal_gamma, check_f1=False)
    return AveragedSystem(spec, f1, rf2, gamma, constraints)


# ---------------------------------------------------------------------------
# numeric oracle: adaptive quadrature along the unperturbed flow
# ---------------------------------------------------------------------------

# Gauss-Kronrod 7-15 nodes/weights on [-1, 1]
_GK_NODES = np.array(
    [
        -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
        -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
        0.207784955007898, 0.405845151377397, 0.586087235467691, 0.741531185599394,
        0.864864423359769, 0.949107912342759, 0.991455371120813,
    ]
)
_GK_WK = np.array(
    [
        0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
        0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
        0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
        0.104790010322250, 0.063092092629979, 0.022935322010529,
    ]
)
_GK_WG = np.array(
    [
        0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0, 0.381830050505119, 0.0,
        0.417959183673469, 0.0, 0.381830050505119, 0.0, 0.279705391489277, 0.0,
        0.129484966168870, 0.0,
    ]
)


def quad_vec(f, a: float, b: float, tol: float = 1e-12, depth_cap: int = 40):
    """Adaptive Gauss-Kronrod integration of a vector-valued function.

    Handles b < a by orientation.  Raises QuadratureFailure past depth_cap.
    """
    if a == b:
        return np.zeros_like(np.asarray(f(a), dtype=float))
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    def panel(lo, hi):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        vals = np.array([np.asarray(f(mid + half * x), dtype=float) for x in _GK_NODES])
        ik = half * np.tensordot(_GK_WK, vals, axes=(0, 0))
        ig = half * np.tensordot(_GK_WG, vals, axes=(0, 0))
        return ik, float(np.max(np.abs(ik - ig)))

    def recurse(lo, hi, depth):
        ik, err = panel(lo, hi)
        if err < tol * max(1.0, hi - lo):
            return ik
        if depth >= depth_cap:
            raise QuadratureFailure(f"refinement depth {depth_cap} exceeded on [{lo}, {hi}] (err={err:.2e})")
        mid = 0.5 * (lo + hi)
        return recurse(lo, mid, depth + 1) + recurse(mid, hi, depth + 1)

    return sign * recurse(a, b, 0)


def flow(spec: SystemSpec, theta: float, zz: np.ndarray) -> np.ndarray:
    """Unperturbed flow from (r, z) at time theta: tail scales by e^(mu*theta)."""
    out = np.array(zz, dtype=float)
    for w in range(spec.m + 1, spec.d + 1):
        out[w] = math.exp(spec.mu[w - 1] * theta) * out[w]
    return out


def eval_fields(spec: SystemSpec, order: int, sign: str, theta: float, x: np.ndarray) -> np.ndarray:
    """Cylindrical field components (A or B), numbered 1..d+2, at a state."""
    fam_a, fam_b, fam_c = ("a", "b", "c") if order == 1 else ("alpha", "beta", "gamma")
    r = x[0]
    z = x[1:]
    cx, sx = math.cos(theta), math.sin(theta)
    xx, yy = r * cx, r * sx
    va = spec.table(fam_a, sign).eval(xx, yy, z)
    vb = spec.table(fam_b, sign).eval(xx, yy, z)
    out = np.empty(spec.d + 2)
    out[0] = (vb * cx - va * sx) / r
    out[1] = va * cx + vb * sx
    for ell in range(spec.d):
        out[ell + 2] = spec.table(fam_c, sign, ell).eval(xx, yy, z)
    return out


def eval_F1(spec: SystemSpec, sign: str, theta: float, x: np.ndarray) -> np.ndarray:
    """First-order theta-time field (d+1 components)."""
    A = eval_fields(spec, 1, sign, theta, x)
    out = np.empty(spec.d + 1)
    out[: spec.m + 1] = A[1 : spec.m + 2]
    for w in range(spec.m + 1, spec.d + 1):
        out[w] = A[w + 1] - spec.mu[w - 1] * x[w] * A[0]
    return out


def eval_F2(spec: SystemSpec, sign: str, theta: float, x: np.ndarray) -> np.ndarray:
    """Second-order theta-time field (d+1 components)."""
    A = eval_fields(spec, 1, sign, theta, x)
    B = eval_fields(spec, 2, sign, theta, x)
    out = np.empty(spec.d + 1)
    for ell in range(spec.m + 1):
        out[ell] = B[ell + 1] - A[0] * A[ell + 1]
    for w in range(spec.m + 1, spec.d + 1):
        mu = spec.mu[w - 1]
        out[w] = B[w + 1] + mu * x[w] * A[0] ** 2 - A[0] * A[w + 1] - mu * x[w] * B[0]
    return out


def _F1_jac(spec: SystemSpec, sign: str, theta: float, x: np.ndarray) -> np.ndarray:
    """Analytic Jacobian of the first-order field with respect to (r, z)."""
    r, z = x[0], x[1:]
    cx, sx = math.cos(theta), math.sin(theta)
    xx, yy = r * cx, r * sx

    def chain(g):
        # gradient wrt (x, y, z) -> gradient wrt (r, z) along x = r cos, y = r sin
        out = np.empty(spec.d + 1)
        out[0] = cx * g[0] + sx * g[1]
        out[1:] = g[2:]
        return out

    va, ga = spec.table("a", sign).eval_grad(xx, yy, z)
    vb, gb = spec.table("b", sign).eval_grad(xx, yy, z)
    A1 = (vb * cx - va * sx) / r
    dA1 = (cx * chain(gb) - sx * chain(ga)) / r
    dA1[0] -= A1 / r

    J = np.empty((spec.d + 1, spec.d + 1))
    J[0] = cx * chain(ga) + sx * chain(gb)
    for k in range(1, spec.d + 1):
        _, gc = spec.table("c", sign, k - 1).eval_grad(xx, yy, z)
        row = chain(gc)
        if k > spec.m:
            mu = spec.mu[k - 1]
            row = row - mu * x[k] * dA1
            row[k] -= mu * A1
        J[k] = row
    return J


def _Y_diag(spec: SystemSpec, theta: float) -> np.ndarray:
    diag = np.ones(spec.d + 1)
    for w in range(spec.m + 1, spec.d + 1):
        diag[w] = math.exp(spec.mu[w - 1] * theta)
    return diag


def _y1(spec: SystemSpec, sign: str, theta: float, zz: np.ndarray, tol: float) -> np.ndarray:
    def integrand(s):
        xs = flow(spec, s, zz)
        return eval_F1(spec, sign, s, xs) / _Y_diag(spec, s)

    return _Y_diag(spec, theta) * quad_vec(integrand, 0.0, theta, tol=tol)


def _y2(spec: SystemSpec, sign: str, theta: float, zz: np.ndarray, tol: float) -> np.ndarray:
    """Joint integration of the first and second variations y_1, y_2.

    Both satisfy linear equations y' = D y + forcing along the unperturbed
    flow (D the diagonal of tail eigenvalues), so one ODE solve per zone
    replaces the nested quadrature.  Returns y_2(theta).
    """
    from scipy.integrate import solve_ivp

    if theta == 0.0:
        return np.zeros(spec.d + 1)
    nvar = spec.d + 1
    dmu = np.zeros(nvar)
    for w in range(spec.m + 1, spec.d + 1):
        dmu[w] = spec.mu[w - 1]

    def rhs(s, y):
        xs = flow(spec, s, zz)
        y1, y2 = y[:nvar], y[nvar:]
        d1 = dmu * y1 + eval_F1(spec, sign, s, xs)
        d2 = dmu * y2 + 2.0 * eval_F2(spec, sign, s, xs) + 2.0 * _F1_jac(spec, sign, s, xs) @ y1
        return np.concatenate([d1, d2])

    sol = solve_ivp(rhs, (0.0, theta), np.zeros(2 * nvar), method="DOP853", rtol=1e-12, atol=1e-13)
    if not sol.success:
        raise QuadratureFailure(f"second-variation integration failed: {sol.message}")
    return sol.y[nvar:, -1]


def numeric_g(spec: SystemSpec, order: int, z, tol: float = 1e-12) -> np.ndarray:
    """Quadrature oracle for g_1 (order 1) or the half-variation g_2 (order 2)."""
    zz = np.asarray(z, dtype=float)
    if zz.shape != (spec.d + 1,):
        raise ValueError(f"state has shape {zz.shape}, expected ({spec.d + 1},)")
    if order == 1:
        return _y1(spec, "+", spec.phi, zz, tol) - _y1(spec, "-", spec.phi - TWO_PI, zz, tol)
    if order == 2:
        return 0.5 * (_y2(spec, "+", spec.phi, zz, tol) - _y2(spec, "-", spec.phi - TWO_PI, zz, tol))
    raise ValueError(f"order must be 1 or 2, got {order}")


def _embed(spec: SystemSpec, nu) -> np.ndarray:
    zz = np.zeros(spec.d + 1)
    zz[: spec.m + 1] = np.asarray(nu, dtype=float)
    return zz


def oracle_f1(spec: SystemSpec, nu) -> np.ndarray:
    """xi g_1 at z_nu by quadrature; the independent check of build_f1."""
    return numeric_g(spec, 1, _embed(spec, nu))[: spec.m + 1]


def oracle_gamma(spec: SystemSpec, nu) -> np.ndarray:
    """-Delta^{-1} xi-perp g_1(z_nu) by quadrature."""
    g1 = numeric_g(spec, 1, _embed(spec, nu))
    out = np.empty(spec.d - spec.m)
    for k, (w, mu, denom) in enumerate(_delta_entries(spec)):
        delta = math.exp(mu * spec.phi) * denom
        out[k] = -g1[w] / delta
    return out


def oracle_f2(spec: SystemSpec, nu, fd_step: float = 1e-6) -> np.ndarray:
    """Quadrature route for f_2: 2*(d(xi g_1)/dv) gamma + 2*xi g_2."""
    zz = _embed(spec, nu)
    mcols = spec.d - spec.m
    out = 2.0 * numeric_g(spec, 2, zz)[: spec.m + 1]
    if mcols:
        gam = oracle_gamma(spec, nu)
        M = np.empty((spec.m + 1, mcols))
        for k in range(mcols):
            dz = np.zeros(spec.d + 1)
            dz[spec.m + 1 + k] = fd_step
            gp = numeric_g(spec, 1, zz + dz)[: spec.m + 1]
            gm = numeric_g(spec, 1, zz - dz)[: spec.m + 1]
            M[:, k] = (gp - gm) / (2 * fd_step)
        out = out + 2.0 * M @ gam
    return out
