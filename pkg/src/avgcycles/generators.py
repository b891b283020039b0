"""Constructive system generators reaching the zero-count lower bounds.

Each generator builds a SystemSpec whose averaged function (first or second
order) provably attains a stated number of simple zeros in a known box.

The first-order generators invert a linear map: unit coefficients are probed
through build_f1 and the resulting matrix is solved (least squares) against
target polynomials with hand-placed roots.

The second-order generators are harder because f_2 is quadratic in the
first-order coefficients.  They build an exact algebraic surrogate

    coeffs(r*f_2) = Q(u) + L v

by probing build_f2 on unit and pairwise coefficient vectors (u parametrizes
the first-order tables inside the kernel of f_1, v the second-order tables,
which enter linearly), then tune u by least squares with multistart and
recover v by a linear solve.  The tuned spec is re-verified against the real
build_f1/build_f2 pipeline and certified by root search.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .avgcore import build_f1, build_f2, f1_kernel_constraints
from .polyalg import Poly, PolyVec
from .rootfind import SearchBox, find_simple_zeros
from .sysspec import SystemSpec, zero_spec
from .trigkernel import TWO_PI

LINEAR_TOL = 1e-9
VERIFY_TOL = 1e-8


class InfeasibleTargetError(RuntimeError):
    """The requested target polynomials are outside the coefficient map's image."""


# a slot is (family, sign, ell, idx); ell is None for scalar families
def _set_slot(spec: SystemSpec, slot, value: float):
    fam, sign, ell, idx = slot
    table = spec.table(fam, sign, ell)
    table.set(idx, table.get(idx) + value)


def _spec_from_slots(n, m, phi, slots, values, mu=None) -> SystemSpec:
    spec = zero_spec(n, m, m, phi, mu)
    for slot, val in zip(slots, values):
        if val != 0.0:
            _set_slot(spec, slot, float(val))
    return spec


@dataclass
class GeneratorResult:
    """A constructed spec plus everything needed to certify its zero count."""

    spec: SystemSpec
    order: int
    system: PolyVec  # f_1 (order 1) or r*f_2 (order 2)
    expected_count: int
    box: SearchBox
    zeros: list = field(default_factory=list)  # known/certified zero locations
    notes: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# root placement helpers
# ---------------------------------------------------------------------------


def positive_nodes(count: int, lo: float = 0.4, hi: float = 1.7) -> list:
    """Distinct positive radii, well separated inside (lo, hi)."""
    if count <= 0:
        return []
    return [lo + (hi - lo) * (k + 0.5) / count for k in range(count)]


def symmetric_nodes(count: int, half: float = 0.95, offset: float = 0.0) -> list:
    if count <= 0:
        return []
    return [-half + 2 * half * (k + 0.5) / count + offset for k in range(count)]


def poly_from_roots(nvars: int, var: int, roots, square_var: bool = False, shift: tuple = ()) -> Poly:
    """prod (x_var - root), or prod (x_var^2 - root); optionally times a monomial."""
    out = Poly.constant(nvars, 1.0)
    x = Poly.variable(nvars, var)
    base = x * x if square_var else x
    for root in roots:
        out = out * (base - Poly.constant(nvars, float(root)))
    for v, e in enumerate(shift):
        for _ in range(e):
            out = out * Poly.variable(nvars, v)
    return out


def default_box(m: int, r_hi: float = 2.1, z_half: float = 1.25, grid: int = 15) -> SearchBox:
    return SearchBox([0.05] + [-z_half] * m, [r_hi] + [z_half] * m, grid=(grid,) * (m + 1))


# ---------------------------------------------------------------------------
# linear engine (first-order targets)
# ---------------------------------------------------------------------------


def _poly_vec_to_coeffs(pv: PolyVec, monos: list) -> np.ndarray:
    out = np.zeros(len(monos))
    for k, (ci, mono) in enumerate(monos):
        out[k] = pv[ci].terms.get(mono, 0.0)
    return out


def _fit_linear_f1(n, m, phi, slots, target: PolyVec, tol=LINEAR_TOL):
    """Solve for slot values so that build_f1 matches the target PolyVec."""
    probes = [build_f1(_spec_from_slots(n, m, phi, [slot], [1.0])) for slot in slots]
    monos = set()
    for pv in probes + [target]:
        for ci, p in enumerate(pv):
            monos.update((ci, mo) for mo in p.terms)
    monos = sorted(monos)
    A = np.stack([_poly_vec_to_coeffs(pv, monos) for pv in probes], axis=1)
    b = _poly_vec_to_coeffs(target, monos)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.max(np.abs(A @ sol - b))) if len(b) else 0.0
    if resid > tol * max(1.0, np.max(np.abs(b), initial=0.0)):
        rank = np.linalg.matrix_rank(A)
        raise InfeasibleTargetError(
            f"first-order target not in coefficient-map image: residual {resid:.3e}, "
            f"matrix rank {rank} of {A.shape}"
        )
    spec = _spec_from_slots(n, m, phi, slots, sol)
    f1 = build_f1(spec)
    worst = max(
        abs(f1[ci].terms.get(mo, 0.0) - target[ci].terms.get(mo, 0.0)) for ci, mo in monos
    ) if monos else 0.0
    if worst > 10 * tol * max(1.0, np.max(np.abs(b), initial=0.0)):
        raise InfeasibleTargetError(f"re-verification failed: coefficient error {worst:.3e}")
    return spec, f1


def _scalar_slots(n, m, families, signs=("+", "-")):
    """All z-free entries (i, j, 0...0) of the given scalar families."""
    out = []
    for fam in families:
        for sign in signs:
            for i in range(n + 1):
                for j in range(n + 1 - i):
                    out.append((fam, sign, None, (i, j) + (0,) * m))
    return out


def _axis_slots(n, m, fam, ell, var, signs=("+", "-"), max_k=None):
    """Entries depending on a single variable: z_var powers (var>=1) or none."""
    out = []
    top = n if max_k is None else max_k
    for sign in signs:
        for k in range(top + 1):
            idx = [0, 0] + [0] * m
            if var >= 1:
                idx[1 + var] = k
                if k > top:
                    continue
            elif k > 0:
                continue
            out.append((fam, sign, ell, tuple(idx)))
    return out


def _grid_zeros(axis_roots):
    """Cartesian product of per-axis root lists -> list of points."""
    return [np.array(p) for p in itertools.product(*axis_roots)]


def _first_order_product_targets(n, m, phi):
    """Decoupled targets: radial component in r, component l in z_l."""
    nv = m + 1
    r_roots = positive_nodes(n)
    targets = [poly_from_roots(nv, 0, r_roots)]
    axis_roots = [r_roots]
    slots = _scalar_slots(n, m, ("a", "b"))
    for ell in range(1, m + 1):
        s_roots = symmetric_nodes(n, offset=0.013 * ell)
        targets.append(poly_from_roots(nv, ell, s_roots))
        axis_roots.append(s_roots)
        slots += _axis_slots(n, m, "c", ell - 1, ell)
    return PolyVec(targets), slots, axis_roots


def gen_prop10(n: int, m: int, phi: float) -> GeneratorResult:
    """First-order spec with n^(m+1) certified simple zeros (generic phi)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if abs(phi - math.pi) < 1e-9 or phi >= TWO_PI - 1e-9 or phi <= 0:
        raise ValueError("gen_prop10 needs phi in (0, 2*pi) away from pi and 2*pi")
    target, slots, axis_roots = _first_order_product_targets(n, m, phi)
    spec, f1 = _fit_linear_f1(n, m, phi, slots, target)
    return GeneratorResult(spec, 1, f1, n ** (m + 1), default_box(m), _grid_zeros(axis_roots))


def gen_prop16(n: int, m: int) -> GeneratorResult:
    """First-order spec at the half-turn switching angle, n^(m+1) zeros."""
    if n < 1:
        raise ValueError("n must be >= 1")
    phi = math.pi
    target, slots, axis_roots = _first_order_product_targets(n, m, phi)
    spec, f1 = _fit_linear_f1(n, m, phi, slots, target)
    return GeneratorResult(spec, 1, f1, n ** (m + 1), default_box(m), _grid_zeros(axis_roots))


def first_order_count(n: int, m: int, phi: float) -> int:
    """Attainable simple-zero count of f_1 per switching-angle regime."""
    if abs(phi - TWO_PI) < 1e-9:
        if m == 0:
            return (n - 1) // 2 if n % 2 else (n - 2) // 2
        return n**m * (n - 1) // 2
    return n ** (m + 1)


def gen_prop20(n: int, m: int) -> GeneratorResult:
    """First-order spec in the continuous case (full-turn switching angle).

    The radial equation always factors as r times an even polynomial; for
    even n and m >= 1 the roles permute (the radial component carries the z_1
    roots and the first z-component carries the even radial polynomial),
    which is what makes the count n^m (n-1)/2 attainable.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    phi = TWO_PI
    nv = m + 1
    expected = first_order_count(n, m, phi)
    slots = _scalar_slots(n, m, ("a", "b"), signs=("+",))
    targets = []
    axis_roots = []
    notes = {}
    if m == 0 or n % 2 == 1:
        npairs = (n - 1) // 2 if n % 2 else (n - 2) // 2
        rho = [v**2 for v in positive_nodes(npairs)]
        targets.append(poly_from_roots(nv, 0, rho, square_var=True, shift=(1,) + (0,) * m))
        axis_roots.append([math.sqrt(v) for v in rho])
        for ell in range(1, m + 1):
            s_roots = symmetric_nodes(n, offset=0.013 * ell)
            targets.append(poly_from_roots(nv, ell, s_roots))
            axis_roots.append(s_roots)
            slots += _axis_slots(n, m, "c", ell - 1, ell, signs=("+",))
    else:
        # even n, m >= 1: radial equation solves z_1, first z-equation solves r
        z1_roots = symmetric_nodes(n - 1, offset=0.017)
        targets.append(poly_from_roots(nv, 1, z1_roots, shift=(1,) + (0,) * m))
        rho = [v**2 for v in positive_nodes(n // 2)]
        targets.append(poly_from_roots(nv, 0, rho, square_var=True))
        axis_roots.append([math.sqrt(v) for v in rho])
        axis_roots.append(z1_roots)
        notes["role_permutation"] = "radial component carries z_1 roots; component 1 carries radial roots"
        for k in range(n):
            slots.append(("a", "+", None, (1, 0) + tuple(k if v == 0 else 0 for v in range(m))))
            slots.append(("b", "+", None, (0, 1) + tuple(k if v == 0 else 0 for v in range(m))))
        # component 1: even polynomial in r via z-free entries
        for i in range(0, n + 1, 2):
            for j in range(0, n + 1 - i, 2):
                slots.append(("c", "+", 0, (i, j) + (0,) * m))
        for ell in range(2, m + 1):
            s_roots = symmetric_nodes(n, offset=0.013 * ell)
            targets.append(poly_from_roots(nv, ell, s_roots))
            axis_roots.append(s_roots)
            slots += _axis_slots(n, m, "c", ell - 1, ell, signs=("+",))
    spec, f1 = _fit_linear_f1(n, m, phi, slots, PolyVec(targets))
    zeros = _grid_zeros(axis_roots) if all(axis_roots) else []
    return GeneratorResult(spec, 1, f1, expected, default_box(m), zeros, notes)


# ---------------------------------------------------------------------------
# quadratic engine (second-order targets)
# ---------------------------------------------------------------------------


def _kernel_basis(n, m, phi, slots, d=None) -> np.ndarray:
    """Null-space basis of the f_1 kernel constraints restricted to the slots."""
    spec = zero_spec(n, m, m if d is None else d, phi)
    cons = f1_kernel_constraints(spec)
    # vector c-slots are keyed with their component to avoid collisions
    pos = {(fam, sign, ell, idx): k for k, (fam, sign, ell, idx) in enumerate(slots)}
    rows = []
    for con in cons:
        row = np.zeros(len(slots))
        used = False
        for fam, sign, idx, w in con.terms:
            ell = con.component - 1 if fam == "c" else None
            k = pos.get((fam, sign, ell, idx))
            if k is not None and w != 0.0:
                row[k] = w
                used = True
        if used:
            rows.append(row)
    if not rows:
        return np.eye(len(slots))
    K = np.stack(rows)
    _, s, Vt = np.linalg.svd(K)
    rank = int(np.sum(s > 1e-12 * s[0]))
    return Vt[rank:].T  # columns span the null space


class _QuadModel:
    """Exact surrogate coeffs(r*f_2) = Q(u) + L v over a fixed monomial basis."""

    def __init__(self, n, m, phi, uslots, Nbasis, vslots, mu=None, d=None):
        self.n, self.m, self.phi, self.mu = n, m, phi, mu
        self.d = m if d is None else d
        self.uslots, self.N, self.vslots = uslots, Nbasis, vslots
        self.udim = Nbasis.shape[1]
        probes = {}

        def rf2_of(uvec, vvec):
            spec = self._assemble(uvec, vvec)
            return build_f2(spec, check_f1=False)

        eye = np.eye(self.udim)
        for i in range(self.udim):
            probes[(i, i)] = rf2_of(eye[i], np.zeros(len(vslots)))
        for i in range(self.udim):
            for j in range(i + 1, self.udim):
                probes[(i, j)] = rf2_of(eye[i] + eye[j], np.zeros(len(vslots)))
        lcols = [rf2_of(np.zeros(self.udim), col) for col in np.eye(len(vslots))]

        monos = set()
        for pv in list(probes.values()) + lcols:
            for ci, p in enumerate(pv):
                monos.update((ci, mo) for mo in p.terms)
        self.monos = sorted(monos)
        vec = lambda pv: _poly_vec_to_coeffs(pv, self.monos)
        self.C = {}
        for i in range(self.udim):
            self.C[(i, i)] = vec(probes[(i, i)])
        for i in range(self.udim):
            for j in range(i + 1, self.udim):
                self.C[(i, j)] = vec(probes[(i, j)]) - self.C[(i, i)] - self.C[(j, j)]
        # flat pair arrays so quad() and its Jacobian are single matmuls
        pairs = sorted(self.C)
        self._pi = np.array([i for i, _ in pairs], dtype=int)
        self._pj = np.array([j for _, j in pairs], dtype=int)
        self._Cmat = np.stack([self.C[p] for p in pairs])  # (npairs, nmono)
        self.L = (
            np.stack([vec(pv) for pv in lcols], axis=1)
            if lcols
            else np.zeros((len(self.monos), 0))
        )
        U, s, _ = np.linalg.svd(self.L, full_matrices=False) if self.L.shape[1] else (None, np.array([]), None)
        if len(s):
            rank = int(np.sum(s > 1e-10 * s[0]))
            self.Lbasis = U[:, :rank]
        else:
            self.Lbasis = np.zeros((len(self.monos), 0))

    def quad(self, u) -> np.ndarray:
        return (u[self._pi] * u[self._pj]) @ self._Cmat

    def quad_jac(self, u) -> np.ndarray:
        npairs = len(self._pi)
        dpair = np.zeros((npairs, self.udim))
        rows = np.arange(npairs)
        np.add.at(dpair, (rows, self._pi), u[self._pj])
        np.add.at(dpair, (rows, self._pj), u[self._pi])
        return self._Cmat.T @ dpair  # (nmono, udim)

    def residual_reduced(self, u, t, weights) -> np.ndarray:
        gap = self.quad(u) - t
        if self.Lbasis.shape[1]:
            gap = gap - self.Lbasis @ (self.Lbasis.T @ gap)
        return gap * weights

    def residual_jac(self, u, t, weights) -> np.ndarray:
        J = self.quad_jac(u)
        if self.Lbasis.shape[1]:
            J = J - self.Lbasis @ (self.Lbasis.T @ J)
        return weights[:, None] * J

    def solve_v(self, u, t) -> np.ndarray:
        if not self.L.shape[1]:
            return np.zeros(0)
        v, *_ = np.linalg.lstsq(self.L, t - self.quad(u), rcond=None)
        return v

    def _assemble(self, uvec, vvec) -> SystemSpec:
        spec = zero_spec(self.n, self.m, self.d, self.phi, self.mu)
        for slot, val in zip(self.uslots, self.N @ uvec):
            if val != 0.0:
                _set_slot(spec, slot, float(val))
        for slot, val in zip(self.vslots, vvec):
            if val != 0.0:
                _set_slot(spec, slot, float(val))
        return spec

    def target_vector(self, target: PolyVec):
        t = np.zeros(len(self.monos))
        leftover = []
        for ci, p in enumerate(target):
            for mo, c in p.terms.items():
                if (ci, mo) in self._mono_pos():
                    t[self._mono_pos()[(ci, mo)]] = c
                else:
                    leftover.append(((ci, mo), c))
        if leftover:
            raise InfeasibleTargetError(
                f"target contains monomials outside the reachable support: {leftover[:4]}"
            )
        return t

    def _mono_pos(self):
        if not hasattr(self, "_pos"):
            self._pos = {mo: k for k, mo in enumerate(self.monos)}
        return self._pos


def _tune_quadratic(model: _QuadModel, target: PolyVec, seed=0, starts=8,
                    free_monos=(), free_weight=0.0, tol=LINEAR_TOL):
    """Multistart least squares on u; returns (spec, rf2, misfit)."""
    t = model.target_vector(target)
    weights = np.ones(len(model.monos))
    free = set(free_monos)
    for k, mo in enumerate(model.monos):
        if mo in free:
            weights[k] = free_weight
    rng = np.random.default_rng(seed)
    scale = max(1.0, float(np.max(np.abs(t), initial=0.0)))
    # A tiny norm penalty keeps the optimizer off the asymptotic escape
    # directions (huge-norm parameter vectors whose first-order tables
    # amplify round-off past the kernel check downstream); the induced bias
    # on the coefficient misfit is far below the acceptance tolerance.
    lam = 1e-9 * scale
    eye = lam * np.eye(model.udim)

    def res_aug(u):
        return np.concatenate([model.residual_reduced(u, t, weights), lam * u])

    def jac_aug(u):
        return np.vstack([model.residual_jac(u, t, weights), eye])

    best = None
    done = False
    for trial in range(starts):
        u0 = rng.normal(scale=1.0 + 0.5 * (trial % 3), size=model.udim)
        # default scaling converges fast on well-conditioned problems;
        # x_scale="jac" rescues flat-valley stalls
        for x_scale in (1.0, "jac"):
            sol = least_squares(
                res_aug, u0, jac=jac_aug,
                xtol=3e-16, ftol=3e-16, gtol=3e-16, max_nfev=4000, x_scale=x_scale,
            )
            err = float(np.max(np.abs(model.residual_reduced(sol.x, t, weights))))
            if best is None or err < best[0]:
                best = (err, sol.x)
            if err < tol * scale:
                done = True
                break
        if done:
            break
    err, u = best
    if err > tol * scale:
        raise InfeasibleTargetError(
            f"second-order tuning stalled: weighted coefficient misfit {err:.3e} "
            f"(target scale {scale:.3g}, {model.udim} quadratic + {len(model.vslots)} linear unknowns)"
        )
    v = model.solve_v(u, t)
    spec = model._assemble(u, v)
    # re-verify against the real pipeline
    f1 = build_f1(spec)
    worst_f1 = max(p.max_coeff() for p in f1.components)
    if worst_f1 > 1e-9:
        raise InfeasibleTargetError(f"tuned spec violates the first-order kernel: |f_1| = {worst_f1:.3e}")
    rf2 = build_f2(spec, check_f1=False)
    misfit = 0.0
    pos = model._mono_pos()
    for ci, p in enumerate(rf2):
        for mo, c in p.terms.items():
            key = (ci, mo)
            if key in free:
                continue
            want = t[pos[key]] if key in pos else 0.0
            misfit = max(misfit, abs(c - want))
    for key, k in pos.items():
        if key in free:
            continue
        want = t[k]
        got = rf2[key[0]].terms.get(key[1], 0.0)
        misfit = max(misfit, abs(got - want))
    if misfit > max(VERIFY_TOL, 10.0 * tol) * scale:
        raise InfeasibleTargetError(f"surrogate/pipeline disagreement: {misfit:.3e}")
    return spec, rf2, misfit


def _certify(result_sys: PolyVec, box: SearchBox, expected: int):
    records = [rec for rec in find_simple_zeros(result_sys, box) if rec.simple]
    return records


def _second_order_slots(n, m, d=None, radial_z=False, slave=False):
    """Slot families for the second-order engine.

    First-order (quadratic) unknowns: the full z-free radial families a, b,
    each tail component's family on its own variable, optionally the radial
    families with pure z_1 powers (radial_z) and the slave-component family
    plus z-slave-linear radial entries (slave, needs d > m).  Second-order
    (linear) unknowns: z-free alpha/beta, per-component gamma on its own
    variable, plus z-dependent alpha/beta entries that absorb mixed cross
    terms of the quadratic part.
    """
    d = m if d is None else d
    uslots = _scalar_slots(n, d, ("a", "b"))
    if radial_z:
        for sign in ("+", "-"):
            for k in range(1, n + 1):
                uslots.append(("a", sign, None, (0, 0) + (k,) + (0,) * (d - 1)))
                uslots.append(("b", sign, None, (0, 0) + (k,) + (0,) * (d - 1)))
    for ell in range(1, m + 1):
        uslots += _axis_slots(n, d, "c", ell - 1, ell)
    if slave:
        if d <= m:
            raise ValueError("slave channel needs d > m")
        for sign in ("+", "-"):
            for i in range(n + 1):
                for j in range(n + 1 - i):
                    uslots.append(("c", sign, m, (i, j) + (0,) * d))
                    if i + j + 1 <= n:
                        idx = [i, j] + [0] * d
                        idx[2 + m] = 1
                        uslots.append(("a", sign, None, tuple(idx)))
                        uslots.append(("b", sign, None, tuple(idx)))
    vslots = _scalar_slots(n, d, ("alpha", "beta"))
    for ell in range(1, m + 1):
        vslots += _axis_slots(n, d, "gamma", ell - 1, ell)
    for ell in range(1, m + 1):
        for sign in ("+", "-"):
            for k in range(1, n + 1):
                for e in (0, 1):
                    idx = [e, 0] + [0] * d
                    idx[2 + ell - 1] = k
                    if sum(idx) <= n:
                        vslots.append(("alpha", sign, None, tuple(idx)))
                        vslots.append(("beta", sign, None, tuple(idx)))
    return list(dict.fromkeys(uslots)), list(dict.fromkeys(vslots))


def second_order_lower_bound(n: int, m: int, phi: float) -> int:
    """Attainable simple-zero count of f_2 per switching-angle regime."""
    if abs(phi - math.pi) < 1e-9:
        return (2 * n - 1) ** (m + 1) if n % 2 else (2 * n - 2) * (2 * n - 1) ** m
    if abs(phi - TWO_PI) < 1e-9:
        if m != 0:
            raise ValueError("continuous-case second-order count is stated for m = 0")
        return n if n % 2 == 0 else n - 1
    return 2 * n * (2 * n - 1) ** m


def second_order_upper_bound(n: int, m: int) -> int:
    return (2 * n) ** (m + 1)


def _pure_z_monos(model: _QuadModel, m: int):
    """Monomials with no radial factor (the weakly controllable leftovers)."""
    out = []
    for ci, mo in model.monos:
        if mo[0] == 0:
            out.append((ci, mo))
    return out


def _second_order_generator(n, m, phi, expected, target, uslots, vslots,
                            d=None, seed=0):
    """Shared driver: tune, re-verify, and certify one second-order target."""
    N = _kernel_basis(n, m, phi, uslots, d=d)
    if N.shape[1] == 0:
        raise InfeasibleTargetError("kernel constraints leave no first-order freedom")
    model = _QuadModel(n, m, phi, uslots, N, vslots, d=d)

    target_support = {(ci, mo) for ci, p in enumerate(target) for mo in p.terms}
    pure_z = [key for key in _pure_z_monos(model, m) if key not in target_support] if m else []
    loose = [key for key in model.monos if key not in target_support]
    attempts = [
        dict(free_monos=(), free_weight=0.0),
        dict(free_monos=pure_z, free_weight=1e-5, tol=1e-7),
        dict(free_monos=loose, free_weight=1e-5, tol=1e-7),
    ]
    last_exc = None
    for k, kw in enumerate(attempts):
        try:
            spec, rf2, misfit = _tune_quadratic(model, target, seed=seed + 17 * k, **kw)
        except InfeasibleTargetError as exc:
            last_exc = exc
            continue
        box = default_box(m)
        records = _certify(rf2, box, expected)
        if len(records) >= expected:
            zeros = [rec.nu for rec in records]
            return GeneratorResult(spec, 2, rf2, expected, box, zeros,
                                   {"misfit": misfit, "attempt": k})
        last_exc = InfeasibleTargetError(
            f"tuned system certified only {len(records)} of {expected} zeros"
        )
    raise last_exc


def _mixed_targets(n, m, n_radial, n_z, radial_shift=0):
    """comp 0: product over positive radii; comp l: product over z_l roots.

    The z-products are taken without a radial factor: z-degrees above n are
    only reachable through the pure-z channel (radial-family entries carrying
    z powers), whose contributions come in with no power of r.
    """
    nv = m + 1
    targets = [poly_from_roots(nv, 0, positive_nodes(n_radial), shift=(radial_shift,) + (0,) * m)]
    for ell in range(1, m + 1):
        s_roots = symmetric_nodes(n_z, offset=0.019 * ell)
        targets.append(poly_from_roots(nv, ell, s_roots))
    return PolyVec(targets)


def gen_prop12(n: int, m: int, phi: float, seed: int = 0) -> GeneratorResult:
    """Kernel spec whose f_2 attains 2n(2n-1)^m simple zeros (generic phi)."""
    if abs(phi - math.pi) < 1e-9 or phi >= TWO_PI - 1e-9 or phi <= 0:
        raise ValueError("gen_prop12 needs phi in (0, 2*pi) away from pi and 2*pi")
    expected = second_order_lower_bound(n, m, phi)
    uslots, vslots = _second_order_slots(n, m, radial_z=m >= 1)
    target = _mixed_targets(n, m, 2 * n, 2 * n - 1)
    return _second_order_generator(n, m, phi, expected, target, uslots, vslots, seed=seed)


def gen_cor13(n: int, phi: float, seed: int = 0) -> GeneratorResult:
    """m = 1 kernel spec whose f_2 attains the full (2n)^2 simple zeros.

    The radial families gain pure z_1 powers so that the z-component becomes
    a z_1-only polynomial of degree 2n, giving a grid of (2n)^2 zeros.
    """
    if abs(phi - math.pi) < 1e-9 or phi >= TWO_PI - 1e-9 or phi <= 0:
        raise ValueError("gen_cor13 needs phi in (0, 2*pi) away from pi and 2*pi")
    expected = (2 * n) ** 2
    uslots, vslots = _second_order_slots(n, 1, radial_z=True)
    targets = [
        poly_from_roots(2, 0, positive_nodes(2 * n)),
        poly_from_roots(2, 1, symmetric_nodes(2 * n, offset=0.019)),
    ]
    return _second_order_generator(n, 1, phi, expected, PolyVec(targets), uslots, vslots, seed=seed)


def gen_prop18(n: int, m: int, seed: int = 0) -> GeneratorResult:
    """Kernel spec at the half-turn angle reaching the parity-reduced count.

    The radial polynomial r*f_20 always has a root at r = 0 here (its
    constant term cancels identically under the kernel constraints), leaving
    2n-1 free radial roots for n odd and 2n-2 for n even.
    """
    phi = math.pi
    expected = second_order_lower_bound(n, m, phi)
    n_r = 2 * n - 1 if n % 2 else 2 * n - 2
    uslots, vslots = _second_order_slots(n, m, radial_z=m >= 1)
    target = _mixed_targets(n, m, n_r, 2 * n - 1, radial_shift=1)
    return _second_order_generator(n, m, phi, expected, target, uslots, vslots, seed=seed)


def gen_prop21(n: int, seed: int = 0, target_count: int | None = None) -> GeneratorResult:
    """m = 0 kernel spec in the continuous (full-turn) case.

    The radial polynomial r*f_20 here is even in r and divisible by r^2: its
    constant term and all odd-power coefficients cancel identically under the
    full-period integral kernels (verified against the direct quadrature
    oracle, including with extra tail directions d > m).  That caps the
    attainable simple-zero count at n - 1 for every n.  The stated bound for
    even n is n, which lies outside the reachable coefficient span; asking
    for it raises InfeasibleTargetError.  Pass ``target_count=n-1`` to build
    the best attainable system instead.
    """
    phi = TWO_PI
    expected = second_order_lower_bound(n, 0, phi) if target_count is None else target_count
    attainable = n - 1
    if expected > attainable:
        raise InfeasibleTargetError(
            f"continuous-case radial polynomial r*f_20 spans only the even powers "
            f"r^2..r^{2 * n}, allowing at most {attainable} positive simple zeros; "
            f"{expected} requested (the extreme coefficients cancel identically "
            f"under the kernel constraints)"
        )
    uslots, vslots = _second_order_slots(n, 0)
    rho = [v**2 for v in positive_nodes(expected)]
    target = PolyVec([poly_from_roots(1, 0, rho, square_var=True, shift=(2,))])
    return _second_order_generator(n, 0, phi, expected, target, uslots, vslots, seed=seed)


# ---------------------------------------------------------------------------
# reduced polynomial system realization
# ---------------------------------------------------------------------------


def _series_shift_r(series, k: int):
    from .avgcore import NuTrigSeries

    out = NuTrigSeries(series.m)
    for (re, zex), hs in series.terms.items():
        out.accum(re + k, zex, hs)
    return out


def gen_th4(P_polys, Q_polys, phi: float, delta: float = 1e-3, n: int | None = None) -> GeneratorResult:
    """Realize the reduced system r*P_l(nu) + Q_l(nu) = 0 through f_2.

    Scales the tail/radial perturbations by delta against an order-one
    angular perturbation split across the two zones, so that
    r*f_2l / (2*delta) = r*P_l + Q_l + O(delta).  The Q_l targets must be
    divisible by r (the angular factor always carries one power of r); a
    target outside the image raises InfeasibleTargetError with rank info.
    """
    from .avgcore import NuTrigSeries, _field_series, _g_contribution

    m = len(P_polys) - 1
    if m < 1:
        raise ValueError("need at least two components (m >= 1)")
    if len(Q_polys) != m + 1:
        raise ValueError("P and Q must have the same number of components")
    nv = m + 1
    if n is None:
        n = max(
            [1]
            + [p.degree() for p in P_polys]
            + [max(q.degree() - 1, 1) for q in Q_polys]
        )
    if abs(phi - math.pi) < 1e-9 or phi >= TWO_PI - 1e-9 or phi <= 0:
        raise ValueError("gen_th4 needs phi in (0, 2*pi) away from pi and 2*pi")
    if delta <= 0:
        raise ValueError("delta must be positive")

    # order-one angular part: A_1^+ = 1/2, A_1^- = -1/2, with zero radial part
    # (X_a = -y*H, X_b = x*H picks the angular direction only)
    h_plus, h_minus = 0.5, -0.5

    def h_tables(spec):
        for sign, h in (("+", h_plus), ("-", h_minus)):
            spec.table("a", sign).set((0, 1) + (0,) * m, -h)
            spec.table("b", sign).set((1, 0) + (0,) * m, h)

    # Q map: columns over kernel-constrained c slots (and radial delta-slots)
    uslots = _scalar_slots(n, m, ("a", "b"))
    # exclude the monomials used by the fixed angular part so the kernel
    # projection does not touch them: the angular part contributes nothing to
    # f_1, so constraints on those entries involve only the delta-scaled part.
    for ell in range(1, m + 1):
        for sign in ("+", "-"):
            for idx in _c_indices(n, m, ell):
                uslots.append(("c", sign, ell - 1, idx))
    N = _kernel_basis(n, m, phi, uslots)

    def q_map_column(uvec):
        spec = zero_spec(n, m, m, phi)
        for slot, val in zip(uslots, N @ uvec):
            if val != 0.0:
                _set_slot(spec, slot, float(val))
        cols = []
        for ell in range(m + 1):
            poly = Poly(nv)
            for sign, h in (("+", h_plus), ("-", h_minus)):
                series = _field_series(spec, 1, sign, ell + 2)
                poly = poly + _g_contribution(spec, sign, series, rshift=1).scaled(-h)
            cols.append(poly)
        return PolyVec(cols)

    qcols = [q_map_column(col) for col in np.eye(N.shape[1])]
    q_target = PolyVec([Poly(nv, dict(q.terms)) for q in Q_polys])
    monos = set()
    for pv in qcols + [q_target]:
        for ci, p in enumerate(pv):
            monos.update((ci, mo) for mo in p.terms)
    monos = sorted(monos)
    A = np.stack([_poly_vec_to_coeffs(pv, monos) for pv in qcols], axis=1) if qcols else np.zeros((len(monos), 0))
    b = _poly_vec_to_coeffs(q_target, monos)
    u, *_ = np.linalg.lstsq(A, b, rcond=None) if A.shape[1] else (np.zeros(0),)
    resid = float(np.max(np.abs(A @ u - b))) if len(b) else 0.0
    if resid > LINEAR_TOL * max(1.0, np.max(np.abs(b), initial=0.0)):
        rank = np.linalg.matrix_rank(A) if A.size else 0
        raise InfeasibleTargetError(
            f"Q target not realizable: residual {resid:.3e}, map rank {rank} of {A.shape}; "
            "note Q_l must be divisible by r"
        )

    # P map: second-order tables through the f_1-shaped linear integrals
    pslots = _scalar_slots(n, m, ("alpha", "beta"))
    for ell in range(1, m + 1):
        for sign in ("+", "-"):
            for idx in _c_indices(n, m, ell):
                pslots.append(("gamma", sign, ell - 1, idx))

    def p_map_column(slot):
        fam, sign, ell, idx = slot
        spec = zero_spec(n, m, m, phi)
        proxy = {"alpha": "a", "beta": "b", "gamma": "c"}[fam]
        _set_slot(spec, (proxy, sign, ell, idx), 1.0)
        return build_f1(spec)

    pcols = [p_map_column(slot) for slot in pslots]
    p_target = PolyVec([Poly(nv, dict(p.terms)) for p in P_polys])
    pmonos = set()
    for pv in pcols + [p_target]:
        for ci, p in enumerate(pv):
            pmonos.update((ci, mo) for mo in p.terms)
    pmonos = sorted(pmonos)
    Ap = np.stack([_poly_vec_to_coeffs(pv, pmonos) for pv in pcols], axis=1)
    bp = _poly_vec_to_coeffs(p_target, pmonos)
    v, *_ = np.linalg.lstsq(Ap, bp, rcond=None)
    residp = float(np.max(np.abs(Ap @ v - bp))) if len(bp) else 0.0
    if residp > LINEAR_TOL * max(1.0, np.max(np.abs(bp), initial=0.0)):
        rank = np.linalg.matrix_rank(Ap)
        raise InfeasibleTargetError(f"P target not realizable: residual {residp:.3e}, map rank {rank} of {Ap.shape}")

    # assemble: angular part + delta-scaled first order, delta-scaled second order
    spec = zero_spec(n, m, m, phi)
    h_tables(spec)
    for slot, val in zip(uslots, N @ u):
        if val != 0.0:
            _set_slot(spec, slot, float(delta * val))
    for slot, val in zip(pslots, v):
        if val != 0.0:
            _set_slot(spec, slot, float(delta * val))

    rf2 = build_f2(spec)
    reduced = PolyVec([
        (Poly.variable(nv, 0) * Poly(nv, dict(p.terms))) + Poly(nv, dict(q.terms))
        for p, q in zip(P_polys, Q_polys)
    ])
    normalized = PolyVec([p.scaled(0.5 / delta) for p in rf2])
    return GeneratorResult(
        spec, 2, rf2, 0, default_box(m),
        notes={"delta": delta, "reduced_system": reduced, "scale": 2.0 * delta,
               "normalized": normalized},
    )


def _c_indices(n, m, ell):
    """Multi-indices of entries depending only on z_ell (degree <= n)."""
    out = []
    for k in range(n + 1):
        idx = [0, 0] + [0] * m
        idx[1 + ell] = k
        out.append(tuple(idx))
    return out
