"""Protoresolvent evaluation and the inexact-inclusion machinery.

The protoresolvent w -> (grad f + lam A)^{-1}(w) is single-valued and globally
defined for every catalog pairing; strict monotonicity of grad f + lam A makes
monotone bracketing sound, which is what the generic 1-D strategy relies on.
Every strategy certifies its output against the residual
||grad f(y) + lam xi_hat - w|| before returning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyOperatorValue, NoStrategy, SolverError, StrongImplicitnessFailure
from .legendre import LegendreFn, QuadraticForm
from .numerics import DEFAULT_TOLERANCES, as_vector, unit_directions
from .operators import MonotoneOp


@dataclass(frozen=True)
class InclusionInstance:
    """Data (f, A, lam, x, eta) of the inexact resolvent inclusion problem."""

    f: LegendreFn
    op: MonotoneOp
    lam: float
    x: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        if self.lam <= 0.0:
            raise ValueError("lam must be positive")
        object.__setattr__(self, "x", as_vector(self.x, self.f.dim))
        object.__setattr__(self, "eta", as_vector(self.eta, self.f.dim))
        if self.op.dim != self.f.dim:
            raise ValueError(f"operator dim {self.op.dim} != function dim {self.f.dim}")


@dataclass(frozen=True)
class InclusionSolution:
    y: np.ndarray
    xi: np.ndarray
    inner_residual: float


@dataclass(frozen=True)
class VerificationReport:
    membership_residual: float
    linear_residual: float
    membership_pass: bool
    linear_pass: bool

    @property
    def passed(self) -> bool:
        return self.membership_pass and self.linear_pass


#  scalar strategy: kink candidates + monotone bisection

def _coord_residual(f, op, i, lam, w, t):
    """Residual of the scalar inclusion at t, with the best selection from A."""
    g = f.coord_grad(i, t)
    lo, hi = op.coord_box(i, t)
    a = min(max((w - g) / lam, lo), hi)
    return g + lam * a - w


def _solve_coord(f, op, i, lam, w):
    dlo, dhi = op.domain_interval(i)

    # candidate kinks and finite domain endpoints, tested exactly
    candidates = set(op.coord_kinks(i))
    for e in (dlo, dhi):
        if np.isfinite(e):
            candidates.add(e)
    best, best_res = None, np.inf
    for k in sorted(candidates):
        if k < dlo or k > dhi:
            continue
        r = abs(_coord_residual(f, op, i, lam, w, k))
        if r < best_res:
            best, best_res = k, r
    if best is not None and best_res <= 1e-12 * (1.0 + abs(w)):
        return best

    # bracket [a, b] with the solution strictly inside; the lo selection at the
    # left end and the hi selection at the right end give valid signs, and the
    # expansion terminates because grad f is super-coercive
    def g_lo(t):
        lo, _ = op.coord_box(i, t)
        return f.coord_grad(i, t) + lam * lo - w

    def g_hi(t):
        _, hi = op.coord_box(i, t)
        return f.coord_grad(i, t) + lam * hi - w

    center = 0.0
    if np.isfinite(dlo) and np.isfinite(dhi):
        center = 0.5 * (dlo + dhi)
    elif np.isfinite(dlo):
        center = dlo + 1.0
    elif np.isfinite(dhi):
        center = dhi - 1.0
    radius = 1.0
    a = max(center - radius, dlo)
    b = min(center + radius, dhi)
    for _ in range(200):
        left_ok = a == dlo or g_lo(a) <= 0.0
        right_ok = b == dhi or g_hi(b) >= 0.0
        if left_ok and right_ok:
            break
        radius *= 2.0
        a = max(center - radius, dlo)
        b = min(center + radius, dhi)
    else:
        raise SolverError("bracket expansion failed for the scalar inclusion", residual=np.inf)

    for _ in range(200):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        lo, hi = op.coord_box(i, m)
        g = f.coord_grad(i, m)
        if g + lam * hi < w:
            a = m
        elif g + lam * lo > w:
            b = m
        else:
            return m
        if b - a <= 4.0 * np.finfo(float).eps * max(1.0, abs(a), abs(b)):
            break

    # sweep the final bracket plus any kink caught inside it
    finals = {a, b, 0.5 * (a + b)}
    pad = 8.0 * (b - a) + 1e-30
    for k in candidates:
        if a - pad <= k <= b + pad and dlo <= k <= dhi:
            finals.add(k)
    return min(finals, key=lambda t: abs(_coord_residual(f, op, i, lam, w, t)))


def _solve_separable(f, op, lam, w):
    return np.array([_solve_coord(f, op, i, lam, w[i]) for i in range(f.dim)])


def _solve_newton(f, op, lam, w, tol):
    """Damped Newton for y + lam gradF(y) = w (f is the identity quadratic)."""
    grad, hess = op.smooth_gradient()
    y = np.array(w, dtype=float)
    target = max(1e-14, 0.01 * tol.inner_residual) * (1.0 + float(np.linalg.norm(w)))
    g = y + lam * grad(y) - w
    for _ in range(120):
        gn = float(np.linalg.norm(g))
        if gn <= target:
            return y
        jac = np.eye(f.dim) + lam * hess(y)
        step = np.linalg.solve(jac, -g)
        t = 1.0
        while t > 1e-12:
            cand = y + t * step
            gc = cand + lam * grad(cand) - w
            if float(np.linalg.norm(gc)) <= (1.0 - 0.25 * t) * gn:
                y, g = cand, gc
                break
            t *= 0.5
        else:
            raise SolverError("Newton line search stalled", residual=gn)
    raise SolverError("Newton did not converge", residual=float(np.linalg.norm(g)))


def _certify(f, op, lam, w, y, tol):
    y = op._clamp_to_domain(y)
    try:
        box = op.value_box(y)
    except EmptyOperatorValue as exc:
        raise SolverError(f"solution left the operator domain: {exc}", residual=np.inf)
    xi_hat = box.nearest((w - f.gradient(y)) / lam)
    residual = float(np.linalg.norm(f.gradient(y) + lam * xi_hat - w))
    bound = tol.inner_residual * (1.0 + float(np.linalg.norm(w)))
    if residual > bound:
        raise SolverError(
            f"protoresolvent certificate failed: residual {residual:.3e} > {bound:.3e}",
            residual=residual,
        )
    return y, residual


def protoresolvent(f: LegendreFn, op: MonotoneOp, lam: float, w, tolerances=None):
    """The unique y with w in grad f(y) + lam A(y), certified by residual."""
    tol = tolerances or DEFAULT_TOLERANCES
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    w = as_vector(w, f.dim)
    if op.dim != f.dim:
        raise ValueError(f"operator dim {op.dim} != function dim {f.dim}")

    affine = op.as_affine()
    if affine is not None:
        m, b = affine
        if isinstance(f, QuadraticForm):
            y = np.linalg.solve(f.metric.matrix + lam * m, w - lam * b)
            return _certify(f, op, lam, w, y, tol)[0]
        if not np.any(m):
            # constant operator: reduces to the gradient inverse
            y = f.grad_inverse(w - lam * b)
            return _certify(f, op, lam, w, y, tol)[0]

    identity_f = isinstance(f, QuadraticForm) and f.is_identity
    if identity_f:
        abs_form = op.as_subdiff_abs()
        if abs_form is not None:
            weight, shift = abs_form
            d = w - shift
            y = shift + np.sign(d) * np.maximum(np.abs(d) - lam * weight, 0.0)
            return _certify(f, op, lam, w, y, tol)[0]
        if op.smooth_gradient() is not None:
            y = _solve_newton(f, op, lam, w, tol)
            return _certify(f, op, lam, w, y, tol)[0]

    if f.separable and op.separable:
        y = _solve_separable(f, op, lam, w)
        return _certify(f, op, lam, w, y, tol)[0]

    raise NoStrategy(
        f"no solver strategy for f={f.spec_string()} with A={op.spec_string()} in dim {f.dim}"
    )


def solve_inclusion(inst: InclusionInstance, tolerances=None) -> InclusionSolution:
    """Unique (y, xi): y from the shifted protoresolvent, xi reconstructed exactly."""
    tol = tolerances or DEFAULT_TOLERANCES
    f, op, lam = inst.f, inst.op, inst.lam
    w = lam * inst.eta + f.gradient(inst.x)
    y = protoresolvent(f, op, lam, w, tolerances=tol)
    xi = inst.eta - (f.gradient(y) - f.gradient(inst.x)) / lam
    residual = float(np.linalg.norm(f.gradient(y) + lam * op.value_box(y).nearest(xi) - w))
    return InclusionSolution(y=y, xi=xi, inner_residual=residual)


def verify_solution(inst: InclusionInstance, y, xi, tolerances=None) -> VerificationReport:
    """Report-only check of the two defining conditions of a candidate pair."""
    tol = tolerances or DEFAULT_TOLERANCES
    y = as_vector(y, inst.f.dim)
    xi = as_vector(xi, inst.f.dim)
    try:
        membership = inst.op.membership_residual(y, xi)
    except EmptyOperatorValue:
        membership = np.inf
    linear = float(np.linalg.norm(
        inst.eta - xi - (inst.f.gradient(y) - inst.f.gradient(inst.x)) / inst.lam
    ))
    return VerificationReport(
        membership_residual=membership,
        linear_residual=linear,
        membership_pass=membership <= tol.membership,
        linear_pass=linear <= tol.inner_residual * (1.0 + float(np.linalg.norm(inst.eta))),
    )


def holder_certify(f, op, lam, rho, beta, samples=10_000, seed=0, scale=3.0, tolerances=None):
    """Sample the protoresolvent against the Holder bound with exponent 1/(rho-1).

    The caller asserts that grad f is uniformly monotone of power type rho with
    constant beta; the certified bound is free of lam.
    """
    rng = np.random.default_rng(seed)
    exponent = 1.0 / (rho - 1.0)
    violations, max_violation = 0, -np.inf
    for _ in range(samples):
        w1 = rng.uniform(-scale, scale, size=f.dim)
        w2 = rng.uniform(-scale, scale, size=f.dim)
        y1 = protoresolvent(f, op, lam, w1, tolerances=tolerances)
        y2 = protoresolvent(f, op, lam, w2, tolerances=tolerances)
        bound = (float(np.linalg.norm(w1 - w2)) / beta) ** exponent + 1e-8
        gap = float(np.linalg.norm(y1 - y2)) - bound
        max_violation = max(max_violation, gap)
        if gap > 0.0:
            violations += 1
    return {
        "samples": samples,
        "violations": violations,
        "max_violation": max_violation,
        "exponent": exponent,
        "passed": violations == 0,
    }


#  strongly implicit score forms

@dataclass(frozen=True)
class StronglyImplicitSpec:
    """A (Phi, Psi) pair from the closed catalog of score forms."""

    phi: callable
    psi: callable
    label: str


def ss_form(sigma, mu) -> StronglyImplicitSpec:
    """Phi = ||eta||, Psi = sigma max{||xi||, mu ||y - x||}."""
    return StronglyImplicitSpec(
        phi=lambda eta, xi, x, y: float(np.linalg.norm(eta)),
        psi=lambda eta, xi, x, y: sigma * max(float(np.linalg.norm(xi)), mu * float(np.linalg.norm(y - x))),
        label=f"ss(sigma={sigma},mu={mu})",
    )


def ips_form(nu, lam) -> StronglyImplicitSpec:
    """Phi = lam ||eta|| (the scheme-side error norm), Psi = nu ||y - x||."""
    return StronglyImplicitSpec(
        phi=lambda eta, xi, x, y: lam * float(np.linalg.norm(eta)),
        psi=lambda eta, xi, x, y: nu * float(np.linalg.norm(y - x)),
        label=f"ips(nu={nu},lam={lam})",
    )


def pls_form(sigma, c, metric) -> StronglyImplicitSpec:
    """Squared metric-norm form; the scheme-side error is c M xi + (y - x)."""

    def phi(eta, xi, x, y):
        return metric.inv_norm(c * metric.apply(xi) + (y - x)) ** 2

    def psi(eta, xi, x, y):
        return sigma ** 2 * (metric.inv_norm(c * metric.apply(xi)) ** 2 + metric.inv_norm(y - x) ** 2)

    return StronglyImplicitSpec(phi=phi, psi=psi, label=f"pls(sigma={sigma},c={c})")


DEFAULT_MAGNITUDES = (0.999, 0.75, 0.5, 0.25, 0.05)


def radius_search(f, op, lam, x, spec: StronglyImplicitSpec, probes=64, r0=None,
                  halving_depth=40, refine_depth=24, magnitudes=DEFAULT_MAGNITUDES,
                  seed=0, tolerances=None):
    """Largest sampled radius r such that every probed eta with ||eta|| < r
    solves the inclusion system with Phi < Psi strictly.

    Certified by sampling only: the halving schedule finds the first passing
    level and a bisection sharpens the pass/fail boundary.  Returns 0.0 when
    the budget is exhausted without a passing level.  In more than one
    dimension the probed directions cannot cover the sphere, so the result may
    overestimate the true uniform radius; probes are drawn over the whole
    space (no smaller open neighbourhood is modelled).
    """
    tol = tolerances or DEFAULT_TOLERANCES
    x = as_vector(x, f.dim)

    y0 = protoresolvent(f, op, lam, f.gradient(x), tolerances=tol)
    xi0 = -(f.gradient(y0) - f.gradient(x)) / lam
    zero = np.zeros(f.dim)
    theta0 = spec.psi(zero, xi0, x, y0) - spec.phi(zero, xi0, x, y0)
    if theta0 <= 0.0:
        raise StrongImplicitnessFailure(
            f"strong implicitness fails at 0: psi(0) - phi(0) = {theta0:.3e}"
        )

    directions = unit_directions(probes, f.dim, seed)

    def level_passes(r):
        for d in directions:
            for m in magnitudes:
                eta = (m * r) * d
                inst = InclusionInstance(f=f, op=op, lam=lam, x=x, eta=eta)
                sol = solve_inclusion(inst, tolerances=tol)
                if not verify_solution(inst, sol.y, sol.xi, tolerances=tol).passed:
                    return False
                if not spec.phi(eta, sol.xi, x, sol.y) < spec.psi(eta, sol.xi, x, sol.y):
                    return False
        return True

    r = r0 if r0 is not None else 1.0 + float(np.linalg.norm(x))
    level = 0
    while level < halving_depth and not level_passes(r):
        r *= 0.5
        level += 1
    if level == halving_depth:
        return 0.0
    if level == 0:
        return r

    lo, hi = r, 2.0 * r
    for _ in range(refine_depth):
        mid = 0.5 * (lo + hi)
        if level_passes(mid):
            lo = mid
        else:
            hi = mid
    return lo
