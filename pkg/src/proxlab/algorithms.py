"""Iteration drivers for the five inexact proximal schemes.

Each per-step operation computes its iterate through the closed forms of the
inclusion machinery, re-checks the scheme's own acceptance condition on the
supplied perturbation (Reject), and detects the scheme's stop clause
(Terminate).  The run loop owns perturbation injection: draws that violate a
relative condition are halved up to 60 times and then replaced by zero, which
is always accepted.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (ConfigError, InfeasibleProjection, SolverError,
                     StrongImplicitnessFailure, UpdateUndefined)
from .legendre import LegendreFn, QuadraticForm, euclidean
from .numerics import DEFAULT_TOLERANCES, SpdMetric, as_vector, pairing, random_spd_matrix
from .operators import MonotoneOp, zero_residual
from .resolvent import (InclusionInstance, ips_form, pls_form, protoresolvent,
                        radius_search, solve_inclusion, ss_form)

SCHEMES = ("eckstein", "ss", "ips", "pls", "rs")


#  schedules and perturbation policies

@dataclass(frozen=True)
class Schedule:
    """Strictly positive step-parameter sequence."""

    kind: str
    value: float = 1.0
    c: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        if self.kind == "constant":
            if self.value <= 0.0:
                raise ConfigError("constant schedule needs value > 0")
        elif self.kind == "geometric":
            if self.c <= 0.0 or self.q <= 0.0:
                raise ConfigError("geometric schedule needs c > 0 and q > 0")
        else:
            raise ConfigError(f"unknown schedule kind {self.kind!r}")

    @classmethod
    def constant(cls, value):
        return cls(kind="constant", value=float(value))

    @classmethod
    def geometric(cls, c, q):
        return cls(kind="geometric", c=float(c), q=float(q))

    def at(self, n: int) -> float:
        if self.kind == "constant":
            return self.value
        return self.c * self.q ** n


@dataclass(frozen=True)
class MetricSchedule:
    """Per-iteration SPD metric source for the variable-metric scheme."""

    kind: str = "identity"
    eig_lo: float = 0.5
    eig_hi: float = 2.0
    seed: int = 0

    def at(self, n: int, dim: int) -> SpdMetric:
        if self.kind == "identity":
            return SpdMetric.identity(dim)
        if self.kind == "random_spd":
            rng = np.random.default_rng([self.seed, 7, n])
            return SpdMetric(random_spd_matrix(dim, self.eig_lo, self.eig_hi, rng))
        raise ConfigError(f"unknown metric schedule kind {self.kind!r}")


@dataclass(frozen=True)
class PerturbationPolicy:
    """How error vectors are drawn: magnitude law plus a seeded direction stream."""

    kind: str
    c: float = 0.0
    q: float = 0.5
    fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("zero", "summable_geometric", "constant_norm", "radius_fraction"):
            raise ConfigError(f"unknown policy kind {self.kind!r}")
        if self.kind == "summable_geometric" and not (0.0 < self.q < 1.0):
            raise ConfigError("summable_geometric needs q in (0, 1)")
        if self.kind == "radius_fraction" and not (0.0 < self.fraction < 1.0):
            raise ConfigError("radius_fraction needs fraction in (0, 1)")
        if self.c < 0.0:
            raise ConfigError("perturbation magnitude c must be nonnegative")

    @classmethod
    def zero(cls):
        return cls(kind="zero")

    @classmethod
    def summable_geometric(cls, c, q, seed=0):
        return cls(kind="summable_geometric", c=float(c), q=float(q), seed=seed)

    @classmethod
    def constant_norm(cls, c, seed=0):
        return cls(kind="constant_norm", c=float(c), seed=seed)

    @classmethod
    def radius_fraction(cls, fraction, seed=0):
        return cls(kind="radius_fraction", fraction=float(fraction), seed=seed)

    @property
    def needs_radius(self) -> bool:
        return self.kind == "radius_fraction"

    def magnitude(self, n: int, radius=None) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "summable_geometric":
            return self.c * self.q ** n
        if self.kind == "constant_norm":
            return self.c
        return self.fraction * (radius or 0.0)

    def direction(self, n: int, dim: int, stream: int = 0):
        rng = np.random.default_rng([self.seed, stream, n])
        if dim == 1:
            return np.array([1.0 if rng.random() < 0.5 else -1.0])
        d = rng.standard_normal(dim)
        nrm = np.linalg.norm(d)
        while nrm <= 1e-12:
            d = rng.standard_normal(dim)
            nrm = np.linalg.norm(d)
        return d / nrm

    def draw(self, n: int, dim: int, stream: int = 0, radius=None):
        mag = self.magnitude(n, radius=radius)
        if mag == 0.0:
            return np.zeros(dim)
        return mag * self.direction(n, dim, stream=stream)


#  trace containers

@dataclass
class TraceRecord:
    n: int
    x: np.ndarray
    zero_residual: float
    y: np.ndarray | None = None
    xi: np.ndarray | None = None
    eta: np.ndarray | None = None
    step_param: float = 0.0
    note: str = ""
    wall_clock: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def eta_norm(self) -> float:
        return 0.0 if self.eta is None else float(np.linalg.norm(self.eta))


@dataclass
class IterateTrace:
    scheme: str
    records: list
    termination_reason: str = "max_iters"
    converged: bool = False
    partial_sums: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.records) - 1

    @property
    def final_x(self):
        return self.records[-1].x

    @property
    def final_residual(self) -> float:
        return self.records[-1].zero_residual


@dataclass(frozen=True)
class StopRule:
    max_iters: int = 500
    zero_detect: float = 1e-8

    def __post_init__(self):
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if self.zero_detect <= 0.0:
            raise ConfigError("zero_detect must be positive")


#  per-step operations

@dataclass
class StepResult:
    status: str  # accepted | reject | terminate
    y: np.ndarray | None = None
    xi: np.ndarray | None = None
    x_next: np.ndarray | None = None
    certified_zero: bool = False


def eckstein_step(f: LegendreFn, op: MonotoneOp, lam: float, x, eta_next, tolerances=None):
    """x_{n+1} = (grad f + lam A)^{-1}(eta_{n+1} + grad f(x_n)); any eta accepted."""
    x = as_vector(x, f.dim)
    eta_next = as_vector(eta_next, f.dim)
    return protoresolvent(f, op, lam, eta_next + f.gradient(x), tolerances=tolerances)


def ss_step(op: MonotoneOp, mu: float, sigma: float, x, eta, tolerances=None) -> StepResult:
    """Hybrid projection step: prox at x - eta/mu, then project onto the cut."""
    tol = tolerances or DEFAULT_TOLERANCES
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    x = as_vector(x, op.dim)
    eta = as_vector(eta, op.dim)
    f = euclidean(op.dim)
    y = protoresolvent(f, op, 1.0 / mu, x - eta / mu, tolerances=tol)
    xi = -eta - mu * (y - x)

    if np.linalg.norm(eta) > sigma * max(float(np.linalg.norm(xi)), mu * float(np.linalg.norm(y - x))):
        return StepResult(status="reject", y=y, xi=xi)

    gap = float(np.linalg.norm(y - x))
    xi_norm = float(np.linalg.norm(xi))
    if gap <= tol.zero_detect:
        return StepResult(status="terminate", y=y, xi=xi, certified_zero=sigma < 1.0)
    if xi_norm <= tol.zero_detect:
        if sigma >= 1.0:
            raise UpdateUndefined("update undefined: xi vanished away from the iterate with sigma >= 1")
        return StepResult(status="terminate", y=y, xi=xi, certified_zero=True)

    x_next = x - (pairing(xi, x - y) / xi_norm ** 2) * xi
    return StepResult(status="accepted", y=y, xi=xi, x_next=x_next)


def ips_nu(sigma: float, rho: float, lam_hat: float) -> float:
    """Relative-error coefficient from (sigma, rho, lambda_hat)."""
    if lam_hat <= 0.0:
        raise ValueError("lam_hat must be positive")
    if sigma < 0.0 or rho < 0.0:
        raise ValueError("sigma and rho must be nonnegative")
    ratio = 2.0 * rho / lam_hat
    radicand = sigma + (1.0 - sigma) * ratio ** 2
    if radicand < 0.0:
        raise ValueError(f"negative radicand {radicand} in nu formula")
    return (np.sqrt(radicand) - ratio) / (1.0 + ratio)


def ips_step(op: MonotoneOp, lam: float, nu: float, x, eta, tolerances=None) -> StepResult:
    """Subspace-constrained relative-error step; caller projects eta onto Z."""
    tol = tolerances or DEFAULT_TOLERANCES
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    x = as_vector(x, op.dim)
    eta = as_vector(eta, op.dim)
    f = euclidean(op.dim)
    y = protoresolvent(f, op, lam, x + eta, tolerances=tol)
    if np.linalg.norm(eta) > nu * float(np.linalg.norm(y - x)):
        return StepResult(status="reject", y=y)
    xi = (eta - (y - x)) / lam
    return StepResult(status="accepted", y=y, xi=xi, x_next=y - eta)


def pls_step(op: MonotoneOp, c: float, metric: SpdMetric, sigma: float, tau: float,
             x, eta, tolerances=None) -> StepResult:
    """Variable-metric step with the squared metric-norm error criterion."""
    tol = tolerances or DEFAULT_TOLERANCES
    if c <= 0.0:
        raise ValueError("c must be positive")
    x = as_vector(x, op.dim)
    eta = as_vector(eta, op.dim)
    inv_metric = SpdMetric(np.linalg.inv(metric.matrix))
    f = QuadraticForm(inv_metric)
    y = protoresolvent(f, op, c, metric.solve(x + eta), tolerances=tol)
    xi = metric.solve(eta - (y - x)) / c

    # c M xi + (y - x) telescopes back to eta, so the error side is exact
    lhs = metric.inv_norm(eta) ** 2
    rhs = sigma ** 2 * (metric.inv_norm(c * metric.apply(xi)) ** 2 + metric.inv_norm(y - x) ** 2)
    if lhs > rhs:
        return StepResult(status="reject", y=y, xi=xi)

    if float(np.linalg.norm(y - x)) <= tol.zero_detect:
        return StepResult(status="terminate", y=y, xi=xi, certified_zero=sigma < 1.0)

    denom = pairing(xi, metric.apply(xi))
    if denom <= 0.0:
        raise UpdateUndefined("update undefined: M xi vanished away from the iterate")
    a = pairing(xi, x - y) / denom
    x_next = x - tau * a * metric.apply(xi)
    return StepResult(status="accepted", y=y, xi=xi, x_next=x_next)


#  Bregman projection onto an intersection of halfspaces

def _euclidean_project(halfspaces, x):
    """Exact active-set projection for f = ||.||^2 / 2 (unit-normal halfspaces)."""
    m = len(halfspaces)
    a_mat = np.array([a for a, _ in halfspaces], dtype=float)
    b_vec = np.array([b for _, b in halfspaces], dtype=float)
    slack = 1e-12 * (1.0 + float(np.linalg.norm(x)))
    if np.all(a_mat @ x <= b_vec + slack):
        return np.array(x, dtype=float)

    best, best_dist = None, np.inf
    for mask in range(1, 1 << m):
        idx = [i for i in range(m) if mask >> i & 1]
        a_s = a_mat[idx]
        gram = a_s @ a_s.T
        if np.linalg.cond(gram) > 1e12:
            continue
        nu = np.linalg.solve(gram, a_s @ x - b_vec[idx])
        if np.any(nu < -1e-10):
            continue
        z = x - a_s.T @ nu
        if np.all(a_mat @ z <= b_vec + slack):
            d = float(np.linalg.norm(z - x))
            if d < best_dist:
                best, best_dist = z, d
    if best is None:
        raise InfeasibleProjection("no KKT point found; halfspace system looks infeasible")
    return best


def _dual_project(f, halfspaces, x, kkt_tol=1e-8, max_cycles=5000):
    """Cyclic exact maximization over the low-dimensional dual for general f.

    Each multiplier is updated by scalar bisection on its own complementarity
    condition (the constraint value is strictly decreasing in the multiplier),
    so no step size is needed; cycles repeat until the KKT residual passes.
    """
    a_mat = np.array([a for a, _ in halfspaces], dtype=float)
    b_vec = np.array([b for _, b in halfspaces], dtype=float)
    m = len(halfspaces)
    gx = f.gradient(x)
    mu = np.zeros(m)

    def primal(mu_vec):
        return f.grad_inverse(gx - a_mat.T @ mu_vec)

    for _ in range(max_cycles):
        for i in range(m):
            def slack(t):
                trial = mu.copy()
                trial[i] = t
                return float(a_mat[i] @ primal(trial) - b_vec[i])

            if slack(0.0) <= 0.0:
                mu[i] = 0.0
                continue
            hi = max(1.0, 2.0 * mu[i])
            while slack(hi) > 0.0:
                hi *= 2.0
                if hi > 1e12:
                    raise InfeasibleProjection("dual multiplier diverged; system looks infeasible")
            lo = 0.0
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                if slack(mid) > 0.0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 1e-14 * (1.0 + hi):
                    break
            mu[i] = 0.5 * (lo + hi)
        z = primal(mu)
        g = a_mat @ z - b_vec
        kkt = max(float(np.max(g, initial=0.0)), float(np.max(np.abs(mu * g), initial=0.0)))
        if kkt <= kkt_tol:
            return z
    raise InfeasibleProjection(f"dual coordinate ascent stalled at KKT residual {kkt:.2e}")


def bregman_project(f: LegendreFn, halfspaces, x, tolerances=None):
    """argmin of D_f(., x) over the intersection of <a_i, z> <= b_i.

    Pass halfspaces as (a, b) pairs; an empty list returns x itself.  Rows are
    rescaled to unit normals so feasibility slacks mean signed distances.
    """
    x = as_vector(x, f.dim)
    normalized = []
    for a, b in halfspaces:
        a = as_vector(a, f.dim)
        nrm = float(np.linalg.norm(a))
        if nrm == 0.0:
            raise ValueError("halfspace normal must be nonzero")
        normalized.append((a / nrm, float(b) / nrm))
    if not normalized:
        return np.array(x)
    if isinstance(f, QuadraticForm) and f.is_identity:
        return _euclidean_project(normalized, x)
    return _dual_project(f, normalized, x)


#  common-zero scheme (one inclusion per operator, then project)

@dataclass
class RsIterate:
    ws: list
    ys: list
    xis: list
    etas: list
    lams: list
    c_halfspaces: list   # per-operator (a, b) or None for the whole space
    q_halfspace: object  # (a, b) or None
    x_next: np.ndarray
    zero_margins: list = field(default_factory=list)

    def halfspaces(self):
        out = [h for h in self.c_halfspaces if h is not None]
        if self.q_halfspace is not None:
            out.append(self.q_halfspace)
        return out


def rs_step(f: LegendreFn, ops, lams, etas, x0, x, common_zero=None, tolerances=None) -> RsIterate:
    """One round of the common-zero scheme.

    Each cut set reduces to the halfspace
    <grad f(w) - grad f(y), z> <= f(y) - f(w) - <grad f(y), y> + <grad f(w), w>
    (the whole space when grad f(w) = grad f(y)), and the new iterate is the
    Bregman projection of the anchor x0 onto the intersection of the cuts.
    """
    tol = tolerances or DEFAULT_TOLERANCES
    x0 = as_vector(x0, f.dim)
    x = as_vector(x, f.dim)
    ws, ys, xis, cuts = [], [], [], []
    for op, lam, eta in zip(ops, lams, etas):
        eta = as_vector(eta, f.dim)
        w = f.grad_inverse(lam * eta + f.gradient(x))
        sol = solve_inclusion(InclusionInstance(f=f, op=op, lam=lam, x=x, eta=eta), tolerances=tol)
        a = f.gradient(w) - f.gradient(sol.y)
        if np.linalg.norm(a) <= 1e-14 * (1.0 + np.linalg.norm(f.gradient(w))):
            cut = None
        else:
            b = (f.value(sol.y) - f.value(w)
                 - pairing(f.gradient(sol.y), sol.y) + pairing(f.gradient(w), w))
            cut = (a, b)
        ws.append(w)
        ys.append(sol.y)
        xis.append(sol.xi)
        cuts.append(cut)

    aq = f.gradient(x0) - f.gradient(x)
    if np.linalg.norm(aq) <= 1e-14 * (1.0 + np.linalg.norm(f.gradient(x0))):
        q_cut = None
    else:
        q_cut = (aq, pairing(aq, x))

    it = RsIterate(ws=ws, ys=ys, xis=xis, etas=[np.array(e) for e in etas],
                   lams=list(lams), c_halfspaces=cuts, q_halfspace=q_cut, x_next=x)

    if common_zero is not None:
        z = as_vector(common_zero, f.dim)
        for a, b in it.halfspaces():
            margin = (pairing(a, z) - b) / float(np.linalg.norm(a))
            it.zero_margins.append(margin)
            if margin > 1e-9:
                raise InfeasibleProjection(
                    f"certified common zero violates a recorded cut by {margin:.3e}"
                )

    it.x_next = bregman_project(f, it.halfspaces(), x0, tolerances=tol)
    return it


#  run loop

@dataclass
class RunSpec:
    """Problem description consumed by run(); fields are scheme-specific."""

    scheme: str
    x0: np.ndarray
    op: MonotoneOp | None = None
    ops: list | None = None
    f: LegendreFn | None = None
    lam: Schedule = field(default_factory=lambda: Schedule.constant(1.0))
    mu: Schedule = field(default_factory=lambda: Schedule.constant(1.0))
    c: Schedule = field(default_factory=lambda: Schedule.constant(1.0))
    sigma: float = 0.5
    nu: float = 0.0
    tau: float = 1.0
    metric: MetricSchedule = field(default_factory=MetricSchedule)
    z_basis: np.ndarray | None = None
    common_zero: np.ndarray | None = None
    radius_probes: int = 16
    radius_seed: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        self.x0 = as_vector(self.x0)
        if self.scheme == "rs":
            if not self.ops:
                raise ConfigError("rs needs a list of operators")
        elif self.op is None:
            raise ConfigError(f"{self.scheme} needs an operator")
        if self.f is None:
            self.f = euclidean(self.dim)

    @property
    def dim(self) -> int:
        return self.x0.shape[0]

    @property
    def all_ops(self):
        return self.ops if self.scheme == "rs" else [self.op]


def _stop_residual(ops, x, tol):
    f = euclidean(x.shape[0])
    return max(zero_residual(op, f, 1.0, x, tolerances=tol) for op in ops)


def _subspace_projector(z_basis):
    if z_basis is None:
        return None
    basis = np.atleast_2d(np.asarray(z_basis, dtype=float)).T  # columns span Z
    q, _ = np.linalg.qr(basis)
    return q @ q.T


def _shrink_until_accepted(step_fn, eta, max_shrink=60):
    attempts = 0
    current = np.array(eta)
    while attempts < max_shrink:
        result = step_fn(current)
        if result.status != "reject":
            return result, current, attempts
        current = 0.5 * current
        attempts += 1
    result = step_fn(np.zeros_like(current))
    return result, np.zeros_like(current), attempts


def run(spec: RunSpec, policy: PerturbationPolicy, stop: StopRule, tolerances=None) -> IterateTrace:
    """Drive a scheme from x0 until the zero residual passes or budgets expire."""
    base_tol = tolerances or DEFAULT_TOLERANCES
    tol = replace(base_tol, zero_detect=stop.zero_detect)
    if policy.needs_radius and spec.scheme in ("eckstein", "rs"):
        raise ConfigError(
            f"radius_fraction is undefined for {spec.scheme}: the scheme accepts "
            "arbitrary perturbations, so no acceptance radius exists")
    dim = spec.dim
    x = np.array(spec.x0)

    trace = IterateTrace(scheme=spec.scheme, records=[], meta={"dim": dim})
    zr = _stop_residual(spec.all_ops, x, tol)
    trace.records.append(TraceRecord(n=0, x=np.array(x), zero_residual=zr,
                                     note="init", wall_clock=time.perf_counter()))
    if zr <= stop.zero_detect:
        trace.termination_reason = "zero detected"
        trace.converged = True
        return trace

    f_eucl = euclidean(dim)
    running_sum = 0.0

    try:
        trace.termination_reason = _iterate(spec, policy, stop, tol, trace, x, f_eucl, running_sum)
    except (SolverError, UpdateUndefined) as exc:
        # per-step failures abort the run but keep the partial trace
        trace.termination_reason = "solver failure"
        trace.meta["error"] = str(exc)
    trace.converged = trace.termination_reason == "zero detected"
    return trace


def _iterate(spec, policy, stop, tol, trace, x, f_eucl, running_sum):
    dim = spec.dim
    for n in range(stop.max_iters):
        row = n + 1
        note = ""

        if spec.scheme == "eckstein":
            lam = spec.lam.at(n)
            eta = policy.draw(row, dim)
            x_new = eckstein_step(spec.f, spec.op, lam, x, eta, tolerances=tol)
            xi = eta / lam - (spec.f.gradient(x_new) - spec.f.gradient(x)) / lam
            running_sum += pairing(eta, x_new)
            trace.partial_sums.append(running_sum)
            rec = TraceRecord(n=row, x=x_new, zero_residual=0.0, y=np.array(x_new),
                              xi=xi, eta=eta, step_param=lam)

        elif spec.scheme == "ss":
            mu = spec.mu.at(n)
            radius = None
            if policy.needs_radius:
                try:
                    radius = radius_search(f_eucl, spec.op, 1.0 / mu, x,
                                           ss_form(spec.sigma, mu), probes=spec.radius_probes,
                                           seed=spec.radius_seed, tolerances=tol)
                except StrongImplicitnessFailure:
                    radius = 0.0
                    note = "radius unavailable;"
            eta0 = policy.draw(row, dim, radius=radius)
            result, eta, shrinks = _shrink_until_accepted(
                lambda e: ss_step(spec.op, mu, spec.sigma, x, e, tolerances=tol), eta0)
            if shrinks:
                note += f"shrunk:{shrinks}"
            if result.status == "terminate":
                trace.records[-1].note += ";terminate(certified)" if result.certified_zero else ";terminate"
                return "zero detected"
            rec = TraceRecord(n=row, x=result.x_next, zero_residual=0.0, y=result.y,
                              xi=result.xi, eta=eta, step_param=mu, note=note)

        elif spec.scheme == "ips":
            lam = spec.lam.at(n)
            projector = _subspace_projector(spec.z_basis)
            radius = None
            if policy.needs_radius:
                try:
                    r_gen = radius_search(f_eucl, spec.op, lam, x, ips_form(spec.nu, lam),
                                          probes=spec.radius_probes, seed=spec.radius_seed,
                                          tolerances=tol)
                    radius = lam * r_gen
                except StrongImplicitnessFailure:
                    radius = 0.0
                    note = "radius unavailable;"
            eta0 = policy.draw(row, dim, radius=radius)
            if projector is not None:
                eta0 = projector @ eta0
            result, eta, shrinks = _shrink_until_accepted(
                lambda e: ips_step(spec.op, lam, spec.nu, x, e, tolerances=tol), eta0)
            if shrinks:
                note += f"shrunk:{shrinks}"
            rec = TraceRecord(n=row, x=result.x_next, zero_residual=0.0, y=result.y,
                              xi=result.xi, eta=eta, step_param=lam, note=note)

        elif spec.scheme == "pls":
            c = spec.c.at(n)
            metric = spec.metric.at(n, dim)
            radius = None
            if policy.needs_radius:
                try:
                    f_n = QuadraticForm(SpdMetric(np.linalg.inv(metric.matrix)))
                    r_gen = radius_search(f_n, spec.op, c, x,
                                          pls_form(spec.sigma, c, metric),
                                          probes=spec.radius_probes, seed=spec.radius_seed,
                                          tolerances=tol)
                    # the scheme-side error is cM times the generic one
                    radius = c * float(np.min(np.linalg.eigvalsh(metric.matrix))) * r_gen
                except StrongImplicitnessFailure:
                    radius = 0.0
                    note = "radius unavailable;"
            eta0 = policy.draw(row, dim, radius=radius)
            result, eta, shrinks = _shrink_until_accepted(
                lambda e: pls_step(spec.op, c, metric, spec.sigma, spec.tau, x, e, tolerances=tol),
                eta0)
            if shrinks:
                note = f"shrunk:{shrinks}"
            if result.status == "terminate":
                trace.records[-1].note += ";terminate(certified)" if result.certified_zero else ";terminate"
                return "zero detected"
            rec = TraceRecord(n=row, x=result.x_next, zero_residual=0.0, y=result.y,
                              xi=result.xi, eta=eta, step_param=c, note=note,
                              extra={"metric": metric})

        elif spec.scheme == "rs":
            lam = spec.lam.at(n)
            etas = [policy.draw(row, dim, stream=i) for i in range(len(spec.ops))]
            it = rs_step(spec.f, spec.ops, [lam] * len(spec.ops), etas, spec.x0, x,
                         common_zero=spec.common_zero, tolerances=tol)
            eta_max = max(etas, key=lambda e: float(np.linalg.norm(e)))
            rec = TraceRecord(n=row, x=it.x_next, zero_residual=0.0, y=it.ys[0],
                              xi=it.xis[0], eta=eta_max, step_param=lam,
                              extra={"rs": it, "x_prev": np.array(x)})

        else:  # pragma: no cover - guarded by RunSpec
            raise ConfigError(f"unknown scheme {spec.scheme!r}")

        x = rec.x
        rec.zero_residual = _stop_residual(spec.all_ops, x, tol)
        rec.wall_clock = time.perf_counter()
        trace.records.append(rec)
        if rec.zero_residual <= stop.zero_detect:
            return "zero detected"

    return "max_iters"
