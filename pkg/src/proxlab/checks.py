"""Executable invariant suites behind the `check` subcommand.

Suites are grouped as legendre (conjugacy and numerics), resolvent (inclusion
round trips, operator oracles, continuity), and algorithms (scheme-condition
audits).  Each check reports a pass flag plus counters; nothing here proves a
property, it samples it at a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algorithms as alg
from .legendre import (CoshSum, PowerEuclidean, PowerP, QuadraticForm,
                       bregman_distance, euclidean)
from .numerics import DEFAULT_TOLERANCES, SpdMetric, pairing, random_spd_matrix
from .operators import (Affine, GradientOfConvex, NormalConeBox, OperatorSum, Scaled,
                        SubdiffAbs, enlargement_residual, identity_op, zero_residual)
from .reference import brute_force_protoresolvent
from .resolvent import (InclusionInstance, holder_certify, solve_inclusion,
                        verify_solution)

SUITES = ("legendre", "resolvent", "algorithms")


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


#  sample catalogs

def legendre_catalog():
    return [
        euclidean(2),
        QuadraticForm(SpdMetric.diagonal([2.0, 3.0])),
        QuadraticForm(SpdMetric([[2.0, 0.5], [0.5, 1.5]])),
        CoshSum(3),
        PowerEuclidean(4.0, 2),
        PowerEuclidean(3.0, 1),
        PowerP(4.0, 4.0, 2),
        PowerP(3.0, 2.5, 1),
    ]


def operator_catalog(dim):
    ops = [
        SubdiffAbs(1.0, np.zeros(dim)),
        SubdiffAbs(0.5, np.linspace(-1.0, 1.0, dim)),
        Affine(np.diag(np.linspace(0.5, 2.0, dim)), np.zeros(dim)),
        identity_op(dim),
        NormalConeBox(-np.ones(dim), np.ones(dim)),
        GradientOfConvex("logcosh", np.zeros(dim), dim),
        GradientOfConvex("quartic", np.full(dim, 0.5), dim),
        Scaled(0.5, SubdiffAbs(1.0, np.zeros(dim))),
        OperatorSum([SubdiffAbs(1.0, np.zeros(dim)),
                     Affine(np.diag(np.full(dim, 0.5)), np.zeros(dim))]),
    ]
    if dim > 1:
        ops.append(GradientOfConvex("norm4", np.zeros(dim), dim))
    return ops


def _separable_ops(rng, dim):
    """Separable operator pool used when f is separable but not Euclidean."""
    choices = [
        lambda: SubdiffAbs(rng.uniform(0.2, 2.0), rng.uniform(-1.0, 1.0, size=dim)),
        lambda: Affine(np.diag(rng.uniform(0.1, 2.0, size=dim)), rng.uniform(-1.0, 1.0, size=dim)),
        lambda: NormalConeBox(rng.uniform(-3.0, -0.5, size=dim), rng.uniform(0.5, 3.0, size=dim)),
        lambda: GradientOfConvex("logcosh", rng.uniform(-1.0, 1.0, size=dim), dim),
        lambda: GradientOfConvex("quartic", rng.uniform(-1.0, 1.0, size=dim), dim),
        lambda: Scaled(rng.uniform(0.3, 2.0), SubdiffAbs(1.0, rng.uniform(-1.0, 1.0, size=dim))),
        lambda: OperatorSum([
            SubdiffAbs(rng.uniform(0.2, 1.0), rng.uniform(-1.0, 1.0, size=dim)),
            Affine(np.diag(rng.uniform(0.1, 1.5, size=dim)), rng.uniform(-0.5, 0.5, size=dim)),
        ]),
    ]
    return choices[rng.integers(len(choices))]()


def random_instance(rng) -> InclusionInstance:
    """Random solvable (f, A, lam, x, eta) over the catalog, dims <= 5."""
    dim = int(rng.integers(1, 6))
    lam = float(rng.uniform(0.25, 2.5))
    kind = rng.integers(6)
    if kind == 0:
        f = euclidean(dim)
        roll = rng.integers(3)
        if roll == 0:
            op = _separable_ops(rng, dim)
        elif roll == 1:
            op = Affine(random_spd_matrix(dim, 0.1, 2.0, rng), rng.uniform(-1.0, 1.0, size=dim))
        else:
            op = GradientOfConvex("norm4", rng.uniform(-1.0, 1.0, size=dim), dim)
    elif kind == 1:
        f = QuadraticForm(SpdMetric.diagonal(rng.uniform(0.5, 3.0, size=dim)))
        op = _separable_ops(rng, dim)
    elif kind == 2:
        f = QuadraticForm(SpdMetric(random_spd_matrix(dim, 0.5, 3.0, rng)))
        op = Affine(random_spd_matrix(dim, 0.1, 2.0, rng), rng.uniform(-1.0, 1.0, size=dim))
    elif kind == 3:
        f = CoshSum(dim)
        op = _separable_ops(rng, dim)
    elif kind == 4:
        # constant operator in a non-separable geometry: gradient-inverse route
        f = PowerEuclidean(float(rng.uniform(2.0, 4.0)), dim)
        op = Affine(np.zeros((dim, dim)), rng.uniform(-1.0, 1.0, size=dim))
    else:
        dim = 1
        f = PowerEuclidean(float(rng.uniform(2.0, 5.0)), 1) if rng.random() < 0.5 \
            else PowerP(float(rng.uniform(1.5, 4.0)), float(rng.uniform(2.0, 4.0)), 1)
        op = _separable_ops(rng, 1)
    x = rng.uniform(-3.0, 3.0, size=dim)
    eta = rng.uniform(-2.0, 2.0, size=dim)
    return InclusionInstance(f=f, op=op, lam=lam, x=x, eta=eta)


#  legendre suite (includes the shared numerics invariants)

def _check_numerics(rng):
    ok_pair, ok_norm, ok_solve = True, True, True
    for _ in range(1000):
        dim = int(rng.integers(1, 9))
        a = rng.uniform(-5.0, 5.0, size=dim)
        b = rng.uniform(-5.0, 5.0, size=dim)
        if abs(pairing(a, b) - pairing(b, a)) > 1e-12 * (1.0 + abs(pairing(a, b))):
            ok_pair = False
        m = SpdMetric(random_spd_matrix(dim, 0.2, 3.0, rng))
        w = rng.uniform(-5.0, 5.0, size=dim)
        if abs(m.norm(w) ** 2 - pairing(m.apply(w), w)) > 1e-12 * (1.0 + abs(pairing(m.apply(w), w))):
            ok_norm = False
        x = m.solve(b)
        if np.linalg.norm(m.apply(x) - b) > 1e-10 * (1.0 + np.linalg.norm(b)):
            ok_solve = False
    return [
        CheckResult("numerics.pairing_symmetry", ok_pair, "1000 random pairs"),
        CheckResult("numerics.metric_norm_identity", ok_norm, "1000 random metrics"),
        CheckResult("numerics.spd_solve_roundtrip", ok_solve, "1000 random SPD solves"),
    ]


def legendre_suite(seed=1):
    rng = np.random.default_rng(seed)
    results = _check_numerics(rng)

    fenchel_bad = roundtrip_bad = 0
    for f in legendre_catalog():
        for _ in range(1000):
            x = rng.uniform(-3.0, 3.0, size=f.dim)
            g = f.gradient(x)
            fy = abs(f.value(x) + f.conjugate_value(g) - pairing(g, x))
            if fy > 1e-8 * (1.0 + abs(f.value(x))):
                fenchel_bad += 1
            back = f.grad_inverse(g)
            if np.linalg.norm(back - x) > 1e-8 * (1.0 + np.linalg.norm(x)):
                roundtrip_bad += 1
    results.append(CheckResult("legendre.fenchel_young", fenchel_bad == 0,
                               f"{fenchel_bad} failures over catalog x 1000"))
    results.append(CheckResult("legendre.grad_inverse_roundtrip", roundtrip_bad == 0,
                               f"{roundtrip_bad} failures over catalog x 1000"))

    cosh1 = CoshSum(1)
    grid_bad = 0
    for u in np.arange(-5.0, 5.0 + 1e-9, 0.1):
        uu = np.array([u])
        if abs(cosh1.conjugate_value(uu) - cosh1.closed_form_conjugate(uu)) > 1e-10:
            grid_bad += 1
    results.append(CheckResult("legendre.conjugate_vs_closed_form", grid_bad == 0,
                               f"{grid_bad} grid failures on [-5, 5]"))

    breg_bad = 0
    for f in legendre_catalog():
        for _ in range(300):
            x = rng.uniform(-3.0, 3.0, size=f.dim)
            y = rng.uniform(-3.0, 3.0, size=f.dim)
            d = bregman_distance(f, y, x)
            if d < -1e-12:
                breg_bad += 1
            if d <= 1e-12 and np.linalg.norm(y - x) > 1e-6:
                breg_bad += 1
    results.append(CheckResult("legendre.bregman_nonnegativity", breg_bad == 0,
                               f"{breg_bad} failures over catalog x 300"))

    fd_bad = 0
    for f in legendre_catalog():
        for _ in range(200):
            x = rng.uniform(-3.0, 3.0, size=f.dim)
            if np.linalg.norm(x) < 0.3:
                continue  # nonsmooth-looking origins are excluded from the stencil
            h = 1e-5 * (1.0 + np.linalg.norm(x))
            g = f.gradient(x)
            fd = np.empty(f.dim)
            for i in range(f.dim):
                e = np.zeros(f.dim)
                e[i] = h
                fd[i] = (f.value(x + e) - f.value(x - e)) / (2.0 * h)
            if np.linalg.norm(fd - g) > 1e-6 * (1.0 + np.linalg.norm(g)):
                fd_bad += 1
    results.append(CheckResult("legendre.gradient_vs_finite_differences", fd_bad == 0,
                               f"{fd_bad} failures over catalog x 200"))
    return results


#  resolvent suite (includes the operator-oracle invariants)

def _check_operators(rng):
    results = []
    mono_bad = 0
    for dim in (1, 3):
        for op in operator_catalog(dim):
            pts = op.sample_graph(150, rng)
            ys = np.array([p[0] for p in pts])
            xis = np.array([p[1] for p in pts])
            s = np.einsum("ij,ij->i", xis, ys)
            cross = xis @ ys.T
            gram = s[:, None] + s[None, :] - cross - cross.T
            if gram.min() < -1e-10:
                mono_bad += 1
    results.append(CheckResult("operators.monotonicity_audit", mono_bad == 0,
                               f"{mono_bad} operators failed the pairwise audit"))

    scale_bad = 0
    for _ in range(300):
        dim = int(rng.integers(1, 4))
        base = _separable_ops(rng, dim)
        lam = float(rng.uniform(0.2, 3.0))
        scaled = Scaled(lam, base)
        y = base._clamp_to_domain(rng.uniform(-2.0, 2.0, size=dim))
        xi = rng.uniform(-2.0, 2.0, size=dim)
        lhs = scaled.membership_residual(y, xi)
        rhs = lam * base.membership_residual(y, xi / lam)
        if abs(lhs - rhs) > 1e-12 * (1.0 + abs(rhs)):
            scale_bad += 1
    results.append(CheckResult("operators.scaling_law", scale_bad == 0,
                               f"{scale_bad} failures over 300 samples"))

    enl_bad = 0
    for _ in range(40):
        dim = int(rng.integers(1, 3))
        op = _separable_ops(rng, dim)
        y = op._clamp_to_domain(rng.uniform(-1.5, 1.5, size=dim))
        xi = rng.uniform(-2.0, 2.0, size=dim)
        vals = [enlargement_residual(op, e, y, xi, witness_budget=64)
                for e in (0.0, 0.25, 0.5, 1.0)]
        finite = [v for v in vals if np.isfinite(v)]
        if any(b > a + 1e-12 for a, b in zip(finite, finite[1:])):
            enl_bad += 1
    results.append(CheckResult("operators.enlargement_monotone_in_eps", enl_bad == 0,
                               f"{enl_bad} failures over 40 samples"))

    f1 = euclidean(1)
    zero_ok = (
        zero_residual(SubdiffAbs(1.0, np.array([1.0])), f1, 1.0, np.array([1.0])) <= 1e-8
        and zero_residual(SubdiffAbs(1.0, np.array([1.0])), f1, 1.0, np.array([2.5])) > 1e-8
        and zero_residual(identity_op(2), euclidean(2), 1.0, np.zeros(2)) <= 1e-8
        and zero_residual(NormalConeBox(-1.0, 1.0, 1), f1, 1.0, np.array([0.3])) <= 1e-8
        and zero_residual(NormalConeBox(-1.0, 1.0, 1), f1, 1.0, np.array([1.8])) > 1e-8
    )
    results.append(CheckResult("operators.zero_residual_zero_sets", zero_ok,
                               "analytic zero sets of three catalog instances"))
    return results


def resolvent_suite(seed=1, instances=10_000):
    rng = np.random.default_rng(seed)
    results = _check_operators(rng)

    round_bad = strategy_bad = exact_bad = 0
    checked_1d = 0
    for k in range(instances):
        inst = random_instance(rng)
        sol = solve_inclusion(inst)
        rep = verify_solution(inst, sol.y, sol.xi)
        if not rep.passed:
            round_bad += 1
        if inst.f.dim == 1 and k % 5 == 0:
            w = inst.lam * inst.eta + inst.f.gradient(inst.x)
            ref = brute_force_protoresolvent(inst.f, inst.op, inst.lam, w)
            checked_1d += 1
            if np.linalg.norm(ref - sol.y) > 1e-6:
                strategy_bad += 1
        if k % 10 == 0:
            exact = solve_inclusion(InclusionInstance(
                f=inst.f, op=inst.op, lam=inst.lam, x=inst.x, eta=np.zeros(inst.f.dim)))
            from .resolvent import protoresolvent
            direct = protoresolvent(inst.f, inst.op, inst.lam, inst.f.gradient(inst.x))
            if np.linalg.norm(exact.y - direct) > 1e-10:
                exact_bad += 1
    results.append(CheckResult("resolvent.prop42_roundtrip", round_bad == 0,
                               f"{round_bad} failures over {instances} instances"))
    results.append(CheckResult("resolvent.two_strategy_agreement_1d", strategy_bad == 0,
                               f"{strategy_bad} disagreements over {checked_1d} 1-D instances"))
    results.append(CheckResult("resolvent.exact_case_degeneration", exact_bad == 0,
                               f"{exact_bad} failures"))

    cont_bad = 0
    for _ in range(20):
        inst = random_instance(rng)
        deltas = (1e-2, 1e-3, 1e-4)
        moves = []
        base = solve_inclusion(inst)
        for d in deltas:
            worst = 0.0
            for _ in range(5):
                dx = rng.standard_normal(inst.f.dim)
                dx *= d / np.linalg.norm(dx)
                de = rng.standard_normal(inst.f.dim)
                de *= d / np.linalg.norm(de)
                pert = solve_inclusion(InclusionInstance(
                    f=inst.f, op=inst.op, lam=inst.lam, x=inst.x + dx, eta=inst.eta + de))
                worst = max(worst, float(np.linalg.norm(pert.y - base.y)
                                         + np.linalg.norm(pert.xi - base.xi)))
            moves.append(worst)
        if not (moves[0] >= moves[1] - 1e-12 and moves[1] >= moves[2] - 1e-12):
            cont_bad += 1
    results.append(CheckResult("resolvent.continuous_dependence", cont_bad == 0,
                               f"{cont_bad} non-monotone moduli over 20 instances"))

    h1 = holder_certify(euclidean(2), SubdiffAbs(1.0, np.zeros(2)), 0.7, 2.0, 1.0,
                        samples=2000, seed=seed)
    h2 = holder_certify(PowerEuclidean(4.0, 1), SubdiffAbs(1.0, np.zeros(1)), 1.0, 4.0, 0.25,
                        samples=2000, seed=seed)
    results.append(CheckResult("resolvent.holder_nonexpansive", h1["passed"],
                               f"max violation {h1['max_violation']:.2e}"))
    results.append(CheckResult("resolvent.holder_power_type", h2["passed"],
                               f"max violation {h2['max_violation']:.2e}"))
    return results


#  algorithms suite

def _audit_ss_trace(trace, op, sigma):
    """Re-check every accepted record against the scheme's three conditions."""
    bad = 0
    for prev, rec in zip(trace.records, trace.records[1:]):
        mu = rec.step_param
        if op.membership_residual(rec.y, rec.xi) > 1e-8:
            bad += 1
        if np.linalg.norm(rec.xi + mu * (rec.y - prev.x) + rec.eta) > 1e-10 * (1 + np.linalg.norm(rec.xi)):
            bad += 1
        if np.linalg.norm(rec.eta) > sigma * max(np.linalg.norm(rec.xi),
                                                 mu * np.linalg.norm(rec.y - prev.x)) + 1e-12:
            bad += 1
    return bad


def algorithms_suite(seed=1):
    rng = np.random.default_rng(seed)
    results = []
    tol = DEFAULT_TOLERANCES

    shift = np.array([1.0])
    op_abs = SubdiffAbs(1.0, shift)

    # exactness degeneration: zero-perturbation hybrid step reproduces the
    # classical resolvent used by the basic scheme
    exact_bad = 0
    for _ in range(50):
        lam = float(rng.uniform(0.3, 2.0))
        x = rng.uniform(-4.0, 4.0, size=1)
        from .resolvent import protoresolvent
        y_classic = protoresolvent(euclidean(1), op_abs, lam, x)
        res = alg.ss_step(op_abs, 1.0 / lam, 0.5, x, np.zeros(1), tolerances=tol)
        y_eck = alg.eckstein_step(euclidean(1), op_abs, lam, x, np.zeros(1), tolerances=tol)
        if np.linalg.norm(res.y - y_classic) > 1e-10 or np.linalg.norm(y_eck - y_classic) > 1e-10:
            exact_bad += 1
    results.append(CheckResult("algorithms.exactness_degeneration", exact_bad == 0,
                               f"{exact_bad} mismatches over 50 draws"))

    spec = alg.RunSpec(scheme="ss", x0=np.array([2.0]), op=op_abs,
                       mu=alg.Schedule.constant(1.0), sigma=0.5)
    trace = alg.run(spec, alg.PerturbationPolicy.radius_fraction(0.5, seed=seed),
                    alg.StopRule(max_iters=200, zero_detect=1e-8))
    audit_bad = _audit_ss_trace(trace, op_abs, 0.5)
    results.append(CheckResult("algorithms.ss_condition_audit", audit_bad == 0,
                               f"{audit_bad} violations in {trace.iterations} iterations"))

    geom_bad = fejer_bad = 0
    z_star = shift
    for prev, rec in zip(trace.records, trace.records[1:]):
        if abs(pairing(rec.xi, rec.x - rec.y)) > 1e-10 * (1.0 + np.linalg.norm(rec.xi)):
            geom_bad += 1
        if np.linalg.norm(rec.x - z_star) > np.linalg.norm(prev.x - z_star) + 1e-10:
            fejer_bad += 1
    results.append(CheckResult("algorithms.projection_geometry", geom_bad == 0,
                               f"{geom_bad} hyperplane violations"))
    results.append(CheckResult("algorithms.fejer_monotonicity", fejer_bad == 0,
                               f"{fejer_bad} expansions toward the known zero"))

    # termination soundness at a true zero
    term = alg.ss_step(op_abs, 1.0, 0.5, shift, np.zeros(1), tolerances=tol)
    sound = term.status == "terminate" and term.certified_zero and \
        zero_residual(op_abs, euclidean(1), 1.0, shift) <= tol.zero_detect
    results.append(CheckResult("algorithms.termination_soundness", sound,
                               "hybrid stop clause certifies the zero"))

    # eckstein audit via the inclusion verifier
    op_vec = Affine(np.eye(2), -np.array([1.0, 2.0]))
    spec_e = alg.RunSpec(scheme="eckstein", x0=np.zeros(2), op=op_vec)
    trace_e = alg.run(spec_e, alg.PerturbationPolicy.summable_geometric(0.1, 0.5, seed=seed),
                      alg.StopRule(max_iters=100, zero_detect=1e-10))
    eck_bad = 0
    for prev, rec in zip(trace_e.records, trace_e.records[1:]):
        inst = InclusionInstance(f=euclidean(2), op=op_vec, lam=rec.step_param,
                                 x=prev.x, eta=rec.eta / rec.step_param)
        if not verify_solution(inst, rec.x, rec.xi).passed:
            eck_bad += 1
    results.append(CheckResult("algorithms.eckstein_condition_audit", eck_bad == 0,
                               f"{eck_bad} violations in {trace_e.iterations} iterations"))

    # IPS audit
    spec_i = alg.RunSpec(scheme="ips", x0=np.array([2.0]), op=op_abs, nu=0.3,
                         lam=alg.Schedule.constant(1.0))
    trace_i = alg.run(spec_i, alg.PerturbationPolicy.constant_norm(0.05, seed=seed),
                      alg.StopRule(max_iters=200, zero_detect=1e-8))
    ips_bad = 0
    for prev, rec in zip(trace_i.records, trace_i.records[1:]):
        lam = rec.step_param
        if op_abs.membership_residual(rec.y, (rec.eta - (rec.y - prev.x)) / lam) > 1e-8:
            ips_bad += 1
        if np.linalg.norm(rec.eta) > spec_i.nu * np.linalg.norm(rec.y - prev.x) + 1e-12:
            ips_bad += 1
        if np.linalg.norm(rec.x - (rec.y - rec.eta)) > 1e-12:
            ips_bad += 1
    results.append(CheckResult("algorithms.ips_condition_audit", ips_bad == 0,
                               f"{ips_bad} violations in {trace_i.iterations} iterations"))

    # PLS audit with random metrics
    op3 = Affine(np.eye(3), -np.array([0.5, -0.25, 1.0]))
    spec_p = alg.RunSpec(scheme="pls", x0=np.zeros(3), op=op3, sigma=0.3, tau=1.0,
                         metric=alg.MetricSchedule(kind="random_spd", seed=seed))
    trace_p = alg.run(spec_p, alg.PerturbationPolicy.summable_geometric(0.05, 0.7, seed=seed),
                      alg.StopRule(max_iters=300, zero_detect=1e-8))
    pls_bad = 0
    for prev, rec in zip(trace_p.records, trace_p.records[1:]):
        metric = rec.extra["metric"]
        c = rec.step_param
        if op3.membership_residual(rec.y, rec.xi) > 1e-8:
            pls_bad += 1
        lhs = metric.inv_norm(rec.eta) ** 2
        rhs = spec_p.sigma ** 2 * (metric.inv_norm(c * metric.apply(rec.xi)) ** 2
                                   + metric.inv_norm(rec.y - prev.x) ** 2)
        if lhs > rhs + 1e-12:
            pls_bad += 1
        if np.linalg.norm(rec.eta - (c * metric.apply(rec.xi) + rec.y - prev.x)) > 1e-9:
            pls_bad += 1
    results.append(CheckResult("algorithms.pls_condition_audit", pls_bad == 0,
                               f"{pls_bad} violations in {trace_p.iterations} iterations"))

    # RS: every recorded cut contains the certified common zero
    ops = [SubdiffAbs(1.0, np.zeros(1)), identity_op(1)]
    spec_r = alg.RunSpec(scheme="rs", x0=np.array([1.0]), ops=ops,
                         common_zero=np.zeros(1))
    trace_r = alg.run(spec_r, alg.PerturbationPolicy.summable_geometric(0.05, 0.5, seed=seed),
                      alg.StopRule(max_iters=300, zero_detect=1e-8))
    rs_bad = 0
    for rec in trace_r.records[1:]:
        margins = rec.extra["rs"].zero_margins
        if any(m > 1e-10 for m in margins):
            rs_bad += 1
    results.append(CheckResult("algorithms.rs_zero_containment", rs_bad == 0,
                               f"{rs_bad} violated cuts in {trace_r.iterations} iterations"))

    return results


def run_suite(name, seed=1):
    if name == "legendre":
        return legendre_suite(seed)
    if name == "resolvent":
        return resolvent_suite(seed)
    if name == "algorithms":
        return algorithms_suite(seed)
    if name == "all":
        return legendre_suite(seed) + resolvent_suite(seed) + algorithms_suite(seed)
    raise ValueError(f"unknown suite {name!r}")
