"""Grid-refined brute-force solver, independent of the strategy table.

Every catalog operator is the subdifferential of a convex potential G, so the
protoresolvent point for w is the unique minimizer of
h(y) = f(y) + lam G(y) - <w, y>.  Nested grid refinement of h gives a second,
derivative-free route used to cross-check the production solvers.
"""

from __future__ import annotations

import itertools

import numpy as np

from .numerics import pairing
from .operators import (Affine, GradientOfConvex, MonotoneOp, NormalConeBox,
                        OperatorSum, Scaled, SubdiffAbs)


def operator_potential(op: MonotoneOp, y) -> float:
    """Convex G with A = dG; +inf outside the domain (normal cone case)."""
    y = np.asarray(y, dtype=float)
    if isinstance(op, SubdiffAbs):
        return op.weight * float(np.sum(np.abs(y - op.shift)))
    if isinstance(op, Affine):
        return 0.5 * pairing(op.matrix @ y, y) + pairing(op.offset, y)
    if isinstance(op, NormalConeBox):
        if np.any(y < op.lower) or np.any(y > op.upper):
            return np.inf
        return 0.0
    if isinstance(op, GradientOfConvex):
        d = y - op.shift
        if op.profile == "logcosh":
            return op.weight * float(np.sum(np.log(np.cosh(d))))
        if op.profile == "quartic":
            return op.weight * float(np.sum(d ** 4)) / 4.0
        return op.weight * float(np.dot(d, d)) ** 2 / 4.0
    if isinstance(op, Scaled):
        return op.lam * operator_potential(op.inner, y)
    if isinstance(op, OperatorSum):
        return sum(operator_potential(t, y) for t in op.terms)
    raise TypeError(f"no potential known for operator kind {op.kind!r}")


def brute_force_protoresolvent(f, op, lam, w, span=None, points=81, rounds=8):
    """Minimize h over nested grids; accuracy ~ span * (4/points)^rounds."""
    w = np.asarray(w, dtype=float)
    dim = f.dim
    if span is None:
        span = 4.0 + 4.0 * float(np.linalg.norm(w))
    center = np.zeros(dim)
    half = span
    per_axis = points if dim == 1 else max(9, int(round(points ** (1.0 / dim))))

    best = None
    for _ in range(rounds):
        axes = [np.linspace(center[i] - half, center[i] + half, per_axis) for i in range(dim)]
        best_val, best_pt = np.inf, None
        for combo in itertools.product(*axes):
            y = np.asarray(combo)
            val = f.value(y) + lam * operator_potential(op, y) - pairing(w, y)
            if val < best_val:
                best_val, best_pt = val, y
        best = best_pt
        half *= 4.0 / (per_axis - 1)
        center = best
    return best
