"""Catalog of maximally monotone set-valued operators.

Values are never materialized as sets: every catalog kind evaluates to an
axis-aligned box (a product of closed intervals, possibly unbounded), which
makes membership distances, min/max selections, kinks, and Minkowski sums of
values exact.  All interaction goes through residual oracles.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, EmptyOperatorValue
from .numerics import as_vector, halton_points, pairing


class ValueBox:
    """Axis-aligned box lo <= v <= hi (entries may be +-inf)."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)

    def nearest(self, xi):
        return np.clip(xi, self.lo, self.hi)

    def distance(self, xi) -> float:
        return float(np.linalg.norm(xi - self.nearest(xi)))

    def support_argmin(self, direction):
        """Minimizer of <v, direction> over the box; +-inf entries allowed."""
        return np.where(direction > 0.0, self.lo, np.where(direction < 0.0, self.hi, self.nearest(np.zeros_like(direction))))


class MonotoneOp:
    """Base class. Subclasses fill in value boxes and the coordinate view."""

    kind = "abstract"
    dim: int

    #  value oracle

    def value_box(self, y) -> ValueBox:
        y = as_vector(y, self.dim)
        lows = np.empty(self.dim)
        highs = np.empty(self.dim)
        for i in range(self.dim):
            lows[i], highs[i] = self.coord_box(i, y[i])
        return ValueBox(lows, highs)

    def coord_box(self, i: int, t: float):
        raise NotImplementedError

    def membership_residual(self, y, xi) -> float:
        """Exact distance from xi to A(y); raises if A(y) is empty."""
        y = as_vector(y, self.dim)
        xi = as_vector(xi, self.dim)
        return self.value_box(y).distance(xi)

    #  structure used by the inclusion solvers

    @property
    def separable(self) -> bool:
        return True

    def coord_kinks(self, i: int):
        """Points where the i-th coordinate map is set-valued or jumps."""
        return ()

    def domain_interval(self, i: int):
        """Closed interval of admissible i-th coordinates (whole line by default)."""
        return (-np.inf, np.inf)

    def as_affine(self):
        """(M, b) when the operator is y -> M y + b, else None."""
        return None

    def as_subdiff_abs(self):
        """(weight, shift) when the operator is d(w ||. - s||_1), else None."""
        return None

    def smooth_gradient(self):
        """(grad, hess) callables when the operator is a smooth convex gradient."""
        return None

    #  graph sampling

    def sample_graph(self, count, rng, halfwidth=3.0, center=None):
        """Random graph points (y, xi) for monotonicity audits."""
        center = np.zeros(self.dim) if center is None else as_vector(center, self.dim)
        pts = []
        while len(pts) < count:
            y = center + rng.uniform(-halfwidth, halfwidth, size=self.dim)
            y = self._clamp_to_domain(y)
            box = self.value_box(y)
            xi = np.empty(self.dim)
            for i in range(self.dim):
                lo, hi = box.lo[i], box.hi[i]
                if np.isfinite(lo) and np.isfinite(hi):
                    xi[i] = rng.uniform(lo, hi) if hi > lo else lo
                elif np.isfinite(lo):
                    xi[i] = lo + rng.exponential(1.0)
                elif np.isfinite(hi):
                    xi[i] = hi - rng.exponential(1.0)
                else:
                    xi[i] = rng.standard_normal()
            pts.append((y, xi))
        return pts

    def _clamp_to_domain(self, y):
        out = np.array(y, dtype=float)
        for i in range(self.dim):
            lo, hi = self.domain_interval(i)
            out[i] = min(max(out[i], lo), hi)
        return out

    def spec_string(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec_string()} dim={self.dim}>"


class SubdiffAbs(MonotoneOp):
    """Subdifferential of w ||. - s||_1: per coordinate {-w}/[-w, w]/{w}."""

    kind = "subdiff_abs"

    def __init__(self, weight, shift, dim=None):
        if weight < 0.0:
            raise ValueError("weight must be nonnegative")
        self.weight = float(weight)
        if np.isscalar(shift) and dim is not None:
            shift = np.full(dim, float(shift))
        self.shift = as_vector(shift, dim)
        self.dim = self.shift.shape[0]

    def coord_box(self, i, t):
        s, w = self.shift[i], self.weight
        if t < s:
            return (-w, -w)
        if t > s:
            return (w, w)
        return (-w, w)

    def coord_kinks(self, i):
        return (self.shift[i],)

    def as_subdiff_abs(self):
        return (self.weight, self.shift)

    def spec_string(self):
        return f"abs:w={self.weight!r},shift=" + ",".join(repr(float(s)) for s in self.shift)


class Affine(MonotoneOp):
    """y -> M y + b for a symmetric positive semidefinite M (monotone)."""

    kind = "affine"

    def __init__(self, matrix, offset):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
        scale = max(np.linalg.norm(m), 1.0)
        if np.linalg.norm(m - m.T) > 1e-10 * scale:
            raise ValueError("affine operator matrix must be symmetric")
        m = 0.5 * (m + m.T)
        if np.min(np.linalg.eigvalsh(m)) < -1e-10 * scale:
            raise ValueError("affine operator matrix must be positive semidefinite")
        self.matrix = m
        self.offset = as_vector(offset, m.shape[0])
        self.dim = m.shape[0]

    def value_box(self, y):
        v = self.matrix @ as_vector(y, self.dim) + self.offset
        return ValueBox(v, v)

    def coord_box(self, i, t):
        if not self.separable:
            raise DimensionMismatch("non-diagonal affine operator has no coordinate view")
        v = self.matrix[i, i] * t + self.offset[i]
        return (v, v)

    @property
    def separable(self):
        return bool(np.count_nonzero(self.matrix - np.diag(np.diagonal(self.matrix))) == 0)

    def as_affine(self):
        return (self.matrix, self.offset)

    def spec_string(self):
        if not self.separable:
            return f"affine:dense[{self.dim}x{self.dim}]"
        d = np.diagonal(self.matrix)
        return ("affine:diag=" + ",".join(repr(float(v)) for v in d)
                + ",b=" + ",".join(repr(float(v)) for v in self.offset))


class NormalConeBox(MonotoneOp):
    """Normal cone operator of the box [lower, upper]; empty value outside."""

    kind = "normal_cone_box"

    def __init__(self, lower, upper, dim=None):
        if np.isscalar(lower) and dim is not None:
            lower = np.full(dim, float(lower))
        if np.isscalar(upper) and dim is not None:
            upper = np.full(dim, float(upper))
        self.lower = as_vector(lower, dim)
        self.upper = as_vector(upper, self.lower.shape[0])
        if np.any(self.lower > self.upper):
            raise ValueError("box requires lower <= upper")
        self.dim = self.lower.shape[0]

    def coord_box(self, i, t):
        lo, hi = self.lower[i], self.upper[i]
        if t < lo or t > hi:
            raise EmptyOperatorValue(f"empty operator value: coordinate {i} = {t} outside [{lo}, {hi}]")
        at_lo, at_hi = t == lo, t == hi
        if at_lo and at_hi:
            return (-np.inf, np.inf)
        if at_lo:
            return (-np.inf, 0.0)
        if at_hi:
            return (0.0, np.inf)
        return (0.0, 0.0)

    def coord_kinks(self, i):
        return (self.lower[i], self.upper[i])

    def domain_interval(self, i):
        return (self.lower[i], self.upper[i])

    def spec_string(self):
        return ("box:" + ",".join(repr(float(v)) for v in self.lower)
                + ";" + ",".join(repr(float(v)) for v in self.upper))


class GradientOfConvex(MonotoneOp):
    """Gradient of a smooth convex function from a small closed catalog.

    profiles: 'logcosh'  F = w sum log cosh(t - s)   (separable, bounded slope)
              'quartic'  F = w sum (t - s)^4 / 4      (separable)
              'norm4'    F = w ||x - s||^4 / 4        (genuinely coupled)
    """

    kind = "gradient_of_convex"
    PROFILES = ("logcosh", "quartic", "norm4")

    def __init__(self, profile, shift, dim=None, weight=1.0):
        if profile not in self.PROFILES:
            raise ValueError(f"unknown convex profile {profile!r}")
        if weight <= 0.0:
            raise ValueError("weight must be positive")
        self.profile = profile
        self.weight = float(weight)
        if np.isscalar(shift) and dim is not None:
            shift = np.full(dim, float(shift))
        self.shift = as_vector(shift, dim)
        self.dim = self.shift.shape[0]

    def gradient(self, y):
        d = as_vector(y, self.dim) - self.shift
        if self.profile == "logcosh":
            return self.weight * np.tanh(d)
        if self.profile == "quartic":
            return self.weight * d ** 3
        return self.weight * float(np.dot(d, d)) * d

    def hessian(self, y):
        d = as_vector(y, self.dim) - self.shift
        if self.profile == "logcosh":
            return self.weight * np.diag(1.0 / np.cosh(d) ** 2)
        if self.profile == "quartic":
            return self.weight * np.diag(3.0 * d ** 2)
        return self.weight * (float(np.dot(d, d)) * np.eye(self.dim) + 2.0 * np.outer(d, d))

    def value_box(self, y):
        v = self.gradient(y)
        return ValueBox(v, v)

    def coord_box(self, i, t):
        if self.profile == "norm4" and self.dim > 1:
            raise DimensionMismatch("norm4 profile has no coordinate view beyond 1-D")
        d = t - self.shift[i]
        v = self.weight * (np.tanh(d) if self.profile == "logcosh" else d ** 3)
        return (float(v), float(v))

    @property
    def separable(self):
        return self.profile != "norm4" or self.dim == 1

    def smooth_gradient(self):
        return (self.gradient, self.hessian)

    def spec_string(self):
        return (f"grad:{self.profile}:w={self.weight!r},shift="
                + ",".join(repr(float(s)) for s in self.shift))


class Scaled(MonotoneOp):
    """(lam A)(y) = lam A(y) for lam > 0."""

    kind = "scaled"

    def __init__(self, lam, inner):
        if lam <= 0.0:
            raise ValueError("scaling factor must be positive")
        self.lam = float(lam)
        self.inner = inner
        self.dim = inner.dim

    def coord_box(self, i, t):
        lo, hi = self.inner.coord_box(i, t)
        return (self.lam * lo, self.lam * hi)

    def value_box(self, y):
        box = self.inner.value_box(y)
        return ValueBox(self.lam * box.lo, self.lam * box.hi)

    @property
    def separable(self):
        return self.inner.separable

    def coord_kinks(self, i):
        return self.inner.coord_kinks(i)

    def domain_interval(self, i):
        return self.inner.domain_interval(i)

    def as_affine(self):
        base = self.inner.as_affine()
        if base is None:
            return None
        return (self.lam * base[0], self.lam * base[1])

    def as_subdiff_abs(self):
        base = self.inner.as_subdiff_abs()
        if base is None:
            return None
        return (self.lam * base[0], base[1])

    def smooth_gradient(self):
        base = self.inner.smooth_gradient()
        if base is None:
            return None
        grad, hess = base
        return (lambda y: self.lam * grad(y), lambda y: self.lam * hess(y))

    def spec_string(self):
        return f"scale:{self.lam!r}:{self.inner.spec_string()}"


class OperatorSum(MonotoneOp):
    """Pointwise Minkowski sum of compatible catalog operators."""

    kind = "shifted_sum"

    def __init__(self, terms):
        terms = list(terms)
        if not terms:
            raise ValueError("sum needs at least one term")
        self.dim = terms[0].dim
        for t in terms:
            if t.dim != self.dim:
                raise DimensionMismatch("sum terms live in different dimensions")
        self.terms = terms

    def coord_box(self, i, t):
        lo = hi = 0.0
        for term in self.terms:
            tlo, thi = term.coord_box(i, t)
            lo, hi = lo + tlo, hi + thi
        return (lo, hi)

    def value_box(self, y):
        lo = np.zeros(self.dim)
        hi = np.zeros(self.dim)
        for term in self.terms:
            box = term.value_box(y)
            lo, hi = lo + box.lo, hi + box.hi
        return ValueBox(lo, hi)

    @property
    def separable(self):
        return all(t.separable for t in self.terms)

    def coord_kinks(self, i):
        ks = []
        for t in self.terms:
            ks.extend(t.coord_kinks(i))
        return tuple(sorted(set(ks)))

    def domain_interval(self, i):
        lo, hi = -np.inf, np.inf
        for t in self.terms:
            tlo, thi = t.domain_interval(i)
            lo, hi = max(lo, tlo), min(hi, thi)
        return (lo, hi)

    def as_affine(self):
        m = np.zeros((self.dim, self.dim))
        b = np.zeros(self.dim)
        for t in self.terms:
            base = t.as_affine()
            if base is None:
                return None
            m, b = m + base[0], b + base[1]
        return (m, b)

    def spec_string(self):
        return "sum:" + "|".join(t.spec_string() for t in self.terms)


def identity_op(dim) -> Affine:
    return Affine(np.eye(dim), np.zeros(dim))


def membership_residual(op: MonotoneOp, y, xi) -> float:
    return op.membership_residual(y, xi)


def enlargement_residual(op: MonotoneOp, eps, y, xi, witness_budget=256, halfwidth=1.0):
    """Largest sampled violation of xi being in the eps-enlargement of A at y.

    Witnesses (x', y') are drawn from a deterministic low-discrepancy grid over
    the box of the given halfwidth around y, each paired with the graph
    selection that minimizes <y' - xi, x' - y>.  A return of 0 certifies only
    that no sampled witness violates the enlargement inequality.
    """
    if eps < 0.0:
        raise ValueError("enlargement parameter must be nonnegative")
    y = as_vector(y, op.dim)
    xi = as_vector(xi, op.dim)
    grid = halton_points(witness_budget, op.dim)
    worst = 0.0
    for row in grid:
        xp = op._clamp_to_domain(y + halfwidth * (2.0 * row - 1.0))
        box = op.value_box(xp)
        direction = xp - y
        sel = box.support_argmin(direction)
        if not np.all(np.isfinite(sel)):
            # an unbounded ray makes the inner product arbitrarily negative
            return np.inf
        violation = -eps - pairing(sel - xi, direction)
        worst = max(worst, violation)
    return worst


def zero_residual(op: MonotoneOp, f, lam, x, tolerances=None) -> float:
    """||x - Res^f_{lam A}(x)||; zero (to tolerance) exactly at zeros of A."""
    from .resolvent import protoresolvent

    if lam <= 0.0:
        raise ValueError("lam must be positive")
    x = as_vector(x, op.dim)
    y = protoresolvent(f, op, lam, f.gradient(x), tolerances=tolerances)
    return float(np.linalg.norm(x - y))


CATALOG_SPECS = (
    "abs:w=1,shift=0        subdifferential of w ||. - shift||_1",
    "affine:diag=1,b=0      y -> diag(...) y + b (PSD)",
    "box:-1,1               normal cone of the box [lower, upper]",
    "grad:logcosh:shift=0   gradient of w sum log cosh(. - shift)",
    "grad:quartic:shift=0   gradient of w sum (. - shift)^4 / 4",
    "grad:norm4:shift=0     gradient of w ||. - shift||^4 / 4",
    "scale:0.5:abs:w=1      positive rescaling of an inner operator",
    "sum:spec|spec          Minkowski sum of compatible operators",
)


def parse_operator(spec: str, dim: int) -> MonotoneOp:
    """Build a catalog operator from a CLI string (see CATALOG_SPECS)."""
    from .legendre import _parse_kv_list

    spec = spec.strip()
    head, _, rest = spec.partition(":")
    head = head.lower()
    if head == "abs":
        kv = _parse_kv_list(rest) if rest else {}
        weight = kv.get("w", [1.0])[0]
        shift = kv.get("shift", [0.0])
        shift = np.full(dim, shift[0]) if len(shift) == 1 else np.asarray(shift)
        return SubdiffAbs(weight, shift, dim)
    if head == "affine":
        kv = _parse_kv_list(rest) if rest else {}
        diag = kv.get("diag", [1.0])
        diag = diag * dim if len(diag) == 1 else diag
        b = kv.get("b", [0.0])
        b = np.full(dim, b[0]) if len(b) == 1 else np.asarray(b)
        if len(diag) != dim:
            raise DimensionMismatch(f"diag has {len(diag)} entries for dim {dim}")
        return Affine(np.diag(diag), b)
    if head == "box":
        if ";" not in rest:
            parts = [float(v) for v in rest.split(",")]
            if len(parts) != 2:
                raise ValueError(f"box spec needs 'lo,hi' or 'lo,..;hi,..': {spec!r}")
            return NormalConeBox(parts[0], parts[1], dim)
        lower_s, _, upper_s = rest.partition(";")
        lower = [float(v) for v in lower_s.split(",")]
        upper = [float(v) for v in upper_s.split(",")]
        lower = lower * dim if len(lower) == 1 else lower
        upper = upper * dim if len(upper) == 1 else upper
        if len(lower) != dim or len(upper) != dim:
            raise DimensionMismatch(f"box bounds do not match dim {dim}: {spec!r}")
        return NormalConeBox(np.asarray(lower), np.asarray(upper))
    if head == "grad":
        profile, _, tail = rest.partition(":")
        kv = _parse_kv_list(tail) if tail else {}
        weight = kv.get("w", [1.0])[0]
        shift = kv.get("shift", [0.0])
        shift = np.full(dim, shift[0]) if len(shift) == 1 else np.asarray(shift)
        return GradientOfConvex(profile.strip().lower(), shift, dim, weight)
    if head == "scale":
        factor_s, _, inner = rest.partition(":")
        return Scaled(float(factor_s), parse_operator(inner, dim))
    if head == "sum":
        return OperatorSum([parse_operator(part, dim) for part in rest.split("|")])
    raise ValueError(f"unknown operator spec {spec!r}")
