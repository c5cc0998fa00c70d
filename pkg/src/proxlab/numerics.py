"""Dense finite-dimensional primitives: vectors, SPD metrics, tolerance policy.

One flat array type serves both primal and dual vectors; in R^m the space and
its dual share a representation and only parameter names convey the role.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotSpd

MAX_DIM = 64

_HALTON_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19)


def as_vector(x, dim=None):
    """Coerce to a finite 1-D float array, validating dimension when given."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {v.shape[0]}")
    if v.shape[0] == 0 or v.shape[0] > MAX_DIM:
        raise DimensionMismatch(f"dimension {v.shape[0]} outside supported range 1..{MAX_DIM}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def check_same_dim(a, b):
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")


def pairing(a, b) -> float:
    """Duality pairing <a, b> = sum a_i b_i (Euclidean in finite dimension)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    check_same_dim(a, b)
    return float(np.dot(a, b))


class SpdMetric:
    """Symmetric positive definite matrix with a cached Cholesky factor.

    The SPD check is factorization-based: construction fails exactly when the
    (symmetrized) matrix is not positive definite.
    """

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise NotSpd(f"expected a square matrix, got shape {m.shape}")
        scale = np.linalg.norm(m)
        if scale > 0 and np.linalg.norm(m - m.T) > 1e-12 * scale:
            raise NotSpd("matrix is not symmetric to 1e-12 relative")
        m = 0.5 * (m + m.T)
        try:
            self._chol = np.linalg.cholesky(m)
        except np.linalg.LinAlgError as exc:
            raise NotSpd("Cholesky factorization failed; matrix is not SPD") from exc
        m.flags.writeable = False
        self.matrix = m
        self.dim = m.shape[0]

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim))

    @classmethod
    def diagonal(cls, diag):
        return cls(np.diag(np.asarray(diag, dtype=float)))

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.matrix, np.eye(self.dim)))

    @property
    def is_diagonal(self) -> bool:
        return bool(np.count_nonzero(self.matrix - np.diag(np.diagonal(self.matrix))) == 0)

    def apply(self, w):
        w = np.asarray(w, dtype=float)
        if w.shape[0] != self.dim:
            raise DimensionMismatch(f"metric has dim {self.dim}, vector has {w.shape[0]}")
        return self.matrix @ w

    def solve(self, b):
        """Solve M x = b through the cached factor."""
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.dim:
            raise DimensionMismatch(f"metric has dim {self.dim}, vector has {b.shape[0]}")
        z = np.linalg.solve(self._chol, b)
        return np.linalg.solve(self._chol.T, z)

    def norm(self, w) -> float:
        """||w||_M = sqrt(<Mw, w>)."""
        w = np.asarray(w, dtype=float)
        return float(np.sqrt(max(pairing(self.apply(w), w), 0.0)))

    def inv_norm(self, w) -> float:
        """||w||_{M^{-1}} = sqrt(<M^{-1}w, w>)."""
        w = np.asarray(w, dtype=float)
        if w.shape[0] != self.dim:
            raise DimensionMismatch(f"metric has dim {self.dim}, vector has {w.shape[0]}")
        return float(np.sqrt(max(pairing(self.solve(w), w), 0.0)))

    def __repr__(self):
        return f"SpdMetric(dim={self.dim})"


def metric_norm(metric: SpdMetric, w) -> float:
    return metric.norm(w)


def spd_solve(metric: SpdMetric, b):
    return metric.solve(b)


@dataclass(frozen=True)
class Tolerances:
    """Shared tolerance policy; all thresholds strictly positive."""

    inner_residual: float = 1e-10
    membership: float = 1e-8
    zero_detect: float = 1e-8

    def __post_init__(self):
        for name in ("inner_residual", "membership", "zero_detect"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"tolerance {name} must be strictly positive")


DEFAULT_TOLERANCES = Tolerances()


def halton_points(count, dim, skip=20):
    """Deterministic low-discrepancy points in [0, 1)^dim (van der Corput per axis)."""
    if dim > len(_HALTON_PRIMES):
        raise DimensionMismatch(f"halton grid supports dim <= {len(_HALTON_PRIMES)}")
    out = np.empty((count, dim))
    for j in range(dim):
        base = _HALTON_PRIMES[j]
        for i in range(count):
            n, f, r = i + skip, 1.0, 0.0
            while n > 0:
                f /= base
                r += f * (n % base)
                n //= base
            out[i, j] = r
    return out


def unit_directions(count, dim, seed):
    """Deterministic unit vectors; in 1-D collapses to the two signs."""
    if dim == 1:
        return [np.array([1.0]), np.array([-1.0])]
    rng = np.random.default_rng(seed)
    dirs = []
    while len(dirs) < count:
        d = rng.standard_normal(dim)
        n = np.linalg.norm(d)
        if n > 1e-12:
            dirs.append(d / n)
    return dirs


def random_spd_matrix(dim, eig_lo, eig_hi, rng):
    """Random SPD matrix with spectrum drawn uniformly from [eig_lo, eig_hi]."""
    if not (0.0 < eig_lo <= eig_hi):
        raise ValueError("eigenvalue range must satisfy 0 < lo <= hi")
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eigs = rng.uniform(eig_lo, eig_hi, size=dim)
    return (q * eigs) @ q.T
