"""Euclidean projections onto the convex sets used by the benchmarks.

Each piece (Ball, Box, Halfspace, AffineEq, Simplex, NonnegOrthant) has a
closed-form projection.  Intersections are handled with Dykstra's
alternating projections, which converge to the true Euclidean projection
rather than an arbitrary feasible point.  The polyhedron {x >= 0, Ax = b}
additionally has a semismooth Newton solver on the dual.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.linalg import cho_factor, cho_solve
from scipy.sparse.linalg import splu

MEMBERSHIP_TOL = 1e-9


class NonConvergence(RuntimeError):
    """Alternating projections failed to settle within the sweep budget."""

    def __init__(self, sweeps: int, residual: float):
        super().__init__(f"projection did not converge after {sweeps} sweeps (residual {residual:.3e})")
        self.sweeps = sweeps
        self.residual = residual


class MissingLmo(NotImplementedError):
    pass


class ConvexSet:
    """Base for feasible sets: membership, projection, optional LMO."""

    dim: int
    diameter: Optional[float] = None

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        return bool(self.violation(x) <= tol)

    def violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def lmo(self, c) -> np.ndarray:
        raise MissingLmo(f"{type(self).__name__} has no linear minimisation oracle")

    @property
    def has_lmo(self) -> bool:
        return type(self).lmo is not ConvexSet.lmo

    def bounding_box(self):
        return np.full(self.dim, -np.inf), np.full(self.dim, np.inf)

    def sample(self, rng, n: int, max_tries: int = 1000) -> np.ndarray:
        """n feasible points, uniform over the set by rejection from its bounding box."""
        lo, hi = self.bounding_box()
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise NotImplementedError(f"{type(self).__name__} is unbounded; supply a sampler")
        out = []
        for _ in range(max_tries):
            cand = rng.uniform(lo, hi, size=(max(n, 16), self.dim))
            out.extend(c for c in cand if self.contains(c))
            if len(out) >= n:
                return np.array(out[:n])
        raise RuntimeError(f"rejection sampling accepted only {len(out)} of {n} points")


def _check_dim(piece, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (piece.dim,):
        raise ValueError(f"dimension mismatch: {type(piece).__name__} has dim {piece.dim}, got shape {x.shape}")
    return x


# ---------------------------------------------------------------------------
# Pieces
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        self.dim = self.center.size
        self.diameter = 2.0 * self.radius

    def violation(self, x) -> float:
        return max(0.0, float(np.linalg.norm(np.asarray(x, dtype=float) - self.center)) - self.radius)

    def project(self, x):
        x = _check_dim(self, x)
        r = x - self.center
        n = np.sqrt(r @ r)
        if n <= self.radius:
            return x.copy()
        return self.center + r * (self.radius / n)

    def project_rows(self, X):
        R = X - self.center
        n = np.sqrt((R * R).sum(axis=1, keepdims=True))
        scale = np.where(n > self.radius, self.radius / np.where(n > 0, n, 1.0), 1.0)
        return self.center + R * scale

    def lmo(self, c):
        c = np.asarray(c, dtype=float)
        n = np.linalg.norm(c)
        if n == 0:
            return self.center.copy()
        return self.center - self.radius * c / n

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


@dataclass(eq=False)
class Box(ConvexSet):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        if self.lo.shape != self.hi.shape or np.any(self.lo > self.hi):
            raise ValueError("box requires lo <= hi componentwise")
        self.dim = self.lo.size
        self.diameter = float(np.linalg.norm(self.hi - self.lo))

    def violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(np.maximum(self.lo - x, 0) + np.maximum(x - self.hi, 0)))

    def project(self, x):
        return np.clip(_check_dim(self, x), self.lo, self.hi)

    def project_rows(self, X):
        return np.clip(X, self.lo, self.hi)

    def lmo(self, c):
        c = np.asarray(c, dtype=float)
        return np.where(c > 0, self.lo, self.hi)

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()


@dataclass(eq=False)
class Halfspace(ConvexSet):
    """{x : normal . x <= offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        self.normal = np.asarray(self.normal, dtype=float)
        self._nn = float(self.normal @ self.normal)
        if self._nn == 0:
            raise ValueError("halfspace normal must be non-zero")
        self.dim = self.normal.size

    def violation(self, x) -> float:
        return max(0.0, float(self.normal @ np.asarray(x, dtype=float)) - self.offset) / np.sqrt(self._nn)

    def project(self, x):
        x = _check_dim(self, x)
        excess = self.normal @ x - self.offset
        if excess <= 0:
            return x.copy()
        return x - (excess / self._nn) * self.normal


@dataclass(eq=False)
class AffineEq(ConvexSet):
    """{x : A x = b} with linearly independent rows."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if self.A.shape[0] != self.b.size:
            raise ValueError("A and b disagree in row count")
        if np.linalg.matrix_rank(self.A) < self.A.shape[0]:
            raise ValueError("AffineEq rows must be linearly independent")
        self.dim = self.A.shape[1]
        self._chol = cho_factor(self.A @ self.A.T)

    def violation(self, x) -> float:
        r = self.A @ np.asarray(x, dtype=float) - self.b
        return float(np.linalg.norm(self.A.T @ cho_solve(self._chol, r)))

    def project(self, x):
        x = _check_dim(self, x)
        return x - self.A.T @ cho_solve(self._chol, self.A @ x - self.b)


@dataclass(eq=False)
class Simplex(ConvexSet):
    """Probability simplex {p >= 0, sum p = 1}."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("simplex dimension must be at least 1")
        self.diameter = float(np.sqrt(2.0)) if self.dim > 1 else 0.0

    def violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - project_simplex(x)))

    def project(self, x):
        return project_simplex(_check_dim(self, x))

    def lmo(self, c):
        v = np.zeros(self.dim)
        v[int(np.argmin(c))] = 1.0
        return v

    def bounding_box(self):
        return np.zeros(self.dim), np.ones(self.dim)

    def sample(self, rng, n: int, max_tries: int = 0) -> np.ndarray:
        return rng.dirichlet(np.ones(self.dim), size=n)


@dataclass(eq=False)
class NonnegOrthant(ConvexSet):
    dim: int

    def violation(self, x) -> float:
        return float(np.linalg.norm(np.minimum(np.asarray(x, dtype=float), 0.0)))

    def project(self, x):
        return np.maximum(_check_dim(self, x), 0.0)

    def bounding_box(self):
        return np.zeros(self.dim), np.full(self.dim, np.inf)


ConvexPiece = (Ball, Box, Halfspace, AffineEq, Simplex, NonnegOrthant)


def project_piece(piece, x) -> np.ndarray:
    return piece.project(x)


def project_simplex(x) -> np.ndarray:
    """Sort-and-threshold projection onto the probability simplex."""
    x = np.asarray(x, dtype=float)
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, x.size + 1)
    rho = np.nonzero(u - css / ks > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(x - tau, 0.0)


# ---------------------------------------------------------------------------
# Intersections
# ---------------------------------------------------------------------------


def dykstra(pieces: Sequence, x, tol: float = 1e-10, max_sweeps: int = 10_000) -> np.ndarray:
    """Dykstra's cyclic projection onto the intersection of ``pieces``."""
    x = np.array(x, dtype=float)
    incr = [np.zeros_like(x) for _ in pieces]
    for sweep in range(1, max_sweeps + 1):
        x_prev = x
        moved = 0.0
        for i, piece in enumerate(pieces):
            z = x + incr[i]
            x = piece.project(z)
            new_incr = z - x
            moved = max(moved, float(np.linalg.norm(new_incr - incr[i])))
            incr[i] = new_incr
        # x can sit still at a feasible point while the corrections keep moving
        change = max(float(np.linalg.norm(x - x_prev)), moved)
        if change < tol:
            viol = max(p.violation(x) for p in pieces)
            if viol <= tol:
                return x
    viol = max(p.violation(x) for p in pieces)
    raise NonConvergence(max_sweeps, max(change, viol))


@dataclass(eq=False)
class Intersection(ConvexSet):
    pieces: list
    tol: float = 1e-10
    max_sweeps: int = 10_000
    lmo_vertices: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("intersection needs at least one piece")
        dims = {p.dim for p in self.pieces}
        if len(dims) != 1:
            raise ValueError(f"pieces disagree in dimension: {dims}")
        self.dim = dims.pop()

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        return all(p.violation(x) <= tol for p in self.pieces)

    def violation(self, x) -> float:
        return max(p.violation(x) for p in self.pieces)

    def project(self, x):
        x = _check_dim(self, x)
        if self.contains(x, 0.0):
            return x.copy()
        # a piece's projection that already lies in every other piece is exact
        violated = [p for p in self.pieces if p.violation(x) > 0]
        if len(violated) == 1:
            z = violated[0].project(x)
            if all(p.violation(z) <= self.tol for p in self.pieces):
                return z
        return dykstra(self.pieces, x, self.tol, self.max_sweeps)

    def bounding_box(self):
        lo = np.full(self.dim, -np.inf)
        hi = np.full(self.dim, np.inf)
        for p in self.pieces:
            plo, phi = p.bounding_box()
            lo, hi = np.maximum(lo, plo), np.minimum(hi, phi)
        return lo, hi


def project_intersection(s: Intersection, x) -> np.ndarray:
    return s.project(x)


class Polytope(Intersection):
    """Bounded polytope given by its vertices; halfspaces come from the hull."""

    def __init__(self, vertices, tol: float = 1e-10, max_sweeps: int = 10_000):
        from scipy.spatial import ConvexHull

        self.vertices = np.asarray(vertices, dtype=float)
        hull = ConvexHull(self.vertices)
        pieces = []
        for eq in hull.equations:
            # hull equations are normal . x + offset <= 0
            pieces.append(Halfspace(eq[:-1], -eq[-1]))
        super().__init__(pieces, tol, max_sweeps)
        diffs = self.vertices[:, None, :] - self.vertices[None, :, :]
        self.diameter = float(np.sqrt((diffs**2).sum(-1)).max())
        self.H = np.array([h.normal for h in pieces])
        self.h = np.array([h.offset for h in pieces])
        m, d = self.H.shape
        n_sets = sum(math.comb(m, k) for k in range(1, d + 1))
        self._active_sets = None
        if n_sets <= self.MAX_ACTIVE_SETS:
            # (rows, pseudo-inverse of H_S H_S^T) for every candidate active set
            sets = []
            for k in range(1, d + 1):
                for rows in itertools.combinations(range(m), k):
                    Hs = self.H[list(rows)]
                    gram = Hs @ Hs.T
                    if np.linalg.matrix_rank(gram) < k:
                        continue
                    sets.append((list(rows), Hs, np.linalg.inv(gram)))
            self._active_sets = sets

    MAX_ACTIVE_SETS = 5000

    def project(self, x):
        """Exact projection by active-set enumeration (Dykstra for large hulls).

        Dykstra is slow near vertices whose adjacent facets are almost
        parallel, which the KKT enumeration avoids entirely.
        """
        x = _check_dim(self, x)
        if self._active_sets is None:
            return super().project(x)
        excess = self.H @ x - self.h
        if np.all(excess <= 0):
            return x.copy()
        scale = 1e-12 * max(1.0, float(np.abs(self.h).max()), float(np.abs(x).max()))
        best, best_d = None, np.inf
        for rows, Hs, gram_inv in self._active_sets:
            mu = gram_inv @ excess[rows]
            if np.any(mu < -scale):
                continue
            z = x - Hs.T @ mu
            if np.all(self.H @ z - self.h <= scale * 10):
                d = float(np.sum((z - x) ** 2))
                if d < best_d:
                    best, best_d = z, d
                    # KKT point found; it is the unique projection
                    break
        if best is None:
            return super().project(x)
        return best

    def lmo(self, c):
        vals = self.vertices @ np.asarray(c, dtype=float)
        # lowest-index vertex among minimisers
        best = np.flatnonzero(vals <= vals.min() + 1e-12 * max(1.0, abs(vals.min())))[0]
        return self.vertices[best].copy()

    def bounding_box(self):
        return self.vertices.min(0), self.vertices.max(0)

    def sample(self, rng, n: int, max_tries: int = 1000) -> np.ndarray:
        if self.dim <= 3:
            return super().sample(rng, n, max_tries)
        # random convex combinations: feasible, though not uniform
        w = rng.dirichlet(np.ones(len(self.vertices)), size=n)
        return w @ self.vertices


class AffineNonneg(ConvexSet):
    """The polyhedron {x >= 0 : A x = b}.

    ``method="newton"`` solves the projection exactly through a semismooth
    Newton iteration on the dual multipliers y, with z = max(0, x + A^T y);
    ``method="dykstra"`` alternates AffineEq and NonnegOrthant.
    """

    def __init__(self, A, b, tol: float = 1e-10, max_sweeps: int = 10_000, method: str = "newton"):
        self.affine = AffineEq(A, b)
        self.A, self.b = self.affine.A, self.affine.b
        self.dim = self.A.shape[1]
        self.orthant = NonnegOrthant(self.dim)
        self.tol = tol
        self.max_sweeps = max_sweeps
        if method not in ("newton", "dykstra"):
            raise ValueError(f"unknown projection method {method!r}")
        self.method = method
        self._warm = threading.local()
        # large, mostly-zero constraint matrices (Blackjack) go through sparse algebra
        m, n = self.A.shape
        self._sparse = m >= 50 and np.count_nonzero(self.A) < 0.1 * m * n
        if self._sparse:
            self._As = sparse.csr_matrix(self.A)
            self._AsT = self._As.T.tocsr()

    def violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return max(float(np.linalg.norm(self.A @ x - self.b)), float(np.linalg.norm(np.minimum(x, 0.0))))

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.violation(x) <= tol

    def project(self, x):
        x = _check_dim(self, x)
        if self.method == "dykstra":
            return dykstra([self.affine, self.orthant], x, self.tol, self.max_sweeps)
        return self._newton(x)

    def bounding_box(self):
        return np.zeros(self.dim), np.full(self.dim, np.inf)

    def _newton(self, x):
        A, b = self.A, self.b
        m = A.shape[0]
        if self._sparse:
            At_mul = self._AsT.dot
            A_mul = self._As.dot
        else:
            At_mul = A.T.dot
            A_mul = A.dot
        y = getattr(self._warm, "y", None)
        if y is None or y.shape != (m,):
            y = cho_solve(self.affine._chol, b - A_mul(x))

        def dual(yv):
            z = np.maximum(x + At_mul(yv), 0.0)
            return -0.5 * (z @ z) + yv @ b, z

        theta, z = dual(y)
        scale = max(1.0, float(np.linalg.norm(b)))
        best, stalled = math.inf, 0
        for it in range(1, self.max_sweeps + 1):
            resid = b - A_mul(z)
            rnorm = float(np.linalg.norm(resid))
            if rnorm <= self.tol * scale:
                self._warm.y = y
                return z
            active = (x + At_mul(y)) > 0
            d = self._newton_direction(active, resid)
            step = 1.0
            slope = resid @ d
            while True:
                y_new = y + step * d
                theta_new, z_new = dual(y_new)
                if theta_new >= theta + 1e-4 * step * slope or step < 1e-12:
                    break
                step *= 0.5
            if rnorm < best:
                best, stalled = rnorm, 0
            else:
                stalled += 1
            if (step < 1e-12 or stalled >= 20) and rnorm <= 1e3 * self.tol * scale:
                # rounding floor: the residual no longer improves
                self._warm.y = y
                return z
            y, theta, z = y_new, theta_new, z_new
        self._warm.y = None
        raise NonConvergence(self.max_sweeps, rnorm)

    def _newton_direction(self, active, resid):
        m = self.A.shape[0]
        if self._sparse:
            Aa = self._As[:, np.flatnonzero(active)]
            H = (Aa @ Aa.T).tocsc()
            ridge = 1e-12 * max(1.0, float(H.diagonal().sum()) / m)
            H = H + ridge * sparse.identity(m, format="csc")
            try:
                return splu(H).solve(resid)
            except RuntimeError:
                return np.linalg.lstsq(H.toarray(), resid, rcond=None)[0]
        Aa = self.A[:, active]
        H = Aa @ Aa.T
        H[np.diag_indices_from(H)] += 1e-12 * max(1.0, float(np.trace(H)) / m)
        try:
            return cho_solve(cho_factor(H), resid)
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(H, resid, rcond=None)[0]


def project_affine_nonneg(A, b, x, tol: float = 1e-10, method: str = "newton") -> np.ndarray:
    return AffineNonneg(A, b, tol=tol, method=method).project(x)
