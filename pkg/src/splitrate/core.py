"""Hilbert-space primitives.

Vectors are plain 1-D float64 numpy arrays (validated by :func:`as_vector`).
This module provides subspaces with exact projections, convex-function
descriptors exposing evaluation / proximal map / optional gradient, the
reflection operator, and one step of the reflection composition together
with its triangle decomposition (the points where the two subgradients are
drawn).

All objects are immutable after construction and all operations are pure, so
everything here is safe to use from concurrent callers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

#: indicator functions evaluate to +inf beyond this membership tolerance
MEMBERSHIP_TOL = 1e-9
#: Gram-Schmidt drops/reject threshold for dependent basis vectors
ORTHO_TOL = 1e-12


class UnsupportedOperationError(RuntimeError):
    """Operation not available for this function kind (e.g. missing prox)."""


class SolverFailureError(RuntimeError):
    """An inner subproblem solver did not reach its required tolerance."""


class NonConvergenceError(RuntimeError):
    """A reference fixed-point run exhausted its budget above tolerance."""


def as_vector(x, name: str = "x") -> np.ndarray:
    """Validate and return a finite 1-D float64 array."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite coordinates")
    return v


def _frozen(x) -> np.ndarray:
    a = np.array(x, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# subspaces and affine sets
# ---------------------------------------------------------------------------


class BasisSubspace:
    """Linear subspace stored as an orthonormal basis.

    Input vectors (rows) are orthonormalized by modified Gram-Schmidt at
    construction; linearly dependent inputs (residual norm <= ORTHO_TOL)
    are rejected so that projections are plain matrix-free products.
    """

    def __init__(self, basis):
        basis = np.atleast_2d(np.asarray(basis, dtype=float))
        if basis.ndim != 2 or basis.size == 0:
            raise ValueError("basis must be a nonempty 2-D array of row vectors")
        if not np.all(np.isfinite(basis)):
            raise ValueError("basis has non-finite entries")
        rows = []
        for v in basis:
            w = v.copy()
            for q in rows:
                w -= np.dot(q, w) * q
            # second pass for numerical orthogonality
            for q in rows:
                w -= np.dot(q, w) * q
            n = np.linalg.norm(w)
            if n <= ORTHO_TOL * max(1.0, np.linalg.norm(v)):
                raise ValueError("degenerate basis: linearly dependent vectors")
            rows.append(w / n)
        self._q = _frozen(np.array(rows))  # (r, dim)

    @property
    def ambient_dim(self) -> int:
        return self._q.shape[1]

    @property
    def rank(self) -> int:
        return self._q.shape[0]

    @property
    def onb(self) -> np.ndarray:
        """Orthonormal basis, one row per basis vector."""
        return self._q

    def project(self, x: np.ndarray) -> np.ndarray:
        return self._q.T @ (self._q @ x)

    def distance(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.distance(x) <= tol


class AffineSet:
    """offset + linear subspace, with exact projection."""

    def __init__(self, basis, offset):
        self.subspace = basis if hasattr(basis, "project") else BasisSubspace(basis)
        self.offset = _frozen(as_vector(offset, "offset"))

    @property
    def ambient_dim(self) -> int:
        return self.offset.size

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.offset + self.subspace.project(x - self.offset)

    def distance(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.distance(x) <= tol


def _as_projector(spec):
    """Accept a subspace-like object (anything with .project) or a raw basis."""
    if hasattr(spec, "project"):
        return spec
    return BasisSubspace(spec)


# ---------------------------------------------------------------------------
# convex-function descriptors
# ---------------------------------------------------------------------------


class ProxFunction:
    """A closed proper convex function with an exact proximal map.

    Subclasses implement ``__call__`` (extended-value evaluation returning
    ``np.inf`` for indicator violations beyond MEMBERSHIP_TOL), ``prox`` and,
    for smooth kinds, ``grad``.  ``lipschitz_grad`` is the constant beta such
    that the gradient is (1/beta)-Lipschitz; it is None for nonsmooth kinds.
    """

    lipschitz_grad = None

    def __call__(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def prox(self, gamma: float, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad(self, x: np.ndarray) -> np.ndarray:
        raise UnsupportedOperationError(f"{type(self).__name__} has no gradient")


class Zero(ProxFunction):
    """The zero function; prox is the identity."""

    lipschitz_grad = np.inf

    def __call__(self, x):
        return 0.0

    def prox(self, gamma, x):
        return np.asarray(x, dtype=float)

    def grad(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


class L1Norm(ProxFunction):
    """scale * ||x||_1; prox is soft thresholding."""

    def __init__(self, scale: float = 1.0):
        if scale < 0:
            raise ValueError("scale must be nonnegative")
        self.scale = float(scale)

    def __call__(self, x):
        return self.scale * float(np.sum(np.abs(x)))

    def prox(self, gamma, x):
        t = gamma * self.scale
        return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


class IndicatorSubspace(ProxFunction):
    """Indicator of a linear subspace; prox is the orthogonal projection."""

    def __init__(self, subspace):
        self.subspace = _as_projector(subspace)

    def __call__(self, x):
        return 0.0 if self.subspace.distance(x) <= MEMBERSHIP_TOL else np.inf

    def prox(self, gamma, x):
        return self.subspace.project(x)


class IndicatorAffine(ProxFunction):
    """Indicator of an affine set offset + span(basis)."""

    def __init__(self, basis, offset):
        self.affine = basis if isinstance(basis, AffineSet) else AffineSet(basis, offset)

    def __call__(self, x):
        return 0.0 if self.affine.distance(x) <= MEMBERSHIP_TOL else np.inf

    def prox(self, gamma, x):
        return self.affine.project(x)


class Quadratic(ProxFunction):
    """(1/2) x'Qx + q'x + c with symmetric PSD Q.

    The prox solves (I + gamma*Q) y = x - gamma*q through a Cholesky
    factorization cached per gamma (gamma is fixed for a whole run).
    """

    def __init__(self, Q, q=None, c: float = 0.0):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        if Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        if not np.allclose(Q, Q.T, atol=1e-10):
            raise ValueError("Q must be symmetric")
        w = np.linalg.eigvalsh(Q)
        if w.min() < -1e-10 * max(1.0, abs(w.max())):
            raise ValueError("Q must be positive semidefinite")
        self.Q = _frozen(0.5 * (Q + Q.T))
        self.q = _frozen(np.zeros(Q.shape[0]) if q is None else as_vector(q, "q"))
        self.c = float(c)
        lam_max = float(w.max())
        self.lipschitz_grad = np.inf if lam_max == 0.0 else 1.0 / lam_max
        self._factors = {}

    def __call__(self, x):
        return float(0.5 * x @ (self.Q @ x) + self.q @ x + self.c)

    def grad(self, x):
        return self.Q @ x + self.q

    def prox(self, gamma, x):
        key = float(gamma)
        fact = self._factors.get(key)
        if fact is None:
            fact = cho_factor(np.eye(self.Q.shape[0]) + gamma * self.Q)
            self._factors[key] = fact
        return cho_solve(fact, x - gamma * self.q)


class DiagonalQuadratic(ProxFunction):
    """(1/2) sum_j w_j x_j^2 with w_j >= 0; closed-form prox x_j/(1+gamma*w_j)."""

    def __init__(self, weights):
        w = as_vector(weights, "weights")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        self.weights = _frozen(w)
        wmax = float(w.max()) if w.size else 0.0
        self.lipschitz_grad = np.inf if wmax == 0.0 else 1.0 / wmax

    def __call__(self, x):
        return float(0.5 * np.sum(self.weights * x * x))

    def grad(self, x):
        return self.weights * x

    def prox(self, gamma, x):
        return x / (1.0 + gamma * self.weights)


class DistanceToSubspace(ProxFunction):
    """Euclidean distance to a linear subspace (1-Lipschitz).

    prox_{gamma d_C}(x) = theta*P_C(x) + (1-theta)*x with theta =
    gamma/d_C(x) when gamma <= d_C(x), and theta = 1 (full projection)
    otherwise.
    """

    def __init__(self, subspace):
        self.subspace = _as_projector(subspace)

    def __call__(self, x):
        return self.subspace.distance(x)

    def prox(self, gamma, x):
        p = self.subspace.project(x)
        d = float(np.linalg.norm(x - p))
        if gamma >= d:
            return p
        theta = gamma / d
        return theta * p + (1.0 - theta) * x


class Translate(ProxFunction):
    """x |-> base(x - shift); prox_{gamma f}(x) = shift + prox_base(x - shift)."""

    def __init__(self, base: ProxFunction, shift):
        self.base = base
        self.shift = _frozen(as_vector(shift, "shift"))
        self.lipschitz_grad = base.lipschitz_grad

    def __call__(self, x):
        return self.base(x - self.shift)

    def prox(self, gamma, x):
        return self.shift + self.base.prox(gamma, x - self.shift)

    def grad(self, x):
        return self.base.grad(x - self.shift)


class BlockSeparable(ProxFunction):
    """Sum of functions acting on consecutive blocks of the variable."""

    def __init__(self, parts):
        """parts: list of (ProxFunction, block_size)."""
        self.parts = tuple((fun, int(size)) for fun, size in parts)
        if any(size <= 0 for _, size in self.parts):
            raise ValueError("block sizes must be positive")
        betas = [fun.lipschitz_grad for fun, _ in self.parts]
        self.lipschitz_grad = None if any(b is None for b in betas) else float(min(betas))
        offs, o = [], 0
        for _, size in self.parts:
            offs.append((o, o + size))
            o += size
        self._slices = tuple(offs)
        self.dim = o

    def _blocks(self, x):
        if x.size != self.dim:
            raise ValueError(f"expected dimension {self.dim}, got {x.size}")
        return (x[a:b] for a, b in self._slices)

    def __call__(self, x):
        return float(sum(fun(xb) for (fun, _), xb in zip(self.parts, self._blocks(x))))

    def prox(self, gamma, x):
        return np.concatenate(
            [fun.prox(gamma, xb) for (fun, _), xb in zip(self.parts, self._blocks(x))]
        )

    def grad(self, x):
        return np.concatenate(
            [fun.grad(xb) for (fun, _), xb in zip(self.parts, self._blocks(x))]
        )


class Custom(ProxFunction):
    """User-supplied callbacks.

    The prox callback takes (gamma, x) and must declare its accuracy; the
    engines treat custom proxes as exact (inexactness is modeled only through
    the fixed-point engine's explicit error injection).
    """

    def __init__(self, eval=None, prox=None, grad=None, accuracy: float = 0.0,
                 lipschitz_grad=None):
        self._eval = eval
        self._prox = prox
        self._grad = grad
        self.accuracy = float(accuracy)
        self.lipschitz_grad = lipschitz_grad

    def __call__(self, x):
        if self._eval is None:
            raise UnsupportedOperationError("custom function has no eval callback")
        return float(self._eval(x))

    def prox(self, gamma, x):
        if self._prox is None:
            raise UnsupportedOperationError("custom function has no prox callback")
        return np.asarray(self._prox(gamma, x), dtype=float)

    def grad(self, x):
        if self._grad is None:
            raise UnsupportedOperationError("custom function has no grad callback")
        return np.asarray(self._grad(x), dtype=float)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


def _check_prox_args(gamma, x):
    if not (gamma > 0):
        raise ValueError(f"gamma must be positive, got {gamma}")
    return as_vector(x)


def prox(f: ProxFunction, gamma: float, x) -> np.ndarray:
    """argmin_y f(y) + ||y - x||^2 / (2 gamma)."""
    x = _check_prox_args(gamma, x)
    return f.prox(gamma, x)


def refl(f: ProxFunction, gamma: float, x) -> np.ndarray:
    """Reflection 2 prox - identity; nonexpansive."""
    x = _check_prox_args(gamma, x)
    return 2.0 * f.prox(gamma, x) - x


def prox_distance(subspace, gamma: float, x) -> np.ndarray:
    """Prox of the distance function to a subspace (partial projection)."""
    x = _check_prox_args(gamma, x)
    return DistanceToSubspace(subspace).prox(gamma, x)


@dataclass(frozen=True)
class TriangleIterate:
    """One step of the reflection composition, decomposed.

    Holds the driving point z, the two backward points x_g = prox_g(z) and
    x_f = prox_f(2 x_g - z), and the subgradients drawn there:
    subgrad_g = (z - x_g)/gamma and subgrad_f = (2 x_g - z - x_f)/gamma, so
    that x_g = z - gamma*subgrad_g and
    x_f = x_g - gamma*subgrad_g - gamma*subgrad_f.
    """

    z: np.ndarray
    x_g: np.ndarray
    x_f: np.ndarray
    subgrad_g: np.ndarray
    subgrad_f: np.ndarray
    gamma: float

    @property
    def prs_point(self) -> np.ndarray:
        """Image of z under the full reflection composition: z + 2(x_f - x_g)."""
        return self.z + 2.0 * (self.x_f - self.x_g)

    def relaxed(self, lam: float) -> np.ndarray:
        """z + 2*lam*(x_f - x_g), the lam-averaged update."""
        return self.z + 2.0 * lam * (self.x_f - self.x_g)

    @property
    def gap(self) -> float:
        return float(np.linalg.norm(self.x_f - self.x_g))


def apply_prs_operator(f: ProxFunction, g: ProxFunction, gamma: float, z) -> TriangleIterate:
    """Evaluate the reflection composition refl_f(refl_g(z)) with its triangle."""
    z = _check_prox_args(gamma, z)
    x_g = g.prox(gamma, z)
    subgrad_g = (z - x_g) / gamma
    reflected = 2.0 * x_g - z
    x_f = f.prox(gamma, reflected)
    subgrad_f = (reflected - x_f) / gamma
    return TriangleIterate(_frozen(z), _frozen(x_g), _frozen(x_f),
                           _frozen(subgrad_g), _frozen(subgrad_f), float(gamma))


def prs_operator(f: ProxFunction, g: ProxFunction, gamma: float):
    """The nonexpansive map z -> refl_f(refl_g(z)) as a plain callable."""

    def op(z):
        x_g = g.prox(gamma, z)
        x_f = f.prox(gamma, 2.0 * x_g - z)
        return z + 2.0 * (x_f - x_g)

    return op


def check_firm_nonexpansive(f: ProxFunction, gamma: float, sample_pairs,
                            tol: float = 1e-10):
    """Check ||p_x - p_y||^2 <= <p_x - p_y, x - y> over sample pairs."""
    from .report import BoundReport

    pairs = list(sample_pairs)
    if not pairs:
        raise ValueError("sample_pairs must be nonempty")
    measured, bound = [], []
    for x, y in pairs:
        px = prox(f, gamma, x)
        py = prox(f, gamma, y)
        d = px - py
        measured.append(float(d @ d))
        bound.append(float(d @ (as_vector(x) - as_vector(y))))
    return BoundReport("firm_nonexpansiveness", "upper",
                       np.array(bound), np.array(measured), tol)
