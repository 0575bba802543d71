"""Worst-case constructions with closed-form oracles.

Each lower-bound / optimality example is built exactly as its proof
prescribes, truncated to N two-dimensional blocks with a quantified (<= 1%)
loss certificate, and paired with closed-form per-iteration values so the
generic engines can be compared coordinate-wise against the construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import DistanceToSubspace, IndicatorSubspace, as_vector


# ---------------------------------------------------------------------------
# block geometry: pairs of lines at angles theta_i in each R^2 block
# ---------------------------------------------------------------------------


class BlockAxisSubspace:
    """Direct sum of the first coordinate axes of N two-dimensional blocks."""

    def __init__(self, blocks: int):
        if blocks < 1:
            raise ValueError("need at least one block")
        self.blocks = int(blocks)
        self.ambient_dim = 2 * self.blocks

    def _reshape(self, x):
        if x.size != self.ambient_dim:
            raise ValueError(f"expected dimension {self.ambient_dim}, got {x.size}")
        return x.reshape(self.blocks, 2)

    def project(self, x):
        b = self._reshape(np.asarray(x, dtype=float)).copy()
        b[:, 1] = 0.0
        return b.reshape(-1)

    def distance(self, x):
        b = self._reshape(np.asarray(x, dtype=float))
        return float(np.linalg.norm(b[:, 1]))

    def contains(self, x, tol=1e-9):
        return self.distance(x) <= tol


class BlockLineSubspace:
    """Per-block spans of the unit vectors at angles theta_i.

    The block projector is [[c^2, s c], [s c, s^2]] with c = cos(theta_i),
    s = sin(theta_i); applied matrix-free across all blocks at once.
    """

    def __init__(self, cosines):
        c = as_vector(cosines, "cosines")
        if np.any(c < 0.0) or np.any(c >= 1.0):
            raise ValueError("cosines must lie in [0, 1)")
        self.c = c
        self.s = np.sqrt(1.0 - c * c)
        self.blocks = c.size
        self.ambient_dim = 2 * self.blocks

    def _reshape(self, x):
        if x.size != self.ambient_dim:
            raise ValueError(f"expected dimension {self.ambient_dim}, got {x.size}")
        return x.reshape(self.blocks, 2)

    def project(self, x):
        b = self._reshape(np.asarray(x, dtype=float))
        t = self.c * b[:, 0] + self.s * b[:, 1]  # component along the line
        out = np.empty_like(b)
        out[:, 0] = self.c * t
        out[:, 1] = self.s * t
        return out.reshape(-1)

    def distance(self, x):
        b = self._reshape(np.asarray(x, dtype=float))
        # orthogonal component: -s*x + c*y per block
        r = -self.s * b[:, 0] + self.c * b[:, 1]
        return float(np.linalg.norm(r))

    def contains(self, x, tol=1e-9):
        return self.distance(x) <= tol


@dataclass(frozen=True)
class RotationSpaceSpec:
    """N two-dimensional blocks with per-block contractions c_i and angles
    theta_i = arccos(c_i).

    The half-averaged reflection composition for the pair (indicator of the
    rotated lines, indicator of the axes) acts block-diagonally as
    c_i R_{theta_i}; :func:`build_rotation_operator` returns that map.
    """

    cosines: np.ndarray

    def __post_init__(self):
        c = as_vector(self.cosines, "cosines")
        if np.any(c < 0.0) or np.any(c >= 1.0):
            raise ValueError("cosines must lie in [0, 1)")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "cosines", c)

    @classmethod
    def from_angles(cls, thetas) -> "RotationSpaceSpec":
        t = as_vector(thetas, "thetas")
        if np.any(t <= 0.0) or np.any(t > np.pi / 2):
            raise ValueError("angles must lie in (0, pi/2]")
        return cls(np.cos(t))

    @property
    def blocks(self) -> int:
        return self.cosines.size

    @property
    def ambient_dim(self) -> int:
        return 2 * self.blocks

    @property
    def thetas(self) -> np.ndarray:
        return np.arccos(self.cosines)

    @property
    def sines(self) -> np.ndarray:
        return np.sqrt(1.0 - self.cosines ** 2)

    def axes_subspace(self) -> BlockAxisSubspace:
        return BlockAxisSubspace(self.blocks)

    def lines_subspace(self) -> BlockLineSubspace:
        return BlockLineSubspace(self.cosines)

    def indicator_pair(self):
        """(f, g) = (indicator of the rotated lines, indicator of the axes)."""
        return IndicatorSubspace(self.lines_subspace()), IndicatorSubspace(self.axes_subspace())

    def block_norms(self, z) -> np.ndarray:
        b = np.asarray(z, dtype=float).reshape(self.blocks, 2)
        return np.linalg.norm(b, axis=1)


def build_rotation_operator(spec: RotationSpaceSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Block-diagonal map z_i -> c_i R_{theta_i} z_i on R^{2N}.

    This is the half-averaged reflection composition of the spec's indicator
    pair (checked against the generic composition in the tests), already
    averaged: its fixed-point iteration is the plain z <- T z run.
    """
    c, s = spec.cosines, spec.sines
    cc, cs = c * c, c * s
    blocks, dim = spec.blocks, spec.ambient_dim

    def op(z):
        b = np.asarray(z, dtype=float)
        if b.size != dim:
            raise ValueError(f"expected dimension {dim}, got {b.size}")
        b = b.reshape(blocks, 2)
        out = np.empty_like(b)
        out[:, 0] = cc * b[:, 0] - cs * b[:, 1]
        out[:, 1] = cs * b[:, 0] + cc * b[:, 1]
        return out.reshape(-1)

    return op


def block_vector(norms, angle_first: bool = True) -> np.ndarray:
    """Stack blocks (n_j, 0) for given block norms n_j."""
    norms = as_vector(norms, "norms")
    out = np.zeros((norms.size, 2))
    out[:, 0] = norms
    return out.reshape(-1)


# ---------------------------------------------------------------------------
# slowest-rate residual construction
# ---------------------------------------------------------------------------


def thm_optimal_fpr_setup(alpha: float, N: int, horizon: int):
    """Rotation spec and start point certifying the residual lower bound.

    With c_i = sqrt(i/(i+1)) and start blocks sqrt(2 alpha e) (1/(j+1)^alpha, 0),
    the iterated averaged map keeps ||T z^k - z^k||^2 >= 0.99/(k+1)^{2 alpha}
    for 1 <= k <= horizon, where 0.99 is the truncation certificate
    (valid once ((horizon+1)/(N+2))^{2 alpha} <= 0.01).
    """
    if not (alpha > 0.5):
        raise ValueError("alpha must exceed 1/2")
    if N < 1 or horizon < 1:
        raise ValueError("N and horizon must be positive")
    loss = ((horizon + 1.0) / (N + 2.0)) ** (2.0 * alpha)
    if loss > 0.01:
        raise ValueError(
            f"N={N} too small for horizon {horizon}: truncation loss {loss:.3g} > 1%")
    i = np.arange(N, dtype=float)
    spec = RotationSpaceSpec(np.sqrt(i / (i + 1.0)))
    scale = math.sqrt(2.0 * alpha * math.e)
    z0 = block_vector(scale / (i + 1.0) ** alpha)
    return spec, z0


def optimal_fpr_lower_bound(alpha: float, ks) -> np.ndarray:
    """Truncation-certified residual lower bound 0.99/(k+1)^{2 alpha}."""
    ks = np.asarray(ks, dtype=float)
    return 0.99 / (ks + 1.0) ** (2.0 * alpha)


# ---------------------------------------------------------------------------
# arbitrarily slow norm convergence
# ---------------------------------------------------------------------------


def _bisect_increasing(fn, target, lo=0.0, hi=1.0, tol=1e-12, max_iter=400):
    """Solve fn(y) = target for increasing fn by bracketing + bisection."""
    flo = fn(lo)
    if flo > target:
        raise ValueError("target below the function range on [lo, inf)")
    while fn(hi) < target:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("failed to bracket the target")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if fn(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SlowSequenceSpec:
    """Contractions and witness indices realizing a target decay h.

    c_j = h2(j+1) / (1 + h2(j+1)) where h2 inverts 1/h - 1, and
    n_k + 1 = floor(1/h(k+1)); the construction guarantees
    c_{n_k}^{k+1} / (n_k + 1) > h(k+1)/e at every k in the horizon
    (validated numerically at construction).
    """

    h: Callable[[float], float]
    c: np.ndarray
    n: np.ndarray

    @classmethod
    def build(cls, h: Callable[[float], float], horizon: int,
              h2: Optional[Callable[[float], float]] = None,
              blocks: Optional[int] = None) -> "SlowSequenceSpec":
        if h(0.0) < 0.5:
            raise ValueError("need h(0) >= 1/2 so every reciprocal integer is reached")
        probe = np.array([h(t) for t in np.linspace(0.0, horizon + 1.0, 64)])
        if np.any(np.diff(probe) >= 0) or np.any(probe <= 0) or np.any(probe >= 1):
            raise ValueError("h must map into (0,1) and strictly decrease")

        if h2 is None:
            u = lambda y: 1.0 / h(y) - 1.0
            h2 = lambda x: _bisect_increasing(u, x)

        n = np.array([int(1.0 / h(k + 1.0)) - 1 for k in range(horizon + 1)])
        if np.any(n < 0):
            raise ValueError("h must satisfy h(k+1) <= 1 on the horizon")
        N = max(int(n.max()) + 1, 1)
        if blocks is not None:
            if blocks < N:
                raise ValueError(f"need at least {N} blocks for this horizon")
            N = int(blocks)
        j = np.arange(N, dtype=float)
        h2v = np.array([h2(jj + 1.0) for jj in j])
        c = h2v / (1.0 + h2v)
        if np.any(c <= 0.0) or np.any(c >= 1.0) or np.any(np.diff(c) < -1e-15):
            raise ValueError("contractions must be increasing in (0, 1)")

        spec = cls(h=h, c=c, n=n)
        witness = spec.witness_values(horizon)
        target = np.array([h(k + 1.0) / math.e for k in range(horizon + 1)])
        if np.any(witness <= target):
            raise ValueError("witness inequality failed on the horizon")
        return spec

    def witness_values(self, horizon: int) -> np.ndarray:
        """c_{n_k}^{k+1} / (n_k + 1) for k = 0..horizon."""
        ks = np.arange(horizon + 1)
        return self.c[self.n[ks]] ** (ks + 1.0) / (self.n[ks] + 1.0)


def arbitrarily_slow_setup(h: Callable[[float], float], horizon: int,
                           h2: Optional[Callable[[float], float]] = None,
                           blocks: Optional[int] = None):
    """Rotation spec and start point (block norms 1/(j+1)) whose iterates
    keep ||z^k - z*|| >= h(k)/e over the horizon (z* = 0)."""
    slow = SlowSequenceSpec.build(h, horizon, h2=h2, blocks=blocks)
    spec = RotationSpaceSpec(slow.c)
    j = np.arange(spec.blocks, dtype=float)
    z0 = block_vector(1.0 / (j + 1.0))
    return spec, z0, slow


def slow_distance_lower_bound(slow: SlowSequenceSpec, ks) -> np.ndarray:
    """h(k)/e for the requested iterations."""
    return np.array([slow.h(float(k)) / math.e for k in np.asarray(ks)])


# ---------------------------------------------------------------------------
# exact oscillation oracles
# ---------------------------------------------------------------------------


def feasibility_square_oracle(k: int) -> dict:
    """Closed-form iterates of the unrelaxed run on the two axes of R^2
    from z0 = (1, 1): period-2 oscillation around the origin with ergodic
    pair gap sqrt(2)/(k+1) at even k and 0 at odd k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    even = (k % 2 == 0)
    z = np.array([1.0, 1.0]) if even else np.array([-1.0, -1.0])
    x_g = np.array([1.0, 0.0]) if even else np.array([-1.0, 0.0])
    x_f = np.array([0.0, -1.0]) if even else np.array([0.0, 1.0])
    if even:
        xbar_g = np.array([1.0 / (k + 1.0), 0.0])
        xbar_f = np.array([0.0, -1.0 / (k + 1.0)])
    else:
        xbar_g = np.zeros(2)
        xbar_f = np.zeros(2)
    return {"z": z, "x_g": x_g, "x_f": x_f, "xbar_g": xbar_g, "xbar_f": xbar_f,
            "erg_gap": float(np.linalg.norm(xbar_g - xbar_f))}


def abs_example_oracle(epsilon: float, k: int) -> dict:
    """Closed-form iterates of the unrelaxed run on f = |.|, g = 0 from
    z0 = 2 - epsilon: z^k = (-1)^k eps for k >= 1, with the stated ergodic
    averages and objective errors."""
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    if k < 0:
        raise ValueError("k must be nonnegative")
    eps = float(epsilon)
    if k == 0:
        z, x_g, x_f = 2.0 - eps, 2.0 - eps, 1.0 - eps
    else:
        z = (-1.0) ** k * eps
        x_g = z
        x_f = 0.0
    if k % 2 == 0:
        xbar_g = (2.0 - eps) / (k + 1.0)
    else:
        xbar_g = (2.0 - 2.0 * eps) / (k + 1.0)
    xbar_f = (1.0 - eps) / (k + 1.0)
    return {
        "z": z, "x_g": x_g, "x_f": x_f,
        "xbar_g": xbar_g, "xbar_f": xbar_f,
        "obj_err_f": abs(xbar_f),          # f evaluated at the f-side average
        "obj_err_g": abs(xbar_g),          # f evaluated at the g-side average
        "erg_gap": abs(xbar_g - xbar_f),
    }


# ---------------------------------------------------------------------------
# distance-function objective lower bound
# ---------------------------------------------------------------------------


def dv_lower_bound_setup(alpha: float, N: int, gamma: float):
    """Distance-to-lines / indicator-of-axes pair whose half-averaged run
    coincides with the indicator pair's run when gamma >= ||z0||.

    Returns (f, g, z0, spec).  The objective error at the g-side point is
    exactly the distance to the rotated lines.
    """
    if not (alpha > 0.5):
        raise ValueError("alpha must exceed 1/2")
    i = np.arange(N, dtype=float)
    spec = RotationSpaceSpec(np.sqrt(i / (i + 1.0)))
    z0 = block_vector(1.0 / (i + 1.0) ** alpha)
    z0_norm = float(np.linalg.norm(z0))
    if gamma < z0_norm:
        raise ValueError(
            f"gamma={gamma} violates the partial-projection condition: "
            f"needs gamma >= ||z0|| = {z0_norm:.6f}")
    f = DistanceToSubspace(spec.lines_subspace())
    g = IndicatorSubspace(spec.axes_subspace())
    return f, g, z0, spec


# ---------------------------------------------------------------------------
# diagonal-quadratic proximal-point lower bound
# ---------------------------------------------------------------------------


def ppa_diag_setup(alpha: float, gamma: float, N: int, horizon: int):
    """Diagonal quadratic (weights 1/j, j = 1..N) and start z0_j = 1/(j+gamma)^alpha.

    The proximal-point run keeps, with a 0.99 truncation certificate,
    fpr_k >= 0.99 gamma^2 / ((1+2 alpha) e^{2 gamma} (k+gamma)^{1+2 alpha})
    and obj(z^{k+1}) - obj* >= 0.99 / (4 alpha e^{2 gamma} (k+1+gamma)^{2 alpha})
    for k <= horizon.
    """
    from .core import DiagonalQuadratic

    if not (alpha > 0.5):
        raise ValueError("alpha must exceed 1/2")
    if not (gamma > 0):
        raise ValueError("gamma must be positive")
    loss_fpr = ((horizon + gamma) / (N + gamma)) ** (1.0 + 2.0 * alpha)
    loss_obj = ((horizon + 1.0 + gamma) / (N + gamma)) ** (2.0 * alpha)
    if max(loss_fpr, loss_obj) > 0.01:
        raise ValueError(
            f"N={N} too small for horizon {horizon}: truncation loss "
            f"{max(loss_fpr, loss_obj):.3g} > 1%")
    j = np.arange(1, N + 1, dtype=float)
    f = DiagonalQuadratic(1.0 / j)
    z0 = 1.0 / (j + gamma) ** alpha
    return f, z0


def ppa_lower_bounds(alpha: float, gamma: float, ks):
    """(fpr lower bound at k, objective lower bound at iterate k+1), both
    carrying the 0.99 truncation certificate."""
    ks = np.asarray(ks, dtype=float)
    e2g = math.exp(2.0 * gamma)
    fpr = 0.99 * gamma ** 2 / ((1.0 + 2.0 * alpha) * e2g * (ks + gamma) ** (1.0 + 2.0 * alpha))
    obj = 0.99 / (4.0 * alpha * e2g * (ks + 1.0 + gamma) ** (2.0 * alpha))
    return fpr, obj
