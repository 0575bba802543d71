"""Algorithm drivers built on the proximal primitives.

``run_relaxed_prs`` iterates the relaxed reflection composition with a full
triangle decomposition per step; ``run_fbs`` / ``run_ppa`` iterate the
forward-backward and proximal-point maps.  ``fixed_point_reference``
constructs the solution certificate (fixed point, minimizer, distances) that
every rate bound is evaluated against.

Objective evaluation convention: f is evaluated only at x_f-type points and
g only at x_g-type points (including their ergodic averages), so indicator
functions never contribute +inf to a trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (NonConvergenceError, ProxFunction, TriangleIterate, Zero,
                   as_vector, apply_prs_operator, _frozen)
from .km import IterationTrace, RelaxationSchedule


@dataclass(frozen=True)
class SolutionCertificate:
    """A fixed point of the reflection composition and derived constants.

    xstar = prox_g(gamma, zstar) is a minimizer of f + g;
    dual_norm = ||zstar - xstar|| / gamma is the norm of the subgradient of g
    drawn at the solution (independent of gamma as a quantity).
    """

    zstar: np.ndarray
    xstar: np.ndarray
    gamma: float
    z0: np.ndarray
    obj_star: float
    residual: float

    @property
    def dist0(self) -> float:
        """||z0 - zstar||."""
        return float(np.linalg.norm(self.z0 - self.zstar))

    @property
    def dist0_sq(self) -> float:
        return self.dist0 ** 2

    @property
    def gap_norm(self) -> float:
        """||zstar - xstar||."""
        return float(np.linalg.norm(self.zstar - self.xstar))

    @property
    def dual_norm(self) -> float:
        """||zstar - xstar|| / gamma."""
        return self.gap_norm / self.gamma

    @property
    def dist0_x(self) -> float:
        """||z0 - xstar||."""
        return float(np.linalg.norm(self.z0 - self.xstar))


def make_certificate(f: ProxFunction, g: ProxFunction, gamma: float, z0, zstar,
                     residual_tol: float = 1e-8) -> SolutionCertificate:
    """Build and validate a certificate from a known fixed point."""
    z0 = as_vector(z0, "z0")
    zstar = as_vector(zstar, "zstar")
    tri = apply_prs_operator(f, g, gamma, zstar)
    residual = float(np.linalg.norm(tri.prs_point - zstar))
    if residual > residual_tol:
        raise NonConvergenceError(
            f"candidate fixed point has residual {residual:.3e} > {residual_tol:.1e}")
    xstar = tri.x_g
    obj_star = float(f(xstar) + g(xstar))
    return SolutionCertificate(_frozen(zstar), _frozen(xstar), float(gamma),
                               _frozen(z0), obj_star, residual)


def fixed_point_reference(f: ProxFunction, g: ProxFunction, gamma: float, z0,
                          budget: int = 10 ** 6,
                          residual_tol: float = 1e-8) -> SolutionCertificate:
    """Certificate via a long half-averaged reference run from z0.

    Raises NonConvergenceError with the final residual if the budget is
    exhausted before the residual drops below tolerance.
    """
    if budget < 10 ** 5:
        raise ValueError("reference budget must be at least 1e5 iterations")
    z0 = as_vector(z0, "z0")
    z = z0.copy()
    residual = math.inf
    for _ in range(budget):
        x_g = g.prox(gamma, z)
        x_f = f.prox(gamma, 2.0 * x_g - z)
        d = x_f - x_g
        residual = 2.0 * float(np.linalg.norm(d))
        if residual <= residual_tol:
            break
        z = z + d  # half-averaged step
    if residual > residual_tol:
        raise NonConvergenceError(
            f"reference run did not converge: residual {residual:.3e} "
            f"after {budget} iterations")
    return make_certificate(f, g, gamma, z0, z, residual_tol)


@dataclass(frozen=True)
class FBSConfig:
    """Forward-backward parameters: step gamma and smoothness modulus beta.

    The gradient of the smooth part must be (1/beta)-Lipschitz and the step
    must satisfy 0 < gamma < 2*beta; the iterated map is then averaged with
    constant alpha = 2*beta / (4*beta - gamma) in (1/2, 1).
    """

    gamma: float
    beta: float

    def __post_init__(self):
        if not (self.gamma > 0):
            raise ValueError("gamma must be positive")
        if not (self.beta > 0):
            raise ValueError("beta must be positive")
        if not (self.gamma < 2.0 * self.beta):
            raise ValueError("invalid config: need gamma < 2*beta")

    @property
    def alpha(self) -> float:
        if math.isinf(self.beta):
            return 0.5
        return 2.0 * self.beta / (4.0 * self.beta - self.gamma)


def run_relaxed_prs(f: ProxFunction, g: ProxFunction, gamma: float,
                    schedule: RelaxationSchedule, z0, iters: int,
                    zstar=None, record_iterates: bool = False,
                    objectives: bool = True, ergodic: bool = True,
                    extra_columns: Optional[dict] = None,
                    ergodic_columns: Optional[dict] = None) -> IterationTrace:
    """Relaxed reflection-composition run with triangle records.

    Per stored point z^k (k = 0..iters) the trace records the residual
    fpr_k = ||refl_f(refl_g(z^k)) - z^k||^2 = 4 ||x_f^k - x_g^k||^2, the
    per-point objective values f(x_f^k) and g(x_g^k), the pair gap, and the
    lambda-weighted ergodic gap/objectives.  The update is computed as
    z + 2*lambda*(x_f - x_g).

    extra_columns: name -> fn(TriangleIterate) evaluated per k;
    ergodic_columns: name -> fn(xbar_g, xbar_f) evaluated per k.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if not (gamma > 0):
        raise ValueError("gamma must be positive")
    z = as_vector(z0, "z0").copy()
    lam = schedule.values_extended(iters)
    zs = as_vector(zstar, "zstar") if zstar is not None else None

    n = iters + 1
    fpr = np.empty(n)
    gap = np.empty(n)
    dist_sq = np.empty(n) if zs is not None else None
    obj_f = np.empty(n) if objectives else None
    obj_g = np.empty(n) if objectives else None
    erg_gap = np.empty(n) if ergodic else None
    erg_obj_f = np.empty(n) if (ergodic and objectives) else None
    erg_obj_g = np.empty(n) if (ergodic and objectives) else None
    extra = {name: np.empty(n) for name in (extra_columns or {})}
    erg_extra = {name: np.empty(n) for name in (ergodic_columns or {})}
    zhist = np.empty((n, z.size)) if record_iterates else None
    gfhist = np.empty((n, z.size)) if record_iterates else None
    ffhist = np.empty((n, z.size)) if record_iterates else None

    sum_g = np.zeros_like(z)
    sum_f = np.zeros_like(z)
    Lam = 0.0
    xbar_g = xbar_f = None
    diagnostic = None
    last = n

    for k in range(n):
        x_g = g.prox(gamma, z)
        x_f = f.prox(gamma, 2.0 * x_g - z)
        d = x_f - x_g
        fpr[k] = 4.0 * float(d @ d)
        gap[k] = float(np.linalg.norm(d))
        if dist_sq is not None:
            dz = z - zs
            dist_sq[k] = dz @ dz
        if objectives:
            obj_f[k] = f(x_f)
            obj_g[k] = g(x_g)
        if zhist is not None:
            zhist[k] = z
            gfhist[k] = x_g
            ffhist[k] = x_f
        lk = lam[k]
        Lam += lk
        sum_g += lk * x_g
        sum_f += lk * x_f
        xbar_g = sum_g / Lam
        xbar_f = sum_f / Lam
        if ergodic:
            erg_gap[k] = float(np.linalg.norm(xbar_f - xbar_g))
            if objectives:
                erg_obj_f[k] = f(xbar_f)
                erg_obj_g[k] = g(xbar_g)
        if extra_columns:
            tri = TriangleIterate(z, x_g, x_f, (z - x_g) / gamma,
                                  (2.0 * x_g - z - x_f) / gamma, gamma)
            for name, fn in extra_columns.items():
                extra[name][k] = fn(tri)
        if ergodic_columns:
            for name, fn in ergodic_columns.items():
                erg_extra[name][k] = fn(xbar_g, xbar_f)
        if not np.isfinite(fpr[k]):
            diagnostic = f"non-finite iterate at step {k}"
            last = k + 1
            break
        if k == iters:
            break
        z = z + (2.0 * lk) * d

    cols = {"fpr": fpr[:last], "lam": lam[:last], "gap": gap[:last]}
    if dist_sq is not None:
        cols["dist_sq"] = dist_sq[:last]
    if objectives:
        cols["obj_f"] = obj_f[:last]
        cols["obj_g"] = obj_g[:last]
    if ergodic:
        cols["erg_gap"] = erg_gap[:last]
        if objectives:
            cols["erg_obj_f"] = erg_obj_f[:last]
            cols["erg_obj_g"] = erg_obj_g[:last]
    for name, arr in extra.items():
        cols[name] = arr[:last]
    for name, arr in erg_extra.items():
        cols[name] = arr[:last]
    return IterationTrace(cols,
                          z=zhist[:last] if zhist is not None else None,
                          x_g=gfhist[:last] if zhist is not None else None,
                          x_f=ffhist[:last] if zhist is not None else None,
                          zstar=zs, diagnostic=diagnostic,
                          xbar_g=xbar_g, xbar_f=xbar_f)


def run_drs(f, g, gamma, z0, iters, **kwargs) -> IterationTrace:
    """Half-averaged special case (lambda = 1/2)."""
    return run_relaxed_prs(f, g, gamma, RelaxationSchedule.constant(0.5),
                           z0, iters, **kwargs)


def run_prs(f, g, gamma, z0, iters, **kwargs) -> IterationTrace:
    """Unrelaxed special case (lambda = 1)."""
    return run_relaxed_prs(f, g, gamma, RelaxationSchedule.constant(1.0),
                           z0, iters, **kwargs)


def run_fbs(f: ProxFunction, g: ProxFunction, config: FBSConfig, z0,
            iters: int, xstar=None, record_iterates: bool = False) -> IterationTrace:
    """Forward-backward iteration z <- prox_f(gamma, z - gamma*grad_g(z)).

    Records fpr_k = ||T z^k - z^k||^2 for the iterated map itself and the
    objective values h(z^k) = f(z^k) + g(z^k).
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    gamma = config.gamma
    z = as_vector(z0, "z0").copy()
    xs = as_vector(xstar, "xstar") if xstar is not None else None

    n = iters + 1
    fpr = np.empty(n)
    obj = np.empty(n)
    dist_sq = np.empty(n) if xs is not None else None
    zhist = np.empty((n, z.size)) if record_iterates else None
    diagnostic = None
    last = n
    for k in range(n):
        Tz = f.prox(gamma, z - gamma * g.grad(z))
        d = Tz - z
        fpr[k] = d @ d
        obj[k] = f(z) + g(z)
        if dist_sq is not None:
            dz = z - xs
            dist_sq[k] = dz @ dz
        if zhist is not None:
            zhist[k] = z
        if not np.isfinite(fpr[k]):
            diagnostic = f"non-finite iterate at step {k}"
            last = k + 1
            break
        if k == iters:
            break
        z = Tz

    cols = {"fpr": fpr[:last], "obj": obj[:last],
            "lam": np.ones(last)}
    if dist_sq is not None:
        cols["dist_sq"] = dist_sq[:last]
    return IterationTrace(cols, z=zhist[:last] if zhist is not None else None,
                          zstar=xs, diagnostic=diagnostic)


def run_ppa(f: ProxFunction, gamma: float, z0, iters: int, xstar=None,
            record_iterates: bool = False) -> IterationTrace:
    """Proximal-point iteration z <- prox_f(gamma, z); forward-backward with
    a zero smooth part."""
    return run_fbs(f, Zero(), FBSConfig(gamma=gamma, beta=math.inf), z0,
                   iters, xstar=xstar, record_iterates=record_iterates)


def prs_trace_deviation(pair_a, pair_b, gamma: float,
                        schedule: RelaxationSchedule, z0, iters: int) -> np.ndarray:
    """Run two relaxed reflection-composition recursions in lockstep from the
    same start and return the per-iteration driving-vector deviation
    ||z_a^k - z_b^k|| (k = 0..iters), without storing iterate histories."""
    f_a, g_a = pair_a
    f_b, g_b = pair_b
    z_a = as_vector(z0, "z0").copy()
    z_b = z_a.copy()
    lam = schedule.values(iters)
    dev = np.empty(iters + 1)
    dev[0] = 0.0
    for k in range(iters):
        for (f, g, z) in ((f_a, g_a, z_a), (f_b, g_b, z_b)):
            x_g = g.prox(gamma, z)
            x_f = f.prox(gamma, 2.0 * x_g - z)
            z += (2.0 * lam[k]) * (x_f - x_g)
        dev[k + 1] = float(np.linalg.norm(z_a - z_b))
    return dev


def ergodic_average(trace: IterationTrace):
    """Sequences of lambda-weighted running averages of x_g and x_f.

    Needs a trace recorded with ``record_iterates=True``; the incremental
    engine accumulators are spot-checked against this direct recomputation
    in the test-suite.
    """
    if trace.x_g is None or trace.x_f is None:
        raise ValueError("trace has no stored triangle records")
    lam = trace.lam[:, None]
    Lam = np.cumsum(trace.lam)[:, None]
    xbar_g = np.cumsum(lam * trace.x_g, axis=0) / Lam
    xbar_f = np.cumsum(lam * trace.x_f, axis=0) / Lam
    return xbar_g, xbar_f
