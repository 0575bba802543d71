"""Krasnosel'skii-Mann fixed-point engine.

Drives z^{k+1} = (1-lambda_k) z^k + lambda_k T(z^k) + lambda_k e^k for a
nonexpansive map T, records the fixed-point residual ||T z^k - z^k||^2 per
iteration, and provides the distance/residual monotonicity and summability
checks together with the residual rate bound dist0^2 / sum_{i<=k} tau_i,
tau_i = lambda_i (1 - lambda_i).

The engine is single-threaded and deterministic; traces are immutable after
completion, and independent runs may execute concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import as_vector
from .report import BoundReport


class UnsupportedScheduleError(ValueError):
    """Raised when a bound needs tau_k > 0 but the schedule has tau_k = 0."""


# ---------------------------------------------------------------------------
# relaxation and error schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelaxationSchedule:
    """The relaxation sequence lambda_k in (0, 1].

    Kinds: constant, explicit list, or polynomial lambda_k = (k+1)**p.
    Partial sums Lambda_k, products tau_k = lambda_k (1 - lambda_k) and the
    horizon infimum of tau are all computed over a finite horizon.
    """

    kind: str
    value: float = None
    sequence: tuple = None
    power: float = None

    @classmethod
    def constant(cls, lam: float) -> "RelaxationSchedule":
        return cls(kind="constant", value=float(lam))

    @classmethod
    def from_values(cls, values) -> "RelaxationSchedule":
        return cls(kind="list", sequence=tuple(float(v) for v in values))

    @classmethod
    def polynomial(cls, p: float) -> "RelaxationSchedule":
        return cls(kind="polynomial", power=float(p))

    def values(self, count: int) -> np.ndarray:
        """lambda_0 .. lambda_{count-1}."""
        if self.kind == "constant":
            lam = np.full(count, self.value)
        elif self.kind == "list":
            if len(self.sequence) < count:
                raise ValueError(
                    f"schedule has {len(self.sequence)} values, {count} needed")
            lam = np.asarray(self.sequence[:count], dtype=float)
        elif self.kind == "polynomial":
            lam = (np.arange(count, dtype=float) + 1.0) ** self.power
        else:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if count and (lam.min() <= 0.0 or lam.max() > 1.0):
            raise ValueError("relaxation parameters must lie in (0, 1]")
        return lam

    def lam(self, k: int) -> float:
        return float(self.values(k + 1)[k])

    def values_extended(self, steps: int) -> np.ndarray:
        """steps+1 weights: the stepping weights plus one trailing weight for
        the final recorded point (finite lists repeat their last value)."""
        try:
            return self.values(steps + 1)
        except ValueError:
            lam = self.values(steps)
            return np.concatenate([lam, lam[-1:]])

    def partial_sums(self, count: int) -> np.ndarray:
        """Lambda_k = sum_{i<=k} lambda_i for k < count (sequential sum)."""
        return np.cumsum(self.values(count))

    def taus(self, count: int) -> np.ndarray:
        lam = self.values(count)
        return lam * (1.0 - lam)

    def tau(self, k: int) -> float:
        return float(self.taus(k + 1)[k])

    def tau_min(self, count: int) -> float:
        """Infimum of tau over the run horizon."""
        t = self.taus(count)
        return float(t.min()) if count else 0.0


@dataclass(frozen=True)
class ErrorSchedule:
    """Injected error vectors e^k with a declared envelope omega_k.

    ``generate(k)`` returns e^k; ``omega(k)`` must dominate
    lambda_k * ||e^k||.  The envelope must be nonnegative and monotonically
    nonincreasing over the horizon (the numerically checkable sufficient
    condition for the inexact convergence statement).
    """

    generate: Callable[[int], np.ndarray]
    omega: Callable[[int], float]

    def omegas(self, count: int) -> np.ndarray:
        w = np.array([float(self.omega(k)) for k in range(count)])
        if np.any(w < 0):
            raise ValueError("error envelope must be nonnegative")
        if np.any(np.diff(w) > 1e-15):
            raise ValueError("error envelope must be monotonically nonincreasing")
        return w


def decaying_errors(dim: int, exponent: float, seed: int = 0,
                    lam_bound: float = 1.0) -> ErrorSchedule:
    """Random-direction errors with ||e^k|| = (k+1)**(-exponent)."""
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((4096, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    def generate(k):
        d = dirs[k % dirs.shape[0]]
        return d * (k + 1.0) ** (-exponent)

    def omega(k):
        return lam_bound * (k + 1.0) ** (-exponent)

    return ErrorSchedule(generate=generate, omega=omega)


# ---------------------------------------------------------------------------
# iteration traces
# ---------------------------------------------------------------------------


class IterationTrace:
    """Per-iteration records of a fixed-point run.

    Scalar columns all have length ``iters + 1`` (one entry per stored point
    z^0 .. z^iters).  ``fpr`` is ||T z^k - z^k||^2 for the operator T the
    driver iterated.  Vector histories (z, x_g, x_f) are kept only when the
    driver ran with ``record_iterates=True``.
    """

    def __init__(self, columns: dict, *, z=None, x_g=None, x_f=None,
                 zstar=None, diagnostic: Optional[str] = None,
                 xbar_g=None, xbar_f=None):
        self.columns = {k: np.asarray(v) for k, v in columns.items()}
        self.z = z
        self.x_g = x_g
        self.x_f = x_f
        self.xbar_g = xbar_g  # final ergodic averages
        self.xbar_f = xbar_f
        self.zstar = zstar
        self.diagnostic = diagnostic
        lengths = {v.shape[0] for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"ragged trace columns: {lengths}")

    def __len__(self) -> int:
        return self.columns["fpr"].shape[0]

    @property
    def steps(self) -> int:
        """Number of steps actually executed (= len - 1)."""
        return len(self) - 1

    @property
    def fpr(self) -> np.ndarray:
        return self.columns["fpr"]

    @property
    def lam(self) -> np.ndarray:
        return self.columns["lam"]

    @property
    def dist_sq(self) -> Optional[np.ndarray]:
        return self.columns.get("dist_sq")

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise KeyError(f"trace has no column {name!r}; has {sorted(self.columns)}")
        return self.columns[name]

    def has_column(self, name: str) -> bool:
        return name in self.columns


# ---------------------------------------------------------------------------
# the engine
# ---------------------------------------------------------------------------


def km_step(T, lam: float, z, e=None) -> np.ndarray:
    """One relaxed step (1-lam) z + lam T(z) + lam e."""
    if not (0.0 < lam <= 1.0):
        raise ValueError(f"lambda must lie in (0, 1], got {lam}")
    z = as_vector(z, "z")
    out = (1.0 - lam) * z + lam * np.asarray(T(z), dtype=float)
    if e is not None:
        out = out + lam * np.asarray(e, dtype=float)
    return out


def run_km(T, schedule: RelaxationSchedule, z0, iters: int,
           errors: Optional[ErrorSchedule] = None, zstar=None,
           record_iterates: bool = False) -> IterationTrace:
    """Run the relaxed fixed-point iteration for ``iters`` steps.

    Records fpr_k = ||T z^k - z^k||^2 for k = 0..iters (one extra operator
    evaluation at the final point).  With ``zstar`` given, also records
    ||z^k - z*||^2; with ``errors`` given, additionally records ||e^k|| and
    ||T z^k - z*|| (the quantities the inexact-rate accounting needs), after
    validating the declared envelope.

    A non-finite iterate aborts the run; the truncated trace carries a
    diagnostic message.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    z = as_vector(z0, "z0").copy()
    lam = schedule.values_extended(iters)
    if errors is not None:
        omegas = errors.omegas(iters)
    zs = as_vector(zstar, "zstar") if zstar is not None else None

    n = iters + 1
    fpr = np.empty(n)
    dist_sq = np.empty(n) if zs is not None else None
    err_norm = np.zeros(n) if errors is not None else None
    op_dist = np.empty(n) if (errors is not None and zs is not None) else None
    zhist = np.empty((n, z.size)) if record_iterates else None

    diagnostic = None
    last = n
    for k in range(n):
        Tz = np.asarray(T(z), dtype=float)
        d = Tz - z
        fpr[k] = d @ d
        if zhist is not None:
            zhist[k] = z
        if dist_sq is not None:
            dz = z - zs
            dist_sq[k] = dz @ dz
        if op_dist is not None:
            op_dist[k] = np.linalg.norm(Tz - zs)
        if not np.isfinite(fpr[k]):
            diagnostic = f"non-finite iterate at step {k}"
            last = k + 1
            break
        if k == iters:
            break
        lk = lam[k]
        e = None
        if errors is not None:
            e = np.asarray(errors.generate(k), dtype=float)
            nk = np.linalg.norm(e)
            err_norm[k] = nk
            if lk * nk > omegas[k] + 1e-12:
                raise ValueError(
                    f"error at step {k} exceeds its declared envelope")
        z = (1.0 - lk) * z + lk * Tz
        if e is not None:
            z = z + lk * e

    cols = {"fpr": fpr[:last], "lam": lam[:last]}
    if dist_sq is not None:
        cols["dist_sq"] = dist_sq[:last]
    if err_norm is not None:
        cols["err_norm"] = err_norm[:last]
    if op_dist is not None:
        cols["op_dist"] = op_dist[:last]
    return IterationTrace(cols, z=zhist[:last] if zhist is not None else None,
                          zstar=zs, diagnostic=diagnostic)


# ---------------------------------------------------------------------------
# bounds and checks
# ---------------------------------------------------------------------------


def fpr_bound(schedule: RelaxationSchedule, dist0_sq: float, k: int) -> float:
    """Residual rate bound dist0^2 / sum_{i=0}^k tau_i (needs every tau_i > 0)."""
    if dist0_sq < 0:
        raise ValueError("dist0_sq must be nonnegative")
    taus = schedule.taus(k + 1)
    if np.any(taus <= 0.0):
        raise UnsupportedScheduleError(
            "residual bound needs tau_i > 0 for all i <= k")
    return float(dist0_sq / taus.sum())


def fpr_bound_series(schedule: RelaxationSchedule, dist0_sq: float,
                     count: int) -> np.ndarray:
    """Vectorized fpr_bound for k = 0..count-1."""
    taus = schedule.taus(count)
    if np.any(taus <= 0.0):
        raise UnsupportedScheduleError(
            "residual bound needs tau_i > 0 for all i < count")
    return dist0_sq / np.cumsum(taus)


def check_fejer(trace: IterationTrace, zstar=None, tol: float = 1e-10) -> BoundReport:
    """||z^{k+1} - z*||^2 <= ||z^k - z*||^2 for error-free runs."""
    if trace.z is not None and zstar is not None:
        zs = as_vector(zstar, "zstar")
        diff = trace.z - zs[None, :]
        dist = np.einsum("ij,ij->i", diff, diff)
    elif trace.dist_sq is not None:
        dist = trace.dist_sq
    else:
        raise ValueError("trace has neither stored iterates nor a dist_sq column")
    return BoundReport("fejer_monotonicity", "upper", dist[:-1], dist[1:], tol,
                       ks=np.arange(1, dist.size))


def check_fpr_monotone(trace: IterationTrace, tol: float = 1e-10) -> BoundReport:
    """||T z^{k+1} - z^{k+1}||^2 <= ||T z^k - z^k||^2 for error-free runs."""
    f = trace.fpr
    return BoundReport("fpr_monotonicity", "upper", f[:-1], f[1:], tol,
                       ks=np.arange(1, f.size))


def check_fpr_summability(trace: IterationTrace, schedule: RelaxationSchedule,
                          dist0_sq: float, tol: float = 1e-9) -> BoundReport:
    """Partial sums sum_{i<=k} tau_i fpr_i <= dist0^2 over executed steps."""
    steps = trace.steps
    taus = schedule.taus(steps)
    partial = np.cumsum(taus * trace.fpr[:steps])
    return BoundReport("fpr_summability", "upper",
                       np.full(steps, float(dist0_sq)), partial, tol)


def check_fpr_bound(trace: IterationTrace, schedule: RelaxationSchedule,
                    dist0_sq: float, tol: float = 1e-9) -> BoundReport:
    """fpr_k <= dist0^2 / sum_{i<=k} tau_i for every k in the trace."""
    bounds = fpr_bound_series(schedule, dist0_sq, len(trace))
    return BoundReport("fpr_bound", "upper", bounds, trace.fpr, tol)


def check_little_o_tail(trace_or_fpr, tol: float = 0.0) -> BoundReport:
    """Monotone-tail proxy for fpr_k = o(1/(k+1)).

    Asserts max_{k in [K/2, K]} (k+1) fpr_k <= max_{k in [K/4, K/2]} (k+1) fpr_k.
    """
    fpr = trace_or_fpr.fpr if isinstance(trace_or_fpr, IterationTrace) else np.asarray(trace_or_fpr)
    K = fpr.size - 1
    if K < 8:
        raise ValueError("horizon too short for the tail check")
    scaled = (np.arange(K + 1) + 1.0) * fpr
    late = float(scaled[K // 2:K + 1].max())
    early = float(scaled[K // 4:K // 2 + 1].max())
    return BoundReport("little_o_tail", "upper", np.array([early]),
                       np.array([late]), tol)


def inexact_fpr_reports(trace: IterationTrace, schedule: RelaxationSchedule,
                        dist0_sq: float, tol: float = 1e-9) -> dict:
    """Monotonicity-up-to-errors accounting for an inexact run.

    Uses the measured quantities recorded by :func:`run_km`:

    * per-step inflation  E_k = (lambda_k^2 / tau_k) ||e^k||^2 with
      fpr_{k+1} <= fpr_k + E_k,
    * summability slack   xi_k = lambda_k^2 ||e^k||^2
      + 2 lambda_k ||T z^k - z*|| ||e^k|| + 2 tau_k sqrt(fpr_k) ||e^k||
      with sum_{i<=k} tau_i fpr_i <= dist0^2 + sum_{i<=k} xi_i,
    * the resulting rate
      fpr_k <= (dist0^2 + sum_{i<=k} xi_i + sum_{i<k} Tau_i E_i) / Tau_k,
      Tau_k = sum_{i<=k} tau_i.
    """
    if not trace.has_column("err_norm") or not trace.has_column("op_dist"):
        raise ValueError("trace was not recorded with errors and a reference point")
    n = len(trace)
    steps = trace.steps
    lam = trace.lam[:steps]
    tau = lam * (1.0 - lam)
    if np.any(tau <= 0.0):
        raise UnsupportedScheduleError("inexact accounting needs tau_k > 0")
    e = trace.column("err_norm")[:steps]
    opd = trace.column("op_dist")[:steps]
    fpr = trace.fpr

    E = (lam ** 2 / tau) * e ** 2
    per_step = BoundReport("fpr_monotone_up_to_errors", "upper",
                           fpr[:steps] + E, fpr[1:], tol,
                           ks=np.arange(1, n))

    xi = lam ** 2 * e ** 2 + 2.0 * lam * opd * e + 2.0 * tau * np.sqrt(fpr[:steps]) * e
    cum_xi = np.cumsum(xi)  # index k: sum_{i<=k}, valid for executed steps k < steps
    summ = BoundReport("fpr_summability_up_to_errors", "upper",
                       dist0_sq + cum_xi,
                       np.cumsum(tau * fpr[:steps]), tol)

    # the telescoped sums only cover executed steps, so the rate bound is
    # reported for k = 0..steps-1
    Tau = np.cumsum(tau)
    lagged = np.concatenate([[0.0], np.cumsum(Tau[:-1] * E[:-1])])  # sum_{i<k}
    bound = (dist0_sq + cum_xi + lagged) / Tau
    rate = BoundReport("inexact_fpr_bound", "upper", bound, fpr[:steps], tol)
    return {"per_step": per_step, "summability": summ, "rate": rate}
