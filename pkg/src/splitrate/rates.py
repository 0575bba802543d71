"""Executable rate bounds.

Verifiers for the summable-sequence convergence lemma (four clauses), the
ergodic / nonergodic objective-error bands of the relaxed reflection
composition, the forward-backward bounds, the per-iteration fundamental
inequalities tying objective error to the fixed-point residual, and a
log-log decay-exponent fit used by the lower-bound reproductions.

Every bound here is a pure function of (certificate, schedule, k); infinite
sums are replaced by horizon partial sums only where that weakens the
asserted side, so every assertion stays sound at finite horizon.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .km import IterationTrace, RelaxationSchedule
from .report import BoundReport
from .splitting import FBSConfig, SolutionCertificate


# ---------------------------------------------------------------------------
# summable-sequence lemma
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SequenceCheck:
    """Inputs for one clause of the summable-sequence lemma.

    a: nonnegative sequence; lam: nonnegative weights; e: nonnegative error
    terms (clauses 2-3); b: telescoping witnesses (clause 3); part in 1..4.
    """

    a: np.ndarray
    lam: np.ndarray
    part: int
    e: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        lam = np.asarray(self.lam, dtype=float)
        if a.shape != lam.shape:
            raise ValueError("a and lam must have the same length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(lam))):
            raise ValueError("sequences must be finite")
        if np.any(a < 0) or np.any(lam < 0):
            raise ValueError("a and lam must be nonnegative")
        if self.part not in (1, 2, 3, 4):
            raise ValueError("part must be one of 1..4")
        for name in ("e", "b"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float)
                if v.shape != a.shape:
                    raise ValueError(f"{name} must match the length of a")
                if np.any(v < 0) or not np.all(np.isfinite(v)):
                    raise ValueError(f"{name} must be finite and nonnegative")
                object.__setattr__(self, name, v)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "lam", lam)


def running_min(a) -> np.ndarray:
    """Best-so-far transform; monotonically nonincreasing by construction."""
    return np.minimum.accumulate(np.asarray(a, dtype=float))


def verify_summable_lemma(check: SequenceCheck, tol: float = 1e-12) -> BoundReport:
    """Check the asserted clause over the finite horizon.

    Part 1 (monotone a):    a_k <= (sum_{i<=H} lam_i a_i) / Lambda_k;
    Part 2 (a_{k+1} <= a_k + e_k):
                            a_k <= (sum lam a + sum Lambda_i e_i) / Lambda_k;
    Part 3 (lam_k a_k <= b_k - b_{k+1} + e_k):
                            sum_{i<=k} (i+1) lam_i a_i
                              <= sum_{i<=k} b_i + sum_{i<=k} (i+1) e_i;
    Part 4: part-1 bound with a replaced by its running minimum.

    Horizon sums appear only on the weaker (upper) side; nonnegativity of
    the dropped tail terms keeps each inequality valid.
    """
    a, lam = check.a, check.lam
    n = a.size
    Lam = np.cumsum(lam)
    if np.any(Lam <= 0):
        raise ValueError("weights must give strictly positive partial sums")
    total = float(np.sum(lam * a))

    if check.part == 1:
        if np.any(np.diff(a) > tol):
            raise ValueError("part 1 requires a monotonically nonincreasing sequence")
        return BoundReport("summable_part1", "upper", total / Lam, a, tol)

    if check.part == 2:
        e = check.e if check.e is not None else np.zeros(n)
        if np.any(a[1:] > a[:-1] + e[:-1] + tol):
            raise ValueError("part 2 requires a_{k+1} <= a_k + e_k")
        bound = (total + float(np.sum(Lam * e))) / Lam
        return BoundReport("summable_part2", "upper", bound, a, tol)

    if check.part == 3:
        if check.b is None:
            raise ValueError("part 3 needs telescoping witnesses b")
        b = check.b
        e = check.e if check.e is not None else np.zeros(n)
        bnext = np.concatenate([b[1:], [0.0]])  # b_{H+1} >= 0 weakens nothing
        if np.any(lam * a > b - bnext + e + tol):
            raise ValueError("part 3 requires lam_k a_k <= b_k - b_{k+1} + e_k")
        w = np.arange(n, dtype=float) + 1.0
        lhs = np.cumsum(w * lam * a)
        rhs = np.cumsum(b) + np.cumsum(w * e)
        return BoundReport("summable_part3", "upper", rhs, lhs, tol)

    best = running_min(a)
    return BoundReport("summable_part4", "upper", total / Lam, best, tol)


# ---------------------------------------------------------------------------
# objective-error bands
# ---------------------------------------------------------------------------


def ergodic_objective_bounds(cert: SolutionCertificate, Lam_k: float):
    """(lower, upper) band for the ergodic pair objective error at weight sum
    Lambda_k: [-2 dist0 ||z*-x*|| / (gamma Lambda_k), ||z0-x*||^2 / (4 gamma Lambda_k)]."""
    if not (Lam_k > 0):
        raise ValueError("Lambda_k must be positive")
    g = cert.gamma
    lower = -2.0 * cert.dist0 * cert.gap_norm / (g * Lam_k)
    upper = cert.dist0_x ** 2 / (4.0 * g * Lam_k)
    return lower, upper


def ergodic_feasibility_bound(cert: SolutionCertificate, Lam_k: float) -> float:
    """||xbar_g - xbar_f|| <= 2 dist0 / Lambda_k."""
    if not (Lam_k > 0):
        raise ValueError("Lambda_k must be positive")
    return 2.0 * cert.dist0 / Lam_k


def nonergodic_objective_bounds(cert: SolutionCertificate, tau_lb: float, k: int):
    """(lower, upper) band for the last-iterate pair objective error:
    [-dist0 ||z*-x*|| / (2 gamma sqrt(tau (k+1))),
     (dist0 + ||z*-x*||) dist0 / (2 gamma sqrt(tau (k+1)))]."""
    if not (tau_lb > 0):
        raise ValueError("tau lower bound must be positive")
    g = cert.gamma
    root = np.sqrt(tau_lb * (k + 1.0))
    lower = -cert.dist0 * cert.gap_norm / (2.0 * g * root)
    upper = (cert.dist0 + cert.gap_norm) * cert.dist0 / (2.0 * g * root)
    return lower, upper


def nonergodic_objective_bounds_from_fpr(cert: SolutionCertificate, fpr_k: float):
    """Per-iterate band recomputed from the measured residual.

    The k-indexed band is (bounded quantity) x sqrt(residual); substituting
    the measured fpr_k for its rate bound gives the tighter per-iterate pair
    [-||z*-x*|| sqrt(fpr_k) / (2 gamma), (dist0 + ||z*-x*||) sqrt(fpr_k) / (2 gamma)].
    """
    g = cert.gamma
    r = np.sqrt(np.maximum(fpr_k, 0.0))
    lower = -cert.gap_norm * r / (2.0 * g)
    upper = (cert.dist0 + cert.gap_norm) * r / (2.0 * g)
    return lower, upper


def lipschitz_objective_bounds(cert: SolutionCertificate, L: float, mode: str,
                               k: Optional[int] = None,
                               Lam_k: Optional[float] = None,
                               tau_lb: Optional[float] = None) -> float:
    """Upper bound when one summand is L-Lipschitz on the relevant ball and
    both functions are evaluated at the same point.

    mode="ergodic":    ||z0-x*||^2 / (4 gamma Lambda_k) + 2 L dist0 / Lambda_k;
    mode="nonergodic": (dist0 + ||z*-x*|| + gamma L) dist0
                       / (2 gamma sqrt(tau (k+1))).
    """
    if L < 0:
        raise ValueError("Lipschitz modulus must be nonnegative")
    g = cert.gamma
    if mode == "ergodic":
        if Lam_k is None or not (Lam_k > 0):
            raise ValueError("ergodic mode needs Lambda_k > 0")
        return cert.dist0_x ** 2 / (4.0 * g * Lam_k) + 2.0 * L * cert.dist0 / Lam_k
    if mode == "nonergodic":
        if k is None or tau_lb is None or not (tau_lb > 0):
            raise ValueError("nonergodic mode needs k and tau_lb > 0")
        root = np.sqrt(tau_lb * (k + 1.0))
        return (cert.dist0 + cert.gap_norm + g * L) * cert.dist0 / (2.0 * g * root)
    raise ValueError(f"unknown mode {mode!r}")


def fbs_bounds(dist0_x_sq: float, gamma: float, beta: float, k: int):
    """(objective bound, residual bound) for the forward-backward iteration.

    Objective:  h(z^{k+1}) - h* <= C * dist0_x^2 / (k+1) with C = 1/(2 gamma)
    for gamma <= beta and the averaged-map-corrected constant otherwise.
    Residual:   ||T z^{k+1} - z^{k+1}||^2 <= C * dist0_x^2
                / ((1/gamma - 1/(2 beta)) (k+1)^2).
    """
    cfg = FBSConfig(gamma=gamma, beta=beta)
    if gamma <= beta:
        C = 1.0 / (2.0 * gamma)
    else:
        a = cfg.alpha
        C = 1.0 / (2.0 * gamma) + (1.0 / (2.0 * beta) - 1.0 / (2.0 * gamma)) * a / (1.0 - a)
    denom = 1.0 / gamma - (0.0 if np.isinf(beta) else 1.0 / (2.0 * beta))
    obj = C * dist0_x_sq / (k + 1.0)
    fpr = C * dist0_x_sq / (denom * (k + 1.0) ** 2)
    return obj, fpr


def one_dim_drs_fpr_bound(dist0_sq: float, m: int) -> float:
    """Scalar half-averaged runs: averaged-map residual at iterate m >= 1 is
    bounded by |z0 - z*|^2 / (2 m^2)."""
    if m < 1:
        raise ValueError("the improved scalar bound starts at iterate 1")
    return dist0_sq / (2.0 * m ** 2)


# ---------------------------------------------------------------------------
# fundamental inequalities
# ---------------------------------------------------------------------------


def check_fundamental_inequalities(trace: IterationTrace,
                                   cert: SolutionCertificate, gamma: float,
                                   tol: float = 1e-9) -> dict:
    """Per-iteration upper / lower fundamental inequalities.

    Upper (telescoping):  4 gamma lam_k (f(x_f^k) + g(x_g^k) - obj*)
        <= ||z^k - x*||^2 - ||z^{k+1} - x*||^2 + (1 - 1/lam_k) ||z^{k+1} - z^k||^2.
    Lower (subgradient):  f(x_f^k) + g(x_g^k) - obj*
        >= <x_g^k - x_f^k, z* - x*> / gamma.

    Needs a trace recorded with iterates and objective columns.
    """
    if trace.z is None or trace.x_g is None:
        raise ValueError("trace must be recorded with record_iterates=True")
    steps = trace.steps
    lam = trace.lam[:steps]
    obj_err = (trace.column("obj_f") + trace.column("obj_g") - cert.obj_star)

    dzx = trace.z - cert.xstar[None, :]
    dist_x = np.einsum("ij,ij->i", dzx, dzx)
    dz = trace.z[1:] - trace.z[:-1]
    step_sq = np.einsum("ij,ij->i", dz, dz)

    lhs = 4.0 * gamma * lam * obj_err[:steps]
    rhs = dist_x[:steps] - dist_x[1:] + (1.0 - 1.0 / lam) * step_sq
    upper = BoundReport("fundamental_upper", "upper", rhs, lhs, tol)

    gap_ip = (trace.x_g - trace.x_f) @ (cert.zstar - cert.xstar)
    lower = BoundReport("fundamental_lower", "lower", gap_ip / gamma, obj_err, tol)
    return {"upper": upper, "lower": lower}


# ---------------------------------------------------------------------------
# empirical decay exponents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(series) against log(k+1)."""

    exponent: float
    window: tuple
    residual: float

    def __post_init__(self):
        lo, hi = self.window
        if lo < 1 or hi < lo:
            raise ValueError("fit window must satisfy 1 <= k_lo <= k_hi")


def fit_decay_exponent(series, window) -> RateFit:
    """Fit series_k ~ C (k+1)^p over k in [k_lo, k_hi]; returns p."""
    s = np.asarray(series, dtype=float)
    lo, hi = int(window[0]), int(window[1])
    if lo < 1 or hi < lo:
        raise ValueError("fit window must satisfy 1 <= k_lo <= k_hi")
    if hi >= s.size:
        raise ValueError("fit window exceeds the series length")
    seg = s[lo:hi + 1]
    if np.any(seg <= 0):
        raise ValueError("series must be strictly positive on the fit window")
    x = np.log(np.arange(lo, hi + 1, dtype=float) + 1.0)
    y = np.log(seg)
    (slope, intercept), res = np.polyfit(x, y, 1, full=True)[:2]
    residual = float(res[0]) if len(res) else 0.0
    return RateFit(float(slope), (lo, hi), residual)
