"""Named problem instances with certificates.

Each builder returns a :class:`ProblemBundle` carrying the pieces the
experiment runner needs: the functions (or constrained / distributed /
set-pair problem), a default start point and step, the algorithms it can
drive, and a certificate constructor (closed form where one exists, a
reference run otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import admm as admm_mod
from .core import (BasisSubspace, IndicatorSubspace, L1Norm, Quadratic,
                   Translate, Zero)
from .counterexamples import (arbitrarily_slow_setup, dv_lower_bound_setup,
                              ppa_diag_setup, thm_optimal_fpr_setup)
from .feasibility import ConvexSetPair
from .splitting import SolutionCertificate, fixed_point_reference, make_certificate


@dataclass
class ProblemBundle:
    """Everything the runner needs to drive one named problem."""

    name: str
    algorithms: tuple
    f: object = None
    g: object = None
    beta: Optional[float] = None          # smoothness modulus of g (fbs)
    lipschitz_f: Optional[float] = None   # Lipschitz modulus of f, when known
    lcp: object = None                    # constrained problem (admm)
    distributed: object = None            # consensus problem (dadmm)
    pair: object = None                   # set pair (feasibility)
    default_gamma: float = 1.0
    default_z0: np.ndarray = None
    default_iters: int = 10 ** 4
    certificate: Optional[Callable] = None   # (gamma, z0) -> certificate
    notes: str = ""


def _lasso_data(m: int, n: int, seed: int):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((m, n))
    b = rng.standard_normal(m)
    return M, b


def _prox_grad_minimizer(f, g, tol=1e-15, cap=500000):
    """High-accuracy minimizer of f + g (g smooth) by proximal gradient."""
    beta = g.lipschitz_grad
    x = np.zeros(g.Q.shape[0] if hasattr(g, "Q") else g.weights.size)
    for _ in range(cap):
        x_new = f.prox(beta, x - beta * g.grad(x))
        if np.linalg.norm(x_new - x) <= tol * (1.0 + np.linalg.norm(x_new)):
            return x_new
        x = x_new
    return x


def smooth_pair_certificate(f, g, gamma, z0) -> SolutionCertificate:
    """Certificate for a prox-friendly f plus smooth g: the minimizer comes
    from a long proximal-gradient run, the fixed point from the first-order
    identity z* = x* + gamma grad_g(x*)."""
    xstar = _prox_grad_minimizer(f, g)
    zstar = xstar + gamma * g.grad(xstar)
    return make_certificate(f, g, gamma, z0, zstar)


def build_abs_example(eps: float = 0.1) -> ProblemBundle:
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    f, g = L1Norm(1.0), Zero()
    z0 = np.array([2.0 - eps])
    return ProblemBundle(
        name="abs_example", algorithms=("prs", "drs"), f=f, g=g,
        lipschitz_f=1.0, default_gamma=1.0, default_z0=z0, default_iters=1000,
        certificate=lambda gamma, z0_: make_certificate(f, g, gamma, z0_, np.zeros(1)),
        notes="scalar absolute value with zero partner; oscillates unrelaxed")


def build_square_feasibility() -> ProblemBundle:
    f = IndicatorSubspace(BasisSubspace([[0.0, 1.0]]))  # first coordinate zero
    g = IndicatorSubspace(BasisSubspace([[1.0, 0.0]]))  # second coordinate zero
    z0 = np.array([1.0, 1.0])
    return ProblemBundle(
        name="square_feasibility", algorithms=("prs", "drs", "feasibility"),
        f=f, g=g,
        pair=ConvexSetPair(BasisSubspace([[0.0, 1.0]]), BasisSubspace([[1.0, 0.0]])),
        default_gamma=1.0, default_z0=z0, default_iters=1000,
        certificate=lambda gamma, z0_: make_certificate(f, g, gamma, z0_, np.zeros(2)))


def build_lasso(m: int = 20, n: int = 10, rho: float = 0.5,
                seed: int = 42) -> ProblemBundle:
    M, b = _lasso_data(m, n, seed)
    g = Quadratic(M.T @ M, -M.T @ b, 0.5 * float(b @ b))
    f = L1Norm(rho)
    rng = np.random.default_rng(seed + 1)
    z0 = 2.0 * rng.standard_normal(n)
    return ProblemBundle(
        name="lasso", algorithms=("fbs", "prs", "drs"), f=f, g=g,
        beta=g.lipschitz_grad, lipschitz_f=rho * np.sqrt(n),
        default_gamma=1.0, default_z0=z0,
        certificate=lambda gamma, z0_: smooth_pair_certificate(f, g, gamma, z0_))


def build_ppa_diag(n: int = 10) -> ProblemBundle:
    from .core import DiagonalQuadratic
    f = DiagonalQuadratic(1.0 / np.arange(1, n + 1))
    z0 = np.ones(n)
    return ProblemBundle(
        name="ppa_diag", algorithms=("ppa",), f=f, g=Zero(),
        default_gamma=1.0, default_z0=z0,
        certificate=lambda gamma, z0_: make_certificate(f, Zero(), gamma, z0_, np.zeros(n)))


def build_l1_pair_1d(z0: float = 3.7) -> ProblemBundle:
    f = L1Norm(1.0)
    g = Translate(L1Norm(1.0), [1.0])
    z0v = np.array([float(z0)])
    return ProblemBundle(
        name="l1_pair_1d", algorithms=("prs", "drs"), f=f, g=g,
        lipschitz_f=1.0, default_gamma=1.0, default_z0=z0v,
        certificate=lambda gamma, z0_: fixed_point_reference(
            f, g, gamma, z0_, budget=10 ** 5, residual_tol=1e-12))


def build_dv_lower(alpha: float = 0.75, blocks: int = 10 ** 4,
                   gamma: Optional[float] = None) -> ProblemBundle:
    j = np.arange(1, blocks + 1, dtype=float)
    z0_norm = float(np.sqrt(np.sum(j ** (-2.0 * alpha))))
    if gamma is None:
        gamma = float(np.ceil(z0_norm))
    f, g, z0, spec = dv_lower_bound_setup(alpha, blocks, gamma)
    bundle = ProblemBundle(
        name="dv_lower", algorithms=("drs", "prs"), f=f, g=g, lipschitz_f=1.0,
        default_gamma=gamma, default_z0=z0,
        certificate=lambda gam, z0_: make_certificate(f, g, gam, z0_, np.zeros(z0_.size)))
    bundle.notes = f"distance/indicator pair on {blocks} rotation blocks"
    return bundle


def build_optimal_fpr(alpha: float = 0.75, blocks: int = 10 ** 5,
                      horizon: int = 300) -> ProblemBundle:
    spec, z0 = thm_optimal_fpr_setup(alpha, blocks, horizon)
    f, g = spec.indicator_pair()
    return ProblemBundle(
        name="optimal_fpr", algorithms=("drs",), f=f, g=g,
        default_gamma=1.0, default_z0=z0, default_iters=horizon,
        certificate=lambda gam, z0_: make_certificate(f, g, gam, z0_, np.zeros(z0_.size)))


def build_arbitrarily_slow(decay: float = 0.05, horizon: int = 200) -> ProblemBundle:
    h = lambda t: (t + 2.0) ** (-decay)
    h2 = lambda x: (1.0 + x) ** (1.0 / decay) - 2.0
    spec, z0, slow = arbitrarily_slow_setup(h, horizon, h2=h2)
    f, g = spec.indicator_pair()
    bundle = ProblemBundle(
        name="arbitrarily_slow", algorithms=("drs",), f=f, g=g,
        default_gamma=1.0, default_z0=z0, default_iters=horizon,
        certificate=lambda gam, z0_: make_certificate(f, g, gam, z0_, np.zeros(z0_.size)))
    bundle.notes = "norm convergence slower than any summable envelope"
    bundle.slow = slow
    return bundle


def build_ppa_lower(alpha: float = 1.0, gamma: float = 1.0,
                    blocks: int = 10 ** 5, horizon: int = 300) -> ProblemBundle:
    f, z0 = ppa_diag_setup(alpha, gamma, blocks, horizon + 1)
    return ProblemBundle(
        name="ppa_lower", algorithms=("ppa",), f=f, g=Zero(),
        default_gamma=gamma, default_z0=z0, default_iters=horizon + 1,
        certificate=lambda gam, z0_: make_certificate(f, Zero(), gam, z0_, np.zeros(z0_.size)))


def build_admm_lasso(m: int = 5, n: int = 3, rho: float = 0.3,
                     seed: int = 11) -> ProblemBundle:
    rng = np.random.default_rng(seed)
    M = np.linalg.qr(rng.standard_normal((m, n)))[0]  # orthonormal columns
    b = rng.standard_normal(m)
    lcp = admm_mod.split_auxiliary(Quadratic(np.eye(m)), L1Norm(rho), M, b)
    z0 = np.zeros(m)
    return ProblemBundle(
        name="admm_lasso", algorithms=("admm",), lcp=lcp,
        default_gamma=1.0, default_z0=z0,
        certificate=lambda gamma, z0_: admm_mod.dual_reference(
            lcp, gamma, z0_, residual_tol=1e-12))


def build_admm_lasso_1d(m_scal: float = 1.3, b_scal: float = 2.0,
                        rho: float = 0.4) -> ProblemBundle:
    lcp = admm_mod.split_auxiliary(Quadratic(np.eye(1)), L1Norm(rho),
                                   [[m_scal]], [b_scal])
    return ProblemBundle(
        name="admm_lasso_1d", algorithms=("admm",), lcp=lcp,
        default_gamma=1.0, default_z0=np.array([0.7]), default_iters=1000,
        certificate=lambda gamma, z0_: admm_mod.dual_reference(
            lcp, gamma, z0_, residual_tol=1e-12))


def build_consensus_path(n_nodes: int = 5, seed: int = 3) -> ProblemBundle:
    rng = np.random.default_rng(seed)
    graph = admm_mod.Graph(n_nodes, [(i, i + 1) for i in range(n_nodes - 1)])
    weights = rng.uniform(0.5, 2.0, n_nodes)
    targets = rng.uniform(-2.0, 2.0, n_nodes)
    locals_ = tuple(
        Quadratic(np.array([[a]]), [-a * t], 0.5 * a * t * t)
        for a, t in zip(weights, targets))
    problem = admm_mod.DistributedProblem(graph, locals_, dim=1)
    bundle = ProblemBundle(
        name="consensus_path", algorithms=("dadmm",), distributed=problem,
        default_gamma=0.5, default_z0=np.zeros(1), default_iters=400)
    bundle.consensus_target = float(np.sum(weights * targets) / np.sum(weights))
    return bundle


def build_axes_feasibility() -> ProblemBundle:
    pair = ConvexSetPair(BasisSubspace([[0.0, 1.0]]), BasisSubspace([[1.0, 0.0]]))
    f, g = pair.indicators()
    return ProblemBundle(
        name="axes_feasibility", algorithms=("feasibility", "drs", "prs"),
        f=f, g=g, pair=pair, default_gamma=1.0,
        default_z0=np.array([1.0, 1.0]), default_iters=1000,
        certificate=lambda gamma, z0_: make_certificate(f, g, gamma, z0_, np.zeros(2)))


PROBLEM_BUILDERS = {
    "abs_example": build_abs_example,
    "square_feasibility": build_square_feasibility,
    "lasso": build_lasso,
    "ppa_diag": build_ppa_diag,
    "l1_pair_1d": build_l1_pair_1d,
    "dv_lower": build_dv_lower,
    "optimal_fpr": build_optimal_fpr,
    "arbitrarily_slow": build_arbitrarily_slow,
    "ppa_lower": build_ppa_lower,
    "admm_lasso": build_admm_lasso,
    "admm_lasso_1d": build_admm_lasso_1d,
    "consensus_path": build_consensus_path,
    "axes_feasibility": build_axes_feasibility,
}


def build_problem(name: str, params: Optional[dict] = None) -> ProblemBundle:
    if name not in PROBLEM_BUILDERS:
        known = ", ".join(sorted(PROBLEM_BUILDERS))
        raise ValueError(f"unknown problem {name!r}; known problems: {known}")
    return PROBLEM_BUILDERS[name](**(params or {}))
