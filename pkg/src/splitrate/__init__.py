"""Operator-splitting solvers with an executable rate-verification harness.

The library drives relaxed fixed-point iterations of nonexpansive maps
(reflection compositions, forward-backward maps, proximal points, the
dual-splitting recursion and its neighbor-local consensus variant) and
pairs every run with the convergence-rate bounds and worst-case
constructions it is supposed to obey, as executable checks.
"""

__version__ = "0.1.0"

from .core import (BasisSubspace, BlockSeparable, Custom, DiagonalQuadratic,
                   DistanceToSubspace, IndicatorAffine, IndicatorSubspace,
                   L1Norm, ProxFunction, Quadratic, Translate,
                   TriangleIterate, Zero, apply_prs_operator, prox,
                   prox_distance, refl)
from .km import (ErrorSchedule, IterationTrace, RelaxationSchedule, fpr_bound,
                 km_step, run_km)
from .report import BoundReport
from .splitting import (FBSConfig, SolutionCertificate, ergodic_average,
                        fixed_point_reference, run_drs, run_fbs, run_ppa,
                        run_prs, run_relaxed_prs)

__all__ = [
    "__version__",
    "BasisSubspace", "BlockSeparable", "Custom", "DiagonalQuadratic",
    "DistanceToSubspace", "IndicatorAffine", "IndicatorSubspace", "L1Norm",
    "ProxFunction", "Quadratic", "Translate", "TriangleIterate", "Zero",
    "apply_prs_operator", "prox", "prox_distance", "refl",
    "ErrorSchedule", "IterationTrace", "RelaxationSchedule", "fpr_bound",
    "km_step", "run_km",
    "BoundReport",
    "FBSConfig", "SolutionCertificate", "ergodic_average",
    "fixed_point_reference", "run_drs", "run_fbs", "run_ppa", "run_prs",
    "run_relaxed_prs",
]
