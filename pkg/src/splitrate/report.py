"""Bound reports: per-iteration theoretical values paired with measurements."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class BoundReport:
    """Outcome of checking a theoretical bound against measured values.

    ``kind`` selects the direction of the check:

    * ``"upper"``    -- pass iff measured <= bound + tolerance,
    * ``"lower"``    -- pass iff measured >= bound - tolerance,
    * ``"equality"`` -- pass iff |measured - bound| <= tolerance.

    ``margin`` is oriented so that the report passes iff every margin is
    >= -tolerance.
    """

    name: str
    kind: str
    bound: np.ndarray
    measured: np.ndarray
    tolerance: float
    ks: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("upper", "lower", "equality"):
            raise ValueError(f"unknown report kind {self.kind!r}")
        b = np.atleast_1d(np.asarray(self.bound, dtype=float))
        m = np.atleast_1d(np.asarray(self.measured, dtype=float))
        if b.shape != m.shape:
            raise ValueError("bound and measured shapes differ")
        ks = self.ks if self.ks is not None else np.arange(b.size)
        object.__setattr__(self, "bound", b)
        object.__setattr__(self, "measured", m)
        object.__setattr__(self, "ks", np.asarray(ks))

    @property
    def margin(self) -> np.ndarray:
        if self.kind == "upper":
            return self.bound - self.measured
        if self.kind == "lower":
            return self.measured - self.bound
        return -np.abs(self.measured - self.bound)

    @property
    def passed(self) -> bool:
        return bool(np.all(self.margin >= -self.tolerance))

    @property
    def worst_margin(self) -> float:
        return float(np.min(self.margin)) if self.margin.size else float("inf")

    @property
    def first_violation(self):
        """Index k of the first violated entry, or None."""
        bad = np.nonzero(self.margin < -self.tolerance)[0]
        return int(self.ks[bad[0]]) if bad.size else None

    def summary(self) -> dict:
        i = int(np.argmin(self.margin)) if self.margin.size else 0
        return {
            "name": self.name,
            "kind": self.kind,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "worst_margin": self.worst_margin,
            "first_violation": self.first_violation,
            "bound": float(self.bound[i]) if self.bound.size else None,
            "measured": float(self.measured[i]) if self.measured.size else None,
            "margin": self.worst_margin,
        }


def all_passed(reports) -> bool:
    """True iff every report in a dict/iterable of BoundReports passed."""
    if isinstance(reports, dict):
        reports = reports.values()
    return all(r.passed for r in reports)
