"""Config-driven experiment runner and artifact writer.

Configs are JSON (validated by pydantic models); a run produces a trace CSV
with the fixed column schema

    k, fpr, dist_sq, obj_err, obj_err_ergodic, feas_gap,
    bound_fpr, bound_obj_lo, bound_obj_hi, bound_feas

(absent quantities are emitted as empty fields), a JSON bound report with
per-check {bound, measured, margin, pass}, and gnuplot-ready two-column
plot data.  Identical config + seed gives byte-identical artifacts.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator

from . import admm as admm_mod
from . import problems as prb
from .core import SolverFailureError
from .km import (RelaxationSchedule, UnsupportedScheduleError, check_fejer,
                 check_fpr_bound, check_fpr_monotone, check_fpr_summability,
                 fpr_bound_series)
from .rates import fbs_bounds, one_dim_drs_fpr_bound
from .report import BoundReport
from .splitting import FBSConfig, run_fbs, run_ppa, run_relaxed_prs

ALGORITHMS = ("prs", "drs", "fbs", "ppa", "admm", "dadmm", "feasibility")

#: fixed trace CSV schema
CSV_COLUMNS = ("k", "fpr", "dist_sq", "obj_err", "obj_err_ergodic",
               "feas_gap", "bound_fpr", "bound_obj_lo", "bound_obj_hi",
               "bound_feas")

OUTPUT_ROOT_ENV = "SPLITRATE_OUTPUT_ROOT"


class ScheduleSpec(BaseModel):
    kind: Literal["constant", "list", "polynomial"] = "constant"
    value: float = 0.5
    values: Optional[List[float]] = None
    power: Optional[float] = None

    def build(self) -> RelaxationSchedule:
        if self.kind == "constant":
            return RelaxationSchedule.constant(self.value)
        if self.kind == "list":
            if not self.values:
                raise ValueError("list schedule needs values")
            return RelaxationSchedule.from_values(self.values)
        if self.power is None:
            raise ValueError("polynomial schedule needs a power")
        return RelaxationSchedule.polynomial(self.power)


class Z0Spec(BaseModel):
    kind: Literal["default", "explicit", "random"] = "default"
    values: Optional[List[float]] = None
    seed: int = 0
    dim: Optional[int] = None
    scale: float = 1.0

    def build(self, default: Optional[np.ndarray]) -> np.ndarray:
        if self.kind == "explicit":
            if not self.values:
                raise ValueError("explicit start point needs values")
            return np.asarray(self.values, dtype=float)
        if self.kind == "random":
            dim = self.dim if self.dim is not None else \
                (default.size if default is not None else None)
            if dim is None:
                raise ValueError("random start point needs a dimension")
            rng = np.random.default_rng(self.seed)
            return self.scale * rng.standard_normal(dim)
        if default is None:
            raise ValueError("problem has no default start point")
        return np.asarray(default, dtype=float)


class ExperimentConfig(BaseModel):
    """One experiment: problem, algorithm, parameters, checks."""

    problem: str
    params: Dict[str, Any] = Field(default_factory=dict)
    algorithm: Literal["prs", "drs", "fbs", "ppa", "admm", "dadmm",
                       "feasibility"] = "drs"
    gamma: Optional[float] = None       # default: problem default
    schedule: ScheduleSpec = Field(default_factory=ScheduleSpec)
    z0: Z0Spec = Field(default_factory=Z0Spec)
    iters: Optional[int] = Field(default=None, ge=1)
    checks: List[str] = Field(default_factory=lambda: ["auto"])
    seed: int = 0

    @field_validator("problem")
    @classmethod
    def _known_problem(cls, v):
        if v not in prb.PROBLEM_BUILDERS:
            known = ", ".join(sorted(prb.PROBLEM_BUILDERS))
            raise ValueError(f"unknown problem {v!r}; known problems: {known}")
        return v


def load_config(path) -> ExperimentConfig:
    """Parse and validate a JSON config file."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    return ExperimentConfig.model_validate(raw)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _empty(n):
    return np.full(n, np.nan)


def _check_summaries(reports) -> list:
    out = []
    for rep in reports:
        out.append(rep.summary())
    return out


def _want(checks: List[str], name: str) -> bool:
    return "auto" in checks or name in checks


def _run_splitting(bundle, config, gamma, schedule, z0, iters):
    """prs / drs dispatch: relaxed reflection-composition trace + checks."""
    f, g = bundle.f, bundle.g
    if config.algorithm == "drs":
        schedule = RelaxationSchedule.constant(0.5)
    cert = None
    notes = []
    if bundle.certificate is not None:
        try:
            cert = bundle.certificate(gamma, z0)
        except Exception as exc:  # certificate construction is best-effort
            notes.append(f"no certificate: {exc}")
    trace = run_relaxed_prs(f, g, gamma, schedule, z0, iters,
                            zstar=None if cert is None else cert.zstar)
    n = len(trace)
    rows = {
        "k": np.arange(n), "fpr": trace.fpr,
        "dist_sq": trace.dist_sq if trace.dist_sq is not None else _empty(n),
        "obj_err": _empty(n), "obj_err_ergodic": _empty(n),
        "feas_gap": trace.column("erg_gap"), "bound_fpr": _empty(n),
        "bound_obj_lo": _empty(n), "bound_obj_hi": _empty(n),
        "bound_feas": _empty(n),
    }
    reports = []
    if cert is not None:
        Lam = np.cumsum(trace.lam)
        rows["obj_err"] = (trace.column("obj_f") + trace.column("obj_g")
                           - cert.obj_star)
        rows["obj_err_ergodic"] = (trace.column("erg_obj_f")
                                   + trace.column("erg_obj_g") - cert.obj_star)
        rows["bound_feas"] = 2.0 * cert.dist0 / Lam
        checks = config.checks
        if _want(checks, "fejer"):
            reports.append(check_fejer(trace))
        try:
            bounds = fpr_bound_series(schedule, cert.dist0_sq, n)
            rows["bound_fpr"] = bounds
            if _want(checks, "fpr_bound"):
                reports.append(check_fpr_bound(trace, schedule, cert.dist0_sq))
            if _want(checks, "fpr_monotone"):
                reports.append(check_fpr_monotone(trace))
            if _want(checks, "fpr_summability"):
                reports.append(check_fpr_summability(trace, schedule,
                                                     cert.dist0_sq))
        except UnsupportedScheduleError:
            notes.append("fpr bound skipped: schedule has tau = 0")
        taus = schedule.taus(iters)
        tau_lb = float(taus.min())
        ks = np.arange(n)
        if tau_lb > 0:
            root = np.sqrt(tau_lb * (ks + 1.0))
            lo = -cert.dist0 * cert.gap_norm / (2.0 * gamma * root)
            hi = (cert.dist0 + cert.gap_norm) * cert.dist0 / (2.0 * gamma * root)
            rows["bound_obj_lo"], rows["bound_obj_hi"] = lo, hi
            if _want(checks, "nonergodic_band"):
                reports.append(BoundReport("nonergodic_upper", "upper", hi,
                                           rows["obj_err"], 1e-9, ks=ks))
                reports.append(BoundReport("nonergodic_lower", "lower", lo,
                                           rows["obj_err"], 1e-9, ks=ks))
        if _want(checks, "ergodic_band"):
            upper = cert.dist0_x ** 2 / (4.0 * gamma * Lam)
            lower = -2.0 * cert.dist0 * cert.gap_norm / (gamma * Lam)
            reports.append(BoundReport("ergodic_upper", "upper", upper,
                                       rows["obj_err_ergodic"], 1e-9, ks=ks))
            reports.append(BoundReport("ergodic_lower", "lower", lower,
                                       rows["obj_err_ergodic"], 1e-9, ks=ks))
        if _want(checks, "feasibility_bound"):
            reports.append(BoundReport("ergodic_gap_bound", "upper",
                                       rows["bound_feas"],
                                       trace.column("erg_gap"), 1e-9, ks=ks))
        if (z0.size == 1 and schedule.kind == "constant"
                and schedule.value == 0.5 and _want(checks, "one_dim")):
            ms = np.arange(1, n)
            bound = np.array([one_dim_drs_fpr_bound(cert.dist0_sq, int(m))
                              for m in ms])
            reports.append(BoundReport("one_dim_fpr_bound", "upper", bound,
                                       trace.fpr[1:] / 4.0, 1e-9, ks=ms))
    return rows, reports, notes


def _run_forward_backward(bundle, config, gamma, z0, iters):
    f, g = bundle.f, bundle.g
    if config.algorithm == "ppa":
        beta = math.inf
        trace = run_ppa(f, gamma, z0, iters)
    else:
        beta = bundle.beta
        if beta is None:
            raise ValueError(f"problem {bundle.name!r} has no smoothness modulus")
        trace = run_fbs(f, g, FBSConfig(gamma, beta), z0, iters)
    n = len(trace)
    notes = []
    xstar = None
    if bundle.certificate is not None:
        try:
            cert = bundle.certificate(gamma, z0)
            xstar = cert.xstar
            obj_star = cert.obj_star
        except Exception as exc:
            notes.append(f"no certificate: {exc}")
    rows = {"k": np.arange(n), "fpr": trace.fpr, "dist_sq": _empty(n),
            "obj_err": _empty(n), "obj_err_ergodic": _empty(n),
            "feas_gap": _empty(n), "bound_fpr": _empty(n),
            "bound_obj_lo": _empty(n), "bound_obj_hi": _empty(n),
            "bound_feas": _empty(n)}
    reports = []
    if xstar is not None:
        d0x = float(np.sum((z0 - xstar) ** 2))
        obj_err = trace.column("obj") - obj_star
        rows["obj_err"] = obj_err
        rows["dist_sq"] = np.array(
            [float(np.sum((z0 - xstar) ** 2))] + [np.nan] * (n - 1)) \
            if trace.dist_sq is None else trace.dist_sq
        ks = np.arange(n - 1)
        obj_bound = np.array([fbs_bounds(d0x, gamma, beta, int(k))[0] for k in ks])
        fpr_bound = np.array([fbs_bounds(d0x, gamma, beta, int(k))[1] for k in ks])
        rows["bound_obj_hi"] = np.concatenate([[np.nan], obj_bound])
        rows["bound_obj_lo"] = np.zeros(n)
        rows["bound_fpr"] = np.concatenate([[np.nan], fpr_bound])
        checks = config.checks
        if _want(checks, "objective_bound"):
            reports.append(BoundReport("objective_bound", "upper", obj_bound,
                                       obj_err[1:], 1e-9,
                                       ks=np.arange(1, n)))
        if _want(checks, "fpr_bound"):
            reports.append(BoundReport("fpr_bound", "upper", fpr_bound,
                                       trace.fpr[1:], 1e-9, ks=np.arange(1, n)))
        if _want(checks, "objective_monotone"):
            reports.append(BoundReport("objective_monotone", "upper",
                                       trace.column("obj")[:-1],
                                       trace.column("obj")[1:], 1e-10))
    return rows, reports, notes


def _run_admm(bundle, config, gamma, schedule, z0, iters):
    lcp = bundle.lcp
    trace = admm_mod.run_relaxed_admm(lcp, gamma, schedule, z0, iters)
    n = len(trace)
    notes = []
    cert = None
    if bundle.certificate is not None:
        try:
            cert = bundle.certificate(gamma, z0)
        except Exception as exc:
            notes.append(f"no certificate: {exc}")
    fpr = 4.0 * np.einsum("ij,ij->i", trace.w_df - trace.w_dg,
                          trace.w_df - trace.w_dg)
    rows = {"k": np.arange(n), "fpr": fpr, "dist_sq": _empty(n),
            "obj_err": _empty(n), "obj_err_ergodic": _empty(n),
            "feas_gap": np.sqrt(trace.residual_sq), "bound_fpr": _empty(n),
            "bound_obj_lo": _empty(n), "bound_obj_hi": _empty(n),
            "bound_feas": _empty(n)}
    reports = [admm_mod.check_step_residual_identity(trace, tol=1e-10)]
    if cert is not None:
        ks = np.arange(n)
        dz = trace.z - cert.zstar[None, :]
        rows["dist_sq"] = np.einsum("ij,ij->i", dz, dz)
        rows["obj_err"] = trace.obj - cert.obj_star
        rows["obj_err_ergodic"] = trace.erg_obj - cert.obj_star
        taus = schedule.taus(iters)
        tau_lb = float(taus.min())
        checks = config.checks
        if tau_lb > 0:
            feas_b = cert.dist0_sq / (4.0 * gamma ** 2 * tau_lb * (ks + 1.0))
            rows["bound_feas"] = np.sqrt(feas_b)
            root = np.sqrt(tau_lb * (ks + 1.0))
            lo = -cert.dist0 * cert.wstar_norm / (2.0 * root)
            hi = cert.dist0 * (cert.dist0 + cert.wstar_norm) / (2.0 * gamma * root)
            rows["bound_obj_lo"], rows["bound_obj_hi"] = lo, hi
            if _want(checks, "feasibility_band"):
                reports.append(BoundReport("feasibility_nonergodic", "upper",
                                           feas_b, trace.residual_sq, 1e-9, ks=ks))
            if _want(checks, "primal_band"):
                reports.append(BoundReport("primal_nonergodic_upper", "upper",
                                           hi, rows["obj_err"], 1e-9, ks=ks))
                reports.append(BoundReport("primal_nonergodic_lower", "lower",
                                           lo, rows["obj_err"], 1e-9, ks=ks))
        if _want(checks, "ergodic_feasibility"):
            Lam = np.cumsum(trace.lam)
            derived = cert.dist0_sq / (gamma ** 2 * Lam ** 2)
            reports.append(BoundReport("feasibility_ergodic_derived", "upper",
                                       derived, trace.erg_residual_sq, 1e-9, ks=ks))
        if _want(checks, "fundamental"):
            for rep in admm_mod.check_admm_fundamental(trace, cert, gamma).values():
                reports.append(rep)
    return rows, reports, notes


def _run_distributed(bundle, config, gamma, iters):
    problem = bundle.distributed
    trace = admm_mod.run_distributed_admm(problem, gamma, iters)
    n = len(trace)
    rows = {"k": np.arange(n), "fpr": _empty(n), "dist_sq": _empty(n),
            "obj_err": _empty(n), "obj_err_ergodic": _empty(n),
            "feas_gap": np.sqrt(trace.disagreement_sq), "bound_fpr": _empty(n),
            "bound_obj_lo": _empty(n), "bound_obj_hi": _empty(n),
            "bound_feas": _empty(n)}
    reports, notes = [], []
    lcp = admm_mod.distributed_edge_problem(problem)
    gamma_gen = admm_mod.DISTRIBUTED_PENALTY_FACTOR * gamma
    try:
        cert = admm_mod.dual_reference(lcp, gamma_gen, np.zeros(lcp.dim_dual),
                                       residual_tol=1e-10)
    except SolverFailureError as exc:
        notes.append(f"no certificate: {exc}")
        return rows, reports, notes
    obj = trace.obj - cert.obj_star
    rows["obj_err"] = obj
    ks = np.arange(n - 1)
    root = np.sqrt(0.25 * (ks + 1.0))
    lo = -cert.dist0 * cert.wstar_norm / (2.0 * root)
    hi = cert.dist0 * (cert.dist0 + cert.wstar_norm) / (2.0 * gamma_gen * root)
    rows["bound_obj_lo"] = np.concatenate([[np.nan], lo])
    rows["bound_obj_hi"] = np.concatenate([[np.nan], hi])
    dis_b = cert.dist0_sq / (4.0 * gamma_gen ** 2 * 0.25 * (ks + 1.0))
    rows["bound_feas"] = np.concatenate([[np.nan], np.sqrt(dis_b)])
    if _want(config.checks, "objective_band"):
        reports.append(BoundReport("objective_band_upper", "upper", hi,
                                   obj[1:], 1e-9))
        reports.append(BoundReport("objective_band_lower", "lower", lo,
                                   obj[1:], 1e-9))
    if _want(config.checks, "disagreement_band"):
        reports.append(BoundReport("disagreement_band", "upper", dis_b,
                                   trace.disagreement_sq[1:], 1e-9))
    return rows, reports, notes


def _run_feasibility(bundle, config, schedule, z0, iters):
    from .feasibility import run_feasibility

    pair = bundle.pair
    cert = None
    notes = []
    if bundle.certificate is not None:
        try:
            cert = bundle.certificate(1.0, z0)
        except Exception as exc:
            notes.append(f"no certificate: {exc}")
    trace = run_feasibility(pair, schedule, z0, iters,
                            zstar=None if cert is None else cert.zstar)
    n = len(trace)
    gap = np.maximum(trace.column("dist_cg_xf"), trace.column("dist_cf_xg"))
    rows = {"k": np.arange(n), "fpr": trace.fpr,
            "dist_sq": trace.dist_sq if trace.dist_sq is not None else _empty(n),
            "obj_err": _empty(n), "obj_err_ergodic": _empty(n),
            "feas_gap": gap, "bound_fpr": _empty(n),
            "bound_obj_lo": _empty(n), "bound_obj_hi": _empty(n),
            "bound_feas": _empty(n)}
    reports = []
    pair_gap = trace.column("gap")
    reports.append(BoundReport("gap_dominates_distances", "upper", pair_gap,
                               gap, 1e-12))
    if cert is not None:
        Lam = np.cumsum(trace.lam)
        rows["bound_feas"] = 2.0 * cert.dist0 / Lam
        if _want(config.checks, "ergodic_gap_bound"):
            reports.append(BoundReport("ergodic_gap_bound", "upper",
                                       rows["bound_feas"],
                                       trace.column("erg_gap"), 1e-9))
        if _want(config.checks, "ergodic_membership"):
            erg_dist = np.maximum(trace.column("erg_member_f"),
                                  trace.column("erg_member_g"))
            reports.append(BoundReport("ergodic_membership", "upper",
                                       np.full(n, 1e-10), erg_dist, 0.0))
    return rows, reports, notes


def run_experiment(config: ExperimentConfig,
                   output_dir: Optional[str] = None) -> dict:
    """Run one configured experiment and write its artifact set.

    Returns the report dict; ``exit_code`` is 0 iff every check passed and
    no solver failure occurred.
    """
    bundle = prb.build_problem(config.problem, config.params)
    if config.algorithm not in bundle.algorithms:
        raise ValueError(
            f"problem {config.problem!r} does not support algorithm "
            f"{config.algorithm!r} (supports: {', '.join(bundle.algorithms)})")
    if config.gamma is not None:
        gamma = config.gamma
    elif config.algorithm == "fbs" and bundle.beta is not None:
        gamma = bundle.beta  # the largest step with the plain rate constant
    else:
        gamma = bundle.default_gamma
    iters = config.iters if config.iters is not None else bundle.default_iters
    schedule = config.schedule.build()
    z0 = config.z0.build(bundle.default_z0)

    solver_failure = None
    try:
        if config.algorithm in ("prs", "drs"):
            rows, reports, notes = _run_splitting(bundle, config, gamma,
                                                  schedule, z0, iters)
        elif config.algorithm in ("fbs", "ppa"):
            rows, reports, notes = _run_forward_backward(bundle, config,
                                                         gamma, z0, iters)
        elif config.algorithm == "admm":
            rows, reports, notes = _run_admm(bundle, config, gamma, schedule,
                                             z0, iters)
        elif config.algorithm == "dadmm":
            rows, reports, notes = _run_distributed(bundle, config, gamma, iters)
        else:
            rows, reports, notes = _run_feasibility(bundle, config, schedule,
                                                    z0, iters)
    except SolverFailureError as exc:
        solver_failure = str(exc)
        rows, reports, notes = None, [], [f"solver failure: {exc}"]

    checks = _check_summaries(reports)
    passed = all(c["passed"] for c in checks) and solver_failure is None
    report = {
        "config": config.model_dump(),
        "rng": {"kind": "pcg64", "seed": config.seed},
        "passed": passed,
        "exit_code": 0 if passed else 1,
        "solver_failure": solver_failure,
        "checks": checks,
        "notes": notes,
        "artifacts": [],
    }

    if output_dir is not None:
        outdir = Path(output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        if rows is not None:
            csv_path = outdir / "trace.csv"
            write_trace_csv(rows, csv_path)
            report["artifacts"].append(str(csv_path))
            plot_dir = outdir / "plots"
            written, _ = emit_plot_data(rows, ["fpr", "obj_err", "feas_gap"],
                                        plot_dir)
            report["artifacts"].extend(str(p) for p in written)
        report_path = outdir / "report.json"
        report["artifacts"].append(str(report_path))
        report_path.write_text(json.dumps(report, indent=2, sort_keys=True,
                                          default=float) + "\n")
    return report


def write_trace_csv(rows: dict, path) -> None:
    """Write the fixed-schema CSV; absent quantities become empty fields."""
    n = int(np.asarray(rows["k"]).size)
    lines = [",".join(CSV_COLUMNS)]
    cols = [np.asarray(rows.get(c, np.full(n, np.nan))) for c in CSV_COLUMNS]
    for i in range(n):
        lines.append(",".join(_fmt(col[i]) for col in cols))
    Path(path).write_text("\n".join(lines) + "\n")


def emit_plot_data(rows: dict, columns, outdir) -> tuple:
    """Two-column whitespace-separated series files (k, value), one file per
    requested column; existing files are overwritten with a notice."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    k = np.asarray(rows["k"])
    written, notices = [], []
    for col in columns:
        if col not in rows:
            raise KeyError(f"no column {col!r} in the trace")
        path = outdir / f"{col}.dat"
        if path.exists():
            notices.append(f"overwriting {path}")
        vals = np.asarray(rows[col])
        lines = [f"# k {col}"]
        for i in range(k.size):
            v = vals[i]
            if isinstance(v, float) and not math.isfinite(v):
                continue
            lines.append(f"{int(k[i])} {_fmt(v)}")
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written, notices


def run_reproduction(name: str, output_dir: Optional[str] = None) -> dict:
    """Run a registry entry, optionally persisting its report."""
    from .registry import reproduce

    report = reproduce(name)
    report["exit_code"] = 0 if report["passed"] else 1
    if output_dir is not None:
        outdir = Path(output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / "report.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True,
                                   default=float) + "\n")
        report["artifacts"] = [str(path)]
    return report


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "splitrate-out"))
