"""Frequency-marching shape recovery from far-circle scattering data.

At each wavenumber the mismatch between measured and predicted data is
reduced by normal perturbations of the current curve.  Two candidate
updates are formed from the shape Jacobian, a Gauss-Newton step and a
steepest-descent step, and a dogleg-style rule picks between them using
the bending-energy trust region: whichever in-region candidate has the
smaller data residual wins, and if neither candidate lands in the
region both are Gaussian-filtered at increasing strength (up to ten
levels) before the update is rejected outright.  The solution at one
frequency seeds the next, with the curve's stored mode count growing
proportionally to its electrical size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .acquisition import Measurements
from .curves import (
    FourierCurve,
    NormalPerturbation,
    apply_perturbation,
    circle,
    gaussian_filter,
    in_trust_region,
    reparametrize_arclength,
)
from .shape_derivative import assemble_obstacle_jacobian, boundary_traces
from .specfun import Wavenumber
from .trace import FrequencyRecord, ReconstructionTrace
from .transmission import TransmissionSystem

__all__ = [
    "TrustRegionParams",
    "ObstacleSolverConfig",
    "ObstacleIterate",
    "StepRecord",
    "FrequencyResult",
    "default_mode_policy",
    "candidate_steps",
    "select_update",
    "single_frequency_solve",
    "run_rla",
]


def default_mode_policy(k: float, k_i: float) -> int:
    """Bandlimit of the normal-perturbation updates: three modes per unit
    of the larger wavenumber, so the update can resolve oscillations on
    the scale of the shorter wavelength."""
    return max(1, int(math.floor(3.0 * max(k, k_i))))


@dataclass(frozen=True)
class TrustRegionParams:
    c: float = 2.0
    eps_f: float = 0.01


@dataclass(frozen=True)
class ObstacleSolverConfig:
    eps_r: float = 1e-5
    eps_u: float = 1e-5
    nitmax: int = 50
    ppw: float = 70.0
    trust: TrustRegionParams = TrustRegionParams()
    mode_policy: object = default_mode_policy


@dataclass(frozen=True)
class ObstacleIterate:
    curve: FourierCurve
    residual: float
    k: float
    iteration: int


@dataclass(frozen=True)
class StepRecord:
    """One inner iteration: which update was taken and why.

    Candidate residuals are recorded at the accepted filter level; a
    candidate that was never evaluated (out of region, or collapsed)
    keeps NaN.  For a rejected step both flags are False and the filter
    level is 10, the last one tried.
    """

    iteration: int
    residual: float
    outcome: str  # gn | sd | filtered-gn | filtered-sd | rejected
    filter_level: int
    step_norm: float
    gn_residual: float
    sd_residual: float
    gn_in_region: bool
    sd_in_region: bool
    rank_deficient: bool


@dataclass
class FrequencyResult:
    iterate: ObstacleIterate
    steps: list = field(default_factory=list)
    stop: str = "maxit"  # residual | update | rejected | maxit


# -- candidate construction ----------------------------------------------


def candidate_steps(jacobian: np.ndarray, residual: np.ndarray):
    """Gauss-Newton and steepest-descent updates from one Jacobian.

    The least-squares problem is solved in stacked real form with column
    equilibration; rank deficiency falls back to the smallest-norm
    solution and is flagged.  The descent direction is the real adjoint
    of the Jacobian applied to the residual, which equals the gradient
    of the half-squared data misfit up to sign.

    Returns (h_gn, h_sd, rank_deficient).
    """
    jac = np.asarray(jacobian)
    r = np.asarray(residual).ravel()
    if jac.shape[0] != r.size:
        raise ValueError("jacobian rows and residual length differ")
    jr = np.vstack([jac.real, jac.imag])
    rr = np.concatenate([r.real, r.imag])
    scale = np.linalg.norm(jr, axis=0)
    scale[scale == 0.0] = 1.0
    y, _, rank, _ = np.linalg.lstsq(jr / scale, rr, rcond=None)
    h_gn = y / scale
    h_sd = jr.T @ rr
    deficient = rank < jac.shape[1]
    return (
        NormalPerturbation.from_vector(h_gn),
        NormalPerturbation.from_vector(h_sd),
        bool(deficient),
    )


@dataclass
class _EvalState:
    system: TransmissionSystem
    densities: np.ndarray
    predicted: np.ndarray
    resid_vec: np.ndarray
    res: float


def _evaluate(curve, wn, data: Measurements, ppw: float) -> _EvalState:
    system = TransmissionSystem(curve, wn, ppw=ppw)
    dens = system.solve_densities(data.plan.directions)
    pred = system.scattered_field(dens, data.plan.receivers).T
    rv = (data.values - pred).ravel()
    return _EvalState(system, dens, pred, rv, float(np.linalg.norm(rv)))


def _build_candidate(curve, pert, k, trust: TrustRegionParams, n_curve: int):
    """Perturbed curve, arclength-refit, or None if it leaves the trust
    region (self-intersection and curve collapse count as leaving).

    The refit never extracts more modes than the curve's significant
    content: trailing zeros would just pad the representation while the
    quadratic refit cost grows with the requested count.
    """
    try:
        raw = apply_perturbation(curve, pert)
    except ValueError:
        return None
    if not in_trust_region(raw, k, trust.c, trust.eps_f):
        return None
    n_eff = min(n_curve, max(2 * raw.effective_bandwidth() + 8, 32))
    return reparametrize_arclength(raw, n_eff)


@dataclass
class _Selection:
    curve: FourierCurve
    state: _EvalState | None
    record: StepRecord


def _max_displacement(pert: NormalPerturbation, period: float) -> float:
    t = np.linspace(0.0, period, 256, endpoint=False)
    return float(np.max(np.abs(pert.evaluate(t, period))))


def select_update(
    curve,
    h_gn: NormalPerturbation,
    h_sd: NormalPerturbation,
    wn: Wavenumber,
    data: Measurements,
    config: ObstacleSolverConfig,
    n_filter: int,
    n_curve: int,
    iteration: int = 0,
    residual_in: float = np.inf,
    rank_deficient: bool = False,
) -> _Selection:
    """Dogleg selection between the two candidate updates.

    Level 0 tries the raw updates; levels 1..10 retry with both updates
    Gaussian-filtered at increasing strength.  A candidate is acceptable
    when it lies in the trust region and strictly reduces the data
    residual; at the first level with an acceptable candidate the one
    with the smaller residual is taken.  A level where candidates sit in
    the region but none improves escalates the filtering, like a
    shrinking step size.  If all levels fail the step is rejected and
    the incoming curve kept.

    The steepest-descent update is an unscaled gradient and can be
    enormous; candidates displacing the curve by more than its mean
    radius are outside any linearization and are screened without a
    forward solve.
    """
    k = wn.k_exterior
    cap = curve.length() / (2.0 * np.pi)
    seen: dict = {}

    def appraise(pert):
        key = np.asarray(pert.as_vector()).tobytes()
        if key in seen:
            return seen[key]
        if _max_displacement(pert, curve.period) > cap:
            out = (None, None)
        else:
            cand = _build_candidate(curve, pert, k, config.trust, n_curve)
            if cand is None:
                out = (None, None)
            else:
                out = (cand, _evaluate(cand, wn, data, config.ppw))
        seen[key] = out
        return out

    last = None
    for level in range(0, 11):
        if level == 0:
            pair = (h_gn, h_sd)
        else:
            pair = (
                gaussian_filter(h_gn, level, n_filter),
                gaussian_filter(h_sd, level, n_filter),
            )
        built = [appraise(h) for h in pair]
        res = [e.res if e is not None else np.nan for _, e in built]
        in_region = [c is not None for c, _ in built]
        last = (level, res, in_region)
        ok = [
            i
            for i in (0, 1)
            if in_region[i] and res[i] < residual_in
        ]
        if not ok:
            continue
        pick = min(ok, key=lambda i: res[i])
        tag = ("gn", "sd")[pick]
        if level > 0:
            tag = "filtered-" + tag
        record = StepRecord(
            iteration=iteration,
            residual=residual_in,
            outcome=tag,
            filter_level=level,
            step_norm=pair[pick].norm,
            gn_residual=res[0],
            sd_residual=res[1],
            gn_in_region=in_region[0],
            sd_in_region=in_region[1],
            rank_deficient=rank_deficient,
        )
        return _Selection(built[pick][0], built[pick][1], record)
    level, res, in_region = last
    record = StepRecord(
        iteration=iteration,
        residual=residual_in,
        outcome="rejected",
        filter_level=level,
        step_norm=np.nan,
        gn_residual=res[0],
        sd_residual=res[1],
        gn_in_region=in_region[0],
        sd_in_region=in_region[1],
        rank_deficient=rank_deficient,
    )
    return _Selection(curve, None, record)


# -- single-frequency Gauss-Newton loop ----------------------------------


def _relative(res: float, data_norm: float) -> float:
    if data_norm > 0.0:
        return res / data_norm
    return 0.0 if res == 0.0 else np.inf


def curve_mode_count(ppw: float, length: float, k: float, previous: int = 1) -> int:
    """Stored curve modes: points-per-wavelength times electrical size,
    never shrinking along a frequency march."""
    return max(previous, int(math.ceil(ppw * length * k / (2.0 * np.pi))))


def single_frequency_solve(
    curve0: FourierCurve,
    wn: Wavenumber,
    data: Measurements,
    config: ObstacleSolverConfig = ObstacleSolverConfig(),
    n_curve: int | None = None,
) -> FrequencyResult:
    """Iterate curve updates at one frequency until a stopping rule fires.

    Stops, in the order tested: relative residual below eps_r; the
    selected update rejected by the trust region at every filter level;
    the accepted update's coefficient norm below eps_u; nitmax inner
    iterations.
    """
    plan = data.plan
    k = wn.k_exterior
    if abs(plan.k - k) > 1e-12 * max(k, 1.0):
        raise ValueError(f"data plan is at k={plan.k}, solver at k={k}")
    if n_curve is None:
        n_curve = curve_mode_count(config.ppw, curve0.length(), k, curve0.half)
    n_band = config.mode_policy(k, wn.k_interior)

    curve = curve0
    if curve.speed_variation() > 1e-8:
        n_eff = min(n_curve, max(2 * curve.effective_bandwidth() + 8, 32))
        curve = reparametrize_arclength(curve, max(curve.half, n_eff))
    state = _evaluate(curve, wn, data, config.ppw)
    data_norm = data.norm

    steps: list[StepRecord] = []
    stop = "maxit"
    iterations = config.nitmax
    for it in range(1, config.nitmax + 1):
        if _relative(state.res, data_norm) < config.eps_r:
            stop, iterations = "residual", it
            break
        traces = boundary_traces(state.system, state.densities, plan.directions)
        jac = assemble_obstacle_jacobian(state.system, traces, plan, n_band)
        h_gn, h_sd, deficient = candidate_steps(jac, state.resid_vec)
        # the filter width matches the update bandlimit, so level 1 damps
        # the update's own highest modes and deeper levels sweep down
        sel = select_update(
            curve,
            h_gn,
            h_sd,
            wn,
            data,
            config,
            n_filter=n_band,
            n_curve=n_curve,
            iteration=it,
            residual_in=state.res,
            rank_deficient=deficient,
        )
        steps.append(sel.record)
        if sel.record.outcome == "rejected":
            stop, iterations = "rejected", it
            break
        curve, state = sel.curve, sel.state
        if sel.record.step_norm < config.eps_u:
            stop, iterations = "update", it
            break

    iterate = ObstacleIterate(curve, state.res, k, iterations)
    return FrequencyResult(iterate, steps, stop)


# -- frequency marching ---------------------------------------------------


def run_rla(
    datasets,
    eta: float,
    config: ObstacleSolverConfig = ObstacleSolverConfig(),
    truth: FourierCurve | None = None,
    curve0: FourierCurve | None = None,
) -> ReconstructionTrace:
    """March a unit-disk initial guess through ascending frequencies.

    ``datasets`` is a sequence of Measurements with strictly increasing
    plan frequencies.  A failure at one frequency is recorded on its
    trace entry and the march continues with the previous curve.  When
    ``truth`` is given, each record carries the relative symmetric-
    difference area of the iterate against it.
    """
    datasets = list(datasets)
    ks = [d.plan.k for d in datasets]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("dataset frequencies must be strictly increasing")

    curve = curve0 if curve0 is not None else circle(1.0)
    n_curve = curve.half
    trace = ReconstructionTrace()
    for data in datasets:
        k = data.plan.k
        wn = Wavenumber.from_contrast(k, eta)
        n_curve = curve_mode_count(config.ppw, curve.length(), k, n_curve)
        try:
            fr = single_frequency_solve(curve, wn, data, config, n_curve)
            curve = fr.iterate.curve
            rec = FrequencyRecord(
                k=k,
                iterate=curve,
                residual=fr.iterate.residual,
                rel_residual=_relative(fr.iterate.residual, data.norm),
                n_iter=fr.iterate.iteration,
                stop=fr.stop,
                steps=fr.steps,
                n_modes=n_curve,
            )
        except Exception as exc:  # keep marching with the previous curve
            rec = FrequencyRecord(
                k=k,
                iterate=curve,
                residual=np.nan,
                rel_residual=np.nan,
                n_iter=0,
                stop="error",
                failure=str(exc),
                n_modes=n_curve,
            )
        if truth is not None:
            try:
                from .metrics import eps_gamma

                rec.eps_gamma = eps_gamma(truth, rec.iterate)
            except ValueError:
                rec.eps_gamma = np.nan
        trace.records.append(rec)
    return trace
