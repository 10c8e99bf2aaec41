"""Frequency-marching sound-speed recovery in the bandlimited sine basis.

Each wavenumber runs a Gauss-Newton loop on the volumetric forward
model: the contrast lives in a tensor-product sine basis whose
bandlimit grows with frequency, the linearized least-squares problem is
solved densely for small coefficient counts and by iterative
bidiagonalization above a threshold, and the loop stops on a small
relative residual, a small relative update, or a residual increase, in
which case the last update is reverted.  The solution at one frequency
seeds the next after zero-padding the coefficient array to the new
bandlimit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .acquisition import Measurements
from .medium_derivative import (
    assemble_medium_jacobian,
    jacobian_operator,
    total_fields,
)
from .trace import FrequencyRecord, ReconstructionTrace
from .volume import (
    SineMedium,
    VolumeGrid,
    mode_indices,
    sample_medium,
    volume_operator,
)

__all__ = [
    "MediumSolverConfig",
    "MediumStepRecord",
    "MediumFrequencyResult",
    "default_bandlimit",
    "default_grid",
    "extend_bandlimit",
    "gn_ls_step",
    "single_frequency_solve",
    "run_rla",
]


def default_bandlimit(k: float) -> int:
    """Sine-basis bandlimit at wavenumber k: two modes per unit."""
    return max(2, int(math.floor(2.0 * k)))


def default_grid(k: float) -> VolumeGrid:
    """Solver grid for wavenumber k: ten points per interior wavelength
    assuming contrast up to one, with a floor for low frequencies."""
    n = max(64, VolumeGrid.min_side_points(k, 1.0))
    return VolumeGrid(n + (-n) % 8)


@dataclass(frozen=True)
class MediumSolverConfig:
    eps_r: float = 1e-3
    eps_u: float = 1e-3
    nitmax: int = 50
    dense_threshold: int = 2000
    bandlimit_policy: object = default_bandlimit
    grid_policy: object = default_grid
    solve_tol: float = 1e-10
    lsqr_tol: float = 1e-10
    truth_subsample: int = 4


@dataclass(frozen=True)
class MediumStepRecord:
    iteration: int
    residual: float
    step_norm: float
    path: str  # dense | lsqr
    converged: bool


@dataclass
class MediumFrequencyResult:
    medium: SineMedium
    residual: float
    k: float
    iteration: int
    steps: list = field(default_factory=list)
    stop: str = "maxit"  # residual | update | increase | maxit


def extend_bandlimit(q: SineMedium, new_bandlimit: int) -> SineMedium:
    """Zero-pad the coefficient array to a larger bandlimit.

    Every existing coefficient keeps its exact value; the modes new to
    the larger basis start at zero.
    """
    if new_bandlimit < q.bandlimit:
        raise ValueError("bandlimit can only grow during a march")
    if new_bandlimit == q.bandlimit:
        return q
    index = {mn: j for j, mn in enumerate(mode_indices(new_bandlimit))}
    coeffs = np.zeros(len(index))
    for j, mn in enumerate(q.modes):
        coeffs[index[mn]] = q.coeffs[j]
    return SineMedium(new_bandlimit, coeffs)


def predict_measurements(op, q_samples, fields, plan) -> np.ndarray:
    """Scattered field at the plan's receivers from solved total fields,
    one row per incident direction."""
    rec = op.receiver_matrix(plan.receivers)
    n_dirs = fields.shape[2]
    out = np.empty((n_dirs, plan.n_receivers), dtype=complex)
    for j in range(n_dirs):
        out[j] = rec @ (q_samples * fields[:, :, j]).ravel()
    return out


def gn_ls_step(
    op,
    q: SineMedium,
    data: Measurements,
    config: MediumSolverConfig = MediumSolverConfig(),
    q_samples: np.ndarray | None = None,
    fields: np.ndarray | None = None,
    pred: np.ndarray | None = None,
):
    """One linearized least-squares update in the current sine basis.

    Solves min ||J c - r|| over real coefficients c, densely (orthogonal
    factorization with column equilibration) when the coefficient count
    is at most config.dense_threshold, otherwise by LSQR on the exact
    Jacobian appliers.  Returns (delta_q, diagnostics); an unconverged
    iterative solve is flagged in the diagnostics but the step is still
    returned.
    """
    plan = data.plan
    if q_samples is None:
        q_samples = sample_medium(q, op.grid)
    if fields is None:
        fields = total_fields(op, q_samples, plan, tol=config.solve_tol)
    if pred is None:
        pred = predict_measurements(op, q_samples, fields, plan)
    r = (data.values - pred).ravel()
    res_before = float(np.linalg.norm(r))
    p = q.n_coeffs

    diagnostics = {"residual_before": res_before, "converged": True}
    if p <= config.dense_threshold:
        jac = assemble_medium_jacobian(
            op, q_samples, fields, plan, q.bandlimit, tol=config.solve_tol
        )
        jr = np.vstack([jac.real, jac.imag])
        rr = np.concatenate([r.real, r.imag])
        scale = np.linalg.norm(jr, axis=0)
        scale[scale == 0.0] = 1.0
        y, _, rank, _ = np.linalg.lstsq(jr / scale, rr, rcond=None)
        c = y / scale
        diagnostics["path"] = "dense"
        diagnostics["rank"] = int(rank)
        diagnostics["residual_after"] = float(np.linalg.norm(r - jac @ c))
    else:
        jop = jacobian_operator(
            op, q_samples, fields, plan, q.bandlimit, tol=config.solve_tol
        )
        n = jop.shape[0]

        def mv(c):
            y = jop.matvec(c)
            return np.concatenate([y.real, y.imag])

        def rmv(y):
            return jop.rmatvec(y[:n] + 1j * y[n:]).real

        rop = spla.LinearOperator((2 * n, p), matvec=mv, rmatvec=rmv, dtype=float)
        rr = np.concatenate([r.real, r.imag])
        sol = spla.lsqr(
            rop,
            rr,
            atol=config.lsqr_tol,
            btol=config.lsqr_tol,
            iter_lim=8 * p,
        )
        c = sol[0]
        diagnostics["path"] = "lsqr"
        diagnostics["itn"] = int(sol[2])
        diagnostics["residual_after"] = float(sol[3])
        diagnostics["converged"] = sol[1] in (1, 2)
    return SineMedium(q.bandlimit, c), diagnostics


def _relative(res: float, data_norm: float) -> float:
    if data_norm > 0.0:
        return res / data_norm
    return 0.0 if res == 0.0 else np.inf


def single_frequency_solve(
    q0: SineMedium,
    data: Measurements,
    config: MediumSolverConfig = MediumSolverConfig(),
    grid: VolumeGrid | None = None,
) -> MediumFrequencyResult:
    """Gauss-Newton iteration at one frequency.

    Stops on: relative residual below eps_r; relative update below
    eps_u (skipped while the iterate is identically zero); a residual
    increase, which reverts the last update; nitmax iterations.
    """
    plan = data.plan
    k = plan.k
    if grid is None:
        grid = config.grid_policy(k)
    op = volume_operator(k, grid)
    data_norm = data.norm

    q = q0
    q_samples = sample_medium(q, grid)
    fields = total_fields(op, q_samples, plan, tol=config.solve_tol)
    pred = predict_measurements(op, q_samples, fields, plan)
    res = float(np.linalg.norm((data.values - pred).ravel()))

    steps: list[MediumStepRecord] = []
    stop = "maxit"
    iterations = config.nitmax
    for it in range(1, config.nitmax + 1):
        if _relative(res, data_norm) < config.eps_r:
            stop, iterations = "residual", it
            break
        delta, diag = gn_ls_step(op, q, data, config, q_samples, fields, pred)
        step_norm = float(np.linalg.norm(delta.coeffs))
        steps.append(
            MediumStepRecord(it, res, step_norm, diag["path"], diag["converged"])
        )
        q_new = q.plus(delta)
        samples_new = sample_medium(q_new, grid)
        fields_new = total_fields(op, samples_new, plan, tol=config.solve_tol)
        pred_new = predict_measurements(op, samples_new, fields_new, plan)
        res_new = float(np.linalg.norm((data.values - pred_new).ravel()))
        if res_new > res:
            stop, iterations = "increase", it
            break  # revert: q_new is dropped, the previous iterate stands
        q_norm_prev = float(np.linalg.norm(q.coeffs))
        q, q_samples, fields, pred, res = q_new, samples_new, fields_new, pred_new, res_new
        if q_norm_prev > 0.0 and step_norm / q_norm_prev < config.eps_u:
            stop, iterations = "update", it
            break

    return MediumFrequencyResult(q, res, k, iterations, steps, stop)


def run_rla(
    datasets,
    config: MediumSolverConfig = MediumSolverConfig(),
    truth=None,
) -> ReconstructionTrace:
    """March a zero initial guess through ascending frequencies.

    ``truth``, when given, is anything sample_medium accepts (callable,
    SineMedium, or per-call array) and adds relative L2 errors of the
    iterate and of the best bandlimited projection to each record.
    """
    datasets = list(datasets)
    ks = [d.plan.k for d in datasets]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("dataset frequencies must be strictly increasing")

    q = None
    trace = ReconstructionTrace()
    for data in datasets:
        k = data.plan.k
        nm = config.bandlimit_policy(k)
        if q is None:
            q = SineMedium(nm, np.zeros(len(mode_indices(nm))))
        else:
            q = extend_bandlimit(q, max(nm, q.bandlimit))
        grid = config.grid_policy(k)
        try:
            fr = single_frequency_solve(q, data, config, grid)
            q = fr.medium
            rec = FrequencyRecord(
                k=k,
                iterate=q,
                residual=fr.residual,
                rel_residual=_relative(fr.residual, data.norm),
                n_iter=fr.iteration,
                stop=fr.stop,
                steps=fr.steps,
                n_modes=q.bandlimit,
            )
        except Exception as exc:  # keep marching with the previous medium
            rec = FrequencyRecord(
                k=k,
                iterate=q,
                residual=np.nan,
                rel_residual=np.nan,
                n_iter=0,
                stop="error",
                failure=str(exc),
                n_modes=q.bandlimit,
            )
        if truth is not None:
            try:
                from .metrics import medium_errors

                truth_samples = sample_medium(
                    truth, grid, subsample=config.truth_subsample
                )
                rec.eps_q, rec.eps_qb = medium_errors(
                    truth_samples, rec.iterate, grid, rec.iterate.bandlimit
                )
            except ValueError:
                rec.eps_q = rec.eps_qb = np.nan
        trace.records.append(rec)
    return trace
