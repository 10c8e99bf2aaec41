"""Frechet derivative and adjoint of the volumetric forward map.

The forward map sends a medium q to scattered-field samples at exterior
receivers.  Its linearization at q moves along delta_q by solving

    v - k^2 V[q v] = k^2 V[delta_q u]

with the same volume operator as the forward solve, where u is the total
field for the unperturbed medium.  The discrete Jacobian in the sine
basis admits a cheap dense assembly: transposing the per-entry formula
turns each receiver row into a single forward-type solve applied to that
receiver's kernel column, so a full matrix costs N_r solves instead of
one per basis mode.  The adjoint path used inside iterative least
squares is the exact conjugate transpose of that discretization, so the
inner-product identity holds to solver tolerance rather than to a
discretization error.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .acquisition import AcquisitionPlan
from .volume import VolumeOperator, sample_medium, sine_basis_matrix, solve_ls


def total_fields(op: VolumeOperator, q_samples, plan: AcquisitionPlan, tol=1e-10):
    """Total fields for every incidence direction, stacked (n, n, N_d)."""
    stack = np.stack([op.incident(d) for d in plan.directions], axis=-1)
    return solve_ls(op, q_samples, stack, tol=tol)


def _check_fields(op, fields, plan):
    want = (op.grid.n, op.grid.n, plan.n_directions)
    if fields is None:
        raise ValueError("total fields are required; run total_fields/solve_ls first")
    fields = np.asarray(fields)
    if fields.shape != want:
        raise ValueError(f"total fields shape {fields.shape}, expected {want}")
    return fields


def apply_jacobian(op: VolumeOperator, q_samples, fields, delta_q, plan: AcquisitionPlan,
                   tol=1e-10) -> np.ndarray:
    """Directional derivative of the measurements along delta_q.

    Returns (N_d, N_r) complex values ordered like Measurements. delta_q
    may be a SineMedium, a callable, or samples on the grid.
    """
    fields = _check_fields(op, fields, plan)
    q = np.asarray(q_samples, dtype=float)
    if isinstance(delta_q, np.ndarray):
        # keep the dtype: iterative least squares drives complex directions
        dq = delta_q
        if dq.shape != (op.grid.n, op.grid.n):
            raise ValueError(f"delta samples shape {dq.shape} does not match grid")
    else:
        dq = sample_medium(delta_q, op.grid)
    k2 = op.k**2
    out = np.empty((plan.n_directions, plan.n_receivers), dtype=complex)
    rhs = np.stack([k2 * op.potential(dq * fields[:, :, j])
                    for j in range(plan.n_directions)], axis=-1)
    v = solve_ls(op, q, rhs, tol=tol)
    for j in range(plan.n_directions):
        src = dq * fields[:, :, j] + q * v[:, :, j]
        out[j] = k2 * op.potential_at(src, plan.receivers)
    return out


def apply_adjoint(op: VolumeOperator, q_samples, fields, f_values, plan: AcquisitionPlan,
                  bandlimit: int, tol=1e-10) -> np.ndarray:
    """Adjoint of apply_jacobian: sine coefficients from receiver values.

    f_values is (N_d, N_r).  Returns the complex coefficient vector a
    with <apply_jacobian(c), f> = <c, a> exactly at the discrete level
    (plain Euclidean inner products on both sides), realized per the
    derivative structure as the grid sum of conj(u w) against each basis
    mode, where w solves the same volume equation driven by the
    conjugated receiver charges.
    """
    fields = _check_fields(op, fields, plan)
    f = np.asarray(f_values, dtype=complex)
    if f.shape != (plan.n_directions, plan.n_receivers):
        raise ValueError(f"receiver values shape {f.shape}, expected "
                         f"{(plan.n_directions, plan.n_receivers)}")
    q = np.asarray(q_samples, dtype=float)
    n = op.grid.n
    rec = op.receiver_matrix(plan.receivers)  # (N_r, n^2), rows k^2 h^2 G
    charges = (rec.T @ np.conj(f).T).reshape(n, n, plan.n_directions)
    w = solve_ls(op, q, charges, tol=tol)
    basis = sine_basis_matrix(op.grid, bandlimit)
    acc = np.zeros(n * n, dtype=complex)
    for j in range(plan.n_directions):
        acc += np.conj(fields[:, :, j] * w[:, :, j]).ravel()
    return basis.T @ acc


def assemble_medium_jacobian(op: VolumeOperator, q_samples, fields, plan: AcquisitionPlan,
                             bandlimit: int, tol=1e-10) -> np.ndarray:
    """Dense Jacobian, rows direction-major like Measurements.ravel(),
    columns lexicographic in (m, n).

    Row (j, m) transposes to u_j * solve(receiver_m kernel column), so
    the assembly runs one forward-type solve per receiver regardless of
    the number of basis modes.
    """
    fields = _check_fields(op, fields, plan)
    q = np.asarray(q_samples, dtype=float)
    n = op.grid.n
    rec = op.receiver_matrix(plan.receivers)
    cols = solve_ls(op, q, rec.T.reshape(n, n, plan.n_receivers), tol=tol)
    cols = cols.reshape(n * n, plan.n_receivers)
    basis = sine_basis_matrix(op.grid, bandlimit)
    out = np.empty((plan.n_directions * plan.n_receivers, basis.shape[1]), dtype=complex)
    for j in range(plan.n_directions):
        weighted = cols * fields[:, :, j].reshape(-1, 1)
        out[j * plan.n_receivers:(j + 1) * plan.n_receivers] = weighted.T @ basis
    return out


def jacobian_operator(op: VolumeOperator, q_samples, fields, plan: AcquisitionPlan,
                      bandlimit: int, tol=1e-10) -> LinearOperator:
    """Matrix-free Jacobian for iterative least squares.

    matvec/rmatvec are exact adjoints of each other (same discretization
    as apply_jacobian/apply_adjoint), which LSQR-type methods require.
    """
    basis = sine_basis_matrix(op.grid, bandlimit)
    n_rows = plan.n_directions * plan.n_receivers
    n_cols = basis.shape[1]
    n = op.grid.n

    def mv(c):
        dq = (basis @ np.asarray(c)).reshape(n, n)
        return apply_jacobian(op, q_samples, fields, dq, plan, tol=tol).ravel()

    def rmv(f):
        return apply_adjoint(op, q_samples, fields,
                             np.asarray(f).reshape(plan.n_directions, plan.n_receivers),
                             plan, bandlimit, tol=tol)

    return LinearOperator((n_rows, n_cols), matvec=mv, rmatvec=rmv, dtype=complex)
