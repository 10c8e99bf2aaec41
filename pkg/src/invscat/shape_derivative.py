"""Shape derivative of the boundary forward map.

The derivative of the far data with respect to a normal perturbation of
the interface solves the same transmission system as the field itself,
with a right-hand side built from boundary traces of the unperturbed
solution.  One factorization therefore serves the forward solve, every
derivative column, and the adjoint solves used for fast Jacobian
assembly.

Equal densities inside and outside are assumed throughout: the jump of
the derivative field is zero and only the normal-derivative jump
carries the perturbation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .acquisition import AcquisitionPlan
from .curves import NormalPerturbation, basis_functions
from .transmission import (
    TransmissionSystem,
    arclength_diff_matrix,
    cross_layer_matrices,
    plane_wave,
)

__all__ = [
    "BoundaryTraces",
    "boundary_traces",
    "frechet_apply",
    "assemble_obstacle_jacobian",
]


@dataclass
class BoundaryTraces:
    """Total-field traces on one boundary component, one column per
    incident direction."""

    u_plus: np.ndarray  # exterior limit of the total field
    u_minus: np.ndarray  # interior limit
    du_plus: np.ndarray  # exterior normal derivative
    du_minus: np.ndarray  # interior normal derivative
    dsu: np.ndarray  # tangential (arclength) derivative of the trace

    def mismatch(self) -> float:
        """Relative violation of the transmission conditions."""
        num = max(np.abs(self.u_plus - self.u_minus).max(initial=0.0),
                  np.abs(self.du_plus - self.du_minus).max(initial=0.0))
        den = max(np.abs(self.u_plus).max(initial=0.0),
                  np.abs(self.du_plus).max(initial=0.0), 1e-300)
        return num / den


def boundary_traces(
    system: TransmissionSystem,
    densities: np.ndarray,
    directions,
    component: int = 0,
    tol: float = 1e-5,
) -> BoundaryTraces:
    """On-surface limits of the solved field on one component.

    densities: stacked solution of the system, one column per direction
    (the same directions passed here).  Exterior traces include the
    incident wave, so u_plus and u_minus are both traces of the total
    field and must agree up to the discretization error; a mismatch
    above tol signals an under-resolved solve.
    """
    directions = np.atleast_1d(np.asarray(directions, dtype=complex))
    if densities.ndim == 1:
        densities = densities[:, None]
    nd = system.nodes[component]
    ext = system.ops_ext[component]
    itr = system.ops_int[component]
    sigma, mu = system.split(densities, component)

    k = system.wn.k_exterior
    u_inc = np.empty((nd.n, directions.size), dtype=complex)
    du_inc = np.empty_like(u_inc)
    for j, th in enumerate(directions):
        u_inc[:, j], du_inc[:, j] = plane_wave(k, th, nd.z, nd.normal)

    u_plus = u_inc + ext.double @ sigma + 0.5 * sigma - ext.single @ mu
    du_plus = du_inc + ext.hyper @ sigma - ext.single_prime @ mu + 0.5 * mu
    u_minus = itr.double @ sigma - 0.5 * sigma - itr.single @ mu
    du_minus = itr.hyper @ sigma - itr.single_prime @ mu - 0.5 * mu

    # other components radiate smooth exterior fields onto this one
    for i in range(len(system.nodes)):
        if i == component:
            continue
        cross = cross_layer_matrices(nd, system.nodes[i], k)
        sig_i, mu_i = system.split(densities, i)
        u_plus += cross.double @ sig_i - cross.single @ mu_i
        du_plus += cross.hyper @ sig_i - cross.single_prime @ mu_i

    traces = BoundaryTraces(
        u_plus=u_plus,
        u_minus=u_minus,
        du_plus=du_plus,
        du_minus=du_minus,
        dsu=arclength_diff_matrix(nd) @ (0.5 * (u_plus + u_minus)),
    )
    if tol is not None and traces.mismatch() > tol:
        raise ValueError(
            f"transmission-condition mismatch {traces.mismatch():.2e} "
            f"exceeds {tol:.1e}; discretization under-resolved"
        )
    return traces


def _h_at_nodes(h, nodes) -> np.ndarray:
    """Normal perturbation values at the quadrature nodes."""
    if isinstance(h, NormalPerturbation):
        return h.evaluate(nodes.t, nodes.curve.period)
    if callable(h):
        return np.asarray(h(nodes.t), dtype=float)
    h = np.asarray(h)
    if h.shape != (nodes.n,):
        raise ValueError("nodal perturbation has the wrong length")
    return h


def _derivative_rhs_block(system, traces, h_vals, component=0):
    """Second-block right-hand side for the derivative solve.

    The derivative field has zero trace jump; its normal-derivative jump
    is d/ds(h d/ds(u_i - u_e)) + h (k_i^2 u_i - k^2 u_e) with total-field
    traces.  The first term vanishes identically for the continuous
    problem and is kept for fidelity to the jump formula.
    """
    wn = system.wn
    dds = arclength_diff_matrix(system.nodes[component])
    w = traces.u_minus - traces.u_plus
    jump = dds @ (h_vals[:, None] * (dds @ w))
    jump += h_vals[:, None] * (
        wn.k_interior**2 * traces.u_minus - wn.k_exterior**2 * traces.u_plus
    )
    return jump


def frechet_apply(
    system: TransmissionSystem,
    traces: BoundaryTraces,
    h,
    receivers,
    component: int = 0,
) -> np.ndarray:
    """Derivative of the received data along one normal perturbation.

    Returns an (n_directions, n_receivers) array matching the layout of
    Measurements.values for the directions the traces were built from.
    """
    nd = system.nodes[component]
    h_vals = _h_at_nodes(h, nd)
    n_dirs = traces.u_plus.shape[1]
    rhs = np.zeros((system.dim, n_dirs), dtype=complex)
    o = system.offsets[component]
    rhs[o + nd.n : o + 2 * nd.n] = -_derivative_rhs_block(
        system, traces, h_vals, component
    )
    dens = sla.lu_solve(system.lu, rhs)
    return system.scattered_field(dens, receivers).T


def assemble_obstacle_jacobian(
    system: TransmissionSystem,
    traces: BoundaryTraces,
    plan: AcquisitionPlan,
    n_band: int,
    component: int = 0,
) -> np.ndarray:
    """Dense Jacobian over the trigonometric perturbation basis.

    Rows are stacked direction-major, matching Measurements.ravel();
    columns follow NormalPerturbation.as_vector order: constant, then
    cos/sin interleaved per mode up to n_band.  Assembly uses adjoint
    solves of the factorized system: n_receivers back-substitutions
    replace one solve per (direction, mode) pair.
    """
    nd = system.nodes[component]
    wn = system.wn
    n_dirs = traces.u_plus.shape[1]
    if n_dirs != plan.n_directions:
        raise ValueError("traces were built for a different direction count")

    e_mat = system.exterior_eval_matrix(plan.receivers)  # (N_r, dim)
    phi = sla.lu_solve(system.lu, e_mat.T.copy(), trans=1)  # A^-T E^T
    o = system.offsets[component]
    phi2 = phi[o + nd.n : o + 2 * nd.n]  # (n, N_r)

    dds = arclength_diff_matrix(nd)
    basis = basis_functions(n_band, nd.t, nd.curve.period)  # (n, 2 n_band + 1)
    w = traces.u_minus - traces.u_plus
    grad = dds @ w  # d/ds of the (numerically tiny) trace jump
    bulk = wn.k_interior**2 * traces.u_minus - wn.k_exterior**2 * traces.u_plus

    psi = dds.T @ phi2  # moves the outer d/ds onto the adjoint factor
    cols = np.einsum("nm,nj,nc->jmc", psi, grad, basis, optimize=True)
    cols += np.einsum("nm,nj,nc->jmc", phi2, bulk, basis, optimize=True)
    return -cols.reshape(n_dirs * plan.n_receivers, basis.shape[1])
