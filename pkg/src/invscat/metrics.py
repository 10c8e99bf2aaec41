"""Reconstruction error metrics and the objective-landscape slice.

Shape error is the area of the symmetric difference between fine
polygonizations, relative to the truth area.  Medium errors are relative
grid L2 norms, optionally against the best bandlimited projection of the
truth.  The landscape slice evaluates the data misfit on an affine
two-parameter family of media, which is how local minima of the
single-frequency problem are visualized.
"""

from __future__ import annotations

import numpy as np
from shapely.geometry import Polygon

from .acquisition import Measurements
from .curves import FourierCurve, is_simple
from .volume import SineMedium, VolumeGrid, forward_medium, project_medium, sample_medium


def curve_polygon(curve: FourierCurve, n_vertices: int = 4096) -> Polygon:
    poly = Polygon(curve.polyline(n_vertices))
    if not poly.is_valid:
        raise ValueError("curve polygonizes to an invalid (self-crossing) polygon")
    return poly


def eps_gamma(truth: FourierCurve, recon: FourierCurve, n_vertices: int = 4096) -> float:
    """Set-difference area between the enclosed regions, over truth area."""
    if not is_simple(truth) or not is_simple(recon):
        raise ValueError("eps_gamma needs simple (non-self-intersecting) curves")
    pt = curve_polygon(truth, n_vertices)
    pr = curve_polygon(recon, n_vertices)
    return pt.symmetric_difference(pr).area / pt.area


def best_bandlimited(truth_samples: np.ndarray, grid: VolumeGrid, bandlimit: int) -> SineMedium:
    """L2-best sine-basis approximation of grid samples."""
    return project_medium(np.asarray(truth_samples, dtype=float), grid, bandlimit)


def medium_errors(truth_samples: np.ndarray, recon: SineMedium, grid: VolumeGrid,
                  bandlimit: int | None = None) -> tuple[float, float]:
    """(eps_q, eps_qb): relative grid L2 error of the reconstruction and
    of the best bandlimited approximation at the same bandlimit."""
    truth = np.asarray(truth_samples, dtype=float)
    norm = np.linalg.norm(truth)
    if norm == 0.0:
        raise ValueError("medium error is undefined for a zero truth")
    band = recon.bandlimit if bandlimit is None else bandlimit
    eps_q = np.linalg.norm(sample_medium(recon, grid) - truth) / norm
    best = best_bandlimited(truth, grid, band)
    eps_qb = np.linalg.norm(sample_medium(best, grid) - truth) / norm
    return float(eps_q), float(eps_qb)


def landscape_slice(q0: SineMedium, q1: SineMedium, qb: SineMedium, data: Measurements,
                    grid: VolumeGrid, c0=None, c1=None, tol=1e-10) -> np.ndarray:
    """Data misfit over the affine family q0 + c0 (qb - q0) + c1 (q1 - q0).

    Rows follow c0, columns c1.  Solver failures leave NaN entries so a
    partially computable slice still renders.
    """
    if not (q0.bandlimit == q1.bandlimit == qb.bandlimit):
        raise ValueError("slice media must share a bandlimit")
    c0 = np.linspace(-0.5, 1.5, 41) if c0 is None else np.asarray(c0, dtype=float)
    c1 = np.linspace(-0.5, 1.5, 41) if c1 is None else np.asarray(c1, dtype=float)
    plan = data.plan
    d_b = qb.plus(q0.scaled(-1.0))
    d_1 = q1.plus(q0.scaled(-1.0))
    out = np.empty((c0.size, c1.size))
    for i, a in enumerate(c0):
        for j, b in enumerate(c1):
            q = q0.plus(d_b.scaled(a)).plus(d_1.scaled(b))
            try:
                pred = forward_medium(q, plan.k, plan, grid, tol=tol)
            except (RuntimeError, ValueError):
                out[i, j] = np.nan
                continue
            out[i, j] = np.linalg.norm(pred.values - data.values)
    return out
