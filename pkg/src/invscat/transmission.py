"""Boundary-integral forward solver for the penetrable transmission problem.

The total field is u = u_inc + u_e outside the boundary and u_i inside,
with matched values and normal derivatives across it (equal densities).
Both fields are represented with the same pair of densities,

    u_e = D_k sigma - S_k mu,      u_i = D_{k_i} sigma - S_{k_i} mu,

which yields a second-kind 2x2 block system whose off-identity blocks
are *differences* of layer operators; for k_i = k the discrete system is
exactly the identity.  Log-singular kernels use the global spectral
quadrature with the trigonometric log weights; the hypersingular blocks
are produced through the tangential-derivative identity

    T_k = d/ds S_k d/ds + k^2 nu . S_k nu,

so only single-layer matrices and spectral differentiation appear.

All matrices act on node values and include the source arclength factor;
applying a matrix to node values of a density approximates the boundary
integral at the target nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.special as _bessel

from .acquisition import AcquisitionPlan, Measurements
from .curves import CurveNodes, FourierCurve
from .specfun import Wavenumber, greens_hess_dir

__all__ = [
    "nodes_for",
    "log_weight_matrix",
    "fourier_diff_matrix",
    "arclength_diff_matrix",
    "LayerMatrices",
    "layer_matrices",
    "cross_layer_matrices",
    "plane_wave",
    "TransmissionSystem",
    "forward_obstacle",
]

_EULER = float(np.euler_gamma)


def node_count(curve: FourierCurve, k_max: float, ppw: float) -> int:
    """Even node count giving >= ppw points per (shorter) wavelength.

    On top of the wavelength term the count reserves four points per
    significant geometry mode: the integrand's analyticity strip shrinks
    like the reciprocal of the curve bandwidth, so a fixed accuracy needs
    a fixed multiple of that bandwidth in addition to the field term.
    """
    n = int(np.ceil(ppw * curve.length() * k_max / (2 * np.pi)))
    n += 4 * curve.effective_bandwidth()
    # floor on the significant modes, not the stored array: a curve padded
    # with negligible high coefficients should not inflate the system
    n = max(n, 2 * curve.effective_bandwidth() + 2, 32)
    return n + (n % 2)


def nodes_for(curve: FourierCurve, wn: Wavenumber, ppw: float) -> CurveNodes:
    return curve.nodes(node_count(curve, wn.k_max, ppw))


@lru_cache(maxsize=8)
def _grid_tables(n: int):
    """Per-size tables: log weights (circulant), log factor, diff matrix."""
    if n % 2:
        raise ValueError("spectral boundary quadrature needs an even node count")
    half = n // 2
    j = np.arange(n)
    t = 2 * np.pi * j / n
    m = np.arange(1, half)
    # R_j = -(2 pi / half) sum_m cos(m t_j)/m - (pi/half^2) cos(half t_j)
    r = -(2 * np.pi / half) * (np.cos(np.outer(t, m)) @ (1.0 / m)) - (
        np.pi / half**2
    ) * np.cos(half * t)
    logw = sla.circulant(r)  # logw[i, j] = r[(i - j) mod n]
    diff = np.abs(t[:, None] - t[None, :])
    np.fill_diagonal(diff, 1.0)
    logfac = np.log(4 * np.sin(diff / 2) ** 2)
    np.fill_diagonal(logfac, 0.0)
    # trigonometric differentiation (exact through mode half-1); the
    # cotangent column is n-periodic because cot has period pi and n is even
    col = np.zeros(n)
    col[1:] = 0.5 * (-1.0) ** j[1:] / np.tan(j[1:] * np.pi / n)
    dmat = sla.circulant(col)
    return logw, logfac, dmat


def log_weight_matrix(n: int) -> np.ndarray:
    return _grid_tables(n)[0]


def fourier_diff_matrix(n: int) -> np.ndarray:
    """d/dt on the 2 pi periodic grid of n (even) points."""
    return _grid_tables(n)[2]


def arclength_diff_matrix(nodes: CurveNodes) -> np.ndarray:
    """d/ds at the nodes: spectral in the parameter, divided by speed."""
    scale = nodes.curve.period / (2 * np.pi)
    return fourier_diff_matrix(nodes.n) / (nodes.speed * scale)[:, None]


@dataclass
class LayerMatrices:
    """Nystrom matrices of the four boundary operators at one wavenumber."""

    k: float
    single: np.ndarray  # S_k
    double: np.ndarray  # D_k  (principal value)
    single_prime: np.ndarray  # S'_k (normal derivative at target, PV)
    hyper: np.ndarray  # T_k via the tangential identity


def _geometry_pack(nodes: CurveNodes):
    """Pairwise geometry shared by all kernels on one curve."""
    z = nodes.z
    n = nodes.n
    scale = nodes.curve.period / (2 * np.pi)  # map to the 2 pi standard grid
    sps = nodes.speed * scale  # speed w.r.t. standard angle
    d = z[:, None] - z[None, :]
    r = np.abs(d)
    np.fill_diagonal(r, 1.0)
    nu = nodes.normal
    cos_src = (d * np.conj(nu[None, :])).real / r  # (d . nu_s)/r
    cos_tgt = (d * np.conj(nu[:, None])).real / r  # (d . nu_t)/r
    np.fill_diagonal(cos_src, 0.0)
    np.fill_diagonal(cos_tgt, 0.0)
    return n, r, sps, cos_src, cos_tgt


def layer_matrices(nodes: CurveNodes, k: float) -> LayerMatrices:
    """Assemble S, D, S', T on one curve with spectral log quadrature."""
    n, r, sps, cos_src, cos_tgt = _geometry_pack(nodes)
    logw, logfac, dmat = _grid_tables(n)
    wtrap = 2 * np.pi / n
    kr = k * r
    j0, y0 = _bessel.j0(kr), _bessel.y0(kr)
    j1, y1 = _bessel.j1(kr), _bessel.y1(kr)
    h0 = j0 + 1j * y0
    h1 = j1 + 1j * y1
    diag = np.eye(n, dtype=bool)

    # single layer: kernel (i/4) H0(kr) sps
    k1 = -(1.0 / (4 * np.pi)) * j0 * sps[None, :]
    k1[diag] = -sps / (4 * np.pi)  # J0 -> 1 on the diagonal (r is masked there)
    k2 = 0.25j * h0 * sps[None, :] - k1 * logfac
    k2[diag] = (0.25j - _EULER / (2 * np.pi) - np.log(k * sps / 2) / (2 * np.pi)) * sps
    single = logw * k1 + wtrap * k2

    # double layer: kernel (ik/4) H1(kr) (d . nu_s)/r sps
    k1 = -(k / (4 * np.pi)) * j1 * cos_src * sps[None, :]
    k2 = 0.25j * k * h1 * cos_src * sps[None, :] - k1 * logfac
    k2[diag] = -nodes.curvature / (4 * np.pi) * sps  # kernel limit -kappa/(4 pi)
    double = logw * k1 + wtrap * k2

    # normal derivative of the single layer: -(ik/4) H1(kr) (d . nu_t)/r sps
    k1 = (k / (4 * np.pi)) * j1 * cos_tgt * sps[None, :]
    k2 = -0.25j * k * h1 * cos_tgt * sps[None, :] - k1 * logfac
    k2[diag] = -nodes.curvature / (4 * np.pi) * sps
    single_prime = logw * k1 + wtrap * k2

    # hypersingular block through the tangential identity
    dds = dmat / sps[:, None]  # d/ds = (1/|x'|) d/dt on the standard grid
    hyper = dds @ (single @ dds)
    nu = nodes.normal
    nu_dot = (nu[:, None] * np.conj(nu[None, :])).real
    hyper += k * k * single * nu_dot
    return LayerMatrices(k, single, double, single_prime, hyper)


def cross_layer_matrices(target: CurveNodes, source: CurveNodes, k: float) -> LayerMatrices:
    """Smooth interaction blocks between disjoint curves (plain trapezoid)."""
    d = target.z[:, None] - source.z[None, :]
    r = np.abs(d)
    if r.min() < 1e-12:
        raise ValueError("cross blocks require disjoint curves")
    w = source.weights[None, :]
    kr = k * r
    h0 = _bessel.j0(kr) + 1j * _bessel.y0(kr)
    h1 = _bessel.j1(kr) + 1j * _bessel.y1(kr)
    single = 0.25j * h0 * w
    cos_src = (d * np.conj(source.normal[None, :])).real / r
    cos_tgt = (d * np.conj(target.normal[:, None])).real / r
    double = 0.25j * k * h1 * cos_src * w
    single_prime = -0.25j * k * h1 * cos_tgt * w
    hyper = (
        greens_hess_dir(
            k,
            source.z[None, :],
            source.normal[None, :],
            target.z[:, None],
            target.normal[:, None],
        )
        * w
    )
    return LayerMatrices(k, single, double, single_prime, hyper)


def plane_wave(k: float, direction: complex, z: np.ndarray, normal: np.ndarray | None = None):
    """Incident plane wave and, if a normal is given, its normal derivative."""
    d = direction / abs(direction)
    u = np.exp(1j * k * (z * np.conj(d)).real)
    if normal is None:
        return u
    dudn = 1j * k * (d * np.conj(normal)).real * u
    return u, dudn


class TransmissionSystem:
    """Assembled and factorized transmission system on one or more curves.

    The factorization is the expensive part and is reused across all
    incident directions, derivative right-hand sides, and the adjoint
    solves of the shape Jacobian.
    """

    def __init__(self, curves, wn: Wavenumber, ppw: float = 70.0, n_nodes=None):
        if isinstance(curves, FourierCurve):
            curves = [curves]
        self.curves = list(curves)
        self.wn = wn
        self.ppw = float(ppw)
        if n_nodes is None:
            self.nodes = [nodes_for(c, wn, ppw) for c in self.curves]
        else:
            counts = [n_nodes] * len(self.curves) if np.isscalar(n_nodes) else list(n_nodes)
            self.nodes = [c.nodes(int(m)) for c, m in zip(self.curves, counts)]
        self.ops_ext = [layer_matrices(nd, wn.k_exterior) for nd in self.nodes]
        self.ops_int = [layer_matrices(nd, wn.k_interior) for nd in self.nodes]
        self._assemble()

    def _assemble(self):
        sizes = [nd.n for nd in self.nodes]
        self.offsets = np.concatenate([[0], np.cumsum([2 * s for s in sizes])])
        dim = self.offsets[-1]
        a = np.zeros((dim, dim), dtype=complex)
        for i, (ext, itr) in enumerate(zip(self.ops_ext, self.ops_int)):
            ni = sizes[i]
            o = self.offsets[i]
            blk = a[o : o + 2 * ni, o : o + 2 * ni]
            blk[:ni, :ni] = np.eye(ni) + ext.double - itr.double
            blk[:ni, ni:] = itr.single - ext.single
            blk[ni:, :ni] = ext.hyper - itr.hyper
            blk[ni:, ni:] = np.eye(ni) + itr.single_prime - ext.single_prime
        k = self.wn.k_exterior
        for i in range(len(self.nodes)):
            for j in range(len(self.nodes)):
                if i == j:
                    continue
                cross = cross_layer_matrices(self.nodes[i], self.nodes[j], k)
                oi, oj = self.offsets[i], self.offsets[j]
                ni, nj = sizes[i], sizes[j]
                a[oi : oi + ni, oj : oj + nj] = cross.double
                a[oi : oi + ni, oj + nj : oj + 2 * nj] = -cross.single
                a[oi + ni : oi + 2 * ni, oj : oj + nj] = cross.hyper
                a[oi + ni : oi + 2 * ni, oj + nj : oj + 2 * nj] = -cross.single_prime
        self.matrix = a
        self.lu = sla.lu_factor(a)

    @property
    def dim(self) -> int:
        return int(self.offsets[-1])

    def rhs(self, directions) -> np.ndarray:
        """Stacked right-hand sides, one column per incident direction."""
        directions = np.atleast_1d(np.asarray(directions, dtype=complex))
        cols = np.zeros((self.dim, directions.size), dtype=complex)
        k = self.wn.k_exterior
        for i, nd in enumerate(self.nodes):
            o = self.offsets[i]
            for jd, th in enumerate(directions):
                u, dudn = plane_wave(k, th, nd.z, nd.normal)
                cols[o : o + nd.n, jd] = -u
                cols[o + nd.n : o + 2 * nd.n, jd] = -dudn
        return cols

    def solve_densities(self, directions) -> np.ndarray:
        """Density vectors [sigma; mu] per component, stacked; one column
        per direction."""
        return sla.lu_solve(self.lu, self.rhs(directions))

    def split(self, densities: np.ndarray, component: int = 0):
        """(sigma, mu) of one component from a stacked solution array."""
        o = self.offsets[component]
        n = self.nodes[component].n
        return densities[o : o + n], densities[o + n : o + 2 * n]

    def exterior_eval_matrix(self, targets: np.ndarray) -> np.ndarray:
        """Maps stacked densities to the scattered field at exterior points."""
        targets = np.asarray(targets, dtype=complex).ravel()
        k = self.wn.k_exterior
        cols = []
        for nd in self.nodes:
            d = targets[:, None] - nd.z[None, :]
            r = np.abs(d)
            kr = k * r
            h0 = _bessel.j0(kr) + 1j * _bessel.y0(kr)
            h1 = _bessel.j1(kr) + 1j * _bessel.y1(kr)
            w = nd.weights[None, :]
            cos_src = (d * np.conj(nd.normal[None, :])).real / r
            cols.append(0.25j * k * h1 * cos_src * w)  # double layer
            cols.append(-0.25j * h0 * w)  # minus single layer
        return np.hstack(cols)

    def scattered_field(self, densities: np.ndarray, targets) -> np.ndarray:
        e = self.exterior_eval_matrix(targets)
        out = e @ densities
        return out


def forward_obstacle(
    curves, wn: Wavenumber, plan: AcquisitionPlan, ppw: float = 70.0
) -> Measurements:
    """Scattered field at the plan's receivers for every plan direction."""
    if abs(plan.k - wn.k_exterior) > 1e-12 * plan.k:
        raise ValueError("plan frequency does not match the wavenumber pair")
    system = TransmissionSystem(curves, wn, ppw=ppw)
    dens = system.solve_densities(plan.directions)
    vals = system.scattered_field(dens, plan.receivers)  # (n_receivers, n_dirs)
    return Measurements(plan, vals.T.copy())
