"""Independent reference solutions used only by the tests.

Everything here is built from a different discretization principle than
the library under test: separation of variables plus mode matching for
disks, high-order ODE integration for radial media, adaptive quadrature
for geometric quantities.  Nothing imports the solver modules.
"""

import numpy as np
import scipy.special as sp
from scipy.integrate import quad, solve_ivp


def _hn(n, x):
    return sp.jv(n, x) + 1j * sp.yv(n, x)


def _hnp(n, x):
    return sp.jvp(n, x) + 1j * sp.yvp(n, x)


def disk_scattered_field(k, k_i, radius, center, direction, targets):
    """Penetrable-disk scattered field by cylindrical mode matching.

    Equal densities across the interface: continuity of the field and of
    its normal derivative.  ``center``, ``direction``, ``targets`` are
    complex; targets must lie outside the disk.
    """
    direction = direction / abs(direction)
    targets = np.atleast_1d(np.asarray(targets, dtype=complex))
    rel = targets - center
    rho = np.abs(rel)
    if np.any(rho <= radius):
        raise ValueError("targets must be outside the disk")
    phi = np.angle(rel)
    phi_d = np.angle(direction)
    ka, kia = k * radius, k_i * radius
    n_max = int(np.ceil(ka + 8 * max(ka, 1.0) ** (1 / 3) + 12))
    out = np.zeros_like(targets, dtype=complex)
    phase = np.exp(1j * k * (center * np.conj(direction)).real)
    for n in range(0, n_max + 1):
        lhs = np.array(
            [
                [_hn(n, ka), -sp.jv(n, kia)],
                [k * _hnp(n, ka), -k_i * sp.jvp(n, kia)],
            ]
        )
        rhs = -np.array([sp.jv(n, ka), k * sp.jvp(n, ka)])
        a_n, _ = np.linalg.solve(lhs, rhs)
        term = a_n * _hn(n, k * rho) * np.cos(n * (phi - phi_d))
        out += (1j**n) * term * (1 if n == 0 else 2)
    return phase * out


def disk_boundary_field(k, k_i, radius, direction, t):
    """Total field on the boundary of a centered penetrable disk.

    ``t`` is arclength along the circle (counterclockwise from angle 0).
    Returns (u, du/dnu): both transmission quantities are continuous.
    """
    direction = direction / abs(direction)
    phi = np.asarray(t, dtype=float) / radius
    phi_d = np.angle(direction)
    ka, kia = k * radius, k_i * radius
    n_max = int(np.ceil(ka + 8 * max(ka, 1.0) ** (1 / 3) + 12))
    u = np.zeros_like(phi, dtype=complex)
    dudn = np.zeros_like(phi, dtype=complex)
    for n in range(0, n_max + 1):
        lhs = np.array(
            [
                [_hn(n, ka), -sp.jv(n, kia)],
                [k * _hnp(n, ka), -k_i * sp.jvp(n, kia)],
            ]
        )
        rhs = -np.array([sp.jv(n, ka), k * sp.jvp(n, ka)])
        _, b_n = np.linalg.solve(lhs, rhs)
        fac = (1j**n) * (1 if n == 0 else 2) * np.cos(n * (phi - phi_d))
        u += fac * b_n * sp.jv(n, kia)
        dudn += fac * b_n * k_i * sp.jvp(n, kia)
    return u, dudn


def radial_medium_scattered_field(k, q_of_r, support_radius, direction, targets, rtol=1e-12):
    """Scattered field of a radial contrast q(r) by per-mode ODE solves.

    The medium is centered at the origin with q = 0 for r >= support_radius.
    Each angular mode is integrated outward from a small regular start and
    matched to J_n + s_n H_n at the support edge.
    """
    direction = direction / abs(direction)
    targets = np.atleast_1d(np.asarray(targets, dtype=complex))
    rho = np.abs(targets)
    phi = np.angle(targets)
    phi_d = np.angle(direction)
    a = support_radius
    if np.any(rho <= a):
        raise ValueError("targets must lie outside the support")
    ka = k * a
    n_max = int(np.ceil(ka + 8 * max(ka, 1.0) ** (1 / 3) + 12))
    out = np.zeros_like(targets, dtype=complex)

    for n in range(0, n_max + 1):
        k0 = k * np.sqrt(1.0 + q_of_r(0.0))
        r0 = min(1e-3, 1e-3 / max(n, 1))
        y0 = np.array([sp.jv(n, k0 * r0), k0 * sp.jvp(n, k0 * r0)])
        scale = max(abs(y0[0]), abs(y0[1]), 1e-290)
        y0 = y0 / scale

        def rhs(r, y, n=n):
            return [y[1], -(y[1] / r) - (k * k * (1.0 + q_of_r(r)) - n * n / (r * r)) * y[0]]

        sol = solve_ivp(rhs, (r0, a), y0, method="DOP853", rtol=rtol, atol=1e-14)
        ra, rpa = sol.y[0, -1], sol.y[1, -1]
        lhs = np.array([[ra, -_hn(n, ka)], [rpa, -k * _hnp(n, ka)]])
        rhs_v = np.array([sp.jv(n, ka), k * sp.jvp(n, ka)])
        _, s_n = np.linalg.solve(lhs, rhs_v)
        out += (1j**n) * (1 if n == 0 else 2) * s_n * _hn(n, k * rho) * np.cos(n * (phi - phi_d))
    return out


def curve_length_adaptive(point_fn, velocity_fn, period):
    """Arclength by adaptive quadrature of |gamma'|."""
    val, _ = quad(lambda t: np.abs(velocity_fn(t)).reshape(-1)[0], 0.0, period, limit=400)
    return val


def two_circle_lens_area(r1, r2, d):
    """Area of intersection of two disks with center distance d."""
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return np.pi * min(r1, r2) ** 2
    a1 = r1 * r1 * np.arccos((d * d + r1 * r1 - r2 * r2) / (2 * d * r1))
    a2 = r2 * r2 * np.arccos((d * d + r2 * r2 - r1 * r1) / (2 * d * r2))
    tri = 0.5 * np.sqrt((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
    return a1 + a2 - tri


def disk_sine_coefficient(m, n, center, radius, n_theta=512, n_r=400):
    """Projection of a unit disk indicator onto one sine basis mode.

    Semi-analytic: spectrally accurate angle integral inside an adaptive
    radial Gauss rule; coefficient normalization matches the basis
    sin(m(x + pi/2)) sin(n(y + pi/2)) on [-pi/2, pi/2]^2.
    """
    cx, cy = center
    gl_x, gl_w = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * radius * (gl_x + 1.0)
    wr = 0.5 * radius * gl_w
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    x = cx + np.outer(r, np.cos(th))
    y = cy + np.outer(r, np.sin(th))
    vals = np.sin(m * (x + np.pi / 2)) * np.sin(n * (y + np.pi / 2))
    inside = (np.abs(x) <= np.pi / 2) & (np.abs(y) <= np.pi / 2)
    ang = (vals * inside).sum(axis=1) * (2 * np.pi / n_theta)
    integral = float((ang * r * wr).sum())
    return integral * 4.0 / np.pi**2
