"""Special functions against arbitrary-precision values and identities."""

import numpy as np
import pytest

from invscat.specfun import (
    Wavenumber,
    cyl_bessel,
    greens_grad,
    greens_kernel,
    hankel1,
)

mp = pytest.importorskip("mpmath")


def test_pinned_values():
    assert cyl_bessel("J", 0, 1.0) == pytest.approx(0.765197686557967, abs=1e-14)
    assert cyl_bessel("Y", 0, 1.0) == pytest.approx(0.088256964215677, abs=1e-14)
    h = hankel1(0, 1.0)
    assert h == pytest.approx(0.765197686557967 + 0.088256964215677j, abs=1e-13)
    h1 = hankel1(1, 1.0)
    assert h1 == pytest.approx(0.440050585744934 - 0.781212821300289j, abs=1e-13)


def test_j1_small_argument_limit():
    x = np.array([1e-8, 1e-6, 1e-4])
    assert np.allclose(cyl_bessel("J", 1, x), x / 2, rtol=1e-8)


def test_domain_errors():
    with pytest.raises(ValueError):
        cyl_bessel("J", 0, 0.0)
    with pytest.raises(ValueError):
        hankel1(0, -1.0)
    with pytest.raises(ValueError):
        hankel1(2, 1.0)
    with pytest.raises(ValueError):
        cyl_bessel("K", 0, 1.0)


def test_hankel_vs_mpmath_log_grid():
    mp.mp.dps = 30
    xs = np.logspace(-3, 3, 50)
    for order in (0, 1):
        vals = hankel1(order, xs)
        for x, v in zip(xs, vals):
            ref = complex(mp.besselj(order, mp.mpf(x)) + 1j * mp.bessely(order, mp.mpf(x)))
            assert abs(v - ref) <= 1e-12 * max(abs(ref), 1.0), (order, x)


def test_wronskian():
    # J_n Y_n' - J_n' Y_n = 2/(pi x) with recurrence-based derivatives
    for x in (0.1, 1.0, 10.0, 100.0):
        for n in (0, 1, 5):
            if n == 0:
                jp = -cyl_bessel("J", 1, x)
                yp = -cyl_bessel("Y", 1, x)
            else:
                jp = 0.5 * (cyl_bessel("J", n - 1, x) - cyl_bessel("J", n + 1, x))
                yp = 0.5 * (cyl_bessel("Y", n - 1, x) - cyl_bessel("Y", n + 1, x))
            w = cyl_bessel("J", n, x) * yp - jp * cyl_bessel("Y", n, x)
            assert abs(w - 2 / (np.pi * x)) <= 1e-10


def test_recurrence():
    for x in (0.3, 2.0, 40.0):
        for n in (1, 2, 7):
            lhs = cyl_bessel("J", n - 1, x) + cyl_bessel("J", n + 1, x)
            assert abs(lhs - 2 * n / x * cyl_bessel("J", n, x)) <= 1e-10


def test_hankel_matches_parts():
    xs = np.logspace(-2, 2, 9)
    for order in (0, 1):
        assert np.array_equal(
            hankel1(order, xs),
            cyl_bessel("J", order, xs) + 1j * cyl_bessel("Y", order, xs),
        )


def test_outgoing_asymptotics():
    x = 1e4
    assert abs(abs(hankel1(0, x) * np.sqrt(np.pi * x / 2)) - 1) <= 1e-6


def test_greens_kernel_value():
    v = greens_kernel(1.0, 1.0)
    assert v == pytest.approx(0.25j * (0.765197686557967 + 0.088256964215677j), abs=1e-13)


def test_greens_kernel_helmholtz_residual():
    # 5-point FD Laplacian + k^2 applied to G(k|x|) away from the source
    k, h = 1.0, 1e-3
    z0 = 2.0 + 0.0j

    def g(z):
        return greens_kernel(k, abs(z))

    lap = (g(z0 + h) + g(z0 - h) + g(z0 + 1j * h) + g(z0 - 1j * h) - 4 * g(z0)) / h**2
    assert abs(lap + k * k * g(z0)) <= 1e-5


def test_greens_grad_is_target_gradient():
    k = 1.7
    src, tgt = 0.2 + 0.1j, 1.5 - 0.8j
    grad = greens_grad(k, src, tgt)  # gx + i gy packed as one complex
    h = 1e-6

    def g(t):
        return greens_kernel(k, abs(t - src))

    fx = (g(tgt + h) - g(tgt - h)) / (2 * h)  # complex dG/dx
    fy = (g(tgt + 1j * h) - g(tgt - 1j * h)) / (2 * h)  # complex dG/dy
    assert abs(grad - (fx + 1j * fy)) <= 1e-7
    # swapping the roles flips the sign (radial kernel)
    assert abs(grad + greens_grad(k, tgt, src)) <= 1e-13


def test_wavenumber_pair():
    wn = Wavenumber.from_contrast(2.0, 2.0)
    assert wn.k_interior == pytest.approx(2.0 * np.sqrt(2.0), rel=1e-15)
    assert wn.eta == pytest.approx(2.0, rel=1e-12)
    assert wn.contrast_q == pytest.approx(1.0, rel=1e-12)
    assert wn.k_max == wn.k_interior
    low = Wavenumber.from_contrast(2.0, 0.33)
    assert low.k_max == low.k_exterior
    with pytest.raises(ValueError):
        Wavenumber.from_contrast(1.0, -1.0)
    with pytest.raises(ValueError):
        Wavenumber(1.0, -2.0)
