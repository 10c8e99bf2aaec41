"""Regenerate the frozen curve assets in src/invscat/shapes/.

Each shape starts from a hand-placed closed polygon.  The outline is
resampled uniformly in arclength, the corners are rounded by a periodic
Gaussian in arclength (a short Fourier series cannot represent a true
corner without oscillating into self-intersection), and the result is
truncated to the stated mode count and reparametrized by arclength.

The construction is deterministic, so rerunning the script reproduces
the shipped files bit for bit.

Usage: python tools/make_shapes.py
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from invscat.curves import from_samples, is_simple, write_curve  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "src" / "invscat" / "shapes"

# Aircraft silhouette, nose pointing +x, drawn counterclockwise over the
# port side and mirrored.  Stored with 35 coefficients (modes -17..17).
PLANE_UPPER = [
    (2.30, 0.00),
    (2.10, 0.16),
    (1.50, 0.22),
    (0.90, 0.25),
    (0.25, 1.40),
    (-0.05, 1.43),
    (-0.10, 0.25),
    (-1.00, 0.20),
    (-1.25, 0.18),
    (-1.65, 0.75),
    (-1.85, 0.75),
    (-1.90, 0.16),
    (-2.10, 0.12),
]

# Sound-hard style trapping cavity: a U with 0.4-wide mouth and walls,
# 1.5 deep, drawn as its outline polygon.  Stored with 37 coefficients.
CAVITY_OUTLINE = [
    (0.6, -0.9),
    (0.6, 0.9),
    (0.2, 0.9),
    (0.2, -0.6),
    (-0.2, -0.6),
    (-0.2, 0.9),
    (-0.6, 0.9),
    (-0.6, -0.9),
]


def polygon_points(vertices):
    z = np.array([complex(x, y) for x, y in vertices])
    # counterclockwise via the shoelace sign
    area = 0.5 * np.sum(np.imag(np.conj(z) * np.roll(z, -1)))
    if area < 0:
        z = z[::-1]
    return z


def smooth_closed(z, sigma, n=8192):
    """Arclength-uniform resampling followed by periodic Gaussian blur."""
    zc = np.append(z, z[0])
    seg = np.abs(np.diff(zc))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    length = s[-1]
    su = np.arange(n) * (length / n)
    zu = np.interp(su, s, zc.real) + 1j * np.interp(su, s, zc.imag)
    m = np.fft.fftfreq(n, d=1.0 / n)
    damp = np.exp(-0.5 * (sigma * 2 * np.pi * m / length) ** 2)
    return np.fft.ifft(np.fft.fft(zu) * damp)


def build(vertices, half, name):
    z = polygon_points(vertices)
    # smallest corner rounding whose truncated series stays embedded and
    # within 0.01 of the smoothed outline; elongated features keep the
    # arclength speed uneven at this mode count, which is harmless for a
    # ground-truth shape (quadratures carry speed weights)
    for sigma in np.arange(0.04, 0.40, 0.01):
        zu = smooth_closed(z, sigma)
        curve = from_samples(zu, 2 * np.pi, half)
        err = np.abs(curve.sample(zu.size) - zu).max()
        if err <= 0.01 and is_simple(curve, 8192) and curve.signed_area() > 0:
            print(f"{name}: sigma={sigma:.2f}  modes={curve.coeffs.size}  trunc_err={err:.4f}  "
                  f"L={curve.length():.3f}  speed_var={curve.speed_variation():.2e}")
            return curve
    raise RuntimeError(f"{name}: no smoothing level met the fit criteria")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    write_curve(OUT / "plane35.curve", build(PLANE_UPPER + [(x, -y) for x, y in reversed(PLANE_UPPER)], 17, "plane35"))
    write_curve(OUT / "cavity.curve", build(CAVITY_OUTLINE, 18, "cavity"))


if __name__ == "__main__":
    main()
