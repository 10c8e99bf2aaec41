"""Closed curves as complex Fourier series, and the shape-update toolkit.

A boundary is stored as gamma(t) = sum_n c_n exp(2 pi i n t / P) with
complex points x + iy and parameter period P.  After arclength
reparametrization P is the curve length and |gamma'| is constant to
roundoff-plus-truncation, which every quadrature downstream relies on.

Orientation convention: counterclockwise, outward normal = -i * tangent,
curvature positive for a counterclockwise circle (kappa = 1/r).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import LineString, Polygon

__all__ = [
    "FourierCurve",
    "CurveNodes",
    "NormalPerturbation",
    "TrustRegionReport",
    "circle",
    "from_radial",
    "from_samples",
    "reparametrize_arclength",
    "elastic_energy",
    "in_trust_region",
    "gaussian_filter",
    "apply_perturbation",
    "is_simple",
]


@dataclass(frozen=True)
class FourierCurve:
    """Closed curve gamma(t) = sum c_n exp(2 pi i n t / period).

    ``coeffs`` holds modes in ascending order n = -half .. half, so
    ``len(coeffs)`` is odd and ``coeffs[half]`` is the centroid mode.
    """

    coeffs: np.ndarray
    period: float

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError("coeffs must be a 1d odd-length array (modes -half..half)")
        if not self.period > 0:
            raise ValueError("period must be positive")
        object.__setattr__(self, "coeffs", c)

    @property
    def half(self) -> int:
        return self.coeffs.size // 2

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.half, self.half + 1)

    def coeff(self, n: int) -> complex:
        return self.coeffs[n + self.half]

    def effective_bandwidth(self, rel_tol: float = 1e-9) -> int:
        """Largest |n| whose coefficient is significant relative to the peak.

        Trailing modes below rel_tol of the largest coefficient do not
        shape the curve and are ignored by discretization-size policies.
        """
        mag = np.abs(self.coeffs)
        keep = mag >= rel_tol * mag.max()
        if not keep.any():
            return 0
        return int(np.abs(self.modes[keep]).max())

    # -- pointwise evaluation (arbitrary parameters) --------------------

    def _phases(self, t, order: int):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        n = self.modes
        w = 2j * np.pi * n / self.period
        basis = np.exp(np.outer(t, w))
        if order:
            basis = basis * w[None, :] ** order
        return basis

    def point(self, t):
        return self._phases(t, 0) @ self.coeffs

    def velocity(self, t):
        return self._phases(t, 1) @ self.coeffs

    def acceleration(self, t):
        return self._phases(t, 2) @ self.coeffs

    # -- uniform sampling (FFT fast path) -------------------------------

    def sample(self, n_nodes: int, order: int = 0) -> np.ndarray:
        """Values of the curve (or its order-th derivative) at t_j = j P / n."""
        if n_nodes < self.coeffs.size:
            raise ValueError("n_nodes must resolve all stored modes")
        spec = np.zeros(n_nodes, dtype=complex)
        n = self.modes
        w = (2j * np.pi / self.period) * n
        spec[n % n_nodes] = self.coeffs * w**order if order else self.coeffs
        return np.fft.ifft(spec) * n_nodes

    def nodes(self, n_nodes: int) -> "CurveNodes":
        t = np.arange(n_nodes) * (self.period / n_nodes)
        z = self.sample(n_nodes)
        dz = self.sample(n_nodes, order=1)
        d2z = self.sample(n_nodes, order=2)
        speed = np.abs(dz)
        if speed.min() <= 0 or not np.all(np.isfinite(speed)):
            raise ValueError("degenerate parametrization (vanishing velocity)")
        tangent = dz / speed
        normal = -1j * tangent
        curvature = np.imag(np.conj(dz) * d2z) / speed**3
        return CurveNodes(self, t, z, dz, d2z, speed, tangent, normal, curvature)

    # -- integral quantities --------------------------------------------

    def length(self, n_quad: int | None = None) -> float:
        n = n_quad or max(16 * self.coeffs.size, 512)
        speed = np.abs(self.sample(n, order=1))
        return float(speed.mean() * self.period)

    def signed_area(self, n_quad: int | None = None) -> float:
        n = n_quad or max(16 * self.coeffs.size, 512)
        z = self.sample(n)
        dz = self.sample(n, order=1)
        return float(0.5 * np.mean(np.imag(np.conj(z) * dz)) * self.period)

    @property
    def is_ccw(self) -> bool:
        return self.signed_area() > 0

    def speed_variation(self) -> float:
        """Relative deviation of |gamma'| from its mean (0 for arclength)."""
        n = max(8 * self.coeffs.size, 256)
        speed = np.abs(self.sample(n, order=1))
        return float((speed.max() - speed.min()) / speed.mean())

    # -- rigid motions and scaling (used heavily by tests) --------------

    def translated(self, shift: complex) -> "FourierCurve":
        c = self.coeffs.copy()
        c[self.half] += shift
        return FourierCurve(c, self.period)

    def rotated(self, angle: float) -> "FourierCurve":
        return FourierCurve(self.coeffs * np.exp(1j * angle), self.period)

    def scaled(self, factor: float) -> "FourierCurve":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return FourierCurve(self.coeffs * factor, self.period * factor)

    def polyline(self, n_nodes: int = 4096) -> np.ndarray:
        """(n, 2) vertex array tracing the curve once (not closed)."""
        z = self.sample(max(n_nodes, self.coeffs.size))
        return np.column_stack([z.real, z.imag])


@dataclass(frozen=True)
class CurveNodes:
    """Equispaced-parameter samples of a curve and its local frame."""

    curve: FourierCurve
    t: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    d2z: np.ndarray
    speed: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    curvature: np.ndarray

    @property
    def n(self) -> int:
        return self.z.size

    @property
    def dt(self) -> float:
        return self.curve.period / self.n

    @property
    def weights(self) -> np.ndarray:
        """Smooth-rule arclength weights; their sum is the curve length."""
        return self.speed * self.dt


# -- constructors -------------------------------------------------------


def circle(radius: float, center: complex = 0.0) -> FourierCurve:
    """Counterclockwise circle, arclength-parametrized exactly."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    coeffs = np.array([0.0, center, radius], dtype=complex)
    return FourierCurve(coeffs, 2 * np.pi * radius)


def from_samples(z: np.ndarray, period: float, n_modes: int) -> FourierCurve:
    """Least-squares/FFT fit of equispaced closed-curve samples."""
    z = np.asarray(z, dtype=complex)
    n = z.size
    if n < 2 * n_modes + 1:
        raise ValueError("need at least 2*n_modes+1 samples")
    spec = np.fft.fft(z) / n
    half = n_modes
    idx = np.arange(-half, half + 1)
    return FourierCurve(spec[idx % n], float(period))


def from_radial(radial_fn, n_modes: int = 64, n_samples: int = 2048) -> FourierCurve:
    """Star-shaped curve r(t) e^{it} from a radius function on [0, 2 pi)."""
    t = np.arange(n_samples) * (2 * np.pi / n_samples)
    r = np.asarray(radial_fn(t), dtype=float)
    if np.any(r <= 0):
        raise ValueError("radius function must be positive")
    return from_samples(r * np.exp(1j * t), 2 * np.pi, n_modes)


# -- arclength reparametrization ----------------------------------------


def reparametrize_arclength(curve: FourierCurve, n_modes: int) -> FourierCurve:
    """Refit the curve so the parameter is arclength and period = length.

    Cumulative arclength is integrated spectrally from a fine sampling of
    |gamma'|, inverted by vectorized Newton at the target equispaced arc
    values, and the relocated samples are refit by FFT with ``n_modes``
    modes.  For resolved curves the result has |gamma'| constant to about
    1e-10 relative; downstream quadratures only need 1e-6.
    """
    n_fine = max(8 * curve.coeffs.size, 8 * (2 * n_modes + 1), 1024)
    speed = np.abs(curve.sample(n_fine, order=1))
    # integrate speed: spectral antiderivative, linear part separated
    shat = np.fft.fft(speed) / n_fine
    mean_speed = shat[0].real
    length = mean_speed * curve.period
    freqs = np.fft.fftfreq(n_fine, d=1.0 / n_fine)  # integer mode numbers
    w = 2j * np.pi * freqs / curve.period
    with np.errstate(divide="ignore", invalid="ignore"):
        anti = np.where(freqs == 0, 0.0, shat / np.where(freqs == 0, 1.0, w))

    def _sum_phases(t, coef, factor):
        # evaluate sum_m coef_m e^{factor_m t} in blocks: the phase matrix
        # for a finely resolved curve would otherwise dominate memory
        out = np.empty(t.size, dtype=complex)
        for lo in range(0, t.size, 512):
            hi = min(lo + 512, t.size)
            out[lo:hi] = np.exp(np.outer(t[lo:hi], factor)) @ coef
        return out

    def cum_arc(t):
        # s(t) = mean_speed * t + periodic part
        per = _sum_phases(t, anti, w).real
        per0 = anti.real.sum()  # periodic part at t = 0
        return mean_speed * t + (per - per0)

    def speed_at(t):
        return _sum_phases(t, shat, 2j * np.pi * freqs / curve.period).real

    n_fit = max(4 * (2 * n_modes + 1), 256)
    target = np.arange(n_fit) * (length / n_fit)
    t = target / mean_speed
    for _ in range(50):
        resid = cum_arc(t) - target
        t = t - resid / speed_at(t)
        if np.max(np.abs(resid)) < 1e-13 * length:
            break
    z = curve.point(t)
    return from_samples(z, length, n_modes)


# -- bending-energy trust region ----------------------------------------


def curvature_spectrum(curve: FourierCurve, oversample: int = 4) -> np.ndarray:
    """FFT coefficients of curvature along the (arclength) parameter."""
    m = max(oversample * curve.coeffs.size, 256)
    kappa = curve.nodes(m).curvature
    return np.fft.fft(kappa) / m


def elastic_energy(curve: FourierCurve, band: int | None = None) -> float:
    """Sum of squared curvature Fourier coefficients, optionally banded.

    The energy is defined through arclength modes, so the curve must be
    arclength-reparametrized.  Truncation at the working mode count
    leaves percent-level speed variation on wiggly shapes; that residual
    is part of the discretization, so only blatant violations raise.
    """
    if curve.speed_variation() > 5e-2:
        raise ValueError("elastic energy requires an arclength-reparametrized curve")
    spec = curvature_spectrum(curve)
    m = spec.size
    if band is None:
        return float(np.sum(np.abs(spec) ** 2))
    freqs = np.fft.fftfreq(m, d=1.0 / m)
    keep = np.abs(freqs) <= band
    return float(np.sum(np.abs(spec[keep]) ** 2))


def elastic_energies(curve: FourierCurve, band: int) -> tuple[float, float]:
    """(total, band-limited) bending energy from one curvature spectrum."""
    spec = curvature_spectrum(curve)
    if curve.speed_variation() > 5e-2:
        raise ValueError("elastic energy requires an arclength-reparametrized curve")
    m = spec.size
    freqs = np.fft.fftfreq(m, d=1.0 / m)
    total = float(np.sum(np.abs(spec) ** 2))
    banded = float(np.sum(np.abs(spec[np.abs(freqs) <= band]) ** 2))
    return total, banded


@dataclass(frozen=True)
class TrustRegionReport:
    in_region: bool
    simple: bool
    energy_total: float
    energy_band: float
    band: int

    def __bool__(self) -> bool:
        return self.in_region


def is_simple(curve: FourierCurve, n_nodes: int | None = None) -> bool:
    """Non-self-intersection test on a dense polyline."""
    n = n_nodes or max(8 * curve.coeffs.size, 512)
    pts = curve.polyline(n)
    ring = LineString(np.vstack([pts, pts[:1]]))
    if not ring.is_simple:
        return False
    poly = Polygon(pts)
    return poly.is_valid and poly.area > 0


def in_trust_region(
    curve: FourierCurve, k: float, c: float = 2.0, eps_f: float = 0.01
) -> TrustRegionReport:
    """Membership in the set of simple curves with bending energy
    concentrated in modes |n| <= ceil(c k), up to a fraction eps_f.

    Self-intersection makes the result false rather than an error, so
    candidate updates can be screened without try/except plumbing.
    """
    if not 1.0 <= c <= 3.0:
        raise ValueError("energy concentration factor c must lie in [1, 3]")
    band = int(np.ceil(c * k))
    if not is_simple(curve):
        return TrustRegionReport(False, False, np.nan, np.nan, band)
    if curve.speed_variation() > 5e-2:
        n_fit = max(2 * curve.effective_bandwidth() + 8, 32)
        curve = reparametrize_arclength(curve, n_fit)
        if curve.speed_variation() > 5e-2:
            # near-cusp curve the arclength refit cannot resolve; its
            # bending energy cannot be certified, so it is not a member
            return TrustRegionReport(False, True, np.nan, np.nan, band)
    e_tot, e_band = elastic_energies(curve, band)
    ok = e_band >= (1.0 - eps_f) * e_tot
    return TrustRegionReport(ok, True, e_tot, e_band, band)


# -- normal perturbations (shape updates) -------------------------------


@dataclass(frozen=True)
class NormalPerturbation:
    """Real trigonometric normal shift h(t) = a0 + sum a_n cos + b_n sin.

    Coefficient vector ordering is [1 | cos n, sin n]_{n=1..N}, matching
    the shape-Jacobian column layout.
    """

    a0: float
    a_cos: np.ndarray = field(default_factory=lambda: np.zeros(0))
    b_sin: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        a = np.asarray(self.a_cos, dtype=float)
        b = np.asarray(self.b_sin, dtype=float)
        if a.size != b.size:
            raise ValueError("a_cos and b_sin must have equal length")
        object.__setattr__(self, "a_cos", a)
        object.__setattr__(self, "b_sin", b)

    @property
    def bandlimit(self) -> int:
        return self.a_cos.size

    def evaluate(self, t, period: float):
        t = np.asarray(t, dtype=float)
        h = np.full_like(t, self.a0, dtype=float)
        for n in range(1, self.bandlimit + 1):
            ph = 2 * np.pi * n * t / period
            h += self.a_cos[n - 1] * np.cos(ph) + self.b_sin[n - 1] * np.sin(ph)
        return h

    def as_vector(self) -> np.ndarray:
        v = np.empty(1 + 2 * self.bandlimit)
        v[0] = self.a0
        v[1::2] = self.a_cos
        v[2::2] = self.b_sin
        return v

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "NormalPerturbation":
        v = np.asarray(v, dtype=float)
        if v.size % 2 == 0:
            raise ValueError("coefficient vector must have odd length [1|cos,sin pairs]")
        return cls(float(v[0]), v[1::2].copy(), v[2::2].copy())

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_vector()))


def basis_functions(n_band: int, t: np.ndarray, period: float) -> np.ndarray:
    """Columns [1, cos(2 pi n t/P), sin(2 pi n t/P)] for n = 1..n_band."""
    cols = [np.ones_like(t)]
    for n in range(1, n_band + 1):
        ph = 2 * np.pi * n * t / period
        cols.append(np.cos(ph))
        cols.append(np.sin(ph))
    return np.column_stack(cols)


def gaussian_filter(
    pert: NormalPerturbation, level: int, n_gamma: int
) -> NormalPerturbation:
    """Damp mode n by exp(-n^2 / (sigma^2 n_gamma^2)), sigma = 10^(1-level).

    Level 1 is the gentlest pass; each further level shrinks sigma by 10.
    The constant term is untouched.
    """
    if not 1 <= level <= 10:
        raise ValueError("filter level must lie in 1..10")
    if n_gamma < 1:
        raise ValueError("n_gamma must be at least 1")
    sigma = 10.0 ** (1 - level)
    n = np.arange(1, pert.bandlimit + 1)
    damp = np.exp(-(n.astype(float) ** 2) / (sigma**2 * n_gamma**2))
    return NormalPerturbation(pert.a0, pert.a_cos * damp, pert.b_sin * damp)


def apply_perturbation(
    curve: FourierCurve, pert: NormalPerturbation, n_modes: int | None = None
) -> FourierCurve:
    """Shift the curve along its outward normal by h(t); refit by FFT.

    The result is generally not arclength-parametrized; reparametrize
    before building quadratures on it.
    """
    half_new = curve.half + pert.bandlimit if n_modes is None else n_modes
    n_s = max(4 * (2 * half_new + 1), 4 * curve.coeffs.size, 256)
    nd = curve.nodes(n_s)
    h = pert.evaluate(nd.t, curve.period)
    out = from_samples(nd.z + h * nd.normal, curve.period, half_new)
    speed = np.abs(out.sample(n_s, order=1))
    if speed.min() <= 1e-8 * nd.speed.mean():
        raise ValueError("perturbation collapses the curve (vanishing tangent)")
    return out


# -- curve files ---------------------------------------------------------
#
# Plain text, bit-exact round trip via 17 significant digits:
#
#   # invscat curve v1
#   period <float>
#   modes <-half> <half>
#   <n> <Re c_n> <Im c_n>      (one line per mode, ascending n)


def write_curve(path, curve: FourierCurve) -> None:
    half = curve.half
    lines = ["# invscat curve v1", f"period {curve.period:.17g}", f"modes {-half} {half}"]
    for n, c in zip(curve.modes, curve.coeffs):
        lines.append(f"{n} {c.real:.17g} {c.imag:.17g}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_curve(path) -> FourierCurve:
    with open(path) as f:
        rows = [ln.strip() for ln in f if ln.strip() and not ln.startswith("#")]
    if len(rows) < 2 or not rows[0].startswith("period") or not rows[1].startswith("modes"):
        raise ValueError(f"{path}: not a curve file (expected period/modes header)")
    period = float(rows[0].split()[1])
    lo, hi = (int(v) for v in rows[1].split()[1:3])
    if hi != -lo:
        raise ValueError(f"{path}: mode range must be symmetric, got {lo}..{hi}")
    coeffs = np.zeros(hi - lo + 1, dtype=complex)
    seen = set()
    for row in rows[2:]:
        parts = row.split()
        n = int(parts[0])
        if not lo <= n <= hi or n in seen:
            raise ValueError(f"{path}: bad or repeated mode index {n}")
        seen.add(n)
        coeffs[n - lo] = float(parts[1]) + 1j * float(parts[2])
    if len(seen) != hi - lo + 1:
        raise ValueError(f"{path}: missing mode lines")
    return FourierCurve(coeffs, period)
