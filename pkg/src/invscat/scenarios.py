"""Built-in ground truths, synthetic-survey generation, and a
measurement-resolution diagnostic.

A survey is a frequency schedule plus a sensor policy: either the
frequency-scaled count (both receiver and direction counts grow like
ten per unit wavenumber) or a fixed pair.  Synthetic data always comes
from the boundary-integral solver: a homogeneous-contrast medium and a
penetrable obstacle with the matching interior wavenumber scatter
identically, so one generator serves both inversion pipelines while
staying independent of the volumetric discretization.

Datasets are persisted as a directory: one manifest carrying the plan,
the truth descriptor, generator settings, and content hashes, plus one
measurement file per frequency.  Generation is deterministic, so a
rebuilt dataset is bit-identical and hash checks can stand in for
provenance.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from shapely import contains_xy
from shapely.geometry import Polygon

from .acquisition import (
    AcquisitionPlan,
    Measurements,
    frequency_schedule,
    read_measurements,
    write_measurements,
)
from .curves import FourierCurve, circle, from_radial, read_curve, write_curve
from .specfun import Wavenumber
from .transmission import forward_obstacle

__all__ = [
    "builtin_shape",
    "GroundTruth",
    "Survey",
    "Dataset",
    "generate_dataset",
    "load_dataset",
    "tau_meas",
]

_SHAPE_DIR = Path(__file__).parent / "shapes"


def _glider_radius(t):
    return 0.9 * (
        1.0
        + 0.2 * np.cos(3 * t)
        + 0.02 * np.cos(4 * t)
        + 0.1 * np.cos(6 * t)
        + 0.1 * np.cos(8 * t)
    )


def builtin_shape(name: str):
    """Named ground-truth geometry.

    glider       star-shaped curve with radial modes {3, 4, 6, 8}; its
                 position series is exactly bandlimited at 9 modes
    plane35      aircraft-like silhouette stored as a 35-coefficient
                 series (17 modes); fixed stand-in shipped with the
                 package, see tools/make_shapes.py
    cavity       U-shaped trapping cavity, mouth 0.4 wide and 1.5 deep;
                 fixed stand-in shipped with the package
    three_stars  tuple of three glider copies at one-third scale, with
                 centers 4.2*sqrt(3) ~ 7.27 apart, more than the longest
                 wavelength (2 pi) of the standard schedule
    """
    if name == "glider":
        # cos(nt) e^{it} splits into modes n+1 and -(n-1), so the radial
        # content {3,4,6,8} makes the position series stop at mode 9
        return from_radial(_glider_radius, n_modes=9)
    if name == "plane35":
        return read_curve(_SHAPE_DIR / "plane35.curve")
    if name == "cavity":
        return read_curve(_SHAPE_DIR / "cavity.curve")
    if name == "three_stars":
        base = from_radial(_glider_radius, n_modes=9).scaled(1.0 / 3.0)
        centers = 4.2 * np.exp(1j * (np.pi / 2 + 2 * np.pi * np.arange(3) / 3))
        return tuple(base.translated(c) for c in centers)
    raise ValueError(f"unknown shape name: {name!r}")


def disk(center: complex, radius: float) -> FourierCurve:
    return circle(radius, center)


@dataclass(frozen=True)
class GroundTruth:
    """Scatterer description: one or more simple curves and a contrast.

    kind "curve" is an impenetrable-boundary-style unknown recovered by
    the shape solver; kind "medium" realizes the same region as the
    indicator contrast q = eta - 1 for the volumetric solver.  Both scatter
    identically, and both are simulated with the boundary solver.
    """

    kind: str
    curves: tuple
    eta: float

    def __post_init__(self):
        if self.kind not in ("curve", "medium"):
            raise ValueError("kind must be 'curve' or 'medium'")
        if self.eta <= 0 or self.eta == 1.0:
            raise ValueError("contrast eta must be positive and not 1")
        object.__setattr__(self, "curves", tuple(self.curves))

    @classmethod
    def obstacle(cls, curves, eta: float) -> "GroundTruth":
        if isinstance(curves, FourierCurve):
            curves = (curves,)
        return cls("curve", tuple(curves), eta)

    @classmethod
    def medium(cls, curves, eta: float) -> "GroundTruth":
        if isinstance(curves, FourierCurve):
            curves = (curves,)
        return cls("medium", tuple(curves), eta)

    def contrast_function(self):
        """q(x, y) = eta - 1 inside the region, 0 outside; vectorized."""
        polys = [Polygon(c.polyline(4096)) for c in self.curves]
        amp = self.eta - 1.0

        def q(x, y):
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            inside = np.zeros(x.shape, dtype=bool)
            for p in polys:
                inside |= contains_xy(p, x, y)
            return amp * inside

        return q


@dataclass(frozen=True)
class Survey:
    """Frequency schedule plus sensor policy on the standard ring."""

    frequencies: tuple
    radius: float = 10.0
    sensors: object = "scaled"  # "scaled" or a fixed (n_receivers, n_directions)

    def __post_init__(self):
        ks = tuple(float(k) for k in self.frequencies)
        if not ks or any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("frequencies must be strictly increasing")
        object.__setattr__(self, "frequencies", ks)
        if self.sensors != "scaled":
            nr, nd = self.sensors
            object.__setattr__(self, "sensors", (int(nr), int(nd)))

    @classmethod
    def standard(cls, k_max: float = 30.0, dk: float = 0.25, sensors="scaled", radius=10.0):
        count = int(round((k_max - 1.0) / dk)) + 1
        return cls(tuple(frequency_schedule(1.0, dk, count)), radius, sensors)

    def plan_for(self, k: float) -> AcquisitionPlan:
        if self.sensors == "scaled":
            return AcquisitionPlan.scaled(k, self.radius)
        nr, nd = self.sensors
        return AcquisitionPlan.fixed(k, nr, nd, self.radius)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class Dataset:
    directory: Path
    manifest: dict

    @property
    def frequencies(self):
        return [entry["k"] for entry in self.manifest["files"]]

    @property
    def eta(self) -> float:
        return float(self.manifest["truth"]["eta"])

    def truth(self) -> GroundTruth:
        info = self.manifest["truth"]
        curves = tuple(read_curve(self.directory / f) for f in info["curves"])
        return GroundTruth(info["kind"], curves, float(info["eta"]))

    def load(self, k: float, verify: bool = True) -> Measurements:
        for entry in self.manifest["files"]:
            if abs(entry["k"] - k) <= 1e-12 * max(k, 1.0):
                path = self.directory / entry["file"]
                if verify and _sha256(path) != entry["sha256"]:
                    raise ValueError(f"checksum mismatch for {path.name}")
                return read_measurements(path)
        raise KeyError(f"no measurements at k={k}")

    def load_all(self, verify: bool = True):
        return [self.load(entry["k"], verify) for entry in self.manifest["files"]]


def generate_dataset(
    truth: GroundTruth,
    survey: Survey,
    directory,
    gen_ppw: float = 100.0,
) -> Dataset:
    """Simulate and persist measurements for every survey frequency.

    The boundary solver runs at gen_ppw points per wavelength, kept
    deliberately away from inversion-side settings.  A frequency whose
    forward solve fails is recorded under "gaps" and skipped.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    curve_files = []
    for i, c in enumerate(truth.curves):
        name = f"truth_{i}.curve"
        write_curve(directory / name, c)
        curve_files.append(name)

    files = []
    gaps = []
    for i, k in enumerate(survey.frequencies):
        plan = survey.plan_for(k)
        wn = Wavenumber.from_contrast(k, truth.eta)
        name = f"meas_{i:04d}.dat"
        try:
            meas = forward_obstacle(list(truth.curves), wn, plan, ppw=gen_ppw)
        except Exception as exc:
            gaps.append({"k": k, "error": str(exc)})
            continue
        write_measurements(directory / name, meas)
        files.append({"k": k, "file": name, "sha256": _sha256(directory / name)})

    manifest = {
        "format": "invscat dataset v1",
        "gen_ppw": float(gen_ppw),
        "truth": {"kind": truth.kind, "eta": truth.eta, "curves": curve_files},
        "survey": {
            "frequencies": list(survey.frequencies),
            "radius": survey.radius,
            "sensors": "scaled" if survey.sensors == "scaled" else list(survey.sensors),
        },
        "files": files,
        "gaps": gaps,
    }
    with open(directory / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
        f.write("\n")
    return Dataset(directory, manifest)


def load_dataset(directory) -> Dataset:
    directory = Path(directory)
    with open(directory / "manifest.json") as f:
        manifest = json.load(f)
    if manifest.get("format") != "invscat dataset v1":
        raise ValueError("not a dataset directory (bad or missing manifest format)")
    return Dataset(directory, manifest)


def tau_meas(meas: Measurements) -> float:
    """Fraction of measurement spectrum sitting on the boundary modes.

    The data array over (incidence angle, receiver angle) is Fourier
    transformed in both angles; tau sums the magnitudes along the two
    extreme-frequency rows and the two extreme-frequency columns,
    normalized by the largest magnitude.  Well-resolved data decays
    spectrally and gives tau near zero; tau above roughly 0.1 signals
    that the sensor counts under-resolve the scattered field.
    """
    nd, nr = meas.values.shape
    if nd < 4 or nr < 4:
        raise ValueError("tau needs at least 4 directions and 4 receivers")
    spec = np.abs(np.fft.fft2(meas.values))
    rows = [nd // 2, nd // 2 + 1]
    cols = [nr // 2, nr // 2 + 1]
    total = spec[rows, :].sum() + spec[:, cols].sum()
    return float(total / spec.max())
