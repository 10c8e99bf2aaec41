"""Acquisition plans (frequency schedule, sensors) and measurement data.

A plan fixes the multi-frequency protocol: incident plane-wave
directions and receiver points on a circle of radius R, per frequency.
The default sensor policy scales both counts as floor(10 k); a fixed
(n_receivers, n_directions) pair models the limited-aperture regime.

Measurement files are plain text with a self-describing header, 17
significant digits, bit-exact on round trip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "frequency_schedule",
    "AcquisitionPlan",
    "Measurements",
    "write_measurements",
    "read_measurements",
]


def frequency_schedule(k_start: float = 1.0, dk: float = 0.25, count: int = 117) -> np.ndarray:
    """Ascending wavenumbers k_l = k_start + (l-1) dk, l = 1..count."""
    if count < 1 or dk <= 0 or k_start <= 0:
        raise ValueError("need k_start > 0, dk > 0, count >= 1")
    return k_start + dk * np.arange(count)


@dataclass(frozen=True)
class AcquisitionPlan:
    """Sensors for one frequency: directions, receivers, circle radius."""

    k: float
    radius: float
    n_receivers: int
    n_directions: int

    def __post_init__(self):
        if self.k <= 0 or self.radius <= 0:
            raise ValueError("k and radius must be positive")
        if self.n_receivers < 1 or self.n_directions < 1:
            raise ValueError("sensor counts must be positive")

    @classmethod
    def scaled(cls, k: float, radius: float = 10.0) -> "AcquisitionPlan":
        """Default policy: floor(10 k) receivers and directions."""
        n = int(np.floor(10 * k))
        return cls(float(k), float(radius), n, n)

    @classmethod
    def fixed(
        cls, k: float, n_receivers: int, n_directions: int, radius: float = 10.0
    ) -> "AcquisitionPlan":
        return cls(float(k), float(radius), int(n_receivers), int(n_directions))

    @property
    def directions(self) -> np.ndarray:
        """Unit complex incidence directions theta_j, j = 1..n_directions."""
        j = np.arange(1, self.n_directions + 1)
        return np.exp(2j * np.pi * j / self.n_directions)

    @property
    def receivers(self) -> np.ndarray:
        """Complex receiver points on the circle of the given radius."""
        m = np.arange(1, self.n_receivers + 1)
        return self.radius * np.exp(2j * np.pi * m / self.n_receivers)


@dataclass(frozen=True)
class Measurements:
    """Scattered field at receivers: values[j, m] for direction j, receiver m."""

    plan: AcquisitionPlan
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.plan.n_directions, self.plan.n_receivers):
            raise ValueError(
                f"values shape {v.shape} does not match plan "
                f"({self.plan.n_directions}, {self.plan.n_receivers})"
            )
        object.__setattr__(self, "values", v)

    def ravel(self) -> np.ndarray:
        """Direction-major stacked vector, the Jacobian row ordering."""
        return self.values.ravel()

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def write_measurements(path, meas: Measurements) -> None:
    p = meas.plan
    lines = [
        "# invscat measurements v1",
        f"k {p.k:.17g}",
        f"radius {p.radius:.17g}",
        f"n_receivers {p.n_receivers}",
        f"n_directions {p.n_directions}",
        "# directions (Re Im), then values row-major (direction-major), Re Im",
    ]
    for d in p.directions:
        lines.append(f"d {d.real:.17g} {d.imag:.17g}")
    for v in meas.values.ravel():
        lines.append(f"{v.real:.17g} {v.imag:.17g}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_measurements(path) -> Measurements:
    header: dict[str, float] = {}
    values = []
    n_dirs = 0
    with open(path) as f:
        for ln in f:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            parts = ln.split()
            if parts[0] in ("k", "radius", "n_receivers", "n_directions"):
                header[parts[0]] = float(parts[1])
            elif parts[0] == "d":
                n_dirs += 1  # directions are implied by the plan; count only
            else:
                values.append(float(parts[0]) + 1j * float(parts[1]))
    try:
        plan = AcquisitionPlan(
            header["k"], header["radius"], int(header["n_receivers"]), int(header["n_directions"])
        )
    except KeyError as e:
        raise ValueError(f"{path}: missing header field {e}") from None
    if n_dirs != plan.n_directions:
        raise ValueError(f"{path}: direction list length {n_dirs} != {plan.n_directions}")
    vals = np.asarray(values, dtype=complex)
    if vals.size != plan.n_directions * plan.n_receivers:
        raise ValueError(f"{path}: value count {vals.size} does not match plan")
    return Measurements(plan, vals.reshape(plan.n_directions, plan.n_receivers))
