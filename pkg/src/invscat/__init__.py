"""Two-dimensional acoustic inverse scattering workbench.

Boundary-integral and volume-integral forward solvers for penetrable
scatterers, their shape and medium Jacobians, and multi-frequency
recursive-linearization drivers that recover either an interface or a
compactly supported sound-speed profile from far measurements.
"""

from .specfun import Wavenumber, cyl_bessel, hankel1, greens_kernel
from .curves import (
    FourierCurve,
    NormalPerturbation,
    circle,
    from_radial,
    from_samples,
    reparametrize_arclength,
    apply_perturbation,
    gaussian_filter,
    elastic_energy,
    in_trust_region,
    is_simple,
    read_curve,
    write_curve,
)
from .acquisition import (
    AcquisitionPlan,
    Measurements,
    frequency_schedule,
    read_measurements,
    write_measurements,
)
from .transmission import TransmissionSystem, forward_obstacle, node_count
from .shape_derivative import (
    BoundaryTraces,
    boundary_traces,
    frechet_apply,
    assemble_obstacle_jacobian,
)

__version__ = "0.1.0"
