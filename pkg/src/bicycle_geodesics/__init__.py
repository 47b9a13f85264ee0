"""Bicycle (sub-Riemannian) geodesics in R^3: integration, elliptic closed
forms, monodromy, symmetries and boundary-value shooting."""

from .closedform import (back_track_cartesian, cylindrical_track, front_track_cartesian, kappa_closed,
                         kappa_sq_closed, monodromy_angles, monodromy_closed, tau_closed)
from .dynamics import (IntegrationOptions, PhaseState, SampledPath, canonical_initial_state, integrate,
                       invariant_report, magnetic_data, peak_initial_state, shortcut_bound)
from .errors import (CircleBranchError, DegenerateError, DivergenceError, DomainError, ExtractionError,
                     GeodesicError, IntegrationError, NearSingularCharacteristic, NoSolutionFound,
                     NotApplicableError, SolitonError)
from .params import GeodesicParams
from .rodshape import curvature_torsion, frenet_series, kappa_extrema, ranges, structure_residuals
from .screw import RigidMotion, ScrewMotion, screw_from_rigid
from .shooting import FramePlacement, ShootingOptions, ShootingResult, shoot
from .transforms import (conjecture_check, extract_monodromy, flip, flip_path, half_monodromy,
                         reflect_params, torsion_shift_rescale)

__version__ = "0.1.0"

__all__ = [
    "CircleBranchError",
    "DegenerateError",
    "DivergenceError",
    "DomainError",
    "ExtractionError",
    "FramePlacement",
    "GeodesicError",
    "GeodesicParams",
    "IntegrationError",
    "IntegrationOptions",
    "NearSingularCharacteristic",
    "NoSolutionFound",
    "NotApplicableError",
    "PhaseState",
    "RigidMotion",
    "SampledPath",
    "ScrewMotion",
    "ShootingOptions",
    "ShootingResult",
    "SolitonError",
    "back_track_cartesian",
    "canonical_initial_state",
    "conjecture_check",
    "curvature_torsion",
    "cylindrical_track",
    "extract_monodromy",
    "flip",
    "flip_path",
    "frenet_series",
    "front_track_cartesian",
    "half_monodromy",
    "integrate",
    "invariant_report",
    "kappa_closed",
    "kappa_extrema",
    "kappa_sq_closed",
    "magnetic_data",
    "monodromy_angles",
    "monodromy_closed",
    "peak_initial_state",
    "ranges",
    "reflect_params",
    "screw_from_rigid",
    "shoot",
    "shortcut_bound",
    "structure_residuals",
    "tau_closed",
    "torsion_shift_rescale",
]
