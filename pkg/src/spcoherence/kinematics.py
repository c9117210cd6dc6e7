"""Electron and radiation kinematics, and diffraction-regime classification.

Lengths are in metres throughout; energies in keV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import ELECTRON_REST_KEV
from .errors import DomainError


@dataclass(frozen=True)
class ElectronKinematics:
    kinetic_energy: float  # keV
    beta: float
    gamma: float


@dataclass(frozen=True)
class GratingSpec:
    """Perfectly conducting rectangular-tooth grating.

    Parameters
    ----------
    period : float
        Grating period (m).
    total_length : float
        Ruled length (m); must be an integer number of periods.
    tooth_height : float
        Tooth height above the ground plane (m).
    duty_cycle : float
        Fraction of each period occupied by a tooth.
    """

    period: float
    total_length: float
    tooth_height: float = 100e-9
    duty_cycle: float = 0.5

    def __post_init__(self):
        if self.period <= 0 or self.total_length <= 0 or self.tooth_height <= 0:
            raise DomainError("grating dimensions must be positive")
        if not 0.0 < self.duty_cycle < 1.0:
            raise DomainError("duty_cycle must lie in (0, 1)")
        ratio = self.total_length / self.period
        if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-6:
            raise DomainError(
                f"total_length/period = {ratio:g} is not a positive integer tooth count"
            )

    @property
    def n_teeth(self) -> int:
        return int(round(self.total_length / self.period))

    @property
    def grating_momentum(self) -> float:
        """Reciprocal-lattice momentum 2*pi/period (rad/m)."""
        return 2.0 * math.pi / self.period


@dataclass(frozen=True)
class RegimeReport:
    observation_distance: float
    coherence_length: float
    beam_width: float
    wavelength: float
    threshold_factor: float
    fraunhofer_distance_coherent: float
    fraunhofer_distance_beam: float
    is_far_field_coherent: bool
    is_far_field_beam: bool
    parallax_ratio: float


def beta_from_energy(kinetic_energy: float) -> ElectronKinematics:
    """Relativistic speed of an electron with the given kinetic energy (keV)."""
    if not kinetic_energy >= 0.0:
        raise DomainError(f"kinetic energy must be non-negative, got {kinetic_energy}")
    gamma = 1.0 + kinetic_energy / ELECTRON_REST_KEV
    # 1 - 1/gamma^2 written to keep precision at small energies
    beta = math.sqrt((gamma - 1.0) * (gamma + 1.0)) / gamma
    return ElectronKinematics(kinetic_energy=kinetic_energy, beta=beta, gamma=gamma)


def smith_purcell_wavelength(
    grating: GratingSpec, beta: float, polar_angle: float, order: int = 1
) -> float:
    """Emitted wavelength (period/order) * (1/beta - cos(theta)).

    ``polar_angle`` is measured from the electron velocity, in radians.
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if order < 1:
        raise DomainError(f"diffraction order must be >= 1, got {order}")
    return grating.period / order * (1.0 / beta - math.cos(polar_angle))


def fraunhofer_distance(aperture: float, wavelength: float) -> float:
    """Fraunhofer distance d**2/lambda."""
    if aperture <= 0 or wavelength <= 0:
        raise DomainError("aperture and wavelength must be positive")
    return aperture**2 / wavelength


def regime_check(
    r: float,
    l_c: float,
    w_beam: float,
    wavelength: float,
    threshold_factor: float = 1.0,
) -> RegimeReport:
    """Classify an observation distance against both candidate apertures.

    The far-field flag for aperture d is ``r > threshold_factor * d**2/lambda``.
    """
    if min(r, l_c, w_beam, wavelength) <= 0:
        raise DomainError("all lengths must be positive")
    if threshold_factor <= 0:
        raise DomainError("threshold_factor must be positive")
    if l_c > w_beam:
        raise DomainError(f"coherence length {l_c} exceeds beam width {w_beam}")
    f_lc = fraunhofer_distance(l_c, wavelength)
    f_beam = fraunhofer_distance(w_beam, wavelength)
    return RegimeReport(
        observation_distance=r,
        coherence_length=l_c,
        beam_width=w_beam,
        wavelength=wavelength,
        threshold_factor=threshold_factor,
        fraunhofer_distance_coherent=f_lc,
        fraunhofer_distance_beam=f_beam,
        is_far_field_coherent=r > threshold_factor * f_lc,
        is_far_field_beam=r > threshold_factor * f_beam,
        parallax_ratio=w_beam / r,
    )
