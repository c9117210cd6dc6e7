"""Scene A: a smeared line charge flying over a PEC grating.

The grating teeth stand on a PEC ground plane that spans the whole grid, so
uniform flight over the flat parts does not radiate.  The charge is switched
on and off with erf ramps in the vacuum clearance on either side; that
leaves a static charge trail, which has no magnetic field, so the far field
is built from Hz alone (value and normal derivative) on an open contour
above the beam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from ..constants import c, e_charge, eta0
from ..errors import DomainError, IncompleteRunError
from ..kinematics import GratingSpec, smith_purcell_wavelength
from .yee import CurrentPatch, SimGrid, Yee2D


@dataclass(frozen=True)
class MovingChargeSource:
    """Line charge of ``charge`` elementary charges per metre along z.

    ``smoothing_radius`` is the Gaussian standard deviation of the charge
    cloud in cells; ``ramp_length`` the erf switching length (m).
    """

    speed: float  # beta
    charge: float = 1.0
    height_above_grating: float = 30e-9
    smoothing_radius: float = 2.0
    ramp_length: float = 0.25e-6

    def __post_init__(self):
        if not 0.0 < self.speed < 1.0:
            raise DomainError("speed must lie in (0, 1)")
        if self.height_above_grating <= 0:
            raise DomainError("height above grating must be positive")
        if self.smoothing_radius <= 0 or self.ramp_length <= 0:
            raise DomainError("smoothing radius and ramp length must be positive")


@dataclass(frozen=True)
class LongitudinalLayout:
    grid: SimGrid
    pec: np.ndarray
    ground_row: int  # first vacuum row above the ground plane
    grating_x: tuple[float, float]
    tooth_top: float
    beam_y: float
    x_on: float  # ramp-up centre
    x_off: float  # ramp-down centre
    contour: tuple[int, int, int, int]  # i_left, i_right, j_bottom, j_top (Hz indices)


@dataclass(frozen=True)
class LongitudinalSpectrum:
    """Radiated energy per unit length along z, per radian, per metre of wavelength."""

    wavelengths: np.ndarray
    angles: np.ndarray  # polar angle from the velocity, rad
    energy: np.ndarray  # shape (n_angles, n_wavelengths)
    meta: dict = field(default_factory=dict, compare=False)

    def peak_wavelength(self, angle_index: int) -> float:
        """Peak position, refined by a parabola through the top three samples."""
        s = self.energy[angle_index]
        k = int(np.argmax(s))
        if 0 < k < s.size - 1:
            y0, y1, y2 = s[k - 1], s[k], s[k + 1]
            den = y0 - 2 * y1 + y2
            off = 0.5 * (y0 - y2) / den if den != 0 else 0.0
            return float(np.interp(k + off, np.arange(s.size), self.wavelengths))
        return float(self.wavelengths[k])

    def peak_contrast(self, angle_index: int) -> float:
        """Peak over median of the band; large for a sharp resonance."""
        s = self.energy[angle_index]
        return float(s.max() / np.median(s))


def longitudinal_layout(
    grating: GratingSpec,
    beam: MovingChargeSource,
    cell_size: float = 5e-9,
    absorber_cells: int = 16,
    clearance: float | None = None,
    ground_cells: int = 4,
) -> LongitudinalLayout:
    """Grid with ``clearance`` (default 5 design wavelengths) around the grating."""
    d = cell_size
    lam = smith_purcell_wavelength(grating, beam.speed, math.pi / 2)
    clearance = 5 * lam if clearance is None else clearance
    n_clear = int(math.ceil(clearance / d))
    n_grating = int(round(grating.total_length / d))
    n_tooth_h = int(round(grating.tooth_height / d))
    nx = 2 * absorber_cells + 2 * n_clear + n_grating
    j_g = absorber_cells + ground_cells
    j_top = j_g + n_tooth_h
    ny = j_top + n_clear + absorber_cells
    grid = SimGrid(d, nx, ny, absorber_cells=absorber_cells)

    pec = np.zeros((nx, ny), dtype=bool)
    pec[:, :j_g] = True
    i_g0 = absorber_cells + n_clear
    n_period = grating.period / d
    n_w = grating.duty_cycle * grating.period / d
    for t in range(grating.n_teeth):
        a = i_g0 + int(round(t * n_period + 0.5 * (n_period - n_w)))
        b = a + int(round(n_w))
        pec[a:b, j_g:j_top] = True

    gx = (i_g0 * d, (i_g0 + n_grating) * d)
    tooth_top = j_top * d
    beam_y = tooth_top + beam.height_above_grating
    # ramps sit in the clearance, 4 ramp lengths clear of absorber and grating
    x_lo = absorber_cells * d
    x_on = x_lo + 4 * beam.ramp_length + 4 * beam.smoothing_radius * d
    x_off = nx * d - x_on
    if x_on + 4 * beam.ramp_length > gx[0] or x_off - 4 * beam.ramp_length < gx[1]:
        raise DomainError("clearance too short for the charge ramps")
    # contour: sides 2 cells inside the absorber, top 1 um above the teeth
    # (or two thirds of the clearance), bottom 0.3 um above the beam
    i_l = absorber_cells + 2
    i_r = nx - absorber_cells - 2
    j_t = j_top + int(round(min(1e-6, 2 * clearance / 3) / d))
    j_b = int(math.ceil((beam_y + 0.3e-6) / d))
    if j_b >= j_t:
        raise DomainError("monitor contour does not fit above the beam")
    return LongitudinalLayout(grid, pec, j_g, gx, tooth_top, beam_y, x_on, x_off, (i_l, i_r, j_b, j_t))


class _ChargeSource:
    def __init__(self, beam: MovingChargeSource, layout: LongitudinalLayout):
        g = layout.grid
        self.d = g.cell_size
        self.v = beam.speed * c
        self.q = beam.charge * e_charge
        self.sigma = beam.smoothing_radius * self.d
        self.w = beam.ramp_length
        self.x_on = layout.x_on
        self.x_off = layout.x_off
        self.y = layout.beam_y
        self.x_start = layout.x_on - 4 * beam.ramp_length
        # 2.5 sigma keeps the cloud off the tooth tops at the default 30 nm
        self.half = int(math.ceil(2.5 * beam.smoothing_radius))
        self.nx = g.nx

    def position(self, t):
        return self.x_start + self.v * t

    def patches(self, t):
        xe = self.position(t)
        amp = 0.25 * (1 + erf((xe - self.x_on) / self.w)) * (1 + erf((self.x_off - xe) / self.w))
        if amp < 1e-14:
            return ()
        d, h = self.d, self.half
        ic = int(math.floor(xe / d - 0.5))
        jc = int(round(self.y / d))
        i0 = max(ic - h, 0)
        i1 = min(ic + h + 2, self.nx)
        xs = (np.arange(i0, i1) + 0.5) * d
        ys = np.arange(jc - h, jc + h + 1) * d
        gx = np.exp(-0.5 * ((xs - xe) / self.sigma) ** 2)
        gy = np.exp(-0.5 * ((ys - self.y) / self.sigma) ** 2)
        shape = np.outer(gx, gy)
        shape /= shape.sum() * d * d
        return [CurrentPatch("x", i0, jc - h, amp * self.q * self.v * shape)]


def _contour_geometry(layout: LongitudinalLayout):
    """Hz index pairs (inner, outer), midpoints, outward normals, element lengths."""
    d = layout.grid.cell_size
    i_l, i_r, j_b, j_t = layout.contour
    inner, outer, pos, nrm = [], [], [], []
    for i in range(i_l, i_r):  # top, normal +y
        inner.append((i, j_t))
        outer.append((i, j_t + 1))
        pos.append(((i + 0.5) * d, (j_t + 1) * d))
        nrm.append((0.0, 1.0))
    for j in range(j_b, j_t + 1):  # left, normal -x
        inner.append((i_l, j))
        outer.append((i_l - 1, j))
        pos.append((i_l * d, (j + 0.5) * d))
        nrm.append((-1.0, 0.0))
    for j in range(j_b, j_t + 1):  # right, normal +x
        inner.append((i_r - 1, j))
        outer.append((i_r, j))
        pos.append((i_r * d, (j + 0.5) * d))
        nrm.append((1.0, 0.0))
    inner = np.array(inner).T
    outer = np.array(outer).T
    return (inner[0], inner[1]), (outer[0], outer[1]), np.array(pos), np.array(nrm), d


def transit_time(layout: LongitudinalLayout, beam: MovingChargeSource) -> float:
    """Time for the charge to be fully switched off, plus light crossing of the grid."""
    v = beam.speed * c
    x_end = layout.x_off + 4 * beam.ramp_length
    x_start = layout.x_on - 4 * beam.ramp_length
    g = layout.grid
    diag = math.hypot(g.nx, g.ny) * g.cell_size
    return (x_end - x_start) / v + diag / c


def run_longitudinal(
    beam: MovingChargeSource,
    grating: GratingSpec,
    angles,
    wavelengths=None,
    layout: LongitudinalLayout | None = None,
    cell_size: float = 5e-9,
    duration: float | None = None,
    samples_per_period: int = 8,
) -> LongitudinalSpectrum:
    """Radiated spectrum at each polar angle (rad, from the velocity).

    Hz on the monitor contour is recorded every few steps, Fourier
    transformed, and mapped to the far field with the 2D Kirchhoff integral
    sum[(dHz/dn + i k (r.n) Hz) exp(-i k r.r') dl].
    """
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if wavelengths is None:
        wavelengths = np.linspace(400e-9, 900e-9, 501)
    wavelengths = np.asarray(wavelengths, dtype=float)
    if layout is None:
        layout = longitudinal_layout(grating, beam, cell_size=cell_size)
    g = layout.grid
    need = transit_time(layout, beam)
    duration = need if duration is None else duration
    if duration < need * (1 - 1e-9):
        raise IncompleteRunError(
            f"run duration {duration:.3e} s ends before the charge transit completes ({need:.3e} s)"
        )

    sim = Yee2D(g, pec=layout.pec)
    src = [_ChargeSource(beam, layout)]
    inner, outer, pos, nrm, dl = _contour_geometry(layout)
    t_min_period = wavelengths.min() / c
    every = max(1, int(t_min_period / g.dt / samples_per_period))
    n_steps = int(math.ceil(duration / g.dt))
    n_rec = n_steps // every
    rec_in = np.empty((n_rec, inner[0].size))
    rec_out = np.empty((n_rec, inner[0].size))
    times = np.empty(n_rec)
    r = 0
    for n in range(n_steps):
        f = sim.step(src)
        if (n + 1) % every == 0 and r < n_rec:
            rec_in[r] = f.hz[inner]
            rec_out[r] = f.hz[outer]
            times[r] = f.time - 0.5 * g.dt
            r += 1

    omega = 2 * math.pi * c / wavelengths
    kernel = np.exp(1j * np.outer(times, omega)) * (every * g.dt)
    val = (0.5 * (rec_in + rec_out)).T @ kernel  # (n_pts, n_freq)
    dn = ((rec_out - rec_in) / g.cell_size).T @ kernel
    k = omega / c
    origin = np.array([0.5 * sum(layout.grating_x), layout.tooth_top])
    rel = pos - origin
    energy = np.empty((angles.size, wavelengths.size))
    for a, th in enumerate(angles):
        rhat = np.array([math.cos(th), math.sin(th)])
        proj = rel @ rhat
        rn = nrm @ rhat
        phase = np.exp(-1j * np.outer(proj, k))
        integral = np.sum((dn + 1j * np.outer(rn, k) * val) * phase, axis=0) * dl
        per_omega = eta0 * np.abs(integral) ** 2 / (8 * math.pi**2 * k)
        energy[a] = per_omega * 2 * math.pi * c / wavelengths**2
    return LongitudinalSpectrum(
        wavelengths,
        angles,
        energy,
        meta={"steps": n_steps, "cell_size": g.cell_size, "grid": (g.nx, g.ny), "duration": duration},
    )
