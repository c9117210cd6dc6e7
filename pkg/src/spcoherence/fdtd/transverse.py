"""Scene B: monochromatic current sheet with a transverse profile.

An x-directed sheet current K(x) cos(wt) at y = y_s radiates Hz into both
half-spaces.  Just above the sheet Hz equals K(x)/2 up to sign, and in
vacuum Hz obeys the scalar Helmholtz equation exactly, so the monitored
Hz phasor can be handed straight to the scalar propagators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..constants import c
from ..diffraction import ScalarLineField
from ..errors import ConvergenceError, DomainError, ResolutionError
from .yee import CurrentPatch, SimGrid, Yee2D

CELLS_PER_WAVELENGTH = 20


@dataclass(frozen=True)
class ApertureSource:
    """Coherent emitting cell.

    ``profile="gaussian"`` gives a sheet current density (A/m) with amplitude
    FWHM ``fwhm`` centred at ``center``; ``profile="point"`` puts a line
    current of ``amplitude`` amperes on the single node nearest ``center``.
    """

    fwhm: float
    wavelength: float
    center: float = 0.0
    ramp_periods: float = 5.0
    amplitude: float = 1.0
    profile: str = "gaussian"

    def __post_init__(self):
        if self.wavelength <= 0:
            raise DomainError("wavelength must be positive")
        if self.profile not in ("gaussian", "point"):
            raise DomainError(f"unknown profile {self.profile!r}")
        if self.profile == "gaussian" and self.fwhm <= 0:
            raise DomainError("fwhm must be positive")
        if self.ramp_periods < 0:
            raise DomainError("ramp_periods must be non-negative")

    @property
    def drive_frequency(self) -> float:
        return c / self.wavelength

    def envelope(self, t: float) -> float:
        tr = self.ramp_periods / self.drive_frequency
        if t >= tr:
            return 1.0
        return 0.5 * (1.0 - math.cos(math.pi * t / tr))

    def profile_values(self, x: np.ndarray) -> np.ndarray:
        return self.amplitude * np.exp(-4.0 * math.log(2.0) * ((x - self.center) / self.fwhm) ** 2)


@dataclass(frozen=True)
class NearFieldLine:
    """Steady-state Hz phasor along a line ``height`` above the source plane.

    Phasor convention: Hz(t) = Re[phasor * exp(-i w t)].
    """

    x: np.ndarray
    phasor: np.ndarray
    height: float
    wavelength: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.spacing > self.wavelength / 8 * (1 + 1e-9):
            raise ResolutionError("near-field sample spacing exceeds wavelength/8")

    @property
    def spacing(self) -> float:
        return float(self.x[1] - self.x[0])

    def to_scalar_field(self, x_offset: float = 0.0, z_offset: float = 0.0) -> ScalarLineField:
        """Zero-padded scalar field at z = height + z_offset, x shifted by x_offset."""
        return ScalarLineField.from_samples(
            self.x + x_offset, self.phasor, self.wavelength, z=self.height + z_offset
        )


@dataclass(frozen=True)
class TransverseLayout:
    grid: SimGrid
    source_row: int  # Ex row index j of the sheet
    center_index: int  # Ex column index of the aperture centre
    monitor_row: int  # Hz row index
    steps_per_period: int


def transverse_layout(
    aperture: ApertureSource,
    monitor_height: float,
    cell_size: float | None = None,
    absorber_cells: int = 16,
    half_width: float | None = None,
) -> TransverseLayout:
    """Grid centred on the aperture with the clearances Scene B requires.

    Monitor at least 2 wavelengths above the sheet and at least 5 below the
    absorber; one wavelength of vacuum below the sheet.
    """
    lam = aperture.wavelength
    if monitor_height < 2 * lam * (1 - 1e-9):
        raise DomainError("monitor must be at least two wavelengths above the source")
    d = lam / CELLS_PER_WAVELENGTH if cell_size is None else cell_size
    if aperture.profile == "gaussian" and aperture.fwhm / d < 5:
        d = aperture.fwhm / 5
    if d > lam / 8:
        raise ResolutionError("cell size must be at most wavelength/8")
    if half_width is None:
        extent = 2 * aperture.fwhm if aperture.profile == "gaussian" else 0.0
        half_width = extent + 3 * monitor_height + 2 * lam
    n_half = int(math.ceil(half_width / d))
    nx = 2 * n_half + 2 * absorber_cells
    i_c = nx // 2
    j_s = absorber_cells + int(math.ceil(lam / d))
    j_m = j_s + int(round(monitor_height / d - 0.5))
    ny = j_m + 1 + int(math.ceil(5 * lam / d)) + absorber_cells
    n_per = int(math.ceil(lam / d * math.sqrt(2.0) / 0.99))
    dt = lam / c / n_per
    # aperture centre sits on the Ex node (i_c + 1/2) d
    x0 = aperture.center - (i_c + 0.5) * d
    y0 = -j_s * d
    grid = SimGrid(d, nx, ny, absorber_cells=absorber_cells, x0=x0, y0=y0, time_step=dt)
    return TransverseLayout(grid, j_s, i_c, j_m, n_per)


class _SheetSource:
    def __init__(self, aperture: ApertureSource, layout: TransverseLayout):
        g = layout.grid
        d = g.cell_size
        self.aperture = aperture
        self.omega = 2 * math.pi * aperture.drive_frequency
        if aperture.profile == "point":
            self.i0 = layout.center_index
            self.values = np.array([[aperture.amplitude / (d * d)]])
        else:
            xe = g.x0 + (np.arange(g.nx) + 0.5) * d
            k = aperture.profile_values(xe) / d
            keep = np.nonzero(np.abs(k) > 1e-14 * np.abs(k).max())[0]
            self.i0 = int(keep[0])
            self.values = k[keep[0] : keep[-1] + 1, None]
        self.j0 = layout.source_row

    def patches(self, t):
        s = self.aperture.envelope(t) * math.cos(self.omega * t)
        return [CurrentPatch("x", self.i0, self.j0, s * self.values)]


def sampled_fwhm(x: np.ndarray, y: np.ndarray) -> float:
    """FWHM of sampled data by linear interpolation of the half-level crossings."""
    y = np.abs(y)
    p = int(np.argmax(y))
    half = 0.5 * y[p]
    lo = np.nonzero(y[:p] < half)[0]
    hi = np.nonzero(y[p + 1 :] < half)[0]
    if lo.size == 0 or hi.size == 0:
        return float("nan")
    a = lo[-1]
    b = p + 1 + hi[0]
    left = x[a] + (half - y[a]) * (x[a + 1] - x[a]) / (y[a + 1] - y[a])
    right = x[b - 1] + (y[b - 1] - half) * (x[b] - x[b - 1]) / (y[b - 1] - y[b])
    return float(right - left)


def run_transverse(
    aperture: ApertureSource,
    monitor_height: float | None = None,
    layout: TransverseLayout | None = None,
    min_periods: int = 20,
    max_periods: int = 200,
    tolerance: float = 0.01,
    margin_cells: int = 4,
) -> NearFieldLine:
    """Drive the aperture to steady state and return the monitored Hz phasor.

    The phasor is accumulated over whole periods; the run stops once at
    least ``min_periods`` periods have elapsed after the ramp and two
    consecutive period phasors differ by less than ``tolerance`` (relative
    L2).  Samples within ``margin_cells`` of the absorber are dropped.
    """
    lam = aperture.wavelength
    if layout is None:
        layout = transverse_layout(aperture, 5 * lam if monitor_height is None else monitor_height)
    g = layout.grid
    d = g.cell_size
    height = (layout.monitor_row + 0.5 - layout.source_row) * d
    if height < 2 * lam * (1 - 1e-9) or (g.ny - g.absorber_cells - layout.monitor_row - 1) * d < 5 * lam * (1 - 1e-9):
        raise DomainError("monitor violates the 2-wavelength / 5-wavelength clearances")
    if aperture.profile == "gaussian":
        xe = g.x0 + (np.arange(g.nx) + 0.5) * d
        f = sampled_fwhm(xe, aperture.profile_values(xe))
        if not abs(f - aperture.fwhm) <= 0.01 * aperture.fwhm:
            raise ResolutionError(f"sampled profile FWHM {f:.4g} m deviates >1% from {aperture.fwhm:.4g} m")

    sim = Yee2D(g)
    src = [_SheetSource(aperture, layout)]
    n_per = layout.steps_per_period
    omega = 2 * math.pi * aperture.drive_frequency
    lo = g.absorber_cells + margin_cells
    hi = g.nx - g.absorber_cells - margin_cells
    jm = layout.monitor_row

    ramp_steps = int(math.ceil(aperture.ramp_periods * n_per))
    for _ in range(ramp_steps):
        sim.step(src)

    prev = None
    residual = float("inf")
    for period in range(1, max_periods + 1):
        acc = np.zeros(hi - lo, dtype=complex)
        for _ in range(n_per):
            f = sim.step(src)
            t_h = f.time - 0.5 * g.dt  # Hz time after the step
            acc += f.hz[lo:hi, jm] * np.exp(1j * omega * t_h)
        phasor = acc * (2.0 / n_per)
        if prev is not None:
            residual = np.linalg.norm(phasor - prev) / np.linalg.norm(phasor)
            if period > min_periods and residual < tolerance:
                break
        prev = phasor
    else:
        raise ConvergenceError(
            f"no steady state after {max_periods} periods (residual {residual:.3g})", residual
        )

    x = g.x0 + (np.arange(lo, hi) + 0.5) * d
    return NearFieldLine(
        x=x,
        phasor=phasor,
        height=height,
        wavelength=lam,
        meta={"periods": period, "residual": float(residual), "cell_size": d, "steps_per_period": n_per},
    )
