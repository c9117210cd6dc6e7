"""Scalar wave propagation in a 2D (x, z) plane.

A ``ScalarLineField`` holds complex samples u(x) on the plane z = const.
Three routes are provided:

* ``angular_spectrum_propagate``: exact plane-to-plane Helmholtz propagation
  by FFT, evanescent components decaying with their exact rate.
* ``far_field``: Fraunhofer intensity |U(k sin(phi))|**2 from a direct
  (non-uniform) Fourier sum.
* ``arc_intensity``: exact field on a circular arc of radius r from a
  real-space Rayleigh-Sommerfeld quadrature with Hankel kernels.

The last two are independent of each other and of the FFT propagator,
which is what the cross-checks in the test-suite rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .constants import GAUSSIAN_FWHM_CONSTANT
from .errors import AliasingError, DomainError, MetricUndefinedError, ResolutionError

__all__ = [
    "ScalarLineField",
    "FarFieldSpectrum",
    "DivergenceReport",
    "gaussian_aperture",
    "uniform_aperture",
    "point_source",
    "angular_spectrum_propagate",
    "far_field",
    "arc_intensity",
    "fresnel_number",
    "divergence_metrics",
    "angle_grid",
    "predicted_fwhm",
    "l2_relative_error",
]


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


@dataclass(frozen=True)
class ScalarLineField:
    """Complex field sampled on a uniform grid along x at height ``z``.

    The grid spacing must not exceed wavelength/8 and the sample count must
    be a power of two; use :meth:`from_samples` to zero-pad arbitrary data.
    """

    x: np.ndarray
    u: np.ndarray
    wavelength: float
    z: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        u = np.asarray(self.u, dtype=complex)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)
        if x.ndim != 1 or x.shape != u.shape or x.size < 2:
            raise ValueError("x and u must be 1D arrays of equal length >= 2")
        if self.wavelength <= 0:
            raise DomainError("wavelength must be positive")
        n = x.size
        if n & (n - 1):
            raise ResolutionError(f"sample count {n} is not a power of two")
        dx = np.diff(x)
        if not np.allclose(dx, dx[0], rtol=1e-9, atol=0):
            raise ResolutionError("x grid is not uniform")
        if dx[0] <= 0:
            raise ResolutionError("x grid must be increasing")
        if dx[0] > self.wavelength / 8 * (1 + 1e-9):
            raise ResolutionError(
                f"spacing {dx[0]:.3g} m exceeds wavelength/8 = {self.wavelength / 8:.3g} m"
            )

    @classmethod
    def from_samples(cls, x, u, wavelength, z=0.0, n=None):
        """Build a field from uniform samples, zero-padding symmetrically."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=complex)
        m = x.size
        n = _next_pow2(m) if n is None else n
        if n < m or n & (n - 1):
            raise ValueError("padded length must be a power of two >= sample count")
        dx = x[1] - x[0]
        left = (n - m) // 2
        xp = x[0] + (np.arange(n) - left) * dx
        up = np.zeros(n, dtype=complex)
        up[left : left + m] = u
        return cls(xp, up, wavelength, z)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength

    def intensity(self) -> np.ndarray:
        return np.abs(self.u) ** 2

    def power(self) -> float:
        return float(np.sum(np.abs(self.u) ** 2) * self.dx)


@dataclass(frozen=True)
class FarFieldSpectrum:
    """Intensity versus azimuthal angle (rad) at radius ``radius``."""

    angles: np.ndarray
    intensity: np.ndarray
    radius: float
    wavelength: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float)
        i = np.asarray(self.intensity, dtype=float)
        object.__setattr__(self, "angles", a)
        object.__setattr__(self, "intensity", i)
        if a.ndim != 1 or a.shape != i.shape or a.size == 0:
            raise ValueError("angles and intensity must be equal-length 1D arrays")
        if a.size > 1 and not np.all(np.diff(a) > 0):
            raise ValueError("angle grid must be strictly increasing")
        if np.any(i < 0) or not np.all(np.isfinite(i)):
            raise ValueError("intensity must be finite and non-negative")

    def normalized(self) -> "FarFieldSpectrum":
        peak = self.intensity.max()
        if peak <= 0:
            return self
        return FarFieldSpectrum(self.angles, self.intensity / peak, self.radius, self.wavelength, dict(self.meta))


@dataclass(frozen=True)
class DivergenceReport:
    fwhm: float
    rms_width: float
    peak_angle: float


def gaussian_aperture(fwhm, wavelength, center=0.0, spacing=None, half_width=None, z=0.0):
    """Gaussian amplitude profile exp(-4 ln2 (x-center)**2 / fwhm**2).

    Default sampling is wavelength/16 over +-(3*fwhm + 8*wavelength).
    """
    spacing = wavelength / 16 if spacing is None else spacing
    half_width = 3 * fwhm + 8 * wavelength if half_width is None else half_width
    m = 2 * int(math.ceil(half_width / spacing)) + 1
    x = center + (np.arange(m) - m // 2) * spacing
    u = np.exp(-4.0 * math.log(2.0) * ((x - center) / fwhm) ** 2)
    return ScalarLineField.from_samples(x, u, wavelength, z)


def uniform_aperture(width, wavelength, spacing=None, half_width=None, z=0.0):
    """Unit-amplitude slit of the given width centred at x = 0."""
    spacing = wavelength / 16 if spacing is None else spacing
    half_width = width + 8 * wavelength if half_width is None else half_width
    m = 2 * int(math.ceil(half_width / spacing)) + 1
    x = (np.arange(m) - m // 2) * spacing
    u = (np.abs(x) <= width / 2 + 1e-12 * width).astype(complex)
    return ScalarLineField.from_samples(x, u, wavelength, z)


def point_source(wavelength, center=0.0, spacing=None, n=256, z=0.0):
    """Single non-zero sample at ``center``."""
    spacing = wavelength / 16 if spacing is None else spacing
    x = center + (np.arange(n) - n // 2) * spacing
    u = np.zeros(n, dtype=complex)
    u[n // 2] = 1.0
    return ScalarLineField(x, u, wavelength, z)


def _check_aliasing(spectrum: np.ndarray, threshold: float = 0.01, edge: float = 0.05):
    n = spectrum.size
    p = np.abs(spectrum) ** 2
    total = p.sum()
    if total == 0:
        return
    # |frequency index| within `edge` of the Nyquist index
    idx = np.abs(np.fft.fftfreq(n)) * 2.0  # 1.0 at Nyquist
    near_edge = p[idx >= 1.0 - edge].sum()
    if near_edge > threshold * total:
        raise AliasingError(
            f"{near_edge / total:.2%} of spectral energy lies within {edge:.0%} of the Nyquist edge"
        )


def angular_spectrum_propagate(field: ScalarLineField, distance: float) -> ScalarLineField:
    """Propagate ``field`` by ``distance`` along +z with the exact transfer function."""
    if distance < 0:
        raise DomainError("distance must be non-negative")
    spec = np.fft.fft(field.u)
    _check_aliasing(spec)
    if distance == 0:
        return ScalarLineField(field.x.copy(), field.u.copy(), field.wavelength, field.z)
    kx = 2.0 * math.pi * np.fft.fftfreq(field.x.size, d=field.dx)
    kz = np.sqrt((field.k**2 - kx**2).astype(complex))  # principal root: Im(kz) >= 0
    u = np.fft.ifft(spec * np.exp(1j * kz * distance))
    return ScalarLineField(field.x.copy(), u, field.wavelength, field.z + distance)


def _spectrum_at(field: ScalarLineField, kx: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Continuous Fourier transform sum_n u_n exp(-i kx x_n) dx at arbitrary kx."""
    nz = np.nonzero(field.u)[0]
    if nz.size == 0:
        return np.zeros(kx.shape, dtype=complex)
    xs = field.x[nz[0] : nz[-1] + 1]
    us = field.u[nz[0] : nz[-1] + 1]
    out = np.empty(kx.shape, dtype=complex)
    for s in range(0, kx.size, chunk):
        ph = np.exp(-1j * np.outer(kx[s : s + chunk], xs))
        out[s : s + chunk] = ph @ us
    return out * field.dx


def far_field(
    field: ScalarLineField,
    radius: float,
    angles,
    obliquity: bool = False,
    normalize: bool = True,
) -> FarFieldSpectrum:
    """Fraunhofer intensity |U(k sin(phi))|**2 on the given angle grid.

    With ``obliquity=False`` the samples act as isotropic line-source
    strengths and a single point gives a flat pattern.  With
    ``obliquity=True`` the samples are the field on the plane itself and the
    asymptote of exact propagation, cos(phi)**2 |U|**2, is returned.
    """
    if radius <= 0:
        raise DomainError("radius must be positive")
    angles = np.asarray(angles, dtype=float)
    spec = _spectrum_at(field, field.k * np.sin(angles))
    inten = np.abs(spec) ** 2
    if obliquity:
        inten = inten * np.cos(angles) ** 2
    out = FarFieldSpectrum(angles, inten, radius, field.wavelength, {"obliquity": obliquity})
    return out.normalized() if normalize else out


def arc_intensity(
    field: ScalarLineField,
    radius: float,
    angles,
    center=(0.0, None),
    obliquity: bool = True,
    normalize: bool = True,
    chunk: int = 256,
) -> FarFieldSpectrum:
    """Exact intensity on an arc of ``radius`` about ``center`` = (x, z).

    ``center[1] = None`` places the arc centre on the field's own plane.  With
    ``obliquity=True`` the first Rayleigh-Sommerfeld integral propagates the
    field into z > field.z; otherwise each sample radiates as an isotropic
    line source, (i/4) H0(k rho).  Angles are measured from +z.
    """
    if radius <= 0:
        raise DomainError("radius must be positive")
    angles = np.asarray(angles, dtype=float)
    cx, cz = center
    cz = field.z if cz is None else cz
    ox = cx + radius * np.sin(angles)
    oz = cz + radius * np.cos(angles)
    if obliquity and np.any(oz <= field.z):
        raise DomainError("arc points must lie beyond the field plane")
    nz = np.nonzero(np.abs(field.u) > 1e-14 * np.abs(field.u).max())[0] if np.any(field.u) else []
    if len(nz) == 0:
        inten = np.zeros(angles.shape)
    else:
        xs = field.x[nz[0] : nz[-1] + 1]
        us = field.u[nz[0] : nz[-1] + 1]
        k = field.k
        vals = np.empty(angles.shape, dtype=complex)
        for s in range(0, angles.size, chunk):
            dxo = ox[s : s + chunk, None] - xs[None, :]
            dzo = oz[s : s + chunk, None] - field.z
            rho = np.hypot(dxo, dzo)
            if obliquity:
                kern = 0.5j * k * special.hankel1(1, k * rho) * dzo / rho
            else:
                kern = 0.25j * special.hankel1(0, k * rho)
            vals[s : s + chunk] = kern @ us
        inten = np.abs(vals * field.dx) ** 2
    out = FarFieldSpectrum(angles, inten, radius, field.wavelength, {"obliquity": obliquity, "arc": True})
    return out.normalized() if normalize else out


def fresnel_number(aperture: float, wavelength: float, distance: float) -> float:
    """Fresnel number d**2 / (lambda r)."""
    if aperture <= 0 or wavelength <= 0 or distance <= 0:
        raise DomainError("aperture, wavelength and distance must be positive")
    return aperture**2 / (wavelength * distance)


def divergence_metrics(spectrum: FarFieldSpectrum) -> DivergenceReport:
    """FWHM (linear interpolation around the global peak), RMS width and peak angle."""
    a = spectrum.angles
    i = spectrum.intensity
    if a.size == 0:
        raise ValueError("empty spectrum")
    total = i.sum()
    if total > 0:
        centroid = float(np.sum(a * i) / total)
        rms = float(np.sqrt(np.sum((a - centroid) ** 2 * i) / total))
    else:
        rms = float("nan")
    p = int(np.argmax(i))
    peak = i[p]
    half = 0.5 * peak
    if peak <= 0:
        raise MetricUndefinedError("spectrum is identically zero", rms=rms)

    below = np.nonzero(i[:p] < half)[0]
    above = np.nonzero(i[p + 1 :] < half)[0]
    if below.size == 0 or above.size == 0:
        raise MetricUndefinedError("no half-maximum crossing inside the angle grid", rms=rms)
    lo = below[-1]  # i[lo] < half <= i[lo+1]
    hi = p + 1 + above[0]  # i[hi] < half <= i[hi-1]
    left = a[lo] + (half - i[lo]) * (a[lo + 1] - a[lo]) / (i[lo + 1] - i[lo])
    right = a[hi - 1] + (i[hi - 1] - half) * (a[hi] - a[hi - 1]) / (i[hi - 1] - i[hi])
    return DivergenceReport(fwhm=float(right - left), rms_width=rms, peak_angle=float(a[p]))


def predicted_fwhm(aperture_fwhm: float, wavelength: float) -> float:
    """Small-angle far-field FWHM of a Gaussian aperture."""
    return GAUSSIAN_FWHM_CONSTANT * wavelength / aperture_fwhm


def angle_grid(fwhm_estimate: float, n: int = 801, span: float = 3.0, limit: float = 1.55):
    """Symmetric angle grid covering +-span*fwhm_estimate, clipped to +-limit rad."""
    half = min(span * fwhm_estimate, limit)
    grid = np.linspace(-half, half, n)
    if fwhm_estimate / (grid[1] - grid[0]) < 8:
        raise ResolutionError("fewer than 8 angle samples across the expected FWHM")
    return grid


def l2_relative_error(a, b) -> float:
    """||a - b||_2 / ||b||_2."""
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))
