"""Semiclassical and quantum emission patterns of a partially coherent beam.

Semiclassical: each coherence cell (Gaussian amplitude of FWHM l_c) radiates
coherently; intensities from different cells add.  Quantum: point emitters
spread over the beam, all intensities add.

Two observation geometries are supported.  ``"fraunhofer"`` is the angular
spectrum, independent of where a cell sits in the beam.  ``"arc"`` is the
exact field on an arc of radius r about the beam centre, which adds the
parallax of off-centre cells (bounded by w_beam/r).
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diffraction import (
    FarFieldSpectrum,
    arc_intensity,
    divergence_metrics,
    far_field,
    gaussian_aperture,
    point_source,
)
from .errors import DomainError, MetricUndefinedError

MODELS = ("semiclassical", "quantum")
ENGINES = ("scalar", "fdtd")
GEOMETRIES = ("fraunhofer", "arc")


def default_angles(n: int = 2001, limit: float = 1.55) -> np.ndarray:
    return np.linspace(-limit, limit, n)


@dataclass(frozen=True)
class BeamSpec:
    w_beam: float
    l_c: float
    model: str = "semiclassical"
    emitters_per_cell: int = 1
    weighting: str = "uniform"

    def __post_init__(self):
        if not 0 < self.l_c <= self.w_beam * (1 + 1e-12):
            raise DomainError(f"need 0 < l_c <= w_beam, got l_c={self.l_c}, w_beam={self.w_beam}")
        if self.model not in MODELS:
            raise DomainError(f"unknown model {self.model!r}")
        if self.emitters_per_cell < 1:
            raise DomainError("emitters_per_cell must be >= 1")
        if self.weighting not in ("uniform", "gaussian"):
            raise DomainError(f"unknown weighting {self.weighting!r}")


@dataclass(frozen=True)
class CoherenceEnsemble:
    centers: np.ndarray
    cell_fwhm: float
    weights: np.ndarray
    w_beam: float

    @property
    def n_cells(self) -> int:
        return int(self.centers.size)


def partition_beam(beam: BeamSpec) -> CoherenceEnsemble:
    """Split the beam into ceil(w_beam/l_c) equally spaced coherence cells."""
    n = max(1, math.ceil(beam.w_beam / beam.l_c - 1e-9))
    pitch = beam.w_beam / n
    centers = -0.5 * beam.w_beam + (np.arange(n) + 0.5) * pitch
    if beam.weighting == "gaussian":
        w = np.exp(-4.0 * math.log(2.0) * (centers / beam.w_beam) ** 2)
    else:
        w = np.ones(n)
    return CoherenceEnsemble(centers, beam.l_c, w / w.sum(), beam.w_beam)


def _check_options(engine, geometry, obliquity, r):
    if engine not in ENGINES:
        raise DomainError(f"unknown engine {engine!r}")
    if geometry not in GEOMETRIES:
        raise DomainError(f"unknown geometry {geometry!r}")
    if r <= 0:
        raise DomainError("observation distance must be positive")
    if engine == "fdtd" and geometry == "arc" and not obliquity:
        raise DomainError("FDTD near fields are propagated as fields; arc geometry needs obliquity")


@functools.lru_cache(maxsize=16)
def _cached_near_field(fwhm: float, wavelength: float, options: tuple):
    from .fdtd.transverse import ApertureSource, run_transverse

    return run_transverse(ApertureSource(fwhm, wavelength), **dict(options))


def cell_near_field(fwhm: float, wavelength: float, **options):
    """FDTD near field of one coherence cell centred at 0, memoized per cell shape.

    The transverse grid is built around the cell, so cells of equal width at
    different centres share this phasor up to a shift of coordinates.
    """
    return _cached_near_field(float(fwhm), float(wavelength), tuple(sorted(options.items())))


def _cell_error(exc: Exception, index: int, center: float) -> Exception:
    new = exc.__class__.__new__(exc.__class__)
    new.__dict__.update(getattr(exc, "__dict__", {}))
    new.args = (f"cell {index} (centre {center:.4g} m): {exc}",)
    new.cell_index = index
    return new


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def cell_patterns(
    ensemble: CoherenceEnsemble,
    angles,
    wavelength: float,
    r: float,
    engine: str = "scalar",
    geometry: str = "fraunhofer",
    obliquity: bool = True,
    workers: int = 1,
    fdtd_options: dict | None = None,
) -> np.ndarray:
    """Weighted, unnormalized intensity of every coherence cell, shape (n_cells, n_angles)."""
    _check_options(engine, geometry, obliquity, r)
    angles = np.asarray(angles, dtype=float)
    near = None
    if engine == "fdtd":
        try:
            near = cell_near_field(ensemble.cell_fwhm, wavelength, **(fdtd_options or {}))
        except Exception as exc:
            raise _cell_error(exc, 0, float(ensemble.centers[0])) from exc

    def one(item):
        i, center = item
        try:
            if near is not None:
                f = near.to_scalar_field(x_offset=center)
            else:
                f = gaussian_aperture(ensemble.cell_fwhm, wavelength, center=center)
            if geometry == "fraunhofer":
                s = far_field(f, r, angles, obliquity=obliquity, normalize=False)
            else:
                s = arc_intensity(f, r, angles, center=(0.0, 0.0), obliquity=obliquity, normalize=False)
        except Exception as exc:
            raise _cell_error(exc, i, center) from exc
        return s.intensity

    rows = _map(one, list(enumerate(ensemble.centers.tolist())), workers)
    return np.asarray(rows) * ensemble.weights[:, None]


def _reduce(patterns: np.ndarray) -> np.ndarray:
    return patterns.sum(axis=0)


def semiclassical_pattern(
    ensemble: CoherenceEnsemble,
    angles=None,
    wavelength: float = 600e-9,
    r: float = 100e-6,
    engine: str = "scalar",
    geometry: str = "fraunhofer",
    obliquity: bool = True,
    workers: int = 1,
    fdtd_options: dict | None = None,
) -> FarFieldSpectrum:
    """Incoherent sum over cells of each cell's coherent pattern, unit peak."""
    angles = default_angles() if angles is None else np.asarray(angles, dtype=float)
    total = _reduce(
        cell_patterns(ensemble, angles, wavelength, r, engine, geometry, obliquity, workers, fdtd_options)
    )
    meta = {"model": "semiclassical", "engine": engine, "geometry": geometry,
            "obliquity": obliquity, "n_cells": ensemble.n_cells, "l_c": ensemble.cell_fwhm}
    return FarFieldSpectrum(angles, total, r, wavelength, meta).normalized()


def emitter_positions(ensemble: CoherenceEnsemble, emitters_per_cell: int, sampling: str = "lattice", seed=None):
    """Point-emitter positions and weights.

    ``"lattice"`` fills each cell's pitch with evenly spaced points, giving a
    uniform lattice over the whole beam.  ``"random"`` draws from each cell's
    |psi|**2 (Gaussian, amplitude FWHM l_c) with a seeded generator.
    """
    if emitters_per_cell < 1:
        raise DomainError("emitters_per_cell must be >= 1")
    m = emitters_per_cell
    if sampling == "lattice":
        pitch = ensemble.w_beam / ensemble.n_cells
        offs = (np.arange(m) + 0.5) / m * pitch - 0.5 * pitch
        pos = (ensemble.centers[:, None] + offs[None, :]).ravel()
    elif sampling == "random":
        rng = np.random.default_rng(seed)
        s = ensemble.cell_fwhm / (4.0 * math.sqrt(math.log(2.0)))
        pos = (ensemble.centers[:, None] + rng.normal(0.0, s, size=(ensemble.n_cells, m))).ravel()
    else:
        raise DomainError(f"unknown sampling {sampling!r}")
    w = np.repeat(ensemble.weights / m, m)
    return pos, w


def quantum_pattern(
    ensemble: CoherenceEnsemble,
    emitters_per_cell: int = 1,
    angles=None,
    wavelength: float = 600e-9,
    r: float = 100e-6,
    geometry: str = "fraunhofer",
    obliquity: bool = True,
    sampling: str = "lattice",
    seed=None,
) -> FarFieldSpectrum:
    """Incoherent sum over point emitters, unit peak.

    With ``obliquity`` each point radiates like the in-plane current element
    of the FDTD scenes (cos(phi)**2 far field); without it, isotropically.
    """
    _check_options("scalar", geometry, obliquity, r)
    angles = default_angles() if angles is None else np.asarray(angles, dtype=float)
    pos, w = emitter_positions(ensemble, emitters_per_cell, sampling, seed)
    total = np.zeros(angles.size)
    for x, wt in zip(pos, w):
        f = point_source(wavelength, center=float(x), n=2)
        if geometry == "fraunhofer":
            s = far_field(f, r, angles, obliquity=obliquity, normalize=False)
        else:
            s = arc_intensity(f, r, angles, center=(0.0, 0.0), obliquity=obliquity, normalize=False)
        total += wt * s.intensity
    meta = {"model": "quantum", "geometry": geometry, "obliquity": obliquity, "sampling": sampling,
            "seed": seed, "n_emitters": int(pos.size), "l_c": ensemble.cell_fwhm}
    return FarFieldSpectrum(angles, total, r, wavelength, meta).normalized()


@dataclass
class ComparisonRow:
    model: str
    l_c: float
    fwhm: float
    rms: float
    error: str | None = None


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]
    exponents: dict[str, float]
    spectra: dict = field(default_factory=dict, repr=False)

    def fwhm(self, model: str) -> dict[float, float]:
        return {row.l_c: row.fwhm for row in self.rows if row.model == model}


def fit_exponent(l_c, fwhm) -> float:
    """Least-squares slope of log(fwhm) against log(l_c)."""
    l_c = np.asarray(l_c, dtype=float)
    fwhm = np.asarray(fwhm, dtype=float)
    ok = np.isfinite(fwhm) & (fwhm > 0)
    if ok.sum() < 2 or np.unique(l_c[ok]).size < 2:
        raise ValueError("fit requires at least two distinct coherence lengths with defined FWHM")
    slope, _ = np.polyfit(np.log(l_c[ok]), np.log(fwhm[ok]), 1)
    return float(slope)


def compare_models(
    l_c_list,
    w_beam: float = 20e-6,
    wavelength: float = 600e-9,
    r: float = 100e-6,
    angles=None,
    models=MODELS,
    engine: str = "scalar",
    geometry: str = "fraunhofer",
    obliquity: bool = True,
    emitters_per_cell: int = 1,
    sampling: str = "lattice",
    seed=None,
    weighting: str = "uniform",
    workers: int = 1,
    fdtd_options: dict | None = None,
) -> ComparisonReport:
    """FWHM per (model, l_c) and the fitted exponent s in FWHM ~ l_c**s."""
    l_c_list = [float(v) for v in l_c_list]
    if len(l_c_list) < 2:
        raise ValueError("fit requires at least two coherence lengths")
    angles = default_angles() if angles is None else np.asarray(angles, dtype=float)
    rows, spectra, exps = [], {}, {}
    for model in models:
        for l_c in l_c_list:
            ens = partition_beam(BeamSpec(w_beam, l_c, model, emitters_per_cell, weighting))
            if model == "semiclassical":
                s = semiclassical_pattern(ens, angles, wavelength, r, engine, geometry, obliquity, workers,
                                          fdtd_options)
            else:
                s = quantum_pattern(ens, emitters_per_cell, angles, wavelength, r, geometry, obliquity,
                                    sampling, seed)
            spectra[(model, l_c)] = s
            try:
                d = divergence_metrics(s)
                rows.append(ComparisonRow(model, l_c, d.fwhm, d.rms_width))
            except MetricUndefinedError as exc:
                rows.append(ComparisonRow(model, l_c, float("nan"), exc.rms, str(exc)))
        sel = [row for row in rows if row.model == model]
        try:
            exps[model] = fit_exponent([row.l_c for row in sel], [row.fwhm for row in sel])
        except ValueError:
            exps[model] = float("nan")
    return ComparisonReport(rows, exps, spectra)
