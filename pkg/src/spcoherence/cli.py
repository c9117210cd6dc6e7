"""Command-line runner.

Precedence, lowest first: built-in defaults, ``--config`` file, the
``SPCOHERENCE_OUTDIR`` environment variable (output directory only),
command-line flags.  Outputs go to ``<outdir>/<subcommand>/<name>.csv``.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import ensemble as ens
from . import postselect as ps
from .config import ENGINE_CHOICES, MODEL_CHOICES, OUTDIR_ENV, RunConfig, load_config
from .constants import nm, um
from .diffraction import divergence_metrics
from .errors import (
    AliasingError,
    ConfigError,
    DomainError,
    EmptySliceError,
    MetricUndefinedError,
    NumericalError,
    ResolutionError,
)
from .kinematics import GratingSpec, beta_from_energy, regime_check, smith_purcell_wavelength
from .output import write_csv, write_near_field

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
NUMERICAL_ERRORS = (NumericalError, ResolutionError, AliasingError, MetricUndefinedError,
                    EmptySliceError, DomainError)

SUBCOMMANDS = ("regimes", "sp-spectrum", "divergence", "compare", "postselect", "reproduce-fig1c")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError([message])


def _label(v: float) -> str:
    return ("%g" % v).replace(".", "p")


def _models(cfg: RunConfig):
    return ens.MODELS if cfg.model == "both" else (cfg.model,)


def _fdtd_options(cfg: RunConfig) -> dict:
    return {"min_periods": cfg.steady_periods}


class Runner:
    def __init__(self, cfg: RunConfig, name: str, plot: bool = False, workers: int = 1):
        self.cfg = cfg
        self.name = name
        self.plot = plot
        self.workers = workers
        self.dir = Path(cfg.outdir) / name
        self.written: list[Path] = []

    def csv(self, stem: str, columns: dict, notes=()):
        self.written.append(write_csv(self.dir / f"{stem}.csv", columns, self.cfg, notes))

    def figure(self, stem: str, draw):
        if not self.plot:
            return
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig = draw(plt)
        path = self.dir / f"{stem}.png"
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, dpi=120)
        plt.close(fig)
        self.written.append(path)

    # subcommands -------------------------------------------------------

    def regimes(self):
        c = self.cfg
        reps = [regime_check(c.r_um * um, l * um, c.w_beam_um * um, c.lambda_nm * nm) for l in c.l_c_um]
        self.csv("regimes", {
            "r": [x.observation_distance for x in reps],
            "l_c": [x.coherence_length for x in reps],
            "w_beam": [x.beam_width for x in reps],
            "lambda": [x.wavelength for x in reps],
            "F_lc": [x.fraunhofer_distance_coherent for x in reps],
            "F_beam": [x.fraunhofer_distance_beam for x in reps],
            "far_lc": [int(x.is_far_field_coherent) for x in reps],
            "far_beam": [int(x.is_far_field_beam) for x in reps],
            "parallax": [x.parallax_ratio for x in reps],
        })
        for x in reps:
            strict = regime_check(x.observation_distance, x.coherence_length, x.beam_width, x.wavelength, 10.0)
            print(f"l_c = {x.coherence_length / um:g} um: d^2/lambda = {x.fraunhofer_distance_coherent / um:.4g} um,"
                  f" far field {x.is_far_field_coherent} (F=10: {strict.is_far_field_coherent});"
                  f" beam d^2/lambda = {x.fraunhofer_distance_beam / um:.4g} um,"
                  f" far field {x.is_far_field_beam} (F=10: {strict.is_far_field_beam})")

    def sp_spectrum(self):
        from .fdtd.longitudinal import MovingChargeSource, longitudinal_layout, run_longitudinal

        c = self.cfg
        kin = beta_from_energy(c.E_keV)
        grating = GratingSpec(c.Lambda_nm * nm, c.L_um * um)
        beam = MovingChargeSource(kin.beta)
        theta = np.radians(np.asarray(c.theta_deg))
        pred = np.array([smith_purcell_wavelength(grating, kin.beta, t) for t in theta])
        wl = np.linspace(0.6 * pred.min(), 1.4 * pred.max(), 501)
        layout = longitudinal_layout(grating, beam, cell_size=c.cell_nm * nm, absorber_cells=c.absorber_cells)
        if c.courant != layout.grid.courant:
            from dataclasses import replace

            layout = replace(layout, grid=replace(layout.grid, courant=c.courant, time_step=None))
        sp = run_longitudinal(beam, grating, theta, wl, layout=layout)
        peaks = [sp.peak_wavelength(i) for i in range(theta.size)]
        for i, th in enumerate(c.theta_deg):
            self.csv(f"spectrum_theta{_label(th)}", {"wavelength": wl, "power": sp.energy[i]})
        self.csv("peaks", {
            "theta_deg": list(c.theta_deg),
            "peak_wavelength": peaks,
            "predicted_wavelength": pred,
            "contrast": [sp.peak_contrast(i) for i in range(theta.size)],
        })
        for th, p, q in zip(c.theta_deg, peaks, pred):
            print(f"theta = {th:g} deg: peak {p / nm:.2f} nm, kinematic {q / nm:.2f} nm")

        def draw(plt):
            fig, ax = plt.subplots()
            for i, th in enumerate(c.theta_deg):
                ax.plot(wl / nm, sp.energy[i] / sp.energy[i].max(), label=f"{th:g} deg")
            ax.set_xlabel("wavelength (nm)")
            ax.set_ylabel("normalized spectral energy")
            ax.legend()
            return fig

        self.figure("spectra", draw)

    def _single(self, model: str, l_c: float, engine: str):
        c = self.cfg
        e = ens.partition_beam(ens.BeamSpec(c.w_beam_um * um, l_c * um, model))
        if model == "semiclassical":
            return ens.semiclassical_pattern(e, None, c.lambda_nm * nm, c.r_um * um, engine, workers=self.workers,
                                             fdtd_options=_fdtd_options(c) if engine == "fdtd" else None)
        return ens.quantum_pattern(e, 1, None, c.lambda_nm * nm, c.r_um * um, seed=c.seed)

    def _write_patterns(self, spectra: dict):
        for (model, l_c), s in spectra.items():
            self.csv(f"pattern_{model}_lc{_label(l_c / um)}um", {"phi_rad": s.angles, "intensity": s.intensity})

    def _table(self, rows, stem: str, notes=()):
        self.csv(stem, {
            "model": [r.model for r in rows],
            "l_c_um": [r.l_c / um for r in rows],
            "fwhm_rad": [r.fwhm for r in rows],
            "rms_rad": [r.rms for r in rows],
        }, notes)

    def _overlay(self, spectra: dict, stem: str):
        def draw(plt):
            models = sorted({m for m, _ in spectra})
            fig, axes = plt.subplots(1, len(models), figsize=(5 * len(models), 4), squeeze=False)
            for ax, m in zip(axes[0], models):
                for (mm, l_c), s in spectra.items():
                    if mm == m:
                        ax.plot(s.angles, s.intensity, label=f"l_c = {l_c / um:g} um")
                ax.set_title(m)
                ax.set_xlabel("phi (rad)")
                ax.set_ylabel("normalized intensity")
                ax.legend()
            fig.tight_layout()
            return fig

        self.figure(stem, draw)

    def divergence(self):
        c = self.cfg
        rows, spectra = [], {}
        for model in _models(c):
            for l_c in c.l_c_um:
                s = self._single(model, l_c, c.engine)
                spectra[(model, l_c * um)] = s
                try:
                    d = divergence_metrics(s)
                    rows.append(ens.ComparisonRow(model, l_c * um, d.fwhm, d.rms_width))
                except MetricUndefinedError as exc:
                    rows.append(ens.ComparisonRow(model, l_c * um, math.nan, exc.rms, str(exc)))
        if c.engine == "fdtd":
            for l_c in c.l_c_um:
                line = ens.cell_near_field(l_c * um, c.lambda_nm * nm, **_fdtd_options(c))
                self.written.append(write_near_field(self.dir / f"nearfield_lc{_label(l_c)}um.csv", line, c))
        self._write_patterns(spectra)
        self._table(rows, "divergence", [f"engine = {c.engine}"])
        for r in rows:
            print(f"{r.model:13s} l_c = {r.l_c / um:g} um: FWHM = {r.fwhm:.4g} rad, rms = {r.rms:.4g} rad")
        self._overlay(spectra, "divergence")

    def compare(self):
        c = self.cfg
        if len(c.l_c_um) < 2:
            raise DomainError("compare needs at least two coherence lengths (fit requires >= 2 points)")
        report = ens.compare_models(
            [v * um for v in c.l_c_um], w_beam=c.w_beam_um * um, wavelength=c.lambda_nm * nm, r=c.r_um * um,
            models=_models(c), engine=c.engine, seed=c.seed, workers=self.workers,
            fdtd_options=_fdtd_options(c) if c.engine == "fdtd" else None,
        )
        notes = [f"exponent {m} = {s!r}" for m, s in report.exponents.items()]
        self._write_patterns(report.spectra)
        self._table(report.rows, "comparison", notes)
        for r in report.rows:
            extra = f" ({r.error})" if r.error else ""
            print(f"{r.model:13s} l_c = {r.l_c / um:g} um: FWHM = {r.fwhm:.4g} rad{extra}")
        for m, s in report.exponents.items():
            print(f"fitted exponent {m}: {s:.4f}")
        self._overlay(report.spectra, "comparison")
        return report

    def postselect(self):
        c = self.cfg
        kappa = 2 * math.pi / (c.Lambda_nm * nm)
        dk = 1.0 / um
        dx = c.w_beam_um * um / 2
        cases = {"overlapping": 2.0 * dk, "distinguishable": dk / 20}
        summary = {"case": [], "sigma_k": [], "coincidence_visibility": [], "traced_visibility": [], "overlap": []}
        traced_all = {}
        for label, sigma in cases.items():
            state = ps.ElectronState([-dk / 2, dk / 2], [1, 1], sigma, positions=[0.0, dx])
            grid = ps.PhotonGrid.for_state(state, kappa)
            amp = ps.build_amplitudes(state, grid)
            period = 2 * math.pi / dx
            kf0 = kappa + float(np.mean(state.momenta))
            if label == "distinguishable":
                kf0 = kappa + state.momenta[0]
            coin = ps.coincidence_pattern(amp, amp.kf[amp.kf_index(kf0)])
            traced = ps.traced_pattern(amp)
            traced_all[label] = (grid.q, coin, traced)
            self.csv(f"coincidence_{label}", {"q": grid.q, "probability": coin})
            self.csv(f"traced_{label}", {"q": grid.q, "probability": traced})
            summary["case"].append(label)
            summary["sigma_k"].append(sigma)
            summary["coincidence_visibility"].append(ps.visibility(coin, grid.q, period))
            summary["traced_visibility"].append(ps.visibility(traced, grid.q, period))
            summary["overlap"].append(ps.envelope_overlap(dk, sigma))
        self.csv("visibility", summary)
        for i, label in enumerate(summary["case"]):
            print(f"{label}: coincidence V = {summary['coincidence_visibility'][i]:.6f},"
                  f" traced V = {summary['traced_visibility'][i]:.3e}")

        def draw(plt):
            fig, axes = plt.subplots(1, 2, figsize=(10, 4))
            for label, (q, coin, traced) in traced_all.items():
                axes[0].plot(q, coin, label=label)
                axes[1].plot(q, traced, label=label)
            axes[0].set_title("coincidence")
            axes[1].set_title("traced")
            for ax in axes:
                ax.set_xlabel("q (1/m)")
                ax.legend()
            fig.tight_layout()
            return fig

        self.figure("postselect", draw)

    def reproduce_fig1c(self):
        report = self.compare()
        fw = [report.fwhm("semiclassical")[v * um] for v in sorted(self.cfg.l_c_um)] if "semiclassical" in \
            report.exponents else []
        if fw:
            ok = all(b < a for a, b in zip(fw, fw[1:]))
            print(f"semiclassical divergence decreases with l_c: {ok}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spcoherence", description="Coherence and emission simulations.")
    p.add_argument("command", choices=SUBCOMMANDS)
    p.add_argument("--config", help="flat key = value file listing every key")
    p.add_argument("--plot", action="store_true", help="also write PNG figures")
    p.add_argument("--workers", type=int, default=1, help="threads for per-cell work")
    for f in fields(RunConfig):
        kw = {"dest": f.name, "default": None}
        if f.name in ("l_c_um", "theta_deg"):
            kw.update(type=float, nargs="+")
        elif f.name in ("absorber_cells", "steady_periods", "seed"):
            kw["type"] = int
        elif f.name == "model":
            kw["choices"] = MODEL_CHOICES
        elif f.name == "engine":
            kw["choices"] = ENGINE_CHOICES
        elif f.name not in ("scenario", "outdir"):
            kw["type"] = float
        p.add_argument(f"--{f.name}", **kw)
    return p


def resolve_config(args, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    cfg = load_config(args.config) if args.config else RunConfig()
    if environ.get(OUTDIR_ENV):
        cfg = cfg.replace(outdir=environ[OUTDIR_ENV])
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig) if getattr(args, f.name) is not None}
    return cfg.replace(**overrides).validate()


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    runner = Runner(cfg, args.command, plot=args.plot, workers=args.workers)
    try:
        getattr(runner, args.command.replace("-", "_"))()
    except NUMERICAL_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in runner.written:
        print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
