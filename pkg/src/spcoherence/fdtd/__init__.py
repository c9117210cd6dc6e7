"""2D TE finite-difference time-domain solver and its two scenes."""

from .longitudinal import LongitudinalSpectrum, MovingChargeSource, longitudinal_layout, run_longitudinal
from .transverse import ApertureSource, NearFieldLine, run_transverse, transverse_layout
from .yee import CurrentPatch, FieldFrame, SimGrid, Yee2D

__all__ = [
    "ApertureSource",
    "CurrentPatch",
    "FieldFrame",
    "LongitudinalSpectrum",
    "MovingChargeSource",
    "NearFieldLine",
    "SimGrid",
    "Yee2D",
    "longitudinal_layout",
    "run_longitudinal",
    "run_transverse",
    "transverse_layout",
]
