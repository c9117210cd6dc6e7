"""Smith-Purcell emission from partially coherent electron beams.

Tools to compare the coherent smeared-charge (semiclassical) emission model
against incoherent point emitters (quantum), using a 2D FDTD solver, scalar
diffraction, and a toy electron-photon entanglement model.
"""

__version__ = "0.1.0"
