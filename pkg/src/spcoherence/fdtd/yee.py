"""2D TE Yee solver (Ex, Ey, Hz) with convolutional PML and PEC cells.

Staggering, with cell size d and grid origin (x0, y0)::

    Hz[i, j] at ((i + 1/2) d, (j + 1/2) d)      shape (nx, ny)
    Ex[i, j] at ((i + 1/2) d,  j        d)      shape (nx, ny + 1)
    Ey[i, j] at ( i        d, (j + 1/2) d)      shape (nx + 1, ny)

E lives on integer time steps, H on half steps.  The outer boundary is a
PEC wall behind the absorbing layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

import numpy as np
from numba import njit

from ..constants import c, eps0, eta0, mu0
from ..errors import DomainError, StabilityError

MAX_COURANT = 0.99


@dataclass(frozen=True)
class SimGrid:
    """Square-cell grid; ``nx``/``ny`` count cells including the absorber."""

    cell_size: float
    nx: int
    ny: int
    absorber_cells: int = 16
    courant: float = MAX_COURANT
    x0: float = 0.0
    y0: float = 0.0
    time_step: float | None = None

    def __post_init__(self):
        if self.cell_size <= 0:
            raise DomainError("cell_size must be positive")
        if self.absorber_cells < 8:
            raise DomainError("absorber must be at least 8 cells thick")
        if min(self.nx, self.ny) <= 2 * self.absorber_cells + 2:
            raise DomainError("grid too small for its absorber")
        limit = self.cell_size / (c * math.sqrt(2.0))
        if self.time_step is None:
            if not 0 < self.courant <= MAX_COURANT:
                raise DomainError(f"Courant number must lie in (0, {MAX_COURANT}]")
            object.__setattr__(self, "time_step", self.courant * limit)
        else:
            s = self.time_step / limit
            if not 0 < s <= MAX_COURANT * (1 + 1e-12):
                raise DomainError(f"time step gives Courant number {s:.4f} > {MAX_COURANT}")
            object.__setattr__(self, "courant", s)

    @property
    def dt(self) -> float:
        return self.time_step

    def hz_x(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.cell_size

    def hz_y(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.cell_size

    def interior(self) -> tuple[slice, slice]:
        """Cell-index slices of the non-absorbing region."""
        n = self.absorber_cells
        return slice(n, self.nx - n), slice(n, self.ny - n)


@dataclass
class FieldFrame:
    ex: np.ndarray
    ey: np.ndarray
    hz: np.ndarray
    time: float = 0.0  # time of the E field
    step: int = 0

    def copy(self) -> "FieldFrame":
        return FieldFrame(self.ex.copy(), self.ey.copy(), self.hz.copy(), self.time, self.step)


@dataclass(frozen=True)
class CurrentPatch:
    """Current density (A/m^2) on a rectangular block of E nodes."""

    component: str  # "x" or "y"
    i0: int
    j0: int
    values: np.ndarray


class Source(Protocol):
    def patches(self, t: float) -> Iterable[CurrentPatch]: ...


def _cpml_coefficients(n_nodes, offset, n_cells, npml, d, dt, order, kappa_max, alpha_max):
    """CPML (b, a, kappa) for nodes at positions (k + offset) cells."""
    pos = np.arange(n_nodes) + offset
    depth = np.zeros(n_nodes)
    left = pos < npml
    right = pos > n_cells - npml
    depth[left] = (npml - pos[left]) / npml
    depth[right] = (pos[right] - (n_cells - npml)) / npml
    depth = np.clip(depth, 0.0, 1.0)
    sigma_max = 0.8 * (order + 1) / (eta0 * d)
    sigma = sigma_max * depth**order
    kappa = 1.0 + (kappa_max - 1.0) * depth**order
    alpha = np.where(depth > 0, alpha_max * (1.0 - depth), 0.0)
    b = np.exp(-(sigma / kappa + alpha) * dt / eps0)
    denom = sigma * kappa + kappa**2 * alpha
    a = np.where(sigma > 0, sigma / np.where(denom > 0, denom, 1.0) * (b - 1.0), 0.0)
    return b, a, kappa


@njit(cache=True)
def _update_h(hz, ex, ey, psi_x, psi_y, bx, ax, kx, by, ay, ky, ch, inv_d):
    nx, ny = hz.shape
    total = 0.0
    for i in range(nx):
        for j in range(ny):
            dey = (ey[i + 1, j] - ey[i, j]) * inv_d
            dex = (ex[i, j + 1] - ex[i, j]) * inv_d
            if ax[i] != 0.0:
                psi_x[i, j] = bx[i] * psi_x[i, j] + ax[i] * dey
            if ay[j] != 0.0:
                psi_y[i, j] = by[j] * psi_y[i, j] + ay[j] * dex
            hz[i, j] -= ch * (dey / kx[i] + psi_x[i, j] - dex / ky[j] - psi_y[i, j])
            total += hz[i, j]
    return total


@njit(cache=True)
def _update_e(hz, ex, ey, psi_exy, psi_eyx, ex_mask, ey_mask, bxe, axe, kxe, bye, aye, kye, ce, inv_d):
    nx, ny = hz.shape
    for i in range(nx):
        for j in range(1, ny):
            dhz = (hz[i, j] - hz[i, j - 1]) * inv_d
            if aye[j] != 0.0:
                psi_exy[i, j] = bye[j] * psi_exy[i, j] + aye[j] * dhz
            ex[i, j] = ex_mask[i, j] * (ex[i, j] + ce * (dhz / kye[j] + psi_exy[i, j]))
    for i in range(1, nx):
        for j in range(ny):
            dhz = (hz[i, j] - hz[i - 1, j]) * inv_d
            if axe[i] != 0.0:
                psi_eyx[i, j] = bxe[i] * psi_eyx[i, j] + axe[i] * dhz
            ey[i, j] = ey_mask[i, j] * (ey[i, j] - ce * (dhz / kxe[i] + psi_eyx[i, j]))


class Yee2D:
    """Leapfrog TE solver owning one set of fields.

    Parameters
    ----------
    grid : SimGrid
    pec : bool array of shape (nx, ny), optional
        Cells filled with perfect conductor.
    pml_order, kappa_max, alpha_max :
        CPML grading; ``alpha_max`` is in S/m.
    """

    def __init__(self, grid: SimGrid, pec=None, pml_order=3, kappa_max=1.0, alpha_max=None):
        self.grid = grid
        nx, ny, d, dt = grid.nx, grid.ny, grid.cell_size, grid.dt
        npml = grid.absorber_cells
        if alpha_max is None:
            # CFS shift ~ one absorber-width crossing time
            alpha_max = 0.05 * eps0 * c / (npml * d)
        self.frame = FieldFrame(np.zeros((nx, ny + 1)), np.zeros((nx + 1, ny)), np.zeros((nx, ny)))
        self._psi_hzx = np.zeros((nx, ny))
        self._psi_hzy = np.zeros((nx, ny))
        self._psi_exy = np.zeros((nx, ny + 1))
        self._psi_eyx = np.zeros((nx + 1, ny))

        args = (npml, d, dt, pml_order, kappa_max, alpha_max)
        self._hx = _cpml_coefficients(nx, 0.5, nx, *args)
        self._hy = _cpml_coefficients(ny, 0.5, ny, *args)
        self._ex = _cpml_coefficients(nx + 1, 0.0, nx, *args)  # for Ey (x-derivative)
        self._ey = _cpml_coefficients(ny + 1, 0.0, ny, *args)  # for Ex (y-derivative)

        self.ex_mask = np.ones((nx, ny + 1))
        self.ey_mask = np.ones((nx + 1, ny))
        self.ex_mask[:, 0] = self.ex_mask[:, -1] = 0.0
        self.ey_mask[0, :] = self.ey_mask[-1, :] = 0.0
        self.pec = np.zeros((nx, ny), dtype=bool) if pec is None else np.asarray(pec, dtype=bool)
        if self.pec.shape != (nx, ny):
            raise ValueError("pec mask must have shape (nx, ny)")
        if self.pec.any():
            p = self.pec
            self.ex_mask[:, 1:-1][p[:, 1:] | p[:, :-1]] = 0.0
            self.ex_mask[:, 0][p[:, 0]] = 0.0
            self.ex_mask[:, -1][p[:, -1]] = 0.0
            self.ey_mask[1:-1, :][p[1:, :] | p[:-1, :]] = 0.0
        self._ch = dt / mu0
        self._ce = dt / eps0
        self._inv_d = 1.0 / d

    @property
    def time(self) -> float:
        return self.frame.time

    def step(self, sources: Sequence[Source] = ()) -> FieldFrame:
        """Advance H by half a step and E by a full step."""
        f = self.frame
        total = _update_h(f.hz, f.ex, f.ey, self._psi_hzx, self._psi_hzy,
                          self._hx[0], self._hx[1], self._hx[2],
                          self._hy[0], self._hy[1], self._hy[2], self._ch, self._inv_d)
        if not math.isfinite(total):
            raise StabilityError(
                f"non-finite Hz at step {f.step} (t = {f.time:.4e} s); "
                f"Courant number {self.grid.courant:.4f}"
            )
        _update_e(f.hz, f.ex, f.ey, self._psi_exy, self._psi_eyx, self.ex_mask, self.ey_mask,
                  self._ex[0], self._ex[1], self._ex[2],
                  self._ey[0], self._ey[1], self._ey[2], self._ce, self._inv_d)
        t_half = f.time + 0.5 * self.grid.dt
        for src in sources:
            for p in src.patches(t_half):
                self._inject(p)
        f.step += 1
        f.time = f.step * self.grid.dt
        return f

    def _inject(self, p: CurrentPatch):
        v = np.asarray(p.values)
        a, b = v.shape
        if p.component == "x":
            sl = (slice(p.i0, p.i0 + a), slice(p.j0, p.j0 + b))
            self.frame.ex[sl] -= self._ce * v * self.ex_mask[sl]
        elif p.component == "y":
            sl = (slice(p.i0, p.i0 + a), slice(p.j0, p.j0 + b))
            self.frame.ey[sl] -= self._ce * v * self.ey_mask[sl]
        else:
            raise ValueError(f"unknown current component {p.component!r}")

    def energy(self) -> float:
        """Electromagnetic energy per unit length along z (J/m)."""
        f = self.frame
        area = self.grid.cell_size**2
        return 0.5 * area * (eps0 * (np.sum(f.ex**2) + np.sum(f.ey**2)) + mu0 * np.sum(f.hz**2))
