"""Joint electron-photon amplitudes and the effect of post-selection.

One transverse dimension.  An electron in a superposition of momentum
components k_i (each a Gaussian wavepacket of momentum spread sigma_k,
centred at position x_i) emits a photon of transverse momentum q, the
grating supplying momentum kappa.  Momentum conservation gives

    A(q, k_f) = N * sum_i c_i exp(-i q x_i) G(k_f - (k_i + kappa - q); sigma_k)

with flat matrix elements.  Conditioning on k_f (coincidence) keeps the
interference between components; summing over k_f (tracing out) keeps it
only to the extent the final-state envelopes overlap, exp(-dk**2/(4 sigma_k**2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptySliceError, MetricUndefinedError, ResolutionError

ENVELOPE_SAMPLES = 4  # minimum k_f samples per sigma_k
DEFAULT_KF_SAMPLES = 8
ENVELOPE_SPAN = 10.0  # k_f grid reaches this many sigma_k past every envelope


@dataclass(frozen=True)
class ElectronState:
    """Superposition of momentum components; amplitudes are normalized on construction."""

    momenta: np.ndarray
    amplitudes: np.ndarray
    sigma_k: float
    positions: np.ndarray | None = None

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.momenta, dtype=float))
        c = np.atleast_1d(np.asarray(self.amplitudes, dtype=complex))
        if k.size == 0 or k.shape != c.shape:
            raise DomainError("momenta and amplitudes must be nonempty and of equal length")
        norm = math.sqrt(float(np.sum(np.abs(c) ** 2)))
        if norm == 0:
            raise DomainError("amplitudes are all zero")
        if not self.sigma_k >= 0:
            raise DomainError("sigma_k must be non-negative")
        x = np.zeros_like(k) if self.positions is None else np.atleast_1d(np.asarray(self.positions, dtype=float))
        if x.shape != k.shape:
            raise DomainError("positions must match momenta")
        object.__setattr__(self, "momenta", k)
        object.__setattr__(self, "amplitudes", c / norm)
        object.__setattr__(self, "positions", x)

    @property
    def separation(self) -> float:
        """Largest spread of component positions (sets the finest q fringe)."""
        return float(np.ptp(self.positions))


@dataclass(frozen=True)
class PhotonGrid:
    q: np.ndarray
    kappa: float

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 1 or q.size < 2:
            raise DomainError("q grid needs at least two points")
        dq = np.diff(q)
        if not np.allclose(dq, dq[0], rtol=1e-9, atol=0) or dq[0] <= 0:
            raise DomainError("q grid must be uniform and increasing")
        if not np.allclose(q, -q[::-1], rtol=0, atol=1e-9 * dq[0]):
            raise DomainError("q grid must be symmetric about 0")
        object.__setattr__(self, "q", q)

    @property
    def spacing(self) -> float:
        return float(self.q[1] - self.q[0])

    @classmethod
    def for_state(cls, state: ElectronState, kappa: float, periods: float = 4.0,
                  samples_per_period: int = 8, span: float | None = None):
        """Grid covering ``periods`` fringe periods each side of 0.

        Without a position spread there are no fringes; pass ``span`` (half width).
        """
        dx = state.separation
        if dx > 0:
            period = 2 * math.pi / dx
            dq = period / samples_per_period
            n_half = int(math.ceil(periods * samples_per_period))
        else:
            if span is None:
                raise DomainError("state has no fringes; give the q span explicitly")
            n_half = 64
            dq = span / n_half
        return cls(np.arange(-n_half, n_half + 1) * dq, kappa)


@dataclass(frozen=True)
class AmplitudeMatrix:
    q: np.ndarray
    kf: np.ndarray
    amplitude: np.ndarray  # shape (n_q, n_kf)
    normalization: float

    def probability(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def kf_index(self, kf: float) -> int:
        h = self.kf[1] - self.kf[0] if self.kf.size > 1 else 1.0
        i = int(np.argmin(np.abs(self.kf - kf)))
        if abs(self.kf[i] - kf) > 1e-6 * abs(h):
            raise DomainError(f"k_f = {kf:.6g} is not on the final-momentum grid")
        return i


def _kf_grid(state: ElectronState, grid: PhotonGrid, spacing: float) -> np.ndarray:
    centers = state.momenta + grid.kappa
    lo = centers.min() - grid.q.max() - ENVELOPE_SPAN * state.sigma_k
    hi = centers.max() - grid.q.min() + ENVELOPE_SPAN * state.sigma_k
    # anchor the grid on kappa + mean(k) so the symmetric central value is a node
    ref = grid.kappa + float(np.mean(state.momenta))
    i0 = int(math.floor((lo - ref) / spacing)) - 1
    i1 = int(math.ceil((hi - ref) / spacing)) + 1
    return ref + np.arange(i0, i1 + 1) * spacing


def build_amplitudes(state: ElectronState, grid: PhotonGrid, kf_spacing: float | None = None) -> AmplitudeMatrix:
    """Normalized joint amplitude on the (q, k_f) product grid.

    With ``sigma_k = 0`` the envelope is a Kronecker delta, which needs every
    k_i + kappa - q to fall on the k_f grid (spacing equal to the q spacing).
    """
    s = state.sigma_k
    if s == 0:
        h = grid.spacing if kf_spacing is None else kf_spacing
    else:
        h = s / DEFAULT_KF_SAMPLES if kf_spacing is None else kf_spacing
        if h > s / ENVELOPE_SAMPLES * (1 + 1e-12):
            raise ResolutionError(
                f"k_f spacing {h:.4g} gives fewer than {ENVELOPE_SAMPLES} samples per envelope width {s:.4g}"
            )
    kf = _kf_grid(state, grid, h)
    q = grid.q
    amp = np.zeros((q.size, kf.size), dtype=complex)
    for k_i, c_i, x_i in zip(state.momenta, state.amplitudes, state.positions):
        target = k_i + grid.kappa - q  # (n_q,)
        phase = c_i * np.exp(-1j * q * x_i)
        if s == 0:
            idx = np.rint((target - kf[0]) / h).astype(int)
            if np.any(np.abs(kf[idx] - target) > 1e-6 * h):
                raise DomainError("with sigma_k = 0 every k_i + kappa - q must lie on the k_f grid")
            amp[np.arange(q.size), idx] += phase
        else:
            u = kf[None, :] - target[:, None]
            amp += phase[:, None] * np.exp(-0.5 * (u / s) ** 2)
    norm = math.sqrt(float(np.sum(np.abs(amp) ** 2)))
    if norm == 0:
        raise EmptySliceError("joint amplitude vanishes on the grid")
    return AmplitudeMatrix(q, kf, amp / norm, 1.0 / norm)


def coincidence_pattern(A: AmplitudeMatrix, kf: float) -> np.ndarray:
    """P(q | k_f), normalized over q."""
    col = np.abs(A.amplitude[:, A.kf_index(kf)]) ** 2
    total = col.sum()
    if total == 0:
        raise EmptySliceError(f"no probability at k_f = {kf:.6g}")
    return col / total


def traced_pattern(A: AmplitudeMatrix) -> np.ndarray:
    """P(q) summed over unobserved final electron momenta, normalized over q."""
    p = np.sum(np.abs(A.amplitude) ** 2, axis=1)
    return p / p.sum()


def visibility(pattern, q=None, period: float | None = None, center: float = 0.0) -> float:
    """(max - min)/(max + min), over |q - center| <= 1.5 period when a period is given."""
    p = np.asarray(pattern, dtype=float)
    if q is not None and period is not None:
        q = np.asarray(q, dtype=float)
        p = p[np.abs(q - center) <= 1.5 * period * (1 + 1e-12)]
    if p.size == 0:
        raise DomainError("empty pattern")
    hi, lo = float(p.max()), float(p.min())
    if hi + lo == 0:
        raise MetricUndefinedError("visibility undefined for an all-zero pattern")
    return (hi - lo) / (hi + lo)


def envelope_overlap(delta_k: float, sigma_k: float) -> float:
    """Overlap of two final-state envelopes separated by delta_k."""
    return math.exp(-(delta_k**2) / (4 * sigma_k**2))
