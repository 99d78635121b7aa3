"""Harmonic-resolved probe matrix elements between Floquet modes."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NyquistError

DEFAULT_HARMONICS = 20
DECAY_TOL = 1e-6
DARK_RATIO = 1e-8


@dataclass(frozen=True)
class DipoleSet:
    """``elements[n + harmonics, mu, nu]`` holds V^(n)_{mu nu} for |n| <= harmonics."""

    harmonics: int
    elements: np.ndarray
    omega: float
    decay_ratio: float = 0.0
    warning: str | None = None

    def __getitem__(self, n: int) -> np.ndarray:
        if abs(n) > self.harmonics:
            return np.zeros(self.elements.shape[1:], dtype=complex)
        return self.elements[n + self.harmonics]

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.harmonics, self.harmonics + 1)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.elements)))

    def ratio(self, mu: int, nu: int, n: int) -> float:
        """|V^(n)_{mu nu}| relative to the largest element of the set."""
        m = self.max_abs
        return float(abs(self[n][mu, nu]) / m) if m > 0 else 0.0

    def conjugation_residual(self) -> float:
        """max |V^(n)_{mu nu} - conj(V^(-n)_{nu mu})|."""
        flipped = np.conj(self.elements[::-1].swapaxes(1, 2))
        return float(np.max(np.abs(self.elements - flipped)))


def matrix_element_series(sol, probe) -> np.ndarray:
    """<u_mu(t_j)|V|u_nu(t_j)> on the stored time grid, shape (samples, dim, dim)."""
    v = getattr(probe, "matrix", probe)
    return np.einsum("sim,ij,sjn->smn", sol.modes.conj(), v, sol.modes, optimize=True)


def dipole_elements(sol, probe, harmonics: int = DEFAULT_HARMONICS) -> DipoleSet:
    """Fourier harmonics -harmonics..harmonics of the matrix-element time series."""
    samples = sol.time_samples
    v = getattr(probe, "matrix", probe)
    if v.shape != (sol.dim, sol.dim):
        raise ValueError(f"probe shape {v.shape} does not match solution dimension {sol.dim}")
    if not 0 <= harmonics < samples / 2:
        raise NyquistError(
            f"harmonic cutoff {harmonics} must be below time_samples/2 = {samples / 2}"
        )
    series = matrix_element_series(sol, v)
    spec = np.fft.fft(series, axis=0) / samples
    orders = np.arange(-harmonics, harmonics + 1)
    elements = spec[orders % samples]
    elements.setflags(write=False)

    # relative to the largest element of any order: folding can leave V^(0) empty
    center = np.max(np.abs(elements))
    edge = max(np.max(np.abs(elements[0])), np.max(np.abs(elements[-1])))
    ratio = float(edge / center) if center > 0 else (0.0 if edge == 0 else float("inf"))
    msg = None
    if ratio >= DECAY_TOL:
        msg = f"|V^(+-{harmonics})|/max|V| = {ratio:.1e}; harmonic cutoff may be too small"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return DipoleSet(harmonics, elements, sol.omega, ratio, msg)


def parseval_residual(ds: DipoleSet, sol, probe) -> float:
    """Mismatch between harmonic power and time-averaged power per element."""
    series = matrix_element_series(sol, probe)
    time_power = np.mean(np.abs(series) ** 2, axis=0)
    harm_power = np.sum(np.abs(ds.elements) ** 2, axis=0)
    return float(np.max(np.abs(harm_power - time_power)))
