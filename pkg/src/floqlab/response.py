"""Floquet-band susceptibilities and the coherent intensity change."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CutoffError

POPULATION_TOL = 1e-12


@dataclass(frozen=True)
class Populations:
    values: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.values, dtype=float)
        if p.ndim != 1 or np.any(p < 0):
            raise ValueError("populations must be a vector of non-negative numbers")
        if abs(p.sum() - 1.0) > POPULATION_TOL:
            raise ValueError(f"populations sum to {p.sum()!r}, expected 1")
        p.setflags(write=False)
        object.__setattr__(self, "values", p)


@dataclass(frozen=True)
class ResponseConfig:
    gamma: float = 0.002
    lam: float = 1.0
    m_cutoff: int = 10
    bands: tuple[int, ...] = (0,)

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if self.m_cutoff < 0:
            raise ValueError("m_cutoff must be non-negative")
        object.__setattr__(self, "bands", tuple(int(b) for b in self.bands))


@dataclass(frozen=True)
class ResponseSpectrum:
    band: int
    omega_p_grid: np.ndarray
    chi: np.ndarray
    config: ResponseConfig = field(default_factory=ResponseConfig)


def floquet_gibbs(sol, beta: float) -> Populations:
    """p_mu proportional to exp(-beta eps_mu) over folded quasienergies."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    e = np.asarray(sol.quasienergies)
    w = np.exp(-beta * (e - e.min()))
    p = w / w.sum()
    return Populations(p / p.sum())


def explicit_populations(values) -> Populations:
    return Populations(np.asarray(values, dtype=float))


def diagonal_populations(sol, rho) -> Populations:
    """Floquet-basis diagonal of a density matrix (or pure state vector) given at t = 0."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    u0 = sol.initial_modes
    p = np.real(np.einsum("im,ij,jm->m", u0.conj(), rho, u0))
    p = np.clip(p, 0.0, None)
    return Populations(p / p.sum())


def susceptibility(ds, sol, pops: Populations, cfg: ResponseConfig, band: int,
                   omega_p_grid) -> ResponseSpectrum:
    """Band-``band`` susceptibility chi_n(omega_p) on a probe-frequency grid."""
    n, mc = int(band), cfg.m_cutoff
    if abs(n) + mc > ds.harmonics:
        raise CutoffError(
            f"|band| + m_cutoff = {abs(n) + mc} exceeds dipole harmonic cutoff {ds.harmonics}"
        )
    grid = np.atleast_1d(np.asarray(omega_p_grid, dtype=float))
    eps = np.asarray(sol.quasienergies)
    p = pops.values
    dp = p[:, None] - p[None, :]  # [nu, mu] -> p_nu - p_mu
    ms = np.arange(-mc, mc + 1)
    # numerators[m, nu, mu] = V^(-n-m)_{nu mu} V^(m)_{mu nu} (p_nu - p_mu)
    left = np.stack([ds[-n - m] for m in ms])
    right = np.stack([ds[m].T for m in ms])
    num = left * right * dp[None]
    res = eps[None, None, :] - eps[None, :, None] + ms[:, None, None] * sol.omega
    num, res = num.ravel(), res.ravel()
    live = num != 0
    num, res = num[live], res[live]
    denom = res[None, :] - grid[:, None] - 1j * cfg.gamma
    chi = 1j * cfg.lam ** 2 * np.sum(num[None, :] / denom, axis=1)
    return ResponseSpectrum(n, grid, chi, cfg)


def spectra(ds, sol, pops, cfg: ResponseConfig, omega_p_grid) -> list[ResponseSpectrum]:
    return [susceptibility(ds, sol, pops, cfg, b, omega_p_grid) for b in cfg.bands]


def intensity_change(chi_value: complex, coherence: complex) -> float:
    """-i chi <a_s^dag a_p> + c.c."""
    z = -1j * chi_value * coherence
    return float(2 * z.real)
