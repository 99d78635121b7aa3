"""Quasienergies and Floquet modes of time-periodic Hamiltonians.

Two independent routes are provided. :func:`floquet_solve` propagates one
period with a fourth-order commutator-free exponential integrator and
diagonalizes the monodromy matrix. :func:`extended_space_solve` builds the
truncated quasienergy operator on the harmonic lattice and diagonalizes it
directly. Both return a :class:`FloquetSolution` with the same conventions:

* quasienergies folded into ``[-omega/2, omega/2)``, sorted ascending;
* ``modes[j, :, mu]`` is ``|u_mu(t_j)>`` on ``t_j = j * tau / time_samples``;
* the largest-magnitude component of every ``|u_mu(0)>`` is real positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .errors import DefectiveMonodromyError, SolverAccuracyError, TruncationError

# Gauss-Legendre nodes and weights of the two-exponential CF4 scheme
_C1 = 0.5 - np.sqrt(3) / 6
_C2 = 0.5 + np.sqrt(3) / 6
_A1 = (3 - 2 * np.sqrt(3)) / 12
_A2 = (3 + 2 * np.sqrt(3)) / 12

DEGENERACY_TOL = 1e-9  # in units of omega
EDGE_POPULATION_TOL = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    time_steps: int = 4096
    time_samples: int = 512
    harmonic_cutoff: int = 30
    unitarity_tol: float = 1e-10
    # bound on the step-doubling error estimate of the monodromy matrix
    accuracy_tol: float = 1e-8

    def __post_init__(self):
        if self.time_steps < 1 or self.time_samples < 1 or self.harmonic_cutoff < 1:
            raise ValueError("time_steps, time_samples and harmonic_cutoff must be positive")
        if self.time_steps % self.time_samples:
            raise ValueError(
                f"time_samples ({self.time_samples}) must divide time_steps ({self.time_steps})"
            )


@dataclass(frozen=True)
class FloquetSolution:
    quasienergies: np.ndarray
    modes: np.ndarray
    monodromy: np.ndarray
    omega: float
    method: str = "monodromy"
    error_estimate: float = float("nan")
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.modes.shape[1]

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega

    @property
    def time_samples(self) -> int:
        return self.modes.shape[0]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.time_samples) * self.period / self.time_samples

    @property
    def initial_modes(self) -> np.ndarray:
        """Columns are ``|u_mu(0)>``."""
        return self.modes[0]

    def reorder(self, perm) -> "FloquetSolution":
        """Solution whose state ``i`` is state ``perm[i]`` of this one."""
        perm = np.asarray(perm, dtype=int)
        return replace(
            self,
            quasienergies=self.quasienergies[perm],
            modes=self.modes[:, :, perm],
        )

    def with_modes(self, modes) -> "FloquetSolution":
        return replace(self, modes=np.asarray(modes))

    def shifted_modes(self, shift: float) -> np.ndarray:
        """Modes evaluated at ``t_j + shift`` by band-limited Fourier interpolation."""
        return fourier_shift(self.modes, shift, self.omega)

    def harmonic_coefficients(self) -> np.ndarray:
        """``c[k, :, mu]`` with ``u_mu(t) = sum_k c_k exp(i k omega t)``; FFT index order."""
        return np.fft.fft(self.modes, axis=0) / self.time_samples


def fold(e, omega: float):
    """Map energies into the first Brillouin zone ``[-omega/2, omega/2)``."""
    e = np.asarray(e, dtype=float)
    out = e - omega * np.floor(e / omega + 0.5)
    # floor can land exactly on +omega/2 through rounding of large |e|
    out = np.where(out >= omega / 2, out - omega, out)
    return out.item() if out.ndim == 0 else out


def fourier_shift(samples: np.ndarray, shift: float, omega: float) -> np.ndarray:
    """Shift a tau-periodic uniformly sampled signal (time on axis 0) by ``shift``."""
    n = samples.shape[0]
    k = np.fft.fftfreq(n, d=1.0 / n)
    phase = np.exp(1j * k * omega * shift).reshape((n,) + (1,) * (samples.ndim - 1))
    return np.fft.ifft(np.fft.fft(samples, axis=0) * phase, axis=0)


def _expm_hermitian(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i h dt) for a stack of Hermitian matrices."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * dt)[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def _step_propagators(h, steps: int) -> np.ndarray:
    dt = h.period / steps
    t0 = np.arange(steps) * dt
    h1 = h.evaluate(t0 + _C1 * dt)
    h2 = h.evaluate(t0 + _C2 * dt)
    first = _expm_hermitian(_A2 * h1 + _A1 * h2, dt)
    second = _expm_hermitian(_A1 * h1 + _A2 * h2, dt)
    return second @ first


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """mats[-1] @ ... @ mats[0] by pairwise reduction."""
    eye = np.eye(mats.shape[-1], dtype=complex)
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            mats = np.concatenate([mats, eye[None]], axis=0)
        mats = mats[1::2] @ mats[0::2]
    return mats[0]


def _propagate(h, cfg: SolverConfig):
    """U(t_j, 0) for j = 0..time_samples (the last entry is the monodromy)."""
    steps, samples = cfg.time_steps, cfg.time_samples
    per = steps // samples
    step = _step_propagators(h, steps).reshape(samples, per, h.dim, h.dim)
    block = step[:, 0]
    for q in range(1, per):
        block = step[:, q] @ block
    out = np.empty((samples + 1, h.dim, h.dim), dtype=complex)
    out[0] = np.eye(h.dim)
    for j in range(samples):
        out[j + 1] = block[j] @ out[j]
    return out


def _unitarity_residual(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def _richardson_error(h, cfg: SolverConfig, u_fine: np.ndarray) -> float:
    """Error estimate of the fine monodromy from a run at twice the step size."""
    if cfg.time_steps % 2:
        return float("nan")
    u_coarse = _ordered_product(_step_propagators(h, cfg.time_steps // 2))
    # fourth-order scheme: err(h) ~ (U_h - U_2h) / (2**4 - 1)
    return float(np.max(np.abs(u_fine - u_coarse))) / 15.0


def monodromy(h, cfg: SolverConfig = SolverConfig()) -> np.ndarray:
    """One-period propagator U(tau, 0)."""
    return _checked_propagation(h, cfg)[0][-1]


def _checked_propagation(h, cfg):
    props = _propagate(h, cfg)
    u = props[-1]
    res = _unitarity_residual(u)
    if res > cfg.unitarity_tol:
        raise SolverAccuracyError(
            f"monodromy unitarity residual {res:.2e} exceeds {cfg.unitarity_tol:.0e}; "
            "increase time_steps"
        )
    err = _richardson_error(h, cfg, u)
    if err > cfg.accuracy_tol:
        raise SolverAccuracyError(
            f"estimated monodromy error {err:.2e} exceeds {cfg.accuracy_tol:.0e}; "
            "increase time_steps"
        )
    return props, err


def _fix_gauge(vecs: np.ndarray) -> np.ndarray:
    """Phase per column so the largest-magnitude component of ``vecs`` is real positive."""
    mag = np.abs(vecs)
    # first component within rounding of the maximum, so near-ties resolve by index
    idx = np.argmax(mag >= mag.max(axis=0, keepdims=True) * (1 - 1e-8), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    return np.conj(lead) / np.abs(lead)


def _canonical_order(eps: np.ndarray, u0: np.ndarray, omega: float) -> np.ndarray:
    order = list(np.argsort(eps, kind="stable"))
    out = []
    i = 0
    while i < len(order):
        j = i + 1
        while j < len(order) and eps[order[j]] - eps[order[j - 1]] < DEGENERACY_TOL * omega:
            j += 1
        group = order[i:j]
        if len(group) > 1:
            def key(mu):
                col = np.abs(u0[:, mu])
                nz = np.flatnonzero(col > 1e-10)
                return -col[nz[0]] if nz.size else 0.0

            group = sorted(group, key=key)
        out.extend(group)
        i = j
    return np.array(out, dtype=int)


def _finalize(eps, modes, omega, **kw) -> FloquetSolution:
    modes = modes * _fix_gauge(modes[0])[None, None, :]
    order = _canonical_order(eps, modes[0], omega)
    eps = np.asarray(eps)[order]
    modes = modes[:, :, order]
    return FloquetSolution(eps, modes, omega=omega, **kw)


def floquet_solve(h, cfg: SolverConfig = SolverConfig()) -> FloquetSolution:
    """Quasienergies and modes from the eigendecomposition of U(tau, 0)."""
    props, err = _checked_propagation(h, cfg)
    u = props[-1]
    # complex Schur form of a normal matrix is diagonal with unitary Z,
    # which keeps eigenvectors orthonormal inside degenerate subspaces
    t_mat, z = scipy.linalg.schur(u, output="complex")
    off = np.max(np.abs(np.triu(t_mat, 1))) if h.dim > 1 else 0.0
    if off > 1e-8:
        raise DefectiveMonodromyError(
            f"monodromy is not numerically diagonalizable (off-diagonal {off:.1e}); "
            "perturb the model parameters slightly"
        )
    lam = np.diag(t_mat)
    eps = fold(-np.angle(lam) / h.period, h.omega)
    eps = np.atleast_1d(eps)
    times = np.arange(cfg.time_samples) * h.period / cfg.time_samples
    modes = np.einsum("sij,jm->sim", props[:-1], z)
    modes = modes * np.exp(1j * np.outer(times, eps))[:, None, :]
    return _finalize(eps, modes, h.omega, monodromy=u, method="monodromy", error_estimate=err)


def quasienergy_operator(h, cutoff: int) -> np.ndarray:
    """Truncated Floquet Hamiltonian with blocks H_{k-k'} + k omega delta_{kk'}, |k| <= cutoff."""
    d = h.dim
    n = 2 * cutoff + 1
    hf = np.zeros((n * d, n * d), dtype=complex)
    for q, mat in h.fourier_components.items():
        for a in range(n):
            b = a - q
            if 0 <= b < n:
                hf[a * d:(a + 1) * d, b * d:(b + 1) * d] += mat
    k = np.arange(-cutoff, cutoff + 1)
    hf += np.diag(np.repeat(k * h.omega, d))
    return hf


def extended_space_solve(h, cfg: SolverConfig = SolverConfig()) -> FloquetSolution:
    """Quasienergies and modes from the truncated quasienergy operator."""
    cutoff = cfg.harmonic_cutoff
    d = h.dim
    hf = quasienergy_operator(h, cutoff)
    # half-open window shifted by delta picks one copy per state even when
    # rounding places a state at both zone edges
    delta = DEGENERACY_TOL * h.omega
    lo, hi = -h.omega / 2 - delta, h.omega / 2 - delta
    w, v = scipy.linalg.eigh(hf, subset_by_value=(lo, hi))
    keep = (w > lo) & (w <= hi)
    w, v = w[keep], v[:, keep]
    if w.size != d:
        raise TruncationError(
            f"found {w.size} quasienergies in the first zone, expected {d}; "
            "increase harmonic_cutoff"
        )
    coeffs = v.reshape(2 * cutoff + 1, d, d)  # (k, component, state)
    edge = np.sum(np.abs(coeffs[[0, -1]]) ** 2, axis=(0, 1))
    if np.max(edge) > EDGE_POPULATION_TOL:
        raise TruncationError(
            f"edge-harmonic population {np.max(edge):.1e} exceeds {EDGE_POPULATION_TOL:.0e}; "
            "increase harmonic_cutoff"
        )
    eps = fold(w, h.omega)
    eps = np.atleast_1d(eps)
    times = np.arange(cfg.time_samples) * h.period / cfg.time_samples
    k = np.arange(-cutoff, cutoff + 1)
    phases = np.exp(1j * h.omega * np.outer(times, k))
    modes = np.einsum("sk,kim->sim", phases, coeffs)
    # folding can move a copy by one harmonic; keep u periodic with the folded energy
    shift = np.rint((eps - w) / h.omega)
    modes = modes * np.exp(1j * h.omega * np.outer(times, shift))[:, None, :]
    u0 = modes[0]
    mono = (u0 * np.exp(-1j * eps * h.period)) @ u0.conj().T
    sol = _finalize(eps, modes, h.omega, monodromy=mono, method="extended")
    return replace(sol, meta={"edge_population": float(np.max(edge))})


@dataclass(frozen=True)
class BranchMatch:
    permutation: np.ndarray
    overlaps: np.ndarray
    discontinuous: bool


MATCH_THRESHOLD = 0.5


def match_branches(prev: FloquetSolution, nxt: FloquetSolution) -> BranchMatch:
    """Permutation ``perm`` with ``nxt.reorder(perm)`` continuing the branches of ``prev``.

    Greedy best-overlap assignment on ``|<u_mu^prev(0)|u_nu^next(0)>|``;
    pairs below the threshold fall back to the identity where possible and
    set ``discontinuous``.
    """
    if prev.dim != nxt.dim or not np.isclose(prev.omega, nxt.omega):
        raise ValueError("solutions must share dimension and drive frequency")
    d = prev.dim
    ov = np.abs(prev.initial_modes.conj().T @ nxt.initial_modes)
    perm = -np.ones(d, dtype=int)
    used = np.zeros(d, dtype=bool)
    work = ov.copy()
    chosen = np.zeros(d)
    for _ in range(d):
        i, j = np.unravel_index(np.argmax(work), work.shape)
        if work[i, j] < MATCH_THRESHOLD:
            break
        perm[i], used[j], chosen[i] = j, True, work[i, j]
        work[i, :] = -1
        work[:, j] = -1
    flagged = bool(np.any(perm < 0))
    free = [j for j in range(d) if not used[j]]
    for i in np.flatnonzero(perm < 0):
        j = i if i in free else free[0]
        free.remove(j)
        perm[i] = j
        chosen[i] = ov[i, j]
    return BranchMatch(perm, chosen, flagged)


def invariant_residuals(sol: FloquetSolution) -> dict:
    """Unitarity, orthonormality and periodicity residuals of a solution."""
    u = sol.monodromy
    eye = np.eye(sol.dim)
    ortho = np.max(np.abs(np.einsum("sim,sin->smn", sol.modes.conj(), sol.modes) - eye))
    u0 = sol.initial_modes
    back = np.exp(1j * sol.quasienergies * sol.period) * (u @ u0)
    return {
        "unitarity": _unitarity_residual(u),
        "orthonormality": float(ortho),
        "periodicity": float(np.max(np.abs(back - u0))),
    }
