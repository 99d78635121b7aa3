"""Dynamical symmetries of driven systems and their spectroscopic consequences."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dipole import DARK_RATIO, DipoleSet, dipole_elements
from .errors import InapplicableSymmetryError, PairingError, SymmetryClassificationError
from .floquet import _fix_gauge, fold, fourier_shift

# kind -> (alpha_S, beta_S, antiunitary)
KIND_PARAMETERS = {
    "RS": (+1, +1, False),
    "PHS": (-1, +1, True),
    "CS": (-1, -1, False),
    "TRS": (+1, -1, True),
}


@dataclass(frozen=True)
class SymmetrySpec:
    kind: str
    operator: np.ndarray
    t_shift_over_tau: float
    n_fold: int = 1
    alpha_v: int = 1

    def __post_init__(self):
        if self.kind not in KIND_PARAMETERS:
            raise ValueError(f"unknown symmetry kind {self.kind!r}")
        op = np.array(self.operator, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError("symmetry operator must be a square matrix")
        if np.max(np.abs(op.conj().T @ op - np.eye(op.shape[0]))) > 1e-10:
            raise ValueError(f"{self.kind} operator is not unitary")
        if self.alpha_v not in (1, -1):
            raise ValueError("alpha_v must be +1 or -1")
        if self.n_fold < 1:
            raise ValueError("n_fold must be positive")
        shift = float(self.t_shift_over_tau) % 1.0
        if self.kind == "RS" and not np.isclose(shift, (1.0 / self.n_fold) % 1.0, atol=1e-12):
            raise ValueError("rotational symmetry requires t_shift = tau / n_fold")
        op.setflags(write=False)
        object.__setattr__(self, "operator", op)
        object.__setattr__(self, "t_shift_over_tau", shift)
        object.__setattr__(self, "alpha_v", int(self.alpha_v))

    @property
    def dim(self) -> int:
        return self.operator.shape[0]

    @property
    def alpha_s(self) -> int:
        return KIND_PARAMETERS[self.kind][0]

    @property
    def beta_s(self) -> int:
        return KIND_PARAMETERS[self.kind][1]

    @property
    def antiunitary(self) -> bool:
        return KIND_PARAMETERS[self.kind][2]

    def t_shift(self, omega: float) -> float:
        return self.t_shift_over_tau * 2 * np.pi / omega

SNAP_TOL = 1e-6
BLOCK_TOL = 1e-6  # quasienergy window (units of omega) for re-diagonalization
OP_TOL = 1e-10


@dataclass(frozen=True)
class SymmetryReport:
    kind: str
    verified: bool
    max_residual: float
    state_labels: dict = field(default_factory=dict)
    predicted_dark: list = field(default_factory=list)
    predicted_vanishing_bands: set = field(default_factory=set)
    validation: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)


def symmetry_residual(h, s: SymmetrySpec, samples: int = 64) -> float:
    """max_t |S H(t_S + beta t) S^-1 - alpha H(t)| on a uniform grid."""
    if s.dim != h.dim:
        raise ValueError(f"operator dimension {s.dim} does not match Hamiltonian {h.dim}")
    if samples < 16:
        raise ValueError("at least 16 time samples are required")
    t = np.arange(samples) * h.period / samples
    mapped = h.evaluate(s.t_shift(h.omega) + s.beta_s * t)
    if s.antiunitary:
        mapped = mapped.conj()
    u = s.operator
    lhs = u @ mapped @ u.conj().T
    return float(np.max(np.abs(lhs - s.alpha_s * h.evaluate(t))))


def verify_symmetry(h, s: SymmetrySpec, samples: int = 64, tol: float = 1e-10):
    """(holds, max residual) for the time-domain form of the symmetry relation."""
    res = symmetry_residual(h, s, samples)
    return res < tol, res


def probe_sign_residual(probe, s: SymmetrySpec) -> float:
    """Residual of the probe transformation law with the declared alpha_v."""
    v = getattr(probe, "matrix", probe)
    u = s.operator
    src = v.conj() if s.antiunitary else v
    return float(np.max(np.abs(u.conj().T @ src @ u - s.alpha_v * v)))


def _blocks(eps, omega, tol=BLOCK_TOL):
    out, start = [], 0
    for i in range(1, len(eps) + 1):
        if i == len(eps) or eps[i] - eps[i - 1] >= tol * omega:
            out.append(list(range(start, i)))
            start = i
    return out


def _rotation_matrix(sol, s: SymmetrySpec) -> np.ndarray:
    """W[mu, nu] = time average of <u_mu(t)| R |u_nu(t + t_R)>."""
    shifted = sol.shifted_modes(s.t_shift(sol.omega))
    return np.einsum("sim,ij,sjn->mn", sol.modes.conj(), s.operator, shifted) / sol.time_samples


def _snap(pi, n_fold):
    m = int(np.round(np.angle(pi) * n_fold / (2 * np.pi))) % n_fold
    return m, abs(pi - np.exp(2j * np.pi * m / n_fold))


def symmetry_adapted(sol, s: SymmetrySpec):
    """Re-diagonalize R inside quasienergy-degenerate blocks.

    Returns the adapted solution and the rotation labels ``m_mu``.
    """
    if s.kind != "RS":
        raise ValueError("rotation labels require an RS symmetry")
    w = _rotation_matrix(sol, s)
    modes = sol.modes.copy()
    for block in _blocks(sol.quasienergies, sol.omega):
        if len(block) < 2:
            continue
        wb = w[np.ix_(block, block)]
        vals, vecs = np.linalg.eig(wb)
        labels = [_snap(v, s.n_fold)[0] for v in vals]
        if len(set(labels)) == 1:
            continue
        q, _ = np.linalg.qr(vecs[:, np.argsort(labels, kind="stable")])
        modes[:, :, block] = modes[:, :, block] @ q
    modes = modes * _fix_gauge(modes[0])[None, None, :]
    adapted = sol.with_modes(modes)
    return adapted, rotation_eigenvalues(adapted, s, adapt=False)


def rotation_eigenvalues(sol, s: SymmetrySpec, adapt: bool = True) -> list[int]:
    """Integers m_mu with R|u_mu(t + t_R)> = exp(2 pi i m_mu / N)|u_mu(t)>."""
    if adapt:
        return symmetry_adapted(sol, s)[1]
    w = _rotation_matrix(sol, s)
    labels = []
    for mu in range(sol.dim):
        m, dist = _snap(w[mu, mu], s.n_fold)
        if dist > SNAP_TOL:
            raise SymmetryClassificationError(
                f"state {mu}: rotation eigenvalue {w[mu, mu]:.6f} is {dist:.1e} away from the "
                f"nearest {s.n_fold}-th root of unity (unverified symmetry or unresolved degeneracy)"
            )
        labels.append(m)
    return labels


def _rs_allowed(m_row, m_col, n, s):
    # V^(n)_{row,col} survives iff exp(2 pi i (m_col - m_row - n)/N) alpha_V = 1,
    # with m defined by R|u(t + t_R)> = exp(2 pi i m / N)|u(t)>
    k = (m_col - m_row - n) % s.n_fold
    phase_one = k == 0
    if s.alpha_v == 1:
        return phase_one
    return s.n_fold % 2 == 0 and k == s.n_fold // 2


def predict_rs_dark_states(labels, s: SymmetrySpec, n_range: int):
    """Triples (row, col, n) with V^(n)_{row,col} forced to zero by the rotation."""
    d = len(labels)
    return [
        (a, b, n)
        for n in range(-n_range, n_range + 1)
        for a in range(d)
        for b in range(d)
        if not _rs_allowed(labels[a], labels[b], n, s)
    ]


def fbsr_vanishing_bands(s: SymmetrySpec, band_range: int) -> set[int]:
    """Floquet bands n with exp(2 pi i n / N) != 1."""
    return {n for n in range(-band_range, band_range + 1) if n % s.n_fold}


def _phs_partner_overlaps(sol, s: SymmetrySpec) -> np.ndarray:
    """O[mu', mu] = |<u_mu'(0)| P |u_mu(t_P)>*|."""
    at_tp = sol.shifted_modes(s.t_shift(sol.omega))[0]
    return np.abs(sol.initial_modes.conj().T @ (s.operator @ at_tp.conj()))


def phs_partner_pairing(sol, s: SymmetrySpec, tol: float = 1e-6):
    """Pairs (mu, mu') of particle-hole partners, mu <= mu'; self-pairs allowed."""
    if s.kind != "PHS":
        raise ValueError("partner pairing requires a PHS symmetry")
    d = sol.dim
    eps = sol.quasienergies
    ov = _phs_partner_overlaps(sol, s)
    score = 0.5 * (ov + ov.T)
    ok = np.abs(fold(eps[:, None] + eps[None, :], sol.omega)) < tol * sol.omega
    score = np.where(ok, score, -1.0)
    pairs, free = [], set(range(d))
    while free:
        idx = sorted(free)
        sub = score[np.ix_(idx, idx)]
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] < 0:
            raise PairingError(
                f"states {idx} have no particle-hole partner within quasienergy tolerance {tol}"
            )
        a, b = sorted((idx[i], idx[j]))
        pairs.append((a, b))
        free -= {a, b}
    return sorted(pairs)


def _phs_rule_problems(s: SymmetrySpec):
    problems = []
    if s.kind != "PHS":
        problems.append(f"kind is {s.kind}, expected PHS")
    if not (np.isclose(s.t_shift_over_tau, 0.0, atol=1e-12) or np.isclose(s.t_shift_over_tau, 0.5, atol=1e-12)):
        problems.append(f"t_P = {s.t_shift_over_tau} tau is not 0 or tau/2")
    p = s.operator
    if np.max(np.abs(p.conj() @ p - np.eye(s.dim))) > OP_TOL:
        problems.append("P* P != 1")
    return problems


def predict_phs_dark_states(pairs, s: SymmetrySpec, n_range: int):
    """Triples (mu, mu', n) forced to zero between particle-hole partners."""
    problems = _phs_rule_problems(s)
    if problems:
        raise InapplicableSymmetryError(problems)
    out = []
    for n in range(-n_range, n_range + 1):
        # alpha_V exp(-i n omega t_P) with t_P in {0, tau/2}
        phase = s.alpha_v * (-1) ** (n * round(2 * s.t_shift_over_tau))
        if phase == -1:
            for a, b in pairs:
                out.append((a, b, n))
                if a != b:
                    out.append((b, a, n))
    return sorted(out, key=lambda x: (x[2], x[0], x[1]))


def scan_dark_states(ds: DipoleSet, threshold_ratio: float = DARK_RATIO):
    """All (mu, nu, n) with |V^(n)_{mu nu}| below threshold_ratio * max|V|."""
    mask = np.abs(ds.elements) < threshold_ratio * ds.max_abs
    return [(int(a), int(b), int(k) - ds.harmonics) for k, a, b in zip(*np.nonzero(mask))]


def validate_dark(ds: DipoleSet, triples) -> dict:
    """Measured |V|/max|V| for each predicted-dark triple."""
    return {t: ds.ratio(t[0], t[1], t[2]) for t in triples}


# -- symmetry-induced transparency ------------------------------------------------


@dataclass(frozen=True)
class SitReport:
    pair: tuple
    relation_residual: float
    relation_holds: bool
    cancellation: dict
    solution: object
    dipoles: DipoleSet
    sign_product: int


def _antiunitary_block_matrix(sol, s, block):
    """M[b, a] = <u_b(0)| P |u_a(t_P)>* restricted to a block of states."""
    at_tp = sol.shifted_modes(s.t_shift(sol.omega))[0][:, block]
    return sol.initial_modes[:, block].conj().T @ (s.operator @ at_tp.conj())


def _fixed_phase(m, c):
    """Phase of c such that the antilinear map x -> m x* fixes it."""
    img = m @ c.conj()
    theta = np.angle(np.vdot(c, img))
    return c * np.exp(0.5j * theta)


def sit_check(s1: SymmetrySpec, s2: SymmetrySpec, sol, ds: DipoleSet, band_range: int,
              tol: float = 1e-6) -> SitReport:
    """Transparency analysis at a zero-quasienergy crossing under two PHSs.

    Builds the partner basis of the degenerate zero block in which P2 maps
    each state to itself and P1 swaps them, checks the dipole relation there
    and tabulates which (n, m) resonances are predicted to cancel.
    """
    problems = []
    if s1.kind != "PHS" or s2.kind != "PHS":
        problems.append("both symmetries must be PHS")
    p1, p2 = s1.operator, s2.operator
    eye = np.eye(s1.dim)
    if np.max(np.abs(p1 - p2)) < OP_TOL or np.max(np.abs(p1 + p2)) < OP_TOL:
        problems.append("P1 = +-P2")
    if np.max(np.abs(p1 @ p2 - p2 @ p1)) > OP_TOL:
        problems.append("[P1, P2] != 0")
    for i, p in ((1, p1), (2, p2)):
        if np.max(np.abs(p @ p - eye)) > OP_TOL:
            problems.append(f"P{i}^2 != 1")
    zero = [mu for mu in range(sol.dim) if abs(sol.quasienergies[mu]) < tol * sol.omega]
    if len(zero) != 2:
        problems.append(f"expected a degenerate zero-quasienergy pair, found {len(zero)} states")
    if problems:
        raise InapplicableSymmetryError(problems)

    m1 = _antiunitary_block_matrix(sol, s1, zero)
    m2 = _antiunitary_block_matrix(sol, s2, zero)
    vals, vecs = np.linalg.eig(m1 @ m2.conj())
    order = np.argsort(-vals.real)
    v_plus = _fixed_phase(m2, vecs[:, order[0]])
    v_minus = _fixed_phase(m1, vecs[:, order[1]])
    basis = np.column_stack([v_plus + v_minus, v_plus - v_minus]) / np.sqrt(2)

    full = np.eye(sol.dim, dtype=complex)
    full[np.ix_(zero, zero)] = basis
    modes = sol.modes @ full
    adapted = sol.with_modes(modes)
    elems = np.einsum("im,kij,jn->kmn", full.conj(), ds.elements, full)
    new_ds = replace(ds, elements=elems)

    mu, mup = zero
    tshift = (s1.t_shift_over_tau - s2.t_shift_over_tau) * 2 * np.pi / sol.omega
    sign = s1.alpha_v * s2.alpha_v
    res = 0.0
    for n in new_ds.orders:
        lhs = new_ds[n][mup, mu]
        rhs = new_ds[n][mu, mup] * sign * np.exp(-1j * n * sol.omega * tshift)
        res = max(res, abs(lhs - rhs))
    res /= max(new_ds.max_abs, 1e-300)
    cancel = {}
    for n in range(-band_range, band_range + 1):
        for m in range(-band_range, band_range + 1):
            phase = np.exp(1j * m * sol.omega * tshift)
            cancel[(n, m)] = bool(abs(phase - 1) < 1e-9)
    return SitReport((mu, mup), float(res), res < 1e-8, cancel, adapted, new_ds, sign)


# -- chiral / time-reversal ----------------------------------------------------------


@dataclass(frozen=True)
class CompositionResult:
    spec: SymmetrySpec
    flags: dict

    @property
    def dark_rule_applicable(self) -> bool:
        return all(self.flags.values())


def compose_cs_trs(cs: SymmetrySpec, trs: SymmetrySpec) -> CompositionResult:
    """Particle-hole symmetry P = C T, t_P = t_T - t_C, implied by a CS and a TRS."""
    if cs.kind != "CS" or trs.kind != "TRS":
        raise ValueError("expected a CS and a TRS specification")
    if cs.dim != trs.dim:
        raise ValueError("CS and TRS operators differ in dimension")
    c, t = cs.operator, trs.operator
    eye = np.eye(cs.dim)
    shift = (trs.t_shift_over_tau - cs.t_shift_over_tau) % 1.0
    spec = SymmetrySpec("PHS", c @ t, shift, alpha_v=cs.alpha_v * trs.alpha_v)
    flags = {
        "t_P in {0, tau/2}": bool(
            min(abs(shift), abs(shift - 0.5), abs(shift - 1.0)) < 1e-12
        ),
        "C* C = 1": bool(np.max(np.abs(c.conj() @ c - eye)) < OP_TOL),
        "T* T = 1": bool(np.max(np.abs(t.conj() @ t - eye)) < OP_TOL),
        "[C, T] = 0": bool(np.max(np.abs(c @ t - t @ c)) < OP_TOL),
    }
    return CompositionResult(spec, flags)


def no_dark_rule(kind: str) -> dict:
    """Dipole identity implied by a lone chiral or time-reversal symmetry."""
    if kind == "CS":
        return {
            "kind": "CS",
            "implies_dark_states": False,
            "relation": "V^(n)_{mu mu'} = exp(-i n omega t_C) alpha_V conj(V^(n)_{mu mu'})",
            "applies_to": "chiral partners mu, mu'",
            "gauge_dependent": True,
        }
    if kind == "TRS":
        return {
            "kind": "TRS",
            "implies_dark_states": False,
            "relation": "V^(n)_{mu nu} = exp(-i n omega t_T) alpha_V conj(V^(n)_{mu nu})",
            "applies_to": "all pairs mu, nu",
            "gauge_dependent": False,
        }
    raise ValueError(f"no lone-symmetry rule for kind {kind!r}")


def _reflected_at(sol, t_s):
    """|u_mu(t_s - t)> on the grid."""
    n = sol.time_samples
    reflected = sol.modes[(-np.arange(n)) % n]
    return fourier_shift(reflected, -t_s, sol.omega)


def trs_gauge(sol, s: SymmetrySpec):
    """Per-state phases making |u_mu(t)> = T |u_mu(t_T - t)>* hold exactly."""
    if s.kind != "TRS":
        raise ValueError("expected a TRS specification")
    image = s.operator @ _reflected_at(sol, s.t_shift(sol.omega))[0].conj()
    c = np.einsum("im,im->m", sol.initial_modes.conj(), image)
    return sol.with_modes(sol.modes * np.exp(-0.5j * np.angle(c))[None, None, :])


def lone_symmetry_residual(s: SymmetrySpec, sol, probe, harmonics: int = 20) -> float:
    """Residual of the lone CS/TRS dipole identity, relative to max|V|.

    TRS is evaluated in the gauge where the time-reversal relation of the
    modes holds without phases; CS is evaluated in the solver gauge between
    chiral partners and is therefore gauge dependent.
    """
    if s.kind == "TRS":
        ds = dipole_elements(trs_gauge(sol, s), probe, harmonics)
        pairs = [(a, b) for a in range(sol.dim) for b in range(sol.dim)]
    elif s.kind == "CS":
        ds = dipole_elements(sol, probe, harmonics)
        eps = sol.quasienergies
        mirror = np.abs(fold(eps[:, None] + eps[None, :], sol.omega))
        pairs = [(a, int(np.argmin(mirror[a]))) for a in range(sol.dim)]
    else:
        raise ValueError("lone-symmetry identities exist only for CS and TRS")
    ts = s.t_shift(sol.omega)
    res = 0.0
    for n in ds.orders:
        vn = ds[n]
        phase = np.exp(-1j * n * sol.omega * ts) * s.alpha_v
        for a, b in pairs:
            res = max(res, abs(vn[a, b] - phase * np.conj(vn[a, b])))
    return res / max(ds.max_abs, 1e-300)


# -- aggregate report ------------------------------------------------------------


def symmetry_report(h, probe, s: SymmetrySpec, sol, ds: DipoleSet, n_range: int,
                    tol: float = 1e-10) -> SymmetryReport:
    """Verification, state classification and validated predictions for one symmetry.

    Predictions are only made for verified symmetries. A PHS whose dark-state
    preconditions fail is reported with the reasons in ``notes``; the same
    goes for classification failures.
    """
    verified, residual = verify_symmetry(h, s, tol=tol)
    notes = {"probe_sign_residual": probe_sign_residual(probe, s)}
    labels, dark, bands = {}, [], set()
    if verified and s.kind == "RS":
        try:
            m = rotation_eigenvalues(sol, s, adapt=False)
        except SymmetryClassificationError as exc:
            notes["classification_error"] = str(exc)
        else:
            labels = {"m": m}
            dark = predict_rs_dark_states(m, s, n_range)
            bands = fbsr_vanishing_bands(s, n_range)
    elif verified and s.kind == "PHS":
        try:
            pairs = phs_partner_pairing(sol, s)
        except PairingError as exc:
            notes["pairing_error"] = str(exc)
        else:
            labels = {"pairs": pairs}
            try:
                dark = predict_phs_dark_states(pairs, s, n_range)
            except InapplicableSymmetryError as exc:
                notes["dark_rule_inapplicable"] = exc.reasons
    elif verified:
        rule = no_dark_rule(s.kind)
        notes["lone_rule"] = rule
        notes["lone_rule_residual"] = lone_symmetry_residual(s, sol, probe, ds.harmonics)
    validation = validate_dark(ds, dark)
    return SymmetryReport(s.kind, bool(verified), float(residual), labels, dark, bands,
                          validation, notes)
