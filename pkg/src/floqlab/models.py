"""Time-periodic model Hamiltonians in Fourier form.

All builders take energies in the same units as ``omega``; passing
``omega=1`` makes every parameter read directly in units of the drive
frequency, which is how the figures and the CLI use them.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ModelParseError, ModelValidationError
from .symmetry import SymmetrySpec

HERMITIAN_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PeriodicHamiltonian:
    """H(t) = sum_k H_k exp(i k omega t), stored harmonic by harmonic."""

    dim: int
    omega: float
    fourier_components: Mapping[int, np.ndarray]

    def __post_init__(self):
        if self.dim < 1:
            raise ModelValidationError(f"dim must be positive, got {self.dim}")
        if not self.omega > 0:
            raise ModelValidationError(f"omega must be positive, got {self.omega}")
        if not self.fourier_components:
            raise ModelValidationError("at least one Fourier component is required")
        comps = {}
        for k, mat in self.fourier_components.items():
            mat = _frozen(mat)
            if mat.shape != (self.dim, self.dim):
                raise ModelValidationError(
                    f"harmonic {k} has shape {mat.shape}, expected {(self.dim, self.dim)}"
                )
            comps[int(k)] = mat
        object.__setattr__(self, "fourier_components", dict(sorted(comps.items())))
        res = self.hermiticity_residual()
        if res > HERMITIAN_TOL:
            raise ModelValidationError(f"H_-k != H_k^dagger (residual {res:.1e})")

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega

    @property
    def max_harmonic(self) -> int:
        return max(abs(k) for k in self.fourier_components)

    def component(self, k: int) -> np.ndarray:
        """H_k, or the zero matrix when harmonic ``k`` is not stored."""
        mat = self.fourier_components.get(int(k))
        if mat is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return mat

    def hermiticity_residual(self) -> float:
        res = 0.0
        for k, mat in self.fourier_components.items():
            res = max(res, float(np.max(np.abs(self.component(-k) - mat.conj().T))))
        return res

    def evaluate(self, t):
        """H(t) for a scalar time or an array of times (shape ``t.shape + (dim, dim)``)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (self.dim, self.dim), dtype=complex)
        for k, mat in self.fourier_components.items():
            phase = np.exp(1j * k * self.omega * t)
            out += phase[..., None, None] * mat
        return out

    def norm(self) -> float:
        """Upper bound on the spectral norm of H(t) over one period."""
        return float(sum(np.linalg.norm(m, 2) for m in self.fourier_components.values()))


def evaluate(h: PeriodicHamiltonian, t) -> np.ndarray:
    return h.evaluate(t)


@dataclass(frozen=True)
class ProbeOperator:
    matrix: np.ndarray
    coupling: float = 1.0

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ModelValidationError(f"probe must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ModelValidationError("probe operator is not Hermitian")
        if self.coupling < 0:
            raise ModelValidationError("probe coupling must be non-negative")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "coupling", float(self.coupling))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ModelBundle:
    hamiltonian: PeriodicHamiltonian
    probe: ProbeOperator
    symmetries: tuple[SymmetrySpec, ...] = ()
    basis_labels: tuple[str, ...] = ()

    def __post_init__(self):
        dim = self.hamiltonian.dim
        if self.probe.dim != dim:
            raise ModelValidationError(
                f"probe dimension {self.probe.dim} does not match Hamiltonian dimension {dim}"
            )
        for s in self.symmetries:
            if s.dim != dim:
                raise ModelValidationError(
                    f"{s.kind} operator has dimension {s.dim}, expected {dim}"
                )
        labels = tuple(self.basis_labels) or tuple(str(i) for i in range(dim))
        if len(labels) != dim:
            raise ModelValidationError(f"expected {dim} basis labels, got {len(labels)}")
        object.__setattr__(self, "symmetries", tuple(self.symmetries))
        object.__setattr__(self, "basis_labels", labels)

    def symmetry(self, kind: str) -> SymmetrySpec:
        """First bundled symmetry of the given kind."""
        for s in self.symmetries:
            if s.kind == kind:
                return s
        raise KeyError(kind)


def _cos_drive(dim, omega, static, drive_op, amplitude, phase=0.0):
    """Components of static + amplitude*cos(omega t + phase)*drive_op."""
    comps = {0: static}
    if amplitude != 0:
        half = 0.5 * amplitude * drive_op
        comps[1] = np.exp(1j * phase) * half
        comps[-1] = np.exp(-1j * phase) * half.conj().T
    return PeriodicHamiltonian(dim, omega, comps)


def build_benzene(E0: float, J0: float, f_drive: float, omega: float = 1.0) -> ModelBundle:
    """Six-site ring with a circularly rotating Peierls drive plus a ground state.

    Basis ordering is ``g, e1, ..., e6``. The probe excites ``g`` to every
    site with unit dipole; the bundled rotation shifts ``e_j -> e_{j+1}``
    and leaves ``g`` untouched.
    """
    n_sites = 6
    dim = n_sites + 1
    site = lambda j: 1 + (j - 1) % n_sites  # noqa: E731

    h0 = np.zeros((dim, dim), dtype=complex)
    h1 = np.zeros((dim, dim), dtype=complex)
    for j in range(1, n_sites + 1):
        a, b = site(j), site(j + 1)
        h0[a, a] = E0
        h0[a, b] = h0[b, a] = J0
        # i f_j(t)|e_j><e_{j+1}| + h.c., f_j = f cos(omega t + 2 pi j / 6)
        c = 0.5 * f_drive * np.exp(2j * np.pi * j / n_sites)
        h1[a, b] += 1j * c
        h1[b, a] += -1j * c
    comps = {0: h0}
    if f_drive != 0:
        comps[1] = h1
        comps[-1] = h1.conj().T
    ham = PeriodicHamiltonian(dim, omega, comps)

    v = np.zeros((dim, dim), dtype=complex)
    v[1:, 0] = 1.0
    v[0, 1:] = 1.0

    rot = np.zeros((dim, dim), dtype=complex)
    rot[0, 0] = 1.0
    for j in range(1, n_sites + 1):
        rot[site(j + 1), site(j)] = 1.0
    rs = SymmetrySpec("RS", rot, 1.0 / n_sites, n_fold=n_sites, alpha_v=+1)

    labels = ("g",) + tuple(f"e{j}" for j in range(1, n_sites + 1))
    return ModelBundle(ham, ProbeOperator(v), (rs,), labels)


def _A(dim, a, b):
    m = np.zeros((dim, dim), dtype=complex)
    m[a, b] += 1
    m[b, a] += 1
    return m


def _proj(dim, a):
    m = np.zeros((dim, dim), dtype=complex)
    m[a, a] = 1
    return m


def build_dimer(delta: float, J0: float, r: float, f_drive: float, omega: float = 1.0) -> ModelBundle:
    """Four-level dimer (g, e1, e2, f) driven by h1(t) = f cos(omega t).

    Diagonal ``A_{a,a}`` terms are read as projectors, so the undriven
    spectrum is ``{+-delta, +-J0}``.
    """
    dim = 4
    g, e1, e2, f = range(dim)
    static = delta * (_proj(dim, f) - _proj(dim, g)) + J0 * _A(dim, e1, e2)
    drive = _A(dim, e1, f) + _A(dim, g, e1) + r * _A(dim, e1, e2)
    ham = _cos_drive(dim, omega, static, drive, f_drive)
    probe = ProbeOperator(_A(dim, e1, f) + _A(dim, g, e1))
    # relative sign between the g<->f swap and the e1/e2 block is what makes
    # P H* P = -H hold for the drive term as well
    p_op = _A(dim, g, f) - _proj(dim, e1) + _proj(dim, e2)
    phs = SymmetrySpec("PHS", p_op, 0.0, alpha_v=-1)
    return ModelBundle(ham, probe, (phs,), ("g", "e1", "e2", "f"))


def build_tls(h_x: float, f_drive: float, omega: float = 1.0) -> ModelBundle:
    """Driven two-level system (h_x/2) sx + (f/2) cos(omega t) sz, probed by sx."""
    ham = _cos_drive(2, omega, 0.5 * h_x * SIGMA_X, 0.5 * SIGMA_Z, f_drive)
    eye = np.eye(2, dtype=complex)
    syms = [
        SymmetrySpec("RS", SIGMA_X, 0.5, n_fold=2, alpha_v=+1),
        SymmetrySpec("PHS", SIGMA_Z, 0.5, alpha_v=-1),
    ]
    if h_x == 0:
        syms.append(SymmetrySpec("PHS", eye, 0.5, alpha_v=+1))
    syms += [
        SymmetrySpec("TRS", eye, 0.0, alpha_v=+1),
        SymmetrySpec("CS", SIGMA_Z, 0.5, alpha_v=-1),
    ]
    return ModelBundle(ham, ProbeOperator(SIGMA_X), tuple(syms), ("up", "down"))


BUILTIN_MODELS = {
    "benzene": (build_benzene, {"E0": 0.45, "J0": 0.05, "f_drive": 1.0}),
    "dimer": (build_dimer, {"delta": 0.2, "J0": 0.05, "r": 2.0, "f_drive": 1.0}),
    "tls": (build_tls, {"h_x": 0.05, "f_drive": 1.0}),
}


def build_model(name: str, omega: float = 1.0, **params) -> ModelBundle:
    """Build one of the bundled models with defaults for unspecified parameters."""
    try:
        builder, defaults = BUILTIN_MODELS[name]
    except KeyError:
        raise ModelParseError("model", f"unknown builtin model {name!r}") from None
    unknown = set(params) - set(defaults)
    if unknown:
        raise ModelParseError("params", f"unknown parameters for {name}: {sorted(unknown)}")
    kwargs = {**defaults, **params}
    return builder(omega=omega, **kwargs)


# -- custom-model documents ---------------------------------------------------

_KINDS = ("RS", "PHS", "CS", "TRS")


def _get(doc, key, where, required=True, default=None):
    if not isinstance(doc, Mapping):
        raise ModelParseError(where, "expected an object")
    if key not in doc:
        if required:
            raise ModelParseError(f"{where}.{key}" if where else key, "missing required field")
        return default
    return doc[key]


def _matrix(obj, where, dim):
    if not isinstance(obj, Mapping):
        raise ModelParseError(where, "expected an object with 're' and optional 'im'")
    re = _get(obj, "re", where)
    im = obj.get("im")
    try:
        re = np.asarray(re, dtype=float)
        im = np.zeros_like(re) if im is None else np.asarray(im, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelParseError(where, f"matrix entries must be real numbers ({exc})") from None
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ModelValidationError(
            f"{where}: matrix shape {re.shape}/{im.shape} does not match dim={dim}"
        )
    return re + 1j * im


def load_custom(document) -> ModelBundle:
    """Build a ModelBundle from a JSON document (text, path or parsed mapping).

    Harmonics given only for k (or only for -k) are completed by Hermitian
    conjugation; when both are present they must agree.
    """
    if isinstance(document, Path):
        document = document.read_text()
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ModelParseError("document", f"invalid JSON ({exc})") from None
    if not isinstance(document, Mapping):
        raise ModelParseError("document", "expected a JSON object")

    dim = _get(document, "dim", "")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ModelParseError("dim", "must be a positive integer")
    omega = _get(document, "omega", "")
    if not isinstance(omega, (int, float)) or isinstance(omega, bool) or omega <= 0:
        raise ModelParseError("omega", "must be a positive number")

    fourier = _get(document, "fourier", "")
    if not isinstance(fourier, list):
        raise ModelParseError("fourier", "must be a list")
    if not fourier:
        raise ModelValidationError("fourier: at least one Fourier component is required")
    given = {}
    for i, entry in enumerate(fourier):
        where = f"fourier[{i}]"
        k = _get(entry, "k", where)
        if not isinstance(k, int) or isinstance(k, bool):
            raise ModelParseError(f"{where}.k", "must be an integer")
        if k in given:
            raise ModelParseError(f"{where}.k", f"duplicate harmonic {k}")
        given[k] = _matrix(entry, where, dim)

    comps = dict(given)
    for k, mat in given.items():
        partner = mat.conj().T
        if -k in given:
            if np.max(np.abs(given[-k] - partner)) > HERMITIAN_TOL:
                raise ModelValidationError(
                    f"fourier: harmonics {k} and {-k} are not Hermitian conjugates"
                )
        else:
            comps[-k] = partner
    ham = PeriodicHamiltonian(dim, float(omega), comps)

    probe_doc = _get(document, "probe", "")
    pmat = _matrix(probe_doc, "probe", dim)
    coupling = probe_doc.get("coupling", 1.0)
    if not isinstance(coupling, (int, float)) or isinstance(coupling, bool):
        raise ModelParseError("probe.coupling", "must be a number")
    probe = ProbeOperator(pmat, float(coupling))

    syms = []
    for i, sdoc in enumerate(_get(document, "symmetries", "", required=False, default=[]) or []):
        where = f"symmetries[{i}]"
        kind = _get(sdoc, "kind", where)
        if kind not in _KINDS:
            raise ModelParseError(f"{where}.kind", f"must be one of {_KINDS}")
        op = _matrix(_get(sdoc, "operator", where), f"{where}.operator", dim)
        shift = _get(sdoc, "t_shift_over_tau", where, required=False, default=None)
        n_fold = _get(sdoc, "n_fold", where, required=(kind == "RS"), default=1)
        if not isinstance(n_fold, int) or n_fold < 1:
            raise ModelParseError(f"{where}.n_fold", "must be a positive integer")
        if shift is None:
            if kind != "RS":
                raise ModelParseError(f"{where}.t_shift_over_tau", "missing required field")
            shift = 1.0 / n_fold
        alpha = _get(sdoc, "alpha_v", where, required=False, default=1)
        if alpha not in (1, -1):
            raise ModelParseError(f"{where}.alpha_v", "must be +1 or -1")
        try:
            syms.append(SymmetrySpec(kind, op, float(shift), n_fold=n_fold, alpha_v=alpha))
        except ValueError as exc:
            raise ModelValidationError(f"{where}: {exc}") from None

    labels = _get(document, "labels", "", required=False, default=None)
    if labels is not None and (
        not isinstance(labels, list) or not all(isinstance(x, str) for x in labels)
    ):
        raise ModelParseError("labels", "must be a list of strings")
    return ModelBundle(ham, probe, tuple(syms), tuple(labels or ()))


def _mat_doc(m):
    m = np.asarray(m)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def to_document(bundle: ModelBundle) -> dict:
    """Inverse of :func:`load_custom` (all harmonics written explicitly)."""
    h = bundle.hamiltonian
    doc = {
        "dim": h.dim,
        "omega": h.omega,
        "fourier": [{"k": k, **_mat_doc(m)} for k, m in h.fourier_components.items()],
        "probe": {**_mat_doc(bundle.probe.matrix), "coupling": bundle.probe.coupling},
        "symmetries": [
            {
                "kind": s.kind,
                "operator": _mat_doc(s.operator),
                "t_shift_over_tau": s.t_shift_over_tau,
                "n_fold": s.n_fold,
                "alpha_v": s.alpha_v,
            }
            for s in bundle.symmetries
        ],
        "labels": list(bundle.basis_labels),
    }
    return doc
