"""Run configuration for the command-line sweeps.

A run is described by a JSON document::

    {
      "model": {"builtin": "dimer", "params": {"r": 2.0}},
      "omega": 1.0,
      "solver": {"time_steps": 4096, "time_samples": 512},
      "response": {"gamma": 0.002, "lam": 1.0, "m_cutoff": 10, "bands": [0],
                   "harmonics": 20,
                   "populations": {"source": "floquet_gibbs", "beta": 10.0}},
      "sweep": {"drive": {"start": 0.0, "stop": 3.0, "count": 301},
                "probe": {"start": -1.0, "stop": 1.0, "count": 401}},
      "outputs": ["quasienergies"]
    }

``model`` may instead be ``{"path": "custom.json"}``; for custom models the
drive grid scales every ``k != 0`` Fourier component. Frequencies and
energies are in units of omega.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .dipole import DARK_RATIO, DEFAULT_HARMONICS
from .errors import ConfigError, ModelParseError, ModelValidationError
from .floquet import SolverConfig
from .models import BUILTIN_MODELS, ModelBundle, PeriodicHamiltonian, build_model, load_custom
from .response import ResponseConfig, diagonal_populations, explicit_populations, floquet_gibbs

OUTPUTS = ("quasienergies", "susceptibility", "dipoles", "symmetry_report", "dark_scan")
POPULATION_SOURCES = ("floquet_gibbs", "explicit", "state")


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if not isinstance(self.count, int) or isinstance(self.count, bool) or self.count < 1:
            raise ConfigError(f"grid count must be a positive integer, got {self.count!r}")
        if not self.stop >= self.start:
            raise ConfigError(f"grid stop ({self.stop}) must not be below start ({self.start})")
        if self.count == 1 and self.stop != self.start:
            raise ConfigError("a single-point grid needs start == stop")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class PopulationSource:
    source: str = "floquet_gibbs"
    beta: float = 10.0
    values: tuple[float, ...] = ()
    # basis index of a pure initial state (source = "state")
    index: int = 0

    def __post_init__(self):
        if self.source not in POPULATION_SOURCES:
            raise ConfigError(
                f"population source must be one of {POPULATION_SOURCES}, got {self.source!r}"
            )
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.source == "explicit":
            try:
                explicit_populations(self.values)
            except ValueError as exc:
                raise ConfigError(f"explicit populations: {exc}") from None
        if self.source == "floquet_gibbs" and self.beta < 0:
            raise ConfigError("beta must be non-negative")

    def populations(self, sol):
        if self.source == "floquet_gibbs":
            return floquet_gibbs(sol, self.beta)
        if self.source == "explicit":
            if len(self.values) != sol.dim:
                raise ConfigError(f"expected {sol.dim} explicit populations, got {len(self.values)}")
            return explicit_populations(self.values)
        if not 0 <= self.index < sol.dim:
            raise ConfigError(f"state index {self.index} out of range for dimension {sol.dim}")
        return diagonal_populations(sol, np.eye(sol.dim)[self.index])

    def to_dict(self) -> dict:
        if self.source == "floquet_gibbs":
            return {"source": self.source, "beta": self.beta}
        if self.source == "explicit":
            return {"source": self.source, "values": list(self.values)}
        return {"source": self.source, "index": self.index}


@dataclass(frozen=True)
class RunConfig:
    model: dict
    omega: float = 1.0
    solver: SolverConfig = field(default_factory=SolverConfig)
    response: ResponseConfig = field(default_factory=ResponseConfig)
    harmonics: int = DEFAULT_HARMONICS
    populations: PopulationSource = field(default_factory=PopulationSource)
    drive: Grid | None = None
    probe: Grid = field(default_factory=lambda: Grid(-0.5, 0.5, 201))
    outputs: tuple[str, ...] = ("quasienergies",)
    dark_threshold: float = DARK_RATIO
    n_range: int = 10
    base_dir: str = "."

    def __post_init__(self):
        if not self.omega > 0:
            raise ConfigError("omega must be positive")
        unknown = [o for o in self.outputs if o not in OUTPUTS]
        if unknown:
            raise ConfigError(f"unknown outputs {unknown}; choose from {OUTPUTS}")
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if ("builtin" in self.model) == ("path" in self.model):
            raise ConfigError("model needs exactly one of 'builtin' or 'path'")
        if "builtin" in self.model and self.model["builtin"] not in BUILTIN_MODELS:
            raise ConfigError(f"unknown builtin model {self.model['builtin']!r}")
        if self.n_range < 0:
            raise ConfigError("n_range must be non-negative")
        need = max(abs(b) for b in self.response.bands) + self.response.m_cutoff
        if need > self.harmonics:
            raise ConfigError(
                f"max|band| + m_cutoff = {need} exceeds the dipole harmonic cutoff {self.harmonics}"
            )
        if self.n_range > self.harmonics:
            raise ConfigError(f"n_range {self.n_range} exceeds harmonics {self.harmonics}")

    # -- model construction ----------------------------------------------------

    def drive_values(self) -> np.ndarray:
        if self.drive is not None:
            return self.drive.values()
        if "builtin" in self.model:
            defaults = BUILTIN_MODELS[self.model["builtin"]][1]
            return np.array([self.model.get("params", {}).get("f_drive", defaults["f_drive"])])
        return np.array([1.0])

    def bundle(self, f_drive: float) -> ModelBundle:
        """The model at one drive amplitude of the sweep."""
        try:
            if "builtin" in self.model:
                params = {**self.model.get("params", {}), "f_drive": float(f_drive)}
                return build_model(self.model["builtin"], omega=self.omega, **params)
            path = Path(self.base_dir) / self.model["path"]
            base = load_custom(path)
        except (ModelParseError, ModelValidationError, OSError) as exc:
            raise ConfigError(f"model: {exc}") from None
        h = base.hamiltonian
        comps = {k: (m if k == 0 else f_drive * m) for k, m in h.fourier_components.items()}
        return ModelBundle(
            PeriodicHamiltonian(h.dim, h.omega, comps),
            base.probe,
            base.symmetries,
            base.basis_labels,
        )

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        resp = asdict(self.response)
        resp["bands"] = list(resp["bands"])
        resp["harmonics"] = self.harmonics
        resp["populations"] = self.populations.to_dict()
        sweep = {"probe": asdict(self.probe)}
        if self.drive is not None:
            sweep["drive"] = asdict(self.drive)
        return {
            "model": self.model,
            "omega": self.omega,
            "solver": asdict(self.solver),
            "response": resp,
            "sweep": sweep,
            "outputs": list(self.outputs),
            "dark_threshold": self.dark_threshold,
            "n_range": self.n_range,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict, base_dir: str = ".") -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        allowed = {"model", "omega", "solver", "response", "sweep", "outputs",
                   "dark_threshold", "n_range"}
        extra = set(doc) - allowed
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        if "model" not in doc or not isinstance(doc["model"], dict):
            raise ConfigError("model: required object")
        try:
            solver = _build(SolverConfig, doc.get("solver", {}), "solver")
            resp = dict(doc.get("response", {}))
            harmonics = resp.pop("harmonics", DEFAULT_HARMONICS)
            pops = _build(PopulationSource, resp.pop("populations", {}), "response.populations")
            response = _build(ResponseConfig, resp, "response")
            sweep = doc.get("sweep", {})
            extra = set(sweep) - {"drive", "probe"}
            if extra:
                raise ConfigError(f"sweep: unknown keys {sorted(extra)}")
            drive = _build(Grid, sweep["drive"], "sweep.drive") if "drive" in sweep else None
            probe = _build(Grid, sweep["probe"], "sweep.probe") if "probe" in sweep else Grid(-0.5, 0.5, 201)
            return cls(
                model=dict(doc["model"]),
                omega=float(doc.get("omega", 1.0)),
                solver=solver,
                response=response,
                harmonics=int(harmonics),
                populations=pops,
                drive=drive,
                probe=probe,
                outputs=tuple(doc.get("outputs", ("quasienergies",))),
                dark_threshold=float(doc.get("dark_threshold", DARK_RATIO)),
                n_range=int(doc.get("n_range", 10)),
                base_dir=str(base_dir),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    @classmethod
    def loads(cls, text: str, base_dir: str = ".") -> "RunConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON ({exc})") from None
        return cls.from_dict(doc, base_dir)

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        return cls.loads(text, base_dir=str(path.parent))


def _build(kind, doc, where):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name for f in fields(kind)}
    extra = set(doc) - names
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    try:
        return kind(**doc)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
