import functools
import warnings

import numpy as np
import pytest

from floqlab import floquet
from floqlab.floquet import invariant_residuals

UNITARITY_TOL = 1e-10
ORTHONORMALITY_TOL = 1e-8
PERIODICITY_TOL = 1e-8

_original_finalize = floquet._finalize


def check_invariants(sol):
    res = invariant_residuals(sol)
    assert res["unitarity"] < UNITARITY_TOL, res
    assert res["orthonormality"] < ORTHONORMALITY_TOL, res
    assert res["periodicity"] < PERIODICITY_TOL, res
    return res


@functools.wraps(_original_finalize)
def _checked_finalize(*args, **kwargs):
    sol = _original_finalize(*args, **kwargs)
    check_invariants(sol)
    return sol


@pytest.fixture(autouse=True)
def _invariants_on_every_solve(monkeypatch):
    """Every solution produced in-process must satisfy the solver invariants."""
    monkeypatch.setattr(floquet, "_finalize", _checked_finalize)


@pytest.fixture(autouse=True)
def _quiet_cutoff_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


def random_hamiltonian(rng, dim, norm=3.0, omega=1.0):
    """Random single-harmonic Hermitian model with sum_k ||H_k||_2 <= norm."""
    from floqlab.models import PeriodicHamiltonian

    def herm():
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return (a + a.conj().T) / 2

    h0 = herm()
    h1 = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    total = np.linalg.norm(h0, 2) + 2 * np.linalg.norm(h1, 2)
    scale = rng.uniform(0.2, 1.0) * norm / total
    h0, h1 = h0 * scale, h1 * scale
    return PeriodicHamiltonian(dim, omega, {0: h0, 1: h1, -1: h1.conj().T})
