import numpy as np
from hypothesis import HealthCheck, given, settings, strategies as st

from floqlab.dipole import dipole_elements, parseval_residual
from floqlab.floquet import floquet_solve, fold, match_branches
from floqlab.models import PeriodicHamiltonian, ProbeOperator
from floqlab.response import Populations, ResponseConfig, susceptibility
from floqlab.symmetry import SymmetrySpec, compose_cs_trs

from conftest import random_hamiltonian

SETTINGS = settings(max_examples=20, deadline=None,
                    suppress_health_check=[HealthCheck.function_scoped_fixture])
GRID = np.linspace(-0.5, 0.5, 101)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 5)


def random_probe(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return ProbeOperator((a + a.conj().T) / 2)


def random_populations(rng, dim):
    p = rng.uniform(size=dim)
    return Populations(p / p.sum())


def solved(seed, dim):
    rng = np.random.default_rng(seed)
    h = random_hamiltonian(rng, dim)
    sol = floquet_solve(h)
    probe = random_probe(rng, dim)
    return rng, h, sol, probe, dipole_elements(sol, probe, 20)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e3, 1e3, allow_nan=False), st.floats(0.1, 10.0))
def test_fold_lands_in_zone_and_is_congruent(e, omega):
    f = fold(e, omega)
    assert -omega / 2 <= f < omega / 2
    k = (e - f) / omega
    assert abs(k - round(k)) < 1e-9
    assert fold(f, omega) == f


@SETTINGS
@given(seeds, dims)
def test_dipole_structural_identities(seed, dim):
    _, _, sol, probe, ds = solved(seed, dim)
    assert ds.conjugation_residual() < 1e-10
    assert parseval_residual(ds, sol, probe) < 1e-8


@SETTINGS
@given(seeds, dims, st.floats(0.1, 5.0))
def test_response_scaling_and_equal_populations(seed, dim, lam):
    rng, _, sol, _, ds = solved(seed, dim)
    pops = random_populations(rng, dim)
    one = susceptibility(ds, sol, pops, ResponseConfig(lam=1.0), 0, GRID).chi
    scaled = susceptibility(ds, sol, pops, ResponseConfig(lam=lam), 0, GRID).chi
    assert np.allclose(scaled, lam**2 * one, rtol=1e-12, atol=0)
    flat = Populations(np.full(dim, 1.0 / dim))
    assert not np.any(susceptibility(ds, sol, flat, ResponseConfig(), 1, GRID).chi)


@SETTINGS
@given(seeds, dims, st.floats(0.0, 1.0))
def test_susceptibility_is_linear_in_populations(seed, dim, a):
    rng, _, sol, _, ds = solved(seed, dim)
    p, q = random_populations(rng, dim), random_populations(rng, dim)
    mix = Populations(a * p.values + (1 - a) * q.values)
    cfg = ResponseConfig()
    chi = lambda pops: susceptibility(ds, sol, pops, cfg, 0, GRID).chi
    assert np.allclose(chi(mix), a * chi(p) + (1 - a) * chi(q), rtol=1e-9, atol=1e-9 * np.max(np.abs(chi(p))))


@SETTINGS
@given(seeds, dims, st.floats(-2.0, 2.0))
def test_energy_offset_shifts_quasienergies(seed, dim, c):
    rng = np.random.default_rng(seed)
    h = random_hamiltonian(rng, dim)
    comps = dict(h.fourier_components)
    comps[0] = comps[0] + c * np.eye(dim)
    a = floquet_solve(h).quasienergies
    b = floquet_solve(PeriodicHamiltonian(dim, 1.0, comps)).quasienergies
    shifted = np.sort(fold(a + c, 1.0))
    d = np.abs(fold(shifted[:, None] - b[None, :], 1.0))
    assert np.max(np.min(d, axis=1)) < 1e-8


@SETTINGS
@given(seeds, dims, st.randoms(use_true_random=False))
def test_branch_matching_recovers_permutations(seed, dim, rnd):
    rng = np.random.default_rng(seed)
    sol = floquet_solve(random_hamiltonian(rng, dim))
    perm = list(range(dim))
    rnd.shuffle(perm)
    shuffled = sol.reorder(np.array(perm))
    m = match_branches(sol, shuffled)
    assert not m.discontinuous
    assert np.allclose(shuffled.reorder(m.permutation).quasienergies, sol.quasienergies)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 0.999), st.floats(0.0, 0.999))
def test_composed_time_shift(t_c, t_t):
    out = compose_cs_trs(SymmetrySpec("CS", np.diag([1.0, -1.0]), t_c),
                         SymmetrySpec("TRS", np.eye(2), t_t))
    assert out.spec.kind == "PHS"
    d = out.spec.t_shift_over_tau - (t_t - t_c)
    assert abs(d - round(d)) < 1e-12
    assert 0 <= out.spec.t_shift_over_tau < 1
