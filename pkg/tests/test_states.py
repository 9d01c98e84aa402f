import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import expm_series, two_mode_squeeze_oracle
from tmss.fock import CutoffError, FockSpace, StateVector, fidelity, partial_trace
from tmss.states import (
    DegenerateStateError,
    SqueezeParams,
    StateFamily,
    even_ket,
    make_state,
    odd_ket,
    reduced_rho,
    rho_even,
    rho_odd,
    smss_ket,
    smss_space,
    space_for,
    squeeze_oracle,
    superposition_ket,
    thermal_rho,
    tmss_ket,
)


def pair_diagonal(psi: StateVector) -> np.ndarray:
    d = psi.dims[0]
    return psi.tensor[np.arange(d), np.arange(d)]


def test_squeeze_params_derived():
    p = SqueezeParams(0.5, 7.0, -1.0)
    assert 0 <= p.theta < 2 * math.pi and 0 <= p.phi < 2 * math.pi
    assert abs(p.lam - math.tanh(0.5) ** 2) < 1e-15
    assert abs(p.eps - math.cos(-1.0)) < 1e-15
    assert abs(p.flipped().theta - (p.theta + math.pi) % (2 * math.pi)) < 1e-15
    with pytest.raises(ValueError):
        SqueezeParams(-0.1)
    assert abs(SqueezeParams.from_lambda(0.25).lam - 0.25) < 1e-14


def test_tmss_vacuum_and_ratio():
    vac = tmss_ket(SqueezeParams(0.0), FockSpace(3))
    assert fidelity(vac, StateVector.basis((4, 4), 0, 0)) == 1.0
    p = SqueezeParams(1.5)
    c = pair_diagonal(tmss_ket(p, space_for(p)))
    assert abs(c[1] / c[0] - (-0.90514825)) < 1e-8
    assert c[0].real > 0 and c[0].imag == 0


def test_tmss_mean_phonons():
    p = SqueezeParams(1.0, 0.4)
    pops = np.abs(pair_diagonal(tmss_ket(p, space_for(p, 1e-14)))) ** 2
    assert abs(pops @ np.arange(pops.size) - math.sinh(1.0) ** 2) < 1e-10


def test_cutoff_too_small():
    with pytest.raises(CutoffError):
        tmss_ket(SqueezeParams(1.5), FockSpace(10))


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
@pytest.mark.parametrize("theta", [0.0, math.pi / 3])
def test_tmss_matches_taylor_oracle(r, theta):
    p = SqueezeParams(r, theta)
    space = space_for(p, 1e-12)
    ref = two_mode_squeeze_oracle(p.xi, space.dim)
    ref = StateVector.normalized(ref, (space.dim, space.dim))
    assert 1 - fidelity(tmss_ket(p, space), ref) < 1e-10
    assert np.abs(tmss_ket(p, space).amplitudes - ref.amplitudes).max() < 1e-8


def test_squeeze_oracle_examples():
    vac = squeeze_oracle(SqueezeParams(0.0), FockSpace(3))
    assert abs(vac.amplitudes[0] - 1.0) < 1e-15
    p = SqueezeParams(0.5)
    psi = squeeze_oracle(p, space_for(p))
    pop11 = abs(psi.tensor[1, 1]) ** 2
    assert abs(pop11 - p.lam * (1 - p.lam)) < 1e-10
    assert abs(np.linalg.norm(psi.amplitudes) - 1.0) < 1e-10


def test_superposition_phi_half_pi_is_locally_tmss():
    # c_n (1 +- i (-1)^n) differs from the TMSS by a parity-dependent phase on one
    # mode, so the reduced state is thermal but the kets are not globally equal
    for phi, s in ((math.pi / 2, 1), (3 * math.pi / 2, -1)):
        p = SqueezeParams(0.8, 0.3, phi)
        space = space_for(p)
        psi = superposition_ket(p, +1, space)
        local = np.where(np.arange(space.dim) % 2 == 0, 1.0, 1j * s)
        fixed = StateVector(np.kron(np.diag(local), np.eye(space.dim)) @ psi.amplitudes, psi.dims)
        assert abs(fidelity(fixed, tmss_ket(p, space)) - 1.0) < 1e-10
        assert np.abs(partial_trace(psi, 0).matrix - thermal_rho(0.8, space).matrix).max() < 1e-12


def test_superposition_even_and_odd():
    p = SqueezeParams(0.9, 0.0, 0.0)
    space = space_for(p)
    pops = np.abs(pair_diagonal(superposition_ket(p, +1, space))) ** 2
    assert pops[1::2].max() < 1e-12
    assert abs(fidelity(superposition_ket(p, +1, space), even_ket(p, space)) - 1.0) < 1e-12
    q = SqueezeParams(0.3, 0.0, math.pi)
    space = space_for(q)
    odd = superposition_ket(q, +1, space)
    assert abs(fidelity(odd, odd_ket(q, space)) - 1.0) < 1e-12
    pops = np.abs(pair_diagonal(odd)) ** 2
    assert abs(pops[3] / pops[1] - q.lam**2) < 1e-12


def test_superposition_degenerate():
    with pytest.raises(DegenerateStateError):
        superposition_ket(SqueezeParams(0.0, 0.0, 0.0), -1, FockSpace(2))
    with pytest.raises(DegenerateStateError):
        superposition_ket(SqueezeParams(0.0, 0.0, math.pi), +1, FockSpace(2))
    with pytest.raises(ValueError):
        superposition_ket(SqueezeParams(0.5), 0, FockSpace(30))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 1.2), st.sampled_from([+1, -1]), st.integers(0, 31))
def test_superposition_normalized_on_phi_grid(r, sign, k):
    phi = 2 * math.pi * k / 32
    p = SqueezeParams(r, 0.2, phi)
    psi = superposition_ket(p, sign, space_for(p))
    assert abs(np.linalg.norm(psi.amplitudes) - 1.0) < 1e-10


def test_even_odd_kets():
    even0 = even_ket(SqueezeParams(0.0), FockSpace(2))
    assert fidelity(even0, StateVector.basis((3, 3), 0, 0)) == 1.0
    p = SqueezeParams(0.05)
    space = space_for(p)
    assert fidelity(odd_ket(p, space), StateVector.basis((space.dim,) * 2, 1, 1)) >= 0.9999
    with pytest.raises(DegenerateStateError):
        odd_ket(SqueezeParams(0.0), FockSpace(3))
    q = SqueezeParams(1.0)
    pops = np.abs(pair_diagonal(even_ket(q, space_for(q)))) ** 2
    assert abs(pops[2] / pops[0] - math.tanh(1.0) ** 4) < 1e-12
    assert abs(pops[2] / pops[0] - 0.33643) < 1e-5


def test_reduced_rho_examples():
    p = SqueezeParams(1.2, 0.0, math.pi / 2)
    space = space_for(p)
    assert np.abs(reduced_rho(p, space).matrix - thermal_rho(1.2, space).matrix).max() < 1e-12
    q = SqueezeParams(1.5)
    rho = rho_even(1.5, space_for(q))
    assert abs(rho.matrix[0, 0].real - (1 - q.lam**2)) < 1e-10
    assert abs(rho.matrix[0, 0].real - 0.32876) < 1e-5
    with pytest.raises(DegenerateStateError):
        rho_odd(0.0, FockSpace(3))


def test_reduced_rho_theta_independent():
    a = reduced_rho(SqueezeParams(0.7, 0.0, 1.1), FockSpace(60)).matrix
    b = reduced_rho(SqueezeParams(0.7, 2.0, 1.1), FockSpace(60)).matrix
    assert np.array_equal(a, b)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 1.5])
def test_partial_trace_of_kets_matches_reduced(r):
    p = SqueezeParams(r, 0.4)
    space = space_for(p)
    assert np.abs(partial_trace(even_ket(p, space), 0).matrix - rho_even(r, space).matrix).max() < 1e-10
    assert np.abs(partial_trace(odd_ket(p, space), 1).matrix - rho_odd(r, space).matrix).max() < 1e-10
    assert np.abs(partial_trace(tmss_ket(p, space), 0).matrix - thermal_rho(r, space).matrix).max() < 1e-10


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 1.5])
def test_pseudo_thermal_shift(r):
    lam = math.tanh(r) ** 2
    space = space_for(lam, 1e-14)
    pe = np.diag(rho_even(r, space).matrix).real
    po = np.diag(rho_odd(r, space).matrix).real
    assert np.allclose(po[1::2], pe[0:-1:2], atol=1e-14)
    n = np.arange(pe.size)
    assert abs((po @ n) - (pe @ n) - 1.0) < 1e-10
    assert abs(pe @ n - 2 * lam**2 / (1 - lam**2)) < 1e-10


def test_smss_by_exponential():
    r, theta = 0.6, 0.9
    space = smss_space(r)
    psi = smss_ket(r, theta, space)
    a = np.diag(np.sqrt(np.arange(1, space.dim, dtype=float)), 1)
    z = r * np.exp(1j * theta)
    gen = 0.5 * (np.conj(z) * a @ a - z * a.T @ a.T)
    ref = expm_series(gen)[:, 0]
    assert abs(abs(np.vdot(ref, psi.amplitudes)) ** 2 - 1.0) < 1e-10
    # closed form <2|psi>/<0|psi> = -e^{i theta} tanh(r) / sqrt(2)
    ratio = psi.amplitudes[2] / psi.amplitudes[0]
    assert abs(ratio + np.exp(1j * theta) * math.tanh(r) / math.sqrt(2)) < 1e-10
    pops = np.abs(psi.amplitudes) ** 2
    assert abs(pops @ np.arange(space.dim) - math.sinh(r) ** 2) < 1e-9


def test_make_state_dispatch():
    p = SqueezeParams(0.4, 0.0, 0.3)
    space = space_for(p)
    assert isinstance(make_state(StateFamily.TMSS, p, space), StateVector)
    rho = make_state("reduced_general", p, space)
    assert np.allclose(rho.matrix, reduced_rho(p, space).matrix)
    assert StateFamily.THERMAL.is_mixed and StateFamily.SMSS.n_modes == 1
