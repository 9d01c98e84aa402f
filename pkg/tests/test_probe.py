import math

import numpy as np
import pytest

from tmss.fock import FockSpace
from tmss.probe import (
    ProbeParams,
    carrier_unitary,
    detect_displacement,
    fit_affine,
    parity_matched_eta,
    probe,
    probe_scan,
)
from tmss.states import rho_even, rho_odd, space_for
from tmss.stats import displaced_density, wigner_closed

P = ProbeParams()


def vacuum():
    m = np.zeros((1, 1), dtype=complex)
    m[0, 0] = 1.0
    return m


def test_pulse_constants():
    assert abs(P.tau - math.pi / (P.Omega * P.eta_x**2)) < 1e-9
    assert abs(P.phi - (math.pi / (2 * P.eta_x**2) - math.pi / 4)) < 1e-9
    assert abs(P.contrast - 1.0) < 1e-12
    # eta = 0.1 puts Phi at an odd multiple of pi/4 and kills the signal
    assert abs(ProbeParams(eta_x=0.1).contrast) < 1e-12
    assert abs(parity_matched_eta(0.1) - 1 / math.sqrt(100.5)) < 1e-15
    with pytest.raises(ValueError):
        ProbeParams(eta_x=0.0)


@pytest.mark.parametrize("exact", [True, False])
def test_carrier_is_unitary(exact):
    u = carrier_unitary(P, FockSpace(20), exact).matrix
    assert np.abs(u @ u.conj().T - np.eye(u.shape[0])).max() < 1e-12


def test_carrier_rotation_matches_hamiltonian():
    # the number-dependent rotation is exp(-i H_c tau) up to the matched constants
    a = carrier_unitary(P, FockSpace(25), True).matrix
    b = carrier_unitary(P, FockSpace(25), False).matrix
    assert np.abs(a - b).max() < 1e-9


def test_vacuum_readout():
    assert abs(probe(vacuum(), 0j, P).p_eg - 1.0) < 1e-12
    r = 0.9
    far = probe(vacuum(), r, P)
    assert abs(far.p_eg - math.exp(-2 * r * r)) < 1e-10


def test_readout_is_wigner_at_minus_alpha():
    a0 = 0.8 - 0.3j
    shifted = displaced_density(vacuum(), a0)
    hit = probe(shifted, -a0, P)
    assert abs(hit.p_eg - 1.0) < 1e-10
    assert abs(hit.p_eg - math.pi / 2 * hit.wigner_ref) < 1e-10
    miss = probe(shifted, a0, P)
    assert abs(miss.p_eg - math.pi / 2 * miss.wigner_ref) < 1e-10
    assert miss.p_eg < 0.05


@pytest.mark.parametrize("r", [0.5, 1.0, 1.5])
def test_even_peak_odd_dip(r):
    space = space_for(math.tanh(r) ** 2)
    radii = np.linspace(0, 3, 31)
    pe = [x.p_eg for x in probe_scan(rho_even(r, space), radii, P)]
    po = [x.p_eg for x in probe_scan(rho_odd(r, space), radii, P)]
    assert int(np.argmax(pe)) == 0 and abs(pe[0] - 1) < 1e-10
    assert int(np.argmin(po)) == 0 and abs(po[0] + 1) < 1e-10


@pytest.mark.parametrize("fam, build", [("reduced_even", rho_even), ("reduced_odd", rho_odd)])
def test_affine_fit_to_closed_wigner(fam, build):
    r = 1.5
    lam = math.tanh(r) ** 2
    rho = build(r, space_for(lam))
    res = probe_scan(rho, np.linspace(0, 3, 50), P, phase=0.4,
                     wigner=lambda q, p: wigner_closed(fam, lam, q, p))
    fit = fit_affine([x.wigner_ref for x in res], [x.p_eg for x in res])
    assert abs(fit.slope - math.pi / 2) < 1e-6
    assert abs(fit.intercept) < 1e-8
    assert fit.residual < 1e-8


def test_fit_affine_exact_line():
    fit = fit_affine([0, 1, 2], [1, 3, 5])
    assert abs(fit.slope - 2) < 1e-12 and abs(fit.intercept - 1) < 1e-12 and fit.residual < 1e-12


def test_detection_phase_invariant():
    r = 1.0
    rho = rho_even(r, space_for(math.tanh(r) ** 2))
    flags = []
    for k in range(8):
        a = 1.5 * complex(math.cos(k * math.pi / 4), math.sin(k * math.pi / 4))
        det = detect_displacement(rho, a, P)
        flags.append(det.detected)
        assert det.margin > 0
    assert all(flags)
    zero = detect_displacement(rho, 0j, P)
    assert not zero.detected and zero.p_zero == zero.p_alpha


def test_detection_errors():
    rho = rho_even(1.0, space_for(math.tanh(1.0) ** 2))
    with pytest.raises(ValueError, match="no contrast"):
        detect_displacement(rho, 1.0, ProbeParams(eta_x=0.1))
    with pytest.raises(ValueError):
        detect_displacement(rho, 1.0, P, threshold=1.5)
    with pytest.raises(ValueError):
        probe(rho, 1.0, P, shots=100)


def test_even_probe_at_origin_independent_of_r():
    vals = [probe(rho_even(r, space_for(math.tanh(r) ** 2)), 0j, P).p_eg for r in (0.2, 0.7, 1.3)]
    assert np.ptp(vals) < 1e-10


def test_sampled_readout_reproducible():
    rho = rho_even(0.8, space_for(math.tanh(0.8) ** 2))
    a = probe(rho, 0.5, P, shots=2000, rng=np.random.default_rng(7)).p_eg
    b = probe(rho, 0.5, P, shots=2000, rng=np.random.default_rng(7)).p_eg
    exact = probe(rho, 0.5, P).p_eg
    assert a == b
    assert abs(a - exact) < 5 * math.sqrt((1 - exact**2) / 2000) + 1e-3


def test_exact_and_hamiltonian_readouts_agree():
    r = 1.0
    rho = rho_even(r, space_for(math.tanh(r) ** 2))
    for a in (0.0, 0.6, 1.1j, 2.0 - 0.5j):
        assert abs(probe(rho, a, P, exact=True).p_eg - probe(rho, a, P, exact=False).p_eg) < 1e-10
