"""Trapped-ion generation of (superpositions of) two-mode squeezed states.

A qubit couples to two motional modes ``a`` (frequency ``omega_x``) and ``b``
(``omega_y``) through a laser with Lamb-Dicke parameters ``eta_x``, ``eta_y``.
In the interaction picture each tone of detuning ``Delta`` contributes

    (Omega/2) e^{-i Delta t} D_a(i eta_x e^{i omega_x t}) D_b(i eta_y e^{i omega_y t}) sigma_+ + h.c.

and the two tones ``Delta = +-(omega_x + omega_y)`` together reduce to
``H_eff = -chi sigma_x (a b + a^dag b^dag)`` with ``chi = eta_x eta_y Omega / 2``.
Time is measured in units of ``1/omega_x``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .fock import (
    QUBIT_INDEX,
    FockSpace,
    NormDriftError,
    Operator,
    StateVector,
    evolve,
    expm_apply,
    fidelity,
    qubit_ket,
)
from .special import displacement_elements

log = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi


class CutoffOverflowError(RuntimeError):
    """Population reached the top Fock level of a truncated mode."""


@dataclass(frozen=True)
class IonParams:
    omega_x: float = 1.0
    omega_y: float = 1.2
    Omega: float = 0.05
    eta_x: float = 0.1
    eta_y: float = 0.1
    tones: tuple[int, ...] = (+1, -1)

    def __post_init__(self):
        for name in ("omega_x", "omega_y", "Omega", "eta_x", "eta_y"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        tones = tuple(sorted({int(s) for s in self.tones}, reverse=True))
        if not tones or any(s not in (1, -1) for s in tones):
            raise ValueError(f"tones must be a nonempty subset of {{+1, -1}}, got {self.tones}")
        object.__setattr__(self, "tones", tones)

    @property
    def chi(self) -> float:
        return 0.5 * self.eta_x * self.eta_y * self.Omega

    @property
    def detunings(self) -> np.ndarray:
        return np.array([s * (self.omega_x + self.omega_y) for s in self.tones])

    @property
    def amplitudes(self) -> np.ndarray:
        return np.full(len(self.tones), 0.5 * self.Omega, dtype=complex)

    def lamb_dicke_margin(self, mean_a: float, mean_b: float) -> tuple[float, float]:
        """``eta^2 (2 n + 1)`` per mode; the expansion needs both well below one."""
        return self.eta_x**2 * (2 * mean_a + 1), self.eta_y**2 * (2 * mean_b + 1)


def _real_displacement(eta: float, dim: int) -> np.ndarray:
    return displacement_elements(eta, dim).real.copy()


def h_full(t: float, p: IonParams, spaces: tuple[FockSpace, FockSpace]) -> Operator:
    """Dense two-colour Hamiltonian on qubit x mode a x mode b at time ``t``."""
    da, db = spaces[0].dim, spaces[1].dim
    dispa = displacement_elements(1j * p.eta_x * np.exp(1j * p.omega_x * t), da)
    dispb = displacement_elements(1j * p.eta_y * np.exp(1j * p.omega_y * t), db)
    c = complex(np.sum(p.amplitudes * np.exp(-1j * p.detunings * t)))
    splus = np.zeros((2, 2), dtype=complex)
    splus[QUBIT_INDEX["e"], QUBIT_INDEX["g"]] = 1.0
    term = c * np.kron(splus, np.kron(dispa, dispb))
    return Operator(term + term.conj().T, (2, da, db))


class TwoColourHamiltonian:
    """Structured form of :func:`h_full` that advances states with the RK4 kernel."""

    def __init__(self, p: IonParams, spaces: tuple[FockSpace, FockSpace]):
        self.params = p
        self.dims = (2, spaces[0].dim, spaces[1].dim)
        self.ra = _real_displacement(p.eta_x, spaces[0].dim)
        self.rb = _real_displacement(p.eta_y, spaces[1].dim)
        self._args = (p.omega_x, p.omega_y, HALF_PI, HALF_PI, p.amplitudes, p.detunings)
        self._probe = None

    def __call__(self, t: float) -> Operator:
        return h_full(t, self.params, (FockSpace(self.dims[1] - 1), FockSpace(self.dims[2] - 1)))

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        out = _kernels.apply_h(psi.reshape(self.dims), self.ra, self.rb, *self._args, t)
        return out.ravel()

    def propagate(self, psi: np.ndarray, t0: float, dt: float, nsteps: int) -> np.ndarray:
        out = _kernels.rk4_two_colour(psi.reshape(self.dims), self.ra, self.rb, *self._args, t0, dt, nsteps)
        return out.ravel()

    def hermitian_defect(self, t: float) -> float:
        """``|<x|H y> - <H x|y>|`` for two fixed pseudo-random vectors."""
        if self._probe is None:
            rng = np.random.default_rng(12345)
            n = int(np.prod(self.dims))
            self._probe = [rng.normal(size=n) + 1j * rng.normal(size=n) for _ in range(2)]
            self._probe = [v / np.linalg.norm(v) for v in self._probe]
        x, y = self._probe
        return float(abs(np.vdot(x, self.apply(t, y)) - np.vdot(self.apply(t, x), y)))


def h_eff_sparse(p: IonParams, spaces: tuple[FockSpace, FockSpace]) -> sp.csr_matrix:
    da, db = spaces[0].dim, spaces[1].dim
    a = sp.diags(np.sqrt(np.arange(1, da, dtype=float)), 1)
    b = sp.diags(np.sqrt(np.arange(1, db, dtype=float)), 1)
    ab = sp.kron(a, b)
    sx = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    return (-p.chi * sp.kron(sx, ab + ab.T)).tocsr().astype(complex)


def h_eff(p: IonParams, spaces: tuple[FockSpace, FockSpace]) -> Operator:
    """``-chi sigma_x (a b + a^dag b^dag)``; needs both tones."""
    if set(p.tones) != {1, -1}:
        raise ValueError("the effective Hamiltonian needs both tones")
    da, db = spaces[0].dim, spaces[1].dim
    return Operator(h_eff_sparse(p, spaces).toarray(), (2, da, db))


def initial_state(qubit: str, spaces: tuple[FockSpace, FockSpace]) -> StateVector:
    """``|qubit>|0, 0>`` with qubit in {e, g, +, -}."""
    da, db = spaces[0].dim, spaces[1].dim
    vac = np.zeros(da * db, dtype=complex)
    vac[0] = 1.0
    return StateVector(np.kron(qubit_ket(qubit), vac), (2, da, db))


def evolve_effective(p: IonParams, psi0: StateVector, times) -> np.ndarray:
    """Exact propagation under ``H_eff`` at the given (equally spaced, from 0) times."""
    if set(p.tones) != {1, -1}:
        raise ValueError("the effective Hamiltonian needs both tones")
    spaces = (FockSpace(psi0.dims[1] - 1), FockSpace(psi0.dims[2] - 1))
    h = h_eff_sparse(p, spaces)
    times = np.asarray(times, dtype=float)
    if times.size == 1:
        return expm_apply(-1j * h * times[0], psi0.amplitudes)[None, :]
    return expm_apply(-1j * h, psi0.amplitudes, start=times[0], stop=times[-1], num=times.size, endpoint=True)


def project_qubit(psi: StateVector, outcome: str) -> tuple[StateVector, float]:
    """Project the qubit onto ``outcome`` (g or e); returns the motional state and its probability."""
    if outcome not in QUBIT_INDEX:
        raise ValueError(f"outcome must be 'g' or 'e', got {outcome!r}")
    if len(psi.dims) != 3 or psi.dims[0] != 2:
        raise ValueError("expected a qubit x two-mode state")
    block = psi.tensor[QUBIT_INDEX[outcome]].ravel()
    prob = float(np.vdot(block, block).real)
    if prob < 1e-14:
        raise ValueError(f"outcome {outcome} has zero probability")
    return StateVector(block / math.sqrt(prob), psi.dims[1:]), prob


def _mean_phonons(states: np.ndarray, dims) -> np.ndarray:
    _, da, db = dims
    n_tot = np.add.outer(np.arange(da), np.arange(db)).ravel()
    probs = np.abs(states.reshape(states.shape[0], 2, da * db)) ** 2
    return probs.sum(axis=1) @ n_tot


def _top_population(states: np.ndarray, dims) -> float:
    _, da, db = dims
    t = np.abs(states.reshape(states.shape[0], 2, da, db)) ** 2
    return float(max(t[:, :, -1, :].sum(axis=(1, 2)).max(), t[:, :, :, -1].sum(axis=(1, 2)).max()))


def _sector_overlap(a: np.ndarray, b: np.ndarray, dims, sector: str) -> np.ndarray:
    """Fidelity restricted to the sigma_x eigen-sector ``sector`` (+ or -), renormalised."""
    _, da, db = dims
    ket = qubit_ket(sector).conj()
    pa = np.einsum("q,kqm->km", ket, a.reshape(a.shape[0], 2, da * db))
    pb = np.einsum("q,kqm->km", ket, b.reshape(b.shape[0], 2, da * db))
    na = np.einsum("km,km->k", pa.conj(), pa).real
    nb = np.einsum("km,km->k", pb.conj(), pb).real
    ov = np.abs(np.einsum("km,km->k", pa.conj(), pb)) ** 2
    return ov / np.maximum(na * nb, 1e-300)


@dataclass(frozen=True)
class IonTrajectory:
    times: np.ndarray
    chi_t: np.ndarray
    fidelity: np.ndarray
    fidelity_plus: np.ndarray
    fidelity_minus: np.ndarray
    n_full: np.ndarray
    n_eff: np.ndarray
    norm_drift: float
    top_population: float
    dt: float
    full_states: np.ndarray
    eff_states: np.ndarray
    dims: tuple[int, int, int]


def simulate_comparison(
    p: IonParams,
    chi_t_max: float = 1.0,
    samples: int = 50,
    cutoff: int = 30,
    dt: float | None = None,
    overflow_tol: float = 1e-4,
    drift_tol: float = 1e-8,
) -> IonTrajectory:
    """Run the full and effective Hamiltonians from ``|g>|0,0>`` up to ``chi t = chi_t_max``.

    The default step is ``0.01 / max(omega_x, omega_y)``. With a single tone the
    effective run is skipped and its columns hold NaN.
    """
    spaces = (FockSpace(cutoff), FockSpace(cutoff))
    if dt is None:
        dt = 0.01 / max(p.omega_x, p.omega_y)
    t_final = chi_t_max / p.chi
    psi0 = initial_state("g", spaces)
    ham = TwoColourHamiltonian(p, spaces)
    log.info("ion run: cutoff %d, t_final %.6g, dt %.3g, kernel %s", cutoff, t_final, dt, _kernels.IMPLEMENTATION)
    traj = evolve(ham, psi0, t_final, dt, samples=samples, drift_tol=drift_tol)
    full = traj.states
    top = _top_population(full, psi0.dims)
    if top > overflow_tol:
        raise CutoffOverflowError(
            f"top Fock level holds population {top:.3e} > {overflow_tol:g} at cutoff {cutoff}"
        )
    n_full = _mean_phonons(full, psi0.dims)
    if set(p.tones) == {1, -1}:
        eff = evolve_effective(p, psi0, traj.times)
        top = max(top, _top_population(eff, psi0.dims))
        if top > overflow_tol:
            raise CutoffOverflowError(
                f"top Fock level holds population {top:.3e} > {overflow_tol:g} at cutoff {cutoff}"
            )
        fid = np.abs(np.einsum("km,km->k", eff.conj(), full)) ** 2 / np.einsum("km,km->k", full.conj(), full).real
        fid = np.minimum(fid, 1.0)
        fplus = _sector_overlap(eff, full, psi0.dims, "+")
        fminus = _sector_overlap(eff, full, psi0.dims, "-")
        n_eff = _mean_phonons(eff, psi0.dims)
    else:
        eff = np.full_like(full, np.nan)
        fid = fplus = fminus = n_eff = np.full(full.shape[0], np.nan)
    return IonTrajectory(
        times=traj.times,
        chi_t=traj.times * p.chi,
        fidelity=fid,
        fidelity_plus=fplus,
        fidelity_minus=fminus,
        n_full=n_full,
        n_eff=n_eff,
        norm_drift=traj.norm_drift,
        top_population=top,
        dt=traj.dt,
        full_states=full,
        eff_states=eff,
        dims=psi0.dims,
    )


def projected_ket(states: np.ndarray, dims, index: int, outcome: str) -> tuple[StateVector, float]:
    return project_qubit(StateVector.normalized(states[index], dims), outcome)


__all__ = [
    "CutoffOverflowError",
    "IonParams",
    "IonTrajectory",
    "NormDriftError",
    "TwoColourHamiltonian",
    "evolve_effective",
    "fidelity",
    "h_eff",
    "h_full",
    "initial_state",
    "project_qubit",
    "projected_ket",
    "simulate_comparison",
]
