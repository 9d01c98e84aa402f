"""Truncated Fock-space kernel: states, operators, partial trace, displacement
and a fixed-step RK4 integrator for the time-dependent Schrodinger equation.

Qubit convention: index 0 is the excited state ``|e>`` and index 1 the ground
state ``|g>``, so ``sigma_z = diag(1, -1)`` and ``sigma_+ = |e><g|``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .special import displacement_elements

log = logging.getLogger(__name__)

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
DRIFT_TOL = 1e-8


class TruncationWarning(UserWarning):
    """The Fock cutoff is too small for the requested operation."""


class CutoffError(ValueError):
    """A state cannot be represented within the requested cutoff."""


class NormDriftError(RuntimeError):
    """Integrated state drifted away from unit norm."""


class NonHermitianError(ValueError):
    """A Hamiltonian sample failed the Hermiticity check."""


def choose_cutoff(ratio: float, tail_tol: float = 1e-10, min_cutoff: int = 1) -> int:
    """Smallest N with geometric tail ``ratio**(N+1) < tail_tol``.

    ``ratio**(N+1)`` is exactly the population above N of a thermal state with
    Boltzmann ratio ``ratio``.
    """
    if not 0.0 <= ratio < 1.0:
        raise ValueError(f"geometric ratio must lie in [0, 1), got {ratio}")
    if ratio == 0.0:
        return min_cutoff
    n = math.ceil(math.log(tail_tol) / math.log(ratio)) - 1
    while ratio ** (n + 1) >= tail_tol:
        n += 1
    return max(min_cutoff, n)


@dataclass(frozen=True)
class FockSpace:
    """One bosonic mode truncated at Fock level ``cutoff`` (dimension cutoff+1)."""

    cutoff: int
    tail_tol: float = 1e-10

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError(f"cutoff must be an integer >= 1, got {self.cutoff}")
        if not 0.0 < self.tail_tol < 1.0:
            raise ValueError(f"tail_tol must lie in (0, 1), got {self.tail_tol}")

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    @classmethod
    def for_ratio(cls, ratio: float, tail_tol: float = 1e-10, min_cutoff: int = 1) -> "FockSpace":
        return cls(choose_cutoff(ratio, tail_tol, min_cutoff), tail_tol)


def _dims(dims) -> tuple[int, ...]:
    return tuple(int(d) for d in dims)


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", _dims(self.dims))
        if amps.size != int(np.prod(self.dims)):
            raise ValueError(f"{amps.size} amplitudes do not fit dims {self.dims}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalised: |psi|^2 = {norm2!r}")

    @classmethod
    def normalized(cls, amplitudes, dims) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise ValueError("cannot normalise the zero vector")
        return cls(amps / norm, dims)

    @classmethod
    def basis(cls, dims, *index) -> "StateVector":
        dims = _dims(dims)
        amps = np.zeros(int(np.prod(dims)), dtype=complex)
        amps[np.ravel_multi_index(index, dims)] = 1.0
        return cls(amps, dims)

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    dims: tuple[int, ...]
    check: bool = field(default=True, repr=False, compare=False)

    # eigenvalue check is skipped above this dimension
    _PSD_CHECK_MAX_DIM = 1024

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "dims", _dims(self.dims))
        d = int(np.prod(self.dims))
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {self.dims}")
        if not self.check:
            return
        if np.abs(mat - mat.conj().T).max() > NORM_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        if d <= self._PSD_CHECK_MAX_DIM:
            lowest = np.linalg.eigvalsh(mat)[0]
            if lowest < -1e-10:
                raise ValueError(f"density matrix has negative eigenvalue {lowest:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def populations(self) -> np.ndarray:
        return np.diag(self.matrix).real.copy()


@dataclass(frozen=True)
class Operator:
    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", _dims(self.dims))
        d = int(np.prod(self.dims))
        if self.matrix.shape != (d, d):
            raise ValueError(f"operator shape {self.matrix.shape} does not match dims {self.dims}")

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.dims)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            if other.dims != self.dims:
                raise ValueError("operator dims differ")
            return Operator(self.matrix @ other.matrix, self.dims)
        if isinstance(other, StateVector):
            return self.matrix @ other.amplitudes
        return self.matrix @ other

    def __add__(self, other: "Operator") -> "Operator":
        if other.dims != self.dims:
            raise ValueError("operator dims differ")
        return Operator(self.matrix + other.matrix, self.dims)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.matrix * scalar, self.dims)

    __rmul__ = __mul__

    def hermitian_defect(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        if sp.issparse(diff):
            return float(abs(diff).max()) if diff.nnz else 0.0
        return float(np.abs(diff).max())


def destroy(space: FockSpace) -> Operator:
    """Annihilation operator ``<n-1|a|n> = sqrt(n)``."""
    return Operator(np.diag(np.sqrt(np.arange(1, space.dim, dtype=float)), 1).astype(complex), (space.dim,))


def create(space: FockSpace) -> Operator:
    return destroy(space).dag()


def number(space: FockSpace) -> Operator:
    return Operator(np.diag(np.arange(space.dim, dtype=float)).astype(complex), (space.dim,))


def identity(dim: int) -> Operator:
    return Operator(np.eye(dim, dtype=complex), (dim,))


def parity(space: FockSpace) -> Operator:
    return Operator(np.diag((-1.0) ** np.arange(space.dim)).astype(complex), (space.dim,))


def sigma_plus() -> Operator:
    return Operator(np.array([[0, 1], [0, 0]], dtype=complex), (2,))


def sigma_minus() -> Operator:
    return sigma_plus().dag()


def sigma_x() -> Operator:
    return Operator(np.array([[0, 1], [1, 0]], dtype=complex), (2,))


def sigma_z() -> Operator:
    return Operator(np.array([[1, 0], [0, -1]], dtype=complex), (2,))


QUBIT_INDEX = {"e": 0, "g": 1}


def qubit_ket(label: str) -> np.ndarray:
    """``|e>``, ``|g>``, ``|+>`` or ``|->`` with ``|+-> = (|g> +- |e>)/sqrt(2)``."""
    e = np.array([1, 0], dtype=complex)
    g = np.array([0, 1], dtype=complex)
    kets = {"e": e, "g": g, "+": (g + e) / np.sqrt(2), "-": (g - e) / np.sqrt(2)}
    return kets[label]


def tensor(*ops: Operator) -> Operator:
    """Kronecker product in the given order; dims are concatenated."""
    if len(ops) == 1 and isinstance(ops[0], (list, tuple)):
        ops = tuple(ops[0])
    matrix = reduce(np.kron, [op.matrix for op in ops])
    dims = sum((op.dims for op in ops), ())
    return Operator(matrix, dims)


def tensor_states(*states: StateVector) -> StateVector:
    amps = reduce(np.kron, [s.amplitudes for s in states])
    return StateVector.normalized(amps, sum((s.dims for s in states), ()))


def partial_trace(state, keep: int) -> DensityMatrix:
    """Reduced density matrix of factor ``keep`` (all other factors traced out)."""
    dims = state.dims
    if len(dims) < 2:
        raise ValueError("partial trace needs at least two factors")
    if not 0 <= keep < len(dims):
        raise IndexError(f"factor index {keep} out of range for dims {dims}")
    if isinstance(state, StateVector):
        t = np.moveaxis(state.tensor, keep, 0).reshape(dims[keep], -1)
        rho = t @ t.conj().T
    else:
        n = len(dims)
        t = state.matrix.reshape(dims + dims)
        t = np.moveaxis(t, (keep, n + keep), (0, n))
        rest = int(np.prod(dims)) // dims[keep]
        t = t.reshape(dims[keep], rest, dims[keep], rest)
        rho = np.einsum("ajbj->ab", t)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho, (dims[keep],))


def expect(op, state) -> complex:
    mat = op.matrix if isinstance(op, Operator) else op
    if isinstance(state, StateVector):
        return complex(np.vdot(state.amplitudes, mat @ state.amplitudes))
    return complex(np.trace(mat @ state.matrix))


def fidelity(psi: StateVector, phi: StateVector) -> float:
    """``|<psi|phi>|^2`` for pure states on the same space."""
    if psi.dims != phi.dims:
        raise ValueError(f"dims differ: {psi.dims} vs {phi.dims}")
    return float(min(1.0, abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2))


def unitarity_defect(op: Operator | np.ndarray, block: int | None = None) -> float:
    """``max |U^dagger U - I|`` over the leading ``block`` levels (all if None)."""
    mat = op.matrix if isinstance(op, Operator) else op
    d = mat.shape[0] if block is None else block
    gram = mat[:, :d].conj().T @ mat[:, :d]
    return float(np.abs(gram - np.eye(d)).max())


def displacement(alpha: complex, space: FockSpace, warn: bool = True) -> Operator:
    """``D(alpha) = exp(alpha a^dagger - alpha^* a)`` from closed-form elements.

    The truncated matrix cannot be unitary on its top levels, so unitarity is
    judged on the lower half of the space; a defect there above 1e-8 means the
    cutoff is too small for ``|alpha|`` and raises a TruncationWarning.
    """
    mat = displacement_elements(alpha, space.dim)
    if warn and alpha != 0:
        defect = unitarity_defect(mat, max(1, space.dim // 2))
        if defect > 1e-8:
            warnings.warn(
                f"truncation too small for |alpha|={abs(alpha):.3g} at cutoff {space.cutoff}: "
                f"unitarity defect {defect:.2e} on the lower half of the space",
                TruncationWarning,
                stacklevel=2,
            )
    return Operator(mat, (space.dim,))


@dataclass(frozen=True)
class Trajectory:
    """States sampled at ``times`` by :func:`evolve`."""

    times: np.ndarray
    states: np.ndarray
    dims: tuple[int, ...]
    dt: float
    norm_drift: float

    def state(self, i: int) -> StateVector:
        return StateVector.normalized(self.states[i], self.dims)


def _matrix_of(h):
    if isinstance(h, Operator):
        return h.matrix
    return h


def rk4_step(apply_h: Callable[[float, np.ndarray], np.ndarray], t: float, psi: np.ndarray, dt: float):
    """One classical RK4 step of ``dpsi/dt = -i H(t) psi``."""
    k1 = -1j * apply_h(t, psi)
    k2 = -1j * apply_h(t + 0.5 * dt, psi + 0.5 * dt * k1)
    k3 = -1j * apply_h(t + 0.5 * dt, psi + 0.5 * dt * k2)
    k4 = -1j * apply_h(t + dt, psi + dt * k3)
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve(
    hamiltonian,
    psi0: StateVector,
    t_final: float,
    dt: float,
    samples: int = 1,
    renormalize: bool = False,
    drift_tol: float = DRIFT_TOL,
) -> Trajectory:
    """Integrate the Schrodinger equation with fixed-step RK4.

    ``hamiltonian`` is either a callable ``t -> Operator | ndarray | sparse``
    or an object exposing ``propagate(psi, t0, dt, nsteps)`` and
    ``hermitian_defect(t)`` (a structured Hamiltonian with its own kernel).
    The state is recorded at ``samples + 1`` equally spaced times; the step is
    shrunk so every sample time falls on the step grid.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    samples = max(1, int(samples))
    span = t_final / samples
    steps_per = max(1, math.ceil(span / dt - 1e-9)) if t_final > 0 else 0
    h = span / steps_per if steps_per else 0.0

    structured = hasattr(hamiltonian, "propagate")

    def check_hermitian(t):
        if structured:
            defect = hamiltonian.hermitian_defect(t)
        else:
            mat = _matrix_of(hamiltonian(t))
            diff = mat - mat.conj().T
            defect = float(abs(diff).max()) if sp.issparse(diff) else float(np.abs(diff).max())
        if defect > HERMITIAN_TOL:
            raise NonHermitianError(f"Hamiltonian at t={t:g} has Hermiticity defect {defect:.2e}")

    if structured:
        def advance(psi, t0):
            return hamiltonian.propagate(psi, t0, h, steps_per)
    else:
        def apply_h(t, psi):
            return _matrix_of(hamiltonian(t)) @ psi

        def advance(psi, t0):
            t = t0
            for _ in range(steps_per):
                psi = rk4_step(apply_h, t, psi, h)
                t += h
            return psi

    psi = psi0.amplitudes.copy()
    times = np.arange(samples + 1) * span
    out = np.empty((samples + 1, psi.size), dtype=complex)
    out[0] = psi
    worst = 0.0
    check_hermitian(0.0)
    for k in range(1, samples + 1):
        if steps_per:
            psi = advance(psi, times[k - 1])
        drift = abs(float(np.vdot(psi, psi).real) - 1.0)
        log.debug("t=%.6g norm drift %.3e", times[k], drift)
        worst = max(worst, drift)
        if drift > drift_tol:
            raise NormDriftError(f"norm drift {drift:.3e} at t={times[k]:g} exceeds {drift_tol:g}")
        if renormalize:
            psi = psi / np.linalg.norm(psi)
        check_hermitian(times[k])
        out[k] = psi
    return Trajectory(times, out, psi0.dims, h, worst)


def expm_apply(a, v, **kwargs) -> np.ndarray:
    """``expm_multiply`` with reproducible step selection.

    scipy picks its Taylor degree from ``onenormest``, which draws random sign
    vectors from numpy's global state, so the same call can differ in the last
    bit from run to run. The global state is pinned for the call and restored.
    """
    state = np.random.get_state()
    np.random.seed(0)
    try:
        return expm_multiply(a, v, **kwargs)
    finally:
        np.random.set_state(state)


def propagate_exact(hamiltonian: Operator, psi0: StateVector, times: Sequence[float]) -> np.ndarray:
    """Propagate under a time-independent Hermitian H by diagonalisation."""
    evals, evecs = np.linalg.eigh(hamiltonian.matrix)
    coeff = evecs.conj().T @ psi0.amplitudes
    times = np.asarray(times, dtype=float)
    return (evecs @ (np.exp(-1j * np.outer(evals, times)) * coeff[:, None])).T
