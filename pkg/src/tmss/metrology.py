"""Quadrature generators and quantum Fisher information for displacement sensing.

A displacement of size ``y`` along the phase-space direction ``phi_d`` is
generated by the conjugate quadrature ``X(phi_d + pi/2)``, with
``X(phi) = a e^{-i phi} + a^dag e^{i phi}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .fock import DensityMatrix, FockSpace, Operator, StateVector
from .states import (
    StateFamily,
    rho_even,
    rho_odd,
    smss_ket,
    smss_space,
    space_for,
    thermal_rho,
)

EIGEN_FLOOR = 1e-12


@dataclass(frozen=True)
class Generator:
    """Quadrature ``X(angle)``; the matrix is built on demand for a given dimension."""

    angle: float

    def matrix(self, dim: int) -> np.ndarray:
        a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
        ph = complex(math.cos(self.angle), math.sin(self.angle))
        return a * np.conj(ph) + a.T * ph

    def operator(self, space: FockSpace | int) -> Operator:
        dim = space.dim if isinstance(space, FockSpace) else int(space)
        return Operator(self.matrix(dim), (dim,))


def displacement_generator(direction: float) -> Generator:
    """Generator of displacements along ``direction`` in the (q, p) plane."""
    return Generator(direction + 0.5 * math.pi)


def _embed(vec_or_mat: np.ndarray, extra: int) -> np.ndarray:
    # quadratures couple n to n + 1, so the top level must not be clipped
    d = vec_or_mat.shape[0]
    if vec_or_mat.ndim == 1:
        out = np.zeros(d + extra, dtype=complex)
        out[:d] = vec_or_mat
        return out
    out = np.zeros((d + extra, d + extra), dtype=complex)
    out[:d, :d] = vec_or_mat
    return out


def qfi_pure(psi: StateVector | np.ndarray, g: Generator) -> float:
    """``4 (<G^2> - <G>^2)`` for a normalized single-mode ket."""
    amps = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    if abs(np.vdot(amps, amps).real - 1.0) > 1e-10:
        raise ValueError("qfi_pure needs a normalized state")
    v = _embed(amps, 1)
    gv = g.matrix(v.size) @ v
    mean = np.vdot(v, gv).real
    return float(4.0 * (np.vdot(gv, gv).real - mean * mean))


def qfi_mixed(rho: DensityMatrix | np.ndarray, g: Generator, floor: float = EIGEN_FLOOR) -> float:
    """``2 sum_ij (l_i - l_j)^2 / (l_i + l_j) |<i|G|j>|^2`` over pairs with ``l_i + l_j > floor``."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if np.abs(m - m.conj().T).max() > 1e-10:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(m).real - 1.0) > 1e-10:
        raise ValueError("density matrix does not have unit trace")
    big = _embed(m, 1)
    lam, vecs = np.linalg.eigh(big)
    lam = np.clip(lam, 0.0, None)
    gij = vecs.conj().T @ g.matrix(big.shape[0]) @ vecs
    s = lam[:, None] + lam[None, :]
    d = lam[:, None] - lam[None, :]
    keep = s > floor
    terms = np.zeros_like(s)
    terms[keep] = d[keep] ** 2 / s[keep]
    return float(2.0 * np.sum(terms * np.abs(gij) ** 2))


def qfi_diagonal(populations) -> float:
    """``4 (2<n> + 1)``: the QFI of a number-diagonal state on a single parity sector."""
    pops = np.asarray(populations, dtype=float)
    return 4.0 * (2.0 * float(np.dot(np.arange(pops.size), pops)) + 1.0)


def qfi_thermal(lam: float) -> float:
    """``4 (1 - lam) / (1 + lam)`` for the thermal state of ratio ``lam``."""
    return 4.0 * (1.0 - lam) / (1.0 + lam)


def qfi_smss(r: float, misalignment: float = 0.0) -> float:
    """Squeezed vacuum with its antisqueezed axis tilted by ``misalignment`` from the generator."""
    c, s = math.cos(misalignment), math.sin(misalignment)
    return 4.0 * (math.exp(2 * r) * c * c + math.exp(-2 * r) * s * s)


def mean_n_family(family: StateFamily | str, lam: float) -> float:
    """Closed-form mean excitation of the swept families."""
    family = StateFamily(family)
    if family is StateFamily.THERMAL:
        return lam / (1.0 - lam)
    if family is StateFamily.REDUCED_EVEN:
        return 2.0 * lam * lam / (1.0 - lam * lam)
    if family is StateFamily.REDUCED_ODD:
        return (1.0 + lam * lam) / (1.0 - lam * lam)
    if family is StateFamily.SMSS:
        return lam / (1.0 - lam)  # sinh^2 r
    raise ValueError(f"no mean excitation for family {family.value}")


SWEEP_FAMILIES = (StateFamily.THERMAL, StateFamily.REDUCED_EVEN, StateFamily.REDUCED_ODD, StateFamily.SMSS)


@dataclass
class QfiCurve:
    abscissa: str
    samples: dict[str, list[tuple[float, float]]] = field(default_factory=dict)

    def _rows(self, family):
        key = family.value if isinstance(family, StateFamily) else str(family)
        return self.samples[key]

    def xs(self, family) -> np.ndarray:
        return np.array([x for x, _ in self._rows(family)])

    def values(self, family) -> np.ndarray:
        return np.array([f for _, f in self._rows(family)])


def qfi_numeric(family: StateFamily | str, lam: float, direction: float = 0.0,
                misalignments=None, tail_tol: float = 1e-12) -> float:
    """QFI of one family member at ``lam`` from its constructed state.

    For the squeezed vacuum the antisqueezed axis is aligned with the generator;
    ``misalignments`` averages uniformly over the given tilt angles instead.
    """
    family = StateFamily(family)
    g = displacement_generator(direction)
    r = math.atanh(math.sqrt(lam))
    if family is StateFamily.SMSS:
        psi = smss_ket(r, 2.0 * direction, smss_space(r, tail_tol))
        if misalignments is None:
            return qfi_pure(psi, g)
        return float(np.mean([qfi_pure(psi, Generator(g.angle + t)) for t in misalignments]))
    if family is StateFamily.REDUCED_ODD and lam == 0.0:
        # odd reduced state tends to |1> as lam -> 0
        one = np.zeros(3, dtype=complex)
        one[1] = 1.0
        return qfi_mixed(np.outer(one, one), g)
    space = space_for(lam, tail_tol, min_cutoff=2)
    build = {StateFamily.THERMAL: thermal_rho, StateFamily.REDUCED_EVEN: rho_even, StateFamily.REDUCED_ODD: rho_odd}
    if family not in build:
        raise ValueError(f"family {family.value} is not part of the QFI sweep")
    return qfi_mixed(build[family](r, space), g)


def averaging_angles(interval: tuple[float, float], count: int) -> np.ndarray:
    """Midpoint samples of a uniform distribution on ``interval``."""
    lo, hi = interval
    if count < 1:
        raise ValueError("need at least one angle")
    return lo + (hi - lo) * (np.arange(count) + 0.5) / count


def qfi_sweep(families, abscissa: str, grid, direction: float = 0.0, misalignments=None,
              tail_tol: float = 1e-12) -> QfiCurve:
    """QFI curves over a ``lambda_r`` grid, reported against ``lambda_r`` or ``<n>``.

    With ``misalignments`` given, an extra ``smss_avg`` curve holds the
    angle-averaged squeezed-vacuum QFI.
    """
    if abscissa not in ("lambda_r", "mean_n"):
        raise ValueError(f"unknown abscissa {abscissa!r}")
    grid = np.asarray(grid, dtype=float)
    if grid.size and (grid.min() < 0.0 or grid.max() > 0.95):
        raise ValueError("lambda_r grid must lie in [0, 0.95]")
    curve = QfiCurve(abscissa)
    for fam in families:
        fam = StateFamily(fam)
        rows = []
        for lam in grid:
            x = lam if abscissa == "lambda_r" else mean_n_family(fam, lam)
            rows.append((float(x), qfi_numeric(fam, lam, direction, tail_tol=tail_tol)))
        curve.samples[fam.value] = rows
        if fam is StateFamily.SMSS and misalignments is not None:
            curve.samples["smss_avg"] = [
                (x, qfi_numeric(fam, lam, direction, misalignments, tail_tol)) for (x, _), lam in zip(rows, grid)
            ]
    return curve


def odd_smss_crossing() -> float:
    """``lambda_r`` above which the aligned squeezed vacuum overtakes the odd reduced state."""
    def diff(lam):
        return qfi_diagonal_odd(lam) - qfi_smss(math.atanh(math.sqrt(lam)))

    return brentq(diff, 1e-6, 0.9, xtol=1e-14)


def qfi_diagonal_odd(lam: float) -> float:
    return 4.0 * (2.0 * mean_n_family(StateFamily.REDUCED_ODD, lam) + 1.0)
