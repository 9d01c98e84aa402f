"""Photon statistics, Wigner functions and entanglement of the reduced states.

Phase-space convention: a point (q, p) is identified with ``alpha = q + i p``,
so Fock-state Wigner functions depend on ``s^2 = q^2 + p^2 = |alpha|^2`` and
``W`` integrates to one over ``dq dp``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .fock import DensityMatrix, StateVector, TruncationWarning, partial_trace
from .special import displacement_elements, laguerre_weighted_sum
from .states import StateFamily

TWO_OVER_PI = 2.0 / math.pi


def _as_rho(state) -> np.ndarray:
    if isinstance(state, StateVector):
        if len(state.dims) != 1:
            raise ValueError("expected a single-mode state")
        return np.outer(state.amplitudes, state.amplitudes.conj())
    if isinstance(state, DensityMatrix):
        if len(state.dims) != 1:
            raise ValueError("expected a single-mode state")
        return state.matrix
    return np.asarray(state, dtype=complex)


def populations(rho) -> np.ndarray:
    return np.diag(_as_rho(rho)).real.copy()


def mean_n(rho) -> float:
    pops = populations(rho)
    return float(np.dot(np.arange(pops.size), pops))


def purity(rho) -> float:
    m = _as_rho(rho)
    return float(np.vdot(m, m).real)


def g2_numeric(rho) -> float | None:
    """``<a^dag a^dag a a> / <a^dag a>^2`` from the state's moments.

    Returns None for the vacuum, where the ratio is 0/0.
    """
    m = _as_rho(rho)
    d = m.shape[0]
    # embed one level higher so a^2 acting on the top level is not clipped
    a = np.diag(np.sqrt(np.arange(1, d + 1, dtype=float)), 1)
    big = np.zeros((d + 1, d + 1), dtype=complex)
    big[:d, :d] = m
    ad = a.T
    n1 = np.trace(ad @ a @ big).real
    if n1 <= 1e-300:
        return None
    n2 = np.trace(ad @ ad @ a @ a @ big).real
    return float(n2 / n1**2)


def g2_closed(family: StateFamily | str, lam: float) -> float | None:
    """Closed-form ``g2(0)`` for the thermal, even, odd and single-mode squeezed states."""
    family = StateFamily(family)
    lam2 = lam * lam
    if family is StateFamily.THERMAL:
        return 2.0 if lam > 0 else None
    if family in (StateFamily.REDUCED_EVEN, StateFamily.EVEN_TMSS):
        return 2.0 + (1.0 - lam2) / (2.0 * lam2) if lam > 0 else None
    if family in (StateFamily.REDUCED_ODD, StateFamily.ODD_TMSS):
        return 2.0 - 2.0 * (1.0 - lam2) / (1.0 + lam2) ** 2
    if family is StateFamily.SMSS:
        return 2.0 + 1.0 / lam if lam > 0 else None
    raise ValueError(f"no closed-form g2 for family {family.value}")


def antibunching_threshold(xtol: float = 1e-14) -> float:
    """lambda_r at which the odd reduced state crosses ``g2 = 1``, by bisection."""
    return bisect(lambda lam: g2_closed(StateFamily.REDUCED_ODD, lam) - 1.0, 1e-6, 0.99, xtol=xtol)


def superbunching_crossing(xtol: float = 1e-14) -> float:
    """lambda_r where the even reduced state and the squeezed vacuum have equal g2."""
    def diff(lam):
        return g2_closed(StateFamily.REDUCED_EVEN, lam) - g2_closed(StateFamily.SMSS, lam)

    return bisect(diff, 1e-3, 0.99, xtol=xtol)


def _number_diagonal(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    off = m - np.diag(np.diag(m))
    if off.size and np.abs(off).max() > tol:
        raise ValueError("state is not diagonal in the number basis; use wigner_parity")
    return np.diag(m).real


def fock_wigner_sum(pops, q, p) -> np.ndarray:
    """``sum_n P_n (2/pi) (-1)^n L_n(4 s^2) e^{-2 s^2}`` evaluated on (q, p)."""
    pops = np.asarray(pops, dtype=float)
    s2 = np.asarray(q, dtype=float) ** 2 + np.asarray(p, dtype=float) ** 2
    signs = (-1.0) ** np.arange(pops.size)
    return TWO_OVER_PI * np.exp(-2.0 * s2) * laguerre_weighted_sum(pops * signs, 4.0 * s2)


def wigner_generic(rho, q, p) -> np.ndarray:
    """Wigner function of a number-diagonal single-mode state by the Fock-state sum."""
    return fock_wigner_sum(_number_diagonal(_as_rho(rho)), q, p)


def wigner_closed(family: StateFamily | str, lam: float, q, p) -> np.ndarray:
    """Gaussian closed forms for the thermal, even and odd reduced states."""
    family = StateFamily(family)
    s2 = np.asarray(q, dtype=float) ** 2 + np.asarray(p, dtype=float) ** 2
    narrow = (1.0 - lam) / (1.0 + lam)
    if family is StateFamily.THERMAL:
        return TWO_OVER_PI * narrow * np.exp(-2.0 * narrow * s2)
    if family is StateFamily.REDUCED_EVEN:
        weight, sign = 1.0 / math.pi, 1.0
    elif family is StateFamily.REDUCED_ODD:
        if lam <= 0.0:
            raise ValueError("odd reduced state needs lambda_r > 0")
        weight, sign = 1.0 / (math.pi * lam), -1.0
    else:
        raise ValueError(f"no closed-form Wigner function for family {family.value}")
    wide = np.exp(-2.0 * narrow * s2)
    # for lam -> 1 the second Gaussian collapses; its exponent diverges to -inf
    sharp = np.exp(-2.0 * s2 / narrow) if lam < 1.0 else np.zeros_like(s2)
    return weight * ((1.0 - lam) * wide + sign * (1.0 + lam) * sharp)


def _displaced_columns(alpha: complex, pops_weight: np.ndarray, tol: float = 1e-13, max_dim: int = 6000):
    """Rows of D(alpha) for the state's columns, padded until leakage is negligible."""
    n_state = pops_weight.size
    pad_dim = int(math.ceil((math.sqrt(n_state) + abs(alpha) + 6.0) ** 2)) + 10
    pad_dim = max(pad_dim, n_state + 10)
    while True:
        d = displacement_elements(alpha, pad_dim, n_state)
        leak = 1.0 - np.sum(np.abs(d) ** 2, axis=0)
        if float(np.dot(pops_weight, np.abs(leak))) < tol:
            return d
        if pad_dim >= max_dim:
            warnings.warn(
                f"displaced state still leaks {np.dot(pops_weight, np.abs(leak)):.2e} at dimension {pad_dim}",
                TruncationWarning,
                stacklevel=3,
            )
            return d
        pad_dim = min(max_dim, int(pad_dim * 1.4))


def displaced_density(rho, alpha: complex) -> np.ndarray:
    """``D(alpha) rho D(alpha)^dagger`` on a padded space large enough to hold it."""
    m = _as_rho(rho)
    d = _displaced_columns(alpha, np.abs(np.diag(m)))
    return d @ m @ d.conj().T


def wigner_parity(rho, alpha: complex) -> float:
    """``(2/pi) Tr[D(-alpha) rho D(alpha) Pi]`` with parity ``Pi = (-1)^n``."""
    m = _as_rho(rho)
    d = _displaced_columns(-alpha, np.abs(np.diag(m)))
    diag = np.einsum("km,km->k", d @ m, d.conj()).real
    signs = (-1.0) ** np.arange(diag.size)
    return float(TWO_OVER_PI * np.dot(signs, diag))


def quadrature_variances(rho) -> tuple[float, float]:
    """``Var(q)`` and ``Var(p)`` for ``q = a + a^dag`` and ``p = i(a^dag - a)``."""
    m = _as_rho(rho)
    d = m.shape[0]
    a = np.diag(np.sqrt(np.arange(1, d + 1, dtype=float)), 1).astype(complex)
    big = np.zeros((d + 1, d + 1), dtype=complex)
    big[:d, :d] = m
    q = a + a.T
    p = 1j * (a.T - a)
    out = []
    for op in (q, p):
        mean = np.trace(op @ big).real
        out.append(float(np.trace(op @ op @ big).real - mean**2))
    return out[0], out[1]


@dataclass(frozen=True)
class StatsReport:
    populations: np.ndarray
    mean_n: float
    g2: float | None
    purity: float


def stats_report(rho) -> StatsReport:
    pops = populations(rho)
    if abs(pops.sum() - 1.0) > 1e-10:
        raise ValueError(f"populations sum to {pops.sum()!r}")
    return StatsReport(pops, mean_n(rho), g2_numeric(rho), purity(rho))


def linear_entropy(rho) -> float:
    """``1 - Tr(rho^2)`` (infinite-dimensional normalisation)."""
    return 1.0 - purity(rho)


def entanglement_numeric(psi) -> float:
    """Linear entropy of one mode of a pure two-mode state."""
    if isinstance(psi, DensityMatrix):
        if abs(purity(psi.matrix) - 1.0) > 1e-10:
            raise ValueError("entanglement_numeric needs a pure state")
        vals, vecs = np.linalg.eigh(psi.matrix)
        psi = StateVector.normalized(vecs[:, -1], psi.dims)
    if len(psi.dims) != 2:
        raise ValueError("expected a two-mode state")
    return linear_entropy(partial_trace(psi, 0).matrix)


def e_tmss(lam: float) -> float:
    return 1.0 - (1.0 - lam) / (1.0 + lam)


def e_phi(lam: float, eps: float) -> float | None:
    """Linear entropy of the plus-sign superposition; None where the state vanishes."""
    lam, eps = float(lam), float(eps)
    lam2 = lam * lam
    num = (1.0 + eps) ** 2 + lam2 * (1.0 - eps) ** 2
    den = ((1.0 + eps) + lam * (1.0 - eps)) ** 2
    if den == 0.0:
        return None
    return 1.0 - (1.0 - lam2) / (1.0 + lam2) * num / den


def e_even_odd(lam: float) -> float:
    return 2.0 * lam * lam / (1.0 + lam * lam)


def entanglement_boundary(eps: float) -> float | None:
    """lambda_r where the superposition's entanglement equals the TMSS value.

    None when the crossing lies outside ``(0, 1)``.
    """
    if eps >= 1.0:
        return None
    lam = math.sqrt((1.0 + eps) / (1.0 - eps))
    return lam if 0.0 < lam < 1.0 else None


def odd_projection_stats(lam: float) -> tuple[float, float]:
    """Probability of heralding the odd TMSS and its two-single-photon weight."""
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lambda_r must lie in [0, 1), got {lam}")
    return lam / (1.0 + lam), 1.0 - lam * lam
