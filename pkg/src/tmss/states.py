"""Two-mode squeezed states, their superpositions and the reduced single-mode
states, each available in closed form and (for the kets) through an explicit
operator exponential.

Phase conventions: the TMSS keeps the zero-photon amplitude real and positive;
``psi(-xi)`` is realised as ``theta -> theta + pi`` so ``r`` stays non-negative.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fock import CutoffError, DensityMatrix, FockSpace, StateVector, choose_cutoff, expm_apply

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class DegenerateStateError(ValueError):
    """The requested superposition is the zero vector."""


class StateFamily(str, enum.Enum):
    TMSS = "tmss"
    SUPERPOSITION_PLUS = "superposition_plus"
    SUPERPOSITION_MINUS = "superposition_minus"
    EVEN_TMSS = "even_tmss"
    ODD_TMSS = "odd_tmss"
    THERMAL = "thermal"
    REDUCED_GENERAL = "reduced_general"
    REDUCED_EVEN = "reduced_even"
    REDUCED_ODD = "reduced_odd"
    SMSS = "smss"

    @property
    def is_mixed(self) -> bool:
        return self in (
            StateFamily.THERMAL,
            StateFamily.REDUCED_GENERAL,
            StateFamily.REDUCED_EVEN,
            StateFamily.REDUCED_ODD,
        )

    @property
    def n_modes(self) -> int:
        return 1 if self.is_mixed or self is StateFamily.SMSS else 2


@dataclass(frozen=True)
class SqueezeParams:
    """Squeezing magnitude ``r``, squeezing angle ``theta`` and superposition phase ``phi``.

    Angles are reduced into ``[0, 2 pi)``.
    """

    r: float
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not self.r >= 0.0:
            raise ValueError(f"squeezing magnitude must be >= 0, got {self.r}")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)

    @property
    def lam(self) -> float:
        """``tanh(r)**2``, the geometric ratio of every population law."""
        return math.tanh(self.r) ** 2

    @property
    def eps(self) -> float:
        return math.cos(self.phi)

    @property
    def xi(self) -> complex:
        return self.r * complex(math.cos(self.theta), math.sin(self.theta))

    def flipped(self) -> "SqueezeParams":
        """Parameters of ``psi(-xi)``."""
        return SqueezeParams(self.r, self.theta + math.pi, self.phi)

    @classmethod
    def from_lambda(cls, lam: float, theta: float = 0.0, phi: float = 0.0) -> "SqueezeParams":
        if not 0.0 <= lam < 1.0:
            raise ValueError(f"lambda_r must lie in [0, 1), got {lam}")
        return cls(math.atanh(math.sqrt(lam)), theta, phi)


def space_for(p: SqueezeParams | float, tail_tol: float = 1e-10, min_cutoff: int = 1) -> FockSpace:
    """Fock space whose thermal tail ``lambda_r**(N+1)`` is below ``tail_tol``."""
    lam = p.lam if isinstance(p, SqueezeParams) else float(p)
    return FockSpace.for_ratio(lam, tail_tol, min_cutoff)


def tmss_tail(lam: float, cutoff: int) -> float:
    """Population of a thermal/TMSS distribution above ``cutoff``."""
    return lam ** (cutoff + 1)


def _check_cutoff(lam: float, space: FockSpace) -> float:
    tail = tmss_tail(lam, space.cutoff)
    if tail > space.tail_tol:
        need = choose_cutoff(lam, space.tail_tol)
        raise CutoffError(
            f"cutoff {space.cutoff} too small for lambda_r={lam:.6g}: tail {tail:.2e} > "
            f"{space.tail_tol:.1e} (need cutoff >= {need})"
        )
    return tail


def _diag_ket(coeffs: np.ndarray, space: FockSpace) -> StateVector:
    """Two-mode ket with ``coeffs[n]`` on ``|n, n>``, renormalised over the truncation."""
    d = space.dim
    amps = np.zeros((d, d), dtype=complex)
    amps[np.arange(d), np.arange(d)] = coeffs
    norm2 = float(np.sum(np.abs(coeffs) ** 2))
    if norm2 == 0.0:
        raise DegenerateStateError("state has no weight inside the truncation")
    log.debug("discarded tail mass %.3e", max(0.0, 1.0 - norm2))
    return StateVector(amps.ravel() / math.sqrt(norm2), (d, d))


def tmss_coefficients(p: SqueezeParams, cutoff: int) -> np.ndarray:
    """``c_n = (-e^{i theta} tanh r)^n / cosh r`` for n = 0..cutoff (not renormalised)."""
    n = np.arange(cutoff + 1)
    z = -complex(math.cos(p.theta), math.sin(p.theta)) * math.tanh(p.r)
    return z**n / math.cosh(p.r)


def tmss_ket(p: SqueezeParams, space: FockSpace) -> StateVector:
    _check_cutoff(p.lam, space)
    return _diag_ket(tmss_coefficients(p, space.cutoff), space)


def _two_mode_generator(xi: complex, space: FockSpace) -> sp.csr_matrix:
    """Sparse ``xi^* a b - xi a^dag b^dag`` on the truncated two-mode space."""
    a = sp.diags(np.sqrt(np.arange(1, space.dim, dtype=float)), 1, format="csr")
    ab = sp.kron(a, a, format="csr")
    return (np.conj(xi) * ab - xi * ab.T).tocsr()


def squeeze_vector(p: SqueezeParams, space: FockSpace, pad: int | None = None) -> np.ndarray:
    """Raw ``exp(xi^* ab - xi a^dag b^dag)|0,0>`` restricted to ``space``, not renormalised.

    The exponential is taken on a space ``pad`` levels larger (default half the
    dimension, at least 10): truncating the generator itself would distort the
    top levels that are kept.
    """
    _check_cutoff(p.lam, space)
    d = space.dim
    if p.r == 0.0:
        vac = np.zeros(d * d, dtype=complex)
        vac[0] = 1.0
        return vac
    pad = max(10, d // 2) if pad is None else int(pad)
    big = FockSpace(space.cutoff + pad, space.tail_tol)
    vac = np.zeros(big.dim**2, dtype=complex)
    vac[0] = 1.0
    out = expm_apply(_two_mode_generator(p.xi, big), vac)
    return out.reshape(big.dim, big.dim)[:d, :d].ravel()


def squeeze_oracle(p: SqueezeParams, space: FockSpace) -> StateVector:
    """TMSS built by exponentiating the two-mode squeeze generator on vacuum."""
    return StateVector.normalized(squeeze_vector(p, space), (space.dim, space.dim))


def superposition_norm2(lam: float, eps: float, sign: int) -> float:
    """Closed-form ``|N_pm|^2``."""
    denom = (1.0 + lam) + sign * eps * (1.0 - lam)
    if denom <= 1e-14:
        raise DegenerateStateError("superposition is the zero vector for these parameters")
    return 0.5 * (1.0 + lam) / denom


def _sign(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError(f"sign must be + or -, got {sign!r}")


def superposition_ket(p: SqueezeParams, sign, space: FockSpace) -> StateVector:
    """``N_pm (|psi(xi)> pm e^{i phi} |psi(-xi)>)`` with real positive ``N_pm``."""
    s = _sign(sign)
    norm = math.sqrt(superposition_norm2(p.lam, p.eps, s))
    _check_cutoff(p.lam, space)
    c = tmss_coefficients(p, space.cutoff)
    n = np.arange(space.dim)
    weight = 1.0 + s * complex(math.cos(p.phi), math.sin(p.phi)) * (-1.0) ** n
    return _diag_ket(norm * c * weight, space)


def even_ket(p: SqueezeParams, space: FockSpace) -> StateVector:
    """Even TMSS: weight only on ``|2n, 2n>``."""
    _check_cutoff(p.lam, space)
    lam = p.lam
    n = np.arange(space.dim)
    z = -math.sqrt(lam) * complex(math.cos(p.theta), math.sin(p.theta))
    coeffs = np.where(n % 2 == 0, math.sqrt(1.0 - lam**2) * z ** n, 0.0)
    return _diag_ket(coeffs, space)


def odd_ket(p: SqueezeParams, space: FockSpace) -> StateVector:
    """Odd TMSS: weight only on ``|2n+1, 2n+1>``; undefined at ``r = 0``."""
    if p.r == 0.0:
        raise DegenerateStateError("the odd TMSS is undefined at r = 0")
    if space.cutoff < 1:
        raise CutoffError("odd TMSS needs cutoff >= 1")
    _check_cutoff(p.lam, space)
    lam = p.lam
    n = np.arange(space.dim)
    z = -math.sqrt(lam) * complex(math.cos(p.theta), math.sin(p.theta))
    coeffs = np.where(n % 2 == 1, math.sqrt((1.0 - lam**2) / lam) * z ** n, 0.0)
    return _diag_ket(coeffs, space)


def _diag_rho(populations: np.ndarray) -> DensityMatrix:
    total = populations.sum()
    log.debug("discarded tail mass %.3e", max(0.0, 1.0 - total))
    return DensityMatrix(np.diag(populations / total).astype(complex), (populations.size,))


def reduced_populations(p: SqueezeParams, cutoff: int) -> np.ndarray:
    """``P_n(phi) = 2 (1-lam) |N_+|^2 lam^n [1 + (-1)^n cos phi]`` (not renormalised)."""
    lam = p.lam
    norm2 = superposition_norm2(lam, p.eps, +1)
    n = np.arange(cutoff + 1)
    return 2.0 * (1.0 - lam) * norm2 * lam**n * (1.0 + (-1.0) ** n * p.eps)


def reduced_rho(p: SqueezeParams, space: FockSpace) -> DensityMatrix:
    """Single-mode state of ``psi_+(xi, phi)``; independent of ``theta``."""
    _check_cutoff(p.lam, space)
    return _diag_rho(reduced_populations(p, space.cutoff))


def thermal_rho(r: float, space: FockSpace) -> DensityMatrix:
    lam = math.tanh(r) ** 2
    _check_cutoff(lam, space)
    n = np.arange(space.dim)
    return _diag_rho((1.0 - lam) * lam**n)


def rho_even(r: float, space: FockSpace) -> DensityMatrix:
    lam = math.tanh(r) ** 2
    _check_cutoff(lam, space)
    n = np.arange(space.dim)
    return _diag_rho(np.where(n % 2 == 0, (1.0 - lam**2) * lam ** n, 0.0))


def rho_odd(r: float, space: FockSpace) -> DensityMatrix:
    if r == 0.0:
        raise DegenerateStateError("the odd reduced state is undefined at r = 0")
    lam = math.tanh(r) ** 2
    _check_cutoff(lam, space)
    n = np.arange(space.dim)
    return _diag_rho(np.where(n % 2 == 1, (1.0 - lam**2) * lam ** (n - 1), 0.0))


def smss_space(r: float, tail_tol: float = 1e-10) -> FockSpace:
    """Cutoff for the single-mode squeezed vacuum.

    Its populations obey ``P_{2n} <= lam^n / cosh r``, so the tail above N is
    bounded by a geometric series in ``lam`` with one term per even level.
    """
    lam = math.tanh(r) ** 2
    if lam == 0.0:
        return FockSpace(2, tail_tol)
    pairs = choose_cutoff(lam, tail_tol * (1.0 - lam))
    return FockSpace(2 * pairs + 2, tail_tol)


def smss_ket(r: float, theta: float, space: FockSpace) -> StateVector:
    """``exp((r e^{-i theta} a^2 - r e^{i theta} a^dag^2)/2)|0>`` by operator exponential."""
    lam = math.tanh(r) ** 2
    half_pairs = (space.cutoff + 1) // 2
    bound = lam**half_pairs / ((1.0 - lam) * math.cosh(r))
    if lam > 0 and bound > space.tail_tol:
        raise CutoffError(f"cutoff {space.cutoff} too small for a single-mode squeezed state with r={r}")
    vac = np.zeros(space.dim, dtype=complex)
    vac[0] = 1.0
    if r == 0.0:
        return StateVector(vac, (space.dim,))
    a = sp.diags(np.sqrt(np.arange(1, space.dim, dtype=float)), 1, format="csr")
    a2 = (a @ a).tocsr()
    z = r * complex(math.cos(theta), math.sin(theta))
    gen = 0.5 * (np.conj(z) * a2 - z * a2.T)
    return StateVector.normalized(expm_apply(gen.tocsr(), vac), (space.dim,))


def make_state(family: StateFamily | str, p: SqueezeParams, space: FockSpace):
    """Build any state family on ``space``; returns a StateVector or DensityMatrix."""
    family = StateFamily(family)
    builders = {
        StateFamily.TMSS: lambda: tmss_ket(p, space),
        StateFamily.SUPERPOSITION_PLUS: lambda: superposition_ket(p, +1, space),
        StateFamily.SUPERPOSITION_MINUS: lambda: superposition_ket(p, -1, space),
        StateFamily.EVEN_TMSS: lambda: even_ket(p, space),
        StateFamily.ODD_TMSS: lambda: odd_ket(p, space),
        StateFamily.THERMAL: lambda: thermal_rho(p.r, space),
        StateFamily.REDUCED_GENERAL: lambda: reduced_rho(p, space),
        StateFamily.REDUCED_EVEN: lambda: rho_even(p.r, space),
        StateFamily.REDUCED_ODD: lambda: rho_odd(p.r, space),
        StateFamily.SMSS: lambda: smss_ket(p.r, p.theta, space),
    }
    return builders[family]()
