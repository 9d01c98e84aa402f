"""Displaced-parity readout of a motional state through a carrier pulse.

The motional state is displaced by ``alpha`` and the qubit, prepared in
``|e>``, is driven on the carrier. To second order in the Lamb-Dicke parameter
the carrier Hamiltonian is ``H_c = (Omega/2) [1 - eta^2 (n + 1/2)] sigma_x``;
choosing ``Omega eta^2 tau / 2 = pi/2`` turns ``exp(-i H_c tau)`` into
``exp(-i (Phi - pi n / 2) sigma_x)`` with ``Phi = pi / (2 eta^2) - pi/4``.
The population inversion is then ``cos(2 Phi) sum_n (-1)^n P_n(alpha)``, a
displaced parity. It vanishes identically when ``cos(2 Phi) = 0``, which is
the case for ``eta = 0.1``; :func:`parity_matched_eta` picks a nearby eta with
``Phi`` a multiple of pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .fock import QUBIT_INDEX, FockSpace, Operator
from .stats import _as_rho, displaced_density, wigner_parity

E, G = QUBIT_INDEX["e"], QUBIT_INDEX["g"]


def parity_matched_eta(near: float = 0.1) -> float:
    """Lamb-Dicke parameter closest to ``near`` with ``cos(2 Phi) = +1``.

    ``Phi = m pi`` needs ``1 / eta^2 = 2 m + 1/2``.
    """
    m = max(1, round((1.0 / near**2 - 0.5) / 2.0))
    return 1.0 / math.sqrt(2 * m + 0.5)


@dataclass(frozen=True)
class ProbeParams:
    eta_x: float = 1.0 / math.sqrt(100.5)
    Omega: float = 0.05

    def __post_init__(self):
        if not (self.eta_x > 0 and self.Omega > 0):
            raise ValueError("eta_x and Omega must be positive")

    @property
    def tau(self) -> float:
        """Pulse length fixed by ``Omega eta^2 tau / 2 = pi / 2``."""
        return math.pi / (self.Omega * self.eta_x**2)

    @property
    def phi(self) -> float:
        return 0.5 * self.Omega * self.tau - 0.25 * math.pi

    @property
    def contrast(self) -> float:
        """``cos(2 Phi)``, the factor multiplying the displaced parity."""
        return math.cos(2.0 * self.phi)


@lru_cache(maxsize=32)
def _carrier_matrix(eta: float, omega: float, dim: int, exact: bool) -> np.ndarray:
    p = ProbeParams(eta, omega)
    n = np.arange(dim, dtype=float)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    if exact:
        theta = p.phi - 0.5 * math.pi * n
        cos_block = np.kron(np.eye(2), np.diag(np.cos(theta)))
        sin_block = np.kron(sx, np.diag(np.sin(theta)))
        return cos_block - 1j * sin_block
    hc = 0.5 * omega * np.kron(sx, np.diag(1.0 - eta**2 * (n + 0.5)))
    return expm(-1j * hc * p.tau)


def carrier_unitary(params: ProbeParams, space: FockSpace, exact: bool = True) -> Operator:
    """Carrier pulse on qubit x mode: the number-dependent rotation, or ``exp(-i H_c tau)``."""
    mat = _carrier_matrix(params.eta_x, params.Omega, space.dim, bool(exact))
    return Operator(mat.copy(), (2, space.dim))


@dataclass(frozen=True)
class ProbeResult:
    alpha: complex
    p_eg: float
    wigner_ref: float


def inversion(rho_displaced: np.ndarray, params: ProbeParams, exact: bool = True) -> float:
    """``<sigma_z>`` after the carrier pulse on ``|e><e| x rho``.

    The pulse never changes the Fock number, so only the populations of
    ``rho`` enter; ``<sigma_z> = sum_n P_n (|U_ee(n)|^2 - |U_ge(n)|^2)``.
    """
    d = rho_displaced.shape[0]
    u = _carrier_matrix(params.eta_x, params.Omega, d, bool(exact)).reshape(2, d, 2, d)
    n = np.arange(d)
    z = np.abs(u[E, n, E, n]) ** 2 - np.abs(u[G, n, E, n]) ** 2
    return float(np.dot(np.diag(rho_displaced).real, z))


def probe(rho_v, alpha: complex, params: ProbeParams, exact: bool = True, shots: int | None = None,
          rng: np.random.Generator | None = None, wigner=None, reference: bool = True) -> ProbeResult:
    """Displace by ``alpha``, pulse, read ``<sigma_z>``.

    The ideal readout equals ``cos(2 Phi) (pi/2) W(-alpha)``. With ``shots`` the
    inversion is estimated from that many binomial outcomes. ``wigner`` is an
    optional callable ``(q, p) -> W``; the reference is ``W(-alpha)`` from it,
    or from the displaced-parity Wigner function otherwise. ``reference=False``
    skips it and stores NaN.
    """
    alpha = complex(alpha)
    m = _as_rho(rho_v)
    p = inversion(displaced_density(m, alpha), params, exact)
    p = max(-1.0, min(1.0, p))
    if shots is not None:
        if rng is None:
            raise ValueError("sampled readout needs an explicit random generator")
        k = rng.binomial(int(shots), 0.5 * (1.0 + p))
        p = 2.0 * k / shots - 1.0
    if not reference:
        ref = math.nan
    elif wigner is not None:
        ref = float(wigner(-alpha.real, -alpha.imag))
    else:
        ref = wigner_parity(m, -alpha)
    return ProbeResult(alpha, float(p), ref)


@dataclass(frozen=True)
class AffineFit:
    slope: float
    intercept: float
    residual: float


def fit_affine(w, p) -> AffineFit:
    """Least-squares ``p = slope * w + intercept``; ``residual`` is the max abs misfit."""
    w = np.asarray(w, dtype=float)
    p = np.asarray(p, dtype=float)
    a = np.column_stack([w, np.ones_like(w)])
    (slope, intercept), *_ = np.linalg.lstsq(a, p, rcond=None)
    return AffineFit(float(slope), float(intercept), float(np.abs(a @ [slope, intercept] - p).max()))


def probe_scan(rho_v, radii, params: ProbeParams, phase: float = 0.0, exact: bool = True,
               wigner=None) -> list[ProbeResult]:
    """Probe along the ray ``alpha = r e^{i phase}``."""
    ph = complex(math.cos(phase), math.sin(phase))
    return [probe(rho_v, float(r) * ph, params, exact, wigner=wigner) for r in radii]


@dataclass(frozen=True)
class Detection:
    detected: bool
    margin: float
    p_zero: float
    p_alpha: float


def detect_displacement(rho_v, alpha_true: complex, params: ProbeParams, threshold: float = 0.5,
                        exact: bool = True, shots: int | None = None,
                        rng: np.random.Generator | None = None) -> Detection:
    """Flag a displacement when ``|P_eg(alpha)| < threshold |P_eg(0)|``.

    ``margin`` is ``threshold |P_eg(0)| - |P_eg(alpha)|``, positive when detected.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    m = _as_rho(rho_v)
    p0 = probe(m, 0j, params, exact, shots, rng, reference=False).p_eg
    if abs(p0) < 1e-12:
        raise ValueError(
            f"probe has no contrast: cos(2 Phi) = {params.contrast:.3e} for eta = {params.eta_x:g}"
        )
    pa = probe(m, alpha_true, params, exact, shots, rng, reference=False).p_eg
    margin = threshold * abs(p0) - abs(pa)
    return Detection(bool(margin > 0.0), float(margin), float(p0), float(pa))


__all__ = [
    "AffineFit",
    "Detection",
    "ProbeParams",
    "ProbeResult",
    "carrier_unitary",
    "detect_displacement",
    "fit_affine",
    "inversion",
    "parity_matched_eta",
    "probe",
    "probe_scan",
]
