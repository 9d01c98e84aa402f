"""Laguerre polynomials and displacement-operator matrix elements.

Both are evaluated with three-term recurrences. The displacement elements are
propagated in a normalised form, so magnitudes never exceed one and the
factorial prefactors only enter through ``lgamma`` in the starting values.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln


def laguerre_table(n_max: int, x) -> np.ndarray:
    """Return ``L_0(x) ... L_{n_max}(x)`` stacked along the first axis.

    Uses ``(n+1) L_{n+1} = (2n+1-x) L_n - n L_{n-1}``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 1.0 - x
    for n in range(1, n_max):
        out[n + 1] = ((2 * n + 1 - x) * out[n] - n * out[n - 1]) / (n + 1)
    return out


def laguerre_weighted_sum(coeffs, x) -> np.ndarray:
    """Evaluate ``sum_n coeffs[n] * L_n(x)`` without storing the full table."""
    coeffs = np.asarray(coeffs, dtype=float)
    x = np.asarray(x, dtype=float)
    total = coeffs[0] * np.ones_like(x)
    if coeffs.size == 1:
        return total
    prev = np.ones_like(x)
    cur = 1.0 - x
    total = total + coeffs[1] * cur
    for n in range(1, coeffs.size - 1):
        prev, cur = cur, ((2 * n + 1 - x) * cur - n * prev) / (n + 1)
        total = total + coeffs[n + 1] * cur
    return total


def _lower_magnitudes(x: float, dim: int, ncols: int) -> np.ndarray:
    """``h[n, k] = sqrt(n!/(n+k)!) x^{k/2} e^{-x/2} L_n^{(k)}(x)`` for ``n < ncols``.

    ``h[n, k]`` is the modulus-carrying part of ``<n+k|D(alpha)|n>`` with
    ``x = |alpha|^2``; ``k`` runs over ``0 .. dim-1``.
    """
    h = np.zeros((ncols, dim))
    k = np.arange(dim, dtype=float)
    h[0] = np.exp(0.5 * k * np.log(x) - 0.5 * gammaln(k + 1.0) - 0.5 * x)
    if ncols > 1:
        h[1] = h[0] * (1.0 + k - x) / np.sqrt(k + 1.0)
    for n in range(1, ncols - 1):
        h[n + 1] = ((2 * n + 1 + k - x) * h[n] - np.sqrt(n * (n + k)) * h[n - 1]) / np.sqrt(
            (n + 1) * (n + 1 + k)
        )
    return h


def displacement_elements(alpha: complex, dim: int, ncols: int | None = None) -> np.ndarray:
    """Matrix ``<m|D(alpha)|n>`` for ``0 <= m < dim`` and ``0 <= n < ncols``.

    For ``m >= n`` the element is
    ``sqrt(n!/m!) alpha^{m-n} e^{-|alpha|^2/2} L_n^{(m-n)}(|alpha|^2)``;
    the upper triangle follows from ``D(alpha)^dagger = D(-alpha)``.
    """
    alpha = complex(alpha)
    ncols = dim if ncols is None else min(ncols, dim)
    x = abs(alpha) ** 2
    if x == 0.0:
        # includes |alpha| so small that its square underflows
        return np.eye(dim, ncols, dtype=complex)
    # upper-triangle entries <m|D|n> with m < n need h[m, n-m] for m < ncols-1
    h = _lower_magnitudes(x, dim, ncols)
    phase = alpha / abs(alpha)
    k = np.arange(dim)
    down = phase**k
    up = (-np.conj(phase)) ** k
    out = np.zeros((dim, ncols), dtype=complex)
    rows = np.arange(dim)
    for j in range(ncols):
        # column j: rows m >= j use h[j, m-j]; rows m < j use h[m, j-m]
        out[j:, j] = h[j, : dim - j] * down[: dim - j]
        if j:
            m = rows[:j]
            out[:j, j] = h[m, j - m] * up[j - m]
    return out
