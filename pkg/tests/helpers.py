"""Independent oracles shared by the tests."""

import numpy as np


def expm_series(gen: np.ndarray, squarings: int = 12, terms: int = 30) -> np.ndarray:
    """Matrix exponential by scaled Taylor series and repeated squaring."""
    g = gen / 2.0**squarings
    out = np.eye(g.shape[0], dtype=complex)
    term = np.eye(g.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ g / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def lowering(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def displacement_oracle(alpha: complex, dim: int) -> np.ndarray:
    a = lowering(dim)
    return expm_series(alpha * a.T - np.conj(alpha) * a)


def two_mode_squeeze_oracle(xi: complex, dim: int, pad: int = 40) -> np.ndarray:
    """``exp(xi^* a b - xi a^dag b^dag)|0,0>`` restricted to a (dim x dim) truncation.

    The generator maps ``|n, n>`` to ``|n +- 1, n +- 1>`` only, so it is
    exponentiated on that pair subspace, where ``<n-1,n-1|ab|n,n> = n``,
    with ``pad`` spare levels so the kept amplitudes are not distorted.
    """
    big = dim + pad
    ab = np.diag(np.arange(1, big, dtype=float), 1).astype(complex)
    u = expm_series(np.conj(xi) * ab - xi * ab.conj().T)
    out = np.zeros((dim, dim), dtype=complex)
    out[np.arange(dim), np.arange(dim)] = u[:dim, 0]
    return out.ravel()
