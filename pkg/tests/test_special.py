import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_genlaguerre, eval_laguerre

from helpers import displacement_oracle
from tmss.special import displacement_elements, laguerre_table, laguerre_weighted_sum


def test_laguerre_table_matches_scipy():
    x = np.linspace(0.0, 40.0, 17)
    table = laguerre_table(30, x)
    for n in range(31):
        ref = eval_laguerre(n, x)
        assert np.allclose(table[n], ref, rtol=1e-10, atol=1e-10 * np.abs(ref).max())


def test_laguerre_weighted_sum_matches_table():
    rng = np.random.default_rng(3)
    c = rng.normal(size=25)
    x = np.linspace(0.0, 20.0, 9)
    assert np.allclose(laguerre_weighted_sum(c, x), c @ laguerre_table(24, x), atol=1e-9)
    assert np.allclose(laguerre_weighted_sum([2.0], x), 2.0)


def test_displacement_zero_is_identity():
    assert np.array_equal(displacement_elements(0.0, 6), np.eye(6))


@pytest.mark.parametrize("alpha", [0.3, 1.0, 0.7 - 1.2j, 2j, -1.5 + 0.5j])
def test_displacement_matches_series_oracle(alpha):
    big = displacement_oracle(alpha, 120)
    d = displacement_elements(alpha, 40)
    assert np.abs(d - big[:40, :40]).max() < 1e-12


def test_displacement_closed_form_element():
    # <m|D|n> = sqrt(n!/m!) alpha^(m-n) e^{-|a|^2/2} L_n^(m-n)(|a|^2) for m >= n
    alpha = 0.8 + 0.4j
    x = abs(alpha) ** 2
    d = displacement_elements(alpha, 12)
    for m, n in [(3, 1), (7, 2), (5, 5), (11, 0)]:
        ref = math.sqrt(math.factorial(n) / math.factorial(m)) * alpha ** (m - n)
        ref *= math.exp(-x / 2) * eval_genlaguerre(n, m - n, x)
        assert abs(d[m, n] - ref) < 1e-13
        assert abs(d[n, m] - (-1) ** (m - n) * np.conj(ref)) < 1e-13


def test_displacement_large_index_no_overflow():
    d = displacement_elements(1.0, 400)
    assert np.all(np.isfinite(d))
    lower = d[:, :200]
    assert np.abs(lower.conj().T @ lower - np.eye(200)).max() < 1e-10


def test_displacement_rectangular_block():
    full = displacement_elements(1.1 - 0.2j, 30)
    assert np.array_equal(displacement_elements(1.1 - 0.2j, 30, 7), full[:, :7])


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2), st.floats(0, 2 * math.pi))
def test_displacement_columns_unitary_on_lower_block(mag, arg):
    d = displacement_elements(mag * complex(math.cos(arg), math.sin(arg)), 60)
    low = d[:, :20]
    assert np.abs(low.conj().T @ low - np.eye(20)).max() < 1e-9
