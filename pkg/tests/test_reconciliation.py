"""Binary-input capacities, leakage model and the repetition inner code."""

import math

import numpy as np
import pytest

from dmcvqkd.errors import DomainError, LengthError
from dmcvqkd.reconciliation import (
    ReconciliationPlan,
    beta_modulation,
    biawgn_capacity,
    capacities,
    gaussian_capacity,
    hash_length,
    leak_model,
    make_plan,
    repetition_decode,
    repetition_reconcile,
    snr,
    verify_hash,
)

from oracles import repetition_block_error


def test_snr_frozen():
    assert snr(0.5, 0.5, 0.05) == pytest.approx(0.1234567901234568, rel=1e-14)
    # definition: T * (V_A/2) over the per-quadrature noise (2 + T xi)/2
    assert snr(0.5, 0.5, 0.0) == pytest.approx(0.125, rel=1e-14)


def test_gaussian_capacity_reference():
    assert gaussian_capacity(1.0) == pytest.approx(0.5, rel=1e-14)
    assert gaussian_capacity(3.0) == pytest.approx(1.0, rel=1e-14)


def test_biawgn_capacity_frozen():
    assert biawgn_capacity(1.0) == pytest.approx(0.48594415413293524, rel=1e-12)


def test_biawgn_capacity_invariants():
    prev = 0.0
    for s in np.logspace(-2, 2, 25):
        c_g, c_b = capacities(float(s))
        assert 0.0 < c_b <= 1.0
        assert c_b < c_g
        assert c_b >= prev  # non-decreasing in SNR
        prev = c_b
    # strictly increasing below saturation
    for s in np.logspace(-2, 1, 13):
        assert biawgn_capacity(float(s) * 1.1) > biawgn_capacity(float(s))
    # binary input saturates at 1 bit
    assert biawgn_capacity(100.0) > 0.9999
    # and is capacity-achieving in the low-SNR limit
    assert beta_modulation(1e-3) > 0.999


def test_beta_modulation_frozen():
    assert beta_modulation(1.0) == pytest.approx(0.9718883082658705, rel=1e-12)
    # orientation: beta_mod * (R / C_BI) == R / C_G
    s = 0.7
    rate = 0.3
    lhs = beta_modulation(s) * (rate / biawgn_capacity(s))
    assert lhs == pytest.approx(rate / gaussian_capacity(s), rel=1e-12)


def test_hash_length():
    assert hash_length(1e-10) == 34
    assert hash_length(0.6) == 1
    with pytest.raises(DomainError):
        hash_length(0.0)


def test_leak_model_frozen_and_structure():
    s = snr(0.5, 0.5, 0.01)
    leak = leak_model(200_000_000, 0.95, s, 1e-10)
    assert leak == pytest.approx(367797437.33192605, rel=1e-12)
    # leak = 2 n (1 - beta C_BI) + hash bits
    expected = 2 * 200_000_000 * (1 - 0.95 * biawgn_capacity(s)) + 34
    assert leak == pytest.approx(expected, rel=1e-14)
    assert leak_model(0, 0.95, s, 1e-10) == 34.0


def test_make_plan():
    plan = make_plan(1000, 0.5, 0.5, 0.01, 0.95, 1e-10, k_rep=4)
    assert plan.s == pytest.approx(snr(0.5, 0.5, 0.01), rel=1e-14)
    assert plan.rate == pytest.approx(0.95 * biawgn_capacity(plan.s), rel=1e-14)
    assert plan.hash_bits == 34
    assert plan.leak_total == pytest.approx(
        leak_model(1000, 0.95, plan.s, 1e-10), rel=1e-14
    )
    with pytest.raises(DomainError):
        make_plan(1000, 0.5, 0.5, 0.01, 0.95, 1e-10, k_rep=0)
    with pytest.raises(DomainError):
        ReconciliationPlan(
            s=1.0, rate=0.6, beta=1.0, k_rep=1, n_pairs=10,
            leak_total=100.0, hash_bits=34,
        )  # rate above the binary-input capacity


def test_repetition_reconcile_reference_example():
    y_hard, side, disclosed = repetition_reconcile([2.0, -1.0, 3.0, 1.0], 2)
    np.testing.assert_array_equal(y_hard, [1.0, 1.0])
    np.testing.assert_array_equal(side.sign_products, [[-1.0], [1.0]])
    np.testing.assert_array_equal(side.magnitudes, [2.0, 1.0, 3.0, 1.0])
    assert disclosed == 2


def test_repetition_reconcile_length_checks():
    with pytest.raises(LengthError):
        repetition_reconcile([1.0, 2.0, 3.0], 2)
    with pytest.raises(LengthError):
        repetition_reconcile([], 2)


def test_repetition_decode_noiseless():
    rng = np.random.default_rng(30)
    y = rng.normal(size=512)
    y_hard, side, _ = repetition_reconcile(y, 8)
    decoded = repetition_decode(y, side, 8)
    np.testing.assert_array_equal(decoded, y_hard)


def test_repetition_decode_error_rate_matches_oracle():
    # Gaussian pair x = sqrt(s) y + w: block error is E[Q(sqrt(s U))]
    # with U chi-square(k_rep)
    s, k_rep, blocks = 0.5, 8, 20000
    rng = np.random.default_rng(31)
    y = rng.normal(size=blocks * k_rep)
    x = math.sqrt(s) * y + rng.normal(size=y.size)
    y_hard, side, _ = repetition_reconcile(y, k_rep)
    decoded = repetition_decode(x, side, k_rep)
    observed = float(np.mean(decoded != y_hard))
    predicted = repetition_block_error(s, k_rep)
    se = math.sqrt(predicted * (1.0 - predicted) / blocks)
    assert abs(observed - predicted) <= 3.0 * se
    assert predicted == pytest.approx(0.04025811897775182, rel=1e-10)


def test_verify_hash():
    rng = np.random.default_rng(32)
    a = rng.integers(0, 2, size=2048).astype(np.uint8)
    assert verify_hash(a, a.copy(), 1e-10, seed=7)
    b = a.copy()
    b[100] ^= 1
    # a single-bit flip slips past a 34-bit hash with prob ~1e-10 only
    assert not verify_hash(a, b, 1e-10, seed=7)
    with pytest.raises(LengthError):
        verify_hash(a, a[:-1], 1e-10)


def test_verify_hash_short_strings():
    # strings shorter than the hash length are compared at full length
    a = np.array([1, 0, 1], dtype=np.uint8)
    assert verify_hash(a, a.copy(), 1e-10)
    b = np.array([1, 0, 0], dtype=np.uint8)
    assert not verify_hash(a, b, 1e-10, seed=3)
