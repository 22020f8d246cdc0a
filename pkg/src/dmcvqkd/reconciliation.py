"""Error-correction accounting and the repetition-code mechanics.

Capacities are per binary symbol (one quadrature sign); a mode carries two
such symbols.  The leakage model prices reverse reconciliation at rate
R = beta * C_BIAWGN(s) per symbol plus the verification hash.

The repetition scheme is the disclosed-side-information construction: Bob
reveals all magnitudes and the in-block relative signs, keeping one secret
sign per block; Alice decodes that sign from her correlated values by a
matched-filter vote.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.special import xlogy

from .errors import DomainError, LengthError
from .finitekey import universal_hash

#: absolute quadrature tolerance for the capacity integral
_QUAD_TOL = 1e-10


def snr(v_a: float, T: float, xi: float) -> float:
    """Per-symbol signal-to-noise ratio s = T V_A / (2 + T xi)."""
    if not 0.0 < T <= 1.0:
        raise DomainError(f"T must be in (0, 1], got {T!r}")
    if xi < 0.0:
        raise DomainError(f"xi must be >= 0, got {xi!r}")
    if v_a <= 0.0:
        raise DomainError(f"V_A must be > 0, got {v_a!r}")
    return T * v_a / (2.0 + T * xi)


def gaussian_capacity(s: float) -> float:
    """Shannon capacity (bits/symbol) of the Gaussian-input channel."""
    if s <= 0.0:
        raise DomainError(f"s must be > 0, got {s!r}")
    return 0.5 * math.log2(1.0 + s)


def _biawgn_density(x: np.ndarray, s: float) -> np.ndarray:
    # equal mixture of N(-1, 1/s) and N(+1, 1/s)
    pref = math.sqrt(s / (8.0 * math.pi))
    return pref * (
        np.exp(-s * (x + 1.0) ** 2 / 2.0) + np.exp(-s * (x - 1.0) ** 2 / 2.0)
    )


def biawgn_capacity(s: float) -> float:
    """Capacity (bits/symbol) of the binary-input AWGN channel at SNR s.

    C = -int phi_s log2 phi_s dx - (1/2) log2(2 pi e) + (1/2) log2 s,
    with phi_s the equal mixture of unit-separated Gaussians of variance
    1/s.  Deterministic adaptive quadrature, absolute error <= 1e-8.
    """
    if s <= 0.0:
        raise DomainError(f"s must be > 0, got {s!r}")

    def integrand(x):
        phi = _biawgn_density(np.asarray(x), s)
        return -xlogy(phi, phi) / math.log(2.0)

    halfwidth = 1.0 + 40.0 / math.sqrt(s)
    h, _err = quad(
        integrand,
        -halfwidth,
        halfwidth,
        points=[-1.0, 0.0, 1.0],
        epsabs=_QUAD_TOL,
        epsrel=_QUAD_TOL,
        limit=400,
    )
    c = h - 0.5 * math.log2(2.0 * math.pi * math.e) + 0.5 * math.log2(s)
    # the exact value lies strictly inside (0, 1); clip round-off
    # excursions back into the open interval so the strict bound survives
    # saturation (1 - C underflows below one ulp for s around 70)
    return min(max(c, 0.0), math.nextafter(1.0, 0.0))


def capacities(s: float) -> tuple:
    """(C_Gauss, C_BIAWGN) at SNR s."""
    return (gaussian_capacity(s), biawgn_capacity(s))


def beta_modulation(s: float) -> float:
    """Efficiency factor C_BIAWGN(s)/C_Gauss(s) of binary signalling.

    Defined so that beta_modulation * (R / C_BIAWGN) = R / C_Gauss holds as
    an identity, i.e. it converts a rate's efficiency relative to the
    binary-input capacity into its efficiency relative to the Gaussian one.
    (The source text states the inverse ratio; the identity above forces
    this orientation.)
    """
    c_g, c_b = capacities(s)
    return c_b / c_g


def hash_length(eps_cor: float) -> int:
    """Verification-hash length ceil(log2(1/eps_cor)) in bits."""
    if not 0.0 < eps_cor < 1.0:
        raise DomainError(f"eps_cor must be in (0, 1), got {eps_cor!r}")
    return max(1, math.ceil(math.log2(1.0 / eps_cor)))


def leak_model(n_pairs: int, beta: float, s: float, eps_cor: float) -> float:
    """Bits disclosed during reconciliation of n_pairs quadrature pairs.

    Each pair (mode) carries two binary symbols corrected at rate
    R = beta * C_BIAWGN(s):

        leak = 2 n_pairs (1 - R) + ceil(log2(1/eps_cor)).
    """
    if n_pairs < 0:
        raise DomainError(f"n_pairs must be >= 0, got {n_pairs!r}")
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must be in (0, 1], got {beta!r}")
    rate = beta * biawgn_capacity(s)
    return 2.0 * n_pairs * (1.0 - rate) + hash_length(eps_cor)


@dataclass(frozen=True)
class ReconciliationPlan:
    """Declared EC operating point and its leakage."""

    s: float
    rate: float
    beta: float
    k_rep: int
    n_pairs: int
    leak_total: float
    hash_bits: int

    def __post_init__(self):
        if self.rate > biawgn_capacity(self.s) + 1e-12:
            raise DomainError(
                f"rate {self.rate!r} exceeds the binary-input capacity"
            )
        if self.leak_total < self.hash_bits:
            raise DomainError("leak below the verification hash length")


def make_plan(
    n_pairs: int, v_a: float, T: float, xi: float, beta: float,
    eps_cor: float, k_rep: int = 1,
) -> ReconciliationPlan:
    """Operating point for a run: SNR, rate, repetition length, leakage."""
    if k_rep < 1:
        raise DomainError(f"k_rep must be >= 1, got {k_rep!r}")
    s = snr(v_a, T, xi)
    return ReconciliationPlan(
        s=s,
        rate=beta * biawgn_capacity(s),
        beta=beta,
        k_rep=int(k_rep),
        n_pairs=int(n_pairs),
        leak_total=leak_model(n_pairs, beta, s, eps_cor),
        hash_bits=hash_length(eps_cor),
    )


class RepetitionSideInfo(NamedTuple):
    """Disclosed reconciliation data: all magnitudes, in-block sign products.

    sign_products[i, j] = sign(y_block_first) * sign(y_block_j+2) in
    {-1, +1}; the leading implicit entry of every block is +1 and is not
    stored or counted.
    """

    magnitudes: np.ndarray
    sign_products: np.ndarray


def _signs(values: np.ndarray) -> np.ndarray:
    # zeros count as positive, matching the quadrant tie-break
    return np.where(values >= 0.0, 1.0, -1.0)


def repetition_reconcile(y, k_rep: int):
    """Split Bob's values into blocks, keep one sign per block.

    Returns (y_hard, side_info, disclosed_bits): y_hard[i] in {-1, +1} is
    the sign of block i's first element; side_info carries the N
    magnitudes and the (k_rep - 1) * N / k_rep relative signs;
    disclosed_bits counts exactly those binary relative signs.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise LengthError(f"y must be 1-d, got shape {y.shape}")
    if k_rep < 1:
        raise DomainError(f"k_rep must be >= 1, got {k_rep!r}")
    if y.size == 0 or y.size % k_rep != 0:
        raise LengthError(
            f"length {y.size} not a positive multiple of k_rep={k_rep}"
        )
    blocks = y.reshape(-1, k_rep)
    signs = _signs(blocks)
    y_hard = signs[:, 0].copy()
    sign_products = signs[:, :1] * signs[:, 1:]
    side = RepetitionSideInfo(
        magnitudes=np.abs(y), sign_products=sign_products
    )
    disclosed = int(sign_products.size)
    return y_hard, side, disclosed


def repetition_decode(x, side_info: RepetitionSideInfo, k_rep: int) -> np.ndarray:
    """Alice's estimate of y_hard from her correlated values x.

    Matched-filter vote: for block i the statistic is
    sum_j x_ij * s_ij * |y_ij| with s_i1 = +1; its sign is the guess.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size % k_rep != 0:
        raise LengthError(
            f"x of shape {x.shape} incompatible with k_rep={k_rep}"
        )
    mags = side_info.magnitudes.reshape(-1, k_rep)
    if mags.shape[0] != x.size // k_rep:
        raise LengthError("side_info does not match the block count")
    full_signs = np.concatenate(
        [np.ones((mags.shape[0], 1)), side_info.sign_products], axis=1
    )
    stat = np.sum(x.reshape(-1, k_rep) * full_signs * mags, axis=1)
    return _signs(stat)


def verify_hash(string_a, string_b, eps_cor: float, seed=0) -> bool:
    """Compare two-universal hashes of both strings.

    Equal strings pass for every seed; unequal strings pass with
    probability at most eps_cor over uniformly chosen seeds (hash length
    ceil(log2(1/eps_cor))).
    """
    a = np.asarray(string_a, dtype=np.uint8)
    b = np.asarray(string_b, dtype=np.uint8)
    if a.shape != b.shape:
        raise LengthError(f"length mismatch {a.shape} vs {b.shape}")
    out_len = min(hash_length(eps_cor), a.size)
    ha = universal_hash(a, seed, out_len)
    hb = universal_hash(b, seed, out_len)
    return bool(np.array_equal(ha, hb))
