"""Four-state constellation: weights, correlation strength, Fock expansions.

Alice draws one of four coherent states alpha * exp(i*(2k+1)*pi/4),
k = 0..3, uniformly.  The modulation variance is V_A = 2*alpha^2 (shot-noise
units).  The mixture splits into four orthogonal non-Gaussian eigenstates
whose weights lambda_k drive every correlation quantity below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, TruncationError
from .gaussian import TwoModeCovariance

#: phases of the four coherent states (radians)
CONSTELLATION_PHASES = tuple((2 * k + 1) * math.pi / 4.0 for k in range(4))

#: default Fock-space truncation for state expansions
N_MAX_DEFAULT = 60

#: largest tolerated norm deficit of a truncated expansion
TAIL_MASS_TOL = 1e-10


@dataclass(frozen=True)
class ConstellationParams:
    """Constellation amplitude and derived modulation variance."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise DomainError(f"alpha must be positive, got {self.alpha!r}")

    @property
    def v_a(self) -> float:
        return 2.0 * self.alpha * self.alpha


@dataclass(frozen=True)
class LambdaWeights:
    """Mixture weights of the four orthogonal constellation eigenstates."""

    lambda0: float
    lambda1: float
    lambda2: float
    lambda3: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.lambda0, self.lambda1, self.lambda2, self.lambda3]
        )


def lambda_weights(alpha: float) -> LambdaWeights:
    """Eigenstate weights lambda_k of the four-state mixture.

    lambda_{0,2} = (1/2) e^{-alpha^2} [cosh(alpha^2) +/- cos(alpha^2)]
    lambda_{1,3} = (1/2) e^{-alpha^2} [sinh(alpha^2) +/- sin(alpha^2)]

    All four are positive for alpha > 0 and sum to 1.
    """
    if not alpha > 0.0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    a2 = alpha * alpha
    # e^{-a2} cosh(a2) = (1 + e^{-2 a2})/2 etc., written to avoid overflow
    # and catastrophic cancellation at large alpha.
    em = math.exp(-2.0 * a2)
    ec = 0.5 * (1.0 + em)
    es = 0.5 * (1.0 - em)
    et = math.exp(-a2)
    w = (
        0.5 * (ec + et * math.cos(a2)),
        0.5 * (es + et * math.sin(a2)),
        0.5 * (ec - et * math.cos(a2)),
        0.5 * (es - et * math.sin(a2)),
    )
    return LambdaWeights(*w)


def lambda_ratio_sum(weights: LambdaWeights) -> float:
    """sum_k lambda_k^{3/2} / lambda_{k+1 mod 4}^{1/2}.

    This is the factor multiplying V_A in the trusted correlation strength;
    it tends to 1 as alpha -> 0 and is strictly below the Gaussian-modulation
    value sqrt(1 + 2/V_A) for alpha > 0.
    """
    lam = weights.as_array()
    if np.any(lam <= 0.0):
        raise DomainError("lambda weights must be positive")
    nxt = np.roll(lam, -1)
    return float(np.sum(lam ** 1.5 / np.sqrt(nxt)))


def correlation_z(alpha: float) -> float:
    """Trusted cross-correlation Z of the purified constellation state.

    Z = V_A * sum_k lambda_k^{3/2} / lambda_{k+1}^{1/2}, strictly smaller
    than the Gaussian benchmark sqrt(V_A^2 + 2 V_A).
    """
    if not alpha > 0.0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    v_a = 2.0 * alpha * alpha
    return v_a * lambda_ratio_sum(lambda_weights(alpha))


@lru_cache(maxsize=None)
def _log_factorials(n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1, dtype=float)
    return np.cumsum(np.concatenate([[0.0], np.log(np.maximum(n[1:], 1.0))]))


def fock_state_vector(
    alpha: float, k: int, n_max: int = N_MAX_DEFAULT
) -> np.ndarray:
    """Fock coefficients of the k-th constellation eigenstate |phi_k>.

    |phi_k> has support on photon numbers n = 4j + k only, with

        <n|phi_k> = e^{-alpha^2/2} / sqrt(lambda_k) * (-1)^j
                    * alpha^n / sqrt(n!)  at n = 4j + k.

    Returns a real vector of length n_max + 1.  Raises TruncationError when
    the norm deficit of the truncation exceeds TAIL_MASS_TOL.
    """
    if not alpha > 0.0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    if k not in (0, 1, 2, 3):
        raise DomainError(f"k must be in 0..3, got {k!r}")
    if n_max < 4:
        raise DomainError(f"n_max must be at least 4, got {n_max!r}")
    lam = lambda_weights(alpha).as_array()[k]
    lf = _log_factorials(n_max)
    ns = np.arange(k, n_max + 1, 4)
    js = (ns - k) // 4
    log_amp = -0.5 * alpha * alpha + ns * math.log(alpha) - 0.5 * lf[ns]
    coeff = (-1.0) ** js * np.exp(log_amp) / math.sqrt(lam)
    vec = np.zeros(n_max + 1)
    vec[ns] = coeff
    deficit = abs(1.0 - float(np.sum(vec * vec)))
    if deficit > TAIL_MASS_TOL:
        raise TruncationError(
            f"norm deficit {deficit:.3e} above {TAIL_MASS_TOL:.0e}"
            f" at n_max={n_max}; increase n_max"
        )
    return vec


def expected_covariance(alpha: float, T: float, xi: float) -> TwoModeCovariance:
    """Honest-channel covariance triple for the purified protocol state.

    x = V_A + 1,  y = T*V_A + 1 + T*xi,  z = sqrt(T) * Z(alpha).
    """
    if not 0.0 < T <= 1.0:
        raise DomainError(f"T must be in (0, 1], got {T!r}")
    if xi < 0.0:
        raise DomainError(f"xi must be non-negative, got {xi!r}")
    v_a = 2.0 * alpha * alpha
    return TwoModeCovariance(
        x=v_a + 1.0,
        y=T * v_a + 1.0 + T * xi,
        z=math.sqrt(T) * correlation_z(alpha),
    )
