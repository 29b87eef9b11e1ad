"""Closed-form companion: scaling laws and the probability machinery behind them.

Everything here is deterministic and cheap, so the Monte Carlo side can be
cross-validated point by point: throughput laws for the pilot-diversity,
channel-aware, SU-OFDM and OFDMA schemes, the pilot-count optimiser, the
hypoexponential distribution of tap-power sums, extreme-value locations,
standard-normal inverse cdf, excess kurtosis, and the Q-function sandwich
used to justify the Gaussian extreme-value step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import PowerDelayProfile

_INV_E = -math.exp(-1.0)


# ---------------------------------------------------------------------------
# Lambert W, principal branch
# ---------------------------------------------------------------------------

def lambert_w0(x: float) -> float:
    """Principal-branch W(x) for x >= -1/e via Halley iteration.

    Converges to |W e^W - x| <= 1e-12 * max(1, |x|).
    """
    x = float(x)
    if x < _INV_E - 1e-15:
        raise ValueError("lambert_w0 requires x >= -1/e")
    if x == 0.0:
        return 0.0
    # Initial guesses: series near the branch point, log asymptote for large
    # x, and the small-x Taylor expansion in between.
    if x < -0.25:
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + p - p * p / 3.0
    elif x < math.e:
        w = x * (1.0 - x + 1.5 * x * x) if abs(x) < 0.5 else math.log1p(x) * 0.7
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    tol = 1e-12 * max(1.0, abs(x))
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= tol:
            return w
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        w -= f / denom
    raise RuntimeError("lambert_w0 failed to converge")


# ---------------------------------------------------------------------------
# Throughput scaling laws
# ---------------------------------------------------------------------------

def rate_theorem1(snr_ref: float, n: int, k: float, q: float = 1.0,
                  zeta: float = 0.0) -> float:
    """Pilot-diversity law: (1 - zeta q) log2(1 + snr_ref (N+1) ln(qK)).

    When the pilots fill the whole slot (zeta*q = 1, up to float dust) no
    time is left for data and the rate is exactly zero.
    """
    prelog = 1.0 - zeta * q
    if prelog <= 1e-9:
        if prelog < -1e-9:
            raise ValueError("zeta*q may not exceed 1")
        return 0.0
    return prelog * math.log2(1.0 + snr_ref * (n + 1) * math.log(q * k))


def rate_theorem2(snr_ref: float, n: int, k: float) -> float:
    """Channel-model-aware law log2(1 + snr_ref N^2 ln K), order constant 1."""
    if k < 2:
        raise ValueError("k must be >= 2")
    return math.log2(1.0 + snr_ref * n ** 2 * math.log(k))


class Theorem3Rates(NamedTuple):
    exact: float    # quantile form, Phi^{-1}(1 - 1/K)
    approx: float   # sqrt(pi/2 ln K) form


def rate_theorem3(snr_ref: float, n: int, k: float, pdp: PowerDelayProfile,
                  m: int = 1) -> Theorem3Rates:
    """SU-OFDM sum-rate upper bound in both its forms.

    Per subcarrier the bound reads log2(1 + (snr_ref/m)(N+1)[1 + ||a||_2
    Phi^{-1}(1 - 1/K)]); the band total is m times that.  With m=1 and
    snr_ref = beta P / sigma^2 this is the single-carrier-normalised
    expression; the OFDM comparisons use m subcarriers with snr_ref the
    total beta P / sigma^2 budget.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    a2 = pdp.norm(2.0)
    snr_sub = snr_ref / m
    bracket_exact = 1.0 + a2 * normal_quantile(1.0 - 1.0 / k)
    bracket_approx = 1.0 + a2 * math.sqrt(math.pi / 2.0 * math.log(k))
    return Theorem3Rates(
        exact=m * math.log2(1.0 + snr_sub * (n + 1) * bracket_exact),
        approx=m * math.log2(1.0 + snr_sub * (n + 1) * bracket_approx),
    )


def rate_theorem4(snr_ref: float, n: int, k: float, m: int = 1) -> float:
    """OFDMA law M log2(1 + (snr_ref/M)(N+1) ln K), snr_ref the total budget."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if m < 1:
        raise ValueError("m must be >= 1")
    return m * math.log2(1.0 + snr_ref / m * (n + 1) * math.log(k))


# ---------------------------------------------------------------------------
# Optimal number of pilot configurations
# ---------------------------------------------------------------------------

def pilot_fixed_point_verbatim(k: float, n: int, zeta: float,
                               beta: float, max_iter: int = 10000) -> float:
    """Root of log2(QK) = e^{W(1/(zeta Q) - 1)} / (beta (N+1)).

    This is the implicit pilot-count equation exactly as stated; see
    ``optimal_q`` for the variant consistent with the throughput law it is
    meant to maximise (the two differ, both are exposed).
    """
    coeff = beta * (n + 1)

    def g(q):
        return math.log2(q * k) - math.exp(lambert_w0(1.0 / (zeta * q) - 1.0)) / coeff

    return _solve_increasing(g, zeta, max_iter)


def _stationary_q(k: float, n: int, zeta: float, snr_ref: float,
                  max_iter: int) -> float:
    # Stationarity of (1 - zeta q) log2(1 + g ln(qK)) in q gives
    # u ln u = g (1/(zeta q) - 1) with u = 1 + g ln(qK), i.e.
    # ln(qK) = (e^{W(g(1/(zeta q)-1))} - 1) / g.
    g_c = snr_ref * (n + 1)

    def implied_ln_qk(q):
        x = g_c * (1.0 / (zeta * q) - 1.0)
        return (math.exp(lambert_w0(x)) - 1.0) / g_c

    # Damped fixed-point iteration on ln q.
    q = 1.0
    for _ in range(max_iter):
        target = implied_ln_qk(q) - math.log(k)
        new_ln = 0.5 * math.log(q) + 0.5 * target
        q_new = min(max(math.exp(new_ln), 1e-9), (1.0 - 1e-9) / zeta)
        if abs(q_new - q) <= 1e-12 * max(1.0, q):
            return q_new
        q = q_new

    def resid(qq):
        return math.log(qq * k) - implied_ln_qk(qq)

    return _solve_increasing(resid, zeta, max_iter)


def _solve_increasing(g, zeta: float, max_iter: int) -> float:
    lo, hi = 1e-9, (1.0 - 1e-9) / zeta
    if g(lo) > 0:
        return lo
    if g(hi) < 0:
        return hi
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            return 0.5 * (lo + hi)
    raise RuntimeError("pilot fixed point failed to converge")


def feasible_q_max(zeta: float) -> int:
    return max(1, math.floor(1.0 / zeta) - 1)


def optimal_q(k: float, n: int, zeta: float, snr_ref: float,
              max_iter: int = 10000) -> tuple[float, int]:
    """(q_hat, q_star): continuous stationary point and best integer Q.

    q_hat solves the stationarity condition of the throughput law by damped
    fixed-point iteration (bracketed root search as fallback).  q_star is
    the authoritative integer optimum: the exhaustive argmax of the law over
    Q in [1, floor(1/zeta) - 1], which for the unimodal law coincides with
    the better of floor/ceil of q_hat.
    """
    if not 0.0 < zeta < 1.0:
        raise ValueError("zeta must lie in (0, 1)")
    q_hat = _stationary_q(k, n, zeta, snr_ref, max_iter)
    q_max = feasible_q_max(zeta)
    candidates = range(1, q_max + 1)
    q_star = max(candidates,
                 key=lambda q: rate_theorem1(snr_ref, n, k, q, zeta))
    return q_hat, int(q_star)


# ---------------------------------------------------------------------------
# Hypoexponential distribution (sum of independent exponentials)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HypoExpDist:
    """Sum of independent exponentials with distinct means mu_i."""

    means: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.means, dtype=float)
        object.__setattr__(self, "means", mu)
        if np.any(mu <= 0):
            raise ValueError("means must be positive")
        if mu.size > 1:
            gaps = np.abs(mu[:, None] - mu[None, :])
            np.fill_diagonal(gaps, np.inf)
            if gaps.min() <= 1e-12 * mu.max():
                raise ValueError("means must be strictly distinct")

    @classmethod
    def from_pdp(cls, pdp: PowerDelayProfile, scale: float) -> "HypoExpDist":
        return cls(means=scale * pdp.taps)

    def weights(self) -> np.ndarray:
        """Partial-fraction coefficients C_i = prod_{j!=i} mu_i/(mu_i - mu_j)."""
        mu = self.means
        if mu.size == 1:
            return np.ones(1)
        diff = mu[:, None] - mu[None, :]
        np.fill_diagonal(diff, 1.0)
        ratio = mu[:, None] / diff
        np.fill_diagonal(ratio, 1.0)
        c = np.prod(ratio, axis=1)
        # the coefficients sum to 1 exactly; strip the float dust so F(0)=0
        return c / c.sum()

    @property
    def mean(self) -> float:
        return float(self.means.sum())


def hypoexp_cdf(dist: HypoExpDist, y) -> np.ndarray | float:
    """F(y) = 1 - sum_i C_i e^{-y/mu_i} for y >= 0 (0 below).

    Evaluated as sum_i C_i (1 - e^{-y/mu_i}) via expm1, which is exact at
    y = 0 and well conditioned for small y.
    """
    y = np.asarray(y, dtype=float)
    c = dist.weights()
    val = (-np.expm1(-y[..., None] / dist.means)) @ c
    out = np.where(y >= 0, np.clip(val, 0.0, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def hypoexp_quantile(dist: HypoExpDist, p: float) -> float:
    """Bisection inverse of the cdf to 1e-10 absolute."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    lo, hi = 0.0, dist.mean
    while hypoexp_cdf(dist, hi) < p:
        hi *= 2.0
        if hi > 1e9 * dist.mean:
            raise RuntimeError("quantile bracket failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hypoexp_cdf(dist, mid) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10:
            break
    return 0.5 * (lo + hi)


def evt_location_exponential(mean: float, count: float) -> float:
    """F^{-1}(1 - 1/count) for an exponential: mean * ln(count).

    The centred maximum of `count` such draws converges to a Gumbel with
    scale `mean` around this location.
    """
    if count < 2:
        raise ValueError("count must be >= 2")
    return mean * math.log(count)


def gumbel_cdf(x, scale: float = 1.0):
    return np.exp(-np.exp(-np.asarray(x, dtype=float) / scale))


# ---------------------------------------------------------------------------
# Standard normal cdf / quantile and the Q-function sandwich
# ---------------------------------------------------------------------------

def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def qfunction(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


_ACKLAM_A = (-3.969683028665376e+01, 2.209460984245205e+02,
             -2.759285104469687e+02, 1.383577518672690e+02,
             -3.066479806614716e+01, 2.506628277459239e+00)
_ACKLAM_B = (-5.447609879822406e+01, 1.615858368580409e+02,
             -1.556989798598866e+02, 6.680131188771972e+01,
             -1.328068155288572e+01)
_ACKLAM_C = (-7.784894002430293e-03, -3.223964580411365e-01,
             -2.400758277161838e+00, -2.549732539343734e+00,
             4.374664141464968e+00, 2.938163982698783e+00)
_ACKLAM_D = (7.784695709041462e-03, 3.224671290700398e-01,
             2.445134137142996e+00, 3.754408661907416e+00)


def normal_quantile(p: float) -> float:
    """Inverse standard-normal cdf: rational approximation plus one
    Halley step on the exact erfc-based cdf (absolute error < 1e-12)."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    p_low, p_high = 0.02425, 1.0 - 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    elif p <= p_high:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    # One Halley refinement against the exact cdf; the residual is formed in
    # whichever tail is small so no cancellation occurs (1-p is exact for
    # p >= 0.5).
    if p < 0.5:
        err = normal_cdf(x) - p
    else:
        err = (1.0 - p) - qfunction(x)
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    u = err / pdf
    return x - u / (1.0 + 0.5 * x * u)


def qfunction_bounds_check(x: float) -> tuple[float, float, float]:
    """(lower, Q(x), upper) for the Gaussian-tail sandwich, valid for x > 1.

    lower = phi-scale * (1 - 1/x^2), upper drops the correction; both
    tighten to Q(x) as x grows.
    """
    if x <= 1.0:
        raise ValueError("the sandwich requires x > 1")
    envelope = math.exp(-0.5 * x * x) / (math.sqrt(2.0 * math.pi) * x)
    return envelope * (1.0 - 1.0 / (x * x)), qfunction(x), envelope


# ---------------------------------------------------------------------------
# Moments of tap-power sums
# ---------------------------------------------------------------------------

def excess_kurtosis(samples) -> float:
    """Empirical E[(X-mu)^4] / E[(X-mu)^2]^2 - 3."""
    x = np.asarray(samples, dtype=float)
    if x.size < 1000:
        raise ValueError("need at least 1e3 samples for a usable estimate")
    c = x - x.mean()
    m2 = np.mean(c ** 2)
    return float(np.mean(c ** 4) / m2 ** 2 - 3.0)


def excess_kurtosis_analytic(pdp: PowerDelayProfile) -> float:
    """Excess kurtosis of the tap-power sum: 6 ||a||_4^4 / ||a||_2^4.

    Follows from cumulant additivity of the independent per-tap exponential
    powers; any common variance scale (such as the IRS array factor N+1)
    cancels.
    """
    a = pdp.taps
    return float(6.0 * np.sum(a ** 4) / np.sum(a ** 2) ** 2)


def lyapunov_condition(pdp: PowerDelayProfile, delta: float = 1.0) -> float:
    """CLT diagnostic 2 ||a||_3^3 / ||a||_2^3 (the delta = 1 statistic).

    Decays toward zero as the number of taps grows, which is what licenses
    the Gaussian treatment of the tap-power sum.
    """
    if delta != 1.0:
        raise ValueError("only the delta=1 statistic is implemented")
    a = pdp.taps
    return float(2.0 * np.sum(a ** 3) / np.sum(a ** 2) ** 1.5)
