"""Per-slot fading channel generators.

Four channel families are supported:

* narrowband i.i.d. Rayleigh (all links CN(0,1)),
* a Gauss-Markov AR(1) evolution of any complex vector,
* LoS steering-vector channels for a ULA-shaped IRS (one Rayleigh scalar
  per user times deterministic unit-modulus steering phases),
* L-tap wideband channels with an exponentially decaying power delay
  profile, plus the unnormalised DFT that maps taps to subcarriers.

Generators are pure given a Generator instance, so concurrent trials
simply use disjoint streams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def cn_samples(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0,1) samples (circularly symmetric, unit power)."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def steering_vector(n: int, angle_rad, d_over_lambda: float) -> np.ndarray:
    """ULA steering response [1, e^{-j2pi d/l sin}, ..., e^{-j2pi(N-1)d/l sin}].

    ``angle_rad`` may be a scalar or an array; the element axis is last.
    """
    idx = np.arange(n)
    phase = 2.0 * np.pi * d_over_lambda * np.sin(np.asarray(angle_rad, dtype=float))
    return np.exp(-1j * np.multiply.outer(phase, idx))


# ---------------------------------------------------------------------------
# Narrowband
# ---------------------------------------------------------------------------

@dataclass
class NarrowbandChannelSet:
    h1: np.ndarray   # (N,)   BS -> IRS
    h2: np.ndarray   # (K, N) IRS -> user, one row per user
    hd: np.ndarray   # (K,)   direct BS -> user


def gen_narrowband(n: int, k: int, rng: np.random.Generator,
                   los_h1: bool = False, theta_a: float = 0.0,
                   d_over_lambda: float = 0.5) -> NarrowbandChannelSet:
    """All entries i.i.d. CN(0,1).

    With ``los_h1=True`` the static BS-IRS link is replaced by its
    deterministic unit-modulus steering response (the fixed-deployment
    model); h2 and hd stay Rayleigh.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    if los_h1:
        h1 = steering_vector(n, theta_a, d_over_lambda)
    else:
        h1 = cn_samples(rng, n)
    return NarrowbandChannelSet(h1=h1, h2=cn_samples(rng, (k, n)),
                                hd=cn_samples(rng, k))


def evolve_gauss_markov(prev: np.ndarray, alpha: float,
                        rng: np.random.Generator) -> np.ndarray:
    """h(t) = alpha*h(t-1) + sqrt(1-alpha^2)*v,  v ~ CN(0,1) i.i.d.

    Keeps the stationary CN(0,1) marginal for any alpha in [0,1].
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    prev = np.asarray(prev)
    return alpha * prev + np.sqrt(1.0 - alpha ** 2) * cn_samples(rng, prev.shape)


# ---------------------------------------------------------------------------
# LoS steering-vector channels
# ---------------------------------------------------------------------------

@dataclass
class SteeringChannelSet:
    theta_a: float        # DoA at the IRS, radians
    theta_d: np.ndarray   # (K,) per-user DoD, radians
    h_prime: np.ndarray   # (K,) Rayleigh scalars, CN(0,1)
    d_over_lambda: float

    @property
    def theta_prime(self) -> np.ndarray:
        """Per-user total phase slope 2 pi d/lambda (sin DoA + sin DoD)."""
        return (2.0 * np.pi * self.d_over_lambda
                * (np.sin(self.theta_a) + np.sin(self.theta_d)))

    def h1(self, n: int) -> np.ndarray:
        return steering_vector(n, self.theta_a, self.d_over_lambda)

    def h2(self, n: int) -> np.ndarray:
        return self.h_prime[:, None] * steering_vector(n, self.theta_d,
                                                       self.d_over_lambda)


def gen_steering(n: int, k: int, theta_a: float, dod_support,
                 rng: np.random.Generator,
                 d_over_lambda: float = 0.5) -> SteeringChannelSet:
    """DoDs ~ U[phi0, phi1]; one CN(0,1) fading scalar per user."""
    phi0, phi1 = dod_support
    if phi0 > phi1:
        raise ValueError("dod_support must satisfy phi0 <= phi1")
    half_pi = np.pi / 2
    if not (-half_pi < phi0 and phi1 < half_pi):
        raise ValueError("dod_support must lie inside (-pi/2, pi/2)")
    theta_d = rng.uniform(phi0, phi1, size=k)
    return SteeringChannelSet(theta_a=float(theta_a), theta_d=theta_d,
                              h_prime=cn_samples(rng, k),
                              d_over_lambda=d_over_lambda)


# ---------------------------------------------------------------------------
# Wideband (L taps, exponential PDP)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerDelayProfile:
    taps: np.ndarray      # (L,) per-tap power, sums to 1 exactly
    nu: float

    @classmethod
    def exponential(cls, l: int, nu: float) -> "PowerDelayProfile":
        """a_l = c*exp(-nu*l/L), l = 1..L, with c fixing ||a||_1 = 1."""
        if l < 1:
            raise ValueError("l must be >= 1")
        if nu <= 0:
            raise ValueError("nu must be positive")
        a = np.exp(-nu * np.arange(1, l + 1) / l)
        a = a / a.sum()
        return cls(taps=a, nu=float(nu))

    @property
    def n_taps(self) -> int:
        return self.taps.size

    def norm(self, p: float) -> float:
        return float(np.sum(self.taps ** p) ** (1.0 / p))


@dataclass
class WidebandChannelSet:
    pdp: PowerDelayProfile
    h1: np.ndarray        # (N,)      single-tap LoS BS->IRS, unit modulus
    h2_taps: np.ndarray   # (K, L, N) IRS->user taps per element
    hd_taps: np.ndarray   # (K, L)    direct taps


def gen_wideband(n: int, k: int, l: int, nu: float, rng: np.random.Generator,
                 theta_a: float = 0.0,
                 d_over_lambda: float = 0.5) -> WidebandChannelSet:
    """Tap l of every link carries variance a_l; taps independent."""
    pdp = PowerDelayProfile.exponential(l, nu)
    scale = np.sqrt(pdp.taps)  # (L,)
    h1 = steering_vector(n, theta_a, d_over_lambda)
    h2 = cn_samples(rng, (k, l, n)) * scale[None, :, None]
    hd = cn_samples(rng, (k, l)) * scale[None, :]
    return WidebandChannelSet(pdp=pdp, h1=h1, h2_taps=h2, hd_taps=hd)


def to_frequency_domain(taps: np.ndarray, m: int) -> np.ndarray:
    """Unnormalised DFT of the zero-padded tap vector onto m subcarriers.

    X[mu] = sum_l x[l] e^{-j 2 pi mu l / m}, taps occupying lags 0..L-1.
    Parseval then reads sum_mu |X[mu]|^2 = m * sum_l |x[l]|^2.
    """
    taps = np.asarray(taps)
    if m < taps.shape[-1]:
        raise ValueError("m must be >= number of taps")
    return np.fft.fft(taps, n=m, axis=-1)
