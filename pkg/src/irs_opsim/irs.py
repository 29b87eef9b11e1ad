"""Reflection-phase strategies and composite end-to-end channels.

The IRS applies a diagonal matrix of unit-modulus coefficients e^{j theta_i}
to whatever impinges on it.  Three ways of picking theta are implemented:
element-wise uniform phases, the DoD-aware linear-phase draw (a single
random slope shared by all elements) and the genie beamforming
configuration that co-phases every reflected product term with the direct
path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import NarrowbandChannelSet, SteeringChannelSet, WidebandChannelSet
from .core import LinkBudget

TWO_PI = 2.0 * np.pi


def wrap_phases(theta: np.ndarray) -> np.ndarray:
    return np.mod(theta, TWO_PI)


def sample_uniform_phases(n: int, rng: np.random.Generator) -> np.ndarray:
    """theta_i i.i.d. U[0, 2pi)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return rng.uniform(0.0, TWO_PI, size=n)


def dod_aware_slope(theta_a: float, phi: float, d_over_lambda: float) -> float:
    """Per-element phase increment 2 pi d/lambda (sin DoA + sin phi)."""
    return TWO_PI * d_over_lambda * (np.sin(theta_a) + np.sin(phi))


def sample_dod_aware_phases(n: int, theta_a: float, phi0: float, phi1: float,
                            d_over_lambda: float,
                            rng: np.random.Generator) -> np.ndarray:
    """Linear-phase configuration from one shared draw phi ~ U[phi0, phi1].

    theta_i = 2 pi (i-1) d/lambda (sin theta_A + sin phi); a single phi per
    slot keeps the steering structure (independent per-element draws would
    destroy it).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    half_pi = np.pi / 2
    if not (-half_pi < phi0 <= phi1 < half_pi):
        raise ValueError("support must lie inside (-pi/2, pi/2)")
    phi = rng.uniform(phi0, phi1)
    return wrap_phases(np.arange(n) * dod_aware_slope(theta_a, phi, d_over_lambda))


# ---------------------------------------------------------------------------
# Strategy objects (config-facing wrappers over the samplers above)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UniformIID:
    """Element-wise i.i.d. U[0, 2pi) phases, one fresh draw per slot."""

    def sample_phases(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return sample_uniform_phases(n, rng)


@dataclass(frozen=True)
class DodAware:
    """Linear-phase draw matched to the users' departure-angle statistics."""

    phi0: float
    phi1: float
    theta_a: float
    d_over_lambda: float = 0.5

    def __post_init__(self):
        half_pi = np.pi / 2
        if not (-half_pi < self.phi0 <= self.phi1 < half_pi):
            raise ValueError("DoD support must lie inside (-pi/2, pi/2)")

    def sample_phases(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return sample_dod_aware_phases(n, self.theta_a, self.phi0, self.phi1,
                                       self.d_over_lambda, rng)


@dataclass(frozen=True)
class BeamformingOracle:
    """Genie configuration: needs the realized channel, not a random draw."""

    def configure(self, ch: NarrowbandChannelSet, budget: LinkBudget,
                  k: int) -> tuple[np.ndarray, float]:
        return beamforming_oracle(ch, budget, k)


PhaseStrategy = UniformIID | DodAware | BeamformingOracle


# ---------------------------------------------------------------------------
# Composite channels
# ---------------------------------------------------------------------------

def effective_channel_narrowband(theta: np.ndarray, ch: NarrowbandChannelSet,
                                 budget: LinkBudget, k: int | None = None):
    """h_k = sqrt(beta_r) h_2k^H Theta h_1 + sqrt(beta_d) h_dk.

    Vectorised over all users when ``k`` is None.
    """
    reflected = np.conj(ch.h2) @ (np.exp(1j * np.asarray(theta)) * ch.h1)
    h = np.sqrt(budget.beta_r) * reflected + np.sqrt(budget.beta_d) * ch.hd
    return h if k is None else h[k]


def effective_channel_steering(theta: np.ndarray, ch: SteeringChannelSet,
                               beta, k: int | None = None):
    """h_k = sqrt(beta) h'_k sum_n e^{-j (n-1) theta'_k + j theta_n}."""
    theta = np.asarray(theta)
    n = theta.size
    align = np.exp(-1j * np.outer(ch.theta_prime, np.arange(n)))  # (K, N)
    h = np.sqrt(np.asarray(beta)) * ch.h_prime * (align @ np.exp(1j * theta))
    return h if k is None else h[k]


def effective_channel_wideband(theta: np.ndarray, ch: WidebandChannelSet,
                               k: int | None = None):
    """Per-tap composite h_{k,l} = h_{d,k,l} + sum_i e^{j theta_i} h1_i h2_{k,l,i}.

    One common phase configuration covers the whole band; returns (K, L)
    or a single user's (L,) tap vector.
    """
    weights = np.exp(1j * np.asarray(theta)) * ch.h1  # (N,)
    kk, ll, nn = ch.h2_taps.shape
    reflected = (ch.h2_taps.reshape(kk * ll, nn) @ weights).reshape(kk, ll)
    h = ch.hd_taps + reflected
    return h if k is None else h[k]


def beamforming_oracle(ch: NarrowbandChannelSet, budget: LinkBudget,
                       k: int) -> tuple[np.ndarray, float]:
    """Phases that co-phase every reflected term with the direct path.

    Aligning each product term conj(h_2kn) h_1n with the phase of h_dk turns
    the composite magnitude into sqrt(beta_r) sum_n |h_1n h_2kn| +
    sqrt(beta_d) |h_dk|, the maximum achievable over all configurations.
    Returns (theta, rate in bits/s/Hz).
    """
    product = np.conj(ch.h2[k]) * ch.h1
    theta = wrap_phases(np.angle(ch.hd[k]) - np.angle(product))
    amp = (np.sqrt(budget.beta_r[k]) * np.abs(product).sum()
           + np.sqrt(budget.beta_d[k]) * np.abs(ch.hd[k]))
    rate = float(np.log2(1.0 + budget.p_over_sigma2 * amp ** 2))
    return theta, rate


def bf_rates_all_users(ch: NarrowbandChannelSet, budget: LinkBudget) -> np.ndarray:
    """Beamforming rate of every user (vectorised oracle magnitude)."""
    amp = (np.sqrt(budget.beta_r) * np.abs(np.conj(ch.h2) * ch.h1).sum(axis=1)
           + np.sqrt(budget.beta_d) * np.abs(ch.hd))
    return np.log2(1.0 + budget.p_over_sigma2 * amp ** 2)


def dirichlet_kernel_gain(delta, n: int):
    """Array gain |sum_{i=0}^{n-1} e^{j i delta}|^2 = sin^2(n d/2)/sin^2(d/2)."""
    delta = np.asarray(delta, dtype=float)
    s = np.sin(delta / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = np.sin(n * delta / 2.0) ** 2 / s ** 2
    out = np.where(np.abs(s) < 1e-9, _limit_gain(delta, n), gain)
    return float(out) if np.ndim(delta) == 0 else out


def _limit_gain(delta, n):
    # Near multiples of 2 pi the kernel tends to n^2; second-order term keeps
    # the replacement smooth for |sin(delta/2)| just under the cutoff.
    return n ** 2 * (1.0 - (n ** 2 - 1.0) * np.sin(np.asarray(delta) / 2.0) ** 2 / 3.0)


# ---------------------------------------------------------------------------
# Convergence bookkeeping for i.i.d. random phases
# ---------------------------------------------------------------------------

def users_required(p_succ: float, epsilon: float, n: int) -> float:
    """Users needed so one of them sees a near-beamforming i.i.d. draw.

    Returns (-ln(1 - p_succ)) * (pi/epsilon)^N, the small-epsilon bound on K
    for success probability p_succ when all N phases must simultaneously
    fall within +-epsilon of a user's beamforming configuration.
    """
    if not 0.0 < p_succ < 1.0:
        raise ValueError("p_succ must lie in (0, 1)")
    if not 0.0 < epsilon <= np.pi:
        raise ValueError("epsilon must lie in (0, pi]")
    return -np.log(1.0 - p_succ) * (np.pi / epsilon) ** n


def exact_success_probability(epsilon: float, n: int, k: float) -> float:
    """P(at least one of k users within epsilon on every element)."""
    q = (epsilon / np.pi) ** n
    return 1.0 - (1.0 - q) ** k
