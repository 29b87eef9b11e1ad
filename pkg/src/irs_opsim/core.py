"""Units, geometry, link budgets and the deterministic randomness contract.

Everything downstream works in linear watts internally; dBm enters and
leaves only at the config boundary (1 mW reference).  The default numbers
reproduce the single-cell deployment used throughout the experiments:
BS at the origin, IRS 250 m north of it, users uniform in a 400 m x 500 m
rectangle, with distinct path-loss exponents on the BS-IRS, IRS-user and
direct BS-user links.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, replace

import numpy as np

BOLTZMANN = 1.380649e-23  # J/K

SCHEMES = (
    "UniformRandom",
    "QPilot",
    "ChannelAware",
    "SUOFDM",
    "OFDMA",
    "Beamforming",
    "NoIRS",
)
SCHEDULERS = ("MaxRate", "ProportionalFair", "RoundRobin")


class ConfigError(ValueError):
    """A config value violates one of the documented invariants."""


# ---------------------------------------------------------------------------
# dB / linear conversions
# ---------------------------------------------------------------------------

def db_to_linear(x_db):
    """10^(x/10).  For dBm inputs divide the result by 1000 to get watts."""
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0) if np.ndim(x_db) else 10.0 ** (float(x_db) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_watts(x_dbm):
    return db_to_linear(x_dbm) * 1e-3


def watts_to_dbm(w):
    return linear_to_db(w) + 30.0


def thermal_noise_dbm(temperature_k: float, bandwidth_hz: float) -> float:
    """Thermal noise power k_B*T*B expressed in dBm."""
    if temperature_k <= 0 or bandwidth_hz <= 0:
        raise ValueError("temperature and bandwidth must be positive")
    return watts_to_dbm(BOLTZMANN * temperature_k * bandwidth_hz)


def path_loss(distance_m, exponent: float):
    """Linear power gain d^-alpha of a link of length ``distance_m``."""
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    out = d ** (-float(exponent))
    return float(out) if np.ndim(distance_m) == 0 else out


# ---------------------------------------------------------------------------
# Deterministic randomness
# ---------------------------------------------------------------------------

def stream(master_seed: int, trial_index: int = 0, slot_index: int = 0,
           purpose: str = "") -> np.random.Generator:
    """Derive an independent generator from (seed, trial, slot, purpose).

    Identical tuples always yield identical generators; distinct tuples yield
    statistically independent ones.  All randomness in the package flows
    through this function, which is what makes reruns byte-reproducible.
    """
    tag = zlib.crc32(purpose.encode("utf-8"))
    ss = np.random.SeedSequence((int(master_seed) & 0xFFFFFFFFFFFFFFFF,
                                 int(trial_index), int(slot_index), tag))
    return np.random.Generator(np.random.PCG64(ss))


# ---------------------------------------------------------------------------
# Geometry and link budgets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Geometry:
    """Planar deployment geometry, coordinates in metres."""

    bs_position: tuple = (0.0, 0.0)
    irs_position: tuple = (0.0, 250.0)
    region_corner_a: tuple = (100.0, 500.0)
    region_corner_b: tuple = (500.0, 1000.0)
    alpha_bs_irs: float = 2.0
    alpha_irs_user: float = 2.8
    alpha_bs_user: float = 3.6

    def validate(self):
        if tuple(self.region_corner_a) == tuple(self.region_corner_b):
            # position sampling itself copes with degenerate rectangles, but
            # a validated deployment needs a real region
            raise ConfigError("user_region corners must be distinct")
        for a in (self.alpha_bs_irs, self.alpha_irs_user, self.alpha_bs_user):
            if not a > 0:
                raise ConfigError("path-loss exponents must be positive")

    def bs_irs_distance(self) -> float:
        return float(np.hypot(self.irs_position[0] - self.bs_position[0],
                              self.irs_position[1] - self.bs_position[1]))

    def corners(self) -> np.ndarray:
        (x0, y0), (x1, y1) = self.region_corner_a, self.region_corner_b
        return np.array([[x0, y0], [x1, y0], [x0, y1], [x1, y1]])


def sample_user_positions(geometry: Geometry, k: int,
                          rng: np.random.Generator) -> np.ndarray:
    """k i.i.d. uniform points in the user rectangle, shape (k, 2)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    (x0, y0), (x1, y1) = geometry.region_corner_a, geometry.region_corner_b
    lo = np.array([min(x0, x1), min(y0, y1)])
    hi = np.array([max(x0, x1), max(y0, y1)])
    return lo + (hi - lo) * rng.random((k, 2))


def distances_from(point, positions) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    return np.hypot(pos[:, 0] - p[0], pos[:, 1] - p[1])


def mean_region_gain(geometry: Geometry, link: str = "direct",
                     n_quad: int = 64) -> float:
    """Average linear path gain over the user rectangle (Gauss-Legendre).

    link="direct" averages d_bs^-alpha_d; link="irs" averages the cascaded
    d_bi^-alpha_1 * d_iu^-alpha_2 product gain.  Deterministic, so it can be
    used to define the equal-path-loss analysis mode.
    """
    (x0, y0), (x1, y1) = geometry.region_corner_a, geometry.region_corner_b
    gx, gw = np.polynomial.legendre.leggauss(n_quad)
    xs = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * gx
    ys = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * gx
    X, Y = np.meshgrid(xs, ys)
    W = np.outer(gw, gw) / 4.0  # weights normalised to the unit square
    if link == "direct":
        bx, by = geometry.bs_position
        d = np.hypot(X - bx, Y - by)
        return float(np.sum(W * d ** (-geometry.alpha_bs_user)))
    if link == "irs":
        ix, iy = geometry.irs_position
        d = np.hypot(X - ix, Y - iy)
        cascade = geometry.bs_irs_distance() ** (-geometry.alpha_bs_irs)
        return float(cascade * np.sum(W * d ** (-geometry.alpha_irs_user)))
    raise ValueError(f"unknown link {link!r}")


@dataclass
class LinkBudget:
    """Per-user linear gains plus the transmit-power-to-noise ratio.

    beta_r is the cascaded BS-IRS-user gain, beta_d the direct BS-user gain.
    In the equal-path-loss analysis mode both arrays are constant and equal,
    and ``snr_ref`` = beta * P / sigma^2 is the single reference SNR the
    closed-form laws use.
    """

    beta_r: np.ndarray
    beta_d: np.ndarray
    p_over_sigma2: float

    def __post_init__(self):
        self.beta_r = np.atleast_1d(np.asarray(self.beta_r, dtype=float))
        self.beta_d = np.atleast_1d(np.asarray(self.beta_d, dtype=float))
        if np.any(self.beta_r <= 0) or np.any(self.beta_d <= 0):
            raise ConfigError("link gains must be strictly positive")
        if not np.isfinite(self.p_over_sigma2) or self.p_over_sigma2 <= 0:
            raise ConfigError("P/sigma^2 must be positive and finite")

    @property
    def n_users(self) -> int:
        return self.beta_r.size

    @property
    def snr_ref(self) -> float:
        """beta * P / sigma^2, defined for the equal-beta mode."""
        if not (np.ptp(self.beta_r) == 0 and np.ptp(self.beta_d) == 0
                and self.beta_r[0] == self.beta_d[0]):
            raise ValueError("snr_ref is only defined when beta_r == beta_d == const")
        return float(self.beta_r[0] * self.p_over_sigma2)


def budget_from_positions(geometry: Geometry, positions,
                          tx_power_dbm: float, noise_dbm: float) -> LinkBudget:
    """Per-user budget from actual positions in the deployment."""
    d_direct = distances_from(geometry.bs_position, positions)
    d_irs = distances_from(geometry.irs_position, positions)
    beta_d = path_loss(d_direct, geometry.alpha_bs_user)
    beta_r = (path_loss(geometry.bs_irs_distance(), geometry.alpha_bs_irs)
              * path_loss(d_irs, geometry.alpha_irs_user))
    p = dbm_to_watts(tx_power_dbm) / dbm_to_watts(noise_dbm)
    return LinkBudget(beta_r=beta_r, beta_d=beta_d, p_over_sigma2=p)


def equal_beta_budget(k: int, beta: float, tx_power_dbm: float,
                      noise_dbm: float) -> LinkBudget:
    """Equal-path-loss analysis budget: beta_r = beta_d = beta for everyone."""
    p = dbm_to_watts(tx_power_dbm) / dbm_to_watts(noise_dbm)
    b = np.full(k, float(beta))
    return LinkBudget(beta_r=b, beta_d=b.copy(), p_over_sigma2=p)


def budget_from_snr(k: int, snr_db: float) -> LinkBudget:
    """Equal budget pinned directly by a reference SNR in dB (beta*P/sigma^2)."""
    b = np.full(k, 1.0)
    return LinkBudget(beta_r=b, beta_d=b.copy(), p_over_sigma2=db_to_linear(snr_db))


# ---------------------------------------------------------------------------
# System configuration
# ---------------------------------------------------------------------------

@dataclass
class SystemConfig:
    """One scenario's knobs.  Defaults reproduce the single-cell deployment."""

    n_irs_elements: int = 8           # N
    n_users: int = 16                 # K
    tx_power_dbm: float = -10.0       # P
    noise_dbm: float = -117.83        # sigma^2 (400 kHz at 300 K)
    pf_window_tau: float = 5000.0     # tau
    pilot_fraction_zeta: float = 0.01  # zeta
    scheme: str = "UniformRandom"
    scheduler: str = "ProportionalFair"
    n_slots: int = 500
    n_trials: int = 200
    master_seed: int = 20250809
    element_spacing_over_lambda: float = 0.5  # d / lambda

    # Scheme-specific extras (all defaulted so a flat scenario file can stay
    # minimal).  n_pilots is Q, n_subcarriers is M, n_taps is L.
    # pf_burn_in_slots discards the scheduler's cold-start transient (the
    # trackers need a few windows tau to equilibrate) before averaging.
    pf_burn_in_slots: int = 0
    n_pilots: int = 1
    n_subcarriers: int = 1024
    n_taps: int = 25
    pdp_decay_nu: float = 1.0
    gm_alpha: float = 0.9             # Gauss-Markov correlation
    theta_a_deg: float = 20.0         # DoA at the IRS
    dod_min_deg: float = -40.0
    dod_max_deg: float = 40.0
    equal_path_loss: bool = False     # analysis mode: beta_r = beta_d = mean beta
    snr_db: float | None = None       # overrides the geometry budget when set

    def validate(self, geometry: Geometry | None = None) -> None:
        if self.n_irs_elements < 1:
            raise ConfigError("n_irs_elements must be >= 1")
        if self.n_users < 1:
            raise ConfigError("n_users must be >= 1")
        if self.n_slots < 1 or self.n_trials < 1:
            raise ConfigError("n_slots and n_trials must be >= 1")
        for name in ("tx_power_dbm", "noise_dbm"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if self.tx_power_dbm <= -190.0:
            raise ConfigError("tx_power_dbm is below any usable power")
        if not self.pf_window_tau > 1:
            raise ConfigError("pf_window_tau must exceed 1")
        if not 0 <= self.pilot_fraction_zeta < 1:
            raise ConfigError("pilot_fraction_zeta must lie in [0, 1)")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}")
        if self.scheduler not in SCHEDULERS:
            raise ConfigError(f"scheduler must be one of {SCHEDULERS}")
        if self.element_spacing_over_lambda <= 0:
            raise ConfigError("element_spacing_over_lambda must be positive")
        if self.n_pilots < 1 or self.n_subcarriers < 1 or self.n_taps < 1:
            raise ConfigError("n_pilots, n_subcarriers and n_taps must be >= 1")
        if self.pf_burn_in_slots < 0:
            raise ConfigError("pf_burn_in_slots must be >= 0")
        if self.scheme == "QPilot" and \
                self.pilot_fraction_zeta * self.n_pilots >= 1:
            raise ConfigError(
                "pilot_fraction: zeta*Q must stay below 1, otherwise no "
                "time remains for data")
        if self.n_subcarriers < self.n_taps:
            raise ConfigError("n_subcarriers must be >= n_taps")
        if self.pdp_decay_nu <= 0:
            raise ConfigError("pdp_decay_nu must be positive")
        if not (-90.0 < self.dod_min_deg <= self.dod_max_deg < 90.0):
            raise ConfigError("DoD support must be an interval inside (-90, 90) deg")
        if geometry is not None:
            geometry.validate()

    def with_overrides(self, **kw) -> "SystemConfig":
        return replace(self, **kw)

    @property
    def p_over_sigma2(self) -> float:
        return dbm_to_watts(self.tx_power_dbm) / dbm_to_watts(self.noise_dbm)
