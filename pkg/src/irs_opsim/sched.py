"""User-selection policies and instantaneous rate computation.

Selection operations are pure; SchedulerState carries the per-user
long-term throughput trackers T_k for the proportional-fair rule and a
slot counter for round-robin.  Every argmax breaks ties toward the lowest
index so reruns are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

T_INIT = 1e-6  # bits/s/Hz; keeps the PF metric finite before the first grant


@dataclass
class SchedulerState:
    t_k: np.ndarray
    slot_index: int = 0

    @classmethod
    def fresh(cls, k: int) -> "SchedulerState":
        return cls(t_k=np.full(k, T_INIT), slot_index=0)


@dataclass
class SlotDecision:
    selected_user: int | np.ndarray
    achieved_rate: float
    selected_pilot_index: int | None = None
    feedback_bits: int = 0


def instantaneous_rate(h, p_over_sigma2: float):
    """log2(1 + P/sigma^2 |h|^2); h may be complex scalar or array."""
    if p_over_sigma2 <= 0:
        raise ValueError("p_over_sigma2 must be positive")
    return np.log2(1.0 + p_over_sigma2 * np.abs(np.asarray(h)) ** 2)


def select_max_rate(rates) -> int:
    return int(np.argmax(rates))


def select_pf(rates, state: SchedulerState) -> int:
    if np.any(state.t_k <= 0):
        raise ValueError("PF trackers must be positive")
    return int(np.argmax(np.asarray(rates) / state.t_k))


def update_pf_state(state: SchedulerState, selected: int, rate: float,
                    tau: float) -> SchedulerState:
    """T_k <- (1 - 1/tau) T_k everywhere, plus rate/tau for the served user."""
    if tau <= 1:
        raise ValueError("tau must exceed 1")
    t = state.t_k * (1.0 - 1.0 / tau)
    t[selected] += rate / tau
    return SchedulerState(t_k=t, slot_index=state.slot_index + 1)


def select_round_robin(state: SchedulerState, k: int | None = None) -> int:
    n = state.t_k.size if k is None else k
    return state.slot_index % n


def _pick(rates, state: SchedulerState | None) -> int:
    return select_max_rate(rates) if state is None else select_pf(rates, state)


def select_qpilot(snr_matrix, zeta: float,
                  state: SchedulerState | None = None) -> SlotDecision:
    """Best (user, pilot) pair over a K x Q grid of measured SNRs.

    The achieved rate carries the (1 - zeta*Q) pre-log for the Q pilot
    transmissions; the PF metric, when a state is given, weighs each user's
    best-configuration rate by its tracker.
    """
    snr = np.atleast_2d(np.asarray(snr_matrix, dtype=float))
    q = snr.shape[1]
    prelog = 1.0 - zeta * q
    if prelog <= 0:
        raise ValueError("zeta*Q must stay below 1")
    rates = np.log2(1.0 + snr)
    per_user = rates.max(axis=1)
    k_star = _pick(per_user, state)
    q_star = int(np.argmax(rates[k_star]))
    return SlotDecision(selected_user=k_star,
                        achieved_rate=float(prelog * rates[k_star, q_star]),
                        selected_pilot_index=q_star,
                        feedback_bits=int(np.ceil(np.log2(q))) if q > 1 else 0)


def select_su_ofdm(freq_channels, p_over_m_sigma2: float,
                   state: SchedulerState | None = None) -> SlotDecision:
    """Grant the whole band to the user with the best sum rate across it."""
    h = np.atleast_2d(np.asarray(freq_channels))
    sums = np.log2(1.0 + p_over_m_sigma2 * np.abs(h) ** 2).sum(axis=1)
    k_star = _pick(sums, state)
    return SlotDecision(selected_user=k_star, achieved_rate=float(sums[k_star]))


def select_ofdma(freq_channels, p_over_m_sigma2: float) -> SlotDecision:
    """Per-subcarrier grants to the per-subcarrier best user."""
    h = np.atleast_2d(np.asarray(freq_channels))
    gains = np.abs(h) ** 2
    users = np.argmax(gains, axis=0)
    best = gains.max(axis=0)
    rate = float(np.log2(1.0 + p_over_m_sigma2 * best).sum())
    return SlotDecision(selected_user=users, achieved_rate=rate,
                        feedback_bits=0)
