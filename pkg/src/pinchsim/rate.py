"""Per-user SINR and achievable rate for a given assignment and activation.

Transmit power is split equally across waveguides; every waveguide carries
exactly one user's signal, so a user's interference is the power received
from all waveguides other than its own. Rates are spectral efficiencies in
bit/s/Hz.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .channel import ChannelTensor

if TYPE_CHECKING:  # pragma: no cover
    from .matching import Matching


@dataclass(frozen=True)
class PowerBudget:
    """Total transmit power, its equal per-waveguide split, and noise power (watts)."""

    total_power_w: float
    num_waveguides: int
    noise_power_w: float

    def __post_init__(self) -> None:
        if self.total_power_w <= 0:
            raise ValueError("total power must be positive")
        if self.noise_power_w <= 0:
            raise ValueError("noise power must be positive")
        if self.num_waveguides < 1:
            raise ValueError("need at least one waveguide")

    @property
    def per_waveguide_w(self) -> float:
        return self.total_power_w / self.num_waveguides


@dataclass(frozen=True)
class RateReport:
    """Per-user rates plus their sum, all in bit/s/Hz."""

    per_user: np.ndarray
    total: float


def dbm_to_watts(power_dbm: float) -> float:
    """Convert dBm to watts: 10^((p - 30) / 10)."""
    return 10.0 ** ((power_dbm - 30.0) / 10.0)


def _require_feasible(matching: "Matching", num_waveguides: int, num_antennas: int) -> None:
    assignment = matching.assignment
    activation = matching.activation
    if len(assignment) != num_waveguides:
        raise ValueError("assignment length must equal the user/waveguide count")
    if sorted(assignment) != list(range(num_waveguides)):
        raise ValueError("assignment must be a bijection between users and waveguides")
    if len(activation) != num_waveguides:
        raise ValueError("one activation entry per waveguide required")
    if any(not 0 <= a < num_antennas for a in activation):
        raise ValueError("activation index outside the antenna grid")


def _rate_vector(tensor: ChannelTensor, matching: "Matching", power: PowerBudget) -> np.ndarray:
    activation = np.asarray(matching.activation, dtype=int)
    assignment = np.asarray(matching.assignment, dtype=int)
    eff = np.abs(tensor.gains[np.arange(tensor.num_waveguides), activation, :]) ** 2  # (K, N)
    signal = eff[assignment, np.arange(tensor.num_users)]
    interference = eff.sum(axis=0) - signal
    p = power.per_waveguide_w
    sinr = p * signal / (p * interference + power.noise_power_w)
    return np.log2(1.0 + sinr)


def user_rate(tensor: ChannelTensor, matching: "Matching", power: PowerBudget, user: int) -> float:
    """Achievable rate of one user: log2(1 + S / (I + noise))."""
    if not 0 <= user < tensor.num_users:
        raise IndexError(f"user index {user} outside [0, {tensor.num_users})")
    _require_feasible(matching, tensor.num_waveguides, tensor.num_antennas)
    return float(_rate_vector(tensor, matching, power)[user])


def sum_rate(tensor: ChannelTensor, matching: "Matching", power: PowerBudget) -> RateReport:
    """All per-user rates and the sum-rate objective for one matching."""
    _require_feasible(matching, tensor.num_waveguides, tensor.num_antennas)
    rates = _rate_vector(tensor, matching, power)
    return RateReport(per_user=rates, total=float(rates.sum()))
