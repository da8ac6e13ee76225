"""Complex baseband channel gains between pinching antennas and ground users.

Each antenna-user link combines a spherical-wave direct component, gated by
the binary LoS indicator, with an unconditional scatterer-relayed component.
All gains are in natural (linear) units; magnitudes near a few 1e-4 at
28 GHz and desk-scale distances, comfortably inside double precision.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Blockage, Vec3, blocked_pairs

SPEED_OF_LIGHT = 2.99792458e8  # m/s


@dataclass(frozen=True)
class RadioConstants:
    """Carrier-derived constants; wavelength and the free-space coefficient
    are computed, never hard-coded."""

    carrier_frequency_hz: float
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self) -> None:
        if self.carrier_frequency_hz <= 0 or self.speed_of_light <= 0:
            raise ValueError("carrier frequency and propagation speed must be positive")

    @property
    def wavelength(self) -> float:
        """Carrier wavelength in meters."""
        return self.speed_of_light / self.carrier_frequency_hz

    @property
    def path_loss_coefficient(self) -> float:
        """Free-space amplitude coefficient c / (4 pi f), in meters."""
        return self.speed_of_light / (4.0 * math.pi * self.carrier_frequency_hz)


@dataclass(frozen=True)
class Scatterer:
    """Point scatterer on the floor with a complex path gain."""

    position: Vec3
    gain: complex

    def __post_init__(self) -> None:
        if self.position.z != 0.0:
            raise ValueError("scatterers live on the floor (z = 0)")


@dataclass(frozen=True)
class ChannelTensor:
    """Per-(waveguide, antenna, user) channel state.

    ``gains`` holds the mixed complex channel, ``los`` the binary direct-path
    indicator, and ``distances`` the antenna-user Euclidean separation. The
    waveguide count always equals the user count.
    """

    gains: np.ndarray      # complex128, shape (K, M, N)
    los: np.ndarray        # int8 in {0, 1},  shape (K, M, N)
    distances: np.ndarray  # float64,         shape (K, M, N)

    def __post_init__(self) -> None:
        if self.gains.shape != self.los.shape or self.gains.shape != self.distances.shape:
            raise ValueError("gains, los and distances must share one shape")
        if self.gains.ndim != 3:
            raise ValueError("channel tensor must be 3-dimensional")
        if self.gains.shape[0] != self.gains.shape[2]:
            raise ValueError("one waveguide per user: first and last dims must match")
        if not np.isin(self.los, (0, 1)).all():
            raise ValueError("LoS indicators must be binary")
        if not np.isfinite(self.gains).all():
            raise ValueError("channel gains must be finite")

    @property
    def num_waveguides(self) -> int:
        return self.gains.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.gains.shape[1]

    @property
    def num_users(self) -> int:
        return self.gains.shape[2]


def los_component(antenna: Vec3, user: Vec3, radio: RadioConstants) -> complex:
    """Spherical-wave direct-path gain: coefficient / r with phase -2 pi r / lambda."""
    r = antenna.distance_to(user)
    if r == 0.0:
        raise ValueError("antenna and user coincide; direct gain undefined")
    eta = radio.path_loss_coefficient
    return eta * cmath.exp(-2j * math.pi * r / radio.wavelength) / r


def nlos_component(
    antenna: Vec3,
    user: Vec3,
    scatterers: Sequence[Scatterer],
    radio: RadioConstants,
) -> complex:
    """Sum of single-bounce scatterer paths; an empty list gives exactly zero.

    Each path accumulates the user-scatterer and antenna-scatterer legs in
    both its phase and its product-of-distances amplitude. Scatterer paths
    are never occluded by blockages.
    """
    eta = radio.path_loss_coefficient
    wavelength = radio.wavelength
    total = 0.0 + 0.0j
    for scatterer in scatterers:
        r_user = user.distance_to(scatterer.position)
        r_ant = antenna.distance_to(scatterer.position)
        if r_user == 0.0 or r_ant == 0.0:
            raise ValueError("scatterer coincides with a link endpoint")
        phase = cmath.exp(-2j * math.pi * (r_user + r_ant) / wavelength)
        total += scatterer.gain * eta * phase / (r_user * r_ant)
    return total


def mixed_channel(los_flag: int, h_los: complex, h_nlos: complex) -> complex:
    """Gate the direct component by the LoS indicator and add the NLoS part."""
    if los_flag not in (0, 1):
        raise ValueError("LoS indicator must be 0 or 1")
    return los_flag * h_los + h_nlos


def build_channel_tensor(scenario) -> ChannelTensor:
    """Populate the full (K, M, N) channel tensor for one scenario.

    Deterministic: scatterer gains are part of the scenario, so two calls on
    the same scenario produce bit-identical arrays. Arrays are marked
    read-only.
    """
    num_waveguides = scenario.num_waveguides
    num_antennas = scenario.num_antennas
    num_users = scenario.num_users
    radio = scenario.radio
    eta = radio.path_loss_coefficient
    wavelength = radio.wavelength

    antennas = np.empty((num_waveguides * num_antennas, 3), dtype=float)
    antennas[:, 0] = np.tile(np.asarray(scenario.antenna_x, dtype=float), num_waveguides)
    antennas[:, 1] = np.repeat(np.asarray(scenario.waveguide_y, dtype=float), num_antennas)
    antennas[:, 2] = scenario.region.height
    users = np.array([u.as_array() for u in scenario.users])

    diff = users[None, :, :] - antennas[:, None, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))  # (A, N)

    clear = np.ones(dist.shape, dtype=bool)
    for blockage in scenario.blockages:
        clear &= ~blocked_pairs(antennas, users, blockage)
    los = clear.astype(np.int8)

    direct = eta * np.exp(-2j * np.pi * dist / wavelength) / dist
    gains = np.where(los.astype(bool), direct, 0.0 + 0.0j)

    if scenario.scatterers:
        scat_pos = np.array([s.position.as_array() for s in scenario.scatterers])
        scat_gain = np.array([s.gain for s in scenario.scatterers], dtype=complex)
        r_user = np.sqrt(((users[:, None, :] - scat_pos[None, :, :]) ** 2).sum(axis=-1))   # (N, L)
        r_ant = np.sqrt(((antennas[:, None, :] - scat_pos[None, :, :]) ** 2).sum(axis=-1))  # (A, L)
        leg_sum = r_ant[:, None, :] + r_user[None, :, :]          # (A, N, L)
        leg_prod = r_ant[:, None, :] * r_user[None, :, :]
        paths = scat_gain * eta * np.exp(-2j * np.pi * leg_sum / wavelength) / leg_prod
        gains = gains + paths.sum(axis=-1)

    shape = (num_waveguides, num_antennas, num_users)
    gains = np.ascontiguousarray(gains.reshape(shape))
    los = np.ascontiguousarray(los.reshape(shape))
    dist = np.ascontiguousarray(dist.reshape(shape))
    if dist.min() < scenario.region.height - 1e-9:
        raise ValueError("antenna-user distance below mounting height; bad geometry")
    for arr in (gains, los, dist):
        arr.flags.writeable = False
    return ChannelTensor(gains=gains, los=los, distances=dist)


def effective_channel(tensor: ChannelTensor, waveguide: int, activation, user: int) -> complex:
    """Channel seen by ``user`` from ``waveguide`` at its activated antenna.

    With exactly one active antenna per waveguide the activation sum collapses
    to a single tensor entry.
    """
    antenna = activation[waveguide]
    if not 0 <= antenna < tensor.num_antennas:
        raise IndexError(f"activation index {antenna} outside [0, {tensor.num_antennas})")
    return complex(tensor.gains[waveguide, antenna, user])
