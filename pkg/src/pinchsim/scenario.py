"""Scenario construction: region, waveguide/antenna grid, seeded placement of
users and scatterers, blockage layout, and the fixed-antenna benchmark.

Randomness discipline: every scenario draw comes from named substreams of the
scenario seed (users, scatterer positions, scatterer gains, initial matching),
so regenerating a scenario is bit-reproducible and changing one sweep axis
never perturbs the other draws. Trial seeds derive from a master seed and the
trial index the same way.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .channel import RadioConstants, Scatterer
from .geometry import Blockage, Region, Vec3
from .matching import Matching
from .rate import PowerBudget, dbm_to_watts

# Fallback blockage footprint: six cylinders flanking the waveguide corridor.
# The layout is a documented default, overridable via ``blockage_centers``.
DEFAULT_BLOCKAGE_CENTERS: tuple[tuple[float, float], ...] = (
    (-2.5, -2.5),
    (-2.5, 0.0),
    (-2.5, 2.5),
    (2.5, -2.5),
    (2.5, 0.0),
    (2.5, 2.5),
)

_USER_STREAM = 0
_SCATTERER_POSITION_STREAM = 1
_SCATTERER_GAIN_STREAM = 2
_MATCHING_STREAM = 3


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs for scenario generation; defaults follow the reference setup
    (4 users/waveguides, 10 m x 10 m floor, 3 m mounting height, 28 GHz)."""

    num_users: int = 4
    num_antennas: int = 20
    region_width: float = 10.0
    region_depth: float = 10.0
    waveguide_height: float = 3.0
    carrier_frequency_hz: float = 28e9
    transmit_power_dbm: float = 20.0
    noise_power_dbm: float = -80.0
    num_scatterers: int = 3
    blockage_radius: float = 1.0
    blockage_height: float = 3.0
    blockage_centers: tuple[tuple[float, float], ...] | None = None
    waveguide_y: tuple[float, ...] | None = None


@dataclass(frozen=True)
class Scenario:
    """Immutable world description consumed by the channel builder."""

    region: Region
    waveguide_y: tuple[float, ...]
    antenna_x: tuple[float, ...]
    users: tuple[Vec3, ...]
    scatterers: tuple[Scatterer, ...]
    blockages: tuple[Blockage, ...]
    radio: RadioConstants
    power: PowerBudget
    seed: int

    def __post_init__(self) -> None:
        if len(self.users) != len(self.waveguide_y):
            raise ValueError("one waveguide per user required")
        if len(set(self.waveguide_y)) != len(self.waveguide_y):
            raise ValueError("waveguide y-coordinates must be pairwise distinct")
        if list(self.antenna_x) != sorted(set(self.antenna_x)):
            raise ValueError("antenna x-grid must be strictly increasing")
        for y in self.waveguide_y:
            if abs(y) > self.region.depth / 2:
                raise ValueError(f"waveguide at y={y} outside the region")
        for x in self.antenna_x:
            if abs(x) > self.region.width / 2:
                raise ValueError(f"antenna column at x={x} outside the region")
        for user in self.users:
            if user.z != 0.0 or not self.region.contains_xy(user.x, user.y):
                raise ValueError(f"user at {user} outside the region floor")
        for scatterer in self.scatterers:
            pos = scatterer.position
            if not self.region.contains_xy(pos.x, pos.y):
                raise ValueError(f"scatterer at {pos} outside the region")
        for blockage in self.blockages:
            if not self.region.contains_xy(blockage.center_x, blockage.center_y):
                raise ValueError("blockage center outside the region")

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def num_waveguides(self) -> int:
        return len(self.waveguide_y)

    @property
    def num_antennas(self) -> int:
        return len(self.antenna_x)


def _stream(seed: int, stream_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stream_id]))


def derive_trial_seed(master_seed: int, trial: int) -> int:
    """Per-trial scenario seed; depends only on (master seed, trial index)."""
    if master_seed < 0 or trial < 0:
        raise ValueError("seeds and trial indices must be non-negative")
    return int(np.random.SeedSequence([master_seed, trial]).generate_state(1, np.uint64)[0])


def default_waveguide_grid(num_waveguides: int) -> tuple[float, ...]:
    """Parallel waveguides 0.25 m apart, centered on y = 0.

    Reproduces the reference positions (-0.375, -0.125, 0.125, 0.375) for
    four waveguides and scales the same spacing to other counts.
    """
    return tuple(0.25 * (k - (num_waveguides - 1) / 2) for k in range(num_waveguides))


def antenna_grid(region_width: float, num_antennas: int) -> tuple[float, ...]:
    """Uniformly spaced antenna columns: x_m = -W/2 + (m + 1/2) W / M."""
    step = region_width / num_antennas
    return tuple(-region_width / 2 + (m + 0.5) * step for m in range(num_antennas))


def build_scenario(config: ScenarioConfig, seed: int) -> Scenario:
    """Generate a scenario from a config and a seed; pure and reproducible."""
    if config.num_users < 1:
        raise ValueError("need at least one user")
    if config.num_antennas < 1:
        raise ValueError("need at least one antenna per waveguide")
    if config.num_scatterers < 0:
        raise ValueError("scatterer count must be non-negative")
    if seed < 0:
        raise ValueError("seed must be non-negative")

    region = Region(config.region_width, config.region_depth, config.waveguide_height)
    waveguide_y = (
        tuple(config.waveguide_y)
        if config.waveguide_y is not None
        else default_waveguide_grid(config.num_users)
    )
    if len(waveguide_y) != config.num_users:
        raise ValueError("waveguide_y length must equal num_users")

    user_rng = _stream(seed, _USER_STREAM)
    xy = user_rng.uniform(
        low=(-region.width / 2, -region.depth / 2),
        high=(region.width / 2, region.depth / 2),
        size=(config.num_users, 2),
    )
    users = tuple(Vec3(float(x), float(y), 0.0) for x, y in xy)

    pos_rng = _stream(seed, _SCATTERER_POSITION_STREAM)
    gain_rng = _stream(seed, _SCATTERER_GAIN_STREAM)
    scatterers = []
    for _ in range(config.num_scatterers):
        sx, sy = pos_rng.uniform(
            low=(-region.width / 2, -region.depth / 2),
            high=(region.width / 2, region.depth / 2),
        )
        re, im = gain_rng.standard_normal(2)
        gain = complex(re, im) / np.sqrt(2.0)  # unit-variance complex normal
        scatterers.append(Scatterer(position=Vec3(float(sx), float(sy), 0.0), gain=gain))

    centers = (
        config.blockage_centers
        if config.blockage_centers is not None
        else DEFAULT_BLOCKAGE_CENTERS
    )
    blockages = tuple(
        Blockage(cx, cy, config.blockage_radius, config.blockage_height)
        for cx, cy in centers
    )

    return Scenario(
        region=region,
        waveguide_y=waveguide_y,
        antenna_x=antenna_grid(config.region_width, config.num_antennas),
        users=users,
        scatterers=tuple(scatterers),
        blockages=blockages,
        radio=RadioConstants(config.carrier_frequency_hz),
        power=PowerBudget(
            total_power_w=dbm_to_watts(config.transmit_power_dbm),
            num_waveguides=config.num_users,
            noise_power_w=dbm_to_watts(config.noise_power_dbm),
        ),
        seed=seed,
    )


def default_scenario(seed: int, **overrides) -> Scenario:
    """Convenience wrapper: reference config with keyword overrides."""
    return build_scenario(replace(ScenarioConfig(), **overrides), seed)


def fixed_center_variant(scenario: Scenario) -> Scenario:
    """Benchmark with one antenna per waveguide at the region's center column.

    Everything else (users, scatterers, blockages, power, seed) is preserved,
    so waveguide assignment can still be optimized while activation is forced.
    """
    return replace(scenario, antenna_x=(0.0,))


def random_baseline(scenario: Scenario) -> Matching:
    """Seeded uniform matching: random permutation, random antenna per waveguide.

    Doubles as the initial state of the swap search and as the unoptimized
    baseline policy.
    """
    rng = _stream(scenario.seed, _MATCHING_STREAM)
    assignment = tuple(int(v) for v in rng.permutation(scenario.num_users))
    activation = tuple(
        int(v) for v in rng.integers(0, scenario.num_antennas, size=scenario.num_waveguides)
    )
    return Matching(assignment=assignment, activation=activation)
