"""Simulation configuration, propagation parameter tables and presets."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass


class ConfigError(ValueError):
    """A simulation configuration violates a structural constraint."""


@dataclass(frozen=True)
class PathlossParams:
    """Distance-attenuation parameters for one propagation condition.

    n is the path-loss exponent, sigma_db the shadow-fading standard
    deviation in dB. (b, c, f0_ref_hz) form the optional frequency-slope
    correction of the attenuation law; with b=0 the correction vanishes.
    """

    n: float
    sigma_db: float
    b: float = 0.0
    c: float = 0.0
    f0_ref_hz: float = 73e9

    def __post_init__(self):
        if self.n <= 0:
            raise ConfigError(f"path-loss exponent must be positive, got {self.n}")
        if self.sigma_db < 0:
            raise ConfigError(f"shadow std must be nonnegative, got {self.sigma_db}")


# Urban-microcell attenuation table: profile -> (LOS, NLOS) = (n, sigma_db).
# The open-square NLOS exponent really is smaller than the LOS one; the
# table is implemented as published.
UMI_PROFILES = {
    "umi_street_canyon": {"los": (1.98, 3.1), "nlos": (3.19, 8.2)},
    "umi_open_square": {"los": (2.89, 7.1), "nlos": (1.73, 3.02)},
}


@dataclass(frozen=True)
class SimConfig:
    """Full parameter set for one simulation campaign.

    Counts follow the usual notation: M access points with N_AP antennas,
    K mobile stations with N_MS antennas, multiplexing order P (streams
    per user), N_uc users served per AP in user-centric mode.
    """

    area_side_m: float = 250.0
    M: int = 100
    K: int = 5
    N_AP: int = 16
    N_MS: int = 8
    P: int = 2
    N_uc: int = 1
    carrier_hz: float = 73e9
    bandwidth_hz: float = 200e6
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 6.0
    tau_p: int = 128
    tau_c: int = 1024
    pilot_power_w: float = 0.1
    ul_data_power_w: float = 1.0
    dl_power_grid_dbw: tuple = tuple(float(p) for p in range(-30, 31, 5))
    cluster_density_per_sqm: float = 0.4
    rays_per_cluster: int = 3
    ellipse_excess_m: float = 3.0
    ray_offset_std_m: float = 2.0
    gamma_normalization: str = "field"
    pathloss_profile: str = "umi_open_square"
    pathloss_b: float = 0.0
    pathloss_c: float = 0.0
    f0_ref_hz: float = 73e9
    trials: int = 60
    master_seed: int = 1

    @property
    def cluster_count(self) -> int:
        return int(round(self.cluster_density_per_sqm * self.area_side_m**2))

    def _params(self, key: str) -> PathlossParams:
        try:
            n, sigma = UMI_PROFILES[self.pathloss_profile][key]
        except KeyError:
            raise ConfigError(
                f"unknown pathloss profile {self.pathloss_profile!r}; "
                f"choose one of {sorted(UMI_PROFILES)}"
            ) from None
        return PathlossParams(n, sigma, self.pathloss_b, self.pathloss_c, self.f0_ref_hz)

    @property
    def los_params(self) -> PathlossParams:
        return self._params("los")

    @property
    def nlos_params(self) -> PathlossParams:
        return self._params("nlos")


def validate(cfg: SimConfig) -> None:
    """Raise ConfigError on any violated invariant."""
    for name in ("M", "K", "N_AP", "N_MS", "P", "N_uc", "tau_p", "tau_c",
                 "rays_per_cluster", "trials"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be a positive count, got {getattr(cfg, name)}")
    if cfg.N_MS % cfg.P != 0:
        raise ConfigError(f"P={cfg.P} must divide N_MS={cfg.N_MS}")
    if cfg.tau_p >= cfg.tau_c:
        raise ConfigError(f"tau_p={cfg.tau_p} must be smaller than tau_c={cfg.tau_c}")
    if cfg.N_uc > cfg.K:
        raise ConfigError(f"N_uc={cfg.N_uc} cannot exceed K={cfg.K}")
    if cfg.area_side_m <= 0:
        raise ConfigError("area_side_m must be positive")
    if not cfg.dl_power_grid_dbw:
        raise ConfigError("power grid must be nonempty")
    if cfg.ellipse_excess_m <= 0:
        raise ConfigError("ellipse_excess_m must be positive")
    if cfg.cluster_density_per_sqm < 0:
        raise ConfigError("cluster density must be nonnegative")
    for name in ("carrier_hz", "bandwidth_hz", "pilot_power_w", "ul_data_power_w"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name} must be positive")
    if cfg.master_seed < 0:
        raise ConfigError("master_seed must be a nonnegative integer")
    if cfg.gamma_normalization not in ("field", "link"):
        raise ConfigError("gamma_normalization must be 'field' or 'link'")
    cfg.los_params  # profile lookup raises on unknown names


def noise_power_w(cfg: SimConfig) -> float:
    """Receiver thermal noise power in watts (PSD x bandwidth x noise figure)."""
    dbm = cfg.noise_psd_dbm_hz + 10.0 * math.log10(cfg.bandwidth_hz) + cfg.noise_figure_db
    return 10.0 ** ((dbm - 30.0) / 10.0)


PRESETS = {
    # Small footprint for CI and quick checks.
    "desk": dict(area_side_m=100.0, M=20, K=4, trials=10),
    # Reference campaign geometry.
    "paper": dict(),
}


def preset(name: str, **overrides) -> SimConfig:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose one of {sorted(PRESETS)}") from None
    cfg = SimConfig(**{**base, **overrides})
    validate(cfg)
    return cfg


def to_dict(cfg: SimConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["dl_power_grid_dbw"] = list(cfg.dl_power_grid_dbw)
    return d


def from_dict(d: dict) -> SimConfig:
    known = {f.name for f in dataclasses.fields(SimConfig)}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(d)
    if "dl_power_grid_dbw" in kwargs:
        kwargs["dl_power_grid_dbw"] = tuple(float(p) for p in kwargs["dl_power_grid_dbw"])
    cfg = SimConfig(**kwargs)
    validate(cfg)
    return cfg
