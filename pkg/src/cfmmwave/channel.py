"""Clustered mmWave channel synthesis with urban-microcell attenuation.

The channel between MS k and AP m is a sum over the rays of the shared
scatterer field that fall inside the link's gating ellipse, plus an
optional direct component:

    H = gamma * sum_r alpha_r * sqrt(L(r)) * a_AP(theta_r) a_MS(theta_r)^H  +  H_direct

with gamma = sqrt(N_AP*N_MS / N_rays), where N_rays is either the link's
own active-ray count or the global field size (see assemble_channel),
alpha_r ~ CN(0,1), L the linear power attenuation of the total reflected
path, and unit-norm uniform-linear-array responses on both sides. The
direct component is

    H_direct = I * sqrt(N_AP*N_MS) * exp(j*eta) * sqrt(L_los(d)) * a_AP a_MS^H

gated by the link's 0/1 visibility indicator, with eta uniform on [0, 2pi).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .config import PathlossParams, SimConfig

C_LIGHT = 299792458.0

# Reflected/direct path lengths are floored at 1 m before evaluating the
# attenuation law; below the reference distance the far-field model does
# not apply and the gain would diverge.
MIN_PATH_M = 1.0


@dataclass
class ChannelMatrix:
    """Synthesized channel for one (MS, AP) pair plus ray metadata."""

    h: np.ndarray
    k: int = -1
    m: int = -1
    active_ray_count: int = 0
    los_flag: int = 0


@dataclass
class ChannelSet:
    """All K x M channels of one realization (h indexed [k, m])."""

    h: np.ndarray
    active_ray_count: np.ndarray
    los_flag: np.ndarray


def steering_vector(n_elem: int, theta, spacing_wavelengths: float = 0.5) -> np.ndarray:
    """Unit-norm ULA response; element i carries phase 2*pi*spacing*i*sin(theta)."""
    if n_elem < 1:
        raise ValueError(f"n_elem must be at least 1, got {n_elem}")
    phase = 2.0 * np.pi * spacing_wavelengths * np.sin(theta) * np.arange(n_elem)
    return np.exp(1j * phase) / np.sqrt(n_elem)


def _steering_matrix(n_elem: int, thetas: np.ndarray, spacing: float = 0.5) -> np.ndarray:
    """Stack of steering vectors, shape (len(thetas), n_elem)."""
    phase = 2.0 * np.pi * spacing * np.outer(np.sin(thetas), np.arange(n_elem))
    return np.exp(1j * phase) / np.sqrt(n_elem)


def path_loss_db(r, pl: PathlossParams, shadow_db=0.0, carrier_hz: float = 73e9):
    """Attenuation in dB (a gain, hence negative) at path length r meters.

    L = -20 log10(4 pi / lambda) - 10 n [1 + b c / (lambda f0)] log10(r) - shadow_db
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("path length must be positive")
    lam = C_LIGHT / carrier_hz
    bracket = 1.0 + pl.b * pl.c / (lam * pl.f0_ref_hz)
    out = -20.0 * np.log10(4.0 * np.pi / lam) - 10.0 * pl.n * bracket * np.log10(r) - shadow_db
    return out if out.ndim else float(out)


def los_probability(d):
    """Probability of an unobstructed link at 2-D distance d (urban microcell)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    decay = np.exp(-d / 39.0)
    out = np.minimum(20.0 / d, 1.0) * (1.0 - decay) + decay
    return out if out.ndim else float(out)


def _angle_from(origin, boresight, targets) -> np.ndarray:
    delta = np.atleast_2d(targets) - np.asarray(origin, dtype=float)
    return np.arctan2(delta[:, 1], delta[:, 0]) - boresight


def assemble_channel(
    ap_pos,
    ap_boresight: float,
    n_ap: int,
    ms_pos,
    ms_boresight: float,
    n_ms: int,
    ray_positions: np.ndarray,
    ray_shadow_db: np.ndarray,
    pl_los: PathlossParams,
    pl_nlos: PathlossParams,
    los_flag: int,
    los_shadow_db: float,
    rng: np.random.Generator,
    carrier_hz: float = 73e9,
    spacing_wavelengths: float = 0.5,
    gamma_ray_count: int = 0,
    k: int = -1,
    m: int = -1,
) -> ChannelMatrix:
    """Synthesize one N_AP x N_MS channel from the link's active rays.

    ray_positions/ray_shadow_db describe only the rays already gated for
    this link. With no active rays and no direct component the channel is
    the all-zero outage matrix. The generator supplies the per-ray complex
    gains (one standard complex Gaussian pair per ray, in ray order) and
    then the direct component's phase.

    gamma_ray_count sets the ray count in the normalization
    gamma = sqrt(n_ap * n_ms / gamma_ray_count); 0 means the link's own
    active-ray count (each link normalized to its local multipath order),
    while passing the global field size normalizes all links against the
    full scatterer population so that sparse ellipses carry little power.
    """
    ap = np.asarray(ap_pos, dtype=float)
    ms = np.asarray(ms_pos, dtype=float)
    rays = np.asarray(ray_positions, dtype=float).reshape(-1, 2)
    n_rays = len(rays)
    h = np.zeros((n_ap, n_ms), dtype=np.complex128)

    if n_rays > 0:
        da = np.hypot(rays[:, 0] - ap[0], rays[:, 1] - ap[1])
        db = np.hypot(rays[:, 0] - ms[0], rays[:, 1] - ms[1])
        r = np.maximum(da + db, MIN_PATH_M)
        loss_db = path_loss_db(r, pl_nlos, np.asarray(ray_shadow_db, float), carrier_hz)
        amp = 10.0 ** (loss_db / 20.0)
        g = rng.standard_normal((n_rays, 2))
        alpha = (g[:, 0] + 1j * g[:, 1]) / np.sqrt(2.0)
        gamma = np.sqrt(n_ap * n_ms / (gamma_ray_count or n_rays))
        a_ap = _steering_matrix(n_ap, _angle_from(ap, ap_boresight, rays), spacing_wavelengths)
        a_ms = _steering_matrix(n_ms, _angle_from(ms, ms_boresight, rays), spacing_wavelengths)
        h += np.einsum("r,ri,rj->ij", gamma * alpha * amp, a_ap, a_ms.conj(), optimize=True)

    if los_flag:
        d = max(float(np.hypot(*(ap - ms))), MIN_PATH_M)
        eta = rng.uniform(0.0, 2.0 * np.pi)
        amp_los = 10.0 ** (path_loss_db(d, pl_los, los_shadow_db, carrier_hz) / 20.0)
        a_ap = steering_vector(n_ap, _angle_from(ap, ap_boresight, ms[None, :])[0], spacing_wavelengths)
        a_ms = steering_vector(n_ms, _angle_from(ms, ms_boresight, ap[None, :])[0], spacing_wavelengths)
        h += np.sqrt(n_ap * n_ms) * np.exp(1j * eta) * amp_los * np.outer(a_ap, a_ms.conj())

    return ChannelMatrix(h=h, k=k, m=m, active_ray_count=n_rays, los_flag=int(bool(los_flag)))


def synthesize_channels(cfg: SimConfig, scenario) -> ChannelSet:
    """All K x M channels of one realization, each from its own link stream.

    Ray gating reuses the ellipse rule with distances precomputed once per
    realization; the per-link assembly is delegated to assemble_channel so
    a single implementation defines the channel law.
    """
    rays = scenario.scatterers.positions
    shadows = scenario.ray_shadow_db
    ap_pos = scenario.ap_positions
    ms_pos = scenario.ms_positions
    pl_los, pl_nlos = cfg.los_params, cfg.nlos_params
    delta = cfg.ellipse_excess_m
    gamma_ray_count = (cfg.cluster_count * cfg.rays_per_cluster
                       if cfg.gamma_normalization == "field" else 0)

    # (M, R) and (K, R) focal distances; summed per link for the gate.
    d_ap = np.hypot(rays[None, :, 0] - ap_pos[:, 0, None], rays[None, :, 1] - ap_pos[:, 1, None]) if len(rays) else np.zeros((cfg.M, 0))
    d_ms = np.hypot(rays[None, :, 0] - ms_pos[:, 0, None], rays[None, :, 1] - ms_pos[:, 1, None]) if len(rays) else np.zeros((cfg.K, 0))

    h = np.zeros((cfg.K, cfg.M, cfg.N_AP, cfg.N_MS), dtype=np.complex128)
    counts = np.zeros((cfg.K, cfg.M), dtype=np.int64)
    for k in range(cfg.K):
        for m in range(cfg.M):
            d = float(np.hypot(*(ap_pos[m] - ms_pos[k])))
            idx = np.nonzero(d_ap[m] + d_ms[k] <= d + delta)[0]
            cm = assemble_channel(
                ap_pos[m], float(scenario.ap_boresights[m]), cfg.N_AP,
                ms_pos[k], float(scenario.ms_boresights[k]), cfg.N_MS,
                rays[idx], shadows[idx], pl_los, pl_nlos,
                int(scenario.los_indicator[k, m]), float(scenario.los_shadow_db[k, m]),
                scenario.link_rng(k, m), carrier_hz=cfg.carrier_hz,
                gamma_ray_count=gamma_ray_count, k=k, m=m,
            )
            h[k, m] = cm.h
            counts[k, m] = cm.active_ray_count
    return ChannelSet(h=h, active_ray_count=counts, los_flag=scenario.los_indicator.copy())


_DUMP_MAGIC = b"CFCH"
_DUMP_VERSION = 1


def write_channel_dump(path, h: np.ndarray) -> None:
    """Binary dump of a K x M x N_AP x N_MS tensor: header then row-major complex128."""
    h = np.ascontiguousarray(h, dtype=np.complex128)
    if h.ndim != 4:
        raise ValueError("expected a 4-D channel tensor")
    with open(path, "wb") as fh:
        fh.write(_DUMP_MAGIC)
        fh.write(struct.pack("<I", _DUMP_VERSION))
        fh.write(struct.pack("<4I", *h.shape))
        h.tofile(fh)


def read_channel_dump(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _DUMP_MAGIC:
            raise ValueError("not a channel dump file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _DUMP_VERSION:
            raise ValueError(f"unsupported dump version {version}")
        shape = struct.unpack("<4I", fh.read(16))
        data = np.fromfile(fh, dtype=np.complex128, count=int(np.prod(shape)))
    return data.reshape(shape)
