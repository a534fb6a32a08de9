"""Random deployment geometry and the shared scatterer field.

All randomness is drawn from streams derived from ``(master_seed,
trial_index)`` by a fixed split rule, so realizations are reproducible
bit for bit and independent across trials regardless of execution order:

    stream = default_rng(SeedSequence([master_seed, trial_index, purpose, *extra]))

with purpose codes PLACEMENT=0, SCATTER=1, LOS=2, SHADOW=3, CHANNEL=4,
PILOT=5, TRAINING_NOISE=6. Per-link channel draws additionally mix in
``(k, m)`` so links can be synthesized concurrently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .channel import los_probability
from .config import SimConfig, validate

SCHEMA_VERSION = 1

PLACEMENT = 0
SCATTER = 1
LOS = 2
SHADOW = 3
CHANNEL = 4
PILOT = 5
TRAINING_NOISE = 6


def stream(master_seed: int, trial_index: int, *key: int) -> np.random.Generator:
    """Independent generator for one purpose within one trial."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, trial_index, *key]))


@dataclass(frozen=True)
class ScattererRay:
    """One reflecting ray: the cluster it belongs to and its 2-D position."""

    cluster_id: int
    position: np.ndarray


class ScattererField:
    """Array-backed collection of rays, indexable as ScattererRay views."""

    def __init__(self, positions: np.ndarray, cluster_ids: np.ndarray):
        positions = np.asarray(positions, dtype=float).reshape(-1, 2)
        cluster_ids = np.asarray(cluster_ids, dtype=np.int64).reshape(-1)
        if len(positions) != len(cluster_ids):
            raise ValueError("positions and cluster_ids must have equal length")
        self.positions = positions
        self.cluster_ids = cluster_ids

    def __len__(self) -> int:
        return len(self.cluster_ids)

    def __getitem__(self, i: int) -> ScattererRay:
        return ScattererRay(int(self.cluster_ids[i]), self.positions[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def n_clusters(self) -> int:
        return int(len(np.unique(self.cluster_ids)))


@dataclass(frozen=True)
class ScenarioRealization:
    """One drawn deployment: geometry plus every large-scale random term.

    ``ray_shadow_db`` holds one shadow draw per ray of the global field
    (shared by every link that sees the ray), ``los_shadow_db`` one draw
    per (MS, AP) link for the direct component. Small-scale per-link
    draws are re-derived from ``link_rng``.
    """

    ap_positions: np.ndarray
    ms_positions: np.ndarray
    ap_boresights: np.ndarray
    ms_boresights: np.ndarray
    master_seed: int
    trial_index: int
    scatterers: Optional[ScattererField] = None
    los_indicator: Optional[np.ndarray] = None
    ray_shadow_db: Optional[np.ndarray] = None
    los_shadow_db: Optional[np.ndarray] = None

    def link_rng(self, k: int, m: int) -> np.random.Generator:
        return stream(self.master_seed, self.trial_index, CHANNEL, k, m)


def place_entities(cfg: SimConfig, rng: np.random.Generator) -> ScenarioRealization:
    """Draw AP/MS positions uniformly over the square and boresights over [0, 2pi).

    Returns a partial realization (geometry only); scatterers, LOS
    indicators and shadow terms are filled in by build_realization.
    """
    side = cfg.area_side_m
    ap_positions = rng.uniform(0.0, side, size=(cfg.M, 2))
    ms_positions = rng.uniform(0.0, side, size=(cfg.K, 2))
    ap_boresights = rng.uniform(0.0, 2.0 * np.pi, size=cfg.M)
    ms_boresights = rng.uniform(0.0, 2.0 * np.pi, size=cfg.K)
    return ScenarioRealization(
        ap_positions=ap_positions,
        ms_positions=ms_positions,
        ap_boresights=ap_boresights,
        ms_boresights=ms_boresights,
        master_seed=cfg.master_seed,
        trial_index=-1,
    )


def generate_scatterers(cfg: SimConfig, rng: np.random.Generator) -> ScattererField:
    """Cluster centers uniform over the square; each emits rays_per_cluster rays.

    Rays sit at the cluster center plus an isotropic Gaussian offset
    (ray_offset_std_m per axis) and are redrawn until inside the square,
    so every stored position satisfies the in-area invariant.
    """
    n_clusters = cfg.cluster_count
    rays = cfg.rays_per_cluster
    side = cfg.area_side_m
    if n_clusters == 0:
        return ScattererField(np.empty((0, 2)), np.empty(0, dtype=np.int64))
    centers = rng.uniform(0.0, side, size=(n_clusters, 2))
    base = np.repeat(centers, rays, axis=0)
    cluster_ids = np.repeat(np.arange(n_clusters, dtype=np.int64), rays)
    positions = base + rng.normal(0.0, cfg.ray_offset_std_m, size=base.shape)
    outside = np.any((positions < 0.0) | (positions > side), axis=1)
    while np.any(outside):
        redraw = base[outside] + rng.normal(0.0, cfg.ray_offset_std_m, size=(int(outside.sum()), 2))
        positions[outside] = redraw
        outside = np.any((positions < 0.0) | (positions > side), axis=1)
    return ScattererField(positions, cluster_ids)


def active_rays(ap_pos, ms_pos, scatterers, delta: float) -> np.ndarray:
    """Indices of rays inside the ellipse with foci at the AP and the MS.

    A ray is active iff its total reflected path exceeds the direct
    distance by at most delta. Symmetric in the two foci and monotone
    in delta by construction.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    positions = scatterers.positions if isinstance(scatterers, ScattererField) else np.asarray(scatterers, float)
    ap = np.asarray(ap_pos, dtype=float)
    ms = np.asarray(ms_pos, dtype=float)
    if positions.size == 0:
        return np.empty(0, dtype=np.int64)
    da = np.hypot(positions[:, 0] - ap[0], positions[:, 1] - ap[1])
    db = np.hypot(positions[:, 0] - ms[0], positions[:, 1] - ms[1])
    d = float(np.hypot(*(ap - ms)))
    return np.nonzero(da + db <= d + delta)[0].astype(np.int64)


def draw_los_indicators(scenario: ScenarioRealization, rng: np.random.Generator) -> np.ndarray:
    """K x M matrix of independent Bernoulli draws with distance-dependent p."""
    diff = scenario.ms_positions[:, None, :] - scenario.ap_positions[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    p = los_probability(np.maximum(d, 1e-12))
    return (rng.random(d.shape) < p).astype(np.int8)


def build_realization(cfg: SimConfig, trial_index: int) -> ScenarioRealization:
    """Complete scenario draw for one trial, reproducible from (cfg, trial)."""
    validate(cfg)
    if trial_index < 0:
        raise ValueError("trial_index must be nonnegative")
    seed = cfg.master_seed
    partial = place_entities(cfg, stream(seed, trial_index, PLACEMENT))
    scatterers = generate_scatterers(cfg, stream(seed, trial_index, SCATTER))
    rng_shadow = stream(seed, trial_index, SHADOW)
    ray_shadow_db = cfg.nlos_params.sigma_db * rng_shadow.standard_normal(len(scatterers))
    los_shadow_db = cfg.los_params.sigma_db * rng_shadow.standard_normal((cfg.K, cfg.M))
    scenario = replace(partial, trial_index=trial_index, scatterers=scatterers,
                       ray_shadow_db=ray_shadow_db, los_shadow_db=los_shadow_db)
    los_indicator = draw_los_indicators(scenario, stream(seed, trial_index, LOS))
    return replace(scenario, los_indicator=los_indicator)


def to_snapshot(scenario: ScenarioRealization) -> dict:
    """JSON-ready document with the geometry and the seeds needed for replay."""
    return {
        "schema_version": SCHEMA_VERSION,
        "master_seed": scenario.master_seed,
        "trial_index": scenario.trial_index,
        "ap_positions": scenario.ap_positions.tolist(),
        "ms_positions": scenario.ms_positions.tolist(),
        "ap_boresights": scenario.ap_boresights.tolist(),
        "ms_boresights": scenario.ms_boresights.tolist(),
        "scatterers": {
            "cluster_ids": scenario.scatterers.cluster_ids.tolist(),
            "positions": scenario.scatterers.positions.tolist(),
        },
    }


def from_snapshot(doc: dict, cfg: SimConfig) -> ScenarioRealization:
    """Rebuild a realization from a snapshot; random terms re-derived from seeds."""
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported snapshot schema_version {doc.get('schema_version')!r}")
    scatterers = ScattererField(
        np.asarray(doc["scatterers"]["positions"], dtype=float),
        np.asarray(doc["scatterers"]["cluster_ids"], dtype=np.int64),
    )
    seed = int(doc["master_seed"])
    trial = int(doc["trial_index"])
    rng_shadow = stream(seed, trial, SHADOW)
    ray_shadow_db = cfg.nlos_params.sigma_db * rng_shadow.standard_normal(len(scatterers))
    los_shadow_db = cfg.los_params.sigma_db * rng_shadow.standard_normal((cfg.K, cfg.M))
    scenario = ScenarioRealization(
        ap_positions=np.asarray(doc["ap_positions"], dtype=float),
        ms_positions=np.asarray(doc["ms_positions"], dtype=float),
        ap_boresights=np.asarray(doc["ap_boresights"], dtype=float),
        ms_boresights=np.asarray(doc["ms_boresights"], dtype=float),
        master_seed=seed,
        trial_index=trial,
        scatterers=scatterers,
        ray_shadow_db=ray_shadow_db,
        los_shadow_db=los_shadow_db,
    )
    los_indicator = draw_los_indicators(scenario, stream(seed, trial, LOS))
    return replace(scenario, los_indicator=los_indicator)


def save_snapshot(scenario: ScenarioRealization, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_snapshot(scenario), fh)


def load_snapshot(path, cfg: SimConfig) -> ScenarioRealization:
    with open(path) as fh:
        return from_snapshot(json.load(fh), cfg)
