"""Monte Carlo orchestration over {scheme x CSI x beamforming x power x direction}."""

from __future__ import annotations

import csv
import json
import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import beamform, channel, scenario, training
from .config import SimConfig, from_dict, noise_power_w, to_dict, validate
from .link import (RateRecord, achievable_rate, downlink_effective,
                   scale_transmit_power, uplink_effective)

log = logging.getLogger(__name__)

SCHEMES = ("CF", "UC")
CSI_MODES = ("PCSI", "ICSI")
BF_MODES = ("FD", "HY")
DIRECTIONS = ("DL", "UL")

RESULTS_SCHEMA_VERSION = 1
CSV_HEADER = ["scheme", "csi", "bf", "direction", "power_dbw",
              "mean_rate_mbps", "std_rate_mbps", "trials", "seed"]


@dataclass
class TrialResult:
    trial: int
    records: List[RateRecord] = field(default_factory=list)
    failures: List[dict] = field(default_factory=list)


@dataclass
class SweepResult:
    """Aggregated rows over all trials, one per combination and power point."""

    rows: List[dict]
    config: SimConfig
    failures: List[dict] = field(default_factory=list)


def run_trial(cfg: SimConfig, trial_index: int,
              power_grid_dbw: Optional[Sequence[float]] = None,
              csi_modes: Sequence[str] = CSI_MODES,
              bf_modes: Sequence[str] = BF_MODES,
              directions: Sequence[str] = DIRECTIONS) -> TrialResult:
    """One scenario realization evaluated across the combination grid.

    The same channels serve both CSI modes, training runs once, and the
    hybrid mode reuses the fully-digital precoders before decomposition,
    so every comparison is paired on common randomness. A combination
    that raises is recorded as missing rather than fabricated.
    """
    validate(cfg)
    grid = tuple(cfg.dl_power_grid_dbw if power_grid_dbw is None else power_grid_dbw)
    result = TrialResult(trial=trial_index)

    rea = scenario.build_realization(cfg, trial_index)
    chans = channel.synthesize_channels(cfg, rea)
    sigma2 = noise_power_w(cfg)
    L = beamform.ms_beamformer(cfg.N_MS, cfg.P)
    s_true = training.perfect_csi_effective(chans.h, L)

    pilots = training.generate_pilots(
        cfg.K, cfg.P, cfg.tau_p,
        scenario.stream(cfg.master_seed, trial_index, scenario.PILOT), cfg.pilot_power_w)
    y = np.stack([
        training.training_rx(
            chans.h[:, m], L, pilots,
            scenario.stream(cfg.master_seed, trial_index, scenario.TRAINING_NOISE, m), sigma2)
        for m in range(cfg.M)
    ])
    s_hat = training.estimate_all(y, pilots)

    eta_ul_unit = beamform.power_coefficients_ul(L, 1.0)
    for csi in csi_modes:
        eff = s_true if csi == "PCSI" else s_hat
        for scheme in SCHEMES:
            try:
                if scheme == "CF":
                    assoc = beamform.AssociationSets.cellfree(cfg.M, cfg.K)
                else:
                    assoc = beamform.uc_select(eff, cfg.N_uc)
                q_fd = beamform.zf_precoders_all(eff, assoc)
            except Exception as err:
                result.failures.append(_failure(csi, scheme, "*", err))
                continue
            for bf in bf_modes:
                try:
                    if bf == "FD":
                        q = q_fd
                    else:
                        q, _, stalled = beamform.hybrid_all(q_fd, assoc)
                        if stalled:
                            log.debug("trial %d %s/%s: %d APs hit the hybrid iteration cap",
                                      trial_index, csi, scheme, stalled)
                    if "DL" in directions:
                        eta_dl = beamform.power_coefficients_dl(q, assoc, 1.0)
                        links = downlink_effective(chans.h, q, eta_dl, L, assoc, sigma2)
                        _append_records(result, cfg, links, grid, scheme, csi, bf, "DL", trial_index)
                    if "UL" in directions:
                        links = uplink_effective(chans.h, q, eta_ul_unit, L, assoc, sigma2)
                        _append_records(result, cfg, links, grid, scheme, csi, bf, "UL", trial_index)
                except Exception as err:
                    result.failures.append(_failure(csi, scheme, bf, err))
    return result


def _failure(csi: str, scheme: str, bf: str, err: Exception) -> dict:
    log.error("combination %s/%s/%s failed: %s", csi, scheme, bf, err)
    return {"csi": csi, "scheme": scheme, "bf": bf, "error": repr(err),
            "traceback": traceback.format_exc()}


def _append_records(result, cfg, unit_links, grid, scheme, csi, bf, direction, trial):
    for p_dbw in grid:
        ratio = 10.0 ** (p_dbw / 10.0)
        rates = np.array([
            achievable_rate(scale_transmit_power(lk, ratio), cfg.bandwidth_hz)
            for lk in unit_links
        ])
        result.records.append(RateRecord(scheme=scheme, csi=csi, bf=bf, direction=direction,
                                         power_dbw=float(p_dbw), rates_mbps=rates, trial=trial))


def aggregate(cfg: SimConfig, trial_results: Sequence[TrialResult]) -> SweepResult:
    """Mean and std of the per-user rates over all trials, per combination."""
    buckets: Dict[Tuple, List[np.ndarray]] = {}
    failures: List[dict] = []
    n_trials = len(trial_results)
    for tr in sorted(trial_results, key=lambda t: t.trial):
        failures.extend(dict(f, trial=tr.trial) for f in tr.failures)
        for rec in tr.records:
            key = (rec.scheme, rec.csi, rec.bf, rec.direction, rec.power_dbw)
            buckets.setdefault(key, []).append(rec.rates_mbps)
    rows = []
    for key in sorted(buckets):
        rates = np.concatenate(buckets[key])
        rows.append({
            "scheme": key[0], "csi": key[1], "bf": key[2], "direction": key[3],
            "power_dbw": key[4],
            "mean_rate_mbps": float(np.mean(rates)),
            "std_rate_mbps": float(np.std(rates, ddof=1)) if rates.size > 1 else 0.0,
            "trials": n_trials,
            "seed": cfg.master_seed,
        })
    return SweepResult(rows=rows, config=cfg, failures=failures)


def _trial_worker(args):
    cfg, trial, grid, csi_modes, bf_modes, directions = args
    return run_trial(cfg, trial, grid, csi_modes, bf_modes, directions)


def sweep(cfg: SimConfig, jobs: int = 1,
          power_grid_dbw: Optional[Sequence[float]] = None,
          csi_modes: Sequence[str] = CSI_MODES,
          bf_modes: Sequence[str] = BF_MODES,
          directions: Sequence[str] = DIRECTIONS,
          trial_callback=None) -> SweepResult:
    """Run cfg.trials independent trials and aggregate.

    Per-trial seed streams make the outcome independent of the execution
    order and of the level of parallelism.
    """
    validate(cfg)
    args = [(cfg, t, power_grid_dbw, csi_modes, bf_modes, directions)
            for t in range(cfg.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = []
            for tr in pool.map(_trial_worker, args):
                results.append(tr)
                if trial_callback:
                    trial_callback(tr)
    else:
        results = []
        for a in args:
            tr = _trial_worker(a)
            results.append(tr)
            if trial_callback:
                trial_callback(tr)
    return aggregate(cfg, results)


def emit(result: SweepResult, out_dir, stem: str = "results") -> Dict[str, Path]:
    """Write the aggregated rows as CSV plus a JSON mirror with the config."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    json_path = out / f"{stem}.json"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in result.rows:
            writer.writerow([row["scheme"], row["csi"], row["bf"], row["direction"],
                             row["power_dbw"], f"{row['mean_rate_mbps']:.6f}",
                             f"{row['std_rate_mbps']:.6f}", row["trials"], row["seed"]])
    with open(json_path, "w") as fh:
        json.dump({
            "schema_version": RESULTS_SCHEMA_VERSION,
            "config": to_dict(result.config),
            "rows": result.rows,
            "failures": result.failures,
        }, fh, indent=1)
    return {"csv": csv_path, "json": json_path}


def load_results(json_path) -> SweepResult:
    with open(json_path) as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != RESULTS_SCHEMA_VERSION:
        raise ValueError(f"unsupported results schema_version {doc.get('schema_version')!r}")
    return SweepResult(rows=doc["rows"], config=from_dict(doc["config"]),
                       failures=doc.get("failures", []))
