"""Uplink training: pilot books, received training matrices, LS estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard

from .config import ConfigError


@dataclass
class PilotBook:
    """Per-user pilot matrices (K, P, tau_p) and pilot powers in watts.

    Each user's rows are drawn from a common Hadamard basis, so they are
    exactly orthonormal and binary up to the 1/sqrt(tau_p) scale. Rows of
    different users coincide occasionally; cross-user orthogonality is
    not guaranteed and collisions produce pilot contamination.
    """

    phi: np.ndarray
    power_w: np.ndarray
    row_indices: np.ndarray


def generate_pilots(K: int, P: int, tau_p: int, rng: np.random.Generator,
                    pilot_power_w: float = 0.1) -> PilotBook:
    """Sample P distinct Hadamard rows per user, independently across users."""
    if tau_p < 1 or tau_p & (tau_p - 1):
        raise ConfigError(f"tau_p must be a power of two, got {tau_p}")
    if P > tau_p:
        raise ConfigError(f"P={P} cannot exceed tau_p={tau_p}")
    basis = hadamard(tau_p).astype(float) / np.sqrt(tau_p)
    rows = np.stack([rng.choice(tau_p, size=P, replace=False) for _ in range(K)]) \
        if K else np.empty((0, P), dtype=np.int64)
    phi = basis[rows].astype(np.complex128)
    return PilotBook(phi=phi, power_w=np.full(K, float(pilot_power_w)), row_indices=rows)


def training_rx(channels_m: np.ndarray, ms_beamformers: np.ndarray, pilots: PilotBook,
                rng: np.random.Generator, noise_power_w: float) -> np.ndarray:
    """Received training matrix at one AP, shape (N_AP, tau_p).

    channels_m stacks the K channels toward this AP as (K, N_AP, N_MS);
    ms_beamformers is one (N_MS, P) combiner shared by all users or a
    (K, N_MS, P) stack. Thermal noise is i.i.d. complex Gaussian with
    noise_power_w per entry.
    """
    channels_m = np.asarray(channels_m)
    K = channels_m.shape[0]
    tau_p = pilots.phi.shape[2] if pilots.phi.ndim == 3 else pilots.phi.shape[1]
    n_ap = channels_m.shape[1] if K else channels_m.shape[-2]
    L = np.asarray(ms_beamformers, dtype=np.complex128)
    if L.ndim == 2:
        L = np.broadcast_to(L, (K, *L.shape))
    y = np.zeros((n_ap, tau_p), dtype=np.complex128)
    for u in range(K):
        y += np.sqrt(pilots.power_w[u]) * channels_m[u] @ L[u] @ pilots.phi[u]
    g = rng.standard_normal((n_ap, tau_p, 2))
    y += np.sqrt(noise_power_w / 2.0) * (g[..., 0] + 1j * g[..., 1])
    return y


def estimate_effective(y_m: np.ndarray, pilots: PilotBook, k: int) -> np.ndarray:
    """Least-squares estimate of the effective channel of user k at one AP."""
    return y_m @ pilots.phi[k].conj().T / np.sqrt(pilots.power_w[k])


def estimate_all(y: np.ndarray, pilots: PilotBook) -> np.ndarray:
    """Estimates for all users and APs: (M, N_AP, tau_p) -> (K, M, N_AP, P)."""
    est = np.einsum("mat,kpt->kmap", y, pilots.phi.conj(), optimize=True)
    return est / np.sqrt(pilots.power_w)[:, None, None, None]


def perfect_csi_effective(channel: np.ndarray, ms_beamformer: np.ndarray) -> np.ndarray:
    """Effective channel H @ L; broadcasts over any leading channel axes."""
    return np.asarray(channel) @ np.asarray(ms_beamformer, dtype=np.complex128)
