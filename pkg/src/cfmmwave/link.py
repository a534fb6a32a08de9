"""Effective downlink/uplink signal models and achievable rates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .beamform import AssociationSets
from .training import perfect_csi_effective


@dataclass
class EffectiveLink:
    """Per-user P x P effective matrices after both beamformers.

    desired maps the user's own streams, each interference entry maps one
    other user's streams, and noise_cov is the post-combining noise
    covariance. Rates follow from these three pieces alone.
    """

    desired: np.ndarray
    interference: List[np.ndarray] = field(default_factory=list)
    noise_cov: np.ndarray = None


@dataclass
class RateRecord:
    """Per-user achievable rates for one combination at one power point."""

    scheme: str
    csi: str
    bf: str
    direction: str
    power_dbw: float
    rates_mbps: np.ndarray
    trial: int = -1


def downlink_effective(channels: np.ndarray, precoders: np.ndarray, eta_dl: np.ndarray,
                       ms_bf: np.ndarray, association: AssociationSets,
                       noise_power_w: float) -> List[EffectiveLink]:
    """Downlink effective matrices for every user.

    channels is the true (K, M, N_AP, N_MS) tensor (signals always ride on
    the true channel, whatever CSI built the precoders), precoders the
    (M, K, N_AP, P) set in use, eta_dl the (M, K) power coefficients.
    The desired matrix of user k sums sqrt(eta[m,k]) L^H H_{k,m}^H Q_{k,m}
    over its serving APs; interference from user l sums the same products
    with Q_{l,m} over l's serving APs. Noise covariance is
    noise_power * L^H L after the 0-1 combiner.
    """
    s_true = perfect_csi_effective(channels, ms_bf)  # (K, M, N_AP, P); equals (L^H H^H)^H
    weighted = np.sqrt(eta_dl)[:, :, None, None] * precoders
    cross = np.einsum("kmap,mlaq->klpq", s_true.conj(), weighted, optimize=True)
    L = np.asarray(ms_bf, dtype=np.complex128)
    noise_cov = noise_power_w * (L.conj().T @ L)
    K = channels.shape[0]
    return [
        EffectiveLink(
            desired=cross[k, k],
            interference=[cross[k, l] for l in range(K) if l != k],
            noise_cov=noise_cov.copy(),
        )
        for k in range(K)
    ]


def uplink_effective(channels: np.ndarray, combiners: np.ndarray, eta_ul,
                     ms_bf: np.ndarray, association: AssociationSets,
                     noise_power_w: float) -> List[EffectiveLink]:
    """Uplink effective matrices; combiners are the TDD-reused precoders.

    Every AP serving user k contributes Q_{k,m}^H y_m to the central soft
    estimate, so the desired matrix is sqrt(eta_k) sum_m Q_{k,m}^H H_{k,m} L
    over serving APs, interference stems from the other users' transmit
    signals through the same combiners, and the noise covariance is
    noise_power * sum_m Q_{k,m}^H Q_{k,m}.
    """
    K = channels.shape[0]
    eta = np.broadcast_to(np.asarray(eta_ul, dtype=float), (K,))
    s_true = perfect_csi_effective(channels, ms_bf)
    q = np.where(association.mask[:, :, None, None], combiners, 0.0)
    cross = np.einsum("mkap,lmaq->klpq", q.conj(), s_true, optimize=True)
    noise = noise_power_w * np.einsum("mkap,mkaq->kpq", q.conj(), q, optimize=True)
    return [
        EffectiveLink(
            desired=np.sqrt(eta[k]) * cross[k, k],
            interference=[np.sqrt(eta[l]) * cross[k, l] for l in range(K) if l != k],
            noise_cov=noise[k],
        )
        for k in range(K)
    ]


def scale_transmit_power(link: EffectiveLink, power_ratio: float) -> EffectiveLink:
    """Same link with all transmit powers scaled; noise is unchanged.

    Valid because every power coefficient is proportional to the transmit
    budget, so desired and interference matrices scale by sqrt(ratio).
    """
    s = np.sqrt(power_ratio)
    return EffectiveLink(
        desired=s * link.desired,
        interference=[s * b for b in link.interference],
        noise_cov=link.noise_cov,
    )


def achievable_rate(link: EffectiveLink, bandwidth_hz: float) -> float:
    """Gaussian-signaling rate with interference treated as noise, Mbit/s.

    R = B log2 det(I + A A^H C^{-1}) with C the interference Gram matrix
    plus the noise covariance. Evaluated as a log-det difference so C is
    never inverted explicitly; C must be positive definite (a strictly
    positive noise floor guarantees this).
    """
    a = link.desired
    if not np.any(a):
        # Unserved users have an empty serving set and score zero rate.
        return 0.0
    c = link.noise_cov.astype(np.complex128, copy=True)
    for b in link.interference:
        c += b @ b.conj().T
    sign_c, logdet_c = np.linalg.slogdet(c)
    if not np.isfinite(logdet_c) or sign_c.real <= 0:
        raise ValueError("interference-plus-noise covariance must be positive definite")
    sign_t, logdet_t = np.linalg.slogdet(c + a @ a.conj().T)
    rate_bps = bandwidth_hz * (logdet_t - logdet_c) / np.log(2.0)
    return max(float(rate_bps.real), 0.0) / 1e6
