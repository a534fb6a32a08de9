"""MS combiners, AP-MS association, zero-forcing and hybrid precoders."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .config import ConfigError

log = logging.getLogger(__name__)

ZF_RCOND = 1e-10


def ms_beamformer(n_ms: int, p: int) -> np.ndarray:
    """Channel-independent 0-1 combiner: P disjoint groups of summed antennas.

    Kronecker structure I_P (x) ones(n_ms/p): column j is the indicator of
    antenna group j, so columns are orthogonal with squared norm n_ms/p.
    """
    if n_ms % p:
        raise ConfigError(f"P={p} must divide N_MS={n_ms}")
    return np.kron(np.eye(p), np.ones((n_ms // p, 1)))


@dataclass
class AssociationSets:
    """Which AP serves which MS; mask[m, k] is True when AP m serves MS k."""

    mask: np.ndarray

    @classmethod
    def cellfree(cls, n_ap: int, n_ms: int) -> "AssociationSets":
        return cls(mask=np.ones((n_ap, n_ms), dtype=bool))

    def ap_serves(self, m: int) -> np.ndarray:
        return np.nonzero(self.mask[m])[0]

    def ms_served_by(self, k: int) -> np.ndarray:
        return np.nonzero(self.mask[:, k])[0]


def uc_select(effective: np.ndarray, n_uc: int) -> AssociationSets:
    """Per AP, keep the n_uc users with the largest effective-channel norms.

    effective is either the (K, M, N_AP, P) tensor of per-pair effective
    channels (estimated or exact) or a precomputed (K, M) norm matrix.
    Ties go to the smaller user index. Users left with no serving AP are
    logged; they simply score zero rate downstream.
    """
    effective = np.asarray(effective)
    norms = effective if effective.ndim == 2 else np.linalg.norm(effective, axis=(2, 3))
    K, M = norms.shape
    if not 1 <= n_uc <= K:
        raise ConfigError(f"N_uc must be within [1, K={K}], got {n_uc}")
    mask = np.zeros((M, K), dtype=bool)
    for m in range(M):
        # Stable sort of -norms keeps ascending user index among ties.
        top = np.argsort(-norms[:, m], kind="stable")[:n_uc]
        mask[m, top] = True
    orphans = np.nonzero(~mask.any(axis=0))[0]
    if orphans.size:
        log.info("users %s selected by no AP; they will score zero rate", orphans.tolist())
    return AssociationSets(mask=mask)


def zf_precoder(effective_m: np.ndarray, rcond: float = ZF_RCOND) -> np.ndarray:
    """Zero-forcing precoders for one AP from its stacked effective channels.

    effective_m holds the (S, N_AP, P) effective channels of the S users
    in this AP's nulling set. The stacked matrix G = [S_1 ... S_S] is
    inverted through a Moore-Penrose pseudo-inverse (singular values below
    rcond times the largest are truncated), which yields S_j^H Q_k =
    delta_jk I_P whenever S*P fits the antenna budget and the minimum-norm
    least-squares precoder otherwise.
    """
    effective_m = np.asarray(effective_m, dtype=np.complex128)
    s, n_ap, p = effective_m.shape
    g = effective_m.transpose(1, 0, 2).reshape(n_ap, s * p)
    if not np.any(g):
        log.warning("all-zero effective channels at an AP; zero precoders returned")
        return np.zeros_like(effective_m)
    q = np.linalg.pinv(g.conj().T, rcond=rcond)
    return q.reshape(n_ap, s, p).transpose(1, 0, 2)


@dataclass
class HybridResult:
    """Constant-modulus analog matrix, per-user digital matrices, diagnostics."""

    analog: np.ndarray
    digital: np.ndarray
    objective: float
    history: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = True

    def reconstructed(self) -> np.ndarray:
        return self.analog[None] @ self.digital


def _hybrid_objective(q_set, analog, digital) -> float:
    return float(np.sum(np.abs(q_set - analog[None] @ digital) ** 2))


def hybrid_decompose(q_set: np.ndarray, max_iters: int = 100, tol: float = 1e-4) -> HybridResult:
    """Factor each precoder into a shared analog matrix times digital matrices.

    Alternates an exact digital step D_k = pinv(F) Q_k with an analog
    phase-projection step F = (1/sqrt(N_AP)) exp(j arg(sum_k Q_k D_k^H)),
    starting from the phases of the first user's precoder. The recorded
    objective sequence is non-increasing: an iteration that fails to
    improve terminates the alternation and the best iterate is returned
    (converged=False flags a stop without meeting the tolerance).
    """
    q_set = np.asarray(q_set, dtype=np.complex128)
    if q_set.ndim != 3 or q_set.shape[0] < 1:
        raise ValueError("q_set must be (S, N_AP, P) with at least one user")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    _, n_ap, _ = q_set.shape
    modulus = 1.0 / np.sqrt(n_ap)
    analog = modulus * np.exp(1j * np.angle(q_set[0]))
    # Objectives below this are a numerically exact factorization.
    floor = 1e-20 * max(float(np.sum(np.abs(q_set) ** 2)), 1e-300)

    history: List[float] = []
    best: Optional[HybridResult] = None
    converged = False
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        digital = np.linalg.pinv(analog)[None] @ q_set
        j = _hybrid_objective(q_set, analog, digital)
        if history and j >= history[-1]:
            # The phase projection stopped helping; keep the best iterate.
            converged = (history[-1] - j) > -tol * max(history[-1], floor)
            break
        history.append(j)
        best = HybridResult(analog=analog, digital=digital, objective=j)
        if j <= floor:
            converged = True
            break
        if len(history) >= 2 and history[-2] - history[-1] < tol * max(history[-2], floor):
            converged = True
            break
        t = np.einsum("iap,iqp->aq", q_set, digital.conj())
        analog = modulus * np.exp(1j * np.angle(t))
    else:
        converged = False
    if not converged:
        log.debug("hybrid decomposition stopped after %d iterations with objective %.3e",
                  iterations, history[-1] if history else float("nan"))
    assert best is not None
    best.history = history
    best.iterations = iterations
    best.converged = converged
    return best


def zf_precoders_all(effective: np.ndarray, association: AssociationSets,
                     rcond: float = ZF_RCOND) -> np.ndarray:
    """Per-AP zero-forcing over each AP's served set; (M, K, N_AP, P) with
    zero blocks for unserved pairs."""
    K, M, n_ap, p = effective.shape
    q = np.zeros((M, K, n_ap, p), dtype=np.complex128)
    for m in range(M):
        served = association.ap_serves(m)
        if served.size == 0:
            continue
        q[m, served] = zf_precoder(effective[served, m], rcond=rcond)
    return q


def hybrid_all(precoders: np.ndarray, association: AssociationSets,
               max_iters: int = 100, tol: float = 1e-4):
    """Hybrid decomposition at every AP; returns reconstructed precoders,
    the per-AP analog matrices and the count of non-converged APs."""
    M, K, n_ap, p = precoders.shape
    reconstructed = np.zeros_like(precoders)
    analog = np.zeros((M, n_ap, p), dtype=np.complex128)
    stalled = 0
    for m in range(M):
        served = association.ap_serves(m)
        if served.size == 0:
            continue
        res = hybrid_decompose(precoders[m, served], max_iters=max_iters, tol=tol)
        reconstructed[m, served] = res.reconstructed()
        analog[m] = res.analog
        stalled += not res.converged
    return reconstructed, analog, stalled


def power_coefficients_dl(precoders: np.ndarray, association: AssociationSets,
                          total_power_w: float) -> np.ndarray:
    """Downlink power coefficients (M, K): each AP splits its budget evenly
    over the users it serves, normalized by the precoder trace.

    eta[m, k] = P_T / (|served(m)| * tr(Q_{k,m} Q_{k,m}^H)) on served pairs
    and 0 elsewhere. A served pair with zero trace is dropped (eta = 0).
    In cell-free operation every AP serves all K users, so the divisor is K.
    """
    traces = np.sum(np.abs(precoders) ** 2, axis=(2, 3))
    counts = association.mask.sum(axis=1)
    eta = np.zeros_like(traces)
    served = association.mask & (traces > 0)
    dropped = association.mask & (traces == 0)
    if np.any(dropped):
        log.warning("dropping %d served pairs with zero precoder trace", int(dropped.sum()))
    mm, kk = np.nonzero(served)
    eta[mm, kk] = total_power_w / (counts[mm] * traces[mm, kk])
    return eta


def power_coefficients_ul(ms_bf: np.ndarray, power_w: float) -> float:
    """Uplink power coefficient: transmit budget over the combiner trace."""
    trace = float(np.real(np.sum(np.abs(ms_bf) ** 2)))
    if trace <= 0:
        raise ValueError("MS beamformer has zero trace")
    return power_w / trace
