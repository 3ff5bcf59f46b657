"""
Beamforming
Zero-forcing precoding with eavesdropper nulling, per-user rate, single-pair forms and the MRT upper bound
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from src.core.errors import DomainError, RankDeficiencyError

GRAM_CONDITION_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """User channels H (MN x K) and eavesdropper channels G (MN x I) as columns"""

    H: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        G = np.asarray(self.G, dtype=complex)
        if H.ndim == 1:
            H = H[:, None]
        if G.ndim == 1:
            G = G.reshape(H.shape[0], -1) if G.size else np.zeros((H.shape[0], 0), dtype=complex)
        if H.shape[0] != G.shape[0]:
            raise ValueError(f"H has {H.shape[0]} rows but G has {G.shape[0]}")
        for name, mat in (("H", H), ("G", G)):
            if mat.shape[1] and np.any(np.linalg.norm(mat, axis=0) == 0.0):
                raise ValueError(f"{name} has an all-zero column")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "G", G)

    @property
    def num_users(self) -> int:
        return self.H.shape[1]

    @property
    def num_eves(self) -> int:
        return self.G.shape[1]

    @property
    def stacked(self) -> np.ndarray:
        return np.hstack([self.H, self.G])


@dataclass(frozen=True, eq=False)
class BeamformerOutput:
    W: np.ndarray
    wbar_fro_sq: float
    rate: float


def gram_condition(gram: np.ndarray) -> np.ndarray:
    """2-norm condition numbers of (batched) Hermitian PSD Gram matrices; inf when singular."""
    eig = np.linalg.eigvalsh(gram)
    smallest, largest = eig[..., 0], eig[..., -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(smallest > 0.0, largest / np.where(smallest > 0.0, smallest, 1.0), np.inf)
    return cond


def zf_power(gram: np.ndarray, num_users: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    ‖W̄‖_F² for a batch of Gram matrices [H,G]ᴴ[H,G] of shape (Q, K+I, K+I).

    ‖W̄‖_F² is the trace of the leading K x K block of the inverse Gram matrix. Returns
    (wbar_fro_sq, deficient, condition); deficient samples get wbar_fro_sq = inf.
    """
    gram = np.asarray(gram)
    cond = gram_condition(gram)
    deficient = ~(cond <= GRAM_CONDITION_LIMIT)
    wbar = np.full(gram.shape[0], np.inf)
    ok = ~deficient
    if np.any(ok):
        size = gram.shape[-1]
        rhs = np.broadcast_to(np.eye(size, num_users, dtype=gram.dtype), (int(ok.sum()), size, num_users))
        x = np.linalg.solve(gram[ok], rhs)
        wbar[ok] = np.einsum("qkk->q", x[:, :num_users, :]).real
    return wbar, deficient, cond


def zf_beamformer(ch: ChannelSet, P: float, noise_power: float) -> BeamformerOutput:
    """W̄ = first K columns of A(AᴴA)⁻¹ with A = [H, G], scaled to total power P"""
    A = ch.stacked
    K = ch.num_users
    if A.shape[1] > A.shape[0]:
        raise RankDeficiencyError(f"{A.shape[1]} channels exceed {A.shape[0]} antennas")
    gram = A.conj().T @ A
    cond = float(gram_condition(gram[None])[0])
    if not cond <= GRAM_CONDITION_LIMIT:
        raise RankDeficiencyError(f"Gram matrix condition number {cond:.3e} exceeds {GRAM_CONDITION_LIMIT:.0e}", cond)
    x = np.linalg.solve(gram, np.eye(A.shape[1], K, dtype=complex))
    wbar = A @ x
    fro_sq = float(np.sum(np.abs(wbar) ** 2))
    W = np.sqrt(P) * wbar / np.sqrt(fro_sq)
    return BeamformerOutput(W=W, wbar_fro_sq=fro_sq, rate=float(user_rate(fro_sq, P, noise_power)))


def user_rate(wbar_fro_sq: Union[float, np.ndarray], P: float, noise_power: float) -> Union[float, np.ndarray]:
    """log2(1 + P / (‖W̄‖_F² σ²)); an infinite ‖W̄‖_F² gives rate 0"""
    with np.errstate(divide="ignore"):
        rate = np.log2(1.0 + P / (np.asarray(wbar_fro_sq, dtype=float) * noise_power))
    return float(rate) if np.ndim(rate) == 0 else rate


def zf_single(h: np.ndarray, g: np.ndarray) -> Tuple[np.ndarray, float]:
    """Single-user ZF against one eavesdropper: w̄ = P⊥h / ‖P⊥h‖² with P⊥ = I − ggᴴ/‖g‖²."""
    h = np.asarray(h, dtype=complex)
    g = np.asarray(g, dtype=complex)
    h_sq = float(np.vdot(h, h).real)
    g_sq = float(np.vdot(g, g).real)
    if h_sq == 0.0 or g_sq == 0.0:
        raise ValueError("zf_single needs non-zero channels")
    residual = h - g * (np.vdot(g, h) / g_sq)
    inv_norm_sq = float(np.vdot(residual, residual).real)
    if inv_norm_sq <= 1e-12 * h_sq:
        return np.zeros_like(h), 0.0
    return residual / inv_norm_sq, inv_norm_sq


def inv_wnorm_closed(alpha: float, num_elements: int, corr: float) -> float:
    """1/‖w̄‖² = |α|²MN − |α|² corr² / MN"""
    if corr < 0.0 or corr > num_elements * (1.0 + 1e-9):
        raise DomainError(f"correlation {corr} outside [0, {num_elements}]")
    corr = min(corr, float(num_elements))
    gain = abs(alpha) ** 2
    return max(gain * num_elements - gain * corr**2 / num_elements, 0.0)


def mrt_power_allocation(H: np.ndarray, P: float) -> np.ndarray:
    """Max-min powers equalizing p_k ‖h_k‖²"""
    norms_sq = np.sum(np.abs(np.asarray(H)) ** 2, axis=0)
    if np.any(norms_sq == 0.0):
        raise ValueError("MRT bound needs non-zero user channels")
    inv = 1.0 / norms_sq
    return P * inv / inv.sum()


def mrt_upper_bound(H: np.ndarray, P: float, noise_power: float) -> float:
    """Interference-free MRT rate with max-min power allocation"""
    H = np.asarray(H)
    if H.ndim == 1:
        H = H[:, None]
    if H.shape[1] == 0:
        return 0.0
    norms_sq = np.sum(np.abs(H) ** 2, axis=0)
    if np.any(norms_sq == 0.0):
        raise ValueError("MRT bound needs non-zero user channels")
    snr = (P / noise_power) / np.sum(1.0 / norms_sq)
    return float(np.log2(1.0 + snr))


def single_pair_rate_bound(alpha: float, num_elements: int, P: float, noise_power: float) -> float:
    """Rate of one user when its channel is orthogonal to the eavesdropper's: log2(1 + |α|²MN P/σ²)"""
    return float(np.log2(1.0 + abs(alpha) ** 2 * num_elements * P / noise_power))
