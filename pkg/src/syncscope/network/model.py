"""Linearized synchronization model: [K], [Gamma], [K_H] and modal coordinates."""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import scipy.linalg

from ..control.phase_locking import rotation
from ..errors import NearDefectiveError
from .graph import Equilibrium, NetworkGraph

logger = logging.getLogger("syncscope")

# Eigenvector condition number beyond which modal coordinates are not trusted
KAPPA_MAX = 1e8

def _rotated_imag(value: complex, epsilon: float) -> float:
    """Im(e^{-j*eps} * value)."""
    cos_eps, sin_eps = rotation(epsilon)
    return value.imag * cos_eps - value.real * sin_eps

def loaded_channel_matrix(eq: Equilibrium, graph: NetworkGraph) -> np.ndarray:
    """K_mn = -|S_mn0| |G_mn(j w0)| sin(kappa_mn), kappa_mn = eps_m - <S_mn0 - <G_mn(j w0).

    Computed as Im(e^{-j*eps_m} * S_mn0 * G_mn(j w0)), which is the same quantity without
    taking angles of zero-valued powers. The diagonal is minus the off-diagonal row sum.
    """
    n = len(graph)
    K = np.zeros((n, n))
    for (m, src), gain in eq.gains.items():
        if m == src:
            continue
        i, j = graph.index(m), graph.index(src)
        K[i, j] = _rotated_imag(eq.powers[(m, src)].value * gain, graph.node(m).epsilon)
    np.fill_diagonal(K, 0.0)
    np.fill_diagonal(K, -K.sum(axis=1))
    return K

def frequency_shift_matrix(eq: Equilibrium, graph: NetworkGraph) -> np.ndarray:
    """Gamma_mn = -|S_mn0| |G'_mn(j w0)| sin(gamma_mn), gamma_mn = eps_m - <S_mn0 - <G'_mn(j w0).

    Gamma_mm comes from the node's self-channel (S_mm0 = A_m^2); it is 0 without one.
    """
    n = len(graph)
    gamma = np.zeros((n, n))
    for (m, src), derivative in eq.gain_derivatives.items():
        i, j = graph.index(m), graph.index(src)
        gamma[i, j] = _rotated_imag(eq.powers[(m, src)].value * derivative, graph.node(m).epsilon)

    defaulted = graph.nodes_without_self_channel()
    if defaulted:
        logger.warning(f"Gamma diagonal set to 0 for nodes without a self-channel: {defaulted}")
    return gamma

@dataclass(frozen=True)
class SynchronizationModel:
    node_ids: List[str]
    inertia: np.ndarray
    K: np.ndarray
    gamma: np.ndarray
    K_H: np.ndarray
    xi: np.ndarray
    phi: np.ndarray
    gamma_h_phi: np.ndarray
    condition_number: float
    eigen_residual: float
    gamma_residual: float
    kernel_residual: float
    # H_m*(D_m - D) folded into the gamma diagonal; zeros unless a shared damping was set
    damping_excess: np.ndarray = None

    def __post_init__(self):
        if self.damping_excess is None:
            object.__setattr__(self, "damping_excess", np.zeros(len(self.inertia)))

    @property
    def network_gamma(self) -> np.ndarray:
        """Gamma of the channels alone, without the folded-in damping excess."""
        return self.gamma - np.diag(self.damping_excess)

    def network_gamma_h_phi(self) -> np.ndarray:
        return np.linalg.solve(self.phi, (self.network_gamma / self.inertia[:, None]) @ self.phi)

    @property
    def size(self) -> int:
        return len(self.xi)

    def mode_shape_magnitudes(self) -> np.ndarray:
        """|Phi| with every column scaled to unit maximum."""
        magnitudes = np.abs(self.phi)
        peaks = magnitudes.max(axis=0)
        peaks[peaks == 0] = 1.0
        return magnitudes / peaks

    def participation_factors(self) -> np.ndarray:
        """p[k, i] = |Phi_ki * Psi_ik| with Psi = Phi^-1."""
        psi = np.linalg.inv(self.phi)
        return np.abs(self.phi * psi.T)

def _normalize_columns(phi: np.ndarray) -> np.ndarray:
    """Unit 2-norm columns, phase fixed so the largest entry is real and positive."""
    phi = phi.astype(complex, copy=True)
    for col in range(phi.shape[1]):
        vector = phi[:, col]
        norm = np.linalg.norm(vector)
        if norm == 0:
            continue
        pivot = vector[np.argmax(np.abs(vector) - 1e-12 * np.arange(vector.size))]
        phi[:, col] = vector / norm * (abs(pivot) / pivot)
    return phi

def _relative(residual: float, scale: float) -> float:
    return residual / scale if scale > 0 else residual

def modal_decomposition(K: np.ndarray, H: np.ndarray, gamma: np.ndarray,
                        node_ids: List[str] = None, kappa_max: float = KAPPA_MAX,
                        damping_excess: Optional[np.ndarray] = None) -> SynchronizationModel:
    """Eigen-decompose K_H = H^-1 K and express H^-1 Gamma in its eigenbasis.

    Modes are sorted by ascending |xi|, so the synchronous (rigid-rotation) mode with
    xi = 0 and an all-ones eigenvector comes first.
    """
    K = np.asarray(K, dtype=float)
    H = np.asarray(H, dtype=float).reshape(-1)
    gamma = np.asarray(gamma, dtype=float)
    n = K.shape[0]
    damping_excess = np.zeros(n) if damping_excess is None else np.asarray(damping_excess, dtype=float)
    if node_ids is None:
        node_ids = [str(i) for i in range(n)]

    K_H = K / H[:, None]
    gamma_H = gamma / H[:, None]

    xi, phi = scipy.linalg.eig(K_H)
    order = np.lexsort((xi.imag, xi.real, np.abs(xi)))
    xi = xi[order]
    phi = _normalize_columns(phi[:, order])

    condition = float(np.linalg.cond(phi))
    if not np.isfinite(condition) or condition > kappa_max:
        raise NearDefectiveError(
            f"Eigenvectors of K_H are nearly dependent (condition {condition:.3g} > {kappa_max:.3g}); "
            f"perturb inertias or operating point slightly and retry"
        )

    gamma_h_phi = np.linalg.solve(phi, gamma_H @ phi)

    norm_kh = np.linalg.norm(K_H, 2)
    eigen_residual = _relative(np.linalg.norm(K_H @ phi - phi * xi[None, :], 2), norm_kh)
    gamma_residual = _relative(
        np.linalg.norm(phi @ gamma_h_phi - gamma_H @ phi, 2),
        np.linalg.norm(gamma_H, 2) * np.linalg.norm(phi, 2),
    )
    kernel_residual = _relative(np.linalg.norm(K_H @ np.ones(n)), norm_kh)

    logger.debug(f"K_H eigenvalues: {xi.tolist()} (eigenvector condition {condition:.3g})")
    return SynchronizationModel(
        node_ids=list(node_ids),
        inertia=H,
        K=K,
        gamma=gamma,
        K_H=K_H,
        xi=xi,
        phi=phi,
        gamma_h_phi=gamma_h_phi,
        condition_number=condition,
        eigen_residual=float(eigen_residual),
        gamma_residual=float(gamma_residual),
        kernel_residual=float(kernel_residual),
        damping_excess=damping_excess,
    )

def shared_damping(graph: NetworkGraph) -> float:
    """The D of the common inertia dynamics T(s) = 1/(s + D): the smallest node damping."""
    damping = graph.damping
    shared = float(damping.min()) if damping.size else 0.0
    if damping.size and not np.allclose(damping, shared, rtol=0.0, atol=1e-12):
        logger.warning(
            f"Node damping is not uniform ({damping.min():.6g}..{damping.max():.6g}); "
            f"using D={shared:.6g} and moving the excess onto the Gamma diagonal"
        )
    return shared

def build_synchronization_model(graph: NetworkGraph, eq: Equilibrium,
                                damping: Optional[float] = None) -> SynchronizationModel:
    """K, Gamma and the modal decomposition for a graph at its equilibrium.

    With a shared damping D, each node's extra damping H_m*(D_m - D) acts exactly like
    a self frequency-shift term and is added to Gamma_mm.
    """
    K = loaded_channel_matrix(eq, graph)
    gamma = frequency_shift_matrix(eq, graph)
    excess = None
    if damping is not None:
        excess = graph.inertia * (graph.damping - damping)
        gamma = gamma + np.diag(excess)
    return modal_decomposition(K, graph.inertia, gamma, graph.node_ids, damping_excess=excess)
