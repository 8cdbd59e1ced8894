"""Quadratic-form representation of the SINR terms.

Every squared-magnitude channel term becomes phibar^H F phibar where
phibar = [phi; 1] is the surface response augmented with a unit entry.
With z_k = f * g_k (elementwise) and Z = diag(f) G_j:

    |h_k + f^T diag(phi) g_k|^2        = phibar^H F_k phibar
    ||h_j^T + f^T diag(phi) G_j||^2    = phibar^H F_j phibar

F_k is the rank-one Gram matrix of the row [z_k^T, h_k]; F_j is the Gram
matrix of [Z^T, h_j], rank <= M.  Both are Hermitian PSD by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioRealization


@dataclass(frozen=True)
class RISResponse:
    """Length-N complex reflection vector, |phi_n| <= beta_max."""

    phi: np.ndarray
    beta_max: float = 1.0

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=complex)
        object.__setattr__(self, "phi", phi)
        if phi.ndim != 1:
            raise ValueError("phi must be a 1-D complex vector")
        mags = np.abs(phi)
        if mags.max(initial=0.0) > self.beta_max + 1e-9:
            raise ValueError(
                f"reflection amplitude {mags.max():.6g} exceeds beta_max={self.beta_max}"
            )

    @property
    def matrix(self) -> np.ndarray:
        """Diagonal N x N view diag(phi)."""
        return np.diag(self.phi)

    @property
    def mean_reflection(self) -> float:
        """(1/N) sum |phi_n| -- the absorption metric."""
        return float(np.mean(np.abs(self.phi)))


@dataclass(frozen=True)
class AugmentedResponse:
    """Length N+1 vector [phi; c] with |c| = 1."""

    phibar: np.ndarray

    def __post_init__(self):
        pb = np.asarray(self.phibar, dtype=complex)
        object.__setattr__(self, "phibar", pb)
        if pb.ndim != 1 or len(pb) < 2:
            raise ValueError("phibar must be a 1-D vector of length N+1 >= 2")
        if abs(abs(pb[-1]) - 1.0) > 1e-9:
            raise ValueError("last entry of phibar must have unit magnitude")

    def normalized(self) -> np.ndarray:
        """The physical reflection vector phibar(1:N) / phibar(N+1)."""
        return self.phibar[:-1] / self.phibar[-1]

    def to_response(self, beta_max: float) -> RISResponse:
        return RISResponse(self.normalized(), beta_max=beta_max)


@dataclass(frozen=True)
class LiftedForms:
    """Hermitian (N+1)x(N+1) matrices: F[k] per user and F_j for the jammer."""

    F: np.ndarray  # (K, N+1, N+1)
    F_j: np.ndarray  # (N+1, N+1)

    @property
    def K(self) -> int:
        return self.F.shape[0]

    @property
    def dim(self) -> int:
        return self.F_j.shape[0]


def _hermitize(X: np.ndarray) -> np.ndarray:
    # kill rounding asymmetry from the outer products
    return 0.5 * (X + X.conj().swapaxes(-1, -2))


def build_lifted(s: ScenarioRealization) -> LiftedForms:
    """Assemble F_k for every user and F_j for the jammer."""
    K, N, M = s.dims
    F = np.empty((K, N + 1, N + 1), dtype=complex)
    for k in range(K):
        row = np.concatenate([s.f * s.g[:, k], [s.h[k]]])  # [z_k^T, h_k]
        F[k] = np.outer(row.conj(), row)
    B = np.concatenate([(s.f[:, None] * s.G_j).T, s.h_j[:, None]], axis=1)  # (M, N+1)
    F_j = B.conj().T @ B
    return LiftedForms(F=_hermitize(F), F_j=_hermitize(F_j))


def augmented(phi: np.ndarray | RISResponse) -> np.ndarray:
    phi = phi.phi if isinstance(phi, RISResponse) else np.asarray(phi, dtype=complex)
    return np.concatenate([phi, [1.0 + 0j]])


def jammer_row(s: ScenarioRealization, phi: np.ndarray | RISResponse) -> np.ndarray:
    """The 1 x M effective jammer channel h_j^T + f^T diag(phi) G_j."""
    phi = phi.phi if isinstance(phi, RISResponse) else np.asarray(phi, dtype=complex)
    return s.h_j + (s.f * phi) @ s.G_j


def jammer_power(
    s: ScenarioRealization, phi: np.ndarray | RISResponse, mode: str = "intelligent"
) -> float:
    """Received jamming power sigma_j^2 at the BS.

    "intelligent": matched-filter jammer, P_j * ||h_j^T + f^T diag(phi) G_j||^2.
    "white": spatially white noise jammer, the same divided by M.
    """
    norm2 = float(np.sum(np.abs(jammer_row(s, phi)) ** 2))
    if mode == "intelligent":
        return s.P_j * norm2
    if mode == "white":
        return s.P_j * norm2 / len(s.h_j)
    raise ValueError(f"unknown jammer mode {mode!r}")


def achieved_sinrs(
    s: ScenarioRealization,
    phi: np.ndarray | RISResponse,
    p: np.ndarray,
    mode: str = "intelligent",
) -> np.ndarray:
    """Per-user decoding SINRs under the SIC chain.

    gamma_k = p_k q_k / (sum_{i>k} p_i q_i + sigma_j^2 + sigma^2) with
    q_i the effective channel gains; the last user sees no multi-user
    interference.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("powers must be nonnegative")
    phi_arr = phi.phi if isinstance(phi, RISResponse) else np.asarray(phi, dtype=complex)
    q = np.abs(s.h + (s.f * phi_arr) @ s.g) ** 2
    sig_j2 = jammer_power(s, phi_arr, mode=mode)
    terms = p * q
    # residual interference after SIC: strictly later users only
    tail = np.concatenate([np.cumsum(terms[::-1])[::-1][1:], [0.0]])
    return terms / (tail + sig_j2 + s.sigma2)
