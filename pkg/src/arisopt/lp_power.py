"""User transmit-power subproblem for a fixed (relaxed) surface response.

With the traces t_k = tr(F_k Phibar) and t_j = tr(F_j Phibar) fixed, the
minimum-sum-power point satisfies every SINR constraint with equality:
lowering any p_k only relaxes the constraints of earlier-decoded users, so
the unique optimum is obtained by back-substitution from the last user
upward.  A generic LP route (scipy linprog on the triangular system) is
kept purely as a cross-check oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

T_TOL = 1e-12  # effective-channel traces below this are treated as dead links


class InfeasiblePowers(RuntimeError):
    """Some user has no usable effective channel (t_k ~ 0)."""


@dataclass(frozen=True)
class LpInstance:
    t: np.ndarray  # (K,) traces tr(F_k Phibar)
    t_j: float  # trace tr(F_j Phibar)
    P_j: float
    sigma2: float
    targets: np.ndarray  # (K,) linear SINR thresholds

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        tg = np.asarray(self.targets, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "targets", tg)
        if t.shape != tg.shape or t.ndim != 1:
            raise ValueError("t and targets must be 1-D arrays of equal length")

    @property
    def K(self) -> int:
        return len(self.t)


def solve_powers(inst: LpInstance, method: str = "backsub") -> np.ndarray:
    """Minimum-sum-power vector meeting every SINR target with equality.

    method "backsub" is the closed-form production path; "linprog" solves
    the equivalent LP with scipy (test oracle only).
    """
    if np.any(inst.t <= T_TOL):
        bad = int(np.argmax(inst.t <= T_TOL))
        raise InfeasiblePowers(
            f"user {bad} has no effective channel (trace {inst.t[bad]:.3e})"
        )
    if method == "backsub":
        K = inst.K
        p = np.zeros(K)
        base = inst.P_j * inst.t_j + inst.sigma2
        acc = 0.0  # sum_{i>k} p_i t_i
        for k in range(K - 1, -1, -1):
            p[k] = inst.targets[k] * (base + acc) / inst.t[k]
            acc += p[k] * inst.t[k]
        return p
    if method == "linprog":
        from scipy.optimize import linprog

        A, b = lp_matrices(inst)
        res = linprog(np.ones(inst.K), A_ub=A, b_ub=b, bounds=(0, None), method="highs")
        if not res.success:
            raise InfeasiblePowers(f"linprog failed: {res.message}")
        return np.asarray(res.x, dtype=float)
    raise ValueError(f"unknown method {method!r}")


def lp_matrices(inst: LpInstance) -> tuple[np.ndarray, np.ndarray]:
    """Upper-triangular inequality system A p <= b encoding the SINR targets.

    A(k,k) = -t_k, A(k,i) = T_k t_i for i > k, b(k) = -T_k (P_j t_j + sigma2).
    """
    K = inst.K
    A = np.zeros((K, K))
    for k in range(K):
        A[k, k] = -inst.t[k]
        A[k, k + 1:] = inst.targets[k] * inst.t[k + 1:]
    b = -inst.targets * (inst.P_j * inst.t_j + inst.sigma2)
    return A, b
