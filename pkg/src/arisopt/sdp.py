"""Self-contained solver for linear SDPs over a Hermitian PSD variable.

Problem class:

    minimize    tr(C X)
    subject to  tr(A_i X) <= b_i          (Hermitian A_i, real b_i)
                X(n,n)    <= d_n          (diagonal upper bounds)
                X(e,e)     = v_e          (diagonal equalities)
                X >= 0                    (Hermitian PSD)

Everything is reduced to trace inequalities (equalities become two), the
complex problem is embedded into a real symmetric one of twice the
dimension, and an alternating-direction augmented-Lagrangian scheme is run
on the dual: each iteration solves one small linear system with a cached
Cholesky factor and projects one symmetric matrix onto the PSD cone via
eigendecomposition.  Slacks for the inequalities ride along as a
nonnegative block of the cone variable.

The scheme keeps the primal iterate PSD and complementary to the dual
slack at every step, so on convergence the reported primal/dual residuals
and duality gap certify the solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .lifting import AugmentedResponse

HERM_TOL = 1e-12


def _as_herm(M: np.ndarray, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square")
    asym = np.abs(M - M.conj().T).max()
    if asym > HERM_TOL * (1.0 + np.abs(M).max()):
        raise ValueError(f"{name} is not Hermitian (asymmetry {asym:.3e})")
    return 0.5 * (M + M.conj().T)


@dataclass(frozen=True)
class SdpProblem:
    C: np.ndarray
    ineqs: tuple[tuple[np.ndarray, float], ...] = ()
    diag_ub: dict[int, float] = field(default_factory=dict)
    diag_eq: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        C = _as_herm(self.C, "objective C")
        object.__setattr__(self, "C", C)
        n = C.shape[0]
        checked = []
        for i, (A, b) in enumerate(self.ineqs):
            A = _as_herm(A, f"ineq matrix {i}")
            if A.shape != (n, n):
                raise ValueError(f"ineq matrix {i} has wrong dimension")
            if not np.isfinite(b):
                raise ValueError(f"ineq bound {i} must be finite")
            checked.append((A, float(b)))
        object.__setattr__(self, "ineqs", tuple(checked))
        for idx, v in {**self.diag_ub, **self.diag_eq}.items():
            if not 0 <= idx < n:
                raise ValueError(f"diagonal index {idx} out of range")
            if v < 0 or not np.isfinite(v):
                raise ValueError("diagonal bounds must be finite and >= 0")

    @property
    def dim(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class SolverSettings:
    eps_abs: float = 1e-7
    eps_rel: float = 1e-6
    max_iters: int = 50_000
    rho: float = 1.0  # splitting penalty; adapted by residual balancing
    adaptive_rho: bool = True
    check_every: int = 25
    track_history: bool = False


@dataclass
class SdpSolution:
    X: np.ndarray
    objective: float
    status: str  # "optimal" | "max_iters" | "infeasible"
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    dual_objective: float
    y: np.ndarray
    S: np.ndarray
    rho: float
    history: list = field(default_factory=list)


def real_embed(M: np.ndarray) -> np.ndarray:
    """Hermitian M = A + iB -> real symmetric [[A, -B], [B, A]].

    Eigenvalues are preserved (each doubled), PSD-ness is equivalent, and
    tr(M X) equals half the trace of the embedded product.
    """
    A, B = M.real, M.imag
    return np.block([[A, -B], [B, A]])


def real_unembed(Y: np.ndarray) -> np.ndarray:
    """Inverse of real_embed with block symmetrization."""
    n = Y.shape[0] // 2
    A = 0.5 * (Y[:n, :n] + Y[n:, n:])
    B = 0.5 * (Y[n:, :n] - Y[:n, n:])
    X = A + 1j * B
    return 0.5 * (X + X.conj().T)


def _constraint_rows(P: SdpProblem) -> tuple[np.ndarray, np.ndarray]:
    """All constraints as tr(A_i X) <= b_i in complex Hermitian form."""
    n = P.dim
    mats, bs = [], []
    for A, b in P.ineqs:
        mats.append(A)
        bs.append(b)
    for idx, ub in sorted(P.diag_ub.items()):
        E = np.zeros((n, n), dtype=complex)
        E[idx, idx] = 1.0
        mats.append(E)
        bs.append(ub)
    for idx, v in sorted(P.diag_eq.items()):
        E = np.zeros((n, n), dtype=complex)
        E[idx, idx] = 1.0
        mats.append(E)
        bs.append(v)
        mats.append(-E)
        bs.append(-v)
    return mats, np.asarray(bs, dtype=float)


def solve(
    P: SdpProblem,
    settings: SolverSettings = SolverSettings(),
    warm: SdpSolution | None = None,
) -> SdpSolution:
    """Run the operator-splitting loop until the residual test or the cap."""
    n = P.dim
    ne = 2 * n
    mats, b = _constraint_rows(P)
    m = len(mats)
    if m == 0:
        raise ValueError("problem has no constraints; the SDP is unbounded or trivial")

    # embedded, flattened constraint rows; the 1/2 makes <row, vec(Y)> = tr(A X)
    a_rows = np.stack([0.5 * real_embed(A).reshape(-1) for A in mats])
    row_norms = np.linalg.norm(a_rows, axis=1)
    row_norms[row_norms < 1e-30] = 1.0
    a_hat = a_rows / row_norms[:, None]
    b_hat = b / row_norms

    C_emb = 0.5 * real_embed(P.C)
    c_scale = np.linalg.norm(C_emb)
    if c_scale < 1e-30:
        c_scale = 1.0
    C_hat = C_emb / c_scale

    gram = a_hat @ a_hat.T
    gram[np.diag_indices_from(gram)] += 1.0
    chol = sla.cho_factor(gram, lower=True, check_finite=False)

    rho = settings.rho
    if warm is not None:
        Y = real_embed(warm.X)
        y = warm.y * row_norms / c_scale
        S = 0.5 * real_embed(warm.S) / c_scale
        rho = warm.rho
    else:
        Y = np.zeros((ne, ne))
        y = np.zeros(m)
        S = np.zeros((ne, ne))
    s = np.maximum(b_hat - a_hat @ Y.reshape(-1), 0.0)
    S_s = np.maximum(-y, 0.0)

    history: list[tuple[int, float, float, float]] = []
    status = "max_iters"
    pres = dres = gap = np.inf
    it = 0
    c_vec = C_hat.reshape(-1)

    for it in range(1, settings.max_iters + 1):
        r_p = a_hat @ Y.reshape(-1) + s - b_hat
        rhs = rho * r_p + (a_hat @ (S.reshape(-1) - c_vec) + S_s)
        y = -sla.cho_solve(chol, rhs, check_finite=False)

        V = C_hat - (a_hat.T @ y).reshape(ne, ne) - rho * Y
        V = 0.5 * (V + V.T)
        w, Q = sla.eigh(V, check_finite=False)
        neg = w < 0.0
        if neg.any():
            Qn = Q[:, neg]
            Vneg = (Qn * w[neg]) @ Qn.T
            Y = -Vneg / rho
            S = V - Vneg
        else:
            Y = np.zeros_like(V)
            S = V
        V_s = -y - rho * s
        S_s = np.maximum(V_s, 0.0)
        s = (S_s - V_s) / rho

        if it % settings.check_every == 0 or it == settings.max_iters:
            pres_v = a_hat @ Y.reshape(-1) + s - b_hat
            pres = np.linalg.norm(pres_v)
            dmat = C_hat - (a_hat.T @ y).reshape(ne, ne) - S
            dres = np.hypot(np.linalg.norm(dmat), np.linalg.norm(-y - S_s))
            pobj = float(c_vec @ Y.reshape(-1))
            dobj = float(b_hat @ y)
            gap = abs(pobj - dobj)
            if settings.track_history:
                history.append((it, pres, dres, gap))
            p_tol = settings.eps_abs + settings.eps_rel * max(
                np.linalg.norm(a_hat @ Y.reshape(-1)), np.linalg.norm(s), np.linalg.norm(b_hat)
            )
            d_tol = settings.eps_abs + settings.eps_rel * max(
                np.linalg.norm(S), np.linalg.norm(c_vec), np.linalg.norm(y)
            )
            g_tol = settings.eps_abs + settings.eps_rel * (abs(pobj) + abs(dobj))
            if pres <= p_tol and dres <= d_tol and gap <= g_tol:
                status = "optimal"
                break
            norm_Y = np.linalg.norm(Y)
            if not np.isfinite(norm_Y) or norm_Y > 1e9 * (1.0 + np.linalg.norm(b_hat)):
                status = "infeasible"
                break
            if settings.adaptive_rho and it % (settings.check_every * 2) == 0:
                if pres > 10.0 * dres:
                    rho = max(rho / 2.0, 1e-6)
                elif dres > 10.0 * pres:
                    rho = min(rho * 2.0, 1e6)

    X = real_unembed(Y)
    S_orig = real_unembed(2.0 * c_scale * S)
    y_orig = y * c_scale / row_norms
    objective = float(np.trace(P.C @ X).real)
    dual_objective = float(b @ y_orig)

    # certificates in original units
    viol = np.maximum(np.array([np.trace(A @ X).real for A in mats]) - b, 0.0)
    primal_residual = float(np.linalg.norm(viol) / (1.0 + np.linalg.norm(b)))
    dmat_o = P.C - sum(yi * A for yi, A in zip(y_orig, mats)) - S_orig
    dual_residual = float(
        np.hypot(np.linalg.norm(dmat_o), np.linalg.norm(np.maximum(y_orig, 0.0)))
        / (1.0 + np.linalg.norm(P.C))
    )
    gap_rel = abs(objective - dual_objective) / (1.0 + abs(objective) + abs(dual_objective))

    return SdpSolution(
        X=X,
        objective=objective,
        status=status,
        primal_residual=primal_residual,
        dual_residual=dual_residual,
        gap=float(gap_rel),
        iterations=it,
        dual_objective=dual_objective,
        y=y_orig,
        S=S_orig,
        rho=rho,
        history=history,
    )


@dataclass
class RankOneContext:
    """What the rounding step needs: the feasibility box and a cost to rank
    repaired candidates by (lower is better)."""

    beta_max: float
    score: Callable[[np.ndarray], float]
    rng: np.random.Generator
    samples: int = 200
    rank1_tol: float = 1e-3


def _repair(vec: np.ndarray, beta_max: float) -> np.ndarray:
    """Normalize the last entry to 1 and clip magnitudes into the beta box."""
    v = np.asarray(vec, dtype=complex)
    c = v[-1]
    if abs(c) < 1e-12:
        phi = v[:-1]
    else:
        phi = v[:-1] / c
    mags = np.abs(phi)
    over = mags > beta_max
    if over.any():
        phi = phi.copy()
        phi[over] *= beta_max / mags[over]
    return np.concatenate([phi, [1.0 + 0j]])


def extract_rank_one(X: np.ndarray, ctx: RankOneContext) -> AugmentedResponse:
    """Recover a feasible augmented response vector from the relaxed matrix.

    Near-rank-one X: principal eigenpair.  Otherwise Gaussian randomization
    with covariance X, each sample repaired into the feasible box and the
    best-scoring candidate kept (the principal eigenvector always
    participates).
    """
    X = _as_herm(X, "relaxed solution")
    w, U = np.linalg.eigh(X)
    lam1 = w[-1]
    if lam1 <= 1e-14:
        zero = np.zeros(X.shape[0], dtype=complex)
        zero[-1] = 1.0
        return AugmentedResponse(zero)
    principal = np.sqrt(lam1) * U[:, -1]
    lam2 = w[-2] if len(w) > 1 else 0.0
    if lam2 / lam1 <= ctx.rank1_tol:
        return AugmentedResponse(_repair(principal, ctx.beta_max))

    wpos = np.maximum(w, 0.0)
    L = U * np.sqrt(wpos)
    best = _repair(principal, ctx.beta_max)
    best_score = ctx.score(best)
    for _ in range(ctx.samples):
        z = (ctx.rng.standard_normal(len(w)) + 1j * ctx.rng.standard_normal(len(w))) / np.sqrt(2)
        cand = _repair(L @ z, ctx.beta_max)
        sc = ctx.score(cand)
        if sc < best_score:
            best, best_score = cand, sc
    return AugmentedResponse(best)


def dump_problem(P: SdpProblem, path) -> None:
    """Plain-text dump for cross-checking against external solvers.

    Format: `dim n` header, then one block per matrix.  Blocks are the
    objective (`objective`), each inequality (`ineq <b>`), and the diagonal
    bounds (`diag_ub <idx> <ub>` / `diag_eq <idx> <val>` lines).  Matrix
    entries are written row-major, one row per line, as `re im` pairs.
    """
    lines = [f"dim {P.dim}"]

    def emit(M: np.ndarray):
        for row in M:
            lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))

    lines.append("objective")
    emit(P.C)
    for A, b in P.ineqs:
        lines.append(f"ineq {b:.17g}")
        emit(A)
    for idx, ub in sorted(P.diag_ub.items()):
        lines.append(f"diag_ub {idx} {ub:.17g}")
    for idx, v in sorted(P.diag_eq.items()):
        lines.append(f"diag_eq {idx} {v:.17g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_problem(path) -> SdpProblem:
    """Parse a dump_problem file back into an SdpProblem."""
    with open(path, encoding="utf-8") as fh:
        toks = [ln.strip() for ln in fh if ln.strip()]
    pos = 0
    if not toks[pos].startswith("dim "):
        raise ValueError("dump must start with a 'dim n' header")
    n = int(toks[pos].split()[1])
    pos += 1

    def read_matrix(at: int) -> tuple[np.ndarray, int]:
        M = np.empty((n, n), dtype=complex)
        for r in range(n):
            vals = [float(x) for x in toks[at + r].split()]
            M[r] = [complex(vals[2 * j], vals[2 * j + 1]) for j in range(n)]
        return M, at + n

    C = None
    ineqs = []
    diag_ub: dict[int, float] = {}
    diag_eq: dict[int, float] = {}
    while pos < len(toks):
        head = toks[pos].split()
        pos += 1
        if head[0] == "objective":
            C, pos = read_matrix(pos)
        elif head[0] == "ineq":
            A, pos = read_matrix(pos)
            ineqs.append((A, float(head[1])))
        elif head[0] == "diag_ub":
            diag_ub[int(head[1])] = float(head[2])
        elif head[0] == "diag_eq":
            diag_eq[int(head[1])] = float(head[2])
        else:
            raise ValueError(f"unknown block {head[0]!r}")
    if C is None:
        raise ValueError("dump has no objective block")
    return SdpProblem(C=C, ineqs=tuple(ineqs), diag_ub=diag_ub, diag_eq=diag_eq)
