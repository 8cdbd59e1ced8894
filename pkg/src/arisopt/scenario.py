"""Channel realizations and deployment geometry for the uplink NOMA + A-RIS setup.

Two generation modes are supported: fixed expected link gains (the flat
"gain table" experiments) and a 2-D geometric mode where every link gain
follows the path-loss law P_r/P_t = K0 / d^alpha.

All small-scale fading is i.i.d. circularly symmetric complex Gaussian
(Rayleigh envelope).  The papers' gain tables only pin the expected
magnitude of each entry, so the distributional choice is an assumption of
this implementation and is documented here and in the README.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# E|x| = s*sqrt(pi/2) for x = s*(z1 + 1j*z2), z ~ N(0,1): Rayleigh mean.
_RAYLEIGH_MEAN = np.sqrt(np.pi / 2.0)

RNG_ALGORITHM = "philox"  # counter-based; recorded in run metadata


class ScenarioError(ValueError):
    """Invalid scenario configuration or dimension mismatch."""


@dataclass(frozen=True)
class SystemDims:
    """Problem sizes: K users, N surface elements, M jammer antennas."""

    K: int
    N: int
    M: int

    def __post_init__(self):
        for name in ("K", "N", "M"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ScenarioError(f"{name} must be a positive integer, got {v!r}")


@dataclass(frozen=True)
class FixedGains:
    """Expected magnitudes per link (gain-table mode).

    h[k]   : user k -> BS direct channel
    f      : per-element surface -> BS
    g[k]   : per-element user k -> surface
    h_j    : per-antenna jammer -> BS
    G_j    : per-entry jammer -> surface
    """

    h: tuple[float, ...]
    f: float
    g: tuple[float, ...]
    h_j: float
    G_j: float

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(float(x) for x in self.h))
        object.__setattr__(self, "g", tuple(float(x) for x in self.g))
        for name in ("h", "g"):
            if any(x < 0 for x in getattr(self, name)):
                raise ScenarioError(f"expected magnitudes in {name} must be >= 0")
        if self.f < 0 or self.h_j < 0 or self.G_j < 0:
            raise ScenarioError("expected magnitudes must be >= 0")


@dataclass(frozen=True)
class Geometry:
    """2-D node layout plus the path-loss law parameters.

    alpha1 applies to the direct user -> BS links; alpha2 to every link
    touching the surface and to the jammer -> BS link.
    """

    K0: float
    alpha1: float
    alpha2: float
    bs: tuple[float, float]
    aris: tuple[float, float]
    jammer: tuple[float, float]
    users: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.K0 < 0:
            raise ScenarioError("K0 must be >= 0")
        pts = [self.bs, self.aris, self.jammer, *self.users]
        for p in pts:
            if len(p) != 2 or not all(np.isfinite(p)):
                raise ScenarioError(f"positions must be finite 2-D coordinates, got {p!r}")
        object.__setattr__(self, "users", tuple(tuple(map(float, u)) for u in self.users))


@dataclass(frozen=True)
class ScenarioConfig:
    dims: SystemDims
    gains: FixedGains | Geometry
    P_j: float
    sigma2: float
    targets: tuple[float, ...]
    beta_max: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(float(t) for t in self.targets))
        if len(self.targets) != self.dims.K:
            raise ScenarioError(
                f"need {self.dims.K} SINR targets, got {len(self.targets)}"
            )
        if any(t <= 0 for t in self.targets):
            raise ScenarioError("SINR targets must be > 0")
        if self.P_j < 0:
            raise ScenarioError("jammer power must be >= 0")
        if self.sigma2 <= 0:
            raise ScenarioError("noise power must be > 0")
        if not 0.0 < self.beta_max <= 1.0:
            raise ScenarioError("beta_max must lie in (0, 1]")
        if isinstance(self.gains, FixedGains):
            if len(self.gains.h) != self.dims.K or len(self.gains.g) != self.dims.K:
                raise ScenarioError("gain table length does not match user count K")
        else:
            if len(self.gains.users) != self.dims.K:
                raise ScenarioError("geometry needs one position per user")


@dataclass(frozen=True)
class ScenarioRealization:
    """One draw of all channels plus the scalar system parameters.

    Shapes: h (K,), f (N,), g (N, K) column per user, h_j (M,), G_j (N, M).
    Immutable; safe to share across workers.
    """

    h: np.ndarray
    f: np.ndarray
    g: np.ndarray
    h_j: np.ndarray
    G_j: np.ndarray
    P_j: float
    sigma2: float
    targets: tuple[float, ...]
    beta_max: float

    def __post_init__(self):
        if self.h.ndim != 1 or self.f.ndim != 1 or self.h_j.ndim != 1:
            raise ScenarioError("h, f, h_j must be 1-D arrays")
        K, N, M = self.dims
        if self.g.shape != (N, K):
            raise ScenarioError(f"g must have shape {(N, K)}, got {self.g.shape}")
        if self.G_j.shape != (N, M):
            raise ScenarioError(f"G_j must have shape {(N, M)}, got {self.G_j.shape}")
        for arr in (self.h, self.f, self.g, self.h_j, self.G_j):
            if not np.isfinite(arr).all():
                raise ScenarioError("channel entries must be finite")
        if len(self.targets) != K:
            raise ScenarioError("target count does not match K")

    @property
    def dims(self) -> tuple[int, int, int]:
        return len(self.h), len(self.f), len(self.h_j)

    def permuted(self, order: np.ndarray) -> "ScenarioRealization":
        """Re-index the per-user quantities (decoding-order sort)."""
        return ScenarioRealization(
            h=self.h[order],
            f=self.f,
            g=self.g[:, order],
            h_j=self.h_j,
            G_j=self.G_j,
            P_j=self.P_j,
            sigma2=self.sigma2,
            targets=tuple(np.asarray(self.targets)[order]),
            beta_max=self.beta_max,
        )


def default_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so Monte-Carlo trials are reproducible."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def trial_rng(master_seed: int, point_index: int, trial: int) -> np.random.Generator:
    """Independent stream for trial `trial` at sweep point `point_index`.

    Derived from (master_seed, point, trial) so adding trials or points never
    perturbs the draws of earlier ones.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(point_index, trial))
    return np.random.Generator(np.random.Philox(ss))


def _complex_gaussian(rng: np.random.Generator, shape, mean_mag) -> np.ndarray:
    """CSCG entries scaled so E|x| equals mean_mag (elementwise broadcastable)."""
    scale = np.asarray(mean_mag, dtype=float) / _RAYLEIGH_MEAN
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return scale * z


def draw_fixed_gain(config: ScenarioConfig, rng: np.random.Generator) -> ScenarioRealization:
    """Draw one realization in gain-table mode."""
    if not isinstance(config.gains, FixedGains):
        raise ScenarioError("draw_fixed_gain requires a FixedGains spec")
    K, N, M = config.dims.K, config.dims.N, config.dims.M
    gs = config.gains
    h = _complex_gaussian(rng, (K,), np.asarray(gs.h))
    f = _complex_gaussian(rng, (N,), gs.f)
    g = _complex_gaussian(rng, (N, K), np.asarray(gs.g)[None, :])
    h_j = _complex_gaussian(rng, (M,), gs.h_j)
    G_j = _complex_gaussian(rng, (N, M), gs.G_j)
    return ScenarioRealization(
        h=h, f=f, g=g, h_j=h_j, G_j=G_j,
        P_j=config.P_j, sigma2=config.sigma2,
        targets=config.targets, beta_max=config.beta_max,
    )


def path_amplitude(K0: float, d: float, alpha: float) -> float:
    """Amplitude gain sqrt(K0 / d^alpha) of the power-law path-loss model."""
    if d <= 0:
        raise ScenarioError("coincident node positions (d = 0) are not allowed")
    return float(np.sqrt(K0 / d**alpha))


def _dist(a, b) -> float:
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


def draw_geometric(config: ScenarioConfig, rng: np.random.Generator) -> ScenarioRealization:
    """Draw one realization in geometric path-loss mode.

    Deterministic amplitude sqrt(K0/d^alpha) per link times unit-expected-
    magnitude Rayleigh fading.
    """
    if not isinstance(config.gains, Geometry):
        raise ScenarioError("draw_geometric requires a Geometry spec")
    geo = config.gains
    K, N, M = config.dims.K, config.dims.N, config.dims.M

    amp_h = np.array([path_amplitude(geo.K0, _dist(u, geo.bs), geo.alpha1) for u in geo.users])
    amp_f = path_amplitude(geo.K0, _dist(geo.aris, geo.bs), geo.alpha2)
    amp_g = np.array([path_amplitude(geo.K0, _dist(u, geo.aris), geo.alpha2) for u in geo.users])
    amp_hj = path_amplitude(geo.K0, _dist(geo.jammer, geo.bs), geo.alpha2)
    amp_Gj = path_amplitude(geo.K0, _dist(geo.jammer, geo.aris), geo.alpha2)

    h = _complex_gaussian(rng, (K,), amp_h)
    f = _complex_gaussian(rng, (N,), amp_f)
    g = _complex_gaussian(rng, (N, K), amp_g[None, :])
    h_j = _complex_gaussian(rng, (M,), amp_hj)
    G_j = _complex_gaussian(rng, (N, M), amp_Gj)
    return ScenarioRealization(
        h=h, f=f, g=g, h_j=h_j, G_j=G_j,
        P_j=config.P_j, sigma2=config.sigma2,
        targets=config.targets, beta_max=config.beta_max,
    )


def draw(config: ScenarioConfig, rng: np.random.Generator) -> ScenarioRealization:
    """Dispatch on the configured gain spec."""
    if isinstance(config.gains, FixedGains):
        return draw_fixed_gain(config, rng)
    return draw_geometric(config, rng)


def combined_channels(s: ScenarioRealization, phi: np.ndarray) -> np.ndarray:
    """Per-user effective channel h_k + f^T diag(phi) g_k, shape (K,)."""
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != s.f.shape:
        raise ScenarioError("phi length must equal the element count N")
    return s.h + (s.f * phi) @ s.g


def received_signal_power_terms(
    s: ScenarioRealization, phi: np.ndarray, p: np.ndarray
) -> np.ndarray:
    """The K per-user received power terms p_k |h_k + f^T diag(phi) g_k|^2."""
    p = np.asarray(p, dtype=float)
    if p.shape != s.h.shape:
        raise ScenarioError("power vector length must equal the user count K")
    return p * np.abs(combined_channels(s, phi)) ** 2
