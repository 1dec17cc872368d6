"""Input-adaptive Gaussian-cosine positional encoding with an optional
fixed-frequency Fourier channel.

The adaptive channel evaluates, for every coordinate axis and every anchor
v_m of a fixed grid on [-1, 1], a blend of a Gaussian bump and a cosine
wave around the anchor:

    phi(x, v_m) = blend * exp(-0.5 * ((x - v_m) / (sigma_a + eps))^2)
                + (1 - blend) * cos((x - v_m) / (sigma_a + eps))

Both the bandwidth sigma_a = sigma0 * (1 + sigma_g) and the blend
coefficient blend = sigmoid((sigma_g - tau) * kappa) are derived from the
cloud's global dispersion sigma_g, so the code widens its kernels and
leans toward the Gaussian response on spread-out inputs without any
per-dataset tuning. The Fourier channel adds multi-frequency sin/cos
context (frequencies omega_j = alpha^(j/L), phase scale beta), used by the
segmentation path.

Channel layout is axis-major, anchor-minor: all x-axis anchors, then y,
then z. When the target width is not a multiple of the per-axis channel
count, the first ``width`` channels of the full concatenation are kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DispersionStats
from .errors import DimOverflow, ShapeMismatch, SplitMismatch

MODE_ADAPTIVE = "adaptive"
MODE_HYBRID = "hybrid"

_FOURIER_SPLIT = 12  # default hybrid split: width // 12 frequencies -> half the channels


def sigmoid(z: float) -> float:
    """Logistic function, safe against exp overflow for any argument."""
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@dataclass(frozen=True)
class EncodingConfig:
    """All encoding hyperparameters.

    dim        -- target encoding width d (>= 3)
    sigma0     -- base bandwidth
    tau, kappa -- blend threshold and sharpness for the sigmoid
    eps        -- bandwidth stabilizer added to sigma_a
    fourier_l  -- frequencies per axis in hybrid mode; 0 derives dim // 12
                  (half Fourier / half adaptive channels)
    alpha      -- frequency base (> 1)
    beta       -- phase scale
    mode       -- "adaptive" or "hybrid"
    fixed_sigma / fixed_blend -- ablation overrides disabling adaptivity;
                  fixed_blend is a raw multiplier on the Gaussian term and
                  may exceed 1 in sweeps
    """

    dim: int = 35
    sigma0: float = 0.3
    tau: float = 0.3
    kappa: float = 10.0
    eps: float = 1e-6
    fourier_l: int = 0
    alpha: float = 100.0
    beta: float = 1000.0
    mode: str = MODE_ADAPTIVE
    fixed_sigma: float | None = None
    fixed_blend: float | None = None

    def __post_init__(self):
        if self.dim < 3:
            raise SplitMismatch(f"encoding dim must be >= 3, got {self.dim}")
        if self.mode not in (MODE_ADAPTIVE, MODE_HYBRID):
            raise SplitMismatch(f"unknown encoding mode {self.mode!r}")
        if self.sigma0 <= 0 or self.kappa <= 0 or self.eps <= 0:
            raise SplitMismatch("sigma0, kappa and eps must be positive")
        if self.alpha <= 1 or self.beta <= 0:
            raise SplitMismatch("alpha must exceed 1 and beta must be positive")
        if self.mode == MODE_HYBRID:
            fourier = 6 * self.frequencies(self.dim)
            if fourier >= self.dim:
                raise SplitMismatch(
                    f"hybrid split needs 6L < dim, got 6*{fourier // 6} vs {self.dim}"
                )

    @property
    def anchors_per_axis(self) -> int:
        return anchor_count(self.dim)

    def frequencies(self, width: int) -> int:
        """Fourier frequencies per axis at a given feature width.

        Scales the configured (or derived) base count proportionally so
        doubled stage widths keep the same Fourier/adaptive ratio.
        """
        base = self.fourier_l if self.fourier_l > 0 else max(1, self.dim // _FOURIER_SPLIT)
        if width == self.dim:
            return base
        return max(1, round(width * base / self.dim))

    def split(self, width: int) -> tuple[int, int]:
        """(fourier_channels, adaptive_channels) for a stage width."""
        if self.mode == MODE_ADAPTIVE:
            return 0, width
        fourier = 6 * self.frequencies(width)
        if fourier >= width:
            raise SplitMismatch(
                f"width {width} leaves no adaptive channels after {fourier} Fourier"
            )
        return fourier, width - fourier


@dataclass(frozen=True)
class AdaptiveParams:
    """Per-cloud bandwidth and blend, computed once and reused at every
    stage. ``blend`` weights the Gaussian term; 1 - blend the cosine."""

    sigma_a: float
    blend: float
    eps: float = 1e-6


@dataclass(frozen=True)
class AnchorGrid:
    """Fixed anchor locations, strictly increasing and symmetric about 0."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.shape[0] < 1:
            raise ShapeMismatch("anchor grid must be a non-empty 1-D array")
        if vals.shape[0] > 1 and not np.all(np.diff(vals) > 0):
            raise ShapeMismatch("anchor grid must be strictly increasing")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.shape[0]

    @classmethod
    def regular(cls, m: int) -> "AnchorGrid":
        """m anchors equally spaced on [-1, 1] inclusive (m = 1 -> {0})."""
        if m == 1:
            return cls(np.zeros(1))
        return cls(np.linspace(-1.0, 1.0, m))


def anchor_count(width: int) -> int:
    """Anchors per axis needed to cover ``width`` channels over 3 axes."""
    return max(1, math.ceil(width / 3))


def adaptive_params(stats: DispersionStats, cfg: EncodingConfig) -> AdaptiveParams:
    """Derive bandwidth and blend from the cloud's dispersion.

    The fixed_sigma / fixed_blend overrides replace the derived values for
    the adaptivity ablations.
    """
    sigma_a = cfg.sigma0 * (1.0 + stats.sigma_g)
    blend = sigmoid((stats.sigma_g - cfg.tau) * cfg.kappa)
    if cfg.fixed_sigma is not None:
        sigma_a = float(cfg.fixed_sigma)
    if cfg.fixed_blend is not None:
        blend = float(cfg.fixed_blend)
    return AdaptiveParams(sigma_a=sigma_a, blend=blend, eps=cfg.eps)


def adaptive_encode(
    rel_coords: np.ndarray,
    params: AdaptiveParams,
    grid: AnchorGrid,
    out_dim: int,
) -> np.ndarray:
    """Gaussian-cosine response of each coordinate against each anchor.

    Input (..., 3) coordinates produce (..., out_dim) channels taken from
    the 3M-wide axis-major concatenation.
    """
    x = np.asarray(rel_coords, dtype=np.float64)
    if x.shape[-1] != 3:
        raise ShapeMismatch(f"expected (..., 3) coordinates, got {x.shape}")
    m = len(grid)
    if out_dim > 3 * m:
        raise DimOverflow(f"out_dim {out_dim} exceeds 3*M = {3 * m}")
    u = x[..., :, None] - grid.values
    u *= 1.0 / (params.sigma_a + params.eps)
    cosine = np.cos(u)
    np.multiply(u, u, out=u)
    u *= -0.5
    np.exp(u, out=u)  # u is now the Gaussian bump
    u *= params.blend
    cosine *= 1.0 - params.blend
    u += cosine
    return u.reshape(*x.shape[:-1], 3 * m)[..., :out_dim]


def fourier_frequencies(cfg: EncodingConfig, l: int) -> np.ndarray:
    """omega_j = alpha^(j/L) for j = 1..L."""
    j = np.arange(1, l + 1, dtype=np.float64)
    return cfg.alpha ** (j / l)


def fourier_encode(rel_coords: np.ndarray, cfg: EncodingConfig, l: int | None = None) -> np.ndarray:
    """Multi-frequency sin/cos channels, (..., 6L).

    Per-axis layout [sin_1, cos_1, ..., sin_L, cos_L]; axes concatenated
    x, y, z.
    """
    x = np.asarray(rel_coords, dtype=np.float64)
    if x.shape[-1] != 3:
        raise ShapeMismatch(f"expected (..., 3) coordinates, got {x.shape}")
    l = cfg.frequencies(cfg.dim) if l is None else l
    omega = fourier_frequencies(cfg, l)
    phase = cfg.beta * x[..., :, None] / omega
    stacked = np.stack([np.sin(phase), np.cos(phase)], axis=-1)
    return stacked.reshape(*x.shape[:-1], 6 * l)


def hybrid_encode(
    rel_coords: np.ndarray,
    params: AdaptiveParams,
    cfg: EncodingConfig,
    width: int | None = None,
) -> np.ndarray:
    """Positional code at a given feature width.

    Hybrid mode concatenates [Fourier || adaptive]; adaptive mode returns
    the adaptive channels alone. ``width`` defaults to cfg.dim and is
    raised by the encoder at deeper stages, where both blocks scale
    proportionally.
    """
    width = cfg.dim if width is None else width
    fourier_ch, adaptive_ch = cfg.split(width)
    grid = AnchorGrid.regular(anchor_count(adaptive_ch))
    adaptive = adaptive_encode(rel_coords, params, grid, adaptive_ch)
    if fourier_ch == 0:
        return adaptive
    fourier = fourier_encode(rel_coords, cfg, l=fourier_ch // 6)
    return np.concatenate([fourier, adaptive], axis=-1)


def modulate(neighbor_feats: np.ndarray, pos_code: np.ndarray) -> np.ndarray:
    """Positional modulation (H + P) * P, element-wise."""
    h = np.asarray(neighbor_feats)
    p = np.asarray(pos_code)
    if h.shape != p.shape:
        raise ShapeMismatch(f"feature shape {h.shape} != code shape {p.shape}")
    return (h + p) * p
