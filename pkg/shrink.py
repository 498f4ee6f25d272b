"""Approximate TV regularisation by shrinking Haar coefficients.

LiveTV shrinks the length of every single-component coefficient vector
d^n_alpha by mu_n * lambda (group soft thresholding). SparseTV additionally
zeroes the mixed coefficients (|theta| >= 2) wherever the vector was
thresholded away. The single-level rule uses the unweighted threshold lambda.
Hard thresholding of individual coefficients is kept as the classical
baseline.
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from errors import ShapeMismatchError, WindowError
from gradient_tv import LevelWeights, make_level_weights
from haar_transform import WaveletPyramid, forward, higher_order_indices, inverse
from metrics_oracle import TvReport, build_report
from volume_grid import Volume, crop_to_origin, pad_to_dyadic

logger = logging.getLogger(__name__)

LIVE = 'live'
SPARSE = 'sparse'
SINGLE = 'single'
HARD = 'hard'
MODES = (LIVE, SPARSE, SINGLE, HARD)


@dataclass(frozen=True)
class ShrinkConfig:
    """Shrinkage parameters.

    ``n0``/``n1`` may be left as None and filled in from the pyramid by
    :meth:`resolve` (default window: the top four levels). In ``single`` and
    ``hard`` mode the threshold is lambda itself on every windowed level.
    """
    lam: float
    mode: str = LIVE
    n0: Optional[int] = None
    n1: Optional[int] = None
    weights: Optional[LevelWeights] = None

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")
        if self.mode not in MODES:
            raise ValueError(f"Unknown shrink mode '{self.mode}', expected one of {MODES}")
        if self.n0 is not None and self.n1 is not None:
            if self.n0 < 0 or self.n0 > self.n1:
                raise WindowError(f"Invalid level window [{self.n0}, {self.n1}]")
            if self.weights is None:
                object.__setattr__(self, 'weights', make_level_weights(self.n0, self.n1))

    @property
    def window(self) -> Tuple[int, int]:
        return self.n0, self.n1

    def resolve(self, p: WaveletPyramid) -> 'ShrinkConfig':
        """Fill in a missing window and check it against the pyramid."""
        if p.n1 < 0:
            raise WindowError("Pyramid has no detail levels to shrink")
        n1 = p.n1 if self.n1 is None else self.n1
        n0 = max(0, n1 - 3) if self.n0 is None else self.n0
        if n1 > p.n1:
            raise WindowError(f"Window [{n0}, {n1}] exceeds finest level {p.n1}")
        if (n0, n1) == (self.n0, self.n1):
            return self
        return replace(self, n0=n0, n1=n1, weights=None)

    def threshold(self, n: int) -> float:
        if self.mode in (LIVE, SPARSE):
            return self.weights.weight(n) * self.lam
        return self.lam


def _group_factors(vecs: np.ndarray, threshold: float):
    """Soft-threshold factors (1 - t/|d|)_+ and the mask of vectors zeroed by it.

    A zero threshold removes nothing, not even vectors that are already zero.
    """
    norms = np.linalg.norm(vecs, axis=-1)
    factors = np.zeros_like(norms)
    keep = norms > threshold
    factors[keep] = 1.0 - threshold / norms[keep]
    if threshold <= 0:
        return np.where(keep, factors, 1.0), np.zeros_like(keep)
    return factors, ~keep


def _shrink_level(block: np.ndarray, s: int, threshold: float, sparse: bool) -> Tuple[np.ndarray, int]:
    block = block.copy()
    units = [(1 << j) - 1 for j in range(s)]
    factors, zeroed = _group_factors(np.stack([block[k] for k in units], axis=-1), threshold)
    for k in units:
        block[k] *= factors
    if sparse:
        for index in higher_order_indices(s):
            block[index - 1][zeroed] = 0.0
    return block, int(zeroed.sum())


def _shrink_window(p: WaveletPyramid, cfg: ShrinkConfig, sparse: bool) -> WaveletPyramid:
    details = list(p.detail)
    for n in range(cfg.n0, cfg.n1 + 1):
        threshold = cfg.threshold(n)
        details[n], zeroed = _shrink_level(details[n], p.s, threshold, sparse)
        logger.debug(f"Level {n}: threshold {threshold:.6g}, {zeroed} of {details[n][0].size} gradient vectors zeroed")
    return p.with_details(details)


def shrink_live(p: WaveletPyramid, cfg: ShrinkConfig) -> WaveletPyramid:
    cfg = cfg.resolve(p)
    return _shrink_window(p, replace(cfg, mode=LIVE) if cfg.mode != LIVE else cfg, sparse=False)


def shrink_sparse(p: WaveletPyramid, cfg: ShrinkConfig) -> WaveletPyramid:
    cfg = cfg.resolve(p)
    return _shrink_window(p, replace(cfg, mode=SPARSE) if cfg.mode != SPARSE else cfg, sparse=True)


def shrink_single_level(p: WaveletPyramid, n: int, lam: float) -> WaveletPyramid:
    p.check_level(n)
    return _shrink_window(p, ShrinkConfig(lam, SINGLE, n, n), sparse=False)


def shrink_single_level_window(p: WaveletPyramid, lam: float, n0: int, n1: int) -> WaveletPyramid:
    """The single-level rule applied to each level of [n0, n1] separately."""
    cfg = ShrinkConfig(lam, SINGLE, n0, n1).resolve(p)
    return _shrink_window(p, cfg, sparse=False)


def shrink_hard(p: WaveletPyramid, threshold: float, n0: int, n1: int) -> WaveletPyramid:
    """Zero every windowed detail coefficient with |d| <= threshold."""
    cfg = ShrinkConfig(threshold, HARD, n0, n1).resolve(p)
    details = list(p.detail)
    if threshold > 0:
        for n in range(cfg.n0, cfg.n1 + 1):
            block = details[n].copy()
            block[np.abs(block) <= threshold] = 0.0
            details[n] = block
    return p.with_details(details)


def shrink(p: WaveletPyramid, cfg: ShrinkConfig) -> WaveletPyramid:
    """Dispatch on ``cfg.mode``."""
    cfg = cfg.resolve(p)
    if cfg.mode == LIVE:
        return shrink_live(p, cfg)
    if cfg.mode == SPARSE:
        return shrink_sparse(p, cfg)
    if cfg.mode == SINGLE:
        return shrink_single_level_window(p, cfg.lam, cfg.n0, cfg.n1)
    return shrink_hard(p, cfg.lam, cfg.n0, cfg.n1)


def check_same_shape(f: WaveletPyramid, u: WaveletPyramid) -> None:
    if (f.s, f.m) != (u.s, u.m):
        raise ShapeMismatchError(f"Pyramids differ in shape: (s={f.s}, m={f.m}) vs (s={u.s}, m={u.m})")


def optimality_residual(f: WaveletPyramid, u: WaveletPyramid, cfg: ShrinkConfig) -> float:
    """Largest violation of the subgradient condition for u as the shrinkage of f.

    Windowed gradient groups must satisfy d(f) - d(u) in t * subdiff|d(u)|;
    every other coefficient must be unchanged.
    """
    check_same_shape(f, u)
    cfg = cfg.resolve(f)
    worst = float(np.max(np.abs(f.scaling - u.scaling)))
    units = [(1 << j) - 1 for j in range(f.s)]
    mixed = [index - 1 for index in higher_order_indices(f.s)]
    for n in range(f.m):
        df, du = f.detail[n], u.detail[n]
        if not cfg.n0 <= n <= cfg.n1:
            worst = max(worst, float(np.max(np.abs(df - du))))
            continue
        if mixed:
            worst = max(worst, float(np.max(np.abs(df[mixed] - du[mixed]))))
        t = cfg.threshold(n)
        gf = np.stack([df[k] for k in units], axis=-1)
        gu = np.stack([du[k] for k in units], axis=-1)
        norm_u = np.linalg.norm(gu, axis=-1)
        nonzero = norm_u > 0
        direction = np.zeros_like(gu)
        direction[nonzero] = gu[nonzero] / norm_u[nonzero][..., np.newaxis]
        stationary = np.linalg.norm(gf - gu - t * direction, axis=-1)
        at_zero = np.maximum(np.linalg.norm(gf, axis=-1) - t, 0.0)
        worst = max(worst, float(np.max(np.where(nonzero, stationary, at_zero))))
    return worst


def objective_value(f: WaveletPyramid, u: WaveletPyramid, cfg: ShrinkConfig) -> float:
    """0.5 ||f - u||^2 + lambda * sum_n w_n sum_alpha |d^n_alpha(u)|, minimised by the shrinkage.

    The data term is measured on coefficients, which equals the sample norm
    by Parseval; ``w_n`` is mu_n for live/sparse and 1 otherwise.
    """
    check_same_shape(f, u)
    cfg = cfg.resolve(f)
    data = 0.5 * float(np.sum((f.to_vector() - u.to_vector()) ** 2))
    penalty = 0.0
    for n in range(cfg.n0, cfg.n1 + 1):
        units = np.stack([u.detail[n][(1 << j) - 1] for j in range(u.s)], axis=-1)
        penalty += cfg.threshold(n) * float(np.linalg.norm(units, axis=-1).sum())
    return data + penalty


def denoise(v: Volume, cfg: ShrinkConfig, fill: float = 0.0,
            reference: Optional[Volume] = None) -> Tuple[Volume, TvReport]:
    """Pad, decompose, shrink, reconstruct and crop; report on the result."""
    padded = pad_to_dyadic(v, fill)
    f_pyr = forward(padded)
    cfg = cfg.resolve(f_pyr)
    logger.info(f"Shrinking {padded.dims} volume: mode={cfg.mode}, lambda={cfg.lam:g}, window=[{cfg.n0}, {cfg.n1}]")
    u_pyr = shrink(f_pyr, cfg)
    restored = inverse(u_pyr)
    # a padded input keeps its padding; anything else comes back at its own shape
    keep_padding = v.origin_extent is not None and padded.dims == v.dims
    u = restored if keep_padding else crop_to_origin(restored)
    report = build_report(v, u, f_pyr, u_pyr, cfg, reference=reference)
    return u, report
