"""Independent reference computations used to judge the wavelet estimates.

The discrete TV uses forward differences on the voxel grid, the moment oracle
integrates polynomials against Haar functions exactly with rational
arithmetic, and :class:`TvReport` collects the metrics reported for a
denoising run.
"""
import logging
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from errors import ShapeMismatchError
from gradient_tv import tv_estimate_averaged
from haar_transform import WaveletPyramid
from volume_grid import Volume

logger = logging.getLogger(__name__)

# Row labels in the order of the published result tables.
TABLE_ROWS = (
    ('relative_discrete_tv', 'Relative Discrete TV Norm'),
    ('relative_wavelet_tv', 'Relative Approx. Wavelet TV Norm'),
    ('rel_l2_error', 'Relative L2 Error'),
    ('psnr', 'Peak Signal-to-Noise Ratio'),
    ('sparsity', 'Wavelet Coefficient Sparsity'),
)


@dataclass(frozen=True)
class TvReport:
    """Metrics of one shrinkage run, input ``f`` versus output ``u``.

    PSNR uses the maximum of the reference volume as peak; ``psnr_reference``
    says whether that reference was the input or a clean phantom.
    ``psnr`` is ``inf`` when the compared volumes are identical and ``-inf``
    when the reference has no positive peak.
    """
    discrete_tv_in: float
    discrete_tv_out: float
    wavelet_tv_in: float
    wavelet_tv_out: float
    rel_l2_error: float
    psnr: float
    sparsity: float
    lam: float
    mode: str
    window: Tuple[int, int]
    psnr_reference: str = 'input'

    @property
    def relative_discrete_tv(self) -> float:
        return _ratio(self.discrete_tv_out, self.discrete_tv_in)

    @property
    def relative_wavelet_tv(self) -> float:
        return _ratio(self.wavelet_tv_out, self.wavelet_tv_in)

    def to_dict(self) -> dict:
        data = asdict(self)
        data['window'] = list(self.window)
        data['relative_discrete_tv'] = self.relative_discrete_tv
        data['relative_wavelet_tv'] = self.relative_wavelet_tv
        if math.isinf(self.psnr):
            data['psnr'] = None
        return data

    def table_column(self) -> dict:
        return {label: getattr(self, key) for key, label in TABLE_ROWS}


def _ratio(num: float, den: float) -> float:
    if den == 0:
        return 1.0 if num == 0 else math.inf
    return num / den


def _check_same_dims(f: Volume, u: Volume) -> None:
    if f.dims != u.dims:
        raise ShapeMismatchError(f"Volumes differ in shape: {f.dims} vs {u.dims}")


def discrete_tv(v: Volume) -> float:
    """Sum over voxels of the length of the forward-difference vector.

    Differences leaving the grid count as zero.
    """
    data = v.data
    squared = np.zeros_like(data)
    for axis in range(v.s):
        last = np.take(data, [-1], axis=axis)
        squared += np.diff(data, axis=axis, append=last) ** 2
    return float(np.sqrt(squared).sum())


def relative_l2_error(f: Volume, u: Volume) -> float:
    _check_same_dims(f, u)
    norm_f = float(np.linalg.norm(f.data))
    diff = float(np.linalg.norm(f.data - u.data))
    return _ratio(diff, norm_f)


def psnr(f: Volume, u: Volume) -> float:
    """10 log10(peak^2 / MSE) with peak = max(f).

    ``inf`` when f == u; ``-inf`` when the reference has no positive peak.
    """
    _check_same_dims(f, u)
    mse = float(np.mean((f.data - u.data) ** 2))
    if mse == 0:
        logger.warning("PSNR requested for identical volumes; reporting infinity")
        return math.inf
    peak = float(np.max(f.data))
    if peak <= 0:
        logger.warning(f"Reference maximum is {peak:g}; PSNR is undefined, reporting -infinity")
        return -math.inf
    return 10.0 * math.log10(peak ** 2 / mse)


def coefficient_sparsity(p: WaveletPyramid) -> float:
    """Fraction of coefficients that are exactly zero."""
    values = p.to_vector()
    return float(np.count_nonzero(values == 0.0)) / values.size


def _axis_moment(n: int, wavelet: int, k: int) -> Fraction:
    """Rational part of the integral of t**k against the level-n box (0) or
    Haar function (1) centred at t = 0, without the 2**(n/2) amplitude."""
    h = Fraction(1, 2 ** (n + 1))
    upper = h ** (k + 1) / (k + 1)
    lower = (-h) ** (k + 1) / (k + 1)
    if wavelet:
        # +1 on [-h, 0), -1 on [0, h)
        return (0 - lower) - (upper - 0)
    return upper - lower


def moment_oracle(s: int, n: int, theta: Sequence[int], gamma: Sequence[int],
                  alpha: Optional[Sequence[int]] = None) -> float:
    """Integral of (x - x^n_alpha)^gamma psi^n_{theta,alpha}(x) by exact integration.

    Each axis contributes a polynomial integral evaluated from its
    antiderivative in rational arithmetic; the product is scaled by the
    amplitude 2**(ns/2) only at the end.
    """
    if len(theta) != s or len(gamma) != s:
        raise ValueError(f"theta and gamma need {s} entries")
    if alpha is not None:
        if len(alpha) != s or any(not 0 <= a < 2 ** n for a in alpha):
            raise ValueError(f"alpha {tuple(alpha)} outside level {n} grid")
    exact = Fraction(1)
    for bit, k in zip(theta, gamma):
        exact *= _axis_moment(n, bit, k)
    return float(exact) * 2.0 ** (n * s / 2)


def closed_form_moment(s: int, n: int, theta: Sequence[int], gamma: Sequence[int]) -> float:
    """(-1)^|theta| 2^(-(n+2)|theta| - ns/2) if gamma == theta, else 0 (for |gamma| <= |theta|)."""
    if tuple(gamma) != tuple(theta):
        return 0.0
    order = sum(theta)
    return (-1) ** order * 2.0 ** (-(n + 2) * order - n * s / 2)


def build_report(f: Volume, u: Volume, f_pyr: WaveletPyramid, u_pyr: WaveletPyramid,
                 cfg, reference: Optional[Volume] = None) -> TvReport:
    """Collect the table metrics for input f and output u.

    ``cfg`` is a resolved shrink configuration; its window and weights define
    the wavelet TV estimate.
    """
    _check_same_dims(f, u)
    if reference is not None:
        _check_same_dims(reference, u)
    report = TvReport(
        discrete_tv_in=discrete_tv(f),
        discrete_tv_out=discrete_tv(u),
        wavelet_tv_in=tv_estimate_averaged(f_pyr, cfg.weights),
        wavelet_tv_out=tv_estimate_averaged(u_pyr, cfg.weights),
        rel_l2_error=relative_l2_error(f, u),
        psnr=psnr(reference if reference is not None else f, u),
        sparsity=coefficient_sparsity(u_pyr),
        lam=float(cfg.lam),
        mode=cfg.mode,
        window=(cfg.n0, cfg.n1),
        psnr_reference='clean' if reference is not None else 'input',
    )
    logger.info(
        f"lambda={report.lam:g} mode={report.mode}: wavelet TV {report.relative_wavelet_tv:.3%}, "
        f"discrete TV {report.relative_discrete_tv:.3%}, sparsity {report.sparsity:.2%}")
    return report
