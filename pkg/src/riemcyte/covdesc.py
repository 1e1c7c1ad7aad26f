"""Per-pixel feature stacks and region covariance descriptors.

A feature stack maps an intensity plane to d scalar layers (pixel
coordinates, derivative magnitudes, gradient magnitude, edge orientation).
The covariance of the d-vectors over an image region is a compact,
illumination-tolerant texture signature; it is symmetric positive definite
after a small diagonal regularization.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DataError, RegionTooSmallError
from .preprocess import Roi

#: Default feature layers, in order.
FEATURE_NAMES = (
    "x",
    "y",
    "abs_dx",
    "abs_dy",
    "grad_mag",
    "abs_dxx",
    "abs_dxy",
    "abs_dyy",
    "edge_orient",
)

#: Diagonal regularization factor applied to region covariances.
COV_EPS = 1e-6

_D1 = np.array([-1.0, 0.0, 1.0])
_D2 = np.array([1.0, -2.0, 1.0])


def feature_map(gray: np.ndarray, features=FEATURE_NAMES) -> np.ndarray:
    """Build a (d, H, W) feature stack from an intensity plane.

    Derivatives use 3-tap kernels [-1, 0, 1] and [1, -2, 1] with replicated
    borders; the mixed derivative applies the first-order kernel along each
    axis in turn. The orientation layer is arctan(|dI/dx| / |dI/dy|), with
    the convention that it is pi/2 when only the x-derivative is nonzero
    and 0 when both vanish.
    """
    gray = np.asarray(gray, dtype=np.float64)
    if gray.ndim != 2:
        raise ValueError(f"expected a 2-d intensity plane, got shape {gray.shape}")
    h, w = gray.shape

    dx = correlate1d(gray, _D1, axis=1, mode="nearest")
    dy = correlate1d(gray, _D1, axis=0, mode="nearest")
    adx = np.abs(dx)
    ady = np.abs(dy)

    builders = {
        "x": lambda: np.broadcast_to(np.arange(w, dtype=np.float64), (h, w)).copy(),
        "y": lambda: np.broadcast_to(np.arange(h, dtype=np.float64)[:, None], (h, w)).copy(),
        "abs_dx": lambda: adx,
        "abs_dy": lambda: ady,
        "grad_mag": lambda: np.hypot(dx, dy),
        "abs_dxx": lambda: np.abs(correlate1d(gray, _D2, axis=1, mode="nearest")),
        "abs_dxy": lambda: np.abs(correlate1d(dx, _D1, axis=0, mode="nearest")),
        "abs_dyy": lambda: np.abs(correlate1d(gray, _D2, axis=0, mode="nearest")),
        "edge_orient": lambda: np.arctan2(adx, ady),
    }
    layers = []
    for name in features:
        if name not in builders:
            raise ValueError(f"unknown feature {name!r}; valid: {', '.join(FEATURE_NAMES)}")
        layers.append(builders[name]())
    if len(layers) < 2:
        raise ValueError("feature stack needs at least 2 layers")
    return np.stack(layers)


def _regularize(cov: np.ndarray, eps: float) -> np.ndarray:
    if eps:
        d = cov.shape[0]
        cov = cov + eps * max(np.trace(cov) / d, 1.0) * np.eye(d)
    return cov


def region_covariance(stack: np.ndarray, roi: Roi, eps: float = COV_EPS) -> np.ndarray:
    """Covariance of the feature vectors over the pixels in ``roi.mask``.

    Uses the unbiased divisor S - 1 over the S member pixels, then adds
    ``eps * max(trace/d, 1)`` to the diagonal so the result is strictly
    positive definite even for constant regions.

    Raises
    ------
    RegionTooSmallError
        If the region holds fewer than 2 pixels.
    """
    window = stack[:, roi.y0 : roi.y1 + 1, roi.x0 : roi.x1 + 1]
    samples = window[:, roi.mask]  # (d, S)
    s = samples.shape[1]
    if s < 2:
        raise RegionTooSmallError(f"region has {s} pixels; need >= 2")
    centered = samples - samples.mean(axis=1, keepdims=True)
    cov = centered @ centered.T / (s - 1)
    cov = (cov + cov.T) / 2.0
    return _regularize(cov, eps)


class CovarianceIntegral:
    """Integral-image tables answering rectangle covariance queries in O(d^2).

    Precomputes running sums of each feature layer and of every pairwise
    product; a query then reconstructs the covariance of any axis-aligned
    rectangle without touching its pixels. Layers are centered by their
    global means first, which leaves covariances unchanged but avoids
    cancellation in the product sums. The tables are immutable after
    construction, so queries are safe from any number of threads.
    """

    def __init__(self, stack: np.ndarray):
        stack = np.asarray(stack, dtype=np.float64)
        d, h, w = stack.shape
        self.d = d
        self.height = h
        self.width = w
        centered = stack - stack.mean(axis=(1, 2), keepdims=True)
        iu, ju = np.triu_indices(d)
        self._iu = iu
        self._ju = ju
        self._sums = np.zeros((d, h + 1, w + 1))
        self._sums[:, 1:, 1:] = centered.cumsum(axis=1).cumsum(axis=2)
        prods = centered[iu] * centered[ju]
        self._prods = np.zeros((len(iu), h + 1, w + 1))
        self._prods[:, 1:, 1:] = prods.cumsum(axis=1).cumsum(axis=2)

    def _window(self, table, x0, y0, x1, y1):
        return (
            table[:, y1 + 1, x1 + 1]
            - table[:, y0, x1 + 1]
            - table[:, y1 + 1, x0]
            + table[:, y0, x0]
        )

    def covariance(self, x0: int, y0: int, x1: int, y1: int, eps: float = COV_EPS) -> np.ndarray:
        """Covariance over the inclusive rectangle [x0, x1] x [y0, y1]."""
        if not (0 <= x0 <= x1 < self.width and 0 <= y0 <= y1 < self.height):
            raise ValueError(f"rectangle ({x0},{y0})-({x1},{y1}) out of bounds")
        s = (x1 - x0 + 1) * (y1 - y0 + 1)
        if s < 2:
            raise RegionTooSmallError(f"rectangle has {s} pixels; need >= 2")
        sums = self._window(self._sums, x0, y0, x1, y1)
        prods = self._window(self._prods, x0, y0, x1, y1)
        d = self.d
        cov = np.empty((d, d))
        upper = (prods - sums[self._iu] * sums[self._ju] / s) / (s - 1)
        cov[self._iu, self._ju] = upper
        cov[self._ju, self._iu] = upper
        return _regularize(cov, eps)


def region_covariance_fast(stack: np.ndarray, roi: Roi, eps: float = COV_EPS) -> np.ndarray:
    """Rectangle covariance via integral images; ``roi.mask`` is ignored.

    Matches :func:`region_covariance` on the ROI's full bounding rectangle.
    For repeated queries on one stack, build a :class:`CovarianceIntegral`
    once instead.
    """
    return CovarianceIntegral(stack).covariance(roi.x0, roi.y0, roi.x1, roi.y1, eps=eps)


def save_spd_text(path, matrix: np.ndarray) -> None:
    """Write a square matrix as text: header "spd <n>", then n rows.

    Entries carry 17 significant digits, enough to round-trip float64
    exactly.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    lines = [f"spd {m.shape[0]}"]
    for row in m:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_spd_text(path) -> np.ndarray:
    """Read a matrix written by :func:`save_spd_text`."""
    lines = Path(path).read_text(encoding="ascii").splitlines()
    return _parse_spd_lines(lines, str(path))


def _parse_spd_lines(lines, origin: str) -> np.ndarray:
    if not lines:
        raise DataError(f"{origin}: empty matrix block")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "spd":
        raise DataError(f"{origin}: bad matrix header {lines[0]!r}")
    n = int(head[1])
    if len(lines) < n + 1:
        raise DataError(f"{origin}: expected {n} matrix rows, got {len(lines) - 1}")
    rows = []
    for line in lines[1 : n + 1]:
        row = [float(tok) for tok in line.split()]
        if len(row) != n:
            raise DataError(f"{origin}: matrix row has {len(row)} entries, expected {n}")
        rows.append(row)
    return np.array(rows, dtype=np.float64)
