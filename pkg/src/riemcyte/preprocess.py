"""Pixel clustering and mask cleanup for nucleus segmentation.

The chain quantizes the chromatic plane to 8 bits, equalizes its histogram,
fits a three-component Gaussian mixture to the intensities, assigns each
pixel to its maximum-posterior component, keeps the extreme-mean component
as foreground, and cleans the resulting mask with morphology before
extracting connected regions of interest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from .errors import DegenerateInputError

#: Lower bound on mixture variances; keeps point-mass clusters finite.
VARIANCE_FLOOR = 1e-4

#: 8-connectivity structure for foreground component labeling.
_STRUCT8 = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class GaussianMixture1D:
    """Univariate 3-component Gaussian mixture, means sorted ascending."""

    means: np.ndarray
    variances: np.ndarray
    weights: np.ndarray
    converged: bool
    n_iter: int
    log_likelihoods: np.ndarray

    @property
    def k(self) -> int:
        return len(self.means)


@dataclass(frozen=True, eq=False)
class Roi:
    """Connected component with inclusive pixel bounds and a local mask."""

    x0: int
    y0: int
    x1: int
    y1: int
    area: int
    mask: np.ndarray  # bool, shape (y1 - y0 + 1, x1 - x0 + 1)

    @property
    def width(self) -> int:
        return self.x1 - self.x0 + 1

    @property
    def height(self) -> int:
        return self.y1 - self.y0 + 1


def quantize_plane(plane: np.ndarray) -> np.ndarray:
    """Min-max rescale a finite real plane to uint8, rounding half up.

    A constant plane maps to all zeros.
    """
    plane = np.asarray(plane, dtype=np.float64)
    lo = plane.min()
    hi = plane.max()
    if hi == lo:
        return np.zeros(plane.shape, dtype=np.uint8)
    scaled = (plane - lo) * (255.0 / (hi - lo))
    return np.floor(scaled + 0.5).astype(np.uint8)


def hist_equalize(img: np.ndarray) -> np.ndarray:
    """Equalize an 8-bit image by the standard CDF remap.

    out(v) = round(255 * (cdf(v) - cdf_min) / (N - cdf_min)), with cdf_min
    the CDF at the smallest occupied bin. An image with a single distinct
    value is returned unchanged.
    """
    img = np.asarray(img, dtype=np.uint8)
    hist = np.bincount(img.ravel(), minlength=256)
    occupied = np.nonzero(hist)[0]
    if len(occupied) <= 1:
        return img.copy()
    cdf = np.cumsum(hist)
    cdf_min = cdf[occupied[0]]
    n = img.size
    lut = np.floor(255.0 * (cdf - cdf_min) / (n - cdf_min) + 0.5)
    lut = np.clip(lut, 0, 255).astype(np.uint8)
    return lut[img]


def _mixture_log_pdf(values: np.ndarray, means, variances, weights) -> np.ndarray:
    """Per-component weighted log density, shape (K, len(values))."""
    v = values[np.newaxis, :]
    mu = np.asarray(means)[:, np.newaxis]
    var = np.asarray(variances)[:, np.newaxis]
    w = np.asarray(weights)[:, np.newaxis]
    log_norm = -0.5 * np.log(2.0 * np.pi * var)
    with np.errstate(divide="ignore"):
        return np.log(w) + log_norm - 0.5 * (v - mu) ** 2 / var


def _weighted_log_likelihood(counts, values, means, variances, weights) -> float:
    comp = _mixture_log_pdf(values, means, variances, weights)
    peak = comp.max(axis=0)
    total = peak + np.log(np.exp(comp - peak).sum(axis=0))
    return float(np.dot(counts, total))


def fit_gmm3(img: np.ndarray, max_iters: int = 100, tol: float = 1e-6) -> GaussianMixture1D:
    """Fit a 3-component Gaussian mixture to 8-bit pixel intensities by EM.

    EM runs on the 256-bin intensity histogram, which is exactly equivalent
    to per-pixel EM. Means start at the 25th/50th/75th percentiles with
    equal weights and the global variance. The loop stops once a candidate
    step improves the log-likelihood by less than ``tol`` relative to its
    magnitude; the candidate is then discarded, so ``tol=inf`` returns the
    initialization. Means are sorted ascending on return.

    Raises
    ------
    DegenerateInputError
        If the image has fewer than 3 distinct values.

    Notes
    -----
    Non-convergence within ``max_iters`` is not an error; the best iterate
    is returned with ``converged=False``.
    """
    img = np.asarray(img, dtype=np.uint8)
    hist = np.bincount(img.ravel(), minlength=256).astype(np.float64)
    occupied = np.nonzero(hist)[0]
    if len(occupied) < 3:
        raise DegenerateInputError(
            f"mixture fit needs >= 3 distinct values, got {len(occupied)}"
        )
    values = np.arange(256, dtype=np.float64)
    n = hist.sum()

    pixels = img.ravel().astype(np.float64)
    means = np.percentile(pixels, [25.0, 50.0, 75.0])
    variances = np.full(3, max(pixels.var(), VARIANCE_FLOOR))
    weights = np.full(3, 1.0 / 3.0)

    ll = _weighted_log_likelihood(hist, values, means, variances, weights)
    ll_trace = [ll]
    converged = False
    n_iter = 0
    for _ in range(max_iters):
        comp = _mixture_log_pdf(values, means, variances, weights)
        peak = comp.max(axis=0)
        post = np.exp(comp - peak)
        post /= post.sum(axis=0)
        resp = post * hist  # effective per-bin responsibilities

        mass = resp.sum(axis=1)
        new_weights = mass / n
        new_means = (resp @ values) / mass
        sq = (values[np.newaxis, :] - new_means[:, np.newaxis]) ** 2
        new_variances = np.maximum((resp * sq).sum(axis=1) / mass, VARIANCE_FLOOR)

        new_ll = _weighted_log_likelihood(hist, values, new_means, new_variances, new_weights)
        if new_ll - ll < tol * max(abs(ll), 1e-12):
            converged = True
            break
        means, variances, weights, ll = new_means, new_variances, new_weights, new_ll
        ll_trace.append(ll)
        n_iter += 1

    order = np.argsort(means, kind="stable")
    return GaussianMixture1D(
        means=means[order],
        variances=variances[order],
        weights=weights[order],
        converged=converged,
        n_iter=n_iter,
        log_likelihoods=np.array(ll_trace),
    )


def classify_pixels(img: np.ndarray, gmm: GaussianMixture1D) -> np.ndarray:
    """Assign each pixel to its maximum-posterior mixture component.

    Ties break toward the smaller component index.
    """
    img = np.asarray(img, dtype=np.uint8)
    values = np.arange(256, dtype=np.float64)
    comp = _mixture_log_pdf(values, gmm.means, gmm.variances, gmm.weights)
    lut = np.argmax(comp, axis=0).astype(np.uint8)  # argmax keeps the first max
    return lut[img]


def select_foreground(labels: np.ndarray, gmm: GaussianMixture1D, polarity: str = "highest") -> np.ndarray:
    """Keep the component with the highest (or lowest) mean as foreground."""
    if polarity == "highest":
        target = int(np.argmax(gmm.means))
    elif polarity == "lowest":
        target = int(np.argmin(gmm.means))
    else:
        raise ValueError(f"polarity must be 'highest' or 'lowest', got {polarity!r}")
    return np.asarray(labels) == target


def disk_element(radius: int) -> np.ndarray:
    """Discrete disk footprint: offsets with dx^2 + dy^2 <= radius^2."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    r = int(radius)
    dy, dx = np.mgrid[-r : r + 1, -r : r + 1]
    return dx * dx + dy * dy <= radius * radius


def morph_open(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary opening with a disk: erosion then dilation.

    Out-of-bounds neighbors count as background for the erosion and
    contribute nothing to the dilation. Radius 0 is the identity.
    """
    mask = np.asarray(mask).astype(bool)
    if radius == 0:
        return mask.copy()
    footprint = disk_element(radius)
    eroded = ndi.binary_erosion(mask, structure=footprint, border_value=0)
    return ndi.binary_dilation(eroded, structure=footprint, border_value=0)


def remove_small_components(mask: np.ndarray, min_area: int) -> np.ndarray:
    """Clear 8-connected components with area below ``min_area``."""
    if min_area < 0:
        raise ValueError("min_area must be >= 0")
    mask = np.asarray(mask).astype(bool)
    if min_area == 0 or not mask.any():
        return mask.copy()
    labeled, count = ndi.label(mask, structure=_STRUCT8)
    areas = np.bincount(labeled.ravel(), minlength=count + 1)
    keep = areas >= min_area
    keep[0] = False
    return keep[labeled]


def fill_holes(mask: np.ndarray) -> np.ndarray:
    """Fill background pixels not 4-connected to the image border."""
    mask = np.asarray(mask).astype(bool)
    return ndi.binary_fill_holes(mask)


def extract_rois(mask: np.ndarray, min_area: int = 0) -> list[Roi]:
    """Extract one Roi per surviving 8-connected component.

    Components with area below ``min_area`` are dropped. The list is ordered
    by descending area, then by (y0, x0). An empty result falls back to a
    single Roi covering the whole image, for inputs that are already
    single-cell crops.
    """
    mask = np.asarray(mask).astype(bool)
    h, w = mask.shape
    labeled, count = ndi.label(mask, structure=_STRUCT8)
    rois = []
    if count:
        slices = ndi.find_objects(labeled)
        for idx, slc in enumerate(slices, start=1):
            local = labeled[slc] == idx
            area = int(local.sum())
            if area < min_area:
                continue
            ys, xs = slc
            rois.append(
                Roi(
                    x0=int(xs.start),
                    y0=int(ys.start),
                    x1=int(xs.stop - 1),
                    y1=int(ys.stop - 1),
                    area=area,
                    mask=local,
                )
            )
    if not rois:
        return [Roi(x0=0, y0=0, x1=w - 1, y1=h - 1, area=h * w, mask=np.ones((h, w), dtype=bool))]
    rois.sort(key=lambda r: (-r.area, r.y0, r.x0))
    return rois
