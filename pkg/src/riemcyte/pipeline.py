"""End-to-end glue: image in, segmentation and SPD descriptor out.

The segmentation chain follows the stain-contrast route: Lab a-channel,
min-max quantization, histogram equalization, 3-component mixture
clustering, foreground pick by cluster mean, opening, small-component
removal, hole filling, connected-component extraction. Descriptors are
region covariances of a feature stack built from the configured
intensity plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import LabeledSample
from .colorspace import extract_lab_channels
from .config import PipelineConfig
from .covdesc import CovarianceIntegral, feature_map, region_covariance
from .imgio import load_image
from .preprocess import (
    Roi,
    classify_pixels,
    extract_rois,
    fill_holes,
    fit_gmm3,
    hist_equalize,
    morph_open,
    quantize_plane,
    remove_small_components,
    select_foreground,
    GaussianMixture1D,
)


@dataclass(frozen=True)
class Segmentation:
    """Intermediate and final products of the segmentation chain."""

    equalized: np.ndarray  # uint8 a-channel after equalization
    gmm: GaussianMixture1D
    labels: np.ndarray  # per-pixel cluster indices
    mask: np.ndarray  # cleaned binary foreground
    rois: tuple

    @property
    def roi(self) -> Roi:
        """Largest component, or the full-image fallback."""
        return self.rois[0]


def segment_image(image: np.ndarray, config: PipelineConfig | None = None) -> Segmentation:
    """Run the full segmentation chain on an RGB uint8 image."""
    cfg = config if config is not None else PipelineConfig()
    _, a, _ = extract_lab_channels(image)
    equalized = hist_equalize(quantize_plane(a))
    gmm = fit_gmm3(equalized, max_iters=cfg.gmm_max_iters, tol=cfg.gmm_tol)
    labels = classify_pixels(equalized, gmm)
    fg = select_foreground(labels, gmm, cfg.polarity)
    cleaned = fill_holes(
        remove_small_components(morph_open(fg, cfg.morph_radius), cfg.min_area)
    )
    return Segmentation(equalized, gmm, labels, cleaned, tuple(extract_rois(cleaned)))


def intensity_plane(image: np.ndarray, config: PipelineConfig) -> np.ndarray:
    """The plane the feature stack is built from (a-channel or luminance)."""
    lum, a, _ = extract_lab_channels(image)
    return a if config.intensity_channel == "a" else lum


def descriptor_from_image(image: np.ndarray, config: PipelineConfig | None = None):
    """Segment, pick the dominant region, and return (descriptor, segmentation)."""
    cfg = config if config is not None else PipelineConfig()
    seg = segment_image(image, cfg)
    stack = feature_map(intensity_plane(image, cfg), cfg.features)
    roi = seg.roi
    if cfg.region_mode == "bbox":
        cov = CovarianceIntegral(stack).covariance(roi.x0, roi.y0, roi.x1, roi.y1)
    else:
        cov = region_covariance(stack, roi)
    return cov, seg


def descriptor_from_path(path, config: PipelineConfig | None = None) -> np.ndarray:
    """Load an image file and compute its descriptor."""
    cov, _ = descriptor_from_image(load_image(path), config)
    return cov


def samples_from_paths(pairs, config: PipelineConfig | None = None):
    """Descriptors for (path, label) pairs, in the order given."""
    return [LabeledSample(descriptor_from_path(path, config), label) for path, label in pairs]
