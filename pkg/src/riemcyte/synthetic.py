"""Seeded synthetic data: SPD class clouds and stained-cell imagery.

Two generators back the self-contained evaluation suite. The SPD
generator draws class means as exponential-map perturbations of the
identity, rejected until all pairs sit at geodesic distance >= 2, then
scatters samples around each mean with symmetric tangent noise. The
imagery generator renders 576x720 pictures that mimic a stained smear:
pale background, pale-pink distractor discs, and one magenta ellipse
whose interior texture differs per class only through its second-order
statistics (stripe orientation and frequency, blob correlation length).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .classify import LabeledSample
from .imgio import save_image
from .spdgeom import exp_map, riemann_distance, spd_exp

#: Class names for the synthetic imagery, already in lexicographic order.
CLASS_NAMES = ("basophil", "eosinophil", "lymphocyte", "monocyte", "neutrophil")

#: Height x width of every rendered image.
IMAGE_SHAPE = (576, 720)

_BACKGROUND = np.array([233.0, 228.0, 231.0])
_PINK = np.array([226.0, 168.0, 182.0])
# The cell texture alternates between two exact integer colors solved to
# share the same green-magenta opponent value within a third of a unit:
# the pattern is pure luminance, so the segmenter's channel sees one flat
# population while the intensity plane carries the class signature.
_CELL_LO = np.array([136.0, 49.0, 126.0])
_CELL_HI = np.array([168.0, 67.0, 158.0])


def _sym_noise(rng, dim: int, scale: float) -> np.ndarray:
    g = rng.standard_normal((dim, dim))
    return scale * (g + g.T) / 2.0


def make_spd_classes(
    n_classes: int = 5,
    dim: int = 9,
    samples_per_class: int = 60,
    noise: float = 0.3,
    min_separation: float = 2.0,
    mean_scale: float = 0.5,
    seed: int = 42,
):
    """Draw class means and samples; returns (means, labeled samples).

    Samples come out grouped by class, ``samples_per_class`` in a row,
    so index order matches a per-class stratified split on equal counts.
    """
    rng = np.random.default_rng(seed)
    means = []
    while len(means) < n_classes:
        candidate = spd_exp(_sym_noise(rng, dim, mean_scale))
        if all(riemann_distance(candidate, m) >= min_separation for m in means):
            means.append(candidate)
    samples = []
    for label, mean in enumerate(means):
        for _ in range(samples_per_class):
            samples.append(LabeledSample(exp_map(mean, _sym_noise(rng, dim, noise)), label))
    return means, samples


def _texture(class_index: int, shape, rng) -> np.ndarray:
    """Boolean pattern whose spatial statistics identify the class.

    Binary rather than graded: a two-level cell occupies one narrow spike
    in the segmentation channel, where a continuous wave would smear into
    a band no single mixture component can own.
    """
    h, w = shape
    xx = np.arange(w, dtype=np.float64)[None, :]
    yy = np.arange(h, dtype=np.float64)[:, None]
    phase = rng.uniform(0.0, 2.0 * np.pi)
    if class_index == 0:
        period = rng.uniform(5.5, 6.5)
        field = np.broadcast_to(np.sin(2 * np.pi * yy / period + phase), shape)
    elif class_index == 1:
        period = rng.uniform(5.5, 6.5)
        field = np.broadcast_to(np.sin(2 * np.pi * xx / period + phase), shape)
    elif class_index == 2:
        period = rng.uniform(16.0, 20.0)
        field = np.sin(2 * np.pi * (xx + yy) / period + phase)
    elif class_index == 3:
        field = gaussian_filter(rng.standard_normal(shape), 4.0)
    elif class_index == 4:
        field = gaussian_filter(rng.standard_normal(shape), 0.8)
    else:
        raise ValueError(f"class index {class_index} out of range")
    return field >= 0.0


def render_cell_image(class_index: int, image_index: int, seed: int = 42):
    """One (image, truth mask) pair; deterministic in all three arguments."""
    h, w = IMAGE_SHAPE
    rng = np.random.default_rng([seed, class_index, image_index])
    xx = np.arange(w, dtype=np.float64)[None, :]
    yy = np.arange(h, dtype=np.float64)[:, None]

    img = np.empty((h, w, 3))
    img[:] = _BACKGROUND

    # Equalization spreads each population over a value band whose width
    # tracks its pixel share, and the mixture initializes at the 25/50/75
    # mass percentiles. Keeping background, discs, and cell near a third
    # each drops one initial component inside each band, which is what
    # makes the clustering land on the intended three populations.
    cx = w / 2 + rng.uniform(-75.0, 75.0)
    cy = h / 2 + rng.uniform(-50.0, 50.0)
    ax = rng.uniform(210.0, 235.0)
    ay = rng.uniform(180.0, 205.0)
    theta = rng.uniform(0.0, np.pi)
    ct, st = np.cos(theta), np.sin(theta)
    u = (xx - cx) * ct + (yy - cy) * st
    v = -(xx - cx) * st + (yy - cy) * ct
    ellipse = (u / ax) ** 2 + (v / ay) ** 2 <= 1.0

    clearance = max(ax, ay)
    for _ in range(int(rng.integers(22, 27))):
        placed = False
        for _attempt in range(50):
            dcx = rng.uniform(0.0, w)
            dcy = rng.uniform(0.0, h)
            r = rng.uniform(34.0, 46.0)
            if (dcx - cx) ** 2 + (dcy - cy) ** 2 > (clearance + r + 8.0) ** 2:
                placed = True
                break
        if not placed:
            continue
        disc = (xx - dcx) ** 2 + (yy - dcy) ** 2 <= r * r
        img[disc] = _PINK

    # Common-mode noise: one field shared by all three channels, so the
    # background and disc populations each stay within a couple quantized
    # opponent-channel bins. Applied before the cell is painted; the cell
    # color is the most noise-sensitive of the three, and its two exact
    # integer levels must survive quantization untouched.
    img += rng.normal(0.0, 2.5, (h, w))[..., None]

    pattern = _texture(class_index, (h, w), rng)
    cell = np.where(pattern[..., None], _CELL_HI, _CELL_LO)
    img[ellipse] = cell[ellipse]

    img = np.clip(np.round(img), 0, 255).astype(np.uint8)
    return img, ellipse


def iter_synthetic_cells(images_per_class: int = 40, seed: int = 42):
    """Yield (class name, label, index, image, truth mask) over the corpus."""
    for label, name in enumerate(CLASS_NAMES):
        for index in range(images_per_class):
            image, truth = render_cell_image(label, index, seed)
            yield name, label, index, image, truth


def write_synthetic_dataset(root, images_per_class: int = 40, seed: int = 42) -> None:
    """Render the corpus into a class-per-directory tree of PPM files."""
    root = Path(root)
    for name, _, index, image, _ in iter_synthetic_cells(images_per_class, seed):
        directory = root / name
        directory.mkdir(parents=True, exist_ok=True)
        save_image(directory / f"img_{index:03d}.ppm", image)
