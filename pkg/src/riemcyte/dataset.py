"""Dataset layout scanning and the deterministic stratified split.

A dataset is one directory per class; class order is the lexicographic
order of the directory names, and files within a class are sorted the
same way, so manifests never depend on filesystem enumeration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, EmptyClassError

_IMAGE_SUFFIXES = (".ppm", ".png")


@dataclass(frozen=True)
class DatasetManifest:
    """Resolved class names and per-class image paths."""

    root: Path
    class_names: tuple
    files: tuple  # one tuple of Paths per class, sorted

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def counts(self) -> tuple:
        return tuple(len(f) for f in self.files)


def scan_dataset(root) -> DatasetManifest:
    """Build a manifest from a class-per-directory tree.

    Raises
    ------
    DataError
        If the root is missing or holds fewer than 2 class directories.
    EmptyClassError
        If a class directory contains no readable image files.
    """
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"dataset root {root} is not a directory")
    class_dirs = sorted((d for d in root.iterdir() if d.is_dir()), key=lambda d: d.name)
    if len(class_dirs) < 2:
        raise DataError(f"dataset root {root} holds {len(class_dirs)} class directories; need >= 2")
    names = []
    files = []
    for d in class_dirs:
        listing = sorted(
            (f for f in d.iterdir() if f.is_file() and f.suffix.lower() in _IMAGE_SUFFIXES),
            key=lambda f: f.name,
        )
        if not listing:
            raise EmptyClassError(f"class directory {d} holds no .ppm or .png files")
        names.append(d.name)
        files.append(tuple(listing))
    return DatasetManifest(root, tuple(names), tuple(files))


def stratified_split(counts, ratio: float, seed: int):
    """Split per-class index ranges into train and test index arrays.

    Uses one numpy PCG64 generator seeded with ``seed``. Classes are
    processed in class order; for each class the generator draws one
    permutation of its indices, of which the first floor(ratio * n)
    entries form the training set and the remainder the test set, both
    kept in permutation order. The procedure is fully determined by
    (counts, ratio, seed).
    """
    rng = np.random.default_rng(seed)
    train, test = [], []
    for n in counts:
        perm = rng.permutation(n)
        cut = math.floor(ratio * n)
        train.append(perm[:cut])
        test.append(perm[cut:])
    return train, test


def split_manifest(manifest: DatasetManifest, ratio: float, seed: int):
    """Stratified split of a manifest into (path, label) lists."""
    train_idx, test_idx = stratified_split(manifest.counts(), ratio, seed)
    train, test = [], []
    for label, paths in enumerate(manifest.files):
        train.extend((paths[i], label) for i in train_idx[label])
        test.extend((paths[i], label) for i in test_idx[label])
    return train, test
