"""Classifiers over SPD descriptors and their evaluation.

Two classifiers operate on covariance descriptors directly on the
manifold:

* minimum distance to class mean: each class is summarized by the
  geometric mean of its training descriptors, and a query takes the label
  of the nearest mean under the affine-invariant distance;
* tangent-space LDA: all descriptors are mapped to the tangent space at
  the geometric mean of the whole training set, where a one-vs-rest
  Fisher discriminant with a shrinkage-regularized pooled scatter scores
  each class.

Both model types persist to a versioned plain-text format.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg

from .covdesc import _parse_spd_lines
from .errors import (
    DataError,
    DegenerateInputError,
    EmptyClassError,
    SingularScatterError,
)
from .spdgeom import riemann_distance, riemannian_mean, tangent_coords

#: Default shrinkage weight for the within-class scatter.
DEFAULT_GAMMA = 0.1

#: Floor for the shrinkage target, so gamma > 0 always yields a usable
#: scatter even when the tangent vectors are exactly coincident.
_SHRINK_FLOOR = 1e-12


@dataclass(frozen=True)
class LabeledSample:
    """An SPD descriptor paired with its class index."""

    descriptor: np.ndarray
    label: int


@dataclass(frozen=True)
class MdrmModel:
    """Per-class geometric means for minimum-distance classification."""

    class_means: tuple
    class_names: tuple

    @property
    def n_classes(self) -> int:
        return len(self.class_means)

    @property
    def n(self) -> int:
        return self.class_means[0].shape[0]


@dataclass(frozen=True)
class TsldaModel:
    """Tangent-space Fisher discriminants around a reference mean.

    ``weights`` is (C, m) and ``biases`` is (C,) with m = n(n+1)/2; class
    c scores a tangent vector s as weights[c] @ s + biases[c].
    """

    reference_mean: np.ndarray
    weights: np.ndarray
    biases: np.ndarray
    gamma: float
    class_names: tuple

    @property
    def n_classes(self) -> int:
        return len(self.biases)

    @property
    def n(self) -> int:
        return self.reference_mean.shape[0]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with true classes on rows and predictions on columns."""

    counts: np.ndarray
    class_names: tuple

    @property
    def per_class_accuracy(self) -> np.ndarray:
        """Diagonal over row sums; nan for classes absent from the test set."""
        totals = self.counts.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(totals > 0, np.diag(self.counts) / totals, np.nan)

    @property
    def overall_accuracy(self) -> float:
        return float(np.trace(self.counts) / self.counts.sum())


def _group_by_class(samples: Sequence[LabeledSample], class_names):
    if class_names is None:
        c = max(s.label for s in samples) + 1
        class_names = tuple(f"class{i}" for i in range(c))
    else:
        class_names = tuple(class_names)
        c = len(class_names)
    if c < 2:
        raise EmptyClassError(f"need at least 2 classes, got {c}")
    groups = [[] for _ in range(c)]
    for s in samples:
        if not 0 <= s.label < c:
            raise ValueError(f"label {s.label} out of range for {c} classes")
        groups[s.label].append(np.asarray(s.descriptor, dtype=np.float64))
    return groups, class_names


def mdrm_train(
    samples: Sequence[LabeledSample],
    class_names=None,
    eps: float = 1e-8,
    max_iters: int = 50,
) -> MdrmModel:
    """Fit per-class geometric means.

    Raises
    ------
    EmptyClassError
        If any class index in 0..C-1 has no samples.
    """
    groups, class_names = _group_by_class(samples, class_names)
    means = []
    for name, group in zip(class_names, groups):
        if not group:
            raise EmptyClassError(f"class {name!r} has no training samples")
        means.append(riemannian_mean(group, eps=eps, max_iters=max_iters).mean)
    return MdrmModel(tuple(means), class_names)


def mdrm_distances(model: MdrmModel, descriptor) -> np.ndarray:
    """Distance from the query to every class mean."""
    p = np.asarray(descriptor, dtype=np.float64)
    return np.array([riemann_distance(p, g) for g in model.class_means])


def mdrm_predict(model: MdrmModel, descriptor) -> int:
    """Index of the nearest class mean; ties go to the smaller index."""
    return int(np.argmin(mdrm_distances(model, descriptor)))


def tslda_train(
    samples: Sequence[LabeledSample],
    gamma: float = DEFAULT_GAMMA,
    class_names=None,
    eps: float = 1e-8,
    max_iters: int = 50,
) -> TsldaModel:
    """Fit one-vs-rest Fisher discriminants in the tangent space.

    The reference point is the geometric mean of every training
    descriptor. The pooled within-class covariance of the tangent vectors
    is shrunk as (1 - gamma) * S + gamma * (tr S / m) * Id before
    inversion; gamma in [0, 1].

    Raises
    ------
    EmptyClassError
        If any class has fewer than 2 samples.
    SingularScatterError
        If gamma = 0 and the pooled scatter is numerically singular.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    groups, class_names = _group_by_class(samples, class_names)
    for name, group in zip(class_names, groups):
        if len(group) < 2:
            raise EmptyClassError(
                f"class {name!r} has {len(group)} samples; need >= 2"
            )
    everything = [p for group in groups for p in group]
    reference = riemannian_mean(everything, eps=eps, max_iters=max_iters).mean

    vecs = [np.array([tangent_coords(reference, p) for p in group]) for group in groups]
    m = vecs[0].shape[1]
    c = len(groups)
    n_total = sum(len(v) for v in vecs)

    class_means = np.array([v.mean(axis=0) for v in vecs])
    scatter = np.zeros((m, m))
    for v, mu in zip(vecs, class_means):
        centered = v - mu
        scatter += centered.T @ centered
    scatter /= n_total - c

    target = max(np.trace(scatter) / m, _SHRINK_FLOOR)
    shrunk = (1.0 - gamma) * scatter + gamma * target * np.eye(m)

    totals = class_means.sum(axis=0)
    weights = np.empty((c, m))
    biases = np.empty(c)
    try:
        factor = scipy.linalg.cho_factor(shrunk)
    except scipy.linalg.LinAlgError as exc:
        raise SingularScatterError(
            "within-class scatter is singular; use a shrinkage gamma > 0"
        ) from exc
    for i in range(c):
        # Unweighted mean of the remaining class means, not of the pooled
        # samples, so each rest class counts equally.
        mu_rest = (totals - class_means[i]) / (c - 1)
        diff = class_means[i] - mu_rest
        w = scipy.linalg.cho_solve(factor, diff)
        weights[i] = w
        biases[i] = -0.5 * w @ (class_means[i] + mu_rest)
    return TsldaModel(reference, weights, biases, float(gamma), class_names)


def tslda_scores(model: TsldaModel, descriptor) -> np.ndarray:
    """Per-class discriminant scores w_c @ s + b_c."""
    s = tangent_coords(model.reference_mean, np.asarray(descriptor, dtype=np.float64))
    return model.weights @ s + model.biases


def tslda_predict(model: TsldaModel, descriptor) -> int:
    """Class with the highest score; ties go to the smaller index."""
    return int(np.argmax(tslda_scores(model, descriptor)))


def predict(model, descriptor) -> int:
    """Dispatch to the right predictor for the model type."""
    if isinstance(model, MdrmModel):
        return mdrm_predict(model, descriptor)
    if isinstance(model, TsldaModel):
        return tslda_predict(model, descriptor)
    raise TypeError(f"unsupported model type {type(model).__name__}")


def evaluate(model, test: Sequence[LabeledSample]) -> ConfusionMatrix:
    """Confusion matrix of the model over a labeled test set."""
    if not test:
        raise DegenerateInputError("cannot evaluate on an empty test set")
    counts = np.zeros((model.n_classes, model.n_classes), dtype=np.int64)
    for sample in test:
        counts[sample.label, predict(model, sample.descriptor)] += 1
    return ConfusionMatrix(counts, model.class_names)


def _matrix_lines(matrix: np.ndarray):
    yield f"spd {matrix.shape[0]}"
    for row in matrix:
        yield " ".join(f"{v:.17g}" for v in row)


def _names_line(class_names) -> str:
    for name in class_names:
        if not name or any(ch.isspace() for ch in name):
            raise ValueError(f"class name {name!r} must be non-empty without whitespace")
    return "classes " + " ".join(class_names)


def save_model(path, model) -> None:
    """Write a model to its plain-text format (17 significant digits)."""
    lines = []
    if isinstance(model, MdrmModel):
        lines.append("mdrm-model v1")
        lines.append(_names_line(model.class_names))
        lines.append(f"n {model.n}")
        for mean in model.class_means:
            lines.extend(_matrix_lines(mean))
    elif isinstance(model, TsldaModel):
        lines.append("tslda-model v1")
        lines.append(_names_line(model.class_names))
        lines.append(f"n {model.n}")
        lines.append(f"gamma {model.gamma:.17g}")
        lines.extend(_matrix_lines(model.reference_mean))
        for w, b in zip(model.weights, model.biases):
            lines.append("w " + " ".join(f"{v:.17g}" for v in w))
            lines.append(f"b {b:.17g}")
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _expect(lines, index, tag, origin):
    if index >= len(lines):
        raise DataError(f"{origin}: truncated model file, expected {tag!r} line")
    parts = lines[index].split()
    if not parts or parts[0] != tag:
        raise DataError(f"{origin}: expected {tag!r} line, got {lines[index]!r}")
    return parts[1:]


def load_model(path):
    """Read back a model written by :func:`save_model`.

    Raises
    ------
    DataError
        On an unknown header version or any structural defect.
    """
    origin = str(path)
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines:
        raise DataError(f"{origin}: empty model file")
    header = lines[0].strip()
    if header not in ("mdrm-model v1", "tslda-model v1"):
        raise DataError(f"{origin}: unknown model header {header!r}")
    names = tuple(_expect(lines, 1, "classes", origin))
    if len(names) < 2:
        raise DataError(f"{origin}: model needs >= 2 classes")
    (n_str,) = _expect(lines, 2, "n", origin)
    n = int(n_str)
    if header == "mdrm-model v1":
        means = []
        at = 3
        for _ in names:
            means.append(_parse_spd_lines(lines[at : at + n + 1], origin))
            at += n + 1
        return MdrmModel(tuple(means), names)
    (g_str,) = _expect(lines, 3, "gamma", origin)
    reference = _parse_spd_lines(lines[4 : 4 + n + 1], origin)
    m = n * (n + 1) // 2
    weights = np.empty((len(names), m))
    biases = np.empty(len(names))
    at = 5 + n
    for i in range(len(names)):
        w_toks = _expect(lines, at, "w", origin)
        if len(w_toks) != m:
            raise DataError(f"{origin}: weight row has {len(w_toks)} entries, expected {m}")
        weights[i] = [float(t) for t in w_toks]
        (b_tok,) = _expect(lines, at + 1, "b", origin)
        biases[i] = float(b_tok)
        at += 2
    return TsldaModel(reference, weights, biases, float(g_str), names)
