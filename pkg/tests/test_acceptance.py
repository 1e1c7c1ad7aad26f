"""Acceptance gate: one test per shipping criterion, pinned tolerances.

Each test prints a single ``criterion NN [PASS|FAIL]`` line even under
pytest's capture, so a plain run shows the full scorecard.
"""

import tempfile
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg

from riemcyte.classify import (
    ConfusionMatrix,
    LabeledSample,
    evaluate,
    mdrm_train,
    save_model,
    tslda_train,
)
from riemcyte.colorspace import LAB_KNEE, REF_WHITE, lab_f, xyz_to_lab
from riemcyte.covdesc import CovarianceIntegral, feature_map, region_covariance
from riemcyte.pipeline import descriptor_from_image
from riemcyte.preprocess import Roi
from riemcyte.report import format_confusion_table
from riemcyte.spdgeom import (
    exp_map,
    log_map,
    riemann_distance,
    riemannian_mean,
    spd_exp,
    spd_log,
    tangent_coords,
)
from riemcyte.dataset import stratified_split
from riemcyte.synthetic import CLASS_NAMES, iter_synthetic_cells, make_spd_classes


def _report(capsys, num: int, ok: bool, detail: str) -> None:
    verdict = "PASS" if ok else "FAIL"
    with capsys.disabled():
        print(f"criterion {num:2d} [{verdict}] {detail}")
    assert ok, detail


def _spd_pair(rng, n):
    a = rng.standard_normal((n, n))
    p = a @ a.T + np.eye(n)
    b = rng.standard_normal((n, n))
    q = b @ b.T + np.eye(n)
    return p, q


def _model_bytes(model) -> bytes:
    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "model.txt"
        save_model(path, model)
        return path.read_bytes()


def _spd_bench():
    """Train and score both classifiers on the synthetic SPD cloud."""
    t0 = time.perf_counter()
    _, samples = make_spd_classes(seed=42)
    per_class = 60
    train_idx, test_idx = stratified_split([per_class] * 5, 0.7, 42)
    train, test = [], []
    for label in range(5):
        base = label * per_class
        train.extend(samples[base + i] for i in train_idx[label])
        test.extend(samples[base + i] for i in test_idx[label])
    mdrm = mdrm_train(train, class_names=CLASS_NAMES)
    tslda = tslda_train(train, class_names=CLASS_NAMES)
    cm_mdrm = evaluate(mdrm, test)
    cm_tslda = evaluate(tslda, test)
    elapsed = time.perf_counter() - t0
    return {
        "acc_mdrm": cm_mdrm.overall_accuracy,
        "acc_tslda": cm_tslda.overall_accuracy,
        "counts_mdrm": cm_mdrm.counts.copy(),
        "counts_tslda": cm_tslda.counts.copy(),
        "bytes_mdrm": _model_bytes(mdrm),
        "bytes_tslda": _model_bytes(tslda),
        "elapsed": elapsed,
    }


def _imagery_bench():
    """Render the image corpus, segment, describe, train, and score."""
    t0 = time.perf_counter()
    per_class = 40
    samples, ious = [], []
    for _, label, _, image, truth in iter_synthetic_cells(per_class):
        cov, seg = descriptor_from_image(image)
        inter = np.logical_and(seg.mask, truth).sum()
        union = np.logical_or(seg.mask, truth).sum()
        ious.append(inter / union if union else 0.0)
        samples.append(LabeledSample(cov, label))
    train_idx, test_idx = stratified_split([per_class] * 5, 0.7, 42)
    train, test = [], []
    for label in range(5):
        base = label * per_class
        train.extend(samples[base + i] for i in train_idx[label])
        test.extend(samples[base + i] for i in test_idx[label])
    model = tslda_train(train, class_names=CLASS_NAMES)
    cm = evaluate(model, test)
    elapsed = time.perf_counter() - t0
    return {
        "acc": cm.overall_accuracy,
        "counts": cm.counts.copy(),
        "bytes": _model_bytes(model),
        "ious": np.array(ious),
        "elapsed": elapsed,
    }


@pytest.fixture(scope="session")
def spd_bench():
    return _spd_bench()


@pytest.fixture(scope="session")
def imagery_bench():
    return _imagery_bench()


def test_criterion_01_metric_invariances(capsys):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(100):
        n = 3 if i % 2 == 0 else 9
        p, q = _spd_pair(rng, n)
        d = riemann_distance(p, q)
        worst = max(worst, abs(riemann_distance(q, p) - d))
        worst = max(
            worst,
            abs(riemann_distance(np.linalg.inv(p), np.linalg.inv(q)) - d),
        )
        u, _ = np.linalg.qr(rng.standard_normal((n, n)))
        v, _ = np.linalg.qr(rng.standard_normal((n, n)))
        w = u @ np.diag(rng.uniform(0.5, 2.0, size=n)) @ v.T
        worst = max(worst, abs(riemann_distance(w @ p @ w.T, w @ q @ w.T) - d))
    triangle_ok = True
    for i in range(100):
        n = 3 if i % 2 == 0 else 9
        p, q = _spd_pair(rng, n)
        r, _ = _spd_pair(rng, n)
        if riemann_distance(p, r) > (
            riemann_distance(p, q) + riemann_distance(q, r) + 1e-10
        ):
            triangle_ok = False
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and triangle_ok and elapsed < 5.0
    _report(
        capsys,
        1,
        ok,
        f"invariance dev {worst:.2e} (tol 1e-8), triangle "
        f"{'ok' if triangle_ok else 'VIOLATED'}, {elapsed:.2f}s",
    )


def test_criterion_02_exp_log_duality(capsys):
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(100):
        n = 3 if i % 2 == 0 else 9
        p, q = _spd_pair(rng, n)
        back = spd_exp(spd_log(p))
        worst = max(worst, np.linalg.norm(back - p) / max(1.0, np.linalg.norm(p)))
        s = log_map(p, q)
        q_back = exp_map(p, s)
        worst = max(worst, np.linalg.norm(q_back - q) / max(1.0, np.linalg.norm(q)))
        s_back = log_map(p, exp_map(p, s))
        worst = max(worst, np.linalg.norm(s_back - s) / max(1.0, np.linalg.norm(s)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 5.0
    _report(capsys, 2, ok, f"max roundtrip dev {worst:.2e} (tol 1e-9), {elapsed:.2f}s")


def test_criterion_03_tangent_norm_is_distance(capsys):
    rng = np.random.default_rng(303)
    worst = 0.0
    for i in range(100):
        n = 3 if i % 2 == 0 else 9
        p, q = _spd_pair(rng, n)
        dev = abs(
            np.linalg.norm(tangent_coords(p, q)) - riemann_distance(p, q)
        )
        worst = max(worst, dev)
    ok = worst <= 1e-9
    _report(capsys, 3, ok, f"max |vec norm - distance| {worst:.2e} (tol 1e-9)")


def test_criterion_04_two_matrix_mean_is_midpoint(capsys):
    rng = np.random.default_rng(404)
    worst = 0.0
    all_converged = True
    for i in range(10):
        n = 3 if i % 2 == 0 else 9
        p, q = _spd_pair(rng, n)
        res = riemannian_mean([p, q])
        all_converged = all_converged and res.converged and res.n_iter <= 50
        ph = scipy.linalg.sqrtm(p).real
        ph_inv = np.linalg.inv(ph)
        midpoint = ph @ scipy.linalg.sqrtm(ph_inv @ q @ ph_inv).real @ ph
        worst = max(worst, np.linalg.norm(res.mean - midpoint))
    inv_pair = np.diag([2.0, 5.0, 11.0])
    res = riemannian_mean([inv_pair, np.linalg.inv(inv_pair)])
    identity_dev = np.linalg.norm(res.mean - np.eye(3))
    ok = worst <= 1e-8 and identity_dev <= 1e-10 and all_converged
    _report(
        capsys,
        4,
        ok,
        f"midpoint dev {worst:.2e} (tol 1e-8), inverse-pair dev "
        f"{identity_dev:.2e} (tol 1e-10), converged={all_converged}",
    )


def _loop_covariance(stack, mask):
    vectors = stack[:, mask].T
    mu = vectors.mean(axis=0)
    d = vectors.shape[1]
    acc = np.zeros((d, d))
    for v in vectors:
        acc += np.outer(v - mu, v - mu)
    return acc / (vectors.shape[0] - 1)


def test_criterion_05_region_covariance_routes(capsys):
    rng = np.random.default_rng(505)
    stack = rng.normal(size=(9, 40, 50)) * 3.0 + 1.0
    worst_mask = 0.0
    for _ in range(50):
        x0, y0 = rng.integers(0, 30), rng.integers(0, 20)
        x1, y1 = x0 + rng.integers(4, 15), y0 + rng.integers(4, 15)
        mask = rng.random((y1 - y0 + 1, x1 - x0 + 1)) < 0.6
        if mask.sum() < 2:
            mask[:2, 0] = True
        roi = Roi(
            x0=int(x0), y0=int(y0), x1=int(x1), y1=int(y1),
            area=int(mask.sum()), mask=mask,
        )
        got = region_covariance(stack, roi)
        window = stack[:, y0 : y1 + 1, x0 : x1 + 1]
        raw = _loop_covariance(window, mask)
        raw += 1e-6 * max(np.trace(raw) / 9.0, 1.0) * np.eye(9)
        rel = np.linalg.norm(got - raw) / np.linalg.norm(raw)
        worst_mask = max(worst_mask, rel)
    integral = CovarianceIntegral(stack)
    worst_rect = 0.0
    for _ in range(100):
        x0, y0 = rng.integers(0, 40), rng.integers(0, 30)
        x1, y1 = x0 + rng.integers(1, 10), y0 + rng.integers(1, 10)
        roi = Roi(
            x0=int(x0), y0=int(y0), x1=int(x1), y1=int(y1),
            area=(y1 - y0 + 1) * (x1 - x0 + 1),
            mask=np.ones((y1 - y0 + 1, x1 - x0 + 1), dtype=bool),
        )
        naive = region_covariance(stack, roi)
        fast = integral.covariance(int(x0), int(y0), int(x1), int(y1))
        rel = np.linalg.norm(fast - naive) / np.linalg.norm(naive)
        worst_rect = max(worst_rect, rel)
    plane = np.full((3, 3), 7.0)
    three = feature_map(plane, ("x", "y"))
    roi = Roi(x0=0, y0=0, x1=2, y1=2, area=9, mask=np.ones((3, 3), dtype=bool))
    fixture = region_covariance(three, roi)
    fixture_dev = max(abs(fixture[0, 0] - 0.75), abs(fixture[1, 1] - 0.75))
    ok = worst_mask <= 1e-10 and worst_rect <= 1e-9 and fixture_dev <= 2e-6
    _report(
        capsys,
        5,
        ok,
        f"mask-vs-loop rel {worst_mask:.2e} (tol 1e-10), fast-vs-naive rel "
        f"{worst_rect:.2e} (tol 1e-9), 3x3 coord var dev {fixture_dev:.2e}",
    )


def test_criterion_06_spd_cloud_accuracy(capsys, spd_bench):
    b = spd_bench
    margin = b["acc_tslda"] - b["acc_mdrm"]
    ok = (
        b["acc_mdrm"] >= 0.95
        and b["acc_tslda"] >= 0.95
        and margin >= -0.02
        and b["elapsed"] < 30.0
    )
    _report(
        capsys,
        6,
        ok,
        f"mdrm {b['acc_mdrm']:.4f}, tslda {b['acc_tslda']:.4f} (floor 0.95), "
        f"margin {margin:+.4f} (floor -0.02), {b['elapsed']:.1f}s (limit 30s)",
    )


def test_criterion_07_imagery_pipeline(capsys, imagery_bench):
    b = imagery_bench
    frac_good = float((b["ious"] >= 0.85).mean())
    ok = frac_good >= 0.90 and b["acc"] >= 0.90 and b["elapsed"] < 180.0
    _report(
        capsys,
        7,
        ok,
        f"IoU>=0.85 on {frac_good:.1%} of images (floor 90%), accuracy "
        f"{b['acc']:.4f} (floor 0.90), {b['elapsed']:.1f}s (limit 180s)",
    )


def test_criterion_08_colorspace_anchors(capsys):
    l, a, bb = xyz_to_lab(*REF_WHITE)
    white_dev = max(abs(l - 100.0), abs(a), abs(bb))
    t = LAB_KNEE
    below = lab_f(np.nextafter(t, 0.0))
    above = lab_f(np.nextafter(t, 1.0))
    knee_gap = abs(float(above) - float(below))
    ok = white_dev <= 1e-10 and knee_gap <= 1e-12
    _report(
        capsys,
        8,
        ok,
        f"reference white dev {white_dev:.2e} (tol 1e-10), knee gap "
        f"{knee_gap:.2e} (tol 1e-12)",
    )


def test_criterion_09_end_to_end_reproducibility(capsys, spd_bench, imagery_bench):
    spd_again = _spd_bench()
    img_again = _imagery_bench()
    same_models = (
        spd_again["bytes_mdrm"] == spd_bench["bytes_mdrm"]
        and spd_again["bytes_tslda"] == spd_bench["bytes_tslda"]
        and img_again["bytes"] == imagery_bench["bytes"]
    )
    same_counts = (
        np.array_equal(spd_again["counts_mdrm"], spd_bench["counts_mdrm"])
        and np.array_equal(spd_again["counts_tslda"], spd_bench["counts_tslda"])
        and np.array_equal(img_again["counts"], imagery_bench["counts"])
    )
    ok = same_models and same_counts
    _report(
        capsys,
        9,
        ok,
        f"models byte-identical={same_models}, confusions identical={same_counts}",
    )


def test_criterion_10_confusion_arithmetic(capsys):
    cm = ConfusionMatrix(
        counts=np.array([[60, 1], [3, 44]]), class_names=("a", "b")
    )
    per = cm.per_class_accuracy
    exact = per[0] == 60 / 61 and per[1] == 44 / 47
    overall = cm.overall_accuracy == 104 / 108
    table = format_confusion_table(cm)
    rendered = "98.36%" in table and "93.62%" in table and "96.30%" in table
    ok = exact and overall and rendered
    _report(
        capsys,
        10,
        ok,
        f"ratios exact={exact and overall}, formatted percentages present={rendered}",
    )
