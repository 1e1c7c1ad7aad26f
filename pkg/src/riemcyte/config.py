"""Pipeline configuration and its key=value file format.

One PipelineConfig carries every tunable of the segmentation, descriptor,
and classification stages, so a run is reproducible from a single record.
Config files are plain text: one ``key = value`` per line, ``#`` comments,
blank lines ignored. Unknown keys are rejected rather than skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .covdesc import FEATURE_NAMES
from .errors import UsageError


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the pipeline with its default."""

    features: tuple = FEATURE_NAMES
    morph_radius: int = 2
    min_area: int = 200
    polarity: str = "highest"
    gmm_tol: float = 1e-6
    gmm_max_iters: int = 100
    mean_eps: float = 1e-8
    mean_max_iters: int = 50
    gamma: float = 0.1
    split_ratio: float = 0.7
    seed: int = 42
    classifier: str = "tslda"
    region_mode: str = "mask"
    intensity_channel: str = "L"

    def validate(self) -> "PipelineConfig":
        """Check invariants; returns self so calls can chain."""
        if len(self.features) < 2:
            raise UsageError("features needs at least 2 entries")
        for name in self.features:
            if name not in FEATURE_NAMES:
                raise UsageError(
                    f"unknown feature {name!r}; valid: {', '.join(FEATURE_NAMES)}"
                )
        if self.morph_radius < 0:
            raise UsageError("morph_radius must be >= 0")
        if self.min_area < 0:
            raise UsageError("min_area must be >= 0")
        if self.polarity not in ("highest", "lowest"):
            raise UsageError("polarity must be 'highest' or 'lowest'")
        if self.gmm_tol < 0:
            raise UsageError("gmm_tol must be >= 0")
        if self.gmm_max_iters < 0 or self.mean_max_iters < 0:
            raise UsageError("iteration limits must be >= 0")
        if self.mean_eps <= 0:
            raise UsageError("mean_eps must be > 0")
        if not 0.0 <= self.gamma <= 1.0:
            raise UsageError("gamma must lie in [0, 1]")
        if not 0.0 < self.split_ratio < 1.0:
            raise UsageError("split_ratio must lie strictly between 0 and 1")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be an unsigned 64-bit integer")
        if self.classifier not in ("tslda", "mdrm"):
            raise UsageError("classifier must be 'tslda' or 'mdrm'")
        if self.region_mode not in ("mask", "bbox"):
            raise UsageError("region_mode must be 'mask' or 'bbox'")
        if self.intensity_channel not in ("a", "L"):
            raise UsageError("intensity_channel must be 'a' or 'L'")
        return self


_INT_KEYS = ("morph_radius", "min_area", "gmm_max_iters", "mean_max_iters", "seed")
_FLOAT_KEYS = ("gmm_tol", "mean_eps", "gamma", "split_ratio")
_STR_KEYS = ("polarity", "classifier", "region_mode", "intensity_channel")


def _convert(key: str, raw: str):
    try:
        if key == "features":
            return tuple(tok.strip() for tok in raw.split(",") if tok.strip())
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {raw!r}") from exc
    if key in _STR_KEYS:
        return raw
    raise UsageError(f"unknown config key {key!r}")


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    """Apply ``key = value`` lines on top of ``base`` (defaults if None)."""
    cfg = base if base is not None else PipelineConfig()
    updates = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise UsageError(f"config line {lineno}: expected key = value, got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        updates[key] = _convert(key, raw)
    return replace(cfg, **updates).validate()


def load_config(path, base: PipelineConfig | None = None) -> PipelineConfig:
    """Read a config file; missing file is a usage error."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {p}: {exc}") from exc
    return parse_config(text, base)
