"""Image file I/O: binary PPM (P6) natively, PNG through Pillow."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DataError


def read_ppm(path) -> np.ndarray:
    """Read a binary P6 PPM with maxval 255 into an (H, W, 3) uint8 array."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not data.startswith(b"P6"):
        raise DataError(f"{path}: not a binary P6 PPM")
    fields = []
    pos = 2
    while len(fields) < 3:
        if pos >= len(data):
            raise DataError(f"{path}: truncated PPM header")
        c = data[pos : pos + 1]
        if c == b"#":
            pos = data.find(b"\n", pos)
            if pos < 0:
                raise DataError(f"{path}: truncated PPM comment")
            pos += 1
        elif c.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            token = data[pos:end]
            if not token.isdigit():
                raise DataError(f"{path}: bad PPM header token {token!r}")
            fields.append(int(token))
            pos = end
    width, height, maxval = fields
    if maxval != 255:
        raise DataError(f"{path}: unsupported PPM maxval {maxval} (must be 255)")
    if width < 1 or height < 1:
        raise DataError(f"{path}: bad PPM dimensions {width}x{height}")
    pos += 1  # single whitespace byte after maxval
    n = width * height * 3
    raw = data[pos : pos + n]
    if len(raw) != n:
        raise DataError(f"{path}: PPM pixel data truncated ({len(raw)} of {n} bytes)")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3).copy()


def write_ppm(path, img: np.ndarray) -> None:
    """Write an (H, W, 3) uint8 array as a binary P6 PPM with maxval 255."""
    img = np.ascontiguousarray(np.asarray(img, dtype=np.uint8))
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {img.shape}")
    h, w = img.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.tobytes())


def read_png(path) -> np.ndarray:
    """Read a PNG as (H, W, 3) uint8, dropping any alpha channel."""
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as exc:
        raise DataError(f"cannot decode {path}: {exc}") from exc


def write_png(path, img: np.ndarray) -> None:
    from PIL import Image

    img = np.asarray(img, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {img.shape}")
    Image.fromarray(img, mode="RGB").save(path, format="PNG")


def load_image(path) -> np.ndarray:
    """Load a PPM or PNG image by extension into an (H, W, 3) uint8 array."""
    suffix = Path(path).suffix.lower()
    if suffix == ".ppm":
        return read_ppm(path)
    if suffix == ".png":
        return read_png(path)
    raise DataError(f"{path}: unsupported image extension {suffix!r} (use .ppm or .png)")


def save_image(path, img: np.ndarray) -> None:
    suffix = Path(path).suffix.lower()
    if suffix == ".ppm":
        write_ppm(path, img)
    elif suffix == ".png":
        write_png(path, img)
    else:
        raise DataError(f"{path}: unsupported image extension {suffix!r} (use .ppm or .png)")


def save_mask(path, mask: np.ndarray) -> None:
    """Write a binary mask as an image: foreground white, background black."""
    mask = np.asarray(mask).astype(bool)
    gray = np.where(mask, 255, 0).astype(np.uint8)
    save_image(path, np.dstack([gray, gray, gray]))
