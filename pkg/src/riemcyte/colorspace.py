"""RGB to Lab conversion through the XYZ intermediate.

All conversions accept scalars or arrays and broadcast elementwise, so the
same functions serve single pixels and whole planes.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

# CIE 1931 RGB->XYZ primaries with the 1/b21 normalization; every row sums
# to 1/0.17697, so an equal-energy input maps to X = Y = Z.
RGB_TO_XYZ_MATRIX = np.array(
    [
        [0.49, 0.31, 0.20],
        [0.17697, 0.8124, 0.01063],
        [0.00, 0.01, 0.99],
    ]
) / 0.17697

#: D65 reference white used by the Lab mapping.
REF_WHITE = (95.047, 100.0, 108.883)

#: Knee of the Lab companding function; below it the mapping is linear.
LAB_KNEE = (6.0 / 29.0) ** 3

_LINEAR_SLOPE = (29.0 / 6.0) ** 2 / 3.0
_LINEAR_OFFSET = 4.0 / 29.0


class XyzTriple(NamedTuple):
    X: np.ndarray | float
    Y: np.ndarray | float
    Z: np.ndarray | float


def lab_f(t):
    """Lab companding: cube root above the knee, linear below.

    f(t) = t^(1/3) for t > (6/29)^3, else t/3 * (29/6)^2 + 4/29.
    """
    t = np.asarray(t, dtype=np.float64)
    out = np.where(t > LAB_KNEE, np.cbrt(t), _LINEAR_SLOPE * t + _LINEAR_OFFSET)
    return out if out.ndim else float(out)


def rgb_to_xyz(r, g, b) -> XyzTriple:
    """Map unit-scaled RGB in [0, 1] to XYZ tristimulus values.

    Channels are rescaled to [0, 100] before the linear map so that Y is
    commensurate with the reference white Y0 = 100.
    """
    r = np.asarray(r, dtype=np.float64) * 100.0
    g = np.asarray(g, dtype=np.float64) * 100.0
    b = np.asarray(b, dtype=np.float64) * 100.0
    m = RGB_TO_XYZ_MATRIX
    x = m[0, 0] * r + m[0, 1] * g + m[0, 2] * b
    y = m[1, 0] * r + m[1, 1] * g + m[1, 2] * b
    z = m[2, 0] * r + m[2, 1] * g + m[2, 2] * b
    if x.ndim == 0:
        return XyzTriple(float(x), float(y), float(z))
    return XyzTriple(x, y, z)


def xyz_to_lab(x, y, z):
    """Map XYZ to (L, a, b) relative to the D65 reference white."""
    fx = lab_f(np.asarray(x, dtype=np.float64) / REF_WHITE[0])
    fy = lab_f(np.asarray(y, dtype=np.float64) / REF_WHITE[1])
    fz = lab_f(np.asarray(z, dtype=np.float64) / REF_WHITE[2])
    lum = 116.0 * fy - 16.0
    a = 500.0 * (fx - fy)
    b = 200.0 * (fy - fz)
    if np.ndim(lum) == 0:
        return float(lum), float(a), float(b)
    return lum, a, b


def extract_lab_channels(img: np.ndarray):
    """Convert an 8-bit RGB raster to three float64 Lab planes.

    Parameters
    ----------
    img : ndarray, shape (H, W, 3)
        8-bit RGB image.

    Returns
    -------
    (L, a, b) : three ndarrays of shape (H, W)
    """
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must have at least one pixel")
    rgb = img.astype(np.float64) / 255.0
    x, y, z = rgb_to_xyz(rgb[..., 0], rgb[..., 1], rgb[..., 2])
    return xyz_to_lab(x, y, z)
