"""Energy maps for content-aware handscroll retargeting.

Two per-pixel signals are fused: a Sobel gradient magnitude of the
luminance, and a frequency-tuned saliency (squared Lab distance between
the blurred image's colors and the original image's mean color). Silk
texture scores high on gradients but low on saliency, which is what lets
the carver squeeze silk while keeping drawings and text.

All maps are max-min normalized to [0, 1]; a constant map normalizes to
all zeros by convention (avoids 0/0).
"""

from __future__ import annotations

import numpy as np

D65_WHITE = (0.95047, 1.0, 1.08883)

# sRGB -> XYZ (D65) matrix rows.
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])


def as_image(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    return arr


def luminance(img: np.ndarray) -> np.ndarray:
    """Rec.601 luma of an RGB image, as float64 in the input's scale."""
    rgb = as_image(img).astype(np.float64)
    return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]


def srgb_to_lab(img: np.ndarray) -> np.ndarray:
    """8-bit sRGB to CIE Lab under the D65 white point."""
    rgb = as_image(img).astype(np.float64) / 255.0
    linear = np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _RGB_TO_XYZ.T
    xyz = xyz / np.array(D65_WHITE)

    eps, kappa = 216.0 / 24389.0, 24389.0 / 27.0
    f = np.where(xyz > eps, np.cbrt(xyz), (kappa * xyz + 16.0) / 116.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def normalize(energy: np.ndarray) -> np.ndarray:
    """Max-min normalization; constant maps go to all zeros."""
    e = np.asarray(energy, dtype=np.float64)
    if not np.all(np.isfinite(e)):
        raise ValueError("energy map contains non-finite values")
    lo, hi = e.min(), e.max()
    if hi == lo:
        return np.zeros_like(e)
    return (e - lo) / (hi - lo)


def _pad_edge(grid: np.ndarray) -> np.ndarray:
    return np.pad(grid, 1, mode="edge")


def gradient_energy(img: np.ndarray) -> np.ndarray:
    """|dx| + |dy| of luminance via the 3x3 Sobel stencil, normalized.

    Borders are replicate-padded so edge pixels see a full neighborhood.
    """
    lum = luminance(img)
    p = _pad_edge(lum)
    # Sobel x: [[-1,0,1],[-2,0,2],[-1,0,1]] over the padded grid.
    gx = (
        -p[:-2, :-2] + p[:-2, 2:]
        - 2.0 * p[1:-1, :-2] + 2.0 * p[1:-1, 2:]
        - p[2:, :-2] + p[2:, 2:]
    )
    gy = (
        -p[:-2, :-2] - 2.0 * p[:-2, 1:-1] - p[:-2, 2:]
        + p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:]
    )
    return normalize(np.abs(gx) + np.abs(gy))


def binomial_blur5(img: np.ndarray) -> np.ndarray:
    """Separable 5-tap binomial filter [1,4,6,4,1]/16, edge-padded.

    Cheap stand-in for the Gaussian pre-filter that strips the highest
    frequencies before saliency measurement.
    """
    arr = np.asarray(img, dtype=np.float64)
    kernel = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0

    def along(a: np.ndarray, axis: int) -> np.ndarray:
        pad = [(0, 0)] * a.ndim
        pad[axis] = (2, 2)
        p = np.pad(a, pad, mode="edge")
        out = np.zeros_like(a)
        for i, w in enumerate(kernel):
            sl = [slice(None)] * a.ndim
            sl[axis] = slice(i, i + a.shape[axis])
            out += w * p[tuple(sl)]
        return out

    return along(along(arr, 0), 1)


def saliency_from_lab(lab: np.ndarray, mean_color: np.ndarray) -> np.ndarray:
    """Squared Lab distance to the mean color, max-min normalized."""
    return normalize(((np.asarray(mean_color) - lab) ** 2).sum(axis=-1))


def ft_saliency(img: np.ndarray, blur: str = "binomial5") -> np.ndarray:
    """Frequency-tuned saliency, normalized to [0, 1].

    Per pixel: squared Lab distance between the blurred image's color and
    the mean Lab color of the *original* image. ``blur`` is "binomial5"
    or "none" (the identity option exists so tests can check the formula
    directly).
    """
    img = as_image(img)
    if blur == "binomial5":
        filtered = binomial_blur5(img.astype(np.float64))
    elif blur == "none":
        filtered = img
    else:
        raise ValueError(f"unknown blur option {blur!r}")

    mu = srgb_to_lab(img).reshape(-1, 3).mean(axis=0)
    return saliency_from_lab(srgb_to_lab(filtered), mu)


def fuse_energy(
    grad: np.ndarray, sal: np.ndarray, alpha: float = 0.7, beta: float = 0.3
) -> np.ndarray:
    """alpha * N(grad) + beta * N(sal), renormalized to [0, 1]."""
    g = np.asarray(grad, dtype=np.float64)
    s = np.asarray(sal, dtype=np.float64)
    if g.shape != s.shape:
        raise ValueError(f"energy map shapes differ: {g.shape} vs {s.shape}")
    if alpha < 0 or beta < 0 or alpha + beta <= 0:
        raise ValueError(f"need alpha, beta >= 0 with alpha + beta > 0, got ({alpha}, {beta})")
    return normalize(alpha * normalize(g) + beta * normalize(s))


def fused_energy(img: np.ndarray, alpha: float = 0.7, beta: float = 0.3,
                 blur: str = "binomial5") -> np.ndarray:
    """Full energy pipeline for one image."""
    return fuse_energy(gradient_energy(img), ft_saliency(img, blur), alpha, beta)
