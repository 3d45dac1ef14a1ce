"""Image decoding and edge extraction.

The stage turns an uploaded photo into a binary edge map: decode ->
grayscale -> Gaussian blur -> Sobel gradients -> non-maximum suppression ->
double-threshold hysteresis. Thresholds are fractions of the per-image
maximum gradient magnitude so one default works across lighting conditions.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import ImageDecodeError
from .validation import check_gray_image, check_mask, check_rgb_image

# Rec. 601 luma weights, also used to rank palette darkness in quantize.py.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = np.array([[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]])

# Offsets of the "plus" neighbor for each quantized gradient direction
# (dy, dx); the "minus" neighbor is the negation.
_DIRECTION_OFFSETS = ((0, 1), (1, 1), (1, 0), (1, -1))


def load_image(data: bytes) -> np.ndarray:
    """Decode a PNG or JPEG payload into an (h, w, 3) uint8 RGB array.

    Alpha channels are composited over white, matching the paper the
    portraits are plotted on.
    """
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise ImageDecodeError(f"cannot decode image payload: {exc}") from exc
    if img.mode != "RGB":
        rgba = img.convert("RGBA")
        background = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
        img = Image.alpha_composite(background, rgba).convert("RGB")
    return np.asarray(img, dtype=np.uint8)


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Rec. 601 luma in [0, 1]: (0.299 R + 0.587 G + 0.114 B) / 255."""
    img = check_rgb_image(img)
    r, g, b = LUMA_WEIGHTS
    channels = img.astype(np.float64)
    return (r * channels[:, :, 0] + g * channels[:, :, 1] + b * channels[:, :, 2]) / 255.0


def gaussian_sigma(kernel_size: int) -> float:
    """Blur sigma derived from the kernel size: 0.3 * ((k - 1) / 2 - 1) + 0.8."""
    return 0.3 * ((kernel_size - 1) / 2.0 - 1.0) + 0.8


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    half = size // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(ax**2) / (2.0 * sigma**2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def _validate_canny_params(kernel_size: int, low_threshold: float, high_threshold: float) -> None:
    if kernel_size < 3 or kernel_size % 2 == 0:
        raise ValueError(f"kernel_size must be odd and >= 3, got {kernel_size}")
    if not (0.0 < low_threshold < 1.0) or not (0.0 < high_threshold < 1.0):
        raise ValueError("thresholds must be fractions in (0, 1)")
    if low_threshold >= high_threshold:
        raise ValueError(
            f"low_threshold ({low_threshold}) must be below high_threshold ({high_threshold})"
        )


def _shift(arr: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Return arr shifted by (dy, dx) with zero fill, same shape."""
    padded = np.pad(arr, 1, mode="constant")
    h, w = arr.shape
    return padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]


def canny(
    gray: np.ndarray,
    kernel_size: int = 5,
    low_threshold: float = 0.10,
    high_threshold: float = 0.30,
) -> np.ndarray:
    """Canny edge detection on a [0, 1] grayscale image.

    Returns a boolean edge map of the same shape. Thresholds are fractions
    of the maximum gradient magnitude. Non-maximum suppression keeps a pixel
    only if it strictly beats its neighbor on the positive side of the
    quantized gradient direction, so symmetric two-pixel ridges thin to a
    single pixel.
    """
    gray = check_gray_image(gray)
    _validate_canny_params(kernel_size, low_threshold, high_threshold)
    h, w = gray.shape
    if h < kernel_size or w < kernel_size:
        raise ValueError(
            f"image {w}x{h} is smaller than the {kernel_size}x{kernel_size} kernel"
        )

    blurred = ndimage.convolve(gray, _gaussian_kernel(kernel_size, gaussian_sigma(kernel_size)), mode="nearest")
    gx = ndimage.correlate(blurred, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(blurred, _SOBEL_Y, mode="nearest")
    magnitude = np.hypot(gx, gy)
    max_magnitude = magnitude.max()
    # Constant images leave float cancellation residue (~1e-16) in the Sobel
    # response; anything this small on a [0, 1] image is not an edge.
    if max_magnitude <= 1e-12:
        return np.zeros_like(gray, dtype=bool)

    # Quantize gradient direction (mod 180 degrees) into 4 bins.
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    direction = np.zeros(gray.shape, dtype=np.int8)
    direction[(angle >= 22.5) & (angle < 67.5)] = 1
    direction[(angle >= 67.5) & (angle < 112.5)] = 2
    direction[(angle >= 112.5) & (angle < 157.5)] = 3

    keep = np.zeros(gray.shape, dtype=bool)
    for bin_idx, (dy, dx) in enumerate(_DIRECTION_OFFSETS):
        plus = _shift(magnitude, dy, dx)
        minus = _shift(magnitude, -dy, -dx)
        keep |= (direction == bin_idx) & (magnitude > plus) & (magnitude >= minus)
    thinned = np.where(keep, magnitude, 0.0)

    strong = thinned >= high_threshold * max_magnitude
    weak = thinned >= low_threshold * max_magnitude
    # Hysteresis: grow strong seeds through weak pixels via 8-connectivity.
    labels, count = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        return np.zeros_like(weak)
    strong_labels = np.unique(labels[strong])
    strong_labels = strong_labels[strong_labels > 0]
    return np.isin(labels, strong_labels)


def edge_map_to_png(edges: np.ndarray) -> bytes:
    """Encode an edge map as a 1-bit PNG (black edges on white)."""
    edges = check_mask(edges)
    img = Image.fromarray(np.where(edges, 0, 255).astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.convert("1", dither=Image.NONE).save(buf, format="PNG")
    return buf.getvalue()


class CannyEdgeDetector(BaseEstimator, TransformerMixin):
    """Stateless transformer from RGB or grayscale images to boolean edge maps.

    Parameters
    ----------
    kernel_size : odd int >= 3, Gaussian blur kernel size.
    low_threshold, high_threshold : hysteresis thresholds as fractions of
        the maximum gradient magnitude, 0 < low < high < 1.
    """

    def __init__(self, kernel_size: int = 5, low_threshold: float = 0.10, high_threshold: float = 0.30):
        self.kernel_size = kernel_size
        self.low_threshold = low_threshold
        self.high_threshold = high_threshold

    def fit(self, X=None, y=None):
        _validate_canny_params(self.kernel_size, self.low_threshold, self.high_threshold)
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        gray = to_grayscale(X) if X.ndim == 3 else check_gray_image(X)
        return canny(gray, self.kernel_size, self.low_threshold, self.high_threshold)
