"""Grayscale image and ROI mask loading with gray-level quantization.

Supported inputs are PGM (binary P5 or ASCII P2, single-byte samples) and
8-bit grayscale PNG. Source bytes v in [0, 255] are binned to
floor(v * levels / 256), so levels=256 keeps them untouched. Mask files
use 0 for outside the region of interest and any nonzero value for inside.
"""

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import EmptyRoiError, ImageFormatError

DEFAULT_LEVELS = 256

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """A quantized grayscale raster with an optional boolean ROI mask.

    `pixels` is a read-only (height, width) int array with every value in
    [0, levels). `mask` (when present) has the same shape; True marks
    pixels inside the region of interest. Instances are immutable and safe
    to share across workers.
    """

    pixels: np.ndarray
    levels: int
    mask: np.ndarray | None = None

    def __post_init__(self):
        pixels = np.array(self.pixels, dtype=np.int64, copy=True)
        if pixels.ndim != 2:
            raise ValueError(f"pixels must be 2-D, got shape {pixels.shape}")
        if not 2 <= self.levels <= 256:
            raise ValueError(f"levels must be in [2, 256], got {self.levels}")
        if pixels.size and (pixels.min() < 0 or pixels.max() >= self.levels):
            raise ValueError(
                f"pixel values must lie in [0, {self.levels - 1}], "
                f"found range [{pixels.min()}, {pixels.max()}]"
            )
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)
        if self.mask is not None:
            mask = np.array(self.mask, dtype=bool, copy=True)
            if mask.shape != pixels.shape:
                raise ValueError(
                    f"mask shape {mask.shape} does not match image shape {pixels.shape}"
                )
            mask.setflags(write=False)
            object.__setattr__(self, "mask", mask)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def roi(self) -> np.ndarray:
        """Boolean ROI array; all-True when the image carries no mask."""
        if self.mask is None:
            return np.ones(self.pixels.shape, dtype=bool)
        return self.mask

    def roi_count(self) -> int:
        """Number of pixels inside the region of interest."""
        if self.mask is None:
            return self.pixels.size
        return int(self.mask.sum())

    def with_mask(self, mask) -> "GrayImage":
        """Copy of this image with `mask` attached; pixel values are untouched."""
        return GrayImage(self.pixels, self.levels, mask)


def quantize(values: np.ndarray, levels: int) -> np.ndarray:
    """Bin byte values 0..255 into `levels` gray levels: floor(v * levels / 256)."""
    values = np.asarray(values, dtype=np.int64)
    return (values * levels) // 256


def _tokenize_pgm_header(data: bytes):
    """Yield whitespace-separated header tokens, skipping '#' comments.

    Returns (tokens, offset) where offset is the index one byte past the
    whitespace that terminates the last consumed token.
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < 4 and pos < n:
        c = data[pos:pos + 1]
        if c in b" \t\r\n\f\v":
            pos += 1
            continue
        if c == b"#":
            end = data.find(b"\n", pos)
            pos = n if end < 0 else end + 1
            continue
        start = pos
        while pos < n and data[pos:pos + 1] not in b" \t\r\n\f\v":
            pos += 1
        tokens.append(data[start:pos])
        if len(tokens) == 4:
            pos += 1  # single whitespace byte separates maxval from raster
    return tokens, pos


def _parse_pgm(data: bytes, path) -> np.ndarray:
    magic = data[:2]
    tokens, offset = _tokenize_pgm_header(data)
    if len(tokens) < 4:
        raise ImageFormatError(f"{path}: truncated PGM header")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError:
        raise ImageFormatError(
            f"{path}: non-numeric PGM header fields {tokens[1:4]}"
        ) from None
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"{path}: bad PGM dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise ImageFormatError(
            f"{path}: unsupported bit depth: maxval {maxval} exceeds 255"
        )
    count = width * height
    if magic == b"P5":
        raster = data[offset:offset + count]
        if len(raster) < count:
            raise ImageFormatError(
                f"{path}: raster holds {len(raster)} bytes, expected {count}"
            )
        values = np.frombuffer(raster, dtype=np.uint8).astype(np.int64)
    else:  # P2
        samples = data[offset:].split()
        if len(samples) < count:
            raise ImageFormatError(
                f"{path}: raster holds {len(samples)} samples, expected {count}"
            )
        try:
            values = np.array([int(s) for s in samples[:count]], dtype=np.int64)
        except ValueError:
            raise ImageFormatError(f"{path}: non-numeric PGM sample") from None
    if values.max(initial=0) > maxval:
        raise ImageFormatError(
            f"{path}: sample value {values.max()} exceeds maxval {maxval}"
        )
    return values.reshape(height, width)


def _parse_png(data: bytes, path) -> np.ndarray:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except UnidentifiedImageError:
        raise ImageFormatError(f"{path}: not a decodable PNG") from None
    if img.mode != "L":
        raise ImageFormatError(
            f"{path}: unsupported PNG mode {img.mode!r}, expected 8-bit grayscale 'L'"
        )
    return np.asarray(img, dtype=np.int64)


def read_gray_bytes(path) -> np.ndarray:
    """Read a PGM/PNG file into a (height, width) array of raw byte values."""
    data = Path(path).read_bytes()
    if data[:2] in (b"P2", b"P5"):
        return _parse_pgm(data, path)
    if data[:8] == _PNG_MAGIC:
        return _parse_png(data, path)
    raise ImageFormatError(
        f"{path}: unsupported format magic {data[:2]!r}, expected P2/P5 PGM or PNG"
    )


def load_image(path, levels: int = DEFAULT_LEVELS) -> GrayImage:
    """Load a grayscale image and quantize it to `levels` gray levels.

    Each source byte v becomes floor(v * levels / 256). The returned image
    carries no mask; attach one with `load_mask`.
    """
    if not 2 <= levels <= 256:
        raise ValueError(f"levels must be in [2, 256], got {levels}")
    return GrayImage(quantize(read_gray_bytes(path), levels), levels)


def load_mask(path, image: GrayImage) -> GrayImage:
    """Attach the ROI mask stored at `path` to `image`.

    In the mask file 0 means outside the ROI and any nonzero value means
    inside. The mask must match the image dimensions and select at least
    one pixel.
    """
    raw = read_gray_bytes(path)
    if raw.shape != image.pixels.shape:
        raise ValueError(
            f"mask {path} is {raw.shape[1]}x{raw.shape[0]} but image is "
            f"{image.width}x{image.height}"
        )
    mask = raw != 0
    if not mask.any():
        raise EmptyRoiError(f"empty ROI: mask {path} selects no pixel")
    return image.with_mask(mask)


def write_pgm(values, path, comment: str | None = None) -> None:
    """Write a (height, width) array of byte values 0..255 as binary P5 PGM."""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise ValueError("PGM sample values must lie in [0, 255]")
    header = ["P5"]
    if comment:
        header.append(f"# {comment}")
    header.append(f"{arr.shape[1]} {arr.shape[0]}")
    header.append("255")
    payload = "\n".join(header).encode("ascii") + b"\n"
    payload += arr.astype(np.uint8).tobytes()
    Path(path).write_bytes(payload)
