"""Co-occurrence and run-length texture statistics.

Five statistics are computed from a quantized grayscale image: the first
and third moments of the directional co-occurrence probability matrix,
plus gray-level non-uniformity and run percentage of the run-length
matrix along each of the four scan directions (0, 45, 90, 135 degrees).
Together they form the fixed 10-element feature vector this pipeline
classifies.

All statistics respect an optional ROI mask: a co-occurring pair counts
only when both endpoints are inside the ROI, runs break at ROI
boundaries, and the run-percentage area is the in-ROI pixel count.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .data import NORMAL, FeatureVector
from .errors import EmptyPairsError, EmptyRoiError, NormalizationError
from .imgio import GrayImage


class Offset(NamedTuple):
    """Displacement to the co-occurring partner pixel: dx columns, dy rows."""

    dx: int
    dy: int


#: Default partner displacement: same column, next row.
DEFAULT_OFFSET = Offset(0, 1)

#: Legal run-length scan directions, in degrees.
DIRECTIONS = (0, 45, 90, 135)


@dataclass(frozen=True, eq=False)
class CooccurrenceMatrix:
    """Directional gray-level co-occurrence counts for one offset.

    counts[i, j] is the number of pixel positions whose gray value is i
    and whose partner pixel (one offset away, in bounds, inside the ROI)
    has gray value j. The matrix is not symmetrized.
    """

    counts: np.ndarray
    levels: int
    offset: Offset

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if counts.shape != (self.levels, self.levels):
            raise ValueError(
                f"counts shape {counts.shape} does not match levels {self.levels}"
            )
        if counts.size and counts.min() < 0:
            raise ValueError("co-occurrence counts must be nonnegative")
        if tuple(self.offset) == (0, 0):
            raise ValueError("offset (0, 0) is not a displacement")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "offset", Offset(*self.offset))

    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True, eq=False)
class ProbabilityMatrix:
    """Co-occurrence counts normalized into a joint probability table."""

    probs: np.ndarray
    levels: int

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64, copy=True)
        if probs.shape != (self.levels, self.levels):
            raise ValueError(
                f"probs shape {probs.shape} does not match levels {self.levels}"
            )
        if probs.size and probs.min() < 0:
            raise ValueError("probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, expected 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True, eq=False)
class RunLengthMatrix:
    """Counts of maximal constant-gray runs along one scan direction.

    counts[i, l] is the number of maximal runs of gray level i with exact
    length l (column 0 is unused and always zero). n_pixels is the number
    of in-ROI pixels scanned, i.e. the area used by run percentage. Every
    in-ROI pixel belongs to exactly one maximal run, so
    sum(l * counts[i, l]) == n_pixels.
    """

    counts: np.ndarray
    levels: int
    max_len: int
    direction: int
    n_pixels: int

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if counts.shape != (self.levels, self.max_len + 1):
            raise ValueError(
                f"counts shape {counts.shape} does not match "
                f"(levels, max_len + 1) = ({self.levels}, {self.max_len + 1})"
            )
        if counts.size and counts.min() < 0:
            raise ValueError("run counts must be nonnegative")
        if self.direction not in DIRECTIONS:
            raise ValueError(
                f"direction must be one of {DIRECTIONS}, got {self.direction}"
            )
        lengths = np.arange(self.max_len + 1, dtype=np.int64)
        covered = int((counts * lengths).sum())
        if covered != self.n_pixels:
            raise ValueError(
                f"runs cover {covered} pixels but n_pixels is {self.n_pixels}"
            )
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def total_runs(self) -> int:
        return int(self.counts.sum())


def cooccurrence(image: GrayImage, offset: Offset = DEFAULT_OFFSET) -> CooccurrenceMatrix:
    """Count gray-level pairs (V(x, y), V(x+dx, y+dy)) over the image.

    Partner positions outside the image border are skipped, and when the
    image is masked a pair counts only if both endpoints are inside the
    ROI. Raises EmptyPairsError when no valid pair exists.
    """
    offset = Offset(*offset)
    if offset == (0, 0):
        raise ValueError("offset (0, 0) is not a displacement")
    dx, dy = offset.dx, offset.dy
    h, w = image.pixels.shape
    levels = image.levels
    counts = np.zeros((levels, levels), dtype=np.int64)

    sy0, sy1 = max(0, -dy), h - max(0, dy)
    sx0, sx1 = max(0, -dx), w - max(0, dx)
    if sy0 < sy1 and sx0 < sx1:
        src = image.pixels[sy0:sy1, sx0:sx1]
        dst = image.pixels[sy0 + dy:sy1 + dy, sx0 + dx:sx1 + dx]
        roi = image.roi()
        valid = roi[sy0:sy1, sx0:sx1] & roi[sy0 + dy:sy1 + dy, sx0 + dx:sx1 + dx]
        codes = src[valid] * levels + dst[valid]
        counts = np.bincount(codes, minlength=levels * levels)
        counts = counts.reshape(levels, levels).astype(np.int64)

    if counts.sum() == 0:
        raise EmptyPairsError(
            f"no valid pixel pair for offset ({dx}, {dy}) "
            f"on a {w}x{h} image with {image.roi_count()} ROI pixels"
        )
    return CooccurrenceMatrix(counts, levels, offset)


def normalize_cooccurrence(cm: CooccurrenceMatrix) -> ProbabilityMatrix:
    """Divide every co-occurrence count by the total count."""
    total = cm.total()
    if total == 0:
        raise NormalizationError("cannot normalize an all-zero co-occurrence matrix")
    return ProbabilityMatrix(cm.counts / total, cm.levels)


def moment(pm: ProbabilityMatrix, g: int) -> float:
    """Signed moment of degree g: sum of P(i, j) * (i - j)**g."""
    if g < 1:
        raise ValueError(f"moment degree must be >= 1, got {g}")
    i = np.arange(pm.levels, dtype=np.float64)
    diff = i[:, None] - i[None, :]
    return float((pm.probs * diff**g).sum())


def _scan_lines(image: GrayImage, direction: int):
    """Yield (values, roi) 1-D views for every scan line of a direction.

    0 degrees scans rows, 90 scans columns, 45 the up-right anti-diagonal
    family and 135 the up-left main-diagonal family. Run structure does
    not depend on traversal orientation within a line.
    """
    pixels, roi = image.pixels, image.roi()
    h, w = pixels.shape
    if direction == 0:
        for y in range(h):
            yield pixels[y, :], roi[y, :]
    elif direction == 90:
        for x in range(w):
            yield pixels[:, x], roi[:, x]
    elif direction == 45:
        flipped, froi = np.fliplr(pixels), np.fliplr(roi)
        for k in range(-(h - 1), w):
            yield np.diagonal(flipped, k), np.diagonal(froi, k)
    elif direction == 135:
        for k in range(-(h - 1), w):
            yield np.diagonal(pixels, k), np.diagonal(roi, k)
    else:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction}")


def _max_run_length(image: GrayImage, direction: int) -> int:
    if direction == 0:
        return image.width
    if direction == 90:
        return image.height
    return min(image.width, image.height)


def _accumulate_runs(counts: np.ndarray, values: np.ndarray, roi: np.ndarray):
    """Add the maximal runs of one scan line to the count table in place.

    Runs break wherever the ROI flag drops or the gray value changes;
    out-of-ROI pixels belong to no run.
    """
    idx = np.flatnonzero(roi)
    if idx.size == 0:
        return
    vals = values[idx]
    new_run = np.empty(idx.size, dtype=bool)
    new_run[0] = True
    if idx.size > 1:
        new_run[1:] = (np.diff(idx) != 1) | (vals[1:] != vals[:-1])
    starts = np.flatnonzero(new_run)
    lengths = np.diff(np.append(starts, idx.size))
    np.add.at(counts, (vals[starts], lengths), 1)


def run_length_matrix(image: GrayImage, direction: int) -> RunLengthMatrix:
    """Count maximal constant-gray runs along one scan direction.

    Raises EmptyRoiError when the mask leaves nothing to scan.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction}")
    n_pixels = image.roi_count()
    if n_pixels == 0:
        raise EmptyRoiError(
            f"no runs: empty ROI on a {image.width}x{image.height} image"
        )
    max_len = _max_run_length(image, direction)
    counts = np.zeros((image.levels, max_len + 1), dtype=np.int64)
    for values, roi in _scan_lines(image, direction):
        _accumulate_runs(counts, values, roi)
    return RunLengthMatrix(counts, image.levels, max_len, direction, n_pixels)


def gray_level_non_uniformity(rlm: RunLengthMatrix) -> float:
    """Squared per-gray-level run totals over the overall run total."""
    per_level = rlm.counts.sum(axis=1, dtype=np.float64)
    total = per_level.sum()
    if total == 0:
        raise EmptyRoiError("no runs: cannot compute gray-level non-uniformity")
    return float((per_level**2).sum() / total)


def run_percentage(rlm: RunLengthMatrix) -> float:
    """Total number of runs divided by the scanned in-ROI area."""
    if rlm.n_pixels == 0:
        raise EmptyRoiError("no pixels scanned: cannot compute run percentage")
    return rlm.total_runs() / rlm.n_pixels


def extract_features(
    image: GrayImage,
    offset: Offset = DEFAULT_OFFSET,
    sample_id: str = "",
    label: str = NORMAL,
) -> FeatureVector:
    """Assemble the 10-element texture descriptor of one image.

    m1 and m3 come from the probability matrix of the single `offset`;
    gray-level non-uniformity and run percentage are computed for all four
    scan directions. Empty-ROI and empty-pair failures are re-raised with
    the sample id attached.
    """
    try:
        if image.roi_count() == 0:
            raise EmptyRoiError(
                f"empty ROI on a {image.width}x{image.height} image"
            )
        pm = normalize_cooccurrence(cooccurrence(image, offset))
        m1 = moment(pm, 1)
        m3 = moment(pm, 3)
        gln = {}
        rp = {}
        for theta in DIRECTIONS:
            rlm = run_length_matrix(image, theta)
            gln[theta] = gray_level_non_uniformity(rlm)
            rp[theta] = run_percentage(rlm)
    except (EmptyRoiError, EmptyPairsError, NormalizationError) as exc:
        raise type(exc)(f"sample {sample_id!r}: {exc}") from exc
    return FeatureVector(
        id=sample_id,
        m1=m1,
        m3=m3,
        gln_0=gln[0],
        gln_45=gln[45],
        gln_90=gln[90],
        gln_135=gln[135],
        rp_0=rp[0],
        rp_45=rp[45],
        rp_90=rp[90],
        rp_135=rp[135],
        label=label,
    )
