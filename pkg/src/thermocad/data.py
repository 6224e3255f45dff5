"""Labeled texture feature vectors and the datasets built from them."""

from dataclasses import dataclass

import numpy as np

NORMAL = "normal"
FINDING = "finding"
LABELS = (NORMAL, FINDING)

# Numeric columns of a feature vector, in their fixed order.
FEATURE_NAMES = (
    "m1", "m3",
    "gln_0", "gln_45", "gln_90", "gln_135",
    "rp_0", "rp_45", "rp_90", "rp_135",
)


@dataclass(frozen=True)
class FeatureVector:
    """Ten texture statistics of one image plus its sample id and class label.

    m1/m3 are the first and third co-occurrence moments; gln_* and rp_*
    are gray-level non-uniformity and run percentage along the four scan
    directions (degrees).
    """

    id: str
    m1: float
    m3: float
    gln_0: float
    gln_45: float
    gln_90: float
    gln_135: float
    rp_0: float
    rp_45: float
    rp_90: float
    rp_135: float
    label: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(
                f"unknown label {self.label!r} for sample {self.id!r}; "
                f"expected one of {LABELS}"
            )

    def values(self) -> np.ndarray:
        """The ten numeric features as a float64 vector, in declared order."""
        return np.array(
            [getattr(self, name) for name in FEATURE_NAMES], dtype=np.float64
        )


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of feature vectors with unique sample ids."""

    samples: tuple

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        seen = set()
        for s in self.samples:
            if s.id in seen:
                raise ValueError(f"duplicate sample id {s.id!r}")
            seen.add(s.id)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def feature_matrix(self) -> np.ndarray:
        """(n_samples, 10) float64 matrix in sample order."""
        if not self.samples:
            return np.empty((0, len(FEATURE_NAMES)))
        return np.stack([s.values() for s in self.samples])

    def labels(self) -> list:
        return [s.label for s in self.samples]

    def signs(self) -> np.ndarray:
        """+1 for the positive class (finding), -1 for normal."""
        return np.array(
            [1.0 if s.label == FINDING else -1.0 for s in self.samples]
        )

    def class_counts(self) -> dict:
        counts = {NORMAL: 0, FINDING: 0}
        for s in self.samples:
            counts[s.label] += 1
        return counts

    def subset(self, indices) -> "Dataset":
        return Dataset(tuple(self.samples[i] for i in indices))
