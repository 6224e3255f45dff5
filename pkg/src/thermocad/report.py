"""Feature-table persistence and comparison-table rendering.

Feature vectors round-trip through a fixed-header CSV. Comparison tables
list evaluation runs sorted by accuracy and can append reference rows of
published results: the four classifier benchmarks reported on the same
102-image thermogram set, and eight cross-study rows from the
literature. Published cells are kept verbatim, including their original
rounding; note that the published SMO result appears in both groups with
slightly different sensitivity figures (62.9% vs 61.72%), an
inconsistency in the source material that is preserved as printed.
"""

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

from .data import LABELS, FeatureVector, Dataset, FEATURE_NAMES
from .evaluation import EvalReport

FEATURE_HEADER = ("id",) + FEATURE_NAMES + ("label",)

COMPARISON_COLUMNS = (
    "name", "samples", "healthy", "unhealthy", "accuracy", "precision",
    "sensitivity", "specificity", "youden", "auc", "test_mode", "source",
)


@dataclass(frozen=True)
class FeatureTable:
    """Feature vectors under the fixed CSV schema, one row per sample."""

    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))

    def __len__(self) -> int:
        return len(self.rows)

    def to_dataset(self) -> Dataset:
        return Dataset(self.rows)


def write_features(table: FeatureTable, path) -> None:
    """Write the feature table as UTF-8 CSV with LF newlines.

    Floats are written with repr(), which preserves every value exactly
    on read-back (shortest round-trip representation, up to 17
    significant digits).
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FEATURE_HEADER)
    for fv in table.rows:
        writer.writerow(
            [fv.id] + [repr(float(getattr(fv, n))) for n in FEATURE_NAMES] + [fv.label]
        )
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_features(path) -> FeatureTable:
    """Read a feature CSV, validating header, numeric cells and labels."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise ValueError(f"{path}: empty feature file") from None
        if header != FEATURE_HEADER:
            raise ValueError(
                f"{path}: header mismatch; expected {list(FEATURE_HEADER)}, "
                f"found {list(header)}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(FEATURE_HEADER):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(FEATURE_HEADER)} cells, "
                    f"got {len(row)}"
                )
            values = {}
            for col, cell in zip(FEATURE_NAMES, row[1:-1]):
                try:
                    value = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: non-numeric cell {cell!r} in column {col}"
                    ) from None
                if not math.isfinite(value):
                    raise ValueError(
                        f"{path}:{lineno}: non-finite value {cell!r} in column {col}"
                    )
                values[col] = value
            label = row[-1]
            if label not in LABELS:
                raise ValueError(
                    f"{path}:{lineno}: unknown label {label!r}; expected one of {LABELS}"
                )
            rows.append(FeatureVector(id=row[0], label=label, **values))
    return FeatureTable(tuple(rows))


@dataclass(frozen=True)
class ReferenceRow:
    """One published result, cells stored verbatim as printed.

    Percent cells parse with `pct()`; "-" marks a value the source did
    not report and parses to None.
    """

    name: str
    samples: str
    accuracy: str
    sensitivity: str
    specificity: str
    youden: str
    test_mode: str
    note: str
    group: str  # "classifier" | "literature"

    @staticmethod
    def _parse(cell: str):
        if cell == "-":
            return None
        return float(cell.rstrip("%")) / 100.0 if cell.endswith("%") else float(cell)

    def accuracy_value(self):
        return self._parse(self.accuracy)

    def sensitivity_value(self):
        return self._parse(self.sensitivity)

    def specificity_value(self):
        return self._parse(self.specificity)

    def youden_value(self):
        return self._parse(self.youden)


#: Published benchmark of four classifiers on the 102-image (54 healthy /
#: 48 with findings) thermogram set this pipeline targets.
REFERENCE_CLASSIFIER_ROWS = (
    ReferenceRow(
        "SMO", "102 (54/48)", "61.8%", "62.9%", "61.8%", "0.24",
        "7-fold cross validation",
        "C: 1.0, Kernel: Polykernel, regOptimizer: regSMO", "classifier",
    ),
    ReferenceRow(
        "RBFNetwork", "102 (54/48)", "58.5%", "60%", "58.8%", "0.18",
        "leave one out",
        "minStdDev: 0.27, numClusters: 1", "classifier",
    ),
    ReferenceRow(
        "NaiveBayes", "102 (54/48)", "56.8%", "56.8%", "56.9%", "0.12",
        "7-fold cross validation",
        "Standard Parameters", "classifier",
    ),
    ReferenceRow(
        "SVM", "102 (54/48)", "53.9%", "50%", "57.4%", "0.07",
        "leave one out",
        "Svm: NU, Kernel: RBF, Gamma: 0.00015, NU: 0.09", "classifier",
    ),
)

#: Published cross-study comparison rows; sample counts read
#: "total (healthy/unhealthy)".
REFERENCE_LITERATURE_ROWS = (
    ReferenceRow(
        "Arora et al. (2008)", "94 (34/60)", "-", "97%", "44%", "0.41",
        "", "", "literature",
    ),
    ReferenceRow(
        "Wishart et al. (2010)", "106 (41/65)", "-", "48%", "70%", "0.18",
        "", "", "literature",
    ),
    ReferenceRow(
        "Umadevi et al. (2010)", "50 (44/6)", "-", "66.7%", "97.7%", "0.64",
        "", "", "literature",
    ),
    ReferenceRow(
        "Acharya et al. (2012)", "50 (25/25)", "88.1%", "85.7%", "90.5%", "0.76",
        "", "", "literature",
    ),
    ReferenceRow(
        "Brochatt (2012)", "51 (14/37)", "76.5%", "83.8%", "57.1%", "0.41",
        "", "original work", "literature",
    ),
    ReferenceRow(
        "Brochatt (2012)", "51 (14/37)", "82.4%", "83.8%", "78.6%", "0.62",
        "", "Moran Index", "literature",
    ),
    ReferenceRow(
        "Brochatt (2012)", "51 (14/37)", "88.2%", "91.9%", "78.6%", "0.71",
        "", "Optimized version", "literature",
    ),
    ReferenceRow(
        "This work (SMO Result)", "102 (54/48)", "61.8%", "61.72%", "62.9%", "0.24",
        "", "", "literature",
    ),
)


def _fmt_pct(value) -> str:
    return "-" if value is None else f"{value * 100:.1f}%"


def _fmt_youden(value) -> str:
    return "-" if value is None else f"{value:.2f}"


def _our_row_dict(name: str, rep: EvalReport) -> dict:
    return {
        "name": name,
        "samples": rep.pooled.total(),
        "healthy": rep.healthy_count(),
        "unhealthy": rep.unhealthy_count(),
        "accuracy": rep.accuracy,
        "precision": rep.precision,
        "sensitivity": rep.sensitivity,
        "specificity": rep.specificity,
        "youden": rep.youden,
        "auc": rep.auc,
        "test_mode": rep.test_mode,
        "source": "this run",
    }


def _reference_row_dict(row: ReferenceRow) -> dict:
    return {
        "name": row.name if not row.note else f"{row.name} [{row.note}]",
        "samples": row.samples,
        "healthy": None,
        "unhealthy": None,
        "accuracy": row.accuracy_value(),
        "precision": None,
        "sensitivity": row.sensitivity_value(),
        "specificity": row.specificity_value(),
        "youden": row.youden_value(),
        "auc": None,
        "test_mode": row.test_mode,
        "source": "published",
    }


def render_comparison(our, include_reference: bool = False):
    """Build the classifier comparison table.

    `our` is a list of (name, EvalReport) pairs; rows are sorted by
    accuracy descending with ties broken by name. When
    `include_reference` is set, the published rows are appended after the
    computed ones, in their original order, marked "published" and with
    their cells rendered verbatim. Returns (text table, list of row
    dicts).
    """
    if not our and not include_reference:
        raise ValueError("nothing to render: no reports and no reference rows")
    ours = sorted(our, key=lambda item: (-item[1].accuracy, item[0]))

    header = ("Classifier", "Samples", "Accuracy", "Sens.", "Spec.",
              "Youden", "Test mode", "Source")
    cells = []
    rows = []
    for name, rep in ours:
        rows.append(_our_row_dict(name, rep))
        cells.append((
            name,
            f"{rep.pooled.total()} ({rep.healthy_count()}/{rep.unhealthy_count()})",
            _fmt_pct(rep.accuracy),
            _fmt_pct(rep.sensitivity),
            _fmt_pct(rep.specificity),
            _fmt_youden(rep.youden),
            rep.test_mode,
            "this run",
        ))
    if include_reference:
        for row in REFERENCE_CLASSIFIER_ROWS + REFERENCE_LITERATURE_ROWS:
            rows.append(_reference_row_dict(row))
            cells.append((
                row.name if not row.note else f"{row.name} [{row.note}]",
                row.samples,
                row.accuracy,
                row.sensitivity,
                row.specificity,
                row.youden,
                row.test_mode,
                "published",
            ))

    widths = [
        max(len(header[c]), *(len(r[c]) for r in cells)) if cells else len(header[c])
        for c in range(len(header))
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for r in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n", rows


def rows_to_csv(rows) -> str:
    """Comparison rows as CSV under COMPARISON_COLUMNS; None becomes ''."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COMPARISON_COLUMNS)
    for row in rows:
        writer.writerow(
            ["" if row[c] is None else row[c] for c in COMPARISON_COLUMNS]
        )
    return buf.getvalue()


def report_csv_row(name: str, rep: EvalReport) -> str:
    """One evaluation serialized as a header plus single CSV row."""
    return rows_to_csv([_our_row_dict(name, rep)])
