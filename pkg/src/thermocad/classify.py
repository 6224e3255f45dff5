"""Binary classifiers: an SMO-trained soft-margin SVM and Gaussian naive Bayes.

The SVM dual is solved by sequential minimal optimization with
maximal-violating-pair working-set selection: each step solves the
two-multiplier subproblem analytically and the loop stops once the
largest KKT violation falls below the tolerance. Features are rescaled
to [0, 1] with parameters fitted on the training data only.

"finding" is the positive class throughout; a decision score of exactly
zero classifies as "normal".
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import FINDING, NORMAL, FEATURE_NAMES, Dataset, FeatureVector
from .errors import ConvergenceError

MODEL_FORMAT = "thermocad-model"
MODEL_VERSION = 1

#: Multipliers within this fraction of C of a bound snap exactly onto it,
#: so corner-clipping rounding residue cannot trap the pair selection.
_ALPHA_SNAP = 1e-12
#: Floor for the two-multiplier quadratic coefficient (degenerate pairs).
_ETA_FLOOR = 1e-12


@dataclass(frozen=True)
class KernelConfig:
    """Kernel choice: 'poly' K(u,v) = (u.v)**degree or 'rbf' with gamma."""

    kind: str = "poly"
    degree: int = 1
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("poly", "rbf"):
            raise ValueError(f"kernel kind must be 'poly' or 'rbf', got {self.kind!r}")
        if self.kind == "poly" and self.degree < 1:
            raise ValueError(f"polynomial degree must be >= 1, got {self.degree}")
        if self.kind == "rbf" and not self.gamma > 0:
            raise ValueError(f"rbf gamma must be positive, got {self.gamma}")


def kernel_matrix(config: KernelConfig, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gram matrix K[s, t] = K(a[s], b[t]) for row-vector sample matrices."""
    if config.kind == "poly":
        return (a @ b.T) ** config.degree
    sq = (
        (a**2).sum(axis=1)[:, None]
        + (b**2).sum(axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.exp(-config.gamma * np.maximum(sq, 0.0))


@dataclass(frozen=True)
class FeatureScaler:
    """Per-feature affine map to [0, 1] fitted on training data.

    Constant features map to 0. Out-of-range values at prediction time are
    extrapolated linearly, not clipped.
    """

    low: np.ndarray
    span: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "FeatureScaler":
        low = x.min(axis=0)
        span = x.max(axis=0) - low
        span = np.where(span > 0, span, 1.0)
        return cls(low, span)

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.low) / self.span


@dataclass(frozen=True)
class SmoTrace:
    """Training diagnostics kept out of serialized models.

    dual_path holds the dual objective after every accepted update;
    alphas holds the final multipliers for the full training set in
    training order.
    """

    dual_path: np.ndarray
    alphas: np.ndarray
    n_iter: int
    final_violation: float


@dataclass(frozen=True, eq=False)
class SvmModel:
    """Trained soft-margin SVM: support vectors, dual coefficients, bias.

    dual_coefs[s] is alpha_s * y_s for support vector s (nonzero by
    construction). Support vectors are stored unscaled; `scaler` is
    applied before every kernel evaluation.
    """

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    kernel: KernelConfig
    c: float
    scaler: FeatureScaler
    trace: SmoTrace | None = field(default=None, compare=False)

    def decision_value(self, features: np.ndarray) -> float:
        """Raw decision score for one unscaled 10-feature vector."""
        x = np.asarray(features, dtype=np.float64)
        if x.shape != (self.support_vectors.shape[1],):
            raise ValueError(
                f"expected {self.support_vectors.shape[1]} features, got shape {x.shape}"
            )
        sv = self.scaler.transform(self.support_vectors)
        k = kernel_matrix(self.kernel, sv, self.scaler.transform(x[None, :]))
        return float(self.dual_coefs @ k[:, 0] + self.bias)


def _check_binary_training_set(ds: Dataset, what: str):
    counts = ds.class_counts()
    if counts[NORMAL] == 0 or counts[FINDING] == 0:
        raise ValueError(
            f"{what} requires samples of both classes, got "
            f"{counts[NORMAL]} normal / {counts[FINDING]} finding"
        )
    for s in ds:
        if not np.isfinite(s.values()).all():
            raise ValueError(f"sample {s.id!r} has non-finite feature values")


def train_smo(
    train: Dataset,
    c: float = 1.0,
    kernel: KernelConfig = KernelConfig(),
    tol: float = 1e-3,
    seed: int = 1,
    max_iter: int | None = None,
) -> SvmModel:
    """Fit the soft-margin SVM dual by sequential minimal optimization.

    At each step the maximal-violating pair of multipliers is optimized
    analytically; training stops when the largest KKT violation is at
    most `tol`. The dual objective is checked to be non-decreasing across
    accepted updates and its path is kept on the returned model's trace.

    `seed` is accepted for interface uniformity; maximal-violating-pair
    selection is deterministic and uses no randomness.
    """
    del seed
    if not c > 0:
        raise ValueError(f"box constraint c must be positive, got {c}")
    if not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    _check_binary_training_set(train, "SVM training")

    x_raw = train.feature_matrix()
    y = train.signs()
    n = len(y)
    scaler = FeatureScaler.fit(x_raw)
    x = scaler.transform(x_raw)
    k = kernel_matrix(kernel, x, x)

    alpha = np.zeros(n)
    f = np.zeros(n)  # f[t] = sum_s alpha[s] y[s] K[s, t], bias excluded
    dual = 0.0
    dual_path = []
    if max_iter is None:
        max_iter = max(100_000, 1_000 * n)

    violation = math.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        g = y - f
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        i = int(np.argmax(np.where(up, g, -np.inf)))
        j = int(np.argmin(np.where(low, g, np.inf)))
        m_up, m_low = g[i], g[j]
        violation = m_up - m_low
        if violation <= tol:
            break

        eta = k[i, i] + k[j, j] - 2.0 * k[i, j]
        if eta < _ETA_FLOOR:
            eta = _ETA_FLOOR
        ai_old, aj_old = alpha[i], alpha[j]
        if y[i] != y[j]:
            lo = max(0.0, aj_old - ai_old)
            hi = min(c, c + aj_old - ai_old)
        else:
            lo = max(0.0, ai_old + aj_old - c)
            hi = min(c, ai_old + aj_old)
        aj = aj_old + y[j] * (g[j] - g[i]) / eta
        aj = min(max(aj, lo), hi)
        if aj == aj_old:
            raise ConvergenceError(
                f"SMO stalled on pair ({i}, {j}) with violation {violation:.3g}"
            )
        ai = ai_old + y[i] * y[j] * (aj_old - aj)
        ai = min(max(ai, 0.0), c)

        f = f + (ai - ai_old) * y[i] * k[i] + (aj - aj_old) * y[j] * k[j]
        alpha[i], alpha[j] = ai, aj
        new_dual = alpha.sum() - 0.5 * float((alpha * y) @ f)
        if new_dual < dual - 1e-9 * (1.0 + abs(dual)):
            raise ConvergenceError(
                f"dual objective decreased from {dual!r} to {new_dual!r} "
                f"at iteration {iterations}"
            )
        dual = new_dual
        dual_path.append(dual)
    else:
        raise ConvergenceError(
            f"SMO did not converge within {max_iter} iterations "
            f"(violation {violation:.3g} > tol {tol:.3g})"
        )

    bias = (m_up + m_low) / 2.0

    # Snap near-bound multipliers before extracting the support vectors.
    alpha[alpha < _ALPHA_SNAP * c] = 0.0
    alpha[alpha > (1.0 - _ALPHA_SNAP) * c] = c
    sv = alpha > 0
    return SvmModel(
        support_vectors=x_raw[sv].copy(),
        dual_coefs=alpha[sv] * y[sv],
        bias=bias,
        kernel=kernel,
        c=c,
        scaler=scaler,
        trace=SmoTrace(
            dual_path=np.array(dual_path),
            alphas=alpha.copy(),
            n_iter=iterations,
            final_violation=violation,
        ),
    )


def predict_svm(model: SvmModel, x: FeatureVector) -> tuple:
    """Classify one sample; returns (label, decision score).

    The score is sum_s dual_coefs[s] K(sv_s, x) + bias in the scaled
    feature space; zero ties break toward "normal".
    """
    score = model.decision_value(x.values())
    return (FINDING if score > 0 else NORMAL), score


def kkt_violations(model: SvmModel, train: Dataset) -> np.ndarray:
    """Per-sample KKT violation magnitudes on the model's training set.

    `train` must be the dataset the model was fitted on, in the same
    order; the multipliers come from the training trace. For margin
    r = y * decision - 1 the violation is max(0, -r) while the multiplier
    may still grow (alpha < C) and max(0, r) while it may still shrink
    (alpha > 0); free multipliers therefore require |r| itself.
    """
    if model.trace is None:
        raise ValueError("model has no training trace (was it deserialized?)")
    alphas = model.trace.alphas
    if alphas.shape[0] != len(train):
        raise ValueError(
            f"trace holds {alphas.shape[0]} multipliers but dataset has "
            f"{len(train)} samples"
        )
    sv_scaled = model.scaler.transform(model.support_vectors)
    x_scaled = model.scaler.transform(train.feature_matrix())
    scores = kernel_matrix(model.kernel, x_scaled, sv_scaled) @ model.dual_coefs
    scores += model.bias
    r = train.signs() * scores - 1.0

    viol = np.zeros(len(train))
    can_grow = alphas < model.c
    can_shrink = alphas > 0
    viol[can_grow] = np.maximum(viol[can_grow], -r[can_grow])
    viol[can_shrink] = np.maximum(viol[can_shrink], r[can_shrink])
    return np.maximum(viol, 0.0)


@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    """Gaussian naive Bayes: class priors plus per-feature mean/variance."""

    priors: dict
    means: dict
    variances: dict

    def __post_init__(self):
        total = sum(self.priors.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"class priors sum to {total!r}, expected 1")


def train_naive_bayes(train: Dataset) -> NaiveBayesModel:
    """Estimate Gaussian class-conditional densities with frequency priors.

    Per-feature sample variances are floored at 1e-9 times the squared
    training-set feature range so constant features stay usable. Each
    class needs at least two samples.
    """
    _check_binary_training_set(train, "naive Bayes training")
    x = train.feature_matrix()
    labels = np.array(train.labels())
    span = x.max(axis=0) - x.min(axis=0)
    floor = 1e-9 * np.where(span > 0, span, 1.0) ** 2

    priors, means, variances = {}, {}, {}
    for cls in (NORMAL, FINDING):
        rows = x[labels == cls]
        if rows.shape[0] < 2:
            raise ValueError(
                f"class {cls!r} has {rows.shape[0]} sample(s); "
                "at least 2 are needed to estimate variances"
            )
        priors[cls] = rows.shape[0] / x.shape[0]
        means[cls] = rows.mean(axis=0)
        variances[cls] = np.maximum(rows.var(axis=0, ddof=1), floor)
    return NaiveBayesModel(priors, means, variances)


def _log_likelihood(model: NaiveBayesModel, cls: str, x: np.ndarray) -> float:
    mean, var = model.means[cls], model.variances[cls]
    return float(
        (-0.5 * (np.log(2.0 * np.pi * var) + (x - mean) ** 2 / var)).sum()
    )


def predict_naive_bayes(model: NaiveBayesModel, x: FeatureVector) -> tuple:
    """Classify one sample; returns (label, posterior dict over both classes).

    Posteriors are computed in log space and normalized to sum to 1; an
    exact tie classifies as "normal".
    """
    values = x.values()
    log_post = {
        cls: math.log(model.priors[cls]) + _log_likelihood(model, cls, values)
        for cls in (NORMAL, FINDING)
    }
    shift = max(log_post.values())
    weights = {cls: math.exp(lp - shift) for cls, lp in log_post.items()}
    total = sum(weights.values())
    posteriors = {cls: w / total for cls, w in weights.items()}
    label = FINDING if posteriors[FINDING] > posteriors[NORMAL] else NORMAL
    return label, posteriors


@dataclass(frozen=True)
class ClassifierConfig:
    """A named, trainable classifier configuration for evaluation runs."""

    kind: str  # "smo" | "nb"
    name: str = ""
    c: float = 1.0
    kernel: KernelConfig = KernelConfig()
    tol: float = 1e-3

    def __post_init__(self):
        if self.kind not in ("smo", "nb"):
            raise ValueError(f"classifier kind must be 'smo' or 'nb', got {self.kind!r}")
        if not self.name:
            object.__setattr__(self, "name", self.display_name())

    def display_name(self) -> str:
        if self.kind == "nb":
            return "NaiveBayes"
        if self.kernel.kind == "rbf":
            return f"SMO (rbf, gamma={self.kernel.gamma:g}, C={self.c:g})"
        return f"SMO (poly degree {self.kernel.degree}, C={self.c:g})"

    def fit(self, train: Dataset, seed: int = 1):
        if self.kind == "smo":
            return train_smo(train, c=self.c, kernel=self.kernel, tol=self.tol, seed=seed)
        return train_naive_bayes(train)


def predict(model, x: FeatureVector) -> tuple:
    """Dispatching predictor; returns (label, score) for either model kind.

    SVM models score with the decision value, naive Bayes with the
    posterior probability of "finding", so higher always means more
    finding-like.
    """
    if isinstance(model, SvmModel):
        return predict_svm(model, x)
    label, posteriors = predict_naive_bayes(model, x)
    return label, posteriors[FINDING]


def model_to_dict(model) -> dict:
    """Versioned JSON-ready representation of a trained model."""
    if isinstance(model, SvmModel):
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": "smo",
            "feature_names": list(FEATURE_NAMES),
            "c": model.c,
            "kernel": {
                "kind": model.kernel.kind,
                "degree": model.kernel.degree,
                "gamma": model.kernel.gamma,
            },
            "scaler": {
                "low": model.scaler.low.tolist(),
                "span": model.scaler.span.tolist(),
            },
            "support_vectors": model.support_vectors.tolist(),
            "dual_coefs": model.dual_coefs.tolist(),
            "bias": model.bias,
        }
    if isinstance(model, NaiveBayesModel):
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": "nb",
            "feature_names": list(FEATURE_NAMES),
            "priors": {cls: model.priors[cls] for cls in (NORMAL, FINDING)},
            "means": {cls: model.means[cls].tolist() for cls in (NORMAL, FINDING)},
            "variances": {
                cls: model.variances[cls].tolist() for cls in (NORMAL, FINDING)
            },
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(doc: dict):
    """Inverse of model_to_dict; validates the format marker and version."""
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a {MODEL_FORMAT} document: format={doc.get('format')!r}")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    if doc["kind"] == "smo":
        return SvmModel(
            support_vectors=np.array(doc["support_vectors"], dtype=np.float64),
            dual_coefs=np.array(doc["dual_coefs"], dtype=np.float64),
            bias=float(doc["bias"]),
            kernel=KernelConfig(
                kind=doc["kernel"]["kind"],
                degree=int(doc["kernel"]["degree"]),
                gamma=float(doc["kernel"]["gamma"]),
            ),
            c=float(doc["c"]),
            scaler=FeatureScaler(
                low=np.array(doc["scaler"]["low"], dtype=np.float64),
                span=np.array(doc["scaler"]["span"], dtype=np.float64),
            ),
        )
    if doc["kind"] == "nb":
        return NaiveBayesModel(
            priors={cls: float(doc["priors"][cls]) for cls in (NORMAL, FINDING)},
            means={
                cls: np.array(doc["means"][cls], dtype=np.float64)
                for cls in (NORMAL, FINDING)
            },
            variances={
                cls: np.array(doc["variances"][cls], dtype=np.float64)
                for cls in (NORMAL, FINDING)
            },
        )
    raise ValueError(f"unknown model kind {doc['kind']!r}")


def save_model(model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))
