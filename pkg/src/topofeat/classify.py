"""Soft-margin SVM (SMO), stratified k-fold evaluation and the ACC/SE/SP metrics.

The dual problem is solved by simplified sequential minimal optimisation
with a seeded partner choice, so runs are reproducible.  Features are
standardised per column with training-fold statistics only; the positive
class is the patient class, so sensitivity counts patients caught and
specificity controls kept.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class UndefinedMetricError(ValueError):
    """A requested ratio has a zero denominator."""


@dataclass
class LabeledDataset:
    """N x D feature matrix with binary labels (1 = patient, 0 = control)."""

    features: np.ndarray
    labels: np.ndarray
    subject_ids: list[str] | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.features.ndim != 2 or len(self.features) != len(self.labels):
            raise ValueError("features must be (N, D) with one label per row")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain non-finite values")
        if not np.all(np.isin(self.labels, (0, 1))):
            raise ValueError("labels must be 0 or 1")

    def __len__(self) -> int:
        return len(self.labels)


@dataclass
class FoldReport:
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def n(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


@dataclass
class EvalReport:
    """Confusion counts plus ACC/SE/SP, with per-fold detail when available."""

    acc: float
    se: float
    sp: float
    tp: int | None = None
    fn: int | None = None
    fp: int | None = None
    tn: int | None = None
    per_fold: list[FoldReport] = field(default_factory=list)

    @classmethod
    def from_counts(cls, tp: int, fn: int, fp: int, tn: int,
                    per_fold: list[FoldReport] | None = None) -> "EvalReport":
        acc, se, sp = metrics(tp, fn, fp, tn)
        return cls(acc=acc, se=se, sp=sp, tp=tp, fn=fn, fp=fp, tn=tn,
                   per_fold=per_fold or [])

    def fold_means(self) -> tuple[float, float, float]:
        """Mean of per-fold ACC/SE/SP (complement to the pooled headline numbers)."""
        if not self.per_fold:
            return (self.acc, self.se, self.sp)
        vals = np.array([metrics(f.tp, f.fn, f.fp, f.tn) for f in self.per_fold])
        return tuple(float(v) for v in vals.mean(axis=0))

    def to_json(self) -> str:
        payload = {
            "acc": self.acc, "se": self.se, "sp": self.sp,
            "tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn,
            "per_fold": [{"tp": f.tp, "fn": f.fn, "fp": f.fp, "tn": f.tn}
                         for f in self.per_fold],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        d = json.loads(text)
        return cls(acc=d["acc"], se=d["se"], sp=d["sp"], tp=d["tp"], fn=d["fn"],
                   fp=d["fp"], tn=d["tn"],
                   per_fold=[FoldReport(**f) for f in d["per_fold"]])

    @classmethod
    def load(cls, path) -> "EvalReport":
        return cls.from_json(Path(path).read_text())


def metrics(tp: int, fn: int, fp: int, tn: int) -> tuple[float, float, float]:
    """(accuracy, sensitivity, specificity) from confusion counts."""
    if min(tp, fn, fp, tn) < 0:
        raise ValueError("counts must be nonnegative")
    n = tp + fn + fp + tn
    if n == 0:
        raise UndefinedMetricError("no samples: accuracy undefined")
    if tp + fn == 0:
        raise UndefinedMetricError("no positives: sensitivity undefined")
    if fp + tn == 0:
        raise UndefinedMetricError("no negatives: specificity undefined")
    return (tp + tn) / n, tp / (tp + fn), tn / (fp + tn)


class SvmModel:
    """Fitted SVM: stored support set, kernel setup and column standardiser."""

    def __init__(self, sv_x, sv_y, alphas, bias, kernel, gamma, mean, std):
        self.sv_x = sv_x
        self.sv_y = sv_y
        self.alphas = alphas
        self.bias = bias
        self.kernel = kernel
        self.gamma = gamma
        self.mean = mean
        self.std = std

    def _kernel_matrix(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.kernel == "linear":
            return a @ b.T
        if self.kernel == "rbf":
            sq = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
            return np.exp(-self.gamma * sq)
        raise ValueError(f"unknown kernel: {self.kernel}")

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.mean.shape[0]:
            raise ValueError(
                f"feature dimension {x.shape[1] if x.ndim == 2 else 'n/a'} "
                f"does not match training dimension {self.mean.shape[0]}")
        z = (x - self.mean) / self.std
        if len(z) == 0:
            return np.empty(0)
        k = self._kernel_matrix(z, self.sv_x)
        return k @ (self.alphas * self.sv_y) + self.bias


def train_svm(data: LabeledDataset, kernel: str = "rbf", C: float = 1.0,
              gamma: float | None = None, tol: float = 1e-3,
              max_passes: int = 8, max_iter: int = 2000, seed: int = 0) -> SvmModel:
    """Fit a binary soft-margin SVM by simplified SMO.

    KKT violations beyond ``tol`` trigger pair updates; optimisation stops
    after ``max_passes`` sweeps without a change.  Columns are standardised
    with statistics of this training data.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    if kernel not in ("linear", "rbf"):
        raise ValueError(f"unknown kernel: {kernel}")
    x = data.features
    y01 = data.labels
    if len(np.unique(y01)) < 2:
        raise ValueError("training data must contain both classes")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    z = (x - mean) / std
    n, d = z.shape
    if gamma is None:
        gamma = 1.0 / d
    if kernel == "rbf" and gamma <= 0:
        raise ValueError("gamma must be positive for the rbf kernel")
    y = np.where(y01 == 1, 1.0, -1.0)

    if kernel == "linear":
        k = z @ z.T
    else:
        sq = ((z[:, None, :] - z[None, :, :]) ** 2).sum(axis=2)
        k = np.exp(-gamma * sq)

    rng = np.random.default_rng(seed)
    alphas = np.zeros(n)
    b = 0.0
    passes = 0
    it = 0
    while passes < max_passes and it < max_iter:
        changed = 0
        for i in range(n):
            ei = (alphas * y) @ k[:, i] + b - y[i]
            if (y[i] * ei < -tol and alphas[i] < C) or (y[i] * ei > tol and alphas[i] > 0):
                j = int(rng.integers(n - 1))
                if j >= i:
                    j += 1
                ej = (alphas * y) @ k[:, j] + b - y[j]
                ai_old, aj_old = alphas[i], alphas[j]
                if y[i] == y[j]:
                    lo, hi = max(0.0, ai_old + aj_old - C), min(C, ai_old + aj_old)
                else:
                    lo, hi = max(0.0, aj_old - ai_old), min(C, C + aj_old - ai_old)
                if hi - lo < 1e-12:
                    continue
                eta = 2 * k[i, j] - k[i, i] - k[j, j]
                if eta >= 0:
                    continue
                aj = aj_old - y[j] * (ei - ej) / eta
                aj = min(hi, max(lo, aj))
                if abs(aj - aj_old) < 1e-7:
                    continue
                ai = ai_old + y[i] * y[j] * (aj_old - aj)
                alphas[i], alphas[j] = ai, aj
                b1 = b - ei - y[i] * (ai - ai_old) * k[i, i] - y[j] * (aj - aj_old) * k[i, j]
                b2 = b - ej - y[i] * (ai - ai_old) * k[i, j] - y[j] * (aj - aj_old) * k[j, j]
                if 0 < ai < C:
                    b = b1
                elif 0 < aj < C:
                    b = b2
                else:
                    b = 0.5 * (b1 + b2)
                changed += 1
        it += 1
        passes = passes + 1 if changed == 0 else 0

    support = alphas > 1e-10
    return SvmModel(z[support], y[support], alphas[support], b, kernel, gamma, mean, std)


def predict(model: SvmModel, features: np.ndarray) -> np.ndarray:
    """0/1 labels from the decision function; zero lands on the positive class."""
    scores = model.decision_function(np.asarray(features, dtype=float).reshape(-1, model.mean.shape[0]))
    return (scores >= 0).astype(int)


def stratified_folds(labels: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Seeded stratified split: each fold gets a near-equal share of each class."""
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in np.unique(labels):
        idx = np.nonzero(labels == cls)[0]
        if len(idx) < k:
            raise ValueError(f"class {cls} has only {len(idx)} members for {k} folds")
        idx = rng.permutation(idx)
        for pos, sample in enumerate(idx):
            folds[pos % k].append(int(sample))
    return [np.array(sorted(f), dtype=int) for f in folds]


def kfold_cv(data: LabeledDataset, k: int = 10, seed: int = 0, kernel: str = "rbf",
             C: float = 1.0, gamma: float | None = None) -> EvalReport:
    """Stratified k-fold cross-validation with pooled confusion counts.

    The headline ACC/SE/SP come from the counts summed over folds;
    per-fold reports are retained so fold means can be read off too.
    """
    folds = stratified_folds(data.labels, k, seed)
    per_fold = []
    for fold_idx in folds:
        mask = np.ones(len(data), dtype=bool)
        mask[fold_idx] = False
        train = LabeledDataset(data.features[mask], data.labels[mask])
        model = train_svm(train, kernel=kernel, C=C, gamma=gamma, seed=seed)
        pred = predict(model, data.features[fold_idx])
        truth = data.labels[fold_idx]
        per_fold.append(FoldReport(
            tp=int(np.sum((pred == 1) & (truth == 1))),
            fn=int(np.sum((pred == 0) & (truth == 1))),
            fp=int(np.sum((pred == 1) & (truth == 0))),
            tn=int(np.sum((pred == 0) & (truth == 0))),
        ))
    tp = sum(f.tp for f in per_fold)
    fn = sum(f.fn for f in per_fold)
    fp = sum(f.fp for f in per_fold)
    tn = sum(f.tn for f in per_fold)
    return EvalReport.from_counts(tp, fn, fp, tn, per_fold)


def tune_hyperparameters(data: LabeledDataset, seed: int = 0, kernel: str = "rbf",
                         inner_folds: int = 3) -> tuple[float, float]:
    """Small grid search (C, gamma) by inner stratified CV; returns the best pair."""
    d = data.features.shape[1]
    c_grid = [0.1, 1.0, 10.0]
    g_grid = [0.1 / d, 1.0 / d, 10.0 / d]
    best = (-1.0, 1.0, 1.0 / d)
    for c in c_grid:
        for g in g_grid:
            rep = kfold_cv(data, k=inner_folds, seed=seed, kernel=kernel, C=c, gamma=g)
            if rep.acc > best[0]:
                best = (rep.acc, c, g)
    return best[1], best[2]


def load_features_csv(path) -> LabeledDataset:
    """Features CSV: subject_id, f0..f{D-1}, label (final column)."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    rows = [ln.split(",") for ln in lines[1:]]
    ids = [r[0] for r in rows]
    feats = np.array([[float(v) for v in r[1:-1]] for r in rows], dtype=float)
    labels = np.array([int(r[-1]) for r in rows], dtype=int)
    return LabeledDataset(feats, labels, subject_ids=ids)


def save_features_csv(path, ids: list[str], features: np.ndarray, labels: np.ndarray) -> None:
    features = np.asarray(features, dtype=float)
    header = ["subject_id"] + [f"f{i}" for i in range(features.shape[1])] + ["label"]
    lines = [",".join(header)]
    for sid, row, lab in zip(ids, features, labels):
        lines.append(",".join([sid] + [repr(float(v)) for v in row] + [str(int(lab))]))
    Path(path).write_text("\n".join(lines) + "\n")
