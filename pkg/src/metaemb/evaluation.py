"""STS scoring: cosine predictions, Pearson/Spearman, per-subset reports.

Predictions are plain cosines between embedding rows. Reports carry both
aggregation conventions side by side, because the benchmarks disagree:
the unweighted mean of per-subset correlations (the STS12-16 convention)
and the correlation over all pairs pooled (the STS Benchmark convention).

Constant inputs to a correlation raise DegenerateInput instead of
returning 0; a pipeline that produces constant predictions is broken and
should say so loudly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import DegenerateInput, EmbeddingView, InvalidInput, ZERO_NORM_EPS


@dataclass(frozen=True, eq=False)
class StsSubset:
    """Sentence-pair records of one named sub-testset.

    index_a/index_b point into a shared unique-sentence embedding matrix;
    gold holds the human similarity scores.
    """

    index_a: np.ndarray
    index_b: np.ndarray
    gold: np.ndarray

    def __post_init__(self):
        ia = np.asarray(self.index_a, dtype=np.int64)
        ib = np.asarray(self.index_b, dtype=np.int64)
        g = np.asarray(self.gold, dtype=np.float64)
        if not (ia.shape == ib.shape == g.shape) or ia.ndim != 1:
            raise InvalidInput("index_a, index_b and gold must be equal-length 1-D arrays")
        if ia.shape[0] < 1:
            raise InvalidInput("a subset must contain at least one record")
        if not np.isfinite(g).all():
            raise InvalidInput("gold scores must be finite")
        for name, arr in (("index_a", ia), ("index_b", ib), ("gold", g)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_pairs(self) -> int:
        return self.gold.shape[0]


@dataclass(frozen=True, eq=False)
class StsDataset:
    """Named sub-testsets sharing one sentence index space."""

    subsets: dict[str, StsSubset]

    def __post_init__(self):
        if not self.subsets:
            raise InvalidInput("dataset must contain at least one subset")
        object.__setattr__(self, "subsets", dict(self.subsets))

    @property
    def n_records(self) -> int:
        return sum(s.n_pairs for s in self.subsets.values())


@dataclass(frozen=True)
class SubsetScore:
    pearson: float
    spearman: float
    n_pairs: int


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Per-subset correlations plus both aggregation conventions."""

    per_subset: dict[str, SubsetScore]
    aggregate_mean: tuple[float, float]  # unweighted mean over subsets
    aggregate_pooled: tuple[float, float]  # all pairs pooled
    n_total: int


def _cosine_rows(emb: EmbeddingView, ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
    n = emb.n_rows
    bad = (ia < 0) | (ia >= n) | (ib < 0) | (ib >= n)
    if bad.any():
        raise InvalidInput(
            f"{int(bad.sum())} record(s) index outside the embedding's {n} rows"
        )
    a = emb.matrix[ia]
    b = emb.matrix[ib]
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    ok = (na >= ZERO_NORM_EPS) & (nb >= ZERO_NORM_EPS)
    out = np.zeros(ia.shape[0])
    denom = np.where(ok, na * nb, 1.0)
    out[ok] = (np.sum(a * b, axis=1) / denom)[ok]
    return out


def predict_similarities(emb: EmbeddingView, ds: StsDataset) -> np.ndarray:
    """Cosine similarity per record, concatenated in dataset order.

    Records whose rows include a zero vector get similarity 0.
    """
    return np.concatenate(
        [_cosine_rows(emb, s.index_a, s.index_b) for s in ds.subsets.values()]
    )


def _check_pair(x, y):
    xa = np.asarray(x, dtype=np.float64).reshape(-1)
    ya = np.asarray(y, dtype=np.float64).reshape(-1)
    if xa.shape[0] != ya.shape[0]:
        raise InvalidInput(f"length mismatch: {xa.shape[0]} vs {ya.shape[0]}")
    if xa.shape[0] < 2:
        raise InvalidInput("correlation needs at least 2 points")
    if xa.max() == xa.min() or ya.max() == ya.min():
        raise DegenerateInput("correlation of a constant vector is undefined")
    return xa, ya


def pearson(x, y) -> float:
    """Sample Pearson correlation of two equal-length, non-constant vectors."""
    xa, ya = _check_pair(x, y)
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    r = (dx @ dy) / np.sqrt((dx @ dx) * (dy @ dy))
    return float(np.clip(r, -1.0, 1.0))


def _average_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank range."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.shape[0])
    i = 0
    while i < x.shape[0]:
        j = i
        while j + 1 < x.shape[0] and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Spearman rank correlation: Pearson on average-ranked values."""
    xa, ya = _check_pair(x, y)
    return pearson(_average_ranks(xa), _average_ranks(ya))


def evaluate(emb: EmbeddingView, ds: StsDataset) -> EvalReport:
    """Correlate cosine predictions against gold scores, per subset and aggregated."""
    per: dict[str, SubsetScore] = {}
    pooled_pred: list[np.ndarray] = []
    pooled_gold: list[np.ndarray] = []
    for name, sub in ds.subsets.items():
        pred = _cosine_rows(emb, sub.index_a, sub.index_b)
        per[name] = SubsetScore(pearson(pred, sub.gold), spearman(pred, sub.gold), sub.n_pairs)
        pooled_pred.append(pred)
        pooled_gold.append(sub.gold)
    mean_p = float(np.mean([s.pearson for s in per.values()]))
    mean_s = float(np.mean([s.spearman for s in per.values()]))
    all_pred = np.concatenate(pooled_pred)
    all_gold = np.concatenate(pooled_gold)
    return EvalReport(
        per_subset=per,
        aggregate_mean=(mean_p, mean_s),
        aggregate_pooled=(pearson(all_pred, all_gold), spearman(all_pred, all_gold)),
        n_total=int(all_gold.shape[0]),
    )


def format_report(report: EvalReport) -> str:
    """Human-readable aligned table with both aggregation rows."""
    names = list(report.per_subset) + ["mean(subsets)", "pooled(all)"]
    width = max(len(n) for n in ["subset"] + names)
    lines = [f"{'subset':<{width}}  {'n':>6}  {'pearson':>9}  {'spearman':>9}"]
    for name, score in report.per_subset.items():
        lines.append(
            f"{name:<{width}}  {score.n_pairs:>6}  {score.pearson:>9.6f}  {score.spearman:>9.6f}"
        )
    mp, ms = report.aggregate_mean
    pp, ps = report.aggregate_pooled
    lines.append(f"{'mean(subsets)':<{width}}  {'':>6}  {mp:>9.6f}  {ms:>9.6f}")
    lines.append(f"{'pooled(all)':<{width}}  {report.n_total:>6}  {pp:>9.6f}  {ps:>9.6f}")
    return "\n".join(lines)


def report_to_json(report: EvalReport) -> str:
    """Machine-readable report; field names are part of the interface."""
    payload = {
        "per_subset": [
            {
                "subset": name,
                "n": score.n_pairs,
                "pearson": score.pearson,
                "spearman": score.spearman,
            }
            for name, score in report.per_subset.items()
        ],
        "aggregate_mean": {
            "pearson": report.aggregate_mean[0],
            "spearman": report.aggregate_mean[1],
        },
        "aggregate_pooled": {
            "pearson": report.aggregate_pooled[0],
            "spearman": report.aggregate_pooled[1],
            "n": report.n_total,
        },
    }
    return json.dumps(payload, indent=2) + "\n"
