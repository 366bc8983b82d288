"""Cross-metric analysis: Spearman rank correlation over populations of
representations and pairwise metric-disagreement reports."""

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .core import (
    InformativenessMatrix,
    NotComputableError,
    RepresentationDataset,
    _jsonify,
)
from .estimators import BinningSpec, informativeness_from_mi
from . import metrics as metrics_mod
from . import synth

DATASET_METRICS = ("dci", "sap", "mig", "3charm")
MATRIX_METRICS = ("dci", "mig", "3charm")


def _average_ranks(x):
    """Fractional ranks: tied values share the mean of their positions."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ranks = np.empty(x.size)
    start = 0
    for i in range(1, x.size + 1):
        if i == x.size or xs[i] != xs[start]:
            ranks[order[start:i]] = 0.5 * (start + i - 1)
            start = i
    return ranks


def spearman(a, b):
    """Pearson correlation of the fractional-rank vectors of a and b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size != b.size or a.size < 2:
        raise ValueError("sequences must share a length >= 2")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise NotComputableError("rank correlation is undefined for a constant sequence")
    ra = _average_ranks(a)
    rb = _average_ranks(b)
    ra -= ra.mean()
    rb -= rb.mean()
    return float((ra * rb).sum() / np.sqrt((ra * ra).sum() * (rb * rb).sum()))


@dataclass
class PopulationResult:
    """Metric scores over a population: scores[m, r] for metric m on
    representation r, plus the reasons any metrics were dropped."""

    scores: np.ndarray
    metric_labels: list
    representation_labels: list
    dropped: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "scores": _jsonify(self.scores),
            "metrics": list(self.metric_labels),
            "representations": list(self.representation_labels),
            "dropped": dict(self.dropped),
        }


def _resolve_representation(rep):
    if isinstance(rep, (RepresentationDataset, InformativenessMatrix)):
        return rep
    if isinstance(rep, synth.GeneratorSpec):
        return synth.dataset_from_spec(rep)[0]
    if isinstance(rep, str):
        from .core import load_dataset, load_matrix

        return load_matrix(rep) if rep.endswith(".matrix") else load_dataset(rep)
    raise TypeError(f"cannot interpret representation {rep!r}")


def _rep_label(rep, index):
    if isinstance(rep, synth.GeneratorSpec):
        return rep.label()
    if isinstance(rep, str):
        return rep
    return f"rep_{index}"


def correlate_metrics(population, metrics=None, config=metrics_mod.InterventionConfig(),
                      binning=BinningSpec(), importance_method="forest"):
    """Evaluate every metric on every representation, then return the
    metric-by-metric Spearman matrix together with the raw population.

    Representations may be GeneratorSpecs, dataset paths, or datasets. A
    metric that is not computable on every representation is dropped with
    a recorded reason.
    """
    if len(population) < 5:
        raise ValueError("need at least 5 representations")
    selection = list(metrics) if metrics is not None else list(DATASET_METRICS)
    labels = [_rep_label(rep, i) for i, rep in enumerate(population)]
    columns = []
    for rep in population:
        dataset = _resolve_representation(rep)
        reports = metrics_mod.evaluate_all(
            dataset, metrics=selection, config=config,
            binning=binning, importance_method=importance_method,
        )
        columns.append({r.metric: r for r in reports})

    kept = []
    dropped = {}
    for name in selection:
        reasons = [col[name].skip_reason for col in columns if col[name].skipped]
        if reasons:
            dropped[name] = reasons[0]
        else:
            kept.append(name)
    if len(kept) < 2:
        raise NotComputableError("fewer than 2 metrics are computable on the whole population")

    scores = np.array([[col[name].score for col in columns] for name in kept])
    result = PopulationResult(scores, kept, labels, dropped)
    m = len(kept)
    matrix = np.eye(m)
    for i, j in combinations(range(m), 2):
        rho = spearman(scores[i], scores[j])
        matrix[i, j] = rho
        matrix[j, i] = rho
    return matrix, result


@dataclass
class ComparisonReport:
    """Which of two representations each metric prefers, and which metric
    pairs disagree about the ordering."""

    label_a: str
    label_b: str
    scores: dict
    preferred: dict
    disagreements: list

    def to_dict(self):
        return {
            "a": self.label_a,
            "b": self.label_b,
            "scores": {m: [float(x), float(y)] for m, (x, y) in self.scores.items()},
            "preferred": dict(self.preferred),
            "disagreements": [list(pair) for pair in self.disagreements],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _score_one(rep, metric, binning):
    if isinstance(rep, InformativenessMatrix):
        if metric == "mig":
            return metrics_mod.mig_score(rep).score
        if metric == "3charm":
            return metrics_mod.three_charm_score(rep).score
        if metric == "dci":
            return metrics_mod.dci_score(rep.values).score
        raise NotComputableError(f"metric {metric!r} cannot be computed from a matrix")
    reports = metrics_mod.evaluate_all(rep, metrics=[metric], binning=binning)
    report = reports[0]
    if report.skipped:
        raise NotComputableError(f"metric {metric!r}: {report.skip_reason}")
    return report.score


def compare(rep_a, rep_b, metrics=None, labels=("a", "b"), binning=BinningSpec()):
    """Score two representations under each metric and flag every metric
    pair that prefers opposite representations. Exactly equal scores yield
    no preference."""
    rep_a = _resolve_representation(rep_a)
    rep_b = _resolve_representation(rep_b)
    if metrics is None:
        both_matrices = isinstance(rep_a, InformativenessMatrix) and isinstance(rep_b, InformativenessMatrix)
        metrics = list(MATRIX_METRICS if both_matrices else DATASET_METRICS)
    scores = {}
    preferred = {}
    for name in metrics:
        sa = _score_one(rep_a, name, binning)
        sb = _score_one(rep_b, name, binning)
        scores[name] = (sa, sb)
        preferred[name] = labels[0] if sa > sb else labels[1] if sb > sa else None
    disagreements = [
        (m1, m2)
        for m1, m2 in combinations(metrics, 2)
        if preferred[m1] is not None and preferred[m2] is not None and preferred[m1] != preferred[m2]
    ]
    return ComparisonReport(labels[0], labels[1], scores, preferred, disagreements)
