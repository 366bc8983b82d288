"""Statistical substrate for the metrics: plug-in entropy and mutual
information on binned data, least-squares informativeness, a gradient-descent
multinomial logistic classifier, majority-vote classification, and per-factor
feature importances (bagged regression forest or lasso).

Everything here is pure given (data, config, seed): repeated calls are
bit-reproducible and safe to run concurrently.
"""

from dataclasses import dataclass

import numpy as np

from .core import (
    DegenerateLabelsError,
    ImportanceMatrix,
    InformativenessMatrix,
    NotComputableError,
)

BIN_STRATEGIES = ("quantile", "equal_width")


@dataclass(frozen=True)
class BinningSpec:
    """How continuous values are turned into labels for the plug-in estimators."""

    strategy: str = "quantile"
    bin_count: int = 20

    def __post_init__(self):
        if self.strategy not in BIN_STRATEGIES:
            raise ValueError(f"unknown binning strategy {self.strategy!r}")
        if self.bin_count < 2:
            raise ValueError("bin_count must be >= 2")


def discretize(values, spec=BinningSpec()):
    """Map real values to labels in 0..bin_count-1.

    Quantile binning assigns near-equal counts per bin by stable rank;
    tied values share the bin of their first sorted occurrence, so equal
    inputs always land in the same bin and a strictly increasing transform
    of the input leaves the labels unchanged. Equal-width binning splits
    [min, max] uniformly. Constant input maps everything to bin 0.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("values must be a non-empty 1-d sequence")
    if not np.isfinite(v).all():
        raise ValueError("values must be finite")
    lo, hi = v.min(), v.max()
    if lo == hi:
        return np.zeros(v.size, dtype=np.int64)
    if spec.strategy == "quantile":
        n = v.size
        order = np.argsort(v, kind="stable")
        sorted_v = v[order]
        group_starts = np.arange(n)
        group_starts[1:][sorted_v[1:] == sorted_v[:-1]] = 0
        group_rank = np.maximum.accumulate(group_starts)
        ranks = np.empty(n, dtype=np.int64)
        ranks[order] = group_rank
        return (ranks * spec.bin_count) // n
    labels = np.floor((v - lo) / (hi - lo) * spec.bin_count).astype(np.int64)
    return np.clip(labels, 0, spec.bin_count - 1)


def entropy(labels):
    """Plug-in entropy -sum p ln p (nats) over observed labels."""
    a = np.asarray(labels)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("labels must be a non-empty 1-d sequence")
    _, counts = np.unique(a, return_counts=True)
    p = counts / a.size
    return float(-(p * np.log(p)).sum())


def mutual_information(a, b):
    """Plug-in mutual information (nats) from the empirical joint histogram.

    Symmetric, and clamped at 0 against tiny negative floating error.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 1 or b.ndim != 1 or a.size != b.size:
        raise ValueError("label sequences must be 1-d and of equal length")
    if a.size == 0:
        raise ValueError("label sequences must be non-empty")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    na = int(ia.max()) + 1
    nb = int(ib.max()) + 1
    joint = np.bincount(ia * nb + ib, minlength=na * nb).reshape(na, nb) / a.size
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    nz = joint > 0
    mi = float((joint[nz] * np.log(joint[nz] / np.outer(pa, pb)[nz])).sum())
    return max(mi, 0.0)


def encode_factor(column, spec=BinningSpec()):
    """Labels for a factor column: native labels for small discrete factors,
    otherwise discretized per the binning spec."""
    if column.kind == "discrete" and column.cardinality <= spec.bin_count:
        return column.values.astype(np.int64)
    return discretize(column.values, spec)


def informativeness_from_mi(dataset, spec=BinningSpec()):
    """(N, K) mutual-information matrix between latents and factors.

    Latents are always discretized; factor entropies are the plug-in
    entropies of the encoded factors, so an invertible latent map can reach
    I[i, j] = H(z_j) exactly.
    """
    factor_labels = [encode_factor(f, spec) for f in dataset.factors]
    latent_labels = [discretize(c.values, spec) for c in dataset.latents]
    n_latents, n_factors = len(latent_labels), len(factor_labels)
    values = np.zeros((n_latents, n_factors))
    for i in range(n_latents):
        for j in range(n_factors):
            values[i, j] = mutual_information(latent_labels[i], factor_labels[j])
    entropies = np.array([entropy(lab) for lab in factor_labels])
    return InformativenessMatrix(values, entropies, provenance="mutual_information")


def linear_regression_r2(x, y):
    """R-squared of ordinary least squares of y on (1, x), clamped to [0, 1].

    Constant x (or constant y) carries no linear signal and returns 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise ValueError("x and y must share a length >= 2")
    vx = x.var()
    vy = y.var()
    if vx == 0.0 or vy == 0.0:
        return 0.0
    cov = ((x - x.mean()) * (y - y.mean())).mean()
    return float(np.clip(cov * cov / (vx * vy), 0.0, 1.0))


def stump_accuracy(x, labels):
    """Best single-threshold classification accuracy of labels from x,
    rescaled to [0, 1] from the majority-class baseline."""
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    n = x.size
    classes, y = np.unique(labels, return_inverse=True)
    counts = np.bincount(y)
    p_max = counts.max() / n
    if classes.size < 2 or p_max == 1.0:
        return 0.0
    order = np.argsort(x, kind="stable")
    xs = x[order]
    onehot = np.zeros((n, classes.size), dtype=np.int64)
    onehot[np.arange(n), y[order]] = 1
    prefix = np.vstack([np.zeros(classes.size, dtype=np.int64), np.cumsum(onehot, axis=0)])
    left_best = prefix.max(axis=1)
    right_best = (counts[None, :] - prefix).max(axis=1)
    # splits allowed only between distinct x values (plus the trivial ends)
    valid = np.ones(n + 1, dtype=bool)
    valid[1:n] = xs[1:] > xs[:-1]
    acc = ((left_best + right_best)[valid]).max() / n
    return float(np.clip((acc - p_max) / (1.0 - p_max), 0.0, 1.0))


# ---------------------------------------------------------------------------
# Multinomial logistic classifier (full-batch gradient descent)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassifierConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    seed: int = 0


@dataclass(frozen=True, eq=False)
class LinearClassifier:
    """Softmax-linear model; weights are (C, D+1), last column is the bias."""

    weights: np.ndarray

    def decision(self, points):
        x = np.asarray(points, dtype=np.float64)
        return x @ self.weights[:, :-1].T + self.weights[:, -1]

    def predict(self, points):
        return np.argmax(self.decision(points), axis=1)

    def accuracy(self, points, labels):
        return float(np.mean(self.predict(points) == np.asarray(labels)))


def fit_linear_classifier(points, labels, config=ClassifierConfig()):
    """Train a multinomial logistic model by full-batch gradient descent.

    Zero-initialized and fully deterministic for a fixed config, whatever
    the seed; the seed field exists so callers can thread one config
    object through seeded pipelines.
    """
    x = np.asarray(points, dtype=np.float64)
    y = np.asarray(labels).astype(np.int64)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise ValueError("points must be (n, D) with one label per row")
    if not np.isfinite(x).all():
        raise ValueError("points must be finite")
    if np.unique(y).size < 2:
        raise DegenerateLabelsError("need at least two classes to fit a classifier")
    n, d = x.shape
    n_classes = int(y.max()) + 1
    xb = np.hstack([x, np.ones((n, 1))])
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    w = np.zeros((n_classes, d + 1))
    for _ in range(config.epochs):
        scores = xb @ w.T
        scores -= scores.max(axis=1, keepdims=True)
        probs = np.exp(scores)
        probs /= probs.sum(axis=1, keepdims=True)
        grad = (probs - onehot).T @ xb / n
        w = w - config.learning_rate * grad
    return LinearClassifier(w)


# ---------------------------------------------------------------------------
# Majority-vote classifier
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MajorityVoteTable:
    """Vote counts (N latent dims x K factors); predicts the argmax factor
    per latent dimension, ties broken by smallest factor index."""

    votes: np.ndarray

    @property
    def predictions(self):
        return np.argmax(self.votes, axis=1)

    def predict(self, latent_index):
        return int(self.predictions[latent_index])

    def accuracy(self, pairs):
        pairs = np.asarray(pairs, dtype=np.int64)
        return float(np.mean(self.predictions[pairs[:, 0]] == pairs[:, 1]))


def majority_vote(pairs, n_latents=None, n_factors=None):
    """Tally (latent_index, factor_index) training pairs into a vote table."""
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.size == 0:
        raise ValueError("majority_vote needs at least one training pair")
    pairs = pairs.reshape(-1, 2)
    n_latents = int(pairs[:, 0].max()) + 1 if n_latents is None else int(n_latents)
    n_factors = int(pairs[:, 1].max()) + 1 if n_factors is None else int(n_factors)
    votes = np.zeros((n_latents, n_factors), dtype=np.int64)
    np.add.at(votes, (pairs[:, 0], pairs[:, 1]), 1)
    return MajorityVoteTable(votes)


# ---------------------------------------------------------------------------
# Per-factor feature importances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 50
    max_depth: int = 5
    bag_fraction: float = 0.8
    seed: int = 0


@dataclass(frozen=True)
class LassoConfig:
    alpha: float = 0.01
    max_iter: int = 1000
    tol: float = 1e-10


def _sse(total, total_sq, count):
    return total_sq - total * total / count


def _best_split(x_node, y_node, sse_node):
    """Best variance-reduction split for one node; features scanned in
    canonical order with strictly-greater gains winning, so permuting
    columns permutes (not changes) the chosen feature."""
    m = y_node.size
    best_gain, best_feat, best_mask = 0.0, -1, None
    total = y_node.sum()
    total_sq = (y_node * y_node).sum()
    for f in range(x_node.shape[1]):
        x = x_node[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ys = y_node[order]
        boundary = np.flatnonzero(xs[1:] > xs[:-1]) + 1  # left sizes
        if boundary.size == 0:
            continue
        cy = np.cumsum(ys)
        cy2 = np.cumsum(ys * ys)
        left = boundary
        sse_l = _sse(cy[left - 1], cy2[left - 1], left)
        sse_r = _sse(total - cy[left - 1], total_sq - cy2[left - 1], m - left)
        gains = sse_node - sse_l - sse_r
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            best_gain = float(gains[k])
            best_feat = f
            best_mask = x <= xs[left[k] - 1]
    return best_gain, best_feat, best_mask


def _tree_importance(x, y, rng, config, importance):
    n = y.size
    bag = max(1, int(round(config.bag_fraction * n)))
    idx = rng.choice(n, size=bag, replace=False)
    root_sse = _sse(y[idx].sum(), (y[idx] ** 2).sum(), bag)
    stack = [(idx, 0)]
    while stack:
        rows, depth = stack.pop()
        if depth >= config.max_depth or rows.size < 2:
            continue
        y_node = y[rows]
        sse_node = _sse(y_node.sum(), (y_node * y_node).sum(), rows.size)
        if sse_node <= 0.0:
            continue
        gain, feat, mask = _best_split(x[rows], y_node, sse_node)
        if feat < 0 or gain <= 0.0:
            continue
        importance[feat] += gain
        stack.append((rows[mask], depth + 1))
        stack.append((rows[~mask], depth + 1))
    return max(root_sse, 0.0)


def _forest_importances(latents, target, config):
    """Raw summed impurity decrease per latent, plus the fraction of the
    (bagged) target variance those splits removed."""
    importance = np.zeros(latents.shape[1])
    total_root_sse = 0.0
    for t in range(config.n_trees):
        # per-tree stream depends on (seed, tree index) only, never on columns
        rng = np.random.default_rng([config.seed, t])
        total_root_sse += _tree_importance(latents, target, rng, config, importance)
    mass = float(importance.sum() / total_root_sse) if total_root_sse > 0 else 0.0
    return importance, mass


def _lasso_importances(latents, target, config):
    """|coefficients| of an L1 fit by coordinate descent on standardized
    latents and a unit-variance target."""
    x = latents - latents.mean(axis=0)
    scale = x.std(axis=0)
    nz = scale > 0
    x[:, nz] /= scale[nz]
    y = target - target.mean()
    sy = y.std()
    if sy == 0:
        return np.zeros(latents.shape[1]), 0.0
    y = y / sy
    n, d = x.shape
    w = np.zeros(d)
    col_sq = (x * x).sum(axis=0) / n
    residual = y.copy()
    for _ in range(config.max_iter):
        max_step = 0.0
        for j in range(d):
            if col_sq[j] == 0:
                continue
            rho = (x[:, j] @ (residual + x[:, j] * w[j])) / n
            new_w = np.sign(rho) * max(abs(rho) - config.alpha, 0.0) / col_sq[j]
            step = new_w - w[j]
            if step != 0.0:
                residual -= x[:, j] * step
                w[j] = new_w
                max_step = max(max_step, abs(step))
        if max_step < config.tol:
            break
    r2 = max(0.0, 1.0 - float((residual * residual).mean()))
    return np.abs(w), r2


def feature_importances(dataset, factor_index, method="forest", config=None):
    """Importance of each latent for predicting one factor.

    The forest method returns summed impurity decreases normalized to sum
    to 1 (all zeros for a constant factor); the lasso method returns raw
    |coefficients|. Both are deterministic given the config.
    """
    raw, _ = _importances_with_mass(dataset, factor_index, method, config)
    if method == "forest":
        total = raw.sum()
        return raw / total if total > 0 else raw
    return raw


def _importances_with_mass(dataset, factor_index, method="forest", config=None):
    latents = dataset.latent_matrix()
    target = dataset.factors[factor_index].values.astype(np.float64)
    if method == "forest":
        return _forest_importances(latents, target, config or ForestConfig())
    if method == "lasso":
        return _lasso_importances(latents, target, config or LassoConfig())
    raise ValueError(f"unknown importance method {method!r}")


def importance_matrix_from_dataset(dataset, method="forest", config=None):
    """(N, K) importance matrix plus the per-factor explained-mass diagnostics."""
    if dataset.n_factors < 1 or dataset.n_latents < 1:
        raise NotComputableError("dataset has no factor or latent columns")
    columns = []
    masses = []
    for j in range(dataset.n_factors):
        raw, mass = _importances_with_mass(dataset, j, method, config)
        total = raw.sum()
        if method == "forest" and total > 0:
            raw = raw / total
        columns.append(raw)
        masses.append(mass)
    return ImportanceMatrix(np.column_stack(columns)), np.array(masses)
