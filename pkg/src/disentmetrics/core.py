"""Dataset model, interventional oracle, matrix types, IO, and metric reports.

Data layout conventions used throughout the package:

* a dataset pairs K generative-factor columns with N latent-code columns,
  all of length n; row r of both groups describes the same sample;
* informativeness and importance matrices are (N, K): entry [i, j] scores
  how much latent i tells about factor j;
* all values are float64; discrete factors are floats with integral values
  in {0, ..., cardinality-1}.

Datasets and matrices are immutable after construction (backing arrays are
marked read-only) and safe to share across threads. Oracles hold mutable
RNG state and must be confined to a single thread; create per-thread
oracles from a seed via ``reseeded``.
"""

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

DEFAULT_SEED = 7

FACTOR_KINDS = ("continuous", "discrete")
PROVENANCES = ("mutual_information", "linear_r2", "importance", "external")


class MetricsError(Exception):
    """Base class for all domain errors raised by this package."""


class SchemaError(MetricsError):
    """A column is missing from, or inconsistent with, the declared schema."""


class ParseError(MetricsError):
    """A cell could not be parsed; carries 1-based data row and column name."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class ValidationError(MetricsError):
    """A dataset violates an invariant; carries the list of issues."""

    def __init__(self, issues):
        super().__init__("; ".join(str(i) for i in issues))
        self.issues = list(issues)


class NotComputableError(MetricsError):
    """The requested quantity is undefined for this input."""


class DegenerateLabelsError(MetricsError):
    """A classifier was asked to fit fewer than two classes."""


def _freeze(a, dtype=np.float64):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FactorColumn:
    """One generative factor: a named column of n real values."""

    name: str
    values: np.ndarray
    kind: str = "continuous"
    cardinality: int | None = None

    def __post_init__(self):
        if self.kind not in FACTOR_KINDS:
            raise ValueError(f"unknown factor kind {self.kind!r}")
        if self.kind == "discrete" and (self.cardinality is None or self.cardinality < 1):
            raise ValueError("discrete factor needs cardinality >= 1")
        object.__setattr__(self, "values", _freeze(np.atleast_1d(self.values)))


@dataclass(frozen=True, eq=False)
class LatentColumn:
    """One latent code dimension: a named column of n real values."""

    name: str
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(np.atleast_1d(self.values)))


@dataclass(frozen=True, eq=False)
class RepresentationDataset:
    """Paired factor columns Z (n x K) and latent columns C (n x N).

    Construction is permissive; run :func:`validate` to check invariants
    (loaders do this automatically).
    """

    factors: tuple
    latents: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "latents", tuple(self.latents))

    @property
    def n(self):
        cols = self.factors + self.latents
        return int(cols[0].values.size) if cols else 0

    @property
    def n_factors(self):
        return len(self.factors)

    @property
    def n_latents(self):
        return len(self.latents)

    def factor_matrix(self):
        return np.column_stack([f.values for f in self.factors])

    def latent_matrix(self):
        return np.column_stack([c.values for c in self.latents])

    @property
    def factor_names(self):
        return [f.name for f in self.factors]

    @property
    def latent_names(self):
        return [c.name for c in self.latents]


@dataclass(frozen=True)
class ValidationIssue:
    """One violated invariant; row is 1-based over data rows, None if column-wide."""

    column: str | None
    row: int | None
    message: str

    def __str__(self):
        where = ""
        if self.column is not None:
            where = f" [column {self.column}" + (f", row {self.row}]" if self.row else "]")
        return self.message + where


def validate(dataset):
    """Check every dataset invariant; returns a list of issues (empty = pass)."""
    issues = []
    if dataset.n_factors < 1:
        issues.append(ValidationIssue(None, None, "dataset has no factor columns"))
    if dataset.n_latents < 1:
        issues.append(ValidationIssue(None, None, "dataset has no latent columns"))
    cols = list(dataset.factors) + list(dataset.latents)
    if not cols:
        return issues
    n = cols[0].values.size
    if n < 1:
        issues.append(ValidationIssue(cols[0].name, None, "empty column"))
    for col in cols:
        if col.values.size != n:
            issues.append(ValidationIssue(col.name, None, "length mismatch"))
    for col in cols:
        bad = np.flatnonzero(~np.isfinite(col.values))
        for r in bad:
            issues.append(ValidationIssue(col.name, int(r) + 1, "non-finite value"))
    for f in dataset.factors:
        if f.kind != "discrete":
            continue
        v = f.values
        finite = np.isfinite(v)
        off = np.flatnonzero(finite & ((v != np.floor(v)) | (v < 0) | (v >= f.cardinality)))
        for r in off:
            issues.append(
                ValidationIssue(
                    f.name, int(r) + 1, f"value {v[r]!r} outside discrete range 0..{f.cardinality - 1}"
                )
            )
    return issues


# ---------------------------------------------------------------------------
# CSV dataset format
#
# Comma-separated, UTF-8, '.' decimal point, mandatory header. Column roles
# come either from inline header suffixes (``name:c`` continuous factor,
# ``name:d<k>`` discrete factor with cardinality k, bare name = latent) or
# from a sidecar schema file of ``name=factor:c|factor:d<k>|latent`` lines.
# ---------------------------------------------------------------------------


def _parse_role(token):
    if token == "latent":
        return ("latent", None)
    if token == "factor:c":
        return ("factor", ("continuous", None))
    if token.startswith("factor:d"):
        try:
            card = int(token[len("factor:d"):])
        except ValueError:
            raise SchemaError(f"bad discrete cardinality in role {token!r}") from None
        if card < 1:
            raise SchemaError(f"cardinality must be >= 1 in role {token!r}")
        return ("factor", ("discrete", card))
    raise SchemaError(f"unknown column role {token!r}")


def load_schema(path):
    """Read a sidecar schema file into an ordered name -> role mapping."""
    schema = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SchemaError(f"bad schema line {line!r}")
            name, role = line.split("=", 1)
            _parse_role(role.strip())
            schema[name.strip()] = role.strip()
    return schema


def _split_header_token(token):
    # inline suffix: name:c | name:d<k> | bare name
    if token.endswith(":c"):
        return token[:-2], ("factor", ("continuous", None))
    if ":d" in token:
        name, _, suffix = token.rpartition(":d")
        if suffix.isdigit():
            return name, ("factor", ("discrete", int(suffix)))
    return token, ("latent", None)


def load_dataset(path, schema=None):
    """Load a CSV dataset, resolving column roles and validating invariants.

    ``schema`` may be None (use inline header suffixes), a mapping of
    column name to role string, or a path to a sidecar schema file.
    """
    if isinstance(schema, (str, os.PathLike)):
        schema = load_schema(schema)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file: missing header row") from None
        header = [h.strip() for h in header]
        rows = list(reader)

    roles = {}
    names = []
    if schema is not None:
        for tok in header:
            name, _ = _split_header_token(tok)
            names.append(name)
        for name in names:
            if name not in schema:
                raise SchemaError(f"column {name!r} missing from schema")
        for name in schema:
            if name not in names:
                raise SchemaError(f"schema column {name!r} missing from file")
        roles = {name: _parse_role(schema[name]) for name in names}
        order = [n for n in schema if n in names]
    else:
        for tok in header:
            name, role = _split_header_token(tok)
            names.append(name)
            roles[name] = role
        order = names

    columns = {name: np.empty(len(rows), dtype=np.float64) for name in names}
    for r, row in enumerate(rows):
        if len(row) != len(names):
            raise ParseError(f"row {r + 1} has {len(row)} cells, expected {len(names)}", row=r + 1)
        for name, cell in zip(names, row):
            try:
                columns[name][r] = float(cell)
            except ValueError:
                raise ParseError(
                    f"non-numeric cell {cell!r} at row {r + 1}, column {name}",
                    row=r + 1,
                    column=name,
                ) from None

    factors = []
    latents = []
    for name in order:
        role, detail = roles[name]
        if role == "factor":
            kind, card = detail
            factors.append(FactorColumn(name, columns[name], kind=kind, cardinality=card))
        else:
            latents.append(LatentColumn(name, columns[name]))
    dataset = RepresentationDataset(tuple(factors), tuple(latents))
    issues = validate(dataset)
    if issues:
        raise ValidationError(issues)
    return dataset


def _atomic_write(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def save_dataset(dataset, path):
    """Write a dataset as CSV with self-describing inline header suffixes."""
    header = []
    for f in dataset.factors:
        header.append(f"{f.name}:d{f.cardinality}" if f.kind == "discrete" else f"{f.name}:c")
    header.extend(c.name for c in dataset.latents)
    cols = [f.values for f in dataset.factors] + [c.values for c in dataset.latents]
    lines = [",".join(header)]
    for r in range(dataset.n):
        lines.append(",".join(repr(float(col[r])) for col in cols))
    _atomic_write(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Informativeness / importance matrices and the .matrix file format
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InformativenessMatrix:
    """(N, K) scores of how much latent i tells about factor j, plus H(z_j).

    ``factor_entropies`` are in nats. When provenance is mutual_information,
    every column is bounded by the matching factor entropy.
    """

    values: np.ndarray
    factor_entropies: np.ndarray
    provenance: str = "external"

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        h = np.atleast_1d(np.asarray(self.factor_entropies, dtype=np.float64))
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if v.ndim != 2 or h.ndim != 1 or v.shape[1] != h.size:
            raise ValueError("matrix must be (N, K) with K factor entropies")
        if not np.isfinite(v).all() or not np.isfinite(h).all():
            raise ValueError("non-finite entries")
        if (v < 0).any():
            raise ValueError("negative informativeness entry")
        if self.provenance == "mutual_information" and (v > h[None, :] + 1e-9).any():
            raise ValueError("mutual information exceeds factor entropy")
        object.__setattr__(self, "values", _freeze(v))
        object.__setattr__(self, "factor_entropies", _freeze(h))

    @property
    def n_latents(self):
        return self.values.shape[0]

    @property
    def n_factors(self):
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class ImportanceMatrix:
    """(N, K) non-negative regressor importances P[i, j] of latent i for factor j."""

    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        if not np.isfinite(v).all():
            raise ValueError("non-finite importance")
        if (v < 0).any():
            raise ValueError("negative importance")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def n_latents(self):
        return self.values.shape[0]

    @property
    def n_factors(self):
        return self.values.shape[1]


def save_matrix(matrix, path):
    """Write an informativeness matrix as a .matrix text file.

    Line 1: ``K,N``; line 2: K factor entropies; then N comma-separated
    rows of K entries (row i = latent i).
    """
    k, n = matrix.n_factors, matrix.n_latents
    lines = [f"{k},{n}", ",".join(repr(float(h)) for h in matrix.factor_entropies)]
    for i in range(n):
        lines.append(",".join(repr(float(x)) for x in matrix.values[i]))
    _atomic_write(path, "\n".join(lines) + "\n")


def load_matrix(path):
    """Read a .matrix file written by :func:`save_matrix`; provenance is external."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ParseError("empty matrix file")
    try:
        k, n = (int(t) for t in lines[0].split(","))
    except ValueError:
        raise ParseError(f"bad matrix header {lines[0]!r}: expected K,N") from None
    if len(lines) != n + 2:
        raise ParseError(f"expected {n + 2} lines ({n} latent rows), found {len(lines)}")
    try:
        entropies = [float(t) for t in lines[1].split(",")]
        rows = [[float(t) for t in ln.split(",")] for ln in lines[2:]]
    except ValueError as exc:
        raise ParseError(f"non-numeric matrix entry: {exc}") from None
    if len(entropies) != k or any(len(r) != k for r in rows):
        raise ParseError("matrix row width does not match header K")
    return InformativenessMatrix(np.array(rows), np.array(entropies), provenance="external")


# ---------------------------------------------------------------------------
# Interventional oracle
# ---------------------------------------------------------------------------


class RepresentationOracle:
    """Sampler of (z, c) pairs that can hold one generative factor fixed.

    ``factor_sampler(rng, n)`` draws an (n, K) factor matrix from the
    factor marginals; ``encoder(rng, Z)`` maps it to an (n, N) latent
    matrix (the encoder may itself be stochastic). When a factor is fixed
    without an explicit value, one value is drawn from that factor's
    marginal and shared by the whole batch.
    """

    def __init__(self, n_factors, n_latents, factor_sampler, encoder, seed=DEFAULT_SEED,
                 name="oracle", params=None, default_n=10000):
        self.n_factors = int(n_factors)
        self.n_latents = int(n_latents)
        self._factor_sampler = factor_sampler
        self._encoder = encoder
        self.seed = seed
        self.name = name
        self.params = dict(params or {})
        self.default_n = int(default_n)
        self._rng = np.random.default_rng(seed)

    def reseeded(self, seed):
        """Same generative structure, fresh RNG stream."""
        return RepresentationOracle(
            self.n_factors, self.n_latents, self._factor_sampler, self._encoder,
            seed=seed, name=self.name, params=self.params, default_n=self.default_n,
        )

    def sample(self, n, fixed_factor=None, fixed_value=None):
        """Draw n (z, c) pairs; optionally pin one factor.

        ``fixed_value`` may be a scalar (shared by the batch), an (n,)
        array (per-row values), or None (one shared value drawn from the
        factor marginal).
        """
        if fixed_factor is not None and not 0 <= fixed_factor < self.n_factors:
            raise ValueError(f"fixed_factor {fixed_factor} out of range")
        if fixed_factor is not None and fixed_value is None:
            fixed_value = float(self._factor_sampler(self._rng, 1)[0, fixed_factor])
        z = self._factor_sampler(self._rng, int(n))
        if fixed_factor is not None:
            z[:, fixed_factor] = fixed_value
        c = self._encoder(self._rng, z)
        return z, c

    def sample_dataset(self, n=None, factor_kinds=None):
        """Materialize a dataset of n marginal samples (factors z1.., latents c1..)."""
        n = self.default_n if n is None else int(n)
        z, c = self.sample(n)
        kinds = factor_kinds or [("continuous", None)] * self.n_factors
        factors = tuple(
            FactorColumn(f"z{j + 1}", z[:, j], kind=kinds[j][0], cardinality=kinds[j][1])
            for j in range(self.n_factors)
        )
        latents = tuple(LatentColumn(f"c{i + 1}", c[:, i]) for i in range(self.n_latents))
        return RepresentationDataset(factors, latents)


# ---------------------------------------------------------------------------
# Metric reports
# ---------------------------------------------------------------------------


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


@dataclass
class MetricReport:
    """One metric outcome: scalar score plus every intermediate quantity."""

    metric: str
    score: float | None
    skipped: bool = False
    skip_reason: str | None = None
    intermediates: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    seed: int | None = None

    def to_dict(self):
        return {
            "metric": self.metric,
            "score": None if self.score is None else float(self.score),
            "skipped": bool(self.skipped),
            "skip_reason": self.skip_reason,
            "intermediates": _jsonify(self.intermediates),
            "config": _jsonify(self.config),
            "seed": self.seed,
        }


def reports_to_json(reports):
    """Serialize one report or a list with stable, sorted keys."""
    if isinstance(reports, MetricReport):
        payload = reports.to_dict()
    else:
        payload = [r.to_dict() for r in reports]
    return json.dumps(payload, indent=2, sort_keys=True)
