import numpy as np
import pytest

from disentmetrics import synth
from disentmetrics.analysis import compare, correlate_metrics, spearman
from disentmetrics.core import (
    FactorColumn,
    LatentColumn,
    NotComputableError,
    RepresentationDataset,
)
from disentmetrics.synth import GeneratorSpec


# --- spearman -----------------------------------------------------------


def test_spearman_identical():
    assert spearman([1.0, 2.0, 5.0, 3.0], [1.0, 2.0, 5.0, 3.0]) == pytest.approx(1.0, abs=1e-12)


def test_spearman_reversed():
    assert spearman([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0, abs=1e-12)


def test_spearman_hand_example():
    # ranks of b are (1,3,2,5,4); Pearson with (1..5) = 8/10
    assert spearman([1, 2, 3, 4, 5], [1, 3, 2, 5, 4]) == pytest.approx(0.8, abs=1e-12)


def test_spearman_ties_average():
    # b has a tie: ranks (1, 2.5, 2.5, 4)
    a = [1.0, 2.0, 3.0, 4.0]
    b = [0.0, 1.0, 1.0, 2.0]
    ra = np.array([1, 2, 3, 4], dtype=float)
    rb = np.array([1, 2.5, 2.5, 4])
    expected = np.corrcoef(ra, rb)[0, 1]
    assert spearman(a, b) == pytest.approx(expected, abs=1e-12)


def test_spearman_constant_not_computable():
    with pytest.raises(NotComputableError):
        spearman([1, 1, 1], [1, 2, 3])


def test_spearman_symmetric():
    rng = np.random.default_rng(0)
    a = rng.normal(size=40)
    b = rng.normal(size=40)
    assert spearman(a, b) == pytest.approx(spearman(b, a), abs=1e-12)


def test_spearman_monotone_invariant():
    rng = np.random.default_rng(1)
    a = rng.normal(size=40)
    b = rng.normal(size=40)
    assert spearman(np.exp(a), b) == pytest.approx(spearman(a, b), abs=1e-12)


# --- correlate_metrics -----------------------------------------------------


def _population(count=6, n=600):
    return [
        GeneratorSpec("entangled", {"level": i / (count - 1), "K": 3}, seed=50 + i, n=n)
        for i in range(count)
    ]


def test_correlate_metrics_matrix_shape():
    matrix, pop = correlate_metrics(_population(), metrics=["mig", "3charm", "sap"])
    assert matrix.shape == (3, 3)
    assert np.array_equal(matrix, matrix.T)
    assert np.array_equal(np.diag(matrix), np.ones(3))
    assert pop.metric_labels == ["mig", "3charm", "sap"]
    assert pop.scores.shape == (3, 6)
    assert pop.dropped == {}


def test_correlate_metrics_needs_population():
    with pytest.raises(ValueError):
        correlate_metrics(_population(count=4), metrics=["mig", "3charm"])


def test_correlate_metrics_constant_scores():
    spec = GeneratorSpec("entangled", {"level": 0.0, "K": 3}, seed=50, n=400)
    with pytest.raises(NotComputableError):
        correlate_metrics([spec] * 5, metrics=["mig", "3charm"])


def test_correlate_metrics_drops_incomputable_with_reason():
    rng = np.random.default_rng(2)

    def make_dataset(seed):
        gen = np.random.default_rng(seed)
        z1 = np.full(400, 1.0)  # constant factor: zero entropy kills mig
        z2 = gen.uniform(-1, 1, 400)
        return RepresentationDataset(
            (FactorColumn("z1", z1), FactorColumn("z2", z2)),
            (LatentColumn("c1", z2 + 0.01 * gen.standard_normal(400)),
             LatentColumn("c2", gen.standard_normal(400)),
             LatentColumn("c3", 0.5 * z2 + gen.standard_normal(400))),
        )

    population = [make_dataset(s) for s in range(5)]
    matrix, pop = correlate_metrics(population, metrics=["mig", "sap", "3charm"])
    assert "mig" in pop.dropped and "entropy" in pop.dropped["mig"]
    assert pop.metric_labels == ["sap", "3charm"]
    assert matrix.shape == (2, 2)


# --- compare -----------------------------------------------------------------


def test_compare_identical_inputs_no_preference():
    m, _ = synth.gen_comparison_matrices("mig_vs_3charm")
    report = compare(m, m, metrics=["mig", "3charm", "dci"])
    assert all(p is None for p in report.preferred.values())
    assert report.disagreements == []


def test_compare_mig_vs_3charm_directions():
    a, b = synth.gen_comparison_matrices("mig_vs_3charm")
    report = compare(a, b, metrics=["mig", "3charm"])
    assert report.preferred["mig"] == "b"
    assert report.preferred["3charm"] == "a"
    assert ("mig", "3charm") in report.disagreements
    # frozen from the constructed matrices
    assert report.scores["mig"] == (pytest.approx(0.05), pytest.approx(0.5))
    assert report.scores["3charm"] == (pytest.approx(1.0), pytest.approx(0.5))


def test_compare_dci_vs_3charm_directions():
    a, b = synth.gen_comparison_matrices("dci_vs_3charm")
    report = compare(a, b, metrics=["3charm", "dci"])
    assert report.preferred["dci"] == "b"
    assert report.preferred["3charm"] == "a"
    assert ("3charm", "dci") in report.disagreements
    assert report.scores["dci"] == (pytest.approx(0.3708, abs=1e-3), pytest.approx(0.7501, abs=1e-3))
    assert report.scores["3charm"] == (pytest.approx(0.65), pytest.approx(0.5))


def test_compare_rejects_dataset_metric_on_matrix():
    a, b = synth.gen_comparison_matrices("mig_vs_3charm")
    with pytest.raises(NotComputableError) as err:
        compare(a, b, metrics=["sap"])
    assert "sap" in str(err.value)


def test_compare_datasets():
    d1 = synth.gen_disentangled(3, n=1500, seed=1)
    d2 = synth.gen_entangled_family(1.0, n_factors=3, n=1500, seed=1)
    report = compare(d1, d2, metrics=["mig", "3charm"], labels=("clean", "mixed"))
    assert report.preferred["mig"] == "clean"
    assert report.preferred["3charm"] == "clean"
    assert report.disagreements == []
