"""Seeded generators: stress-test oracles that fool the interventional
metrics, nonlinear constructions that fool SAP, the fixed DCI matrices,
the two-parameter informativeness family, and sanity datasets for
property checks and population studies.

All generators are bit-reproducible from (params, seed); sampling uses
numpy's PCG64 generator throughout.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DEFAULT_SEED,
    FactorColumn,
    ImportanceMatrix,
    InformativenessMatrix,
    LatentColumn,
    RepresentationDataset,
    RepresentationOracle,
)

# Latent k copies factor j with probability BETAVAE_MIX[k, j], independently
# per sample and per latent.
BETAVAE_MIX = np.array([
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
])

# Deterministic linear mixing: c = z @ FACTORVAE_MIX.T over standard normals.
FACTORVAE_MIX = np.array([
    [0.5, 0.4, 0.5],
    [0.4, 0.5, 0.5],
    [0.4, 0.4, 0.6],
])


def _uniform01(rng, n):
    return rng.uniform(0.0, 1.0, size=(n, 3))


def _standard_normal3(rng, n):
    return rng.standard_normal(size=(n, 3))


def gen_betavae_counterexample(n=10000, seed=DEFAULT_SEED):
    """Oracle whose latents are random per-sample copies of the factors.

    Three U[0,1] factors; latent k equals factor j with probability
    BETAVAE_MIX[k, j], drawn independently for every sample and latent.
    Entangled by construction, yet the fixed-factor difference signature
    stays almost perfectly classifiable.
    """

    def encode(rng, z):
        n_rows = z.shape[0]
        c = np.empty((n_rows, 3))
        for k in range(3):
            choice = rng.choice(3, size=n_rows, p=BETAVAE_MIX[k])
            c[:, k] = z[np.arange(n_rows), choice]
        return c

    return RepresentationOracle(
        3, 3, _uniform01, encode, seed=seed,
        name="betavae-counterexample", params={"mix": BETAVAE_MIX.tolist()}, default_n=n,
    )


def gen_factorvae_counterexample(n=10000, seed=DEFAULT_SEED):
    """Oracle with fully entangled deterministic linear mixing of three
    standard-normal factors; every latent depends on every factor, yet the
    lowest-variance-dimension signature identifies the fixed factor."""

    def encode(rng, z):
        return z @ FACTORVAE_MIX.T

    return RepresentationOracle(
        3, 3, _standard_normal3, encode, seed=seed,
        name="factorvae-counterexample", params={"mix": FACTORVAE_MIX.tolist()}, default_n=n,
    )


def gen_identity_oracle(n_factors=3, n=10000, seed=DEFAULT_SEED):
    """Perfectly disentangled oracle: c = z over U[0,1] factors."""

    def sample_factors(rng, m):
        return rng.uniform(0.0, 1.0, size=(m, n_factors))

    def encode(rng, z):
        return z.copy()

    return RepresentationOracle(
        n_factors, n_factors, sample_factors, encode, seed=seed,
        name="identity", params={"n_factors": n_factors}, default_n=n,
    )


def gen_noise_oracle(n_factors=3, n_latents=3, n=10000, seed=DEFAULT_SEED):
    """Chance-level baseline: latents are Gaussian noise independent of the
    U[0,1] factors."""

    def sample_factors(rng, m):
        return rng.uniform(0.0, 1.0, size=(m, n_factors))

    def encode(rng, z):
        return rng.standard_normal(size=(z.shape[0], n_latents))

    return RepresentationOracle(
        n_factors, n_latents, sample_factors, encode, seed=seed,
        name="noise", params={"n_factors": n_factors, "n_latents": n_latents}, default_n=n,
    )


def _dataset(z, c, factor_names=None, latent_names=None):
    factors = tuple(
        FactorColumn(factor_names[j] if factor_names else f"z{j + 1}", z[:, j])
        for j in range(z.shape[1])
    )
    latents = tuple(
        LatentColumn(latent_names[i] if latent_names else f"c{i + 1}", c[:, i])
        for i in range(c.shape[1])
    )
    return RepresentationDataset(factors, latents)


def gen_sap_nonlinear(n=10000, seed=DEFAULT_SEED):
    """Monotone but strongly nonlinear capture: two U[-1,1] factors with
    c1 = z1^15, c2 = z2^15. Information is fully preserved, linear
    predictability is not."""
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1.0, 1.0, size=(n, 2))
    c = z**15
    return _dataset(z, c)


def gen_sap_duplicate(n=10000, seed=DEFAULT_SEED):
    """Redundant nonlinear carrier: three latents over two U[-1,1] factors
    with c1 = z1, c2 = z1^25 + z2^25, c3 = z2. Each factor moves two
    latents, yet linear per-latent gaps stay large."""
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1.0, 1.0, size=(n, 2))
    c = np.column_stack([z[:, 0], z[:, 0] ** 25 + z[:, 1] ** 25, z[:, 1]])
    return _dataset(z, c)


DCI_MATRIX_CASES = ("eleven_factor", "two_factor")


def gen_dci_matrix(case):
    """The two fixed importance matrices with known DCI scores:
    ``eleven_factor`` (11x11, diagonal 0.8, off-diagonal 0.02 -> 0.600) and
    ``two_factor`` (rows (1, 0) and (0.01, 0.09) -> 0.957)."""
    if case == "eleven_factor":
        p = np.full((11, 11), 0.02)
        np.fill_diagonal(p, 0.8)
        return ImportanceMatrix(p)
    if case == "two_factor":
        return ImportanceMatrix(np.array([[1.0, 0.0], [0.01, 0.09]]))
    raise ValueError(f"unknown DCI matrix case {case!r} (known: {', '.join(DCI_MATRIX_CASES)})")


def gen_parametric_matrix(eps, eps1):
    """Two-factor, three-latent informativeness family with unit factor
    entropies: latent 1 carries factor 1 at strength eps, latent 3 carries
    factor 2 at eps, latent 2 carries both factors at strength eps1.

    Closed forms: 3CharM = eps, MIG = |eps - eps1|, and DCI on the same
    matrix equals eps / (eps + eps1) when eps + eps1 > 0.
    """
    if not (0.0 <= eps <= 1.0 and 0.0 <= eps1 <= 1.0):
        raise ValueError("eps and eps1 must lie in [0, 1]")
    values = np.array([
        [eps, 0.0],
        [eps1, eps1],
        [0.0, eps],
    ])
    return InformativenessMatrix(values, np.ones(2), provenance="external")


def gen_disentangled(n_factors, n=10000, noise_std=0.0, map_kind="linear",
                     seed=DEFAULT_SEED, return_info=False):
    """Disentangled dataset: c_i = f(z_perm(i)) + noise with an invertible
    per-dimension map (linear or cubic) over U[-1,1] factors and a seeded
    permutation. ``return_info=True`` also returns the ground truth."""
    if n_factors < 2:
        raise ValueError("need at least 2 factors")
    if map_kind not in ("linear", "cubic"):
        raise ValueError(f"unknown map kind {map_kind!r}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_factors)
    z = rng.uniform(-1.0, 1.0, size=(n, n_factors))
    mapped = z[:, perm]
    if map_kind == "cubic":
        mapped = mapped**3
    c = mapped + noise_std * rng.standard_normal(size=mapped.shape) if noise_std > 0 else mapped
    dataset = _dataset(z, c)
    if return_info:
        return dataset, {"permutation": perm.tolist(), "map_kind": map_kind, "noise_std": noise_std}
    return dataset


def _random_orthogonal(n_dims, rng):
    q, r = np.linalg.qr(rng.standard_normal(size=(n_dims, n_dims)))
    return q * np.sign(np.diag(r))


def gen_entangled_family(level, n_factors=4, n=10000, seed=DEFAULT_SEED, return_info=False):
    """One-knob entanglement family: mixes the permuted identity map
    (level 0) with a dense seeded random orthogonal matrix (level 1);
    c = z @ M(level)^T over U[-1,1] factors."""
    if not 0.0 <= level <= 1.0:
        raise ValueError("level must lie in [0, 1]")
    if n_factors < 2:
        raise ValueError("need at least 2 factors")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_factors)
    p = np.eye(n_factors)[perm]
    q = _random_orthogonal(n_factors, rng)
    mixing = (1.0 - level) * p + level * q
    z = rng.uniform(-1.0, 1.0, size=(n, n_factors))
    c = z @ mixing.T
    dataset = _dataset(z, c)
    if return_info:
        return dataset, {"permutation": perm.tolist(), "mixing": mixing.tolist(), "level": level}
    return dataset


COMPARISON_CASES = ("mig_vs_3charm", "dci_vs_3charm")


def gen_comparison_matrices(case):
    """Fixed matrix pairs on which two metrics rank the representations in
    opposite orders.

    ``mig_vs_3charm``: A has one perfect carrier per factor plus a nearly
    identical redundant copy (gap collapses, assignments do not); B has
    compact but cross-contaminated carriers. MIG prefers B, 3CharM prefers A.

    ``dci_vs_3charm``: A has a clean-but-imperfect carrier per factor; B has
    several one-hot latents all on the same factor plus one fully mixed row,
    leaving the other factor uncovered. DCI prefers B, 3CharM prefers A.
    """
    if case == "mig_vs_3charm":
        a = InformativenessMatrix(
            np.array([
                [1.0, 0.0],
                [0.95, 0.0],
                [0.0, 1.0],
                [0.0, 0.95],
            ]),
            np.ones(2),
            provenance="external",
        )
        b = InformativenessMatrix(
            np.array([
                [0.8, 0.3],
                [0.3, 0.8],
            ]),
            np.ones(2),
            provenance="external",
        )
        return a, b
    if case == "dci_vs_3charm":
        a = InformativenessMatrix(
            np.array([
                [0.8, 0.15],
                [0.15, 0.8],
            ]),
            np.ones(2),
            provenance="external",
        )
        b = InformativenessMatrix(
            np.array([
                [1.0, 0.0],
                [1.0, 0.0],
                [1.0, 0.0],
                [0.51, 0.49],
            ]),
            np.ones(2),
            provenance="external",
        )
        return a, b
    raise ValueError(f"unknown comparison case {case!r} (known: {', '.join(COMPARISON_CASES)})")


# ---------------------------------------------------------------------------
# Generator registry (the `gen` CLI subcommand and population builders)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorSpec:
    """Name + parameters + (seed, n) identifying one generated object."""

    name: str
    params: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    n: int = 10000

    def label(self):
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.name}({inner})#seed={self.seed},n={self.n}"


def parse_spec_string(text, seed=DEFAULT_SEED, n=10000):
    """Parse ``name:key=value,key=value`` into a GeneratorSpec; ``seed`` and
    ``n`` keys override the defaults."""
    name, _, tail = text.partition(":")
    params = {}
    if tail:
        for item in tail.split(","):
            if "=" not in item:
                raise ValueError(f"bad generator parameter {item!r} (expected key=value)")
            key, value = item.split("=", 1)
            params[key.strip()] = float(value) if "." in value or "e" in value.lower() else int(value)
    seed = int(params.pop("seed", seed))
    n = int(params.pop("n", n))
    if name not in GENERATORS:
        raise ValueError(f"unknown generator {name!r} (known: {', '.join(sorted(GENERATORS))})")
    return GeneratorSpec(name=name, params=params, seed=seed, n=n)


def _build_disentangled(spec):
    return gen_disentangled(
        n_factors=int(spec.params.get("K", 4)),
        n=spec.n,
        noise_std=float(spec.params.get("noise_std", 0.0)),
        map_kind={0: "linear", 1: "cubic"}.get(spec.params.get("cubic", 0), "linear"),
        seed=spec.seed,
        return_info=True,
    )


def _build_entangled(spec):
    return gen_entangled_family(
        level=float(spec.params.get("level", 0.5)),
        n_factors=int(spec.params.get("K", 4)),
        n=spec.n,
        seed=spec.seed,
        return_info=True,
    )


GENERATORS = {
    "betavae-counterexample": lambda spec: (gen_betavae_counterexample(spec.n, spec.seed),
                                            {"mix": BETAVAE_MIX.tolist()}),
    "factorvae-counterexample": lambda spec: (gen_factorvae_counterexample(spec.n, spec.seed),
                                              {"mix": FACTORVAE_MIX.tolist()}),
    "identity": lambda spec: (gen_identity_oracle(int(spec.params.get("K", 3)), spec.n, spec.seed), {}),
    "noise": lambda spec: (gen_noise_oracle(int(spec.params.get("K", 3)),
                                            int(spec.params.get("N", 3)), spec.n, spec.seed), {}),
    "sap-nonlinear": lambda spec: (gen_sap_nonlinear(spec.n, spec.seed), {}),
    "sap-duplicate": lambda spec: (gen_sap_duplicate(spec.n, spec.seed), {}),
    "disentangled": _build_disentangled,
    "entangled": _build_entangled,
}

ORACLE_GENERATOR_NAMES = ("betavae-counterexample", "factorvae-counterexample", "identity", "noise")


def build(spec):
    """Instantiate a GeneratorSpec; returns (object, ground-truth metadata)."""
    return GENERATORS[spec.name](spec)


def dataset_from_spec(spec):
    """Like :func:`build` but always materializes a dataset (oracles are
    sampled at the spec's n)."""
    obj, info = build(spec)
    if isinstance(obj, RepresentationOracle):
        return obj.sample_dataset(spec.n), info
    return obj, info
