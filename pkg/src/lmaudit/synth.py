"""Seedable synthetic datasets with known demographic effects.

Responses follow a log-scale linear model:

    response = exp(baseline + sum(factor effects) + sum(coef * g(covariate))
                   + noise_sigma * z)

so the true Box-Cox exponent is 0 and injected effects are exactly
recoverable on the log scale.  Draws come from the portable ``Pcg32``
generator in a documented column-major order: for each factor in declared
order, n category draws; then for each covariate in declared order, n value
draws; finally n noise draws.  Identical seeds reproduce identical datasets
on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Pcg32
from .data import AuditDataset, AuditRecord, FactorTaxonomy, TAXONOMY_PRESETS
from .errors import ConfigError
from .linmod import COVARIATE_TRANSFORMS

__all__ = [
    "FactorSim",
    "CovariateSim",
    "SyntheticSpec",
    "GroundTruth",
    "generate",
    "margin_preset",
    "MARGIN_PRESETS",
]


@dataclass(frozen=True)
class FactorSim:
    """Sampling margins and log-scale effects for one synthetic factor."""

    taxonomy: FactorTaxonomy
    probabilities: tuple[float, ...]
    effects: tuple[float, ...]

    def __post_init__(self):
        k = len(self.taxonomy.levels)
        if len(self.probabilities) != k or len(self.effects) != k:
            raise ConfigError(
                f"factor {self.taxonomy.name!r}: probabilities and effects must "
                f"match the {k} taxonomy levels"
            )
        if any(p < 0.0 for p in self.probabilities):
            raise ConfigError(f"factor {self.taxonomy.name!r}: negative probability")
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise ConfigError(
                f"factor {self.taxonomy.name!r}: probabilities sum to "
                f"{sum(self.probabilities)!r}, expected 1"
            )


@dataclass(frozen=True)
class CovariateSim:
    """Sampling law and log-scale coefficient for one synthetic covariate.

    Kinds: ``folded_normal`` (params: scale) gives |scale * z|;
    ``log_uniform`` (params: lo, hi) is uniform on the log scale.  The
    coefficient multiplies ``effect_transform`` of the value, so a model
    term like 1/height can be made exactly correctly specified.
    """

    name: str
    kind: str
    params: tuple[float, ...]
    coefficient: float = 0.0
    effect_transform: str = "identity"

    def __post_init__(self):
        if self.kind == "folded_normal":
            if len(self.params) != 1 or self.params[0] <= 0.0:
                raise ConfigError(f"covariate {self.name!r}: folded_normal needs one positive scale")
        elif self.kind == "log_uniform":
            if len(self.params) != 2 or not (0.0 < self.params[0] < self.params[1]):
                raise ConfigError(f"covariate {self.name!r}: log_uniform needs 0 < lo < hi")
        else:
            raise ConfigError(f"covariate {self.name!r}: unknown kind {self.kind!r}")
        if self.effect_transform not in COVARIATE_TRANSFORMS:
            raise ConfigError(
                f"covariate {self.name!r}: unknown effect_transform {self.effect_transform!r}"
            )


@dataclass(frozen=True)
class SyntheticSpec:
    """Complete recipe for one synthetic dataset."""

    seed: int
    n: int
    baseline: float
    noise_sigma: float
    factors: tuple[FactorSim, ...]
    covariates: tuple[CovariateSim, ...] = ()
    stream: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"need n >= 1 records, got {self.n}")
        if self.noise_sigma < 0.0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma!r}")
        names = [f.taxonomy.name for f in self.factors] + [c.name for c in self.covariates]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate synthetic column names: {names}")


@dataclass(frozen=True)
class GroundTruth:
    """The injected parameters, for comparing recovered estimates against."""

    seed: int
    n: int
    baseline: float
    noise_sigma: float
    factor_effects: tuple[tuple[str, tuple[tuple[str, float], ...]], ...]
    covariate_coefficients: tuple[tuple[str, float, str], ...]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n": self.n,
            "baseline": self.baseline,
            "noise_sigma": self.noise_sigma,
            "factor_effects": {
                name: {level: effect for level, effect in levels}
                for name, levels in self.factor_effects
            },
            "covariate_coefficients": {
                name: {"coefficient": coef, "effect_transform": transform}
                for name, coef, transform in self.covariate_coefficients
            },
        }


def _categorical(cum: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cum, uniforms, side="right")
    return np.minimum(idx, cum.shape[0] - 1)


def generate(spec: SyntheticSpec) -> tuple[AuditDataset, GroundTruth]:
    """Generate a dataset and its ground truth from a synthetic recipe."""
    rng = Pcg32(spec.seed, spec.stream)
    n = spec.n

    level_idx: dict[str, np.ndarray] = {}
    for fac in spec.factors:
        cum = np.cumsum(np.asarray(fac.probabilities, dtype=float))
        level_idx[fac.taxonomy.name] = _categorical(cum, rng.uniforms(n))

    cov_values: dict[str, np.ndarray] = {}
    for cov in spec.covariates:
        if cov.kind == "folded_normal":
            scale = cov.params[0]
            cov_values[cov.name] = np.abs(scale * rng.normals(n))
        else:  # log_uniform
            lo, hi = cov.params
            u = rng.uniforms(n)
            cov_values[cov.name] = np.exp(math.log(lo) + u * (math.log(hi) - math.log(lo)))

    noise = rng.normals(n)

    log_response = np.full(n, spec.baseline, dtype=float)
    for fac in spec.factors:
        effects = np.asarray(fac.effects, dtype=float)
        log_response += effects[level_idx[fac.taxonomy.name]]
    for cov in spec.covariates:
        values = cov_values[cov.name]
        contrib = 1.0 / values if cov.effect_transform == "reciprocal" else values
        log_response += cov.coefficient * contrib
    log_response += spec.noise_sigma * noise
    response = np.exp(log_response)

    width = max(6, len(str(n - 1)))
    records = []
    for i in range(n):
        factors = {
            fac.taxonomy.name: fac.taxonomy.levels[int(level_idx[fac.taxonomy.name][i])]
            for fac in spec.factors
        }
        covariates = {cov.name: float(cov_values[cov.name][i]) for cov in spec.covariates}
        records.append(
            AuditRecord(
                sample_id=f"s{i:0{width}d}",
                factors=factors,
                covariates=covariates,
                error=float(response[i]),
            )
        )

    dataset = AuditDataset(
        taxonomies=tuple(fac.taxonomy for fac in spec.factors),
        covariate_names=tuple(cov.name for cov in spec.covariates),
        records=tuple(records),
    )
    truth = GroundTruth(
        seed=spec.seed,
        n=spec.n,
        baseline=spec.baseline,
        noise_sigma=spec.noise_sigma,
        factor_effects=tuple(
            (fac.taxonomy.name, tuple(zip(fac.taxonomy.levels, fac.effects)))
            for fac in spec.factors
        ),
        covariate_coefficients=tuple(
            (cov.name, cov.coefficient, cov.effect_transform) for cov in spec.covariates
        ),
    )
    return dataset, truth


def _gender2(levels: tuple[str, str]) -> FactorTaxonomy:
    return FactorTaxonomy("gender", levels)


# Demographic margins of two common face-annotation corpora, for building
# realistically imbalanced synthetic populations.  Counts normalize to 1.
MARGIN_PRESETS: dict[str, tuple[tuple[FactorTaxonomy, tuple[int, ...]], ...]] = {
    # RAF-DB style margins (cross-labelled test partition, unsure gender removed).
    "rafdb": (
        (_gender2(("female", "male")), (10170, 8013)),
        (TAXONOMY_PRESETS["rafdb_race"], (14232, 1298, 2653)),
        (TAXONOMY_PRESETS["rafdb_age"], (924, 3153, 10499, 3053, 554)),
    ),
    # WFLW train partition margins under the FairFace taxonomy, ages merged.
    "wflw_train": (
        (TAXONOMY_PRESETS["fairface_gender"], (3887, 3613)),
        (TAXONOMY_PRESETS["fairface_race"], (5084, 879, 989, 548)),
        (TAXONOMY_PRESETS["age5"], (63, 1501, 4024, 1869, 43)),
    ),
}


def margin_preset(name: str) -> tuple[tuple[FactorTaxonomy, tuple[float, ...]], ...]:
    """Taxonomies with normalized marginal probabilities for a named corpus."""
    try:
        entries = MARGIN_PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown margin preset {name!r} (expected one of {sorted(MARGIN_PRESETS)})"
        ) from None
    out = []
    for taxonomy, counts in entries:
        total = float(sum(counts))
        out.append((taxonomy, tuple(c / total for c in counts)))
    return tuple(out)
