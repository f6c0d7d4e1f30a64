"""Core data types: factor taxonomies, audit records, and label aggregation.

Taxonomies are declared, never hardcoded into the engine; presets for the
common face datasets (RAF-DB annotations, FairFace attribute categories,
WFLW binary attributes) ship in ``TAXONOMY_PRESETS`` for convenience.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import DataError

__all__ = [
    "FactorTaxonomy",
    "AuditRecord",
    "AuditDataset",
    "EnsemblePrediction",
    "TAXONOMY_PRESETS",
    "AGE9_TO_AGE5",
    "merge_age_buckets",
    "aggregate_ensemble",
]


@dataclass(frozen=True)
class FactorTaxonomy:
    """Closed set of category labels for one factor, in display order.

    ``ordinal=True`` marks taxonomies whose level order is meaningful
    (age buckets); the order is then used for median-style tie-breaking.
    """

    name: str
    levels: tuple[str, ...]
    ordinal: bool = False

    def __post_init__(self):
        if not self.name:
            raise DataError("taxonomy name must be non-empty")
        if len(self.levels) < 2:
            raise DataError(f"taxonomy {self.name!r} needs at least two levels")
        if len(set(self.levels)) != len(self.levels):
            raise DataError(f"taxonomy {self.name!r} has duplicate levels")
        if any(not lvl for lvl in self.levels):
            raise DataError(f"taxonomy {self.name!r} has an empty level label")

    def index(self, level: str) -> int:
        try:
            return self.levels.index(level)
        except ValueError:
            raise DataError(
                f"level {level!r} is not in taxonomy {self.name!r} "
                f"(expected one of {list(self.levels)})"
            ) from None


@dataclass(frozen=True)
class AuditRecord:
    """One observation: identity, factor levels, covariates, and a response.

    The response is either a precomputed non-negative error value or a pair
    of matched landmark sets from which a normalized error is computed
    downstream; both may be absent for label-only workflows.
    """

    sample_id: str
    factors: Mapping[str, str]
    covariates: Mapping[str, float] = field(default_factory=dict)
    error: float | None = None
    gt_points: tuple[tuple[float, float], ...] | None = None
    pred_points: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if not self.sample_id:
            raise DataError("record sample_id must be non-empty")
        if self.error is not None and not (self.error >= 0.0):
            raise DataError(
                f"record {self.sample_id!r}: precomputed error must be >= 0, got {self.error!r}"
            )
        if (self.gt_points is None) != (self.pred_points is None):
            raise DataError(
                f"record {self.sample_id!r}: landmark sets must come in matched pairs"
            )
        if self.gt_points is not None:
            if len(self.gt_points) != len(self.pred_points) or len(self.gt_points) < 1:
                raise DataError(
                    f"record {self.sample_id!r}: landmark sets must have equal size >= 1"
                )


@dataclass(frozen=True)
class AuditDataset:
    """Immutable collection of records with their declared taxonomies."""

    taxonomies: tuple[FactorTaxonomy, ...]
    covariate_names: tuple[str, ...]
    records: tuple[AuditRecord, ...]

    def __post_init__(self):
        names = [t.name for t in self.taxonomies]
        if len(set(names)) != len(names):
            raise DataError("duplicate taxonomy names in dataset")
        if len(set(self.covariate_names)) != len(self.covariate_names):
            raise DataError("duplicate covariate names in dataset")
        overlap = set(names) & set(self.covariate_names)
        if overlap:
            raise DataError(f"names declared as both factor and covariate: {sorted(overlap)}")

    @property
    def n(self) -> int:
        return len(self.records)

    def taxonomy(self, name: str) -> FactorTaxonomy:
        for t in self.taxonomies:
            if t.name == name:
                return t
        raise DataError(f"no taxonomy named {name!r} in dataset")

    def factor_values(self, name: str) -> list[str]:
        self.taxonomy(name)
        return [r.factors[name] for r in self.records]

    def covariate_values(self, name: str) -> list[float]:
        if name not in self.covariate_names:
            raise DataError(f"no covariate named {name!r} in dataset")
        return [r.covariates[name] for r in self.records]


@dataclass(frozen=True)
class EnsemblePrediction:
    """Per-sample demographic predictions from a three-model ensemble.

    Gender and age carry one vote per model; race comes from the first
    model only.
    """

    sample_id: str
    genders: tuple[str, str, str]
    ages: tuple[str, str, str]
    race: str


# FairFace-style 9-bucket ages collapse onto 5 audit buckets; the 3-9
# bucket joins the school-age group rather than the infant group.
AGE9_TO_AGE5: dict[str, str] = {
    "0-2": "0-2",
    "3-9": "3-19",
    "10-19": "3-19",
    "20-29": "20-39",
    "30-39": "20-39",
    "40-49": "40-69",
    "50-59": "40-69",
    "60-69": "40-69",
    "70+": "70+",
}


def merge_age_buckets(level: str) -> str:
    """Collapse a fine age bucket onto the 5-bucket audit taxonomy."""
    try:
        return AGE9_TO_AGE5[level]
    except KeyError:
        raise DataError(
            f"unknown age bucket {level!r} (expected one of {list(AGE9_TO_AGE5)})"
        ) from None


TAXONOMY_PRESETS: dict[str, FactorTaxonomy] = {
    "rafdb_gender": FactorTaxonomy("gender", ("male", "female", "unsure")),
    "rafdb_race": FactorTaxonomy("race", ("Caucasian", "African-American", "Asian")),
    "rafdb_age": FactorTaxonomy("age", ("0-3", "4-19", "20-39", "40-69", "70+"), ordinal=True),
    "rafdb_expression": FactorTaxonomy(
        "expression",
        ("surprise", "fear", "disgust", "happiness", "sadness", "anger", "neutral"),
    ),
    "fairface_gender": FactorTaxonomy("gender", ("Male", "Female")),
    "fairface_race": FactorTaxonomy("race", ("White", "Black", "Asian", "Indian")),
    "fairface_age9": FactorTaxonomy(
        "age",
        ("0-2", "3-9", "10-19", "20-29", "30-39", "40-49", "50-59", "60-69", "70+"),
        ordinal=True,
    ),
    "age5": FactorTaxonomy("age", ("0-2", "3-19", "20-39", "40-69", "70+"), ordinal=True),
    "wflw_pose": FactorTaxonomy("pose", ("small", "large")),
    "wflw_expression": FactorTaxonomy("expression", ("neutral", "exaggerated")),
    "wflw_illumination": FactorTaxonomy("illumination", ("normal", "extreme")),
    "wflw_makeup": FactorTaxonomy("makeup", ("no", "yes")),
    "wflw_occlusion": FactorTaxonomy("occlusion", ("no", "yes")),
    "wflw_blur": FactorTaxonomy("blur", ("clear", "blurry")),
}


def aggregate_ensemble(
    pred: EnsemblePrediction,
    gender_taxonomy: FactorTaxonomy | None = None,
    age_taxonomy: FactorTaxonomy | None = None,
) -> dict[str, str]:
    """Combine a three-model prediction into final demographic labels.

    Race is taken from the first model.  Gender is the majority of the
    three votes.  Age is the agreed bucket when at least two models agree;
    otherwise the middle vote once the three are ordered by the (ordinal)
    age taxonomy.  Returns ``{"gender", "race", "age"}``.
    """
    gender_tax = gender_taxonomy or TAXONOMY_PRESETS["fairface_gender"]
    age_tax = age_taxonomy or TAXONOMY_PRESETS["fairface_age9"]
    if not age_tax.ordinal:
        raise DataError(f"age taxonomy {age_tax.name!r} must be ordinal for median voting")

    for g in pred.genders:
        gender_tax.index(g)
    counts: dict[str, int] = {}
    for g in pred.genders:
        counts[g] = counts.get(g, 0) + 1
    gender = max(counts, key=lambda lvl: counts[lvl])

    # The middle of the ordered votes is the agreed bucket whenever at
    # least two models agree, and the median bucket when all three differ.
    idx = sorted(age_tax.index(a) for a in pred.ages)
    age = age_tax.levels[idx[1]]
    return {"gender": gender, "race": pred.race, "age": age}
