"""End-to-end audit pipeline: ingest, filter, transform, fit, summarize.

``run_audit`` is the single entry point behind the ``audit`` subcommand.
It enforces one bookkeeping invariant throughout:

    rows_in == rows_kept + rows_filtered + rows_errored

so every input row is accounted for in the provenance block of the report.
Models are fitted concurrently (they share the immutable dataset and
response vector); results are collected in declared order, so the report
is deterministic regardless of scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .anova import AnovaTable, type3_anova
from .config import AuditConfig, DERIVED_HEADPOSE, config_sha256
from .data import AuditDataset
from .emmeans import EmmSummary, summarize_emmeans
from .errors import ConfigError, DataError
from .geometry import frontal_deviations
from .ingest import ParseStats, parse_records
from .linmod import (
    ModelSpec,
    ResidualDiagnostics,
    assemble_response,
    build_design,
    fit_ols,
    residual_diagnostics,
    transform_covariate,
)
from .transforms import BoxCoxTransform, fit_boxcox_lambda, pearson_correlation

__all__ = [
    "FilterStep",
    "Provenance",
    "ModelReport",
    "AuditReport",
    "apply_filters",
    "add_derived_headpose",
    "run_audit",
]


@dataclass(frozen=True)
class FilterStep:
    description: str
    rows_dropped: int


@dataclass(frozen=True)
class Provenance:
    """Everything needed to identify a run without embedding file paths."""

    config_sha256: str
    rows_in: int
    rows_kept: int
    rows_filtered: int
    rows_errored: int
    filter_steps: tuple[FilterStep, ...]
    response_mode: str
    response_offset: float
    lambda_mode: str  # "shared" or "per-model"
    lambda_source: str  # model whose design profiled the shared exponent
    alpha: float


@dataclass(frozen=True)
class ModelReport:
    name: str
    n: int
    p: int
    lam: float
    r_squared: float
    diagnostics: ResidualDiagnostics
    correlations: tuple[tuple[str, float], ...]  # (term label, pearson r)
    anova: AnovaTable
    emmeans: tuple[EmmSummary, ...]


@dataclass(frozen=True)
class AuditReport:
    provenance: Provenance
    models: tuple[ModelReport, ...]

    def model(self, name: str) -> ModelReport:
        for m in self.models:
            if m.name == name:
                return m
        raise KeyError(name)


def apply_filters(dataset: AuditDataset, filters) -> tuple[AuditDataset, tuple[FilterStep, ...]]:
    """Drop rows by factor value, recording how many each step removed."""
    records = dataset.records
    steps = []
    for f in filters:
        taxonomy = dataset.taxonomy(f.column)
        unknown = (set(f.drop) | set(f.keep)) - set(taxonomy.levels)
        if unknown:
            raise ConfigError(
                f"filter on {f.column!r} names unknown levels {sorted(unknown)}"
            )
        kept = tuple(r for r in records if f.admits(r.factors[f.column]))
        steps.append(FilterStep(f.describe(), len(records) - len(kept)))
        records = kept
    return replace(dataset, records=records), tuple(steps)


def add_derived_headpose(dataset: AuditDataset) -> AuditDataset:
    """Attach the angular deviation from frontal pose as a covariate."""
    pitch = np.asarray(dataset.covariate_values("pitch_deg"), dtype=float)
    yaw = np.asarray(dataset.covariate_values("yaw_deg"), dtype=float)
    roll = np.asarray(dataset.covariate_values("roll_deg"), dtype=float)
    deviations = frontal_deviations(pitch, yaw, roll)
    records = tuple(
        replace(rec, covariates={**dict(rec.covariates), DERIVED_HEADPOSE: float(dev)})
        for rec, dev in zip(dataset.records, deviations)
    )
    return replace(
        dataset,
        covariate_names=dataset.covariate_names + (DERIVED_HEADPOSE,),
        records=records,
    )


def _fit_model(
    model: ModelSpec,
    dataset: AuditDataset,
    y: np.ndarray,
    config: AuditConfig,
    shared: BoxCoxTransform | None,
) -> ModelReport:
    design = build_design(dataset, model)
    transform = shared
    if transform is None:
        transform = fit_boxcox_lambda(
            y, design.matrix,
            interval=config.boxcox.interval,
            tol=config.boxcox.tolerance,
        )
    z = np.asarray(transform.apply(y), dtype=float)
    fit = fit_ols(design, z)
    table = type3_anova(fit)
    diagnostics = residual_diagnostics(fit)

    correlations = tuple(
        (info.label, pearson_correlation(design.matrix[:, info.start], z))
        for info in design.terms
        if info.spec.kind == "covariate"
    )

    overrides = None
    if config.covariate_fixing == "source-mean":
        # Fix each covariate at the transform of its source mean rather
        # than the mean of its transformed values (these differ for any
        # non-affine transform, e.g. reciprocals).
        overrides = {}
        for info in design.terms:
            if info.spec.kind != "covariate":
                continue
            raw_mean = float(np.mean(dataset.covariate_values(info.spec.name)))
            value = transform_covariate(
                np.array([raw_mean]), info.spec.transform, info.spec.name
            )
            overrides[info.label] = float(value[0])

    model_factors = set(model.factor_names())
    emmeans = tuple(
        summarize_emmeans(
            fit, factor,
            alpha=config.alpha,
            transform=transform,
            covariate_overrides=overrides,
        )
        for factor in config.emmeans_factors
        if factor in model_factors
    )

    return ModelReport(
        name=model.name,
        n=design.n,
        p=design.p,
        lam=transform.lam,
        r_squared=fit.r_squared,
        diagnostics=diagnostics,
        correlations=correlations,
        anova=table,
        emmeans=emmeans,
    )


def run_audit(config: AuditConfig, input_path: str | None = None) -> AuditReport:
    """Execute the configured audit and return the structured report."""
    path = input_path or config.input_path
    if path is None:
        raise ConfigError("no input dataset: set dataset.input or pass --input")

    stats = ParseStats()
    dataset = parse_records(path, config.schema, stats)

    dataset, steps = apply_filters(dataset, config.filters)
    if config.derive_headpose:
        dataset = add_derived_headpose(dataset)
    if dataset.n == 0:
        raise DataError("no records remain after filtering")

    y = assemble_response(
        dataset,
        mode=config.schema.response_mode,
        normalizer=config.response_normalizer,
        offset=config.response_offset,
    )

    # The exponent is profiled once, on the widest model, and shared; with
    # per_model=True every model re-profiles on its own design.
    largest = max(config.models, key=lambda m: len(m.terms))
    shared = None
    if not config.boxcox.per_model:
        shared_design = build_design(dataset, largest)
        shared = fit_boxcox_lambda(
            y, shared_design.matrix,
            interval=config.boxcox.interval,
            tol=config.boxcox.tolerance,
        )

    if len(config.models) == 1:
        reports = (_fit_model(config.models[0], dataset, y, config, shared),)
    else:
        with ThreadPoolExecutor(max_workers=min(len(config.models), 8)) as pool:
            reports = tuple(
                pool.map(lambda m: _fit_model(m, dataset, y, config, shared), config.models)
            )

    rows_filtered = sum(s.rows_dropped for s in steps)
    provenance = Provenance(
        config_sha256=config_sha256(config),
        rows_in=stats.rows_in,
        rows_kept=dataset.n,
        rows_filtered=rows_filtered,
        rows_errored=stats.rows_errored,
        filter_steps=steps,
        response_mode=config.schema.response_mode,
        response_offset=config.response_offset,
        lambda_mode="per-model" if config.boxcox.per_model else "shared",
        lambda_source="" if config.boxcox.per_model else largest.name,
        alpha=config.alpha,
    )
    assert provenance.rows_in == (
        provenance.rows_kept + provenance.rows_filtered + provenance.rows_errored
    ), "row accounting broke"

    return AuditReport(provenance=provenance, models=reports)
