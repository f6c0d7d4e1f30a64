"""Audit and simulation configuration documents.

Configs are YAML with nested keys; every field is validated into typed,
frozen structures up front so failures happen before any data is read.
CLI flags (``--input``, ``--alpha``, ``--format``, ``--out``) override the
corresponding document keys, and the provenance hash is computed over the
resolved configuration, not the raw file bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .data import FactorTaxonomy, TAXONOMY_PRESETS
from .errors import ConfigError
from .ingest import DatasetSchema, NORMALIZER_COLUMN, RESPONSE_COLUMN
from .linmod import COVARIATE_TRANSFORMS, ModelSpec, TermSpec
from .synth import CovariateSim, FactorSim, SyntheticSpec, margin_preset

__all__ = [
    "RowFilter",
    "BoxCoxSettings",
    "OutputSettings",
    "AuditConfig",
    "load_audit_config",
    "parse_audit_config",
    "load_synth_config",
    "parse_synth_config",
    "config_sha256",
]

RENDER_FORMATS = ("plain", "markdown", "delimited")
DERIVED_HEADPOSE = "headpose_dev"
_EULER_COLUMNS = ("pitch_deg", "yaw_deg", "roll_deg")
COVARIATE_FIXING_MODES = ("transformed-mean", "source-mean")


@dataclass(frozen=True)
class RowFilter:
    """Keep or drop rows by the value of one factor column."""

    column: str
    drop: tuple[str, ...] = ()
    keep: tuple[str, ...] = ()

    def __post_init__(self):
        if bool(self.drop) == bool(self.keep):
            raise ConfigError(
                f"filter on {self.column!r} must set exactly one of drop/keep"
            )

    def admits(self, value: str) -> bool:
        if self.drop:
            return value not in self.drop
        return value in self.keep

    def describe(self) -> str:
        if self.drop:
            return f"{self.column} drop {list(self.drop)}"
        return f"{self.column} keep {list(self.keep)}"


@dataclass(frozen=True)
class BoxCoxSettings:
    interval: tuple[float, float] = (-2.0, 3.0)
    tolerance: float = 1e-5
    per_model: bool = False

    def __post_init__(self):
        if not (self.interval[0] < self.interval[1]):
            raise ConfigError(f"box-cox interval {self.interval!r} is empty")
        if not (0.0 < self.tolerance < 1.0):
            raise ConfigError(f"box-cox tolerance {self.tolerance!r} out of range")


@dataclass(frozen=True)
class OutputSettings:
    directory: str = "."
    formats: tuple[str, ...] = ("plain",)

    def __post_init__(self):
        bad = [f for f in self.formats if f not in RENDER_FORMATS]
        if bad:
            raise ConfigError(f"unknown output formats {bad} (expected {RENDER_FORMATS})")
        if not self.formats:
            raise ConfigError("at least one output format is required")


@dataclass(frozen=True)
class AuditConfig:
    """Fully resolved audit configuration."""

    schema: DatasetSchema
    input_path: str | None
    response_offset: float
    response_normalizer: str
    derive_headpose: bool
    filters: tuple[RowFilter, ...]
    boxcox: BoxCoxSettings
    alpha: float
    models: tuple[ModelSpec, ...]
    emmeans_factors: tuple[str, ...]
    covariate_fixing: str
    output: OutputSettings

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.models:
            raise ConfigError("at least one model is required")
        names = [m.name for m in self.models]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate model names: {names}")
        if self.covariate_fixing not in COVARIATE_FIXING_MODES:
            raise ConfigError(
                f"unknown covariate_fixing {self.covariate_fixing!r} "
                f"(expected one of {COVARIATE_FIXING_MODES})"
            )

    def with_overrides(
        self,
        input_path: str | None = None,
        alpha: float | None = None,
        formats: tuple[str, ...] | None = None,
        out_dir: str | None = None,
    ) -> "AuditConfig":
        cfg = self
        if input_path is not None:
            cfg = replace(cfg, input_path=input_path)
        if alpha is not None:
            cfg = replace(cfg, alpha=alpha)
        output = cfg.output
        if formats is not None:
            output = replace(output, formats=formats)
        if out_dir is not None:
            output = replace(output, directory=out_dir)
        return replace(cfg, output=output)

    def canonical(self) -> dict:
        """Plain nested mapping of the analysis-defining settings, for hashing.

        File locations (input path, output directory) and rendering format
        choices are deliberately excluded: they say where an audit reads and
        writes, not what it computes, and reports must hash identically
        across machines that keep the data at different paths.
        """
        return {
            "dataset": {
                "delimiter": self.schema.delimiter,
                "id_column": self.schema.id_column,
                "on_bad_record": self.schema.on_bad_record,
                "response": {
                    "mode": self.schema.response_mode,
                    "column": self.schema.response_column,
                    "normalizer": self.response_normalizer,
                    "offset": self.response_offset,
                },
                "factors": [
                    {"name": t.name, "levels": list(t.levels), "ordinal": t.ordinal}
                    for t in self.schema.taxonomies
                ],
                "covariates": list(self.schema.covariates),
            },
            "derived": {"headpose_from_euler": self.derive_headpose},
            "filters": [
                {"column": f.column, "drop": list(f.drop), "keep": list(f.keep)}
                for f in self.filters
            ],
            "boxcox": {
                "interval": list(self.boxcox.interval),
                "tolerance": self.boxcox.tolerance,
                "per_model": self.boxcox.per_model,
            },
            "alpha": self.alpha,
            "models": [
                {
                    "name": m.name,
                    "terms": [
                        {"kind": t.kind, "name": t.name, "transform": t.transform}
                        for t in m.terms
                    ],
                }
                for m in self.models
            ],
            "emmeans": {
                "factors": list(self.emmeans_factors),
                "covariate_fixing": self.covariate_fixing,
            },
        }


def config_sha256(config: AuditConfig) -> str:
    blob = json.dumps(config.canonical(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _require_mapping(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(node).__name__}")
    return node


def _string(node, path: str) -> str:
    if not isinstance(node, str) or not node:
        raise ConfigError(f"{path}: expected a non-empty string, got {node!r}")
    return node


def _number(node, path: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {node!r}")
    return float(node)


def _string_list(node, path: str) -> tuple[str, ...]:
    if not isinstance(node, list) or not all(isinstance(x, str) for x in node):
        raise ConfigError(f"{path}: expected a list of strings, got {node!r}")
    return tuple(node)


def _parse_taxonomy(node, path: str) -> FactorTaxonomy:
    entry = _require_mapping(node, path)
    preset = entry.get("preset")
    if preset is not None:
        key = _string(preset, f"{path}.preset")
        if key not in TAXONOMY_PRESETS:
            raise ConfigError(
                f"{path}.preset: unknown preset {key!r} "
                f"(expected one of {sorted(TAXONOMY_PRESETS)})"
            )
        taxonomy = TAXONOMY_PRESETS[key]
        name = entry.get("name")
        if name is not None and name != taxonomy.name:
            taxonomy = FactorTaxonomy(
                _string(name, f"{path}.name"), taxonomy.levels, taxonomy.ordinal
            )
        return taxonomy
    name = _string(entry.get("name"), f"{path}.name")
    levels = _string_list(entry.get("levels"), f"{path}.levels")
    ordinal = bool(entry.get("ordinal", False))
    return FactorTaxonomy(name, levels, ordinal)


def _parse_term(node, path: str, factor_names: set[str], covariate_names: set[str]) -> TermSpec:
    if isinstance(node, str):
        if node in factor_names:
            return TermSpec("factor", node)
        if node in covariate_names:
            return TermSpec("covariate", node)
        raise ConfigError(
            f"{path}: {node!r} is neither a declared factor nor a covariate"
        )
    entry = _require_mapping(node, path)
    if "factor" in entry:
        name = _string(entry["factor"], f"{path}.factor")
        if name not in factor_names:
            raise ConfigError(f"{path}.factor: unknown factor {name!r}")
        return TermSpec("factor", name)
    if "covariate" in entry:
        name = _string(entry["covariate"], f"{path}.covariate")
        if name not in covariate_names:
            raise ConfigError(f"{path}.covariate: unknown covariate {name!r}")
        transform = entry.get("transform", "identity")
        if transform not in COVARIATE_TRANSFORMS:
            raise ConfigError(
                f"{path}.transform: unknown transform {transform!r} "
                f"(expected one of {COVARIATE_TRANSFORMS})"
            )
        return TermSpec("covariate", name, transform)
    raise ConfigError(f"{path}: term must be a string or set factor:/covariate:")


def parse_audit_config(doc: dict) -> AuditConfig:
    """Validate a parsed YAML document into an ``AuditConfig``."""
    root = _require_mapping(doc, "config")
    dataset = _require_mapping(root.get("dataset"), "dataset")

    factor_nodes = dataset.get("factors")
    if not isinstance(factor_nodes, list) or not factor_nodes:
        raise ConfigError("dataset.factors: expected a non-empty list")
    taxonomies = tuple(
        _parse_taxonomy(node, f"dataset.factors[{i}]") for i, node in enumerate(factor_nodes)
    )

    covariates = _string_list(dataset.get("covariates", []), "dataset.covariates")

    response = _require_mapping(dataset.get("response", {"mode": "precomputed"}), "dataset.response")
    mode = response.get("mode", "precomputed")
    if mode not in ("precomputed", "landmarks"):
        raise ConfigError(f"dataset.response.mode: expected precomputed or landmarks, got {mode!r}")
    response_column = response.get("column", RESPONSE_COLUMN)
    offset = _number(response.get("offset", 0.0), "dataset.response.offset")
    if offset < 0.0:
        raise ConfigError(f"dataset.response.offset must be >= 0, got {offset!r}")
    normalizer = _string(response.get("normalizer", NORMALIZER_COLUMN), "dataset.response.normalizer")
    if mode == "landmarks" and normalizer not in covariates:
        raise ConfigError(
            f"dataset.response.normalizer {normalizer!r} must be a declared covariate"
        )

    schema = DatasetSchema(
        taxonomies=taxonomies,
        covariates=covariates,
        response_mode=mode,
        response_column=_string(response_column, "dataset.response.column"),
        id_column=_string(dataset.get("id_column", "sample_id"), "dataset.id_column"),
        delimiter=_string(dataset.get("delimiter", ","), "dataset.delimiter"),
        on_bad_record=_string(dataset.get("on_bad_record", "error"), "dataset.on_bad_record"),
    )

    derived = _require_mapping(root.get("derived", {}), "derived")
    derive_headpose = bool(derived.get("headpose_from_euler", False))
    if derive_headpose:
        missing = [c for c in _EULER_COLUMNS if c not in covariates]
        if missing:
            raise ConfigError(
                f"derived.headpose_from_euler needs covariates {list(_EULER_COLUMNS)}; "
                f"missing {missing}"
            )
        if DERIVED_HEADPOSE in covariates:
            raise ConfigError(
                f"derived.headpose_from_euler conflicts with declared covariate "
                f"{DERIVED_HEADPOSE!r}"
            )

    filters = []
    for i, node in enumerate(root.get("filters", []) or []):
        entry = _require_mapping(node, f"filters[{i}]")
        column = _string(entry.get("column"), f"filters[{i}].column")
        if column not in {t.name for t in taxonomies}:
            raise ConfigError(f"filters[{i}].column: {column!r} is not a declared factor")
        drop = _string_list(entry.get("drop", []), f"filters[{i}].drop")
        keep = _string_list(entry.get("keep", []), f"filters[{i}].keep")
        filters.append(RowFilter(column=column, drop=drop, keep=keep))

    bc = _require_mapping(root.get("boxcox", {}), "boxcox")
    interval_node = bc.get("interval", [-2.0, 3.0])
    if not isinstance(interval_node, list) or len(interval_node) != 2:
        raise ConfigError(f"boxcox.interval: expected [lo, hi], got {interval_node!r}")
    boxcox = BoxCoxSettings(
        interval=(
            _number(interval_node[0], "boxcox.interval[0]"),
            _number(interval_node[1], "boxcox.interval[1]"),
        ),
        tolerance=_number(bc.get("tolerance", 1e-5), "boxcox.tolerance"),
        per_model=bool(bc.get("per_model", False)),
    )

    factor_names = {t.name for t in taxonomies}
    covariate_names = set(covariates)
    if derive_headpose:
        covariate_names.add(DERIVED_HEADPOSE)

    model_nodes = root.get("models")
    if not isinstance(model_nodes, list) or not model_nodes:
        raise ConfigError("models: expected a non-empty list")
    models = []
    for i, node in enumerate(model_nodes):
        entry = _require_mapping(node, f"models[{i}]")
        name = _string(entry.get("name"), f"models[{i}].name")
        term_nodes = entry.get("terms")
        if not isinstance(term_nodes, list) or not term_nodes:
            raise ConfigError(f"models[{i}].terms: expected a non-empty list")
        terms = tuple(
            _parse_term(t, f"models[{i}].terms[{j}]", factor_names, covariate_names)
            for j, t in enumerate(term_nodes)
        )
        models.append(ModelSpec(name, terms))

    emm = _require_mapping(root.get("emmeans", {}), "emmeans")
    emm_factors = _string_list(emm.get("factors", []), "emmeans.factors")
    for name in emm_factors:
        if name not in factor_names:
            raise ConfigError(f"emmeans.factors: {name!r} is not a declared factor")
    covariate_fixing = emm.get("covariate_fixing", "transformed-mean")

    out = _require_mapping(root.get("output", {}), "output")
    output = OutputSettings(
        directory=_string(out.get("directory", "."), "output.directory"),
        formats=tuple(_string_list(out.get("formats", ["plain"]), "output.formats")),
    )

    input_node = dataset.get("input")
    input_path = _string(input_node, "dataset.input") if input_node is not None else None

    return AuditConfig(
        schema=schema,
        input_path=input_path,
        response_offset=offset,
        response_normalizer=normalizer,
        derive_headpose=derive_headpose,
        filters=tuple(filters),
        boxcox=boxcox,
        alpha=_number(root.get("alpha", 0.05), "alpha"),
        models=tuple(models),
        emmeans_factors=emm_factors,
        covariate_fixing=covariate_fixing,
        output=output,
    )


def _load_yaml(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path!r}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path!r} must be a mapping at top level")
    return doc


def load_audit_config(path: str | Path) -> AuditConfig:
    return parse_audit_config(_load_yaml(path))


def parse_synth_config(doc: dict) -> SyntheticSpec:
    """Validate a parsed YAML document into a ``SyntheticSpec``.

    Factors come either from an explicit ``factors`` list or from
    ``margins_preset`` (a named corpus margin set) plus an optional
    ``effects`` mapping of factor name to level-effect overrides.
    """
    root = _require_mapping(doc, "config")
    seed = root.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed: expected an integer, got {seed!r}")
    n = root.get("n")
    if isinstance(n, bool) or not isinstance(n, int):
        raise ConfigError(f"n: expected an integer, got {n!r}")
    stream = root.get("stream", 0)
    if isinstance(stream, bool) or not isinstance(stream, int):
        raise ConfigError(f"stream: expected an integer, got {stream!r}")
    baseline = _number(root.get("baseline", 0.0), "baseline")
    sigma = _number(root.get("noise_sigma", 0.0), "noise_sigma")

    factors: list[FactorSim] = []
    preset_name = root.get("margins_preset")
    if preset_name is not None:
        effects_doc = _require_mapping(root.get("effects", {}), "effects")
        for taxonomy, probs in margin_preset(_string(preset_name, "margins_preset")):
            overrides = effects_doc.get(taxonomy.name, {})
            if overrides:
                overrides = _require_mapping(overrides, f"effects.{taxonomy.name}")
                unknown = set(overrides) - set(taxonomy.levels)
                if unknown:
                    raise ConfigError(
                        f"effects.{taxonomy.name}: unknown levels {sorted(unknown)}"
                    )
            effects = tuple(
                _number(overrides.get(lvl, 0.0), f"effects.{taxonomy.name}.{lvl}")
                for lvl in taxonomy.levels
            )
            factors.append(FactorSim(taxonomy, probs, effects))
    else:
        nodes = root.get("factors")
        if not isinstance(nodes, list) or not nodes:
            raise ConfigError("factors: expected a non-empty list (or margins_preset)")
        for i, node in enumerate(nodes):
            entry = _require_mapping(node, f"factors[{i}]")
            tax_node = entry.get("taxonomy")
            if isinstance(tax_node, str):
                if tax_node not in TAXONOMY_PRESETS:
                    raise ConfigError(f"factors[{i}].taxonomy: unknown preset {tax_node!r}")
                taxonomy = TAXONOMY_PRESETS[tax_node]
            else:
                taxonomy = _parse_taxonomy(tax_node, f"factors[{i}].taxonomy")
            probs_node = entry.get("probabilities")
            if not isinstance(probs_node, list):
                raise ConfigError(f"factors[{i}].probabilities: expected a list")
            probs = tuple(
                _number(p, f"factors[{i}].probabilities[{j}]") for j, p in enumerate(probs_node)
            )
            effects_node = entry.get("effects", [0.0] * len(taxonomy.levels))
            if not isinstance(effects_node, list):
                raise ConfigError(f"factors[{i}].effects: expected a list")
            effects = tuple(
                _number(e, f"factors[{i}].effects[{j}]") for j, e in enumerate(effects_node)
            )
            factors.append(FactorSim(taxonomy, probs, effects))

    covariates: list[CovariateSim] = []
    for i, node in enumerate(root.get("covariates", []) or []):
        entry = _require_mapping(node, f"covariates[{i}]")
        params_node = entry.get("params")
        if not isinstance(params_node, list):
            raise ConfigError(f"covariates[{i}].params: expected a list")
        covariates.append(
            CovariateSim(
                name=_string(entry.get("name"), f"covariates[{i}].name"),
                kind=_string(entry.get("kind"), f"covariates[{i}].kind"),
                params=tuple(
                    _number(p, f"covariates[{i}].params[{j}]") for j, p in enumerate(params_node)
                ),
                coefficient=_number(entry.get("coefficient", 0.0), f"covariates[{i}].coefficient"),
                effect_transform=entry.get("effect_transform", "identity"),
            )
        )

    return SyntheticSpec(
        seed=seed,
        n=n,
        baseline=baseline,
        noise_sigma=sigma,
        factors=tuple(factors),
        covariates=tuple(covariates),
        stream=stream,
    )


def load_synth_config(path: str | Path) -> SyntheticSpec:
    return parse_synth_config(_load_yaml(path))
