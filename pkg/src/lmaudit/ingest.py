"""Delimited-text ingestion and serialization of audit datasets.

Reserved column names carry fixed semantics: ``nme`` (precomputed response),
``gt_x{i}``/``gt_y{i}``/``pred_x{i}``/``pred_y{i}`` (landmark coordinates),
``pitch_deg``/``yaw_deg``/``roll_deg`` (head pose) and ``bbox_height_px``
(bounding-box height, strictly positive).  Everything else is named by the
schema; unknown columns are ignored with a logged warning.
"""

from __future__ import annotations

import csv
import io
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .data import AuditDataset, AuditRecord, FactorTaxonomy
from .errors import DataError

__all__ = ["DatasetSchema", "ParseStats", "parse_records", "write_records"]

logger = logging.getLogger(__name__)

RESPONSE_COLUMN = "nme"
NORMALIZER_COLUMN = "bbox_height_px"
_LANDMARK_RE = re.compile(r"^(gt|pred)_(x|y)(\d+)$")


@dataclass(frozen=True)
class DatasetSchema:
    """Declares how delimited rows map onto an ``AuditDataset``.

    ``response_mode`` is one of ``"precomputed"`` (read the response from
    ``response_column``), ``"landmarks"`` (collect the reserved landmark
    columns; the normalized error is computed later), or ``"none"``.
    ``on_bad_record`` is ``"error"`` (default: reject the file on the first
    invalid record) or ``"skip"`` (drop invalid records but count them).
    """

    taxonomies: tuple[FactorTaxonomy, ...]
    covariates: tuple[str, ...] = ()
    response_mode: str = "precomputed"
    response_column: str = RESPONSE_COLUMN
    id_column: str = "sample_id"
    delimiter: str = ","
    on_bad_record: str = "error"

    def __post_init__(self):
        if self.response_mode not in ("precomputed", "landmarks", "none"):
            raise DataError(f"unknown response_mode {self.response_mode!r}")
        if self.on_bad_record not in ("error", "skip"):
            raise DataError(f"unknown on_bad_record policy {self.on_bad_record!r}")
        if len(self.delimiter) != 1:
            raise DataError(f"delimiter must be a single character, got {self.delimiter!r}")


@dataclass
class ParseStats:
    """Row accounting for a parse: rows_in = len(records) + rows_errored."""

    rows_in: int = 0
    rows_errored: int = 0
    errors: list[str] = field(default_factory=list)


def _landmark_columns(header: list[str]) -> tuple[list[str], list[str], list[str], list[str]]:
    found: dict[tuple[str, str], dict[int, str]] = {}
    for col in header:
        m = _LANDMARK_RE.match(col)
        if m:
            found.setdefault((m.group(1), m.group(2)), {})[int(m.group(3))] = col
    if not found:
        raise DataError("landmarks response_mode needs gt_x{i}/gt_y{i}/pred_x{i}/pred_y{i} columns")
    index_sets = {key: set(cols) for key, cols in found.items()}
    expected_keys = {("gt", "x"), ("gt", "y"), ("pred", "x"), ("pred", "y")}
    if set(index_sets) != expected_keys:
        missing = expected_keys - set(index_sets)
        raise DataError(f"incomplete landmark columns, missing groups: {sorted(missing)}")
    indices = index_sets[("gt", "x")]
    if any(index_sets[k] != indices for k in expected_keys):
        raise DataError("landmark column indices differ between gt/pred x/y groups")
    order = sorted(indices)
    return (
        [found[("gt", "x")][i] for i in order],
        [found[("gt", "y")][i] for i in order],
        [found[("pred", "x")][i] for i in order],
        [found[("pred", "y")][i] for i in order],
    )


def _parse_float(row: dict[str, str], col: str, sample_id: str, positive: bool = False) -> float:
    raw = row.get(col, "")
    if raw is None or raw.strip() == "":
        raise DataError(f"record {sample_id!r}: missing value in column {col!r}")
    try:
        value = float(raw)
    except ValueError:
        raise DataError(
            f"record {sample_id!r}: non-numeric value {raw!r} in column {col!r}"
        ) from None
    if value != value or value in (float("inf"), float("-inf")):
        raise DataError(f"record {sample_id!r}: non-finite value in column {col!r}")
    if positive and not value > 0.0:
        raise DataError(
            f"record {sample_id!r}: column {col!r} must be positive, got {value!r}"
        )
    return value


def parse_records(
    source: str | Path | io.TextIOBase,
    schema: DatasetSchema,
    stats: ParseStats | None = None,
) -> AuditDataset:
    """Parse delimited text into an ``AuditDataset`` under a schema.

    Raises ``DataError`` on schema violations (missing columns, unknown
    factor levels, non-numeric covariates, duplicate ids).  With
    ``on_bad_record="skip"`` invalid records are counted in ``stats``
    instead of aborting; structural problems (missing header columns)
    always abort.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return parse_records(fh, schema, stats)

    reader = csv.DictReader(source, delimiter=schema.delimiter)
    if reader.fieldnames is None:
        raise DataError("input has no header row")
    header = list(reader.fieldnames)

    expected: set[str] = {schema.id_column}
    expected.update(t.name for t in schema.taxonomies)
    expected.update(schema.covariates)
    landmark_cols: tuple[list[str], list[str], list[str], list[str]] | None = None
    if schema.response_mode == "precomputed":
        expected.add(schema.response_column)
    elif schema.response_mode == "landmarks":
        landmark_cols = _landmark_columns(header)
        for group in landmark_cols:
            expected.update(group)

    missing = expected - set(header)
    if missing:
        raise DataError(f"input is missing declared columns: {sorted(missing)}")
    unknown = [c for c in header if c not in expected]
    if unknown:
        logger.warning("ignoring %d undeclared column(s): %s", len(unknown), unknown)

    taxonomy_by_name = {t.name: t for t in schema.taxonomies}
    stats = stats if stats is not None else ParseStats()
    records: list[AuditRecord] = []
    seen_ids: set[str] = set()

    for line_no, row in enumerate(reader, start=2):
        stats.rows_in += 1
        try:
            sample_id = (row.get(schema.id_column) or "").strip()
            if not sample_id:
                raise DataError(f"row {line_no}: empty {schema.id_column!r}")
            if sample_id in seen_ids:
                raise DataError(f"row {line_no}: duplicate sample_id {sample_id!r}")

            factors: dict[str, str] = {}
            for tax in schema.taxonomies:
                raw = (row.get(tax.name) or "").strip()
                if raw not in tax.levels:
                    raise DataError(
                        f"record {sample_id!r}: value {raw!r} in column {tax.name!r} "
                        f"is outside taxonomy {list(tax.levels)}"
                    )
                factors[tax.name] = raw

            covariates = {
                name: _parse_float(row, name, sample_id, positive=(name == NORMALIZER_COLUMN))
                for name in schema.covariates
            }

            error = None
            gt_points = pred_points = None
            if schema.response_mode == "precomputed":
                error = _parse_float(row, schema.response_column, sample_id)
                if error < 0.0:
                    raise DataError(
                        f"record {sample_id!r}: response must be >= 0, got {error!r}"
                    )
            elif schema.response_mode == "landmarks":
                gx, gy, px, py = landmark_cols
                gt_points = tuple(
                    (_parse_float(row, cx, sample_id), _parse_float(row, cy, sample_id))
                    for cx, cy in zip(gx, gy)
                )
                pred_points = tuple(
                    (_parse_float(row, cx, sample_id), _parse_float(row, cy, sample_id))
                    for cx, cy in zip(px, py)
                )

            records.append(
                AuditRecord(
                    sample_id=sample_id,
                    factors=factors,
                    covariates=covariates,
                    error=error,
                    gt_points=gt_points,
                    pred_points=pred_points,
                )
            )
            seen_ids.add(sample_id)
        except DataError as exc:
            if schema.on_bad_record == "error":
                raise
            stats.rows_errored += 1
            stats.errors.append(str(exc))
            logger.warning("skipping bad record: %s", exc)

    return AuditDataset(
        taxonomies=schema.taxonomies,
        covariate_names=schema.covariates,
        records=tuple(records),
    )


def write_records(dataset: AuditDataset, target: str | Path | io.TextIOBase, schema: DatasetSchema) -> None:
    """Serialize a dataset back to delimited text (round-trips with parse)."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            write_records(dataset, fh, schema)
            return

    header = [schema.id_column]
    header.extend(t.name for t in dataset.taxonomies)
    header.extend(dataset.covariate_names)
    landmark_count = 0
    if schema.response_mode == "precomputed":
        header.append(schema.response_column)
    elif schema.response_mode == "landmarks":
        if not dataset.records or dataset.records[0].gt_points is None:
            raise DataError("landmarks response_mode requires records with landmark sets")
        landmark_count = len(dataset.records[0].gt_points)
        for prefix in ("gt", "pred"):
            for axis in ("x", "y"):
                header.extend(f"{prefix}_{axis}{i}" for i in range(landmark_count))

    writer = csv.writer(target, delimiter=schema.delimiter, lineterminator="\n")
    writer.writerow(header)
    for rec in dataset.records:
        row: list[str] = [rec.sample_id]
        row.extend(rec.factors[t.name] for t in dataset.taxonomies)
        row.extend(repr(rec.covariates[name]) for name in dataset.covariate_names)
        if schema.response_mode == "precomputed":
            row.append(repr(rec.error))
        elif schema.response_mode == "landmarks":
            for points in (rec.gt_points, rec.pred_points):
                row.extend(repr(pt[0]) for pt in points)
                row.extend(repr(pt[1]) for pt in points)
        writer.writerow(row)
