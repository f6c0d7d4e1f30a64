"""Command-line interface.

Subcommands mirror the audit workflow: ``simulate`` produces synthetic
datasets with known ground truth, ``metrics`` and ``ensemble`` prepare
per-sample columns from upstream model outputs, and ``audit`` runs the
full modeling pipeline and writes report files.

Exit codes: 0 success, 2 configuration problem, 3 data problem,
4 numeric failure.
"""

from __future__ import annotations

import csv
import functools
from dataclasses import replace
from pathlib import Path

import click
import numpy as np
import yaml

from . import __version__
from .config import RENDER_FORMATS, load_audit_config, load_synth_config
from .data import (
    AGE9_TO_AGE5,
    EnsemblePrediction,
    TAXONOMY_PRESETS,
    aggregate_ensemble,
    merge_age_buckets,
)
from .errors import AuditError, DataError
from .geometry import frontal_deviations, nme_batch
from .ingest import DatasetSchema, NORMALIZER_COLUMN, _landmark_columns, _parse_float, write_records
from .render import render_all
from .report import run_audit
from .synth import generate

_EULER = ("pitch_deg", "yaw_deg", "roll_deg")


def _audit_errors(fn):
    """Translate package errors into messages and exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AuditError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(getattr(exc, "exit_code", 1)) from None

    return wrapper


def _write_csv(path: str, header, rows) -> None:
    if path == "-":
        writer = csv.writer(click.get_text_stream("stdout"), lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    click.echo(f"wrote {path}")


def _preset(name: str):
    try:
        return TAXONOMY_PRESETS[name]
    except KeyError:
        raise DataError(
            f"unknown taxonomy preset {name!r} (expected one of {sorted(TAXONOMY_PRESETS)})"
        ) from None


@click.group()
@click.version_option(__version__, prog_name="lmaudit")
def main():
    """Demographic-bias audits of facial landmark error."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Audit config YAML.")
@click.option("--input", "input_path", type=click.Path(), default=None, help="Override dataset.input.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Override output.directory.")
@click.option("--alpha", type=float, default=None, help="Override the family alpha.")
@click.option(
    "--format", "formats", multiple=True, type=click.Choice(RENDER_FORMATS),
    help="Override output.formats (repeatable).",
)
@_audit_errors
def audit(config_path, input_path, out_dir, alpha, formats):
    """Run the configured audit and write report files."""
    cfg = load_audit_config(config_path).with_overrides(
        input_path=input_path,
        alpha=alpha,
        formats=tuple(formats) if formats else None,
        out_dir=out_dir,
    )
    report = run_audit(cfg)
    files = render_all(report, cfg.output.formats)
    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(files):
        target = out / name
        target.write_text(files[name], encoding="utf-8")
        click.echo(f"wrote {target}")
    prov = report.provenance
    click.echo(
        f"rows in {prov.rows_in} = kept {prov.rows_kept} "
        f"+ filtered {prov.rows_filtered} + errored {prov.rows_errored}"
    )


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="CSV with landmark columns.")
@click.option("--output", "-o", "output_path", default="-", help="Output CSV ('-' for stdout).")
@click.option(
    "--normalizer-column", default=NORMALIZER_COLUMN, show_default=True,
    help="Positive per-sample normalizer for the mean landmark error.",
)
@_audit_errors
def metrics(input_path, output_path, normalizer_column):
    """Compute per-sample normalized error (plus head-pose deviation).

    The input needs sample_id, gt_x{i}/gt_y{i}/pred_x{i}/pred_y{i} landmark
    columns, and the normalizer column.  When pitch_deg/yaw_deg/roll_deg are
    all present, a headpose_dev column (radians from frontal) is added.
    """
    with open(input_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError("input has no header row")
        header = list(reader.fieldnames)
        gx, gy, px, py = _landmark_columns(header)
        if "sample_id" not in header:
            raise DataError("metrics input needs a sample_id column")
        if normalizer_column not in header:
            raise DataError(f"metrics input needs normalizer column {normalizer_column!r}")
        with_pose = all(c in header for c in _EULER)

        ids, gts, preds, norms, angles = [], [], [], [], []
        for row in reader:
            sid = row.get("sample_id") or f"row{reader.line_num}"
            ids.append(sid)
            gts.append(
                [(_parse_float(row, cx, sid), _parse_float(row, cy, sid)) for cx, cy in zip(gx, gy)]
            )
            preds.append(
                [(_parse_float(row, cx, sid), _parse_float(row, cy, sid)) for cx, cy in zip(px, py)]
            )
            norms.append(_parse_float(row, normalizer_column, sid, positive=True))
            if with_pose:
                angles.append([_parse_float(row, c, sid) for c in _EULER])

    if not ids:
        raise DataError("metrics input has no data rows")
    try:
        nme = nme_batch(np.asarray(gts, dtype=float), np.asarray(preds, dtype=float),
                        np.asarray(norms, dtype=float))
    except ValueError as exc:
        raise DataError(str(exc)) from None

    if with_pose:
        arr = np.asarray(angles, dtype=float)
        devs = frontal_deviations(arr[:, 0], arr[:, 1], arr[:, 2])
        rows = [(sid, repr(float(e)), repr(float(d))) for sid, e, d in zip(ids, nme, devs)]
        _write_csv(output_path, ("sample_id", "nme", "headpose_dev"), rows)
    else:
        rows = [(sid, repr(float(e))) for sid, e in zip(ids, nme)]
        _write_csv(output_path, ("sample_id", "nme"), rows)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(),
              help="CSV with gender_1..3, age_1..3, race_1 votes.")
@click.option("--output", "-o", "output_path", default="-", help="Output CSV ('-' for stdout).")
@click.option("--gender-taxonomy", default="fairface_gender", show_default=True)
@click.option("--age-taxonomy", default="fairface_age9", show_default=True)
@_audit_errors
def ensemble(input_path, output_path, gender_taxonomy, age_taxonomy):
    """Aggregate three-model demographic votes into per-sample labels.

    Race comes from the first model, gender by majority, and age by the
    order-median vote.  Fine age buckets are additionally collapsed onto
    the 5-bucket audit taxonomy in the ``age`` column (``age_fine`` keeps
    the uncollapsed vote).
    """
    gender_tax = _preset(gender_taxonomy)
    age_tax = _preset(age_taxonomy)
    collapsible = set(age_tax.levels) <= set(AGE9_TO_AGE5)

    need = ("sample_id", "gender_1", "gender_2", "gender_3", "age_1", "age_2", "age_3", "race_1")
    with open(input_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in need if c not in (reader.fieldnames or [])]
        if missing:
            raise DataError(f"ensemble input missing columns {missing}")
        out_rows = []
        for row in reader:
            pred = EnsemblePrediction(
                sample_id=row["sample_id"],
                genders=(row["gender_1"], row["gender_2"], row["gender_3"]),
                ages=(row["age_1"], row["age_2"], row["age_3"]),
                race=row["race_1"],
            )
            labels = aggregate_ensemble(pred, gender_taxonomy=gender_tax, age_taxonomy=age_tax)
            fine = labels["age"]
            merged = merge_age_buckets(fine) if collapsible else fine
            out_rows.append((pred.sample_id, labels["gender"], labels["race"], fine, merged))

    _write_csv(output_path, ("sample_id", "gender", "race", "age_fine", "age"), out_rows)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Simulation config YAML.")
@click.option("--out", "out_dir", default=".", show_default=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@click.option("--n", "n_override", type=int, default=None, help="Override the configured sample count.")
@_audit_errors
def simulate(config_path, out_dir, seed, n_override):
    """Generate a synthetic audit dataset plus its ground-truth sidecar."""
    spec = load_synth_config(config_path)
    if seed is not None:
        spec = replace(spec, seed=seed)
    if n_override is not None:
        spec = replace(spec, n=n_override)
    dataset, truth = generate(spec)

    schema = DatasetSchema(
        taxonomies=dataset.taxonomies,
        covariates=dataset.covariate_names,
        response_mode="precomputed",
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data_path = out / "dataset.csv"
    write_records(dataset, data_path, schema)
    click.echo(f"wrote {data_path}")
    truth_path = out / "truth.yaml"
    truth_path.write_text(yaml.safe_dump(truth.to_dict(), sort_keys=False), encoding="utf-8")
    click.echo(f"wrote {truth_path}")


if __name__ == "__main__":
    main()
