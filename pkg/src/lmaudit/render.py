"""Render an audit report as plain text, Markdown, or delimited files.

All numeric cells carry four significant digits; p-values are rendered in
scientific notation with a hard floor of ``<2.2e-16`` below double
precision's conventional smallest distinguishable p.  Significance stars
are recomputed from the *rendered* p so the stars and the number shown
next to them can never disagree.  Output is deterministic: same report,
same bytes.
"""

from __future__ import annotations

import csv
import io

from .anova import significance_stars
from .emmeans import EmmSummary
from .report import AuditReport, ModelReport

__all__ = ["format_number", "format_p", "stars_for_rendered", "render_tables", "render_all"]

P_FLOOR = 2.2e-16

ANOVA_HEADER = ("Exp. Variable", "Df", "F-value", "P-value", "Significance")
EMMEANS_HEADER = ("Emmean", "Lower CL", "Upper CL", "CIs")


def format_number(x: float) -> str:
    """Four significant digits; integers stay integral-looking."""
    if x != x:
        return "nan"
    return f"{float(x):.4g}"


def format_p(p: float) -> str:
    if p < P_FLOOR:
        return f"<{P_FLOOR:.1e}"
    return f"{p:.3e}"


def stars_for_rendered(rendered: str) -> str:
    """Stars from the p-value as printed (floored values keep '***')."""
    if rendered.startswith("<"):
        return "***"
    return significance_stars(float(rendered))


def _pad_table(headers, rows, align) -> str:
    """Fixed-width table; ``align`` is one '<'/'>' per column."""
    cells = [list(headers)] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = []
    for r, row in enumerate(cells):
        parts = []
        for i, cell in enumerate(row):
            # headers are left-aligned over numeric columns too
            a = "<" if r == 0 else align[i]
            parts.append(f"{cell:{a}{widths[i]}}")
        lines.append("  ".join(parts).rstrip())
    return "\n".join(lines)


def _md_table(headers, rows) -> str:
    lines = ["| " + " | ".join(headers) + " |"]
    lines.append("|" + "|".join(" --- " for _ in headers) + "|")
    for row in rows:
        lines.append("| " + " | ".join(str(c) for c in row) + " |")
    return "\n".join(lines)


def _anova_rows(model: ModelReport) -> list[tuple[str, str, str, str, str]]:
    rows = []
    for row in model.anova.rows:
        rendered_p = format_p(row.p_value)
        rows.append(
            (
                row.term,
                str(row.df),
                format_number(row.f_value),
                rendered_p,
                stars_for_rendered(rendered_p),
            )
        )
    return rows


def _emmeans_rows(summary: EmmSummary) -> list[tuple[str, str, str, str, str]]:
    rows = []
    for r in summary.rows:
        est = r.response_estimate if r.response_estimate is not None else r.estimate
        lo = r.response_lower if r.response_lower is not None else r.lower
        hi = r.response_upper if r.response_upper is not None else r.upper
        rows.append(
            (r.level, format_number(est), format_number(lo), format_number(hi), r.letters)
        )
    return rows


def _provenance_items(report: AuditReport) -> list[tuple[str, str]]:
    prov = report.provenance
    items = [
        ("config sha256", prov.config_sha256),
        ("alpha", format_number(prov.alpha)),
        ("response mode", prov.response_mode),
        ("response offset", format_number(prov.response_offset)),
        ("rows in", str(prov.rows_in)),
        ("rows kept", str(prov.rows_kept)),
        ("rows filtered", str(prov.rows_filtered)),
        ("rows errored", str(prov.rows_errored)),
    ]
    for i, step in enumerate(prov.filter_steps, start=1):
        items.append((f"filter {i}", f"{step.description} (-{step.rows_dropped})"))
    if prov.lambda_mode == "shared":
        items.append(("box-cox", f"shared exponent, profiled on model {prov.lambda_source!r}"))
    else:
        items.append(("box-cox", "exponent profiled per model"))
    return items


def _model_summary_line(model: ModelReport) -> str:
    pct = f"{100.0 * model.r_squared:.2f}%"
    return (
        f"n {model.n}   p {model.p}   lambda {format_number(model.lam)}   "
        f"R^2 {format_number(model.r_squared)} ({pct} of response variability explained)"
    )


def _correlation_line(model: ModelReport) -> str:
    if not model.correlations:
        return "transformed-response correlations: (no covariate terms)"
    parts = ", ".join(f"{label} {format_number(r)}" for label, r in model.correlations)
    return f"transformed-response correlations: {parts}"


def _render_plain(report: AuditReport) -> str:
    out = []
    title = "landmark error bias audit"
    out.append(title)
    out.append("=" * len(title))
    out.append("")
    out.append("run")
    for key, value in _provenance_items(report):
        out.append(f"  {key:<16} {value}")
    for model in report.models:
        out.append("")
        heading = f"model {model.name}"
        out.append(heading)
        out.append("-" * len(heading))
        out.append(f"  {_model_summary_line(model)}")
        out.append(
            "  residual skewness "
            + format_number(model.diagnostics.skewness)
            + "   excess kurtosis "
            + format_number(model.diagnostics.excess_kurtosis)
        )
        out.append(f"  {_correlation_line(model)}")
        out.append("")
        out.append("  type III tests")
        table = _pad_table(ANOVA_HEADER, _anova_rows(model), ("<", ">", ">", ">", "<"))
        out.extend("  " + line for line in table.splitlines())
        for summary in model.emmeans:
            out.append("")
            out.append(
                f"  marginal means: {summary.factor}   "
                f"(alpha {format_number(summary.alpha)}, "
                f"sidak-adjusted {format_number(summary.alpha_adj)})"
            )
            table = _pad_table(
                (summary.factor,) + EMMEANS_HEADER,
                _emmeans_rows(summary),
                ("<", ">", ">", ">", "<"),
            )
            out.extend("  " + line for line in table.splitlines())
    out.append("")
    return "\n".join(out)


def _render_markdown(report: AuditReport) -> str:
    out = ["# landmark error bias audit", "", "## run", ""]
    out.append(_md_table(("Setting", "Value"), _provenance_items(report)))
    for model in report.models:
        out.append("")
        out.append(f"## model {model.name}")
        out.append("")
        out.append(_model_summary_line(model))
        out.append(
            "residual skewness "
            + format_number(model.diagnostics.skewness)
            + ", excess kurtosis "
            + format_number(model.diagnostics.excess_kurtosis)
        )
        out.append(_correlation_line(model))
        out.append("")
        out.append("### type III tests")
        out.append("")
        out.append(_md_table(ANOVA_HEADER, _anova_rows(model)))
        for summary in model.emmeans:
            out.append("")
            out.append(
                f"### marginal means: {summary.factor} "
                f"(alpha {format_number(summary.alpha)}, "
                f"sidak-adjusted {format_number(summary.alpha_adj)})"
            )
            out.append("")
            out.append(_md_table((summary.factor,) + EMMEANS_HEADER, _emmeans_rows(summary)))
    out.append("")
    return "\n".join(out)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _render_delimited(report: AuditReport) -> dict[str, str]:
    anova_rows = []
    emmeans_rows = []
    model_rows = []
    corr_rows = []
    for model in report.models:
        model_rows.append(
            (
                model.name,
                model.n,
                model.p,
                format_number(model.lam),
                format_number(model.r_squared),
                format_number(model.diagnostics.skewness),
                format_number(model.diagnostics.excess_kurtosis),
            )
        )
        for label, r in model.correlations:
            corr_rows.append((model.name, label, format_number(r)))
        for term, df, f_value, p, stars in _anova_rows(model):
            anova_rows.append((model.name, term, df, f_value, p, stars))
        for summary in model.emmeans:
            rendered = _emmeans_rows(summary)
            for row, rend in zip(summary.rows, rendered):
                emmeans_rows.append(
                    (
                        model.name,
                        summary.factor,
                        row.level,
                        rend[1],
                        rend[2],
                        rend[3],
                        row.letters,
                        format_number(row.estimate),
                        format_number(row.se),
                        row.df,
                        format_number(row.lower),
                        format_number(row.upper),
                        format_number(summary.alpha_adj),
                    )
                )

    prov_rows = [(k, v) for k, v in _provenance_items(report)]
    return {
        "models.csv": _csv_text(
            ("model", "n", "p", "lambda", "r_squared", "residual_skewness", "residual_excess_kurtosis"),
            model_rows,
        ),
        "anova.csv": _csv_text(("model",) + ANOVA_HEADER, anova_rows),
        "emmeans.csv": _csv_text(
            ("model", "factor", "level")
            + EMMEANS_HEADER[:3]
            + ("CIs", "emmean_transformed", "se_transformed", "df",
               "lower_transformed", "upper_transformed", "alpha_adj"),
            emmeans_rows,
        ),
        "correlations.csv": _csv_text(("model", "term", "pearson_r"), corr_rows),
        "provenance.csv": _csv_text(("key", "value"), prov_rows),
    }


def render_tables(report: AuditReport, fmt: str) -> dict[str, str]:
    """Render one format; returns {filename: content}."""
    if fmt == "plain":
        return {"report.txt": _render_plain(report)}
    if fmt == "markdown":
        return {"report.md": _render_markdown(report)}
    if fmt == "delimited":
        return _render_delimited(report)
    raise ValueError(f"unknown render format {fmt!r}")


def render_all(report: AuditReport, formats) -> dict[str, str]:
    files: dict[str, str] = {}
    for fmt in formats:
        files.update(render_tables(report, fmt))
    return files
