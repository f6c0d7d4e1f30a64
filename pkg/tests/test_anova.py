"""Marginal F tests against scipy's classical one-way and two-sample oracles."""

import dataclasses

import numpy as np
import pytest
import scipy.stats

from lmaudit.anova import significance_stars, type3_anova
from lmaudit.data import AuditDataset, AuditRecord, FactorTaxonomy
from lmaudit.linmod import ModelSpec, TermSpec, assemble_response, build_design, fit_ols


def _one_factor_dataset(groups, seed=0):
    """groups: mapping level -> per-group sample size."""
    rng = np.random.default_rng(seed)
    tax = FactorTaxonomy("g", tuple(groups))
    recs = []
    for shift, (level, size) in enumerate(groups.items()):
        for i in range(size):
            recs.append(
                AuditRecord(
                    sample_id=f"{level}{i}",
                    factors={"g": level},
                    covariates={"x": float(rng.normal())},
                    error=float(np.exp(rng.normal(0.1 * shift, 0.3))),
                )
            )
    return AuditDataset(taxonomies=(tax,), covariate_names=("x",), records=tuple(recs))


def test_stars_boundaries_are_strict():
    assert significance_stars(0.0009999) == "***"
    assert significance_stars(0.001) == "**"
    assert significance_stars(0.009999) == "**"
    assert significance_stars(0.01) == "*"
    assert significance_stars(0.049999) == "*"
    assert significance_stars(0.05) == ""
    assert significance_stars(0.9) == ""


def _fit(dataset, model):
    design = build_design(dataset, model)
    return fit_ols(design, assemble_response(dataset))


def test_one_factor_matches_f_oneway():
    ds = _one_factor_dataset({"a": 11, "b": 14, "c": 9}, seed=3)
    table = type3_anova(_fit(ds, ModelSpec("m", (TermSpec("factor", "g"),))))
    row = table.row("g")

    samples = [
        [r.error for r in ds.records if r.factors["g"] == lvl] for lvl in ("a", "b", "c")
    ]
    want = scipy.stats.f_oneway(*samples)
    assert row.df == 2
    assert row.f_value == pytest.approx(want.statistic, rel=1e-10)
    assert row.p_value == pytest.approx(want.pvalue, rel=1e-9)


def test_two_level_factor_is_squared_t():
    ds = _one_factor_dataset({"a": 13, "b": 17}, seed=5)
    row = type3_anova(_fit(ds, ModelSpec("m", (TermSpec("factor", "g"),)))).row("g")
    a = [r.error for r in ds.records if r.factors["g"] == "a"]
    b = [r.error for r in ds.records if r.factors["g"] == "b"]
    t = scipy.stats.ttest_ind(a, b, equal_var=True)
    assert row.f_value == pytest.approx(t.statistic**2, rel=1e-10)
    assert row.p_value == pytest.approx(t.pvalue, rel=1e-9)


def test_term_order_invariance(dataset8):
    forward = ModelSpec(
        "f",
        (
            TermSpec("factor", "gender"),
            TermSpec("factor", "age"),
            TermSpec("covariate", "size"),
        ),
    )
    backward = ModelSpec("b", tuple(reversed(forward.terms)))
    t_fwd = type3_anova(_fit(dataset8, forward))
    t_bwd = type3_anova(_fit(dataset8, backward))
    for label in ("gender", "age", "size"):
        assert t_fwd.row(label).f_value == pytest.approx(
            t_bwd.row(label).f_value, rel=1e-12, abs=1e-300
        )
        assert t_fwd.row(label).p_value == pytest.approx(
            t_bwd.row(label).p_value, rel=1e-12, abs=1e-300
        )


def test_level_reorder_invariance(dataset8):
    # relabelling the taxonomy order changes the contrast basis, not the test
    model = ModelSpec("m", (TermSpec("factor", "gender"), TermSpec("factor", "age")))
    base = type3_anova(_fit(dataset8, model))
    flipped_tax = (
        FactorTaxonomy("gender", ("male", "female")),
        dataset8.taxonomies[1],
    )
    flipped = dataclasses.replace(dataset8, taxonomies=flipped_tax)
    other = type3_anova(_fit(flipped, model))
    for label in ("gender", "age"):
        assert base.row(label).f_value == pytest.approx(other.row(label).f_value, rel=1e-12)


def test_f_via_restricted_lstsq(dataset8):
    model = ModelSpec(
        "m", (TermSpec("factor", "gender"), TermSpec("covariate", "size"))
    )
    fit = _fit(dataset8, model)
    table = type3_anova(fit)
    y = fit.response
    for label in ("gender", "size"):
        reduced = fit.design.drop_term(label)
        _, rss_red, *_ = np.linalg.lstsq(reduced, y, rcond=None)
        rss_red = float(rss_red[0])
        q = fit.design.term(label).width
        want = ((rss_red - fit.rss) / q) / fit.sigma2
        assert table.row(label).f_value == pytest.approx(want, rel=1e-9)


def test_table_lookup_and_residual_fields(dataset8):
    fit = _fit(dataset8, ModelSpec("m", (TermSpec("factor", "gender"),)))
    table = type3_anova(fit)
    assert table.df_resid == fit.df_resid
    assert table.rss == fit.rss
    assert [r.term for r in table.rows] == ["gender"]
    with pytest.raises(KeyError):
        table.row("age")


def test_null_f_is_tiny_for_pure_noise():
    # response independent of the factor: F should be unremarkable
    ds = _one_factor_dataset({"a": 40, "b": 40}, seed=11)
    recs = tuple(
        dataclasses.replace(r, error=float(np.exp(np.random.default_rng(i).normal())))
        for i, r in enumerate(ds.records)
    )
    ds = dataclasses.replace(ds, records=recs)
    row = type3_anova(_fit(ds, ModelSpec("m", (TermSpec("factor", "g"),)))).row("g")
    assert 0.0 <= row.p_value <= 1.0
    assert row.stars in ("", "*", "**", "***")
