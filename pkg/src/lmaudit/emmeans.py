"""Estimated marginal means with simultaneous confidence intervals.

A focus factor's marginal mean at level L is the model prediction averaged
over a reference grid: every combination of the other factors' observed
levels with equal weight, covariates held at their training means (the mean
of the transformed covariate, e.g. the mean of 1/height).  Because factor
encodings are sum-to-zero and covariates are centered, the averaged design
vector reduces to the intercept plus the focus level's contrast row; the
grid is still exposed for inspection.

Interval families are Sidak-adjusted: alpha_adj = 1 - (1 - alpha)^(1/m)
for a family of m intervals.  Overlap letters follow the closed-interval
rule (touching endpoints overlap), with letters assigned per maximal clique
of the overlap graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import t_quantile
from .errors import ConfigError
from .linmod import LinearModelFit, TermInfo
from .transforms import BoxCoxTransform

__all__ = [
    "MarginalMean",
    "ReferenceGrid",
    "EmmRow",
    "EmmSummary",
    "reference_grid",
    "marginal_means",
    "sidak_alpha",
    "overlap_groups",
    "summarize_emmeans",
]


@dataclass(frozen=True)
class MarginalMean:
    level: str
    estimate: float
    se: float
    df: int


@dataclass(frozen=True)
class ReferenceGrid:
    """The averaging grid behind a family of marginal means."""

    focus: str
    focus_levels: tuple[str, ...]
    other_factors: tuple[tuple[str, tuple[str, ...]], ...]
    covariate_values: tuple[tuple[str, float], ...]  # transformed scale

    @property
    def combinations_per_level(self) -> int:
        count = 1
        for _, levels in self.other_factors:
            count *= len(levels)
        return count


@dataclass(frozen=True)
class EmmRow:
    """One focus level: transformed-scale estimate and both interval scales."""

    level: str
    estimate: float
    se: float
    df: int
    lower: float
    upper: float
    response_estimate: float | None
    response_lower: float | None
    response_upper: float | None
    letters: str


@dataclass(frozen=True)
class EmmSummary:
    factor: str
    alpha: float
    alpha_adj: float
    rows: tuple[EmmRow, ...]


def _focus_term(fit: LinearModelFit, focus: str) -> TermInfo:
    for info in fit.design.terms:
        if info.spec.kind == "factor" and info.spec.name == focus:
            return info
    raise ConfigError(f"focus factor {focus!r} is absent from the fitted model")


def reference_grid(
    fit: LinearModelFit,
    focus: str,
    covariate_overrides: Mapping[str, float] | None = None,
) -> ReferenceGrid:
    focus_info = _focus_term(fit, focus)
    others = tuple(
        (info.spec.name, info.levels)
        for info in fit.design.terms
        if info.spec.kind == "factor" and info.spec.name != focus
    )
    overrides = dict(covariate_overrides or {})
    covariates = tuple(
        (info.label, overrides.get(info.label, info.mean))
        for info in fit.design.terms
        if info.spec.kind == "covariate"
    )
    return ReferenceGrid(
        focus=focus,
        focus_levels=focus_info.levels,
        other_factors=others,
        covariate_values=covariates,
    )


def _averaged_row(fit: LinearModelFit, focus_info: TermInfo, level: str,
                  grid: ReferenceGrid) -> np.ndarray:
    """Design vector of the equal-weight grid average for one focus level.

    Averaging factorizes over terms: each non-focus factor contributes the
    mean of its contrast rows over its levels (exactly zero under
    sum-to-zero coding), and each covariate contributes its fixed value
    minus its centering mean.
    """
    design = fit.design
    c = np.zeros(design.p)
    c[0] = 1.0
    c[focus_info.start : focus_info.stop] = design.factor_contrast_row(focus_info, level)
    fixed = dict(grid.covariate_values)
    for info in design.terms:
        if info is focus_info:
            continue
        if info.spec.kind == "factor":
            rows = np.stack(
                [design.factor_contrast_row(info, lvl) for lvl in info.levels]
            )
            c[info.start : info.stop] = rows.mean(axis=0)
        else:
            c[info.start] = fixed[info.label] - info.mean
    return c


def marginal_means(
    fit: LinearModelFit,
    focus: str,
    covariate_overrides: Mapping[str, float] | None = None,
) -> list[MarginalMean]:
    """Marginal means of a factor with standard errors and residual df.

    ``covariate_overrides`` fixes named covariate terms at alternative
    transformed-scale values instead of their training means.
    """
    focus_info = _focus_term(fit, focus)
    grid = reference_grid(fit, focus, covariate_overrides)
    out = []
    for level in focus_info.levels:
        c = _averaged_row(fit, focus_info, level, grid)
        estimate = float(c @ fit.beta)
        variance = float(c @ fit.covariance @ c)
        se = float(np.sqrt(max(variance, 0.0)))
        out.append(MarginalMean(level=level, estimate=estimate, se=se, df=fit.df_resid))
    return out


def sidak_alpha(alpha: float, m: int) -> float:
    """Familywise-adjusted per-interval alpha, 1 - (1 - alpha)^(1/m)."""
    if not (0.0 < alpha < 1.0):
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha!r}")
    if m < 1:
        raise ConfigError(f"family size must be >= 1, got {m!r}")
    if m == 1:
        # no correction for a single interval; skip the power round trip,
        # which would otherwise smear alpha by an ulp
        return alpha
    return 1.0 - (1.0 - alpha) ** (1.0 / m)


def _letters() -> "list[str]":
    # a..z, then aa, ab, ... for pathological family sizes.
    single = [chr(ord("a") + i) for i in range(26)]
    return single + [x + y for x in single for y in single]


def overlap_groups(intervals: Sequence[tuple[float, float]]) -> list[str]:
    """Letter groupings such that two intervals share a letter iff they overlap.

    Overlap is the closed-interval test (touching endpoints count).  Each
    maximal clique of the overlap graph receives one letter, sweeping the
    candidate clique points left to right, so disjoint intervals get
    distinct letters and letter count stays minimal for interval graphs.
    """
    n = len(intervals)
    if n == 0:
        return []
    for lo, hi in intervals:
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
            raise ConfigError(f"invalid interval ({lo!r}, {hi!r})")
    cliques: list[set[int]] = []
    for point in sorted({lo for lo, _ in intervals}):
        clique = {i for i, (lo, hi) in enumerate(intervals) if lo <= point <= hi}
        if any(clique <= existing for existing in cliques):
            continue
        cliques = [c for c in cliques if not c <= clique]
        cliques.append(clique)
    alphabet = _letters()
    if len(cliques) > len(alphabet):
        raise ConfigError(f"too many overlap groups ({len(cliques)})")
    assigned: list[list[str]] = [[] for _ in range(n)]
    for letter, clique in zip(alphabet, cliques):
        for i in clique:
            assigned[i].append(letter)
    return ["".join(sorted(ls)) for ls in assigned]


def summarize_emmeans(
    fit: LinearModelFit,
    focus: str,
    alpha: float = 0.05,
    transform: BoxCoxTransform | None = None,
    covariate_overrides: Mapping[str, float] | None = None,
) -> EmmSummary:
    """Marginal means of a factor with Sidak-adjusted intervals and letters.

    Intervals are computed on the transformed (model) scale and mapped back
    through the inverse response transform when one is supplied; the inverse
    is monotone, so the letter groups agree on both scales.
    """
    means = marginal_means(fit, focus, covariate_overrides)
    m = len(means)
    alpha_adj = sidak_alpha(alpha, m)
    rows = []
    bounds = []
    for mean in means:
        half = t_quantile(1.0 - alpha_adj / 2.0, float(mean.df)) * mean.se
        bounds.append((mean.estimate - half, mean.estimate + half))
    letters = overlap_groups(bounds)
    for mean, (lo, hi), ls in zip(means, bounds, letters):
        if transform is not None:
            resp_est = float(transform.invert(mean.estimate))
            resp_lo = float(transform.invert(lo))
            resp_hi = float(transform.invert(hi))
        else:
            resp_est = resp_lo = resp_hi = None
        rows.append(
            EmmRow(
                level=mean.level,
                estimate=mean.estimate,
                se=mean.se,
                df=mean.df,
                lower=lo,
                upper=hi,
                response_estimate=resp_est,
                response_lower=resp_lo,
                response_upper=resp_hi,
                letters=ls,
            )
        )
    return EmmSummary(factor=focus, alpha=alpha, alpha_adj=alpha_adj, rows=tuple(rows))
