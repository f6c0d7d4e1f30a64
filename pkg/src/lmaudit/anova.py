"""Type III ANOVA by model comparison.

Each term's F statistic compares the full model against the model with that
term's columns removed, holding every other term in place:

    F = ((RSS_reduced - RSS_full) / q) / (RSS_full / df_resid)

Under sum-to-zero contrasts this is the marginal (order-independent) test
for main-effects models.  On balanced orthogonal designs it coincides with
the sequential decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import f_sf
from .linmod import LinearModelFit

__all__ = ["AnovaRow", "AnovaTable", "type3_anova", "significance_stars"]

# Strict thresholds: p exactly equal to a boundary earns the weaker marking.
_STAR_LEVELS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))


def significance_stars(p: float) -> str:
    """Star marking for a p-value: *** below 0.001, ** below 0.01, * below 0.05."""
    for threshold, stars in _STAR_LEVELS:
        if p < threshold:
            return stars
    return ""


@dataclass(frozen=True)
class AnovaRow:
    term: str
    df: int
    f_value: float
    p_value: float

    @property
    def stars(self) -> str:
        return significance_stars(self.p_value)


@dataclass(frozen=True)
class AnovaTable:
    rows: tuple[AnovaRow, ...]
    df_resid: int
    rss: float

    def row(self, term: str) -> AnovaRow:
        for row in self.rows:
            if row.term == term:
                return row
        raise KeyError(f"no ANOVA row for term {term!r}")


def _reduced_rss(matrix: np.ndarray, y: np.ndarray) -> float:
    q, _ = scipy.linalg.qr(matrix, mode="economic")
    resid = y - q @ (q.T @ y)
    return float(resid @ resid)


def type3_anova(fit: LinearModelFit) -> AnovaTable:
    """Marginal F tests for every non-intercept term of a fitted model."""
    design = fit.design
    y = fit.response
    rows = []
    for info in design.terms:
        reduced = design.drop_term(info.label)
        rss_reduced = _reduced_rss(reduced, y)
        q = info.width
        # Projection theory guarantees rss_reduced >= rss; guard the
        # subtraction against rounding at machine scale.
        num = max(rss_reduced - fit.rss, 0.0) / q
        f_value = num / fit.sigma2
        p_value = f_sf(f_value, float(q), float(fit.df_resid))
        rows.append(AnovaRow(term=info.label, df=q, f_value=f_value, p_value=p_value))
    return AnovaTable(rows=tuple(rows), df_resid=fit.df_resid, rss=fit.rss)
