"""Design matrices and least-squares fits.

Factors are encoded with sum-to-zero contrasts over their observed levels
(k - 1 columns per factor, required for marginal Type III tests), covariates
are centered after any declared transform, and the intercept is always the
first column.  Fitting goes through a column-pivoted QR factorization, never
the normal equations, with rank detected at a relative tolerance of 1e-10.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import AuditDataset
from .errors import ConfigError, DataError, NumericError
from .geometry import nme_batch

__all__ = [
    "TermSpec",
    "ModelSpec",
    "TermInfo",
    "DesignMatrix",
    "build_design",
    "assemble_response",
    "fit_ols",
    "LinearModelFit",
    "ResidualDiagnostics",
    "residual_diagnostics",
]

_RANK_TOL = 1e-10

COVARIATE_TRANSFORMS = ("identity", "reciprocal")


@dataclass(frozen=True)
class TermSpec:
    """One model term: a factor or a (possibly transformed) covariate."""

    kind: str  # "factor" | "covariate"
    name: str
    transform: str = "identity"

    def __post_init__(self):
        if self.kind not in ("factor", "covariate"):
            raise ConfigError(f"unknown term kind {self.kind!r}")
        if self.kind == "factor" and self.transform != "identity":
            raise ConfigError(f"factor term {self.name!r} cannot carry a transform")
        if self.transform not in COVARIATE_TRANSFORMS:
            raise ConfigError(
                f"unknown covariate transform {self.transform!r} "
                f"(expected one of {COVARIATE_TRANSFORMS})"
            )

    @property
    def label(self) -> str:
        if self.kind == "covariate" and self.transform == "reciprocal":
            return f"1/{self.name}"
        return self.name


@dataclass(frozen=True)
class ModelSpec:
    """A named main-effects model: an ordered tuple of terms."""

    name: str
    terms: tuple[TermSpec, ...]

    def __post_init__(self):
        if not self.name:
            raise ConfigError("model name must be non-empty")
        if not self.terms:
            raise ConfigError(f"model {self.name!r} declares no terms")
        labels = [t.label for t in self.terms]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"model {self.name!r} has duplicate terms: {labels}")

    def factor_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.terms if t.kind == "factor")


@dataclass(frozen=True)
class TermInfo:
    """Placement of one term inside a built design matrix."""

    spec: TermSpec
    start: int
    stop: int
    levels: tuple[str, ...] = ()  # observed levels, factors only
    mean: float = 0.0  # centering constant, covariates only

    @property
    def label(self) -> str:
        return self.spec.label

    @property
    def width(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class DesignMatrix:
    """An (n, p) design with intercept first and per-term column spans."""

    matrix: np.ndarray
    columns: tuple[str, ...]
    terms: tuple[TermInfo, ...]

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def p(self) -> int:
        return self.matrix.shape[1]

    def term(self, label: str) -> TermInfo:
        for info in self.terms:
            if info.label == label:
                return info
        raise ConfigError(f"no term labelled {label!r} in design")

    def factor_contrast_row(self, info: TermInfo, level: str) -> np.ndarray:
        """Sum-to-zero contrast row of one level of a factor term."""
        if info.spec.kind != "factor":
            raise ConfigError(f"term {info.label!r} is not a factor")
        k = len(info.levels)
        row = np.zeros(k - 1)
        idx = info.levels.index(level) if level in info.levels else -1
        if idx < 0:
            raise DataError(f"level {level!r} not observed for factor {info.label!r}")
        if idx == k - 1:
            row[:] = -1.0
        else:
            row[idx] = 1.0
        return row

    def drop_term(self, label: str) -> np.ndarray:
        """Matrix with the named term's columns removed (for model comparison)."""
        info = self.term(label)
        return np.delete(self.matrix, np.s_[info.start : info.stop], axis=1)


def _observed_levels(dataset: AuditDataset, name: str) -> tuple[str, ...]:
    taxonomy = dataset.taxonomy(name)
    present = {r.factors[name] for r in dataset.records}
    return tuple(lvl for lvl in taxonomy.levels if lvl in present)


def transform_covariate(values: np.ndarray, transform: str, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if transform == "identity":
        return arr
    if transform == "reciprocal":
        if not (arr != 0.0).all():
            idx = int(np.argmin(arr != 0.0))
            raise DataError(f"covariate {name!r} is zero at row {idx}; cannot take reciprocal")
        return 1.0 / arr
    raise ConfigError(f"unknown covariate transform {transform!r}")


def build_design(dataset: AuditDataset, model: ModelSpec) -> DesignMatrix:
    """Build the design matrix of a model over a dataset.

    Raises ``DataError`` when a term references an unknown column or a
    factor has fewer than two observed levels.
    """
    n = dataset.n
    if n == 0:
        raise DataError("cannot build a design over an empty dataset")
    blocks: list[np.ndarray] = [np.ones((n, 1))]
    columns: list[str] = ["(intercept)"]
    infos: list[TermInfo] = []
    cursor = 1
    factor_names = {t.name for t in dataset.taxonomies}

    for spec in model.terms:
        if spec.kind == "factor":
            if spec.name not in factor_names:
                raise DataError(f"model {model.name!r}: unknown factor {spec.name!r}")
            levels = _observed_levels(dataset, spec.name)
            if len(levels) < 2:
                raise DataError(
                    f"factor {spec.name!r} has fewer than two observed levels; "
                    f"cannot estimate its effect"
                )
            k = len(levels)
            block = np.zeros((n, k - 1))
            index = {lvl: i for i, lvl in enumerate(levels)}
            for row, rec in enumerate(dataset.records):
                i = index[rec.factors[spec.name]]
                if i == k - 1:
                    block[row, :] = -1.0
                else:
                    block[row, i] = 1.0
            blocks.append(block)
            columns.extend(f"{spec.name}[{lvl}]" for lvl in levels[:-1])
            infos.append(TermInfo(spec=spec, start=cursor, stop=cursor + k - 1, levels=levels))
            cursor += k - 1
        else:
            if spec.name not in dataset.covariate_names:
                raise DataError(f"model {model.name!r}: unknown covariate {spec.name!r}")
            raw = np.array(dataset.covariate_values(spec.name), dtype=float)
            values = transform_covariate(raw, spec.transform, spec.name)
            if not np.isfinite(values).all():
                idx = int(np.argmin(np.isfinite(values)))
                raise DataError(f"covariate {spec.label!r} non-finite at row {idx}")
            mean = float(values.mean())
            blocks.append((values - mean).reshape(n, 1))
            columns.append(spec.label)
            infos.append(TermInfo(spec=spec, start=cursor, stop=cursor + 1, mean=mean))
            cursor += 1

    matrix = np.hstack(blocks)
    return DesignMatrix(matrix=matrix, columns=tuple(columns), terms=tuple(infos))


def assemble_response(
    dataset: AuditDataset,
    mode: str = "precomputed",
    normalizer: str = "bbox_height_px",
    offset: float = 0.0,
) -> np.ndarray:
    """Collect the raw (untransformed) response vector for a dataset.

    ``mode="precomputed"`` reads each record's stored error value;
    ``mode="landmarks"`` computes the normalized mean error from the
    records' landmark sets, normalized by the named covariate.  A
    configured offset is added at the end (a small epsilon makes zero
    errors transformable; record it in the report when used).
    """
    if mode == "precomputed":
        values = []
        for rec in dataset.records:
            if rec.error is None:
                raise DataError(f"record {rec.sample_id!r} has no precomputed response")
            values.append(rec.error)
        y = np.array(values, dtype=float)
    elif mode == "landmarks":
        if any(rec.gt_points is None for rec in dataset.records):
            bad = next(r.sample_id for r in dataset.records if r.gt_points is None)
            raise DataError(f"record {bad!r} has no landmark sets")
        counts = {len(rec.gt_points) for rec in dataset.records}
        if len(counts) != 1:
            raise DataError(f"records disagree on landmark count: {sorted(counts)}")
        gt = np.array([rec.gt_points for rec in dataset.records], dtype=float)
        pred = np.array([rec.pred_points for rec in dataset.records], dtype=float)
        norms = np.array(dataset.covariate_values(normalizer), dtype=float)
        try:
            y = nme_batch(gt, pred, norms)
        except ValueError as exc:
            raise DataError(str(exc)) from None
    else:
        raise ConfigError(f"unknown response mode {mode!r}")
    return y + offset


@dataclass(frozen=True)
class LinearModelFit:
    """Ordinary least squares fit of a design matrix."""

    design: DesignMatrix
    response: np.ndarray
    beta: np.ndarray
    covariance: np.ndarray  # sigma2 * (X'X)^-1
    fitted: np.ndarray
    residuals: np.ndarray
    rss: float
    df_resid: int
    sigma2: float
    r_squared: float


def _qr_solve(matrix: np.ndarray, y: np.ndarray, context: str):
    """Least squares via column-pivoted QR; returns (beta, rss, rank_info)."""
    n, p = matrix.shape
    q, r, piv = scipy.linalg.qr(matrix, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    scale = diag[0] if diag.size and diag[0] > 0.0 else 0.0
    rank = int((diag > _RANK_TOL * scale).sum()) if scale > 0.0 else 0
    if rank < p:
        offending = piv[rank:]
        raise NumericError(
            f"{context}: design is rank deficient "
            f"(rank {rank} of {p}; dependent columns at {sorted(int(i) for i in offending)})"
        )
    qty = q.T @ y
    beta_piv = scipy.linalg.solve_triangular(r, qty)
    beta = np.empty(p)
    beta[piv] = beta_piv
    fitted = matrix @ beta
    residuals = y - fitted
    rss = float(residuals @ residuals)
    return beta, fitted, residuals, rss, (r, piv)


def fit_ols(design: DesignMatrix, y: np.ndarray) -> LinearModelFit:
    """Fit ordinary least squares, with covariance and fit diagnostics.

    Requires more rows than columns; raises ``NumericError`` on rank
    deficiency, naming the offending columns.
    """
    response = np.asarray(y, dtype=float)
    n, p = design.matrix.shape
    if response.shape != (n,):
        raise DataError(f"response length {response.shape} does not match design rows {n}")
    if not np.isfinite(response).all():
        raise DataError("response contains non-finite values")
    if n <= p:
        raise NumericError(f"need more rows than columns to fit, got n={n}, p={p}")

    beta, fitted, residuals, rss, (r, piv) = _qr_solve(design.matrix, response, "fit_ols")
    df_resid = n - p
    sigma2 = rss / df_resid

    rinv = scipy.linalg.solve_triangular(r, np.eye(p))
    xtx_inv_piv = rinv @ rinv.T
    xtx_inv = np.empty((p, p))
    xtx_inv[np.ix_(piv, piv)] = xtx_inv_piv
    covariance = sigma2 * xtx_inv

    centered = response - response.mean()
    tss = float(centered @ centered)
    r_squared = 1.0 - rss / tss if tss > 0.0 else 0.0

    return LinearModelFit(
        design=design,
        response=response,
        beta=beta,
        covariance=covariance,
        fitted=fitted,
        residuals=residuals,
        rss=rss,
        df_resid=df_resid,
        sigma2=sigma2,
        r_squared=r_squared,
    )


@dataclass(frozen=True)
class ResidualDiagnostics:
    """Moment-based residual shape summary."""

    skewness: float
    excess_kurtosis: float


def residual_diagnostics(fit: LinearModelFit) -> ResidualDiagnostics:
    """Sample skewness g1 = m3 / m2^1.5 and excess kurtosis g2 = m4 / m2^2 - 3."""
    r = fit.residuals
    if r.shape[0] < 3:
        raise NumericError("need at least three residuals for shape diagnostics")
    centered = r - r.mean()
    m2 = float((centered**2).mean())
    if m2 <= 0.0:
        raise NumericError("residuals are constant; shape diagnostics undefined")
    m3 = float((centered**3).mean())
    m4 = float((centered**4).mean())
    return ResidualDiagnostics(
        skewness=m3 / m2**1.5,
        excess_kurtosis=m4 / m2**2 - 3.0,
    )
