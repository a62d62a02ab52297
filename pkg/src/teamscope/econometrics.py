"""OLS, author fixed-effects (within) regression, Pearson r, bootstrapped binned curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class RegressionError(ValueError):
    pass


@dataclass
class RegressionResult:
    names: list[str]
    params: np.ndarray
    bse: np.ndarray
    tvalues: np.ndarray
    nobs: int
    rsquared: float
    df_resid: int
    entities: int = 0
    singletons: int = 0
    cov_type: str = "nonrobust"
    extra: dict = field(default_factory=dict)

    def coef(self, name: str) -> float:
        return float(self.params[self.names.index(name)])

    def to_json(self) -> dict:
        return {
            "coefficients": {
                n: {"coef": float(b), "se": float(s), "t": float(t)}
                for n, b, s, t in zip(self.names, self.params, self.bse, self.tvalues)
            },
            "nobs": self.nobs,
            "rsquared": self.rsquared,
            "df_resid": self.df_resid,
            "entities": self.entities,
            "singletons": self.singletons,
            "cov_type": self.cov_type,
            **self.extra,
        }


def _collinear_columns(X: np.ndarray, names: Sequence[str], tol: float = 1e-10) -> list[str]:
    """Columns lying in the span of the columns before them."""
    bad = []
    kept: list[int] = []
    scale = max(1.0, float(np.abs(X).max(initial=0.0)))
    for j in range(X.shape[1]):
        cols = kept + [j]
        if np.linalg.matrix_rank(X[:, cols], tol=tol * scale * math.sqrt(X.shape[0])) < len(cols):
            bad.append(names[j])
        else:
            kept.append(j)
    return bad


def _cluster_cov(X: np.ndarray, resid: np.ndarray, groups: np.ndarray, bread: np.ndarray,
                 dof_k: int) -> np.ndarray:
    _, g = np.unique(groups, return_inverse=True)
    G = g.max() + 1
    scores = np.zeros((G, X.shape[1]))
    np.add.at(scores, g, X * resid[:, None])
    meat = scores.T @ scores
    n = X.shape[0]
    c = G / (G - 1) * (n - 1) / (n - dof_k) if G > 1 else 1.0
    return c * bread @ meat @ bread


def _fit(y, X, names, df_resid, cluster=None, dof_k=None, tss=None):
    if df_resid <= 0:
        raise RegressionError(f"not enough observations: residual dof {df_resid}")
    bad = _collinear_columns(X, names)
    if bad:
        raise RegressionError(f"design matrix is rank deficient; collinear columns: {bad}")
    Q, R = np.linalg.qr(X)
    beta = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    Rinv = np.linalg.solve(R, np.eye(R.shape[0]))
    bread = Rinv @ Rinv.T
    if cluster is None:
        cov = bread * (rss / df_resid)
        cov_type = "nonrobust"
    else:
        cov = _cluster_cov(X, resid, np.asarray(cluster), bread, dof_k or X.shape[1])
        cov_type = "clustered"
    bse = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        tvalues = beta / bse
    if tss is None:
        tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else float("nan")
    return RegressionResult(list(names), beta, bse, tvalues, len(y), r2, int(df_resid),
                            cov_type=cov_type)


def ols(y, X, names: Sequence[str] | None = None, add_intercept: bool = False,
        cluster=None) -> RegressionResult:
    """Least squares with conventional (or cluster-robust) standard errors.

    Parameters
    ----------
    y : array, shape (n,)
    X : array, shape (n, k); must already contain an intercept column unless
        ``add_intercept`` is set
    names : column names, used in error messages and results
    cluster : optional group labels for cluster-robust standard errors

    Raises
    ------
    RegressionError
        On rank deficiency (naming the collinear columns) or n <= k.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if names is None:
        names = [f"x{j}" for j in range(X.shape[1])]
    names = list(names)
    if add_intercept:
        X = np.column_stack([np.ones(len(y)), X])
        names = ["const"] + names
    if len(y) != X.shape[0]:
        raise RegressionError("y and X have different lengths")
    return _fit(y, X, names, len(y) - X.shape[1], cluster)


def within_fixed_effects(y, X, entity_ids, names: Sequence[str] | None = None,
                         cluster=None) -> RegressionResult:
    """Entity fixed-effects regression by within-entity demeaning.

    Entities observed once carry no within variation; they are dropped and
    counted in ``singletons``. Residual degrees of freedom subtract the
    absorbed entity means.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names = list(names) if names is not None else [f"x{j}" for j in range(X.shape[1])]
    ids = np.asarray(entity_ids)
    _, g, counts = np.unique(ids, return_inverse=True, return_counts=True)
    keep = counts[g] >= 2
    singletons = int((counts == 1).sum())
    if not keep.any():
        raise RegressionError("no entity has two or more observations")
    y, X, g = y[keep], X[keep], g[keep]
    _, g = np.unique(g, return_inverse=True)
    G = g.max() + 1
    n_g = np.bincount(g, minlength=G).astype(float)
    y_dm = y - (np.bincount(g, weights=y, minlength=G) / n_g)[g]
    X_dm = np.empty_like(X)
    for j in range(X.shape[1]):
        X_dm[:, j] = X[:, j] - (np.bincount(g, weights=X[:, j], minlength=G) / n_g)[g]
    scale = np.maximum(np.abs(X).max(axis=0), 1.0)
    flat = [names[j] for j in range(X.shape[1]) if np.abs(X_dm[:, j]).max() <= 1e-12 * scale[j]]
    if flat:
        raise RegressionError(f"no within-entity variation in: {flat}")
    df = len(y) - X.shape[1] - G
    cl = None if cluster is None else np.asarray(cluster)[keep]
    res = _fit(y_dm, X_dm, names, df, cl, dof_k=X.shape[1] + G,
               tss=float(y_dm @ y_dm))
    res.entities = int(G)
    res.singletons = singletons
    return res


def pearson(x, y) -> float:
    """Product-moment correlation; NaN if either input is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    if len(x) < 2:
        return float("nan")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx <= 0 or syy <= 0:
        return float("nan")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class CurveBin:
    bin: int
    lo: float
    hi: float
    n: int
    mean_x: float
    mean_y: float
    ci_low: float
    ci_high: float


def bootstrap_binned_curve(x, y, n_bins: int = 10, n_boot: int = 1000, alpha: float = 0.05,
                           seed: int = 0, value_range: tuple[float, float] = (0.0, 1.0)
                           ) -> list[CurveBin]:
    """Bin ``x`` into equal-width bins and bootstrap a CI for each bin's mean y.

    Observations are resampled with replacement inside each bin; the CI is
    the (alpha/2, 1 - alpha/2) percentile interval of the resampled means.
    Each bin draws from its own child stream of ``seed``, so results do not
    depend on which other bins are occupied. Empty bins are omitted.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    lo, hi = value_range
    edges = np.linspace(lo, hi, n_bins + 1)
    idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, n_bins - 1)
    inside = (x >= lo) & (x <= hi)
    streams = np.random.SeedSequence(seed).spawn(n_bins)
    out = []
    for b in range(n_bins):
        mask = inside & (idx == b)
        yb = y[mask]
        if len(yb) == 0:
            continue
        rng = np.random.default_rng(streams[b])
        draws = rng.integers(0, len(yb), size=(n_boot, len(yb)))
        means = yb[draws].mean(axis=1)
        ci_lo, ci_hi = np.quantile(means, [alpha / 2, 1 - alpha / 2])
        out.append(CurveBin(b, float(edges[b]), float(edges[b + 1]), int(len(yb)),
                            float(x[mask].mean()), float(yb.mean()), float(ci_lo), float(ci_hi)))
    return out
