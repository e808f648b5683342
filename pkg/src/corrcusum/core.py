"""Successive correlations, the weighted fluctuation process and the test statistics."""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DegenerateError, InputError
from .linalg import check_symmetric, inv_sqrt

__all__ = [
    "Panel",
    "CorrPath",
    "DeviationProcess",
    "pair_labels",
    "prefix_correlations",
    "full_correlations",
    "deviation_process",
    "q_statistic",
    "standardized_statistic",
    "changepoint_estimate",
    "rolling_correlations",
]


@dataclass(frozen=True)
class Panel:
    """``T x p`` matrix of observations with column labels.

    ``row_labels`` optionally carries dates (or any row tag) through to
    reports; it never enters a computation.
    """

    data: np.ndarray
    labels: tuple = ()
    row_labels: Optional[tuple] = None

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise InputError(f"panel must be 2-dimensional, got shape {data.shape}")
        T, p = data.shape
        if T < 3 or p < 2:
            raise InputError(f"panel needs T >= 3 and p >= 2, got T={T}, p={p}")
        if not np.all(np.isfinite(data)):
            bad = int(np.argwhere(~np.isfinite(data))[0, 0])
            raise InputError(f"panel has a non-finite value in row {bad}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        labels = tuple(str(x) for x in self.labels) if len(self.labels) else tuple(
            f"X{i + 1}" for i in range(p)
        )
        if len(labels) != p:
            raise InputError(f"{len(labels)} labels for {p} columns")
        object.__setattr__(self, "labels", labels)
        if self.row_labels is not None:
            rl = tuple(str(x) for x in self.row_labels)
            if len(rl) != T:
                raise InputError(f"{len(rl)} row labels for {T} rows")
            object.__setattr__(self, "row_labels", rl)

    @property
    def T(self):
        return self.data.shape[0]

    @property
    def p(self):
        return self.data.shape[1]

    @property
    def d(self):
        return self.p * (self.p - 1) // 2

    @property
    def pairs(self):
        return kernels.pair_indices(self.p)


def pair_labels(labels: Sequence[str]):
    """``"a:b"`` names for the unordered pairs in canonical order."""
    pairs = kernels.pair_indices(len(labels))
    return [f"{labels[i]}:{labels[j]}" for i, j in pairs]


@dataclass(frozen=True)
class CorrPath:
    """Prefix correlations; row ``k - 2`` holds the correlations of ``x[:k]``."""

    rho: np.ndarray
    defined: np.ndarray
    T: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "T", self.rho.shape[0] + 1)

    @property
    def d(self):
        return self.rho.shape[1]

    @property
    def full(self):
        """Full-sample correlations (the last row)."""
        return self.rho[-1]

    @property
    def row_defined(self):
        return np.all(self.defined, axis=1)


def prefix_correlations(panel: Panel) -> CorrPath:
    """Pearson correlation of every pair over every prefix ``k = 2..T``.

    Entries where either prefix variance is zero are NaN and flagged False in
    ``defined``.
    """
    pairs = panel.pairs
    m2, cxy = kernels.prefix_comoments(panel.data, pairs)
    vi, vj = m2[:, pairs[:, 0]], m2[:, pairs[:, 1]]
    defined = (vi > 0.0) & (vj > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.clip(cxy / np.sqrt(vi * vj), -1.0, 1.0)
    rho[~defined] = np.nan
    return CorrPath(rho=rho, defined=defined)


def full_correlations(data, pairs=None):
    """Full-sample correlation vector of a ``T x p`` array in pair order."""
    data = np.asarray(data, dtype=np.float64)
    if pairs is None:
        pairs = kernels.pair_indices(data.shape[1])
    xc = data - data.mean(axis=0)
    ss = np.einsum("tp,tp->p", xc, xc)
    i, j = pairs[:, 0], pairs[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.einsum("tq,tq->q", xc[:, i], xc[:, j]) / np.sqrt(ss[i] * ss[j])
    return np.clip(r, -1.0, 1.0)


@dataclass(frozen=True)
class DeviationProcess:
    """``(k / sqrt(T)) * ||R (rho_k - rho_T)||_1`` for ``k = 2..T``.

    ``values[k - 2]`` belongs to prefix length ``k``. Rows with an undefined
    prefix correlation are NaN and excluded from maxima.
    """

    values: np.ndarray
    standardized: bool

    @property
    def k(self):
        return np.arange(2, self.values.shape[0] + 2)

    @property
    def defined(self):
        return ~np.isnan(self.values)

    def max(self):
        if not np.any(self.defined):
            raise DegenerateError("no prefix with defined correlations")
        return float(np.nanmax(self.values))


def deviation_process(corr: CorrPath, e_inv_sqrt=None) -> DeviationProcess:
    """Weighted L1 deviation of prefix from full-sample correlations.

    Parameters
    ----------
    corr : CorrPath
    e_inv_sqrt : array_like, shape (d, d), optional
        Symmetric standardizing matrix applied to each deviation vector.
    """
    if not np.all(corr.defined[-1]):
        raise DegenerateError("full-sample correlation undefined (constant column)")
    diff = corr.rho - corr.full
    if e_inv_sqrt is not None:
        r = check_symmetric(e_inv_sqrt, tol=1e-8)
        if r.shape[0] != corr.d:
            raise InputError(
                f"standardizing matrix is {r.shape[0]}x{r.shape[0]}, expected {corr.d}x{corr.d}"
            )
        diff = diff @ r.T
    T = corr.T
    k = np.arange(2, T + 1, dtype=np.float64)
    values = k / np.sqrt(T) * np.abs(diff).sum(axis=1)
    values[~corr.row_defined] = np.nan
    # P_{T,T} is zero by construction; pin it against rounding
    values[-1] = 0.0
    return DeviationProcess(values=values, standardized=e_inv_sqrt is not None)


def q_statistic(panel: Panel) -> float:
    """Unstandardized statistic ``max_k (k/sqrt(T)) ||P_{k,T}||_1``."""
    return deviation_process(prefix_correlations(panel)).max()


def standardized_statistic(panel: Panel, e_hat) -> float:
    """Statistic with deviations standardized by ``e_hat^{-1/2}``.

    ``e_hat`` may be an ``EMatrix`` or a plain ``d x d`` array.
    """
    m = getattr(e_hat, "m", e_hat)
    return deviation_process(prefix_correlations(panel), inv_sqrt(m)).max()


def changepoint_estimate(process) -> int:
    """Smallest ``k`` at which the process attains its maximum."""
    values = getattr(process, "values", process)
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise InputError("empty process")
    if np.all(np.isnan(values)):
        raise DegenerateError("process has no defined entries")
    # nanargmax returns the first maximizer
    return int(np.nanargmax(values)) + 2


def rolling_correlations(panel: Panel, window: int) -> np.ndarray:
    """Pairwise Pearson correlations over windows ``t .. t + window - 1``.

    Returns an array of shape ``(T - window + 1, d)``; windows where a column
    is constant give NaN.
    """
    window = int(window)
    if window < 2 or window > panel.T:
        raise InputError(f"window must be in [2, T={panel.T}], got {window}")
    win = np.lib.stride_tricks.sliding_window_view(panel.data, window, axis=0)
    # win: (n_windows, p, window)
    xc = win - win.mean(axis=2, keepdims=True)
    ss = np.einsum("npw,npw->np", xc, xc)
    pairs = panel.pairs
    i, j = pairs[:, 0], pairs[:, 1]
    cov = np.einsum("nqw,nqw->nq", xc[:, i, :], xc[:, j, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        r = cov / np.sqrt(ss[:, i] * ss[:, j])
    r[~((ss[:, i] > 0) & (ss[:, j] > 0))] = np.nan
    return np.clip(r, -1.0, 1.0)
