"""Data-generating processes, size/power studies and local-alternative drift."""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .bootstrap import BootstrapConfig
from .core import Panel
from .errors import InputError
from .limit import QuantileTable, critical_value
from .linalg import is_positive_definite
from .pipeline import run_test

__all__ = [
    "DISTRIBUTIONS",
    "MA_BURN_IN",
    "DgpSpec",
    "BreakSpec",
    "StepFunctionG",
    "LocalPowerResult",
    "corr_matrix",
    "check_break",
    "generate",
    "rep_rng",
    "rejection_study",
    "rejection_se",
    "drift_C",
    "local_power_study",
]

log = logging.getLogger(__name__)

DISTRIBUTIONS = ("normal", "student_t3")
MA_BURN_IN = 50
_PANEL_TAG = 0x5A11
_BOOT_TAG = 0x5B00


def corr_matrix(p, offdiag):
    """``p x p`` correlation matrix from its upper triangle in pair order."""
    offdiag = np.broadcast_to(np.asarray(offdiag, dtype=np.float64), (p * (p - 1) // 2,))
    r = np.eye(p)
    pairs = kernels.pair_indices(p)
    r[pairs[:, 0], pairs[:, 1]] = offdiag
    r[pairs[:, 1], pairs[:, 0]] = offdiag
    return r


def _chol(r, what):
    if np.any(np.abs(r - np.eye(len(r))) > 1.0) or not is_positive_definite(r, tol=1e-12):
        raise InputError(f"{what} correlation matrix is not positive definite")
    return np.linalg.cholesky(r)


@dataclass(frozen=True)
class DgpSpec:
    """Stationary innovation law, optional MA(1) filter and sample size.

    ``base_correlation`` is the upper triangle in pair order (scalar
    broadcasts); ``variances`` are the marginal variances of the output.
    """

    p: int
    T: int
    distribution: str = "normal"
    ma_coefficient: float = 0.0
    base_correlation: Optional[Sequence[float]] = None
    variances: Optional[Sequence[float]] = None
    seed: int = 0

    def __post_init__(self):
        if self.p < 2:
            raise InputError(f"p must be >= 2, got {self.p}")
        if self.T < 3:
            raise InputError(f"T must be >= 3, got {self.T}")
        if self.distribution not in DISTRIBUTIONS:
            raise InputError(f"distribution must be one of {DISTRIBUTIONS}, got {self.distribution!r}")
        if not 0.0 <= self.ma_coefficient < 1.0:
            raise InputError(f"MA coefficient must lie in [0, 1), got {self.ma_coefficient}")
        d = self.d
        base = np.zeros(d) if self.base_correlation is None else np.broadcast_to(
            np.asarray(self.base_correlation, dtype=np.float64), (d,)).copy()
        var = np.ones(self.p) if self.variances is None else np.asarray(self.variances, float)
        if var.shape != (self.p,) or np.any(var <= 0):
            raise InputError("variances must be p positive numbers")
        object.__setattr__(self, "base_correlation", base)
        object.__setattr__(self, "variances", var)
        _chol(self.correlation, "base")

    @property
    def d(self):
        return self.p * (self.p - 1) // 2

    @property
    def correlation(self):
        return corr_matrix(self.p, self.base_correlation)


@dataclass(frozen=True)
class BreakSpec:
    """Shift of the pairwise correlations at fraction ``location`` of the sample."""

    delta_rho: Sequence[float]
    location: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "delta_rho", np.asarray(self.delta_rho, dtype=np.float64).ravel())
        if not 0.0 < self.location < 1.0:
            raise InputError(f"break location must lie in (0, 1), got {self.location}")

    @classmethod
    def single_pair(cls, p, delta, pair=(0, 1), location=0.5):
        """Shift only ``pair`` (0-based column indices) by ``delta``."""
        pairs = [tuple(x) for x in kernels.pair_indices(p)]
        dr = np.zeros(len(pairs))
        dr[pairs.index(tuple(sorted(pair)))] = delta
        return cls(dr, location)

    @classmethod
    def all_pairs(cls, p, delta, location=0.5):
        return cls(np.full(p * (p - 1) // 2, float(delta)), location)

    def row(self, T):
        """0-based first row carrying the post-break correlation."""
        return int(np.floor(self.location * T))


def _simulate(dgp, segments, rng):
    """Draw a panel whose innovation correlation is piecewise constant.

    ``segments`` is a list of ``(first_row, cholesky_factor)`` with the first
    entry starting at row 0. Rows are output rows; the MA burn-in uses the
    first segment.
    """
    T, p = dgp.T, dgp.p
    theta = float(dgp.ma_coefficient)
    burn = MA_BURN_IN if theta != 0.0 else 0
    n = T + burn
    z = rng.standard_normal((n, p))
    eps = np.empty_like(z)
    bounds = [s for s, _ in segments[1:]] + [T]
    for (start, fac), stop in zip(segments, bounds):
        lo = 0 if start == 0 else start + burn
        eps[lo:stop + burn] = z[lo:stop + burn] @ fac.T
    if dgp.distribution == "student_t3":
        w = rng.chisquare(3.0, size=n)
        # t3 has variance 3; the 1/sqrt(3) rescales to unit variance
        eps = eps / np.sqrt(w / 3.0)[:, None] / np.sqrt(3.0)
    if burn:
        y = (eps[1:] + theta * eps[:-1])[burn - 1:] / np.sqrt(1.0 + theta * theta)
    else:
        y = eps
    return Panel(y * np.sqrt(dgp.variances))


def generate(dgp: DgpSpec, brk: Optional[BreakSpec] = None, rng=None) -> Panel:
    """Simulate one panel, optionally with a correlation break.

    Innovations are ``L z_t`` with ``L`` the Cholesky factor of the target
    correlation matrix (for ``student_t3``, a Gaussian scale mixture rescaled
    to unit variance). With a nonzero MA coefficient ``theta`` the output is
    ``(e_t + theta e_{t-1}) / sqrt(1 + theta^2)`` after a burn-in of
    ``MA_BURN_IN`` draws. A break switches the innovation factor from row
    ``floor(location * T)`` (0-based) onward.
    """
    if rng is None:
        rng = rep_rng(dgp.seed, 0)
    segments = [(0, _chol(dgp.correlation, "pre-break"))]
    if brk is not None:
        segments.append((brk.row(dgp.T), check_break(dgp, brk)))
    return _simulate(dgp, segments, rng)


def check_break(dgp: DgpSpec, brk: BreakSpec):
    """Validate ``brk`` against ``dgp``; return the post-break Cholesky factor.

    Raises :class:`InputError` if the post-break correlation matrix is not
    positive definite.
    """
    if brk.delta_rho.shape != (dgp.d,):
        raise InputError(f"delta_rho must have {dgp.d} entries, got {brk.delta_rho.size}")
    return _chol(corr_matrix(dgp.p, dgp.base_correlation + brk.delta_rho), "post-break")


def rep_rng(seed, r):
    """Generator for Monte Carlo repetition ``r`` of a study seeded with ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(_PANEL_TAG, int(r)))
    return np.random.Generator(np.random.PCG64(ss))


def _rep_boot(boot, r):
    ss = np.random.SeedSequence(int(boot.seed), spawn_key=(_BOOT_TAG, int(r)))
    seed = int(ss.generate_state(1, np.uint64)[0])
    return BootstrapConfig(boot.block_length, boot.replications, seed)


def rejection_se(rate, reps):
    """Binomial Monte Carlo standard error of a rejection rate."""
    return float(np.sqrt(max(rate * (1.0 - rate), 0.0) / max(reps, 1)))


def _check_study(mc_reps, table, d):
    if int(mc_reps) < 1:
        raise InputError(f"mc_reps must be >= 1, got {mc_reps}")
    if table.d != d:
        raise InputError(f"quantile table is for d={table.d}, study needs d={d}")


def rejection_study(dgp: DgpSpec, brk: Optional[BreakSpec], mc_reps: int, boot: BootstrapConfig,
                    table: QuantileTable, alpha=0.05) -> float:
    """Empirical rejection rate of the test over ``mc_reps`` simulated panels.

    Repetition ``r`` draws its panel from :func:`rep_rng` ``(dgp.seed, r)``
    and its bootstrap from a seed derived from ``(boot.seed, r)``.
    """
    _check_study(mc_reps, table, dgp.d)
    crit = critical_value(table, alpha)
    hits = 0
    for r in range(int(mc_reps)):
        panel = generate(dgp, brk, rep_rng(dgp.seed, r))
        rep = run_test(panel, table, _rep_boot(boot, r), alpha)
        hits += rep.q_std > crit
    return hits / int(mc_reps)


# ---------------------------------------------------------------------------
# Local alternatives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepFunctionG:
    """Piecewise-constant direction of a local correlation change.

    Component ``q`` starts at ``baseline[q]`` and takes level ``v`` from each
    jump point ``z`` in ``jumps[q] = [(z, v), ...]`` on (right-continuous).
    """

    jumps: Sequence[Sequence[tuple]]
    magnitude: float = 1.0
    variances: Optional[Sequence[float]] = None
    baseline: Optional[Sequence[float]] = None

    def __post_init__(self):
        jumps = tuple(tuple(sorted((float(z), float(v)) for z, v in comp)) for comp in self.jumps)
        d = len(jumps)
        p = int(round((1 + np.sqrt(1 + 8 * d)) / 2))
        if d < 1 or p * (p - 1) // 2 != d:
            raise InputError(f"number of components {d} is not p(p-1)/2")
        for comp in jumps:
            for z, _ in comp:
                if not 0.0 < z < 1.0:
                    raise InputError(f"jump points must lie in (0, 1), got {z}")
        base = np.zeros(d) if self.baseline is None else np.asarray(self.baseline, float)
        var = np.ones(p) if self.variances is None else np.asarray(self.variances, float)
        if var.shape != (p,) or np.any(var <= 0):
            raise InputError("variances must be p positive numbers")
        if self.magnitude < 0:
            raise InputError(f"magnitude must be >= 0, got {self.magnitude}")
        if not any(v != b for comp, b in zip(jumps, base) for _, v in comp):
            raise InputError("g must have at least one non-constant component")
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "baseline", base)
        object.__setattr__(self, "variances", var)

    @classmethod
    def single_jump(cls, d, component=0, z0=0.5, level=1.0, magnitude=1.0, variances=None):
        jumps = [[] for _ in range(d)]
        jumps[component] = [(z0, level)]
        return cls(jumps, magnitude, variances)

    @property
    def d(self):
        return len(self.jumps)

    @property
    def p(self):
        return len(self.variances)

    def value(self, u):
        """``g(u)`` for an array of ``u``; shape ``(len(u), d)``."""
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        out = np.tile(self.baseline, (u.size, 1))
        for q, comp in enumerate(self.jumps):
            for z, v in comp:
                out[u >= z, q] = v
        return out

    def integral(self, s):
        """``int_0^s g(u) du`` componentwise, exact; shape ``(len(s), d)``."""
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        out = np.empty((s.size, self.d))
        for q, comp in enumerate(self.jumps):
            knots = [0.0] + [z for z, _ in comp]
            levels = [self.baseline[q]] + [v for _, v in comp]
            acc = np.zeros(s.size)
            for a, lev, b in zip(knots, levels, knots[1:] + [np.inf]):
                acc += lev * np.clip(s - a, 0.0, b - a)
            out[:, q] = acc
        return out


def drift_C(g: StepFunctionG, grid_n=1000):
    """Deterministic drift of the local-alternative limit on ``s = m / grid_n``.

    Component ``q`` (pair ``(i, j)``) is
    ``M / sqrt(var_i var_j) * (int_0^s g_q - s int_0^1 g_q)``.
    Returns an array of shape ``(grid_n + 1, d)``.
    """
    grid_n = int(grid_n)
    if grid_n < 1:
        raise InputError(f"grid_n must be >= 1, got {grid_n}")
    s = np.arange(grid_n + 1) / grid_n
    pairs = kernels.pair_indices(g.p)
    scale = g.magnitude / np.sqrt(g.variances[pairs[:, 0]] * g.variances[pairs[:, 1]])
    c = g.integral(s) - s[:, None] * g.integral(1.0)
    c[0] = 0.0
    c[-1] = 0.0
    return c * scale


@dataclass(frozen=True)
class LocalPowerResult:
    rate: float
    se: float
    s: np.ndarray = field(repr=False)
    mean_process: np.ndarray = field(repr=False)


def _local_segments(g, dgp):
    """Piecewise-constant correlation segments realizing ``k + (M/sqrt(T)) g(t/T)``."""
    T = dgp.T
    pairs = kernels.pair_indices(dgp.p)
    sd = np.sqrt(dgp.variances)
    scale = g.magnitude / np.sqrt(T) / (sd[pairs[:, 0]] * sd[pairs[:, 1]])
    knots = sorted({z for comp in g.jumps for z, _ in comp})
    # 1-based row t carries g(t / T); first 0-based row with t / T >= z
    starts = [0] + [min(T, int(np.ceil(z * T - 1e-12)) - 1) for z in knots]
    segs = []
    for start, u in zip(starts, [0.0] + knots):
        if segs and start <= segs[-1][0]:
            segs.pop()
        if start >= T:
            continue
        shift = g.value(u)[0] * scale
        r = corr_matrix(dgp.p, dgp.base_correlation + shift)
        try:
            segs.append((start, _chol(r, "local-alternative")))
        except InputError as exc:
            raise InputError(f"correlation path leaves the positive definite region at s={u}") from exc
    return segs


def local_power_study(g: StepFunctionG, dgp: DgpSpec, mc_reps: int, boot: BootstrapConfig,
                      table: QuantileTable, alpha=0.05) -> LocalPowerResult:
    """Rejection rate and mean standardized process under a local alternative.

    Means and variances stay constant while the pairwise cross moments
    follow ``k + (M / sqrt(T)) g(t / T)``. The mean process is reported on
    ``s = k / T`` for ``k = 2..T``.
    """
    if g.p != dgp.p:
        raise InputError(f"g is for p={g.p}, dgp has p={dgp.p}")
    _check_study(mc_reps, table, dgp.d)
    segs = _local_segments(g, dgp)
    crit = critical_value(table, alpha)
    hits = 0
    acc = np.zeros(dgp.T - 1)
    cnt = np.zeros(dgp.T - 1)
    for r in range(int(mc_reps)):
        panel = _simulate(dgp, segs, rep_rng(dgp.seed, r))
        rep = run_test(panel, table, _rep_boot(boot, r), alpha)
        hits += rep.q_std > crit
        ok = rep.process.defined
        acc[ok] += rep.process.values[ok]
        cnt[ok] += 1
    rate = hits / int(mc_reps)
    with np.errstate(invalid="ignore"):
        mean = acc / cnt
    s = np.arange(2, dgp.T + 1) / dgp.T
    return LocalPowerResult(rate=rate, se=rejection_se(rate, int(mc_reps)), s=s, mean_process=mean)
