"""The full test: bootstrap standardization, statistic, decision, change point."""

from dataclasses import dataclass

import numpy as np

from .bootstrap import BootstrapConfig, EMatrix, default_block_length, estimate_E
from .core import DeviationProcess, Panel, changepoint_estimate, deviation_process, prefix_correlations
from .errors import InputError, NotPositiveDefiniteError
from .limit import QuantileTable, critical_value, p_value
from .linalg import check_symmetric, inv_sqrt

__all__ = ["TestReport", "run_test", "standardized_process", "E_FLOOR"]

# Correlations are unit-free, so the bootstrap covariance has a natural O(1)
# scale; a largest eigenvalue below this means there was no sampling variation.
E_FLOOR = 1e-12


@dataclass(frozen=True)
class TestReport:
    """Outcome of one run of the correlation-constancy test."""

    __test__ = False  # keep pytest from collecting this class

    q_raw: float
    q_std: float
    d: int
    critical_value: float
    p_value: float
    reject: bool
    changepoint_k: int
    process: DeviationProcess
    raw_process: DeviationProcess
    e_hat: EMatrix
    alpha: float
    table: QuantileTable


def standardized_process(panel: Panel, e_hat):
    """Return ``(raw, standardized)`` deviation processes of ``panel``."""
    corr = prefix_correlations(panel)
    m = check_symmetric(getattr(e_hat, "m", e_hat))
    ev = np.linalg.eigvalsh(m)
    if not ev[-1] > E_FLOOR:
        raise NotPositiveDefiniteError(
            f"bootstrap covariance is not positive definite (largest eigenvalue {ev[-1]:.3g})",
            min_eigenvalue=float(ev[0]),
        )
    return deviation_process(corr), deviation_process(corr, inv_sqrt(m))


def run_test(panel: Panel, table: QuantileTable, boot: BootstrapConfig = None, alpha=0.05,
             seed=0, replications=199) -> TestReport:
    """Run the bootstrap-standardized test on ``panel``.

    Parameters
    ----------
    panel : Panel
    table : QuantileTable
        Null table for ``d = p (p - 1) / 2``.
    boot : BootstrapConfig, optional
        Defaults to block length ``floor(T ** 0.25)`` with ``replications``
        replicates and ``seed``.
    alpha : float
        Nominal level.
    """
    if boot is None:
        boot = BootstrapConfig(default_block_length(panel.T), replications, seed)
    if table.d != panel.d:
        raise InputError(f"quantile table is for d={table.d}, panel has d={panel.d}")
    e_hat = estimate_E(panel, boot)
    raw, std = standardized_process(panel, e_hat)
    q_std = std.max()
    crit = critical_value(table, alpha)
    return TestReport(
        q_raw=raw.max(),
        q_std=q_std,
        d=panel.d,
        critical_value=crit,
        p_value=p_value(table, q_std),
        reject=bool(q_std > crit),
        changepoint_k=changepoint_estimate(std),
        process=std,
        raw_process=raw,
        e_hat=e_hat,
        alpha=float(alpha),
        table=table,
    )
