"""Fluctuation test for constancy of the correlation matrix of a multivariate series."""

from .bootstrap import BootstrapConfig, EMatrix, default_block_length, estimate_E, resample_panel
from .core import (
    CorrPath,
    DeviationProcess,
    Panel,
    changepoint_estimate,
    deviation_process,
    prefix_correlations,
    q_statistic,
    rolling_correlations,
    standardized_statistic,
)
from .errors import CorrCusumError, DegenerateError, InputError, NotPositiveDefiniteError
from .limit import QuantileTable, critical_value, get_table, p_value, simulate_sup_l1_bridges
from .linalg import inv_sqrt, is_positive_definite
from .pipeline import TestReport, run_test

__version__ = "0.1.0"
