"""Symmetric eigen-utilities: positive-definiteness check and ``m^{-1/2}``."""

import numpy as np

from .errors import InputError, NotPositiveDefiniteError

__all__ = ["check_symmetric", "is_positive_definite", "inv_sqrt", "DEFAULT_RIDGE"]

DEFAULT_RIDGE = 1e-8


def check_symmetric(m, tol=1e-10):
    """Return ``m`` as a float array, raising if it is not square symmetric.

    Symmetry is judged relative to ``max(1, max|m|)``.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and np.max(np.abs(m - m.T)) > tol * scale:
        raise InputError("matrix is not symmetric")
    return m


def is_positive_definite(m, tol=1e-10):
    """True iff the smallest eigenvalue exceeds ``tol * max(1, largest)``.

    Parameters
    ----------
    m : array_like, shape (d, d)
        Symmetric matrix (symmetry is checked at tolerance ``tol``).
    tol : float
        Relative eigenvalue floor.
    """
    m = check_symmetric(m, tol=max(tol, 1e-10))
    ev = np.linalg.eigvalsh(m)
    return bool(ev[0] > tol * max(1.0, ev[-1]))


def _inv_sqrt_from_eigh(ev, vecs):
    return (vecs / np.sqrt(ev)) @ vecs.T


def inv_sqrt(m, ridge=DEFAULT_RIDGE, *, return_ridged=False):
    """Symmetric inverse square root ``R`` with ``R @ m @ R = I``.

    If the smallest eigenvalue is not positive (relative to the largest,
    at the 1e-12 level), ``ridge * trace(m) / d`` is added to the diagonal
    once and the decomposition retried.

    Parameters
    ----------
    m : array_like, shape (d, d)
        Symmetric matrix.
    ridge : float
        Relative ridge used on the single retry.
    return_ridged : bool
        Also return whether the ridge was applied.

    Raises
    ------
    NotPositiveDefiniteError
        If ``m`` is still not positive definite after ridging.
    """
    m = check_symmetric(m)
    d = m.shape[0]
    ev, vecs = np.linalg.eigh(m)
    ridged = False
    if not ev[0] > 1e-12 * max(abs(ev[-1]), np.finfo(float).tiny):
        shift = ridge * np.trace(m) / d
        ev, vecs = np.linalg.eigh(m + shift * np.eye(d))
        ridged = True
        if not ev[0] > 1e-12 * max(abs(ev[-1]), np.finfo(float).tiny):
            raise NotPositiveDefiniteError(
                f"matrix is not positive definite (smallest eigenvalue {ev[0]:.3g} "
                f"after ridge {shift:.3g})",
                min_eigenvalue=ev[0],
            )
    r = _inv_sqrt_from_eigh(ev, vecs)
    r = 0.5 * (r + r.T)
    if return_ridged:
        return r, ridged
    return r
