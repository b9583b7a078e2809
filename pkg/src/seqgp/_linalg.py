"""Symmetric positive-definite solves with a diagonal jitter ladder."""

from __future__ import annotations

import logging

import numpy as np

from .errors import NumericalError

log = logging.getLogger(__name__)

JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)


class SpdSolver:
    """Cached Cholesky factorization of a symmetric positive-definite matrix.

    Tries each jitter in ``ladder`` (added to the diagonal) until the
    factorization succeeds; the applied jitter is recorded on the instance and
    logged when nonzero.
    """

    def __init__(self, matrix: np.ndarray, ladder=JITTER_LADDER):
        A = np.asarray(matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise NumericalError(f"expected a square matrix, got shape {A.shape}")
        self.jitter = None
        for jitter in ladder:
            try:
                self._chol = np.linalg.cholesky(A + jitter * np.eye(A.shape[0]))
            except np.linalg.LinAlgError:
                continue
            self.jitter = jitter
            if jitter:
                log.warning("factorization needed diagonal jitter %.1e", jitter)
            break
        else:
            cond = _condition_estimate(A)
            raise NumericalError(
                f"symmetric factorization failed for every jitter in {tuple(ladder)}; "
                f"condition estimate {cond:.3e}"
            )

    def solve(self, b: np.ndarray) -> np.ndarray:
        y = np.linalg.solve(self._chol, np.atleast_1d(b))
        return np.linalg.solve(self._chol.T, y)

    @property
    def lower(self) -> np.ndarray:
        return self._chol


def solve_spd(A: np.ndarray, b: np.ndarray, ladder=JITTER_LADDER) -> np.ndarray:
    return SpdSolver(A, ladder).solve(b)


def inv_spd(A: np.ndarray, ladder=JITTER_LADDER) -> np.ndarray:
    return SpdSolver(A, ladder).solve(np.eye(np.asarray(A).shape[0]))


def _condition_estimate(A: np.ndarray) -> float:
    try:
        s = np.linalg.svd(A, compute_uv=False)
        return float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    except np.linalg.LinAlgError:
        return float("nan")
