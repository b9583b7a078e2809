"""Exact posteriors over factorized linear transforms of the function.

When the prior kernel factorizes over positions and every row of the
transform does too, the row-times-kernel and row-times-kernel-times-row
contractions collapse to per-position sums.  Posterior means and covariances
of transform coefficients then need only objects of size ``j`` (rows) and
``t`` (training sequences); nothing of size ``alpha**ell`` is ever built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import JITTER_LADDER, SpdSolver
from .errors import ParameterError
from .gauges import FactorizedTransform, GaugeSpec, transform_rows
from .kernels import ProductKernel
from .regress import GaussianPosterior, TrainingData
from .seqspace import SequenceSpace, Subsequence


@dataclass
class TransformPosteriorRequest:
    """Everything needed to compute the posterior of transform coefficients."""

    kernel: ProductKernel
    data: TrainingData
    transform: FactorizedTransform
    want_covariance: bool = True

    def __post_init__(self):
        if not isinstance(self.kernel, ProductKernel):
            raise ParameterError(
                "transform posteriors need a product kernel; route other kernels "
                "through the dense path"
            )
        if self.transform.n_rows < 1:
            raise ParameterError("transform needs at least one row")


def mk_row(row_factors, kernel: ProductKernel, y) -> float:
    """One entry of the transform applied to the kernel: row ``i`` against sequence ``y``."""
    ys = kernel.space.encode_sequence(y)
    factors = np.asarray(row_factors, dtype=float)
    value = 1.0
    for p in range(kernel.space.length):
        value *= factors[p] @ kernel.blocks[p][:, ys[p]]
    return float(value)


def mk_matrix(transform: FactorizedTransform, kernel: ProductKernel, X) -> np.ndarray:
    """All rows against all sequences in ``X``, shape ``(j, len(X))``."""
    X = np.asarray(X, dtype=np.int64)
    V = np.einsum("jpa,pab->jpb", transform.factors, kernel.blocks)
    out = np.ones((transform.n_rows, X.shape[0]))
    for p in range(kernel.space.length):
        out *= V[:, p, :][:, X[:, p]]
    return out


def mkmt_entry(row_i, row_j, kernel: ProductKernel) -> float:
    """One entry of the transform-kernel-transform contraction."""
    fi = np.asarray(row_i, dtype=float)
    fj = np.asarray(row_j, dtype=float)
    value = 1.0
    for p in range(kernel.space.length):
        value *= fi[p] @ kernel.blocks[p] @ fj[p]
    return float(value)


def mkmt_matrix(transform: FactorizedTransform, kernel: ProductKernel) -> np.ndarray:
    V = np.einsum("jpa,pab->jpb", transform.factors, kernel.blocks)
    return np.einsum("ipb,jpb->ijp", V, transform.factors).prod(axis=2)


def transform_posterior(request: TransformPosteriorRequest,
                        ladder=JITTER_LADDER) -> GaussianPosterior:
    """Posterior of the transform coefficients under the product-kernel prior.

    Only ``(j, t)``, ``(t, t)``, and ``(j, j)`` arrays are materialized.  With
    no training rows the prior over coefficients is returned.
    """
    kernel, data, transform = request.kernel, request.data, request.transform
    labels = list(transform.labels)
    if data.t == 0:
        if request.want_covariance:
            prior = mkmt_matrix(transform, kernel)
            return GaussianPosterior(labels, np.zeros(transform.n_rows), prior)
        var = np.array([mkmt_entry(f, f, kernel) for f in transform.factors])
        return GaussianPosterior(labels, np.zeros(transform.n_rows), None, var)
    MK_X = mk_matrix(transform, kernel, data.X)
    K_XX = kernel.matrix(data.X)
    solver = SpdSolver(K_XX + data.noise_variance * np.eye(data.t), ladder)
    mean = MK_X @ solver.solve(data.y)
    QMK = solver.solve(MK_X.T)
    if request.want_covariance:
        cov = mkmt_matrix(transform, kernel) - MK_X @ QMK
        return GaussianPosterior(labels, mean, cov)
    var = np.array([mkmt_entry(f, f, kernel) for f in transform.factors])
    var -= np.einsum("jt,tj->j", MK_X, QMK)
    return GaussianPosterior(labels, mean, None, var)


def gauge_weight_posterior(gauge: GaugeSpec, kernel: ProductKernel, data: TrainingData,
                           subsequences: list[Subsequence], want_covariance: bool = True,
                           ladder=JITTER_LADDER) -> GaussianPosterior:
    """Posterior over gauge-fixed weights for the requested subsequences.

    Direct evaluation of the per-position reduction: with
    ``zeta^p_c = eta * sum_c' pi^p_c' a^p_{c,c'}`` and
    ``zbar^p = eta^2 * sum_{c,c'} pi^p_c pi^p_c' a^p_{c,c'}``, each
    coefficient couples to a training sequence through a product of
    ``a - zeta`` factors on its own positions and ``zeta`` factors elsewhere,
    and the prior covariance of two coefficients is a four-way product over
    position classes.  Must agree with :func:`transform_posterior` applied to
    the gauge-weight rows; the conformance suite checks both against the
    dense construction.
    """
    if not isinstance(kernel, ProductKernel):
        raise ParameterError("gauge-weight posteriors need a product kernel")
    if not subsequences:
        raise ParameterError("need at least one subsequence")
    space = kernel.space
    subs = [space.validate_subsequence(s) for s in subsequences]
    labels = [space.format_subsequence(s) for s in subs]
    eta, pi = gauge.eta, gauge.pi.probs
    ell, alpha = space.length, space.alpha

    zeta = np.einsum("pab,pb->pa", kernel.blocks, pi) * eta          # (ell, alpha)
    zbar = np.einsum("pa,pab,pb->p", pi, kernel.blocks, pi) * eta * eta   # (ell,)

    # per-coefficient, per-position factor tables for the data coupling vectors
    j = len(subs)
    tables = np.empty((j, ell, alpha))
    for i, sub in enumerate(subs):
        tables[i] = zeta
        for p, c in zip(sub.positions, sub.chars):
            tables[i, p - 1] = kernel.blocks[p - 1][:, c] - zeta[p - 1]

    def prior_cov_entry(a: int, b: int) -> float:
        sa, sb = subs[a], subs[b]
        in_a = dict(zip(sa.positions, sa.chars))
        in_b = dict(zip(sb.positions, sb.chars))
        value = 1.0
        for p in range(1, ell + 1):
            za, zb = zeta[p - 1], zbar[p - 1]
            if p in in_a and p in in_b:
                value *= zb - za[in_a[p]] - za[in_b[p]] + kernel.blocks[p - 1][in_a[p], in_b[p]]
            elif p in in_a:
                value *= za[in_a[p]] - zb
            elif p in in_b:
                value *= za[in_b[p]] - zb
            else:
                value *= zb
        return value

    if data.t == 0:
        mean = np.zeros(j)
        if want_covariance:
            cov = np.array([[prior_cov_entry(a, b) for b in range(j)] for a in range(j)])
            return GaussianPosterior(labels, mean, cov)
        var = np.array([prior_cov_entry(a, a) for a in range(j)])
        return GaussianPosterior(labels, mean, None, var)

    Z = np.ones((j, data.t))
    for p in range(ell):
        Z *= tables[:, p, :][:, data.X[:, p]]
    K_XX = kernel.matrix(data.X)
    solver = SpdSolver(K_XX + data.noise_variance * np.eye(data.t), ladder)
    mean = Z @ solver.solve(data.y)
    QZ = solver.solve(Z.T)
    if want_covariance:
        prior = np.empty((j, j))
        for a in range(j):
            prior[a, a] = prior_cov_entry(a, a)
            for b in range(a + 1, j):
                prior[a, b] = prior[b, a] = prior_cov_entry(a, b)
        return GaussianPosterior(labels, mean, prior - Z @ QZ)
    var = np.array([prior_cov_entry(a, a) for a in range(j)])
    var -= np.einsum("jt,tj->j", Z, QZ)
    return GaussianPosterior(labels, mean, None, var)


def gauge_weight_transform(gauge: GaugeSpec, space: SequenceSpace,
                           subsequences: list[Subsequence]) -> FactorizedTransform:
    """The gauge-weight rows as a generic factorized transform."""
    return transform_rows("gauge-weights", space, subsequences, gauge=gauge)
