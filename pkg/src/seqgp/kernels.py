"""Kernel families on sequence space and the priors induced by diagonal penalties.

Two base families are implemented: isotropic kernels built from Krawtchouk
polynomials, whose value depends only on Hamming distance and whose
coefficients weight the variance carried by each interaction order, and
product kernels given by one symmetric positive-definite block per position.
Geometric-decay, connectedness, and Jenga kernels are thin parameterizations
that convert to product form.  Diagonal weight-space penalties induce priors
on function space; the closed forms of those induced kernels live here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, NumericalError, ParameterError
from .gauges import ProductDistribution
from .seqspace import SequenceSpace, binomial, krawtchouk


class VcKernel:
    """Isotropic kernel ``K(x, y) = sum_k lambdas[k] * Kraw_k(d(x, y))``.

    ``lambdas`` holds one strictly positive variance per interaction order,
    ``0..length``.  The Krawtchouk table is computed in exact integer
    arithmetic and converted to floats once.

    Zero entries are rejected here; oracle probes that need a degenerate
    kernel must pass ``allow_degenerate=True`` explicitly.
    """

    def __init__(self, lambdas, space: SequenceSpace, allow_degenerate: bool = False):
        lams = np.asarray(lambdas, dtype=float)
        if lams.shape != (space.length + 1,):
            raise DimensionError(
                f"need {space.length + 1} order variances, got shape {lams.shape}"
            )
        if allow_degenerate:
            if np.any(lams < 0):
                raise ParameterError("order variances must be nonnegative")
        elif np.any(lams <= 0):
            raise ParameterError("order variances must be strictly positive")
        self.lambdas = lams
        self.space = space
        ell, alpha = space.length, space.alpha
        self._kraw = np.array(
            [[krawtchouk(k, d, ell, alpha) for d in range(ell + 1)] for k in range(ell + 1)],
            dtype=float,
        )

    def entry(self, d: int) -> float:
        """Kernel value between any two sequences at Hamming distance ``d``."""
        if not 0 <= d <= self.space.length:
            raise ParameterError(f"distance {d} outside [0, {self.space.length}]")
        return float(self.lambdas @ self._kraw[:, d])

    def inverse_entry(self, d: int) -> float:
        """Entry of the exact dense inverse at Hamming distance ``d``.

        The inverse of ``sum_k lambda_k Kraw_k(d)`` is
        ``alpha**(-2 ell) * sum_k Kraw_k(d) / lambda_k``; the leading scale is
        forced by the eigendecomposition (each Krawtchouk distance matrix is
        ``alpha**ell`` times a projector) and is verified against dense
        inversion by the conformance suite.
        """
        if not 0 <= d <= self.space.length:
            raise ParameterError(f"distance {d} outside [0, {self.space.length}]")
        if np.any(self.lambdas == 0):
            raise ParameterError("degenerate kernel has no inverse")
        scale = float(self.space.alpha) ** (-2 * self.space.length)
        return float(scale * ((1.0 / self.lambdas) @ self._kraw[:, d]))

    def matrix(self, X, Y=None) -> np.ndarray:
        X = np.asarray(X, dtype=np.int64)
        Y = X if Y is None else np.asarray(Y, dtype=np.int64)
        D = (X[:, None, :] != Y[None, :, :]).sum(axis=2)
        table = np.array([self.entry(d) for d in range(self.space.length + 1)])
        return table[D]

    def dense(self) -> np.ndarray:
        X = self.space.sequences_array()
        return self.matrix(X)

    def dense_inverse(self) -> np.ndarray:
        X = self.space.sequences_array()
        D = (X[:, None, :] != X[None, :, :]).sum(axis=2)
        table = np.array([self.inverse_entry(d) for d in range(self.space.length + 1)])
        return table[D]


class ProductKernel:
    """Kernel that factorizes over positions, one symmetric PD block each.

    ``blocks`` has shape ``(length, alpha, alpha)``; symmetry and positive
    definiteness of every block are verified at construction by a Cholesky
    factorization, so invalid kernels fail fast rather than downstream.
    """

    def __init__(self, blocks, space: SequenceSpace):
        arr = np.array(blocks, dtype=float)
        if arr.shape != (space.length, space.alpha, space.alpha):
            raise DimensionError(
                f"expected blocks of shape {(space.length, space.alpha, space.alpha)}, "
                f"got {arr.shape}"
            )
        for p, block in enumerate(arr, start=1):
            if not np.allclose(block, block.T, rtol=0, atol=1e-12):
                raise ParameterError(f"block for position {p} is not symmetric")
            try:
                np.linalg.cholesky(block)
            except np.linalg.LinAlgError:
                raise ParameterError(
                    f"block for position {p} is not positive-definite"
                ) from None
        self.blocks = arr
        self.space = space
        self._block_inv = None

    def entry(self, x, y) -> float:
        xs = self.space.encode_sequence(x)
        ys = self.space.encode_sequence(y)
        value = 1.0
        for p in range(self.space.length):
            value *= self.blocks[p, xs[p], ys[p]]
        return float(value)

    def matrix(self, X, Y=None) -> np.ndarray:
        X = np.asarray(X, dtype=np.int64)
        Y = X if Y is None else np.asarray(Y, dtype=np.int64)
        out = np.ones((X.shape[0], Y.shape[0]))
        for p in range(self.space.length):
            out *= self.blocks[p][np.ix_(X[:, p], Y[:, p])]
        return out

    def dense(self) -> np.ndarray:
        return self.matrix(self.space.sequences_array())

    def block_inverses(self) -> np.ndarray:
        """Dense inverse of every per-position block, cached."""
        if self._block_inv is None:
            try:
                self._block_inv = np.linalg.inv(self.blocks)
            except np.linalg.LinAlgError as exc:
                raise NumericalError(f"singular kernel block: {exc}") from None
        return self._block_inv


class DenseKernel:
    """A kernel backed by an explicit dense matrix over the whole space."""

    def __init__(self, matrix, space: SequenceSpace):
        K = np.asarray(matrix, dtype=float)
        if K.shape != (space.n_sequences, space.n_sequences):
            raise DimensionError(f"dense kernel shape {K.shape} does not match the space")
        self._K = K
        self.space = space

    def _indices(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.int64)
        powers = self.space.alpha ** np.arange(self.space.length - 1, -1, -1, dtype=np.int64)
        return X @ powers

    def matrix(self, X, Y=None) -> np.ndarray:
        ix = self._indices(X)
        iy = ix if Y is None else self._indices(Y)
        return self._K[np.ix_(ix, iy)]

    def dense(self) -> np.ndarray:
        return self._K


# -- product-form parameterizations -----------------------------------------


@dataclass(frozen=True)
class GeometricKernelSpec:
    """Correlation decays geometrically with Hamming distance."""

    beta: float

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ParameterError(f"decay factor must be in (0, 1), got {self.beta}")

    def to_product(self, space: SequenceSpace) -> ProductKernel:
        block = np.full((space.alpha, space.alpha), self.beta)
        np.fill_diagonal(block, 1.0)
        return ProductKernel(np.stack([block] * space.length), space)

    def entry(self, x, y, space: SequenceSpace) -> float:
        return float(self.beta ** space.hamming(x, y))


@dataclass(frozen=True)
class ConnectednessKernelSpec:
    """Per-position decay factors; a pair's covariance is the product over
    positions where it differs."""

    z: tuple

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(float(v) for v in self.z))

    def validate(self, space: SequenceSpace) -> "ConnectednessKernelSpec":
        if len(self.z) != space.length:
            raise DimensionError(f"need {space.length} factors, got {len(self.z)}")
        lower = -1.0 / (space.alpha - 1)
        for p, v in enumerate(self.z, start=1):
            if not lower < v < 1.0:
                raise ParameterError(
                    f"factor at position {p} must satisfy {lower} < z < 1, got {v}"
                )
        return self

    def to_product(self, space: SequenceSpace) -> ProductKernel:
        self.validate(space)
        blocks = np.empty((space.length, space.alpha, space.alpha))
        for p, v in enumerate(self.z):
            block = np.full((space.alpha, space.alpha), v)
            np.fill_diagonal(block, 1.0)
            blocks[p] = block
        return ProductKernel(blocks, space)


@dataclass(frozen=True)
class JengaKernelSpec:
    """Connectedness generalized to per-character factors.

    ``signs[p]`` is +1 or -1 and ``factors[p][c] >= 0``; when the sign is +1
    every factor must lie in (0, 1), and when it is -1 the factors must
    satisfy ``sum_c z_c^2 / (1 + z_c^2) <= 1``.  The boundary of the second
    condition gives a singular block, rejected at product conversion.
    """

    signs: tuple
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        object.__setattr__(self, "factors", tuple(tuple(float(v) for v in row)
                                                  for row in self.factors))
        if len(self.signs) != len(self.factors):
            raise DimensionError("one sign per position is required")
        for p, (s, row) in enumerate(zip(self.signs, self.factors), start=1):
            if s not in (-1, 1):
                raise ParameterError(f"sign at position {p} must be +1 or -1, got {s}")
            if any(v < 0 for v in row):
                raise ParameterError(f"factors at position {p} must be nonnegative")
            if s == 1 and any(not 0.0 < v < 1.0 for v in row):
                raise ParameterError(
                    f"factors at position {p} must lie in (0, 1) when the sign is +1"
                )
            if s == -1:
                load = sum(v * v / (1.0 + v * v) for v in row)
                if load > 1.0:
                    raise ParameterError(
                        f"factors at position {p} violate sum z^2/(1+z^2) <= 1 "
                        f"(got {load:.6f})"
                    )

    def block(self, p: int) -> np.ndarray:
        """Unit-diagonal block for a 0-based position index."""
        a = np.asarray(self.factors[p])
        block = self.signs[p] * np.outer(a, a)
        np.fill_diagonal(block, 1.0)
        return block

    def to_product(self, space: SequenceSpace) -> ProductKernel:
        if len(self.signs) != space.length:
            raise DimensionError(f"need {space.length} positions, got {len(self.signs)}")
        if any(len(row) != space.alpha for row in self.factors):
            raise DimensionError("each factor row needs one entry per character")
        return ProductKernel(np.stack([self.block(p) for p in range(space.length)]), space)


def jenga_block_inverse(sign: int, factors) -> np.ndarray:
    """Closed-form inverse of a unit-diagonal block with entries ``sign*a_c*a_c'``.

    Derived by rank-one update of the diagonal part; agrees with dense
    inversion to 1e-12 for valid blocks.
    """
    a = np.asarray(factors, dtype=float)
    if sign not in (-1, 1):
        raise ParameterError(f"sign must be +1 or -1, got {sign}")
    denom = 1.0 - sign * a * a
    if np.any(denom <= 0):
        raise NumericalError("block is singular: some 1 - s*a_c^2 <= 0")
    trace_term = 1.0 + sign * np.sum(a * a / denom)
    if trace_term <= 0:
        raise NumericalError("block is singular or indefinite")
    zeta = -1.0 / trace_term
    inv = sign * zeta * np.outer(a, a) / np.outer(denom, denom)
    inv[np.diag_indices_from(inv)] += 1.0 / denom
    return inv


# -- induced priors ----------------------------------------------------------


def induced_kernel_diag_lambda_pi(lam: float, pi: ProductDistribution) -> ProductKernel:
    """Prior induced by the diagonal penalty ``lam^|S| * prod_{p in S} pi^p_{s_p}``.

    The result is a product kernel whose blocks have ``1 + 1/(pi^p_c * lam)``
    on the diagonal and 1 elsewhere; with uniform ``pi`` it reduces to
    ``(1 + alpha/lam) ** (length - d(x, y))``.
    """
    if not (isinstance(lam, (int, float)) and 0 < lam < math.inf):
        raise ParameterError(f"lambda must be finite and positive, got {lam}")
    if not pi.full_support:
        raise ParameterError("pi must have full support for the induced prior")
    space = pi.space
    blocks = np.ones((space.length, space.alpha, space.alpha))
    for p in range(space.length):
        blocks[p][np.diag_indices(space.alpha)] += 1.0 / (pi.probs[p] * lam)
    return ProductKernel(blocks, space)


def induced_vc_from_order_diag(a, space: SequenceSpace) -> VcKernel:
    """Prior induced by a diagonal penalty depending only on subsequence length.

    A penalty ``a_{|S|}`` on every weight induces an isotropic prior with
    order variances ``lambda_k = sum_{j>=k} C(ell-k, j-k) / (alpha^j a_j)``.
    """
    a = np.asarray(a, dtype=float)
    ell, alpha = space.length, space.alpha
    if a.shape != (ell + 1,):
        raise DimensionError(f"need {ell + 1} penalties, got shape {a.shape}")
    if np.any(a <= 0):
        raise ParameterError("penalties must be strictly positive")
    lams = np.zeros(ell + 1)
    for k in range(ell + 1):
        lams[k] = sum(binomial(ell - k, j - k) / (alpha ** j * a[j]) for j in range(k, ell + 1))
    return VcKernel(lams, space)


@dataclass(frozen=True)
class NotRepresentable:
    """Marker result: no order-dependent diagonal penalty induces the kernel."""

    index: int
    value: float

    def __bool__(self):
        return False


def order_diag_from_vc(kernel: VcKernel) -> np.ndarray | NotRepresentable:
    """Invert :func:`induced_vc_from_order_diag`, when possible.

    Solves the triangular system ``lambda_k = sum_{j>=k} C(ell-k, j-k) x_j``
    for ``x_j = 1 / (alpha^j a_j)`` by back substitution.  Returns the penalty
    vector ``a`` when every ``x_j`` is strictly positive, otherwise a
    :class:`NotRepresentable` carrying the first offending order.
    """
    ell, alpha = kernel.space.length, kernel.space.alpha
    lams = kernel.lambdas
    x = np.zeros(ell + 1)
    for k in range(ell, -1, -1):
        x[k] = lams[k] - sum(binomial(ell - k, j - k) * x[j] for j in range(k + 1, ell + 1))
    for k in range(ell + 1):
        if x[k] <= 0:
            return NotRepresentable(index=k, value=float(x[k]))
    return 1.0 / (np.array([float(alpha) ** j for j in range(ell + 1)]) * x)


# -- bi-allelic bases --------------------------------------------------------


def _check_biallelic(rho, space: SequenceSpace) -> np.ndarray:
    if space.alpha != 2:
        raise ParameterError("this induced prior is defined only for two-character alphabets")
    r = np.asarray(rho, dtype=float)
    if r.shape != (space.length,):
        raise DimensionError(f"need {space.length} penalties, got shape {r.shape}")
    if np.any(r <= 0):
        raise ParameterError("penalties must be strictly positive")
    return r


def wh_induced_entry(rho, x, y, space: SequenceSpace) -> float:
    """Prior induced by a diagonal penalty in the sign (Walsh-Hadamard) basis."""
    r = 1.0 / _check_biallelic(rho, space)
    xs, ys = space.encode_sequence(x), space.encode_sequence(y)
    value = float(np.prod(1.0 + r))
    for p in range(space.length):
        if xs[p] != ys[p]:
            value *= (1.0 - r[p]) / (1.0 + r[p])
    return value


def wt_induced_entry(rho, x, y, space: SequenceSpace) -> float:
    """Prior induced by a diagonal penalty in the reference-anchored basis.

    Heteroskedastic: the variance grows with the number of positions at which
    a sequence carries the non-reference character.
    """
    r = 1.0 / _check_biallelic(rho, space)
    xs, ys = space.encode_sequence(x), space.encode_sequence(y)
    value = 1.0
    for p in range(space.length):
        if xs[p] == ys[p] == 1:
            value *= 1.0 + r[p]
    return value


def wh_induced_product(rho, space: SequenceSpace) -> ProductKernel:
    r = 1.0 / _check_biallelic(rho, space)
    blocks = np.empty((space.length, 2, 2))
    for p in range(space.length):
        blocks[p] = [[1.0 + r[p], 1.0 - r[p]], [1.0 - r[p], 1.0 + r[p]]]
    return ProductKernel(blocks, space)


def wt_induced_product(rho, space: SequenceSpace) -> ProductKernel:
    r = 1.0 / _check_biallelic(rho, space)
    blocks = np.empty((space.length, 2, 2))
    for p in range(space.length):
        blocks[p] = [[1.0, 1.0], [1.0, 1.0 + r[p]]]
    return ProductKernel(blocks, space)


# -- config ------------------------------------------------------------------

KERNEL_FAMILIES = ("vc", "product", "geometric", "connectedness", "jenga",
                   "diag-lambda-pi", "order-diag", "wh", "wt")

_FAMILY_KEYS = {
    "vc": {"lambdas"},
    "product": {"blocks"},
    "geometric": {"beta"},
    "connectedness": {"z"},
    "jenga": {"signs", "factors"},
    "diag-lambda-pi": {"lambda", "pi"},
    "order-diag": {"a"},
    "wh": {"rho"},
    "wt": {"rho"},
}


def kernel_from_config(cfg: dict, space: SequenceSpace):
    """Build a kernel from a config block ``{"family": ..., <params>}``.

    Product-form families are returned as :class:`ProductKernel`; ``vc`` and
    ``order-diag`` return a :class:`VcKernel`.  Unknown keys are rejected.
    """
    if not isinstance(cfg, dict):
        raise ConfigError(f"kernel block must be a mapping, got {type(cfg).__name__}")
    family = cfg.get("family")
    if family not in KERNEL_FAMILIES:
        raise ConfigError(f"unknown kernel family {family!r}; expected one of {KERNEL_FAMILIES}")
    unknown = set(cfg) - {"family"} - _FAMILY_KEYS[family]
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} for kernel family {family!r}")
    missing = _FAMILY_KEYS[family] - set(cfg)
    if missing:
        raise ConfigError(f"kernel family {family!r} needs keys {sorted(missing)}")
    try:
        if family == "vc":
            return VcKernel(cfg["lambdas"], space)
        if family == "product":
            return ProductKernel(cfg["blocks"], space)
        if family == "geometric":
            return GeometricKernelSpec(cfg["beta"]).to_product(space)
        if family == "connectedness":
            return ConnectednessKernelSpec(tuple(cfg["z"])).to_product(space)
        if family == "jenga":
            return JengaKernelSpec(tuple(cfg["signs"]), tuple(map(tuple, cfg["factors"]))
                                   ).to_product(space)
        if family == "diag-lambda-pi":
            lam = cfg["lambda"]
            pi_cfg = cfg["pi"]
            if pi_cfg == "uniform":
                pi = ProductDistribution.uniform(space)
            elif isinstance(pi_cfg, list):
                pi = ProductDistribution(pi_cfg, space)
            else:
                raise ConfigError(f"unsupported pi specification {pi_cfg!r}")
            return induced_kernel_diag_lambda_pi(float(lam), pi)
        if family == "order-diag":
            return induced_vc_from_order_diag(cfg["a"], space)
        if family == "wh":
            return wh_induced_product(cfg["rho"], space)
        return wt_induced_product(cfg["rho"], space)
    except (ParameterError, DimensionError) as exc:
        raise ConfigError(f"invalid kernel parameters: {exc}") from exc
