import numpy as np
import pytest

from seqgp import GaugeSpec, ProductDistribution, ProductKernel, SequenceSpace, TrainingData, VcKernel


def small_spaces():
    return [SequenceSpace("ab", 2), SequenceSpace("ab", 3),
            SequenceSpace("abc", 2), SequenceSpace("abc", 3)]


def rand_product_kernel(space, rng):
    blocks = []
    for _ in range(space.length):
        A = rng.standard_normal((space.alpha, space.alpha))
        C = A @ A.T + space.alpha * np.eye(space.alpha)
        d = np.sqrt(np.diag(C))
        blocks.append(C / np.outer(d, d))
    return ProductKernel(np.stack(blocks), space)


def rand_vc_kernel(space, rng):
    return VcKernel(rng.uniform(0.2, 2.0, space.length + 1), space)


def rand_pi(space, rng):
    return ProductDistribution(rng.dirichlet(2.0 * np.ones(space.alpha), size=space.length),
                               space)


def rand_gauge(space, rng, eta=None):
    return GaugeSpec(float(rng.uniform(0.2, 1.0)) if eta is None else eta,
                     rand_pi(space, rng))


def rand_data(space, rng, t, noise):
    X = space.sequences_array()[rng.integers(0, space.n_sequences, size=t)]
    return TrainingData(X, rng.standard_normal(t), noise)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ab2():
    return SequenceSpace("ab", 2)


@pytest.fixture
def ab3():
    return SequenceSpace("ab", 3)
