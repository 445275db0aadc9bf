import numpy as np
import pytest

from ieae.cipher import BlockLayout, CipherContext, GrayImage, PublicParams, SecretKey
from ieae.keystream import build_D, gen_xbar
from ieae.lyapunov import seed_from_lambda

EXAMPLE_LAMBDA = 0.6378


@pytest.fixture
def key():
    return SecretKey.build_example()


@pytest.fixture
def params():
    return PublicParams.build_example()


@pytest.fixture
def lam():
    return EXAMPLE_LAMBDA


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, rows, cols):
    return GrayImage(rng.integers(0, 256, size=(rows, cols), dtype=np.uint8))


def context_for(key: SecretKey, lam: float, shape, p1: int, p2: int) -> CipherContext:
    """A context with a forced block size, so every table layout can be exercised."""
    seed = seed_from_lambda(lam)
    xbar = gen_xbar(seed, key.mu, p1 * p2 + 256)
    layout = BlockLayout.for_shape(shape[0], shape[1], p1, p2)
    r, v = xbar[key.mu1], xbar[key.mu2]
    D = build_D(seed, key.a, key.b, r, layout.padded_M, layout.padded_N)
    return CipherContext(key=key, seed=seed, xbar=xbar, layout=layout, r=r, v=v, D=D)
