import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from ieae.exceptions import InternalError, InvalidArgument, KeyDomainError, LayoutError
from ieae.keystream import (
    ByteSequence,
    ChaoticSeed,
    arnold_iterate,
    build_C0,
    build_D,
    convert_byte,
    convert_bytes,
    convert_generic,
    gen_xbar,
    logistic_iterate,
    rem,
    rem_scaled,
)
from ieae.lyapunov import seed_from_lambda


unit_floats = st.floats(min_value=0.0, max_value=1.0, allow_nan=False, allow_infinity=False)


def test_rem():
    assert rem(2.25) == 0.25
    assert rem(-0.75) == 0.25
    assert rem_scaled(0.125, 1) == 0.25
    assert rem_scaled(1.5, 1) == 0.0


def test_rem_is_exact_on_binary_value():
    # 0.1 is slightly above 1/10 in binary64, so 10 * 0.1 is just above 1
    assert 0.0 < rem_scaled(0.1, 1) < 1e-15


def test_rem_rejects_non_finite():
    with pytest.raises(InvalidArgument):
        rem(math.inf)


def test_convert_byte():
    assert convert_byte(0.5) == 0
    # 10**14 / 2**20 = 95367431.640625
    assert convert_byte(2 ** -20) == 7
    assert convert_generic(2 ** -20, 'ceil') == 8
    assert convert_generic(2 ** -20, 'round') == 8
    assert convert_generic(2 ** -20, 'floor', m=1, modulus=10) == 0


def test_convert_generic_rejects_negative():
    with pytest.raises(InvalidArgument):
        convert_generic(-0.5)
    with pytest.raises(InvalidArgument):
        convert_generic(0.5, m=0)


@given(st.lists(unit_floats, max_size=50))
def test_convert_bytes_agrees_with_scalar(values):
    assert convert_bytes(values).tolist() == [convert_byte(x) for x in values]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1e6), min_size=50, max_size=100))
def test_convert_byte_matches_floor_conversion(values):
    expected = [convert_generic(x, 'floor', 14, 256) for x in values]
    assert [convert_byte(x) for x in values] == expected
    assert convert_bytes(values).tolist() == expected


def test_convert_byte_on_random_doubles(rng):
    # uniform reals and raw bit patterns across many binades
    uniform = rng.uniform(0, 1e6, size=5000)
    bits = rng.integers(0, 0x7FE0000000000000, size=5000, dtype=np.int64).view(np.float64)
    values = np.concatenate([uniform, bits])
    expected = [convert_generic(x, 'floor', 14, 256) for x in values.tolist()]
    assert convert_bytes(values).tolist() == expected


def test_logistic_iterate():
    assert logistic_iterate(0.5, 4.0, 2).tolist() == [1.0, 0.0]
    with pytest.raises(KeyDomainError):
        logistic_iterate(0.5, 3.5, 2)
    with pytest.raises(InvalidArgument):
        logistic_iterate(1.5, 4.0, 2)


def test_logistic_iterate_order_of_operations():
    x, mu = 0.3, 3.999
    expected = mu * x * (1.0 - x)
    assert logistic_iterate(x, mu, 1)[0] == expected


def test_seed_from_lambda():
    seed = seed_from_lambda(-2 ** -30)
    assert seed.lam == -2 ** -30
    assert seed.x0_logistic == 390625 / 2 ** 22
    assert seed.xy0_arnold == (2 ** -30, 3125 / 2 ** 25)

    with pytest.raises(InvalidArgument):
        seed_from_lambda(math.nan)


@settings(max_examples=25, deadline=None)
@given(
    lam=st.floats(min_value=0.01, max_value=10.0),
    short=st.integers(min_value=0, max_value=50),
    extra=st.integers(min_value=0, max_value=50),
)
def test_gen_xbar_prefix_stable(lam, short, extra):
    seed = seed_from_lambda(lam)
    head = gen_xbar(seed, 3.999, short)
    full = gen_xbar(seed, 3.999, short + extra)
    assert full.values[:short] == head.values
    assert head.extended(short + extra).values == full.values


def test_byte_sequence_is_one_based():
    xbar = gen_xbar(seed_from_lambda(0.6378), 3.999, 10)
    assert len(xbar) == 10
    assert xbar[1] == xbar.values[0]
    assert xbar[10] == xbar.values[9]
    assert xbar.window(3, 4).tolist() == list(xbar.values[2:6])
    with pytest.raises(InternalError):
        xbar[0]
    with pytest.raises(InternalError):
        xbar.window(8, 4)


def test_gen_xbar_empty_and_negative():
    seed = seed_from_lambda(0.6378)
    assert len(gen_xbar(seed, 3.999, 0)) == 0
    with pytest.raises(InvalidArgument):
        gen_xbar(seed, 3.999, -1)


def test_arnold_iterate():
    assert arnold_iterate((0.5, 0.25), 1, 1, 2) == [(0.75, 0.0), (0.75, 0.75)]
    with pytest.raises(KeyDomainError):
        arnold_iterate((0.5, 0.25), 0, 1, 1)
    with pytest.raises(KeyDomainError):
        arnold_iterate((0.5, 0.25), 1.5, 1, 1)


def test_build_D_skips_and_interleaves():
    seed = ChaoticSeed(lam=0.3, x0_logistic=0.1, xy0_arnold=(0.3, 0.7))
    pairs = arnold_iterate(seed.xy0_arnold, 2, 3, 4)
    D = build_D(seed, 2, 3, 0, 2, 4)
    assert D.shape == (2, 4)
    assert D.reshape(-1).tolist() == [convert_byte(c) for pair in pairs for c in pair]

    skipped = build_D(seed, 2, 3, 1, 2, 3)
    assert skipped.reshape(-1).tolist() == D.reshape(-1)[2:].tolist()


def test_build_D_needs_even_size():
    seed = ChaoticSeed(lam=0.3, x0_logistic=0.1, xy0_arnold=(0.3, 0.7))
    with pytest.raises(LayoutError):
        build_D(seed, 1, 1, 0, 3, 3)


def test_build_C0():
    xbar = ByteSequence(values=tuple(range(1, 21)), mu=4.0, state=0.5)
    C0 = build_C0(xbar, 5, 2, 3)
    assert C0.tolist() == [[5, 6, 7], [8, 9, 10]]
    assert C0.dtype == np.uint8
    with pytest.raises(InvalidArgument):
        build_C0(xbar, 0, 2, 2)
    with pytest.raises(InternalError):
        build_C0(xbar, 18, 2, 2)
