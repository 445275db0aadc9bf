"""Key-derived material: the Logistic byte sequence, the Arnold mask matrix, C0, r and v.

All floating arithmetic is binary64 in plain Python (no fused multiply-add),
evaluated in the order the map equations are written. Every real-to-byte
conversion is done exactly on the binary64 value.
"""
import dataclasses as dc
import math
import typing as t
from fractions import Fraction

import numpy as np

from ieae.constants import BYTE_MODULUS, MU_RANGE, SCALE_EXPONENT
from ieae.exceptions import InternalError, InvalidArgument, KeyDomainError, LayoutError
from ieae.misc import Quantizer, quantize

_SCALE = 10 ** SCALE_EXPONENT


@dc.dataclass(frozen=True)
class ChaoticSeed:
    """Initial conditions derived from the largest Lyapunov exponent.

    :param lam: The exponent itself.
    :param x0_logistic: Logistic initial value, ``Rem(|lam| * 10**8)``.
    :param xy0_arnold: Arnold initial point, ``(|lam|, Rem(|lam| * 10**5))``.
    """

    lam: float
    x0_logistic: float
    xy0_arnold: t.Tuple[float, float]

    def __post_init__(self):
        if not 0.0 <= self.x0_logistic < 1.0:
            raise InvalidArgument(f'Logistic seed must lie in [0, 1), got {self.x0_logistic!r}')
        if not 0.0 <= self.xy0_arnold[1] < 1.0:
            raise InvalidArgument(f'Arnold y0 must lie in [0, 1), got {self.xy0_arnold[1]!r}')


@dc.dataclass(frozen=True)
class ByteSequence:
    """Converted Logistic bytes, indexed from 1 like x̄_1, x̄_2, ...

    The sequence can be extended at any time; extension never changes an
    existing prefix.

    :param values: The bytes; ``values[0]`` is x̄_1.
    :param mu: Logistic control parameter of the orbit.
    :param state: Last orbit value, where extension resumes.
    """

    values: t.Tuple[int, ...]
    mu: float
    state: float

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, index: int) -> int:
        if not 1 <= index <= len(self.values):
            raise InternalError(f'x̄ index {index} outside 1..{len(self.values)}')
        return self.values[index - 1]

    def window(self, start: int, count: int) -> np.ndarray:
        """Return x̄_start, ..., x̄_(start + count - 1).

        :param start: First index (1-based).
        :param count: Number of bytes.
        """
        if start < 1 or start + count - 1 > len(self.values):
            raise InternalError(
                f'x̄ window {start}..{start + count - 1} exceeds the generated length {len(self.values)}'
            )
        return np.array(self.values[start - 1:start - 1 + count], dtype=np.uint8)

    def extended(self, min_len: int) -> 'ByteSequence':
        """Return a sequence holding at least ``min_len`` bytes.

        :param min_len: Required length.
        """
        missing = min_len - len(self.values)
        if missing <= 0:
            return self
        orbit = logistic_iterate(self.state, self.mu, missing)
        return ByteSequence(
            values=self.values + tuple(convert_bytes(orbit).tolist()),
            mu=self.mu,
            state=float(orbit[-1]),
        )


@dc.dataclass(frozen=True, eq=False)
class KeystreamSet:
    """Everything the block cipher consumes for one plaintext.

    :param xbar: The Logistic byte sequence.
    :param r: Arnold skip count, x̄_mu1.
    :param v: Mask multiplier, x̄_mu2.
    :param D: Mask matrix of padded image dimensions.
    :param C0: Initial block.
    :param mu3: Plaintext-derived index that selected C0.
    """

    xbar: ByteSequence
    r: int
    v: int
    D: np.ndarray
    C0: np.ndarray
    mu3: int


def _check_finite(x: float, name: str = 'x'):
    if not math.isfinite(x):
        raise InvalidArgument(f'{name} must be finite, got {x!r}')


def _check_mu(mu: float):
    low, high = MU_RANGE
    if not low <= mu <= high:
        raise KeyDomainError(f'Logistic control mu={mu!r} outside [{low}, {high}]')


def _unit_float(fraction: Fraction) -> float:
    out = float(fraction)
    if out == 1.0:
        # a fraction just below one can round up to it
        out = math.nextafter(1.0, 0.0)
    return out


def rem_scaled(x: float, exponent: int) -> float:
    """Fractional part of ``x * 10**exponent``, computed exactly from the binary64 value of ``x``.

    :param x: Finite real.
    :param exponent: Non-negative decimal exponent.
    """
    _check_finite(x)
    numerator, denominator = float(x).as_integer_ratio()
    return _unit_float(Fraction(numerator * 10 ** exponent % denominator, denominator))


def rem(x: float) -> float:
    """Return ``x - floor(x)``, in [0, 1).

    :param x: Finite real.
    """
    return rem_scaled(x, 0)


def logistic_iterate(x0: float, mu: float, n: int) -> np.ndarray:
    """Iterate ``x_k = mu * x_(k-1) * (1 - x_(k-1))`` n times, excluding x0.

    :param x0: Initial value in [0, 1].
    :param mu: Control parameter in [3.9, 4].
    :param n: Number of iterations.
    """
    _check_mu(mu)
    _check_finite(x0, 'x0')
    if not 0.0 <= x0 <= 1.0:
        raise InvalidArgument(f'x0={x0!r} outside [0, 1]')
    out = np.empty(max(n, 0), dtype=np.float64)
    x, mu = float(x0), float(mu)
    for k in range(n):
        x = mu * x * (1.0 - x)
        out[k] = x
    return out


def convert_generic(
    x: float,
    quantizer: Quantizer = 'floor',
    m: int = SCALE_EXPONENT,
    modulus: int = BYTE_MODULUS,
) -> int:
    """Return ``quantizer(x * 10**m) mod modulus`` with exact scaling.

    :param x: Non-negative finite real.
    :param quantizer: One of ``floor``, ``round``, ``ceil``.
    :param m: Decimal exponent, at least 1.
    :param modulus: Modulus, at least 2.
    """
    _check_finite(x)
    if x < 0:
        raise InvalidArgument(f'Conversion needs a non-negative value, got {x!r}')
    if m < 1 or modulus < 2:
        raise InvalidArgument(f'Need m >= 1 and modulus >= 2, got m={m}, modulus={modulus}')
    numerator, denominator = float(x).as_integer_ratio()
    return quantize(numerator * 10 ** m, denominator, quantizer) % modulus


def convert_byte(x: float) -> int:
    """Return ``floor(x * 10**14) mod 256``.

    :param x: Non-negative finite real.
    """
    return convert_generic(x, 'floor', SCALE_EXPONENT, BYTE_MODULUS)


def convert_bytes(values: t.Sequence[float] | np.ndarray) -> np.ndarray:
    """Vectorised `convert_byte` over an orbit.

    :param values: Non-negative finite reals.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size and (not np.isfinite(values).all() or (values < 0).any()):
        raise InvalidArgument('Conversion needs non-negative finite values')
    out = np.empty(values.shape, dtype=np.uint8)
    flat = out.reshape(-1)
    for i, x in enumerate(values.reshape(-1).tolist()):
        numerator, denominator = x.as_integer_ratio()
        flat[i] = (numerator * _SCALE // denominator) & 0xFF
    return out


def gen_xbar(seed: ChaoticSeed, mu: float, min_len: int) -> ByteSequence:
    """Generate x̄_1 .. x̄_min_len from the seed's Logistic initial value.

    :param seed: Chaotic seed.
    :param mu: Logistic control parameter.
    :param min_len: Number of bytes.
    """
    _check_mu(mu)
    if min_len < 0:
        raise InvalidArgument(f'min_len must be non-negative, got {min_len}')
    return ByteSequence(values=(), mu=float(mu), state=seed.x0_logistic).extended(min_len)


def arnold_iterate(xy0: t.Tuple[float, float], a: int, b: int, n: int) -> t.List[t.Tuple[float, float]]:
    """Iterate the generalised Arnold map n times, excluding the initial point.

    :param xy0: Initial point.
    :param a: Positive integer control.
    :param b: Positive integer control.
    :param n: Number of iterations.
    """
    if int(a) != a or int(b) != b or a < 1 or b < 1:
        raise KeyDomainError(f'Arnold controls must be positive integers, got a={a!r}, b={b!r}')
    a, b = int(a), int(b)
    c = 1 + a * b
    x, y = float(xy0[0]), float(xy0[1])
    out = []
    for _ in range(n):
        x, y = x + a * y, b * x + c * y
        x -= math.floor(x)
        y -= math.floor(y)
        out.append((x, y))
    return out


def build_D(seed: ChaoticSeed, a: int, b: int, r: int, M: int, N: int) -> np.ndarray:
    """Fill the M x N mask matrix from the Arnold orbit, skipping r points.

    Coordinates are interleaved x, y, x, y, ... and written row-major.

    :param seed: Chaotic seed.
    :param a: Arnold control.
    :param b: Arnold control.
    :param r: Number of leading orbit points to discard.
    :param M: Rows.
    :param N: Columns.
    """
    if (M * N) % 2:
        raise LayoutError(f'Mask matrix needs an even number of entries, got {M}x{N}')
    if r < 0:
        raise InvalidArgument(f'Skip count must be non-negative, got {r}')
    pairs = arnold_iterate(seed.xy0_arnold, a, b, r + M * N // 2)[r:]
    return convert_bytes([c for pair in pairs for c in pair]).reshape(M, N)


def build_C0(xbar: ByteSequence, mu3: int, p1: int, p2: int) -> np.ndarray:
    """Fill the p1 x p2 initial block with x̄_mu3, x̄_(mu3 + 1), ...

    :param xbar: Byte sequence.
    :param mu3: Start index in [1, 256].
    :param p1: Block rows.
    :param p2: Block columns.
    """
    if not 1 <= mu3 <= BYTE_MODULUS:
        raise InvalidArgument(f'mu3 must lie in [1, 256], got {mu3}')
    return xbar.window(mu3, p1 * p2).reshape(p1, p2)
