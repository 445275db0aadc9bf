"""The block-chained image cipher: autoblocking, padding, mu3 and R-round encryption."""
import dataclasses as dc
import typing as t

import numpy as np

from ieae.constants import BLOCK_SIZES, BYTE_MODULUS, INDEX_LIMIT, MU_RANGE, SCALE_EXPONENT
from ieae.exceptions import InvalidArgument, KeyDomainError, LayoutError
from ieae.keystream import (
    ByteSequence,
    ChaoticSeed,
    KeystreamSet,
    build_C0,
    build_D,
    gen_xbar,
)
from ieae.lyapunov import seed_from_lambda


@dc.dataclass(frozen=True, eq=False)
class GrayImage:
    """An M x N matrix of 8-bit pixels.

    :param pixels: 2-D array of integers in [0, 255].
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or 0 in arr.shape:
            raise LayoutError(f'A gray image needs a non-empty 2-D pixel array, got shape {arr.shape}')
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer):
                raise InvalidArgument(f'Pixels must be integers, got dtype {arr.dtype}')
            if arr.min() < 0 or arr.max() > 255:
                raise InvalidArgument('Pixels must lie in [0, 255]')
        arr = arr.astype(np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, 'pixels', arr)

    @property
    def rows(self) -> int:
        return self.pixels.shape[0]

    @property
    def cols(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> t.Tuple[int, int]:
        return self.pixels.shape

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> 'GrayImage':
        return cls(np.zeros((rows, cols), dtype=np.uint8))


@dc.dataclass(frozen=True)
class SecretKey:
    """The cipher's secret key.

    :param omega1: Index of the byte selecting the block height.
    :param omega2: Index of the byte selecting the block width.
    :param mu1: Index of the Arnold skip count r.
    :param mu2: Index of the multiplier v.
    :param mu: Logistic control parameter in [3.9, 4].
    :param a: Arnold control.
    :param b: Arnold control.
    """

    omega1: int
    omega2: int
    mu1: int
    mu2: int
    mu: float
    a: int
    b: int

    def __post_init__(self):
        for name in ('omega1', 'omega2', 'mu1', 'mu2'):
            value = getattr(self, name)
            if not 1 <= value <= INDEX_LIMIT:
                raise KeyDomainError(f'{name}={value} outside [1, {INDEX_LIMIT}]')
        low, high = MU_RANGE
        if not low <= self.mu <= high:
            raise KeyDomainError(f'mu={self.mu!r} outside [{low}, {high}]')
        if self.a < 1 or self.b < 1:
            raise KeyDomainError(f'Arnold controls must be >= 1, got a={self.a}, b={self.b}')

    @classmethod
    def build_example(cls) -> 'SecretKey':
        """The key of the published attack experiment."""
        return cls(omega1=50, omega2=50, mu1=20, mu2=15, mu=3.999, a=1, b=1)


@dc.dataclass(frozen=True)
class PublicParams:
    """Public parameters.

    :param R: Number of encryption rounds.
    """

    R: int

    def __post_init__(self):
        if self.R < 1:
            raise InvalidArgument(f'Round count must be >= 1, got {self.R}')

    @classmethod
    def build_example(cls) -> 'PublicParams':
        return cls(R=3)


@dc.dataclass(frozen=True)
class BlockLayout:
    """How an image is tiled into blocks.

    :param p1: Block rows.
    :param p2: Block columns.
    :param r1: Block-grid rows.
    :param r2: Block-grid columns.
    :param padded_M: Rows after zero padding.
    :param padded_N: Columns after zero padding.
    :param orig_M: Rows before padding.
    :param orig_N: Columns before padding.
    """

    p1: int
    p2: int
    r1: int
    r2: int
    padded_M: int
    padded_N: int
    orig_M: int
    orig_N: int

    def __post_init__(self):
        if self.padded_M != self.r1 * self.p1 or self.padded_N != self.r2 * self.p2:
            raise LayoutError(f'Inconsistent layout {self}')

    @classmethod
    def for_shape(cls, rows: int, cols: int, p1: int, p2: int) -> 'BlockLayout':
        """Smallest zero-padded layout of a rows x cols image into p1 x p2 blocks."""
        if p1 < 1 or p2 < 1:
            raise LayoutError(f'Block size must be positive, got {p1}x{p2}')
        r1, r2 = -(-rows // p1), -(-cols // p2)
        return cls(p1=p1, p2=p2, r1=r1, r2=r2,
                   padded_M=r1 * p1, padded_N=r2 * p2, orig_M=rows, orig_N=cols)

    @property
    def block_count(self) -> int:
        return self.r1 * self.r2

    @property
    def padded_shape(self) -> t.Tuple[int, int]:
        return self.padded_M, self.padded_N


def _pixels(image: GrayImage | np.ndarray) -> np.ndarray:
    return image.pixels if isinstance(image, GrayImage) else np.asarray(image)


def select_block_size(xbar: ByteSequence, omega1: int, omega2: int) -> t.Tuple[int, int]:
    """Look up (p1, p2) from x̄_omega1 and x̄_omega2.

    :param xbar: Byte sequence covering both indices.
    :param omega1: Index selecting the row of the table.
    :param omega2: Index selecting the column of the table.
    """
    q1 = xbar[omega1] * 10 ** SCALE_EXPONENT % 3
    q2 = xbar[omega2] * 10 ** SCALE_EXPONENT % 3
    return BLOCK_SIZES[q1, q2]


def mu3(image: GrayImage | np.ndarray, p1: int, p2: int) -> int:
    """Return the first block's pixel sum mod 256, plus one.

    :param image: Plain image.
    :param p1: Block rows.
    :param p2: Block columns.
    """
    block = _pixels(image)[:p1, :p2]
    return int(block.sum(dtype=np.int64)) % BYTE_MODULUS + 1


def pad(image: GrayImage, p1: int, p2: int) -> t.Tuple[GrayImage, BlockLayout]:
    """Append zero rows and columns until p1 and p2 divide the dimensions.

    :param image: Image to pad.
    :param p1: Block rows.
    :param p2: Block columns.
    """
    layout = BlockLayout.for_shape(image.rows, image.cols, p1, p2)
    if layout.padded_shape == image.shape:
        return image, layout
    padded = np.pad(
        image.pixels,
        ((0, layout.padded_M - image.rows), (0, layout.padded_N - image.cols)),
    )
    return GrayImage(padded), layout


def unpad(image: GrayImage, layout: BlockLayout) -> GrayImage:
    """Crop the padding recorded in the layout."""
    if image.shape != layout.padded_shape:
        raise LayoutError(f'Image is {image.shape}, layout expects {layout.padded_shape}')
    return GrayImage(image.pixels[:layout.orig_M, :layout.orig_N])


def split_blocks(image: GrayImage | np.ndarray, layout: BlockLayout) -> np.ndarray:
    """Cut the image into blocks in raster order; result has shape (r1 * r2, p1, p2).

    :param image: Image of padded dimensions.
    :param layout: Block layout.
    """
    pixels = _pixels(image)
    if pixels.shape != layout.padded_shape:
        raise LayoutError(f'Image is {pixels.shape}, layout expects {layout.padded_shape}')
    return (
        pixels.reshape(layout.r1, layout.p1, layout.r2, layout.p2)
        .transpose(0, 2, 1, 3)
        .reshape(layout.block_count, layout.p1, layout.p2)
    )


def join_blocks(blocks: np.ndarray, layout: BlockLayout) -> GrayImage:
    """Inverse of `split_blocks`.

    :param blocks: Array of shape (r1 * r2, p1, p2).
    :param layout: Block layout.
    """
    blocks = np.asarray(blocks)
    if blocks.shape != (layout.block_count, layout.p1, layout.p2):
        raise LayoutError(
            f'Got blocks {blocks.shape}, layout expects {(layout.block_count, layout.p1, layout.p2)}'
        )
    pixels = (
        blocks.reshape(layout.r1, layout.r2, layout.p1, layout.p2)
        .transpose(0, 2, 1, 3)
        .reshape(layout.padded_shape)
    )
    return GrayImage(pixels)


def _check_streams(first: np.ndarray, D_blocks: np.ndarray, C0: np.ndarray):
    if first.ndim < 2 or first.shape != D_blocks.shape or first.shape[1:] != C0.shape:
        raise LayoutError(
            f'Block shapes do not match: data {first.shape}, D {D_blocks.shape}, C0 {C0.shape}'
        )


def _masked_D(D_blocks: np.ndarray, v: int) -> np.ndarray:
    vd = int(v) * D_blocks.astype(np.int64)
    vd[-1] = 0
    return vd


def encrypt_round(I_blocks: np.ndarray, D_blocks: np.ndarray, v: int, C0: np.ndarray) -> np.ndarray:
    """One round: ``C_k = (I_k + v * D_k + C_(k-1)) mod 256`` with the last D block zeroed.

    :param I_blocks: Plain blocks in raster order.
    :param D_blocks: Mask blocks in raster order.
    :param v: Multiplier.
    :param C0: Initial block.
    """
    I_blocks, D_blocks, C0 = map(np.asarray, (I_blocks, D_blocks, C0))
    _check_streams(I_blocks, D_blocks, C0)
    chained = np.cumsum(I_blocks.astype(np.int64) + _masked_D(D_blocks, v), axis=0)
    return ((chained + C0.astype(np.int64)) % BYTE_MODULUS).astype(np.uint8)


def decrypt_round(C_blocks: np.ndarray, D_blocks: np.ndarray, v: int, C0: np.ndarray) -> np.ndarray:
    """Inverse of `encrypt_round`: ``I_k = (C_k - v * D_k - C_(k-1)) mod 256``.

    :param C_blocks: Cipher blocks in raster order.
    :param D_blocks: Mask blocks in raster order.
    :param v: Multiplier.
    :param C0: Initial block.
    """
    C_blocks, D_blocks, C0 = map(np.asarray, (C_blocks, D_blocks, C0))
    _check_streams(C_blocks, D_blocks, C0)
    C = C_blocks.astype(np.int64)
    previous = np.concatenate([C0.astype(np.int64)[None], C[:-1]])
    return ((C - _masked_D(D_blocks, v) - previous) % BYTE_MODULUS).astype(np.uint8)


@dc.dataclass(frozen=True, eq=False)
class CipherContext:
    """Plaintext-independent material for one key, exponent and image size.

    :param key: Secret key.
    :param seed: Chaotic seed derived from the exponent.
    :param xbar: Logistic byte sequence of length p1 * p2 + 256.
    :param layout: Block layout of the image size.
    :param r: Arnold skip count.
    :param v: Multiplier.
    :param D: Mask matrix of padded dimensions.
    """

    key: SecretKey
    seed: ChaoticSeed
    xbar: ByteSequence
    layout: BlockLayout
    r: int
    v: int
    D: np.ndarray

    def keystream(self, mu3_value: int) -> KeystreamSet:
        """Complete the keystream for a plaintext with the given mu3."""
        C0 = build_C0(self.xbar, mu3_value, self.layout.p1, self.layout.p2)
        return KeystreamSet(xbar=self.xbar, r=self.r, v=self.v, D=self.D, C0=C0, mu3=mu3_value)

    def _padded(self, image: GrayImage) -> GrayImage:
        padded, layout = pad(image, self.layout.p1, self.layout.p2)
        if layout.padded_shape != self.layout.padded_shape:
            raise LayoutError(f'Image {image.shape} does not fit the prepared layout {self.layout}')
        return padded

    def encrypt(self, image: GrayImage, R: int) -> t.Tuple[GrayImage, int]:
        """Encrypt with R rounds; returns the padded cipher image and mu3."""
        padded = self._padded(image)
        tag = mu3(padded, self.layout.p1, self.layout.p2)
        keystream = self.keystream(tag)
        blocks = split_blocks(padded, self.layout)
        D_blocks = split_blocks(keystream.D, self.layout)
        for _ in range(R):
            blocks = encrypt_round(blocks, D_blocks, keystream.v, keystream.C0)
        return join_blocks(blocks, self.layout), tag

    def decrypt(self, cipher: GrayImage, R: int, mu3_value: int) -> GrayImage:
        """Undo `encrypt`; returns the padded plain image."""
        if cipher.shape != self.layout.padded_shape:
            raise LayoutError(
                f'Cipher image {cipher.shape} is not a whole number of '
                f'{self.layout.p1}x{self.layout.p2} blocks'
            )
        keystream = self.keystream(mu3_value)
        blocks = split_blocks(cipher, self.layout)
        D_blocks = split_blocks(keystream.D, self.layout)
        for _ in range(R):
            blocks = decrypt_round(blocks, D_blocks, keystream.v, keystream.C0)
        return join_blocks(blocks, self.layout)


def prepare(key: SecretKey, lam: float, shape: t.Tuple[int, int]) -> CipherContext:
    """Derive seed, x̄, block layout, r, v and D for images of the given shape.

    :param key: Secret key.
    :param lam: Largest Lyapunov exponent of the key's ECG signal.
    :param shape: ``(rows, cols)`` of the plain image, or of the padded cipher image.
    """
    seed = seed_from_lambda(lam)
    xbar = gen_xbar(seed, key.mu, INDEX_LIMIT)
    p1, p2 = select_block_size(xbar, key.omega1, key.omega2)
    layout = BlockLayout.for_shape(shape[0], shape[1], p1, p2)
    xbar = xbar.extended(p1 * p2 + INDEX_LIMIT)
    r, v = xbar[key.mu1], xbar[key.mu2]
    D = build_D(seed, key.a, key.b, r, layout.padded_M, layout.padded_N)
    return CipherContext(key=key, seed=seed, xbar=xbar, layout=layout, r=r, v=v, D=D)


def encrypt(image: GrayImage, key: SecretKey, params: PublicParams, lam: float) -> t.Tuple[GrayImage, int]:
    """Encrypt a gray image.

    :param image: Plain image.
    :param key: Secret key.
    :param params: Public parameters.
    :param lam: Largest Lyapunov exponent.
    """
    return prepare(key, lam, image.shape).encrypt(image, params.R)


def decrypt(cipher: GrayImage, key: SecretKey, params: PublicParams, lam: float, mu3_value: int) -> GrayImage:
    """Decrypt a cipher image to the padded plain image.

    :param cipher: Cipher image of padded dimensions.
    :param key: Secret key.
    :param params: Public parameters.
    :param lam: Largest Lyapunov exponent.
    :param mu3_value: The plaintext's mu3, delivered alongside the cipher.
    """
    return prepare(key, lam, cipher.shape).decrypt(cipher, params.R, mu3_value)
