"""Known-plaintext attack: equivalent-key masks and their use.

Every round of the cipher is a block prefix sum plus a plaintext-independent
term, so after R rounds

    C = nested_sum(I, R) + D'  (mod 256)

where the mask D' depends only on the key, the exponent, R and mu3. One
known (plain, cipher) pair therefore yields D', which decrypts every other
cipher image whose plaintext shares the same mu3.
"""
import dataclasses as dc
import itertools
import logging
import typing as t

import numpy as np

from ieae.cipher import (
    BlockLayout,
    GrayImage,
    encrypt_round,
    join_blocks,
    mu3,
    pad,
    split_blocks,
)
from ieae.constants import BLOCK_SIZES, BYTE_MODULUS
from ieae.exceptions import InvalidArgument, LayoutError
from ieae.keystream import KeystreamSet

logger = logging.getLogger(__name__)


@dc.dataclass(frozen=True, eq=False)
class MaskImage:
    """An equivalent key.

    :param mask: Byte matrix of the layout's padded dimensions.
    :param layout: Block layout the mask was extracted under.
    :param R: Round count.
    :param mu3_tag: mu3 of the plaintext the mask came from.
    """

    mask: np.ndarray
    layout: BlockLayout
    R: int
    mu3_tag: int

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=np.uint8)
        if mask.shape != self.layout.padded_shape:
            raise LayoutError(f'Mask is {mask.shape}, layout expects {self.layout.padded_shape}')
        object.__setattr__(self, 'mask', mask)

    @property
    def image(self) -> GrayImage:
        return GrayImage(self.mask)


@dc.dataclass(frozen=True, eq=False)
class LayoutCandidate:
    """A mask extracted under one block-size hypothesis.

    :param layout: The hypothesised layout.
    :param mask: The mask extracted under it.
    :param score: Roughness of the second cipher decrypted with the mask, if any.
    """

    layout: BlockLayout
    mask: MaskImage
    score: float | None = None


def _as_stream(blocks) -> np.ndarray:
    try:
        stream = np.asarray(blocks)
    except ValueError as e:
        raise LayoutError(f'Blocks do not share one shape: {e}') from e
    if stream.ndim < 1 or len(stream) == 0 or stream.dtype == object:
        raise LayoutError('Need a non-empty stream of equally shaped blocks')
    return stream.astype(np.int64)


def block_prefix_sum(blocks) -> np.ndarray:
    """``S_k = (B_1 + ... + B_k) mod 256`` element-wise.

    :param blocks: Stream of equally shaped blocks, block index on axis 0.
    """
    return (np.cumsum(_as_stream(blocks), axis=0) % BYTE_MODULUS).astype(np.uint8)


def block_prefix_diff(blocks) -> np.ndarray:
    """``T_k = (S_k - S_(k-1)) mod 256`` with ``S_0 = 0``; inverse of `block_prefix_sum`.

    :param blocks: Stream of equally shaped blocks, block index on axis 0.
    """
    return (np.diff(_as_stream(blocks), axis=0, prepend=0) % BYTE_MODULUS).astype(np.uint8)


def nested_sum(blocks, R: int) -> np.ndarray:
    """Apply `block_prefix_sum` R times.

    :param blocks: Stream of equally shaped blocks.
    :param R: Round count.
    """
    if R < 1:
        raise InvalidArgument(f'Round count must be >= 1, got {R}')
    out = _as_stream(blocks)
    for _ in range(R):
        out = block_prefix_sum(out)
    return out.astype(np.uint8)


def _chain_tails(k: int, depth: int) -> t.Iterator[int]:
    # last index of every chain k >= h_1 >= ... >= h_depth >= 1
    if depth == 0:
        yield 1
        return
    for chain in itertools.combinations_with_replacement(range(k, 0, -1), depth):
        yield chain[-1]


def closed_form_nested_sum(blocks, R: int) -> np.ndarray:
    """Evaluate the published R-fold nested summation literally, by brute force.

    The innermost sum runs over ``i = 1 .. k - h_(R-1) + 1`` inside the
    chain ``k >= h_1 >= ... >= h_(R-1) >= 1``.

    :param blocks: Stream of equally shaped blocks.
    :param R: Round count, 2 or 3 in the published form.
    """
    if R < 1:
        raise InvalidArgument(f'Round count must be >= 1, got {R}')
    stream = _as_stream(blocks)
    prefix = np.cumsum(stream, axis=0)
    out = np.zeros_like(stream)
    for k in range(1, len(stream) + 1):
        for tail in _chain_tails(k, R - 1):
            out[k - 1] += prefix[k - tail]
    return (out % BYTE_MODULUS).astype(np.uint8)


def closed_form_agrees(blocks, R: int) -> bool:
    """Whether the literal nested summation equals the R-fold prefix sum on this stream."""
    return bool(np.array_equal(closed_form_nested_sum(blocks, R), nested_sum(blocks, R)))


def _padded_to(image: GrayImage, layout: BlockLayout) -> GrayImage:
    padded, own = pad(image, layout.p1, layout.p2)
    if own.padded_shape != layout.padded_shape:
        raise LayoutError(f'Image {image.shape} does not pad to {layout.padded_shape}')
    return padded


def extract_mask(plain: GrayImage, cipher: GrayImage, layout: BlockLayout, R: int) -> MaskImage:
    """Recover the equivalent key ``D' = (C - nested_sum(I, R)) mod 256``.

    :param plain: Known plain image (padded here if needed).
    :param cipher: Its cipher image.
    :param layout: Block layout used by the encryption.
    :param R: Round count.
    """
    padded = _padded_to(plain, layout)
    if cipher.shape != layout.padded_shape:
        raise LayoutError(f'Cipher is {cipher.shape}, layout expects {layout.padded_shape}')
    summed = nested_sum(split_blocks(padded, layout), R).astype(np.int64)
    D_prime = (split_blocks(cipher, layout).astype(np.int64) - summed) % BYTE_MODULUS
    return MaskImage(
        mask=join_blocks(D_prime.astype(np.uint8), layout).pixels,
        layout=layout,
        R=R,
        mu3_tag=mu3(padded, layout.p1, layout.p2),
    )


def decrypt_with_mask(cipher: GrayImage, mask: MaskImage) -> GrayImage:
    """Undo ``C = nested_sum(I, R) + D'``; exact whenever the plaintext shares the mask's mu3.

    :param cipher: Cipher image.
    :param mask: Equivalent key.
    """
    if cipher.shape != mask.layout.padded_shape:
        raise LayoutError(f'Cipher is {cipher.shape}, mask is {mask.layout.padded_shape}')
    blocks = (
        split_blocks(cipher, mask.layout).astype(np.int64)
        - split_blocks(mask.mask, mask.layout).astype(np.int64)
    ) % BYTE_MODULUS
    for _ in range(mask.R):
        blocks = block_prefix_diff(blocks)
    return join_blocks(blocks.astype(np.uint8), mask.layout)


def mask_from_keystream(keystream: KeystreamSet, layout: BlockLayout, R: int) -> MaskImage:
    """The equivalent key computed from key material: R rounds on an all-zero plaintext.

    :param keystream: Keystream of the target mu3.
    :param layout: Block layout.
    :param R: Round count.
    """
    D_blocks = split_blocks(keystream.D, layout)
    blocks = np.zeros_like(D_blocks)
    for _ in range(R):
        blocks = encrypt_round(blocks, D_blocks, keystream.v, keystream.C0)
    return MaskImage(mask=join_blocks(blocks, layout).pixels, layout=layout, R=R, mu3_tag=keystream.mu3)


def mu3_match(a: GrayImage, b: GrayImage, p1: int, p2: int) -> bool:
    """Whether two plain images select the same C0."""
    return mu3(a, p1, p2) == mu3(b, p1, p2)


def roughness(image: GrayImage) -> float:
    """Mean absolute difference between horizontal and vertical neighbours."""
    pixels = image.pixels.astype(np.int64)
    horizontal = np.abs(np.diff(pixels, axis=1))
    vertical = np.abs(np.diff(pixels, axis=0))
    count = horizontal.size + vertical.size
    if count == 0:
        return 0.0
    return float((horizontal.sum() + vertical.sum()) / count)


def enumerate_layout_candidates(
    plain: GrayImage,
    cipher: GrayImage,
    R: int,
    second_cipher: GrayImage | None = None,
) -> t.List[LayoutCandidate]:
    """Extract a mask under every table block size and rank them.

    Every candidate reproduces the training pair exactly, so ranking needs a
    second cipher image: candidates are ordered by the roughness of its
    decryption, smoothest first. Without one, candidates keep table order
    and carry no score.

    :param plain: Known plain image.
    :param cipher: Its cipher image.
    :param R: Round count.
    :param second_cipher: Another cipher image under the same key.
    """
    if second_cipher is not None and second_cipher.shape != cipher.shape:
        raise LayoutError(f'Second cipher is {second_cipher.shape}, expected {cipher.shape}')

    candidates = []
    for p1, p2 in BLOCK_SIZES.values():
        layout = BlockLayout.for_shape(plain.rows, plain.cols, p1, p2)
        if layout.padded_shape != cipher.shape:
            logger.debug('Skipping %dx%d: pads to %s, cipher is %s', p1, p2, layout.padded_shape, cipher.shape)
            continue
        mask = extract_mask(plain, cipher, layout, R)
        score = None
        if second_cipher is not None:
            score = roughness(decrypt_with_mask(second_cipher, mask))
        candidates.append(LayoutCandidate(layout=layout, mask=mask, score=score))

    if second_cipher is not None:
        candidates.sort(key=lambda c: c.score)
    return candidates
