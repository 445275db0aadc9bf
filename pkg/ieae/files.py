"""Binary PGM images and one-sample-per-line CSV series."""
import logging
import os
import re
import typing as t

import numpy as np

from ieae.cipher import GrayImage
from ieae.exceptions import FormatError

logger = logging.getLogger(__name__)

_TOKEN = re.compile(rb'#[^\n]*\n?|\s+')


def _header(data: bytes, count: int, path: str) -> t.Tuple[t.List[bytes], int]:
    tokens, pos = [], 0
    while len(tokens) < count:
        skip = _TOKEN.match(data, pos)
        if skip:
            pos = skip.end()
            continue
        end = pos
        while end < len(data) and not data[end:end + 1].isspace() and data[end:end + 1] != b'#':
            end += 1
        if end == pos:
            raise FormatError(f'{path}: truncated PGM header')
        tokens.append(data[pos:end])
        pos = end
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError(f'{path}: missing whitespace after PGM header')
    return tokens, pos + 1


def read_pgm(path: str | os.PathLike) -> GrayImage:
    """Read a binary (P5) gray image with maxval 255.

    :param path: File to read.
    """
    path = os.fspath(path)
    try:
        with open(path, 'rb') as f:
            data = f.read()
    except OSError as e:
        raise FormatError(f'{path}: {e.strerror or e}') from e

    if not data.startswith(b'P5'):
        raise FormatError(f'{path}: not a binary PGM (expected magic P5)')
    tokens, offset = _header(data, 4, path)
    try:
        width, height, maxval = (int(tok) for tok in tokens[1:])
    except ValueError as e:
        raise FormatError(f'{path}: malformed PGM header {tokens[1:]!r}') from e
    if width < 1 or height < 1:
        raise FormatError(f'{path}: invalid dimensions {width}x{height}')
    if maxval != 255:
        raise FormatError(f'{path}: only maxval 255 is supported, got {maxval}')

    raster = data[offset:]
    expected = width * height
    if len(raster) < expected:
        raise FormatError(f'{path}: truncated raster, {len(raster)} of {expected} bytes')
    if len(raster) > expected:
        logger.debug('%s: ignoring %d trailing bytes', path, len(raster) - expected)
    pixels = np.frombuffer(raster[:expected], dtype=np.uint8).reshape(height, width)
    return GrayImage(pixels)


def write_pgm(path: str | os.PathLike, image: GrayImage):
    """Write a gray image as binary PGM.

    :param path: Destination file.
    :param image: Image to write.
    """
    with open(path, 'wb') as f:
        f.write(f'P5\n{image.cols} {image.rows}\n255\n'.encode())
        f.write(image.pixels.tobytes())


def read_series(path: str | os.PathLike) -> np.ndarray:
    """Read one decimal sample per line; blank lines are skipped.

    :param path: CSV file.
    """
    path = os.fspath(path)
    try:
        with open(path) as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise FormatError(f'{path}: {e.strerror or e}') from e

    samples = []
    for lineno, line in enumerate(lines, start=1):
        text = line.split(',')[0].strip()
        if not text:
            continue
        try:
            samples.append(float(text))
        except ValueError as e:
            raise FormatError(f'{path}:{lineno}: not a number: {text!r}') from e
    if not samples:
        raise FormatError(f'{path}: no samples')
    return np.array(samples, dtype=np.float64)


def write_series(path: str | os.PathLike, series: t.Iterable[float]):
    with open(path, 'w') as f:
        f.writelines(f'{float(x)!r}\n' for x in series)
