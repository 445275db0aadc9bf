import dataclasses as dc
import enum
import functools
import logging
import os
import re
import typing as t
from fractions import Fraction
from pathlib import Path

import numpy as np
import typer
from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from ieae.analysis import (
    FixedPointSpec,
    MiniFloatSpec,
    arnold_mod_map,
    compare_census,
    component_census,
    export_dot,
    is_permutation,
    logistic_fixed_map,
    logistic_minifloat_map,
    pow10_stats,
)
from ieae.attack import (
    MaskImage,
    closed_form_agrees,
    decrypt_with_mask,
    enumerate_layout_candidates,
    extract_mask,
)
from ieae.cipher import BlockLayout, prepare, unpad
from ieae.constants import (
    DEFAULT_EMBED_M,
    DEFAULT_EPSILON_FRACTION,
    DEFAULT_EXECUTOR,
    DEFAULT_WORKERS,
    META_SUFFIX,
    PUBLISHED_ARNOLD_CENSUS,
)
from ieae.exceptions import IeaeError, InvalidArgument, LayoutError
from ieae.experiment import Experiment
from ieae.files import read_pgm, read_series, write_pgm
from ieae.lyapunov import EmbeddingConfig, wolf_lle
from ieae.misc import QUANTIZERS
from ieae.records import KeyFile, SidecarMetadata

app = typer.Typer(help="Cryptanalysis workbench for an ECG-seeded chaotic image cipher")

console = Console(stderr=True)
stdout = Console()
logger = logging.getLogger('ieae')

load_dotenv()


@dc.dataclass(frozen=True)
class Settings:
    """Environment configuration; command options take precedence.

    :param executor: Trial executor of the attack experiment.
    :param workers: Worker count of concurrent executors.
    :param embed_m: Embedding dimension for ECG-derived exponents.
    :param epsilon_fraction: Evolution threshold as a fraction of the data range.
    """

    executor: str = DEFAULT_EXECUTOR
    workers: int = DEFAULT_WORKERS
    embed_m: int = DEFAULT_EMBED_M
    epsilon_fraction: float = DEFAULT_EPSILON_FRACTION

    @classmethod
    def from_env(cls) -> 'Settings':
        def read(name, cast, default):
            raw = os.environ.get(name)
            if raw is None or raw == '':
                return default
            try:
                return cast(raw)
            except ValueError as e:
                raise InvalidArgument(f'{name}={raw!r} is not a valid {cast.__name__}') from e

        return cls(
            executor=read('IEAE_EXECUTOR', str, DEFAULT_EXECUTOR),
            workers=read('IEAE_WORKERS', int, DEFAULT_WORKERS),
            embed_m=read('IEAE_EMBED_M', int, DEFAULT_EMBED_M),
            epsilon_fraction=read('IEAE_EPSILON_FRACTION', float, DEFAULT_EPSILON_FRACTION),
        )


class GraphKind(str, enum.Enum):
    logistic_fixed = 'logistic-fixed'
    logistic_float = 'logistic-float'
    arnold = 'arnold'


def reports_errors(f):
    """Turn library errors into a one-line diagnostic and the error's exit code."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except IeaeError as e:
            console.print(f'[bold red]error:[/] {escape(str(e))}')
            raise typer.Exit(code=e.exit_code)

    return wrapper


def meta_path(path: Path) -> Path:
    return path.with_name(path.name + META_SUFFIX)


def parse_layout(text: str) -> t.Tuple[int, int]:
    match = re.fullmatch(r'\s*(\d+)\s*[xX]\s*(\d+)\s*', text)
    if not match or 0 in (int(match[1]), int(match[2])):
        raise typer.BadParameter(f'expected positive P1xP2, got {text!r}', param_hint='LAYOUT')
    return int(match[1]), int(match[2])


def load_key(key_file: Path) -> t.Tuple[KeyFile, float]:
    settings = Settings.from_env()
    key = KeyFile.load(key_file)
    lam = key.resolve_lambda(
        base_dir=key_file.parent,
        embed_m=settings.embed_m,
        epsilon_fraction=settings.epsilon_fraction,
    )
    return key, lam


@app.callback()
def main(verbose: bool = False):
    """
    Encrypt and decrypt PGM images, run the known-plaintext attack and study digitised chaos.

    :param verbose: Log debug messages.
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(message)s',
        handlers=[RichHandler(console=console, show_path=False, show_time=False)],
        force=True,
    )


@app.command()
@reports_errors
def encrypt(key_file: Path, input: Path, output: Path):
    """
    Encrypt a PGM image; writes the cipher image and OUTPUT.meta.

    :param key_file: Key file (key=value lines).
    :param input: Plain PGM image.
    :param output: Cipher PGM image, padded to whole blocks.
    """
    key, lam = load_key(key_file)
    image = read_pgm(input)
    context = prepare(key.secret_key(), lam, image.shape)
    cipher, tag = context.encrypt(image, key.r_rounds)
    write_pgm(output, cipher)
    SidecarMetadata.for_layout(context.layout, key.r_rounds, tag).save(meta_path(output))
    logger.info(
        'Encrypted %dx%d -> %dx%d with %dx%d blocks, R=%d, key %s',
        image.rows, image.cols, cipher.rows, cipher.cols,
        context.layout.p1, context.layout.p2, key.r_rounds, key.fingerprint,
    )


@app.command()
@reports_errors
def decrypt(key_file: Path, cipher: Path, output: Path, meta: t.Optional[Path] = None):
    """
    Decrypt a cipher image and crop it to the original size.

    :param key_file: Key file.
    :param cipher: Cipher PGM image.
    :param output: Recovered PGM image.
    :param meta: Sidecar written by `encrypt`; defaults to CIPHER.meta.
    """
    meta = meta or meta_path(cipher)
    if not meta.exists():
        raise InvalidArgument(
            f'No sidecar at {meta}: decryption needs the plain image\'s mu3, '
            'which selects the initial block and is not recoverable from the cipher image'
        )
    sidecar = SidecarMetadata.load(meta)
    key, lam = load_key(key_file)
    if sidecar.r_rounds != key.r_rounds:
        raise InvalidArgument(f'Sidecar says R={sidecar.r_rounds}, key file says R={key.r_rounds}')

    image = read_pgm(cipher)
    context = prepare(key.secret_key(), lam, (sidecar.orig_m, sidecar.orig_n))
    if (context.layout.p1, context.layout.p2) != (sidecar.p1, sidecar.p2):
        raise LayoutError(
            f'Key selects {context.layout.p1}x{context.layout.p2} blocks, '
            f'sidecar records {sidecar.p1}x{sidecar.p2}'
        )
    plain = context.decrypt(image, key.r_rounds, sidecar.mu3)
    write_pgm(output, unpad(plain, context.layout))


@app.command(name='extract-mask')
@reports_errors
def extract_mask_(plain: Path, cipher: Path, layout: str, rounds: int, mask_out: Path):
    """
    Extract the equivalent key from one known plain/cipher pair.

    :param plain: Known plain PGM image.
    :param cipher: Its cipher PGM image.
    :param layout: Block size as P1xP2, e.g. 16x32.
    :param rounds: Number of rounds R.
    :param mask_out: Mask PGM image; its metadata goes to MASK_OUT.meta.
    """
    p1, p2 = parse_layout(layout)
    if rounds < 1:
        raise typer.BadParameter('must be >= 1', param_hint='ROUNDS')
    plain_image = read_pgm(plain)
    block_layout = BlockLayout.for_shape(plain_image.rows, plain_image.cols, p1, p2)
    mask = extract_mask(plain_image, read_pgm(cipher), block_layout, rounds)
    write_pgm(mask_out, mask.image)
    SidecarMetadata.for_layout(block_layout, rounds, mask.mu3_tag).save(meta_path(mask_out))
    logger.info('Mask valid for plain images with mu3=%d', mask.mu3_tag)


@app.command(name='mask-decrypt')
@reports_errors
def mask_decrypt(cipher: Path, mask: Path, output: Path, meta: t.Optional[Path] = None):
    """
    Decrypt a cipher image with an extracted mask instead of the key.

    :param cipher: Cipher PGM image.
    :param mask: Mask PGM image from `extract-mask` (with MASK.meta beside it).
    :param output: Recovered PGM image.
    :param meta: Sidecar of the target cipher, used to crop the padding.
    """
    mask_meta = SidecarMetadata.load(meta_path(mask))
    equivalent = MaskImage(
        mask=read_pgm(mask).pixels,
        layout=mask_meta.layout,
        R=mask_meta.r_rounds,
        mu3_tag=mask_meta.mu3,
    )
    logger.warning('Recovery is exact only if the plain image has mu3=%d', equivalent.mu3_tag)
    recovered = decrypt_with_mask(read_pgm(cipher), equivalent)

    if meta is not None:
        target = SidecarMetadata.load(meta)
        if target.mu3 != equivalent.mu3_tag:
            logger.warning('Target mu3=%d differs from the mask\'s; expect garbage', target.mu3)
        recovered = unpad(recovered, BlockLayout.for_shape(target.orig_m, target.orig_n, target.p1, target.p2))
    write_pgm(output, recovered)


@app.command(name='attack-experiment')
@reports_errors
def attack_experiment(
    key_file: Path,
    reference: Path,
    trials: int = 2560,
    rng_seed: int = 0,
    executor: t.Optional[str] = None,
    workers: t.Optional[int] = None,
):
    """
    Attack many seeded random images with the mask of one reference image.

    :param key_file: Key file.
    :param reference: Known plain PGM image.
    :param trials: Number of random images, at least 256.
    :param rng_seed: Seed of the random images.
    :param executor: Trial executor (simple, threads); defaults to IEAE_EXECUTOR.
    :param workers: Worker count; defaults to IEAE_WORKERS.
    """
    if trials < 256:
        raise typer.BadParameter(f'need at least 256 trials, got {trials}', param_hint='--trials')
    settings = Settings.from_env()
    key, lam = load_key(key_file)
    experiment = Experiment(
        key=key.secret_key(),
        params=key.public_params(),
        lam=lam,
        reference=read_pgm(reference),
        trials=trials,
        rng_seed=rng_seed,
        executor=executor or settings.executor,
        workers=workers if workers is not None else settings.workers,
    )
    experiment.show(console)
    report = experiment.run()
    report.key_fingerprint = key.fingerprint
    report.show(console)
    typer.echo(f'trials={report.trials} successes={report.successes} matches={report.matches}')
    if not report.consistent:
        raise typer.Exit(code=1)


@app.command()
@reports_errors
def graph(
    kind: GraphKind,
    out: Path,
    census_out: Path,
    e: t.Optional[int] = None,
    mu: str = '61/16',
    quantizer: str = 'floor',
    a: int = 7,
    b: int = 8,
    exp_bits: int = 4,
    mant_bits: int = 4,
    bias: int = 7,
):
    """
    Build the functional graph of a digitised map; writes DOT and a component census.

    :param kind: logistic-fixed, logistic-float or arnold.
    :param out: DOT file.
    :param census_out: Census file, one "period size count" line per entry.
    :param e: Precision bits (default 6 for logistic-fixed, 4 for arnold).
    :param mu: Logistic control as a fraction, e.g. 61/16 or 123/32.
    :param quantizer: floor, round or ceil (logistic-fixed).
    :param a: Arnold control a'.
    :param b: Arnold control b'.
    :param exp_bits: Minifloat exponent bits.
    :param mant_bits: Minifloat significand bits.
    :param bias: Minifloat exponent bias.
    """
    try:
        mu_value = Fraction(mu)
    except (ValueError, ZeroDivisionError):
        raise typer.BadParameter(f'not a fraction: {mu!r}', param_hint='--mu')

    if e is not None and e < 1:
        raise typer.BadParameter(f'must be >= 1, got {e}', param_hint='--e')

    if kind is GraphKind.logistic_fixed:
        if quantizer not in QUANTIZERS:
            raise typer.BadParameter(f'expected one of {", ".join(QUANTIZERS)}', param_hint='--quantizer')
        den = mu_value.denominator
        if den & (den - 1):
            raise typer.BadParameter('denominator must be a power of two', param_hint='--mu')
        spec = FixedPointSpec(e=6 if e is None else e, quantizer=quantizer)
        g = logistic_fixed_map(mu_value.numerator, den.bit_length() - 1, spec)
    elif kind is GraphKind.logistic_float:
        try:
            spec = MiniFloatSpec(exp_bits=exp_bits, mant_bits=mant_bits, bias=bias)
        except InvalidArgument as err:
            raise typer.BadParameter(str(err), param_hint="'--exp-bits' / '--mant-bits' / '--bias'")
        g = logistic_minifloat_map(mu_value, spec)
    else:
        e = 4 if e is None else e
        g = arnold_mod_map(a, b, e)

    census = component_census(g)
    out.write_text(export_dot(g))
    census_out.write_text(census.to_text())

    tbl = Table(show_header=True, header_style='bold magenta', title=f'{kind.value}: {g.n} nodes')
    tbl.add_column('Cycle length', style='cyan')
    tbl.add_column('Component size', style='white')
    tbl.add_column('Count', style='white')
    for entry in census.entries:
        tbl.add_row(str(entry.cycle_length), str(entry.component_size), str(entry.count))
    console.print(tbl)

    if kind is GraphKind.arnold:
        console.print(f'Permutation: {"yes" if is_permutation(g) else "no"}')
        if (a, b, e) == (7, 8, 4):
            comparison = compare_census(census, PUBLISHED_ARNOLD_CENSUS)
            cmp_tbl = Table(show_header=True, header_style='bold magenta', title='Published census')
            cmp_tbl.add_column('Period', style='cyan')
            cmp_tbl.add_column('Computed', style='white')
            cmp_tbl.add_column('Published', style='white')
            for period, computed, published in comparison.rows:
                cmp_tbl.add_row(str(period), str(computed), str(published))
            console.print(cmp_tbl)
            console.print(
                f'Nodes: computed {comparison.computed_nodes}, '
                f'published counts account for {comparison.published_nodes}'
            )


@app.command()
@reports_errors
def pow10(start: int = 1, stop: int = 50):
    """
    Print m, the bit length and the popcount of 10**m.

    :param start: First m.
    :param stop: Last m, at most 50.
    """
    if start > stop:
        raise typer.BadParameter(f'start {start} exceeds stop {stop}', param_hint='--start')
    for m in range(start, stop + 1):
        bit_length, popcount = pow10_stats(m)
        typer.echo(f'{m} {bit_length} {popcount}')


@app.command()
@reports_errors
def lyapunov(
    series: Path,
    m: t.Optional[int] = None,
    epsilon: t.Optional[float] = None,
    fraction: t.Optional[float] = None,
):
    """
    Estimate the largest Lyapunov exponent of a one-column CSV series.

    :param series: CSV file, one sample per line.
    :param m: Embedding dimension; defaults to IEAE_EMBED_M.
    :param epsilon: Evolution threshold in signal units.
    :param fraction: Threshold as a fraction of the data range; defaults to IEAE_EPSILON_FRACTION.
    """
    settings = Settings.from_env()
    z = read_series(series)
    m = m if m is not None else settings.embed_m
    fraction = fraction if fraction is not None else settings.epsilon_fraction
    if m < 1:
        raise typer.BadParameter(f'must be >= 1, got {m}', param_hint='--m')
    if epsilon is not None and not epsilon > 0:
        raise typer.BadParameter(f'must be > 0, got {epsilon}', param_hint='--epsilon')
    if not fraction > 0:
        raise typer.BadParameter(f'must be > 0, got {fraction}', param_hint='--fraction')
    if epsilon is not None:
        cfg = EmbeddingConfig(m=m, epsilon=epsilon)
    else:
        cfg = EmbeddingConfig.for_series(z, m=m, fraction=fraction)
    lam, log = wolf_lle(z, cfg)

    typer.echo(f'lambda={lam!r}')
    typer.echo(f'q={log.q}')
    typer.echo(f't_final={log.t_final}')
    tbl = Table(show_header=True, header_style='bold magenta', title='Replacements')
    tbl.add_column('#', style='cyan', no_wrap=True)
    tbl.add_column("t, t'", style='white')
    tbl.add_column("L, L'", style='white')
    for i, ((t_, t_prime), (before, after)) in enumerate(zip(log.replacements, log.separations), start=1):
        tbl.add_row(str(i), f'{t_}, {t_prime}', f'{before:.6g}, {after:.6g}')
    console.print(tbl)


@app.command(name='rank-layouts')
@reports_errors
def rank_layouts(plain: Path, cipher: Path, rounds: int, second: t.Optional[Path] = None):
    """
    Extract a mask under every table block size and rank them.

    :param plain: Known plain PGM image.
    :param cipher: Its cipher PGM image.
    :param rounds: Number of rounds R.
    :param second: Another cipher image under the same key, used for ranking.
    """
    candidates = enumerate_layout_candidates(
        read_pgm(plain),
        read_pgm(cipher),
        rounds,
        second_cipher=read_pgm(second) if second is not None else None,
    )
    if not candidates:
        raise LayoutError('No table block size pads the plain image to the cipher\'s size')
    tbl = Table(show_header=True, header_style='bold magenta')
    tbl.add_column('#', style='cyan', no_wrap=True)
    tbl.add_column('Layout', style='magenta')
    tbl.add_column('mu3', style='white')
    tbl.add_column('Roughness', style='white')
    for i, c in enumerate(candidates, start=1):
        score = '-' if c.score is None else f'{c.score:.3f}'
        tbl.add_row(str(i), f'{c.layout.p1}x{c.layout.p2}', str(c.mask.mu3_tag), score)
    stdout.print(tbl)


@app.command(name='closed-form')
@reports_errors
def closed_form(rounds: int = 3, trials: int = 100, seed: int = 0, max_blocks: int = 8):
    """
    Compare the literal nested-sum formula with repeated prefix sums on random block streams.

    :param rounds: Number of rounds R.
    :param trials: Number of random streams.
    :param seed: Seed of the streams.
    :param max_blocks: Longest stream.
    """
    if trials < 1 or max_blocks < 1:
        raise typer.BadParameter('trials and max-blocks must be >= 1')
    rng = np.random.default_rng(seed)
    agree = 0
    for _ in range(trials):
        k = int(rng.integers(1, max_blocks + 1))
        agree += closed_form_agrees(rng.integers(0, 256, size=(k, 2, 2)), rounds)
    typer.echo(f'R={rounds} agree={agree} disagree={trials - agree}')


if __name__ == "__main__":
    app()
