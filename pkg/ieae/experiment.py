"""Known-plaintext experiment: one extracted mask against many random plain images."""
import dataclasses as dc
import importlib
import logging
import math
import typing as t

import numpy as np
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from ieae.attack import MaskImage, decrypt_with_mask, extract_mask
from ieae.cipher import CipherContext, GrayImage, PublicParams, SecretKey, pad, prepare
from ieae.constants import BYTE_MODULUS, DEFAULT_EXECUTOR, DEFAULT_WORKERS
from ieae.exceptions import InvalidArgument

logger = logging.getLogger(__name__)


@dc.dataclass(frozen=True)
class TrialResult:
    """Outcome of one trial.

    :param index: Trial number, 0-based.
    :param mu3: mu3 of the trial image.
    :param mu3_match: Whether it equals the reference's mu3.
    :param success: Whether the mask recovered the image exactly.
    """

    index: int
    mu3: int
    mu3_match: bool
    success: bool


@dc.dataclass
class Trial:
    """Encrypt one seeded random image and attack it with the reference mask.

    :param index: Trial number, 0-based.
    :param seed: Seed of the image generator.
    """

    index: int
    seed: np.random.SeedSequence

    def image(self, shape: t.Tuple[int, int]) -> GrayImage:
        rng = np.random.default_rng(self.seed)
        return GrayImage(rng.integers(0, 256, size=shape, dtype=np.uint8))

    def execute(self, experiment: 'Experiment') -> TrialResult:
        layout = experiment.context.layout
        image = self.image(experiment.reference.shape)
        cipher, tag = experiment.context.encrypt(image, experiment.params.R)
        recovered = decrypt_with_mask(cipher, experiment.mask)
        padded, _ = pad(image, layout.p1, layout.p2)
        return TrialResult(
            index=self.index,
            mu3=tag,
            mu3_match=tag == experiment.mask.mu3_tag,
            success=recovered == padded,
        )


@dc.dataclass
class ExperimentReport:
    """Aggregated trial outcomes.

    :param results: Per-trial outcomes, ordered by index.
    :param reference_mu3: mu3 of the reference image.
    :param key_fingerprint: Label of the key the experiment ran under.
    """

    results: t.List[TrialResult]
    reference_mu3: int
    key_fingerprint: str = ''

    @property
    def trials(self) -> int:
        return len(self.results)

    @property
    def successes(self) -> int:
        return sum(r.success for r in self.results)

    @property
    def matches(self) -> int:
        return sum(r.mu3_match for r in self.results)

    @property
    def expected(self) -> float:
        return self.trials / BYTE_MODULUS

    @property
    def sigma(self) -> float:
        p = 1 / BYTE_MODULUS
        return math.sqrt(self.trials * p * (1 - p))

    @property
    def within_3_sigma(self) -> bool:
        return abs(self.matches - self.expected) <= 3 * self.sigma

    @property
    def inconsistent(self) -> t.List[int]:
        """Trials where exact recovery and mu3 equality disagree."""
        return [r.index for r in self.results if r.success != r.mu3_match]

    @property
    def consistent(self) -> bool:
        return not self.inconsistent

    def show(self, console: Console | None = None):
        console = console or Console(stderr=True)
        tbl = Table(show_header=True, header_style='bold magenta')
        tbl.add_column('Quantity', style='cyan', no_wrap=True)
        tbl.add_column('Value', style='white')
        rows = [
            ('Key', self.key_fingerprint or '-'),
            ('Reference mu3', str(self.reference_mu3)),
            ('Trials', str(self.trials)),
            ('Exact recoveries', str(self.successes)),
            ('mu3 matches', str(self.matches)),
            ('Success rate', f'{self.successes / max(self.trials, 1):.5f} (1/256 = {1 / BYTE_MODULUS:.5f})'),
            ('Expected matches', f'{self.expected:.2f} +/- {self.sigma:.2f}'),
            ('Within 3 sigma', 'yes' if self.within_3_sigma else 'no'),
            ('Success <=> mu3 match', 'yes' if self.consistent else f'no: trials {self.inconsistent[:10]}'),
        ]
        for row in rows:
            tbl.add_row(*row)
        style = 'green' if self.consistent else 'red'
        console.print(Panel(tbl, title='Known-plaintext attack', border_style=style))


@dc.dataclass
class Experiment:
    """Encrypt a reference image, extract its mask and attack random images with it.

    :param key: Secret key shared by every encryption.
    :param params: Public parameters.
    :param lam: Lyapunov exponent.
    :param reference: Known plain image; trial images share its shape.
    :param trials: Number of random images.
    :param rng_seed: Root seed of the trial images.
    :param executor: Name of a module in `ieae.executors`.
    :param workers: Worker count for concurrent executors.
    """

    key: SecretKey
    params: PublicParams
    lam: float
    reference: GrayImage
    trials: int
    rng_seed: int = 0
    executor: str = DEFAULT_EXECUTOR
    workers: int = DEFAULT_WORKERS

    context: CipherContext = dc.field(init=False, repr=False)
    mask: MaskImage = dc.field(init=False, repr=False)

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidArgument(f'Need at least one trial, got {self.trials}')
        try:
            module = importlib.import_module(f'ieae.executors.{self.executor}')
        except ModuleNotFoundError as e:
            raise InvalidArgument(f'Unknown executor {self.executor!r}') from e
        self.executor_obj = getattr(module, 'Executor')(workers=self.workers)
        logger.debug('Using executor %s', self.executor)

        self.context = prepare(self.key, self.lam, self.reference.shape)
        cipher, _ = self.context.encrypt(self.reference, self.params.R)
        self.mask = extract_mask(self.reference, cipher, self.context.layout, self.params.R)

    @property
    def jobs(self) -> t.List[Trial]:
        seeds = np.random.SeedSequence(self.rng_seed).spawn(self.trials)
        return [Trial(index=i, seed=seed) for i, seed in enumerate(seeds)]

    def run(self) -> ExperimentReport:
        """Execute every trial and aggregate the outcomes."""
        results = self.executor_obj.execute(self.jobs, self)
        report = ExperimentReport(results=results, reference_mu3=self.mask.mu3_tag)
        if not report.consistent:
            logger.error('Recovery and mu3 equality disagree on %d trials', len(report.inconsistent))
        return report

    def show(self, console: Console | None = None):
        console = console or Console(stderr=True)
        layout = self.context.layout
        console.print(Panel(
            f'{self.trials} trials, R={self.params.R}, '
            f'blocks {layout.p1}x{layout.p2}, image {self.reference.rows}x{self.reference.cols}, '
            f'executor {self.executor}',
            title='Attack experiment',
            style='bold blue',
        ))
