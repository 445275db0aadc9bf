import logging
import typing as t
from concurrent.futures import ThreadPoolExecutor

from .base import Executor as BaseExecutor

from ieae.experiment import Experiment, Trial, TrialResult

logger = logging.getLogger(__name__)


class Executor(BaseExecutor):

    def execute(self, trials: t.Sequence[Trial], experiment: Experiment) -> t.List[TrialResult]:
        logger.debug('Running %d trials on %d threads', len(trials), self.workers)
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            results = list(pool.map(lambda trial: trial.execute(experiment), trials))
        return self._ordered(results)
