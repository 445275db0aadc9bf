import typing as t
from abc import ABC, abstractmethod

from ieae.constants import DEFAULT_WORKERS

if t.TYPE_CHECKING:
    from ieae.experiment import Experiment, Trial, TrialResult


class Executor(ABC):
    """Runs the trials of an attack experiment.

    :param workers: Upper bound on concurrently running trials.
    """

    def __init__(self, workers: int = DEFAULT_WORKERS):
        self.workers = max(1, int(workers))

    @abstractmethod
    def execute(self, trials: t.Sequence['Trial'], experiment: 'Experiment') -> t.List['TrialResult']:
        pass

    @staticmethod
    def _ordered(results: t.Iterable['TrialResult']) -> t.List['TrialResult']:
        return sorted(results, key=lambda r: r.index)
