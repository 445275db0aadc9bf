import typing as t

from .base import Executor as BaseExecutor

from ieae.experiment import Experiment, Trial, TrialResult


class Executor(BaseExecutor):

    def execute(self, trials: t.Sequence[Trial], experiment: Experiment) -> t.List[TrialResult]:
        return self._ordered(trial.execute(experiment) for trial in trials)
