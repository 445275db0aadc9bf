import numpy as np
import pytest

from ieae.exceptions import (
    DegenerateDistanceError,
    InsufficientDataError,
    InvalidArgument,
    ReplacementFailure,
)
from ieae.keystream import logistic_iterate
from ieae.lyapunov import EmbeddingConfig, embed, nearest_neighbor, wolf_lle


def test_embed():
    points = embed(np.arange(7.0), 2)
    assert points.tolist() == [[0, 1], [2, 3], [4, 5]]
    with pytest.raises(InsufficientDataError):
        embed([1.0], 2)
    with pytest.raises(InvalidArgument):
        embed([1.0, np.nan], 1)


def test_config_validation():
    with pytest.raises(InvalidArgument):
        EmbeddingConfig(m=0, epsilon=1.0)
    with pytest.raises(InvalidArgument):
        EmbeddingConfig(m=2, epsilon=0.0)
    cfg = EmbeddingConfig.for_series([0.0, 4.0, 2.0], m=1, fraction=0.25)
    assert cfg.epsilon == 1.0


def test_nearest_neighbor():
    points = np.array([[0.0], [1.0], [3.0], [10.0]])
    assert nearest_neighbor(points, 1) == 0
    assert nearest_neighbor(points, 3) == 2
    # ties go to the smallest index
    assert nearest_neighbor(np.array([0.0, 1.0, 2.0]), 1) == 0


def test_nearest_neighbor_skips_coincident_points():
    assert nearest_neighbor(np.array([[0.0], [0.0], [5.0]]), 0) == 2
    with pytest.raises(DegenerateDistanceError):
        nearest_neighbor(np.array([[1.0], [1.0], [1.0]]), 0)


def test_nearest_neighbor_angle_bound():
    points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    assert nearest_neighbor(points, 0) == 1
    assert nearest_neighbor(points, 0, prev_dir=np.array([0.0, 1.0])) == 2
    with pytest.raises(ReplacementFailure):
        nearest_neighbor(points, 0, prev_dir=np.array([-1.0, -1.0]))
    with pytest.raises(ReplacementFailure):
        nearest_neighbor(points, 0, prev_dir=np.array([0.0, 0.0]))


def test_constant_series_is_degenerate():
    with pytest.raises(DegenerateDistanceError):
        EmbeddingConfig.for_series(np.full(100, 3.0))
    with pytest.raises(DegenerateDistanceError):
        wolf_lle(np.full(100, 3.0), EmbeddingConfig(m=2, epsilon=0.1))


def test_too_short():
    with pytest.raises(InsufficientDataError):
        wolf_lle([0.1, 0.2, 0.3], EmbeddingConfig(m=2, epsilon=0.1))


def test_logistic_orbit_is_chaotic():
    series = logistic_iterate(0.1234, 4.0, 3000)
    lam, log = wolf_lle(series, EmbeddingConfig.for_series(series))
    assert lam > 0
    assert log.q >= 1
    assert log.t_final == len(series) // 2
    assert len(log.replacements) == log.q


@pytest.mark.parametrize('seed', range(10))
def test_scale_equivariance(seed):
    series = np.random.default_rng(seed).normal(size=400)
    cfg = EmbeddingConfig.for_series(series, m=2, fraction=0.2)
    lam, log = wolf_lle(series, cfg)
    # powers of two scale binary64 samples exactly
    for c in (4.0, 0.125):
        scaled_lam, scaled_log = wolf_lle(c * series, EmbeddingConfig(m=2, epsilon=c * cfg.epsilon))
        assert scaled_lam == lam
        assert scaled_log.replacements == log.replacements
        assert scaled_log.t_final == log.t_final


@pytest.mark.parametrize('seed', range(10))
def test_scale_equivariance_up_to_rounding(seed):
    # scaling by a non-power of two rounds every sample, so lambda may move in the last ulp
    series = np.random.default_rng(seed).normal(size=400)
    cfg = EmbeddingConfig.for_series(series, m=2, fraction=0.2)
    lam, log = wolf_lle(series, cfg)
    for c in (3.0, 1.1):
        scaled_lam, scaled_log = wolf_lle(c * series, EmbeddingConfig(m=2, epsilon=c * cfg.epsilon))
        assert scaled_lam == pytest.approx(lam, rel=1e-12)
        assert scaled_log.replacements == log.replacements
