"""Largest Lyapunov exponent of a scalar series by evolution and neighbour replacement.

Point indices in the Python API are 0-based; the `ReplacementLog` reports
1-based trajectory indices so its ``t_final`` plugs straight into the
``1 / (t_final - 1)`` normalisation.
"""
import dataclasses as dc
import logging
import math
import typing as t

import numpy as np

from ieae.constants import (
    ARNOLD_SEED_EXPONENT,
    DEFAULT_EMBED_M,
    DEFAULT_EPSILON_FRACTION,
    LOGISTIC_SEED_EXPONENT,
    THETA_MAX,
)
from ieae.exceptions import (
    DegenerateDistanceError,
    InsufficientDataError,
    InvalidArgument,
    ReplacementFailure,
)
from ieae.keystream import ChaoticSeed, rem_scaled

logger = logging.getLogger(__name__)

TimeSeries = t.Union[t.Sequence[float], np.ndarray]


@dc.dataclass(frozen=True)
class EmbeddingConfig:
    """Phase-space reconstruction and evolution settings.

    :param m: Embedding dimension (window length).
    :param epsilon: Separation above which an evolution segment ends, in signal units.
    :param theta_max: Angle bound in degrees for replacement neighbours.
    """

    m: int
    epsilon: float
    theta_max: float = THETA_MAX

    def __post_init__(self):
        if self.m < 1:
            raise InvalidArgument(f'Embedding dimension must be >= 1, got {self.m}')
        if not self.epsilon > 0 or not math.isfinite(self.epsilon):
            raise InvalidArgument(f'epsilon must be a positive finite number, got {self.epsilon!r}')

    @classmethod
    def for_series(
        cls,
        series: TimeSeries,
        m: int = DEFAULT_EMBED_M,
        fraction: float = DEFAULT_EPSILON_FRACTION,
    ) -> 'EmbeddingConfig':
        """Build a config whose epsilon is a fraction of the data range.

        :param series: The samples.
        :param m: Embedding dimension.
        :param fraction: Fraction of ``max - min`` used as epsilon.
        """
        z = as_series(series)
        spread = float(z.max() - z.min())
        if spread == 0:
            raise DegenerateDistanceError('Series is constant; no separation can be measured')
        return cls(m=m, epsilon=fraction * spread)


@dc.dataclass
class ReplacementLog:
    """Book-keeping of one estimator run.

    :param separations: ``(L_k, L'_k)`` per completed evolution segment.
    :param replacements: ``(t_k, t'_k)`` at the start of each segment, 1-based.
    :param t_final: Fiducial trajectory index at termination, 1-based.
    :param fallbacks: Replacements made without the angle constraint.
    """

    separations: t.List[t.Tuple[float, float]] = dc.field(default_factory=list)
    replacements: t.List[t.Tuple[int, int]] = dc.field(default_factory=list)
    t_final: int = 1
    fallbacks: int = 0

    @property
    def q(self) -> int:
        """Number of replacement steps."""
        return len(self.separations)


def as_series(series: TimeSeries) -> np.ndarray:
    z = np.asarray(series, dtype=np.float64).reshape(-1)
    if not np.isfinite(z).all():
        raise InvalidArgument('Series contains non-finite samples')
    return z


def embed(series: TimeSeries, m: int) -> np.ndarray:
    """Cut the series into consecutive, non-overlapping windows of length m.

    :param series: Samples z_1..z_L.
    :param m: Window length.
    """
    z = as_series(series)
    count = len(z) // m
    if m < 1 or count < 1:
        raise InsufficientDataError(f'Need at least m={m} samples, got {len(z)}')
    return z[:count * m].reshape(count, m)


def nearest_neighbor(
    points: np.ndarray,
    t: int,
    prev_dir: np.ndarray | None = None,
    theta_max: float = THETA_MAX,
) -> int:
    """Index of the nearest point to ``points[t]``, optionally inside an angle cone.

    Points at zero distance are never chosen. Ties go to the smallest index.

    :param points: Phase points, one per row.
    :param t: Index of the reference point.
    :param prev_dir: Direction the new neighbour must stay within ``theta_max`` of.
    :param theta_max: Cone half-angle in degrees.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if len(points) < 2:
        raise InsufficientDataError('Need at least two phase points')

    offsets = points - points[t]
    distances = np.linalg.norm(offsets, axis=1)
    valid = distances > 0
    valid[t] = False
    if not valid.any():
        raise DegenerateDistanceError(f'Every phase point coincides with point {t}')

    if prev_dir is not None:
        prev_dir = np.asarray(prev_dir, dtype=np.float64)
        norm = np.linalg.norm(prev_dir)
        if norm == 0:
            raise ReplacementFailure('Previous direction has zero length')
        with np.errstate(invalid='ignore', divide='ignore'):
            cosines = offsets @ prev_dir / (distances * norm)
        angles = np.degrees(np.arccos(np.clip(cosines, -1.0, 1.0)))
        valid &= angles < theta_max
        if not valid.any():
            raise ReplacementFailure(f'No neighbour of point {t} within {theta_max} degrees')

    return int(np.argmin(np.where(valid, distances, np.inf)))


def wolf_lle(series: TimeSeries, cfg: EmbeddingConfig) -> t.Tuple[float, ReplacementLog]:
    """Estimate the largest Lyapunov exponent (bits per embedded step).

    :param series: Samples z_1..z_L.
    :param cfg: Embedding and evolution settings.
    """
    points = embed(series, cfg.m)
    n = len(points)
    if n < 2:
        raise InsufficientDataError(f'Need at least two phase points, got {n}')

    # neighbours must be able to evolve at least one step
    movable = points[:-1]
    log = ReplacementLog()
    t_, prev_dir = 0, None

    while t_ < n - 1:
        try:
            t_prime = nearest_neighbor(movable, t_, prev_dir, cfg.theta_max)
        except ReplacementFailure as e:
            logger.debug('Falling back to the unconstrained neighbour at t=%d: %s', t_ + 1, e)
            log.fallbacks += 1
            t_prime = nearest_neighbor(movable, t_, None, cfg.theta_max)

        initial = float(np.linalg.norm(points[t_] - points[t_prime]))
        log.replacements.append((t_ + 1, t_prime + 1))

        separation = initial
        while t_ + 1 < n and t_prime + 1 < n:
            t_ += 1
            t_prime += 1
            separation = float(np.linalg.norm(points[t_] - points[t_prime]))
            if separation > cfg.epsilon:
                break

        if separation > 0:
            log.separations.append((initial, separation))
        else:
            log.replacements.pop()
            logger.debug('Trajectories merged at t=%d; segment dropped', t_ + 1)
        prev_dir = points[t_prime] - points[t_]

    log.t_final = t_ + 1
    if log.q < 1:
        raise InsufficientDataError('No evolution segment completed')
    if log.fallbacks:
        logger.info('%d of %d replacements ignored the angle bound', log.fallbacks, log.q)

    ratios = np.array([after / before for before, after in log.separations])
    lam = float(np.sum(np.log2(ratios)) / (log.t_final - 1))
    return lam, log


def seed_from_lambda(lam: float) -> ChaoticSeed:
    """Derive the Logistic and Arnold initial conditions from an exponent.

    :param lam: Largest Lyapunov exponent.
    """
    if not math.isfinite(lam):
        raise InvalidArgument(f'lambda must be finite, got {lam!r}')
    magnitude = abs(float(lam))
    return ChaoticSeed(
        lam=float(lam),
        x0_logistic=rem_scaled(magnitude, LOGISTIC_SEED_EXPONENT),
        xy0_arnold=(magnitude, rem_scaled(magnitude, ARNOLD_SEED_EXPONENT)),
    )
