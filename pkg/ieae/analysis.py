"""Functional graphs of digitised chaotic maps and the cost of decimal scaling.

All map evaluations are exact: fixed-point Logistic values are dyadic
rationals, minifloat arithmetic is emulated with `fractions.Fraction`, and
the Arnold map is integer arithmetic modulo ``2**e``.
"""
import collections
import dataclasses as dc
import functools
import logging
import math
import typing as t
from fractions import Fraction

import numpy as np

from ieae.exceptions import InternalError, InvalidArgument
from ieae.misc import QUANTIZERS, Quantizer, quantize

logger = logging.getLogger(__name__)

WHITE, GRAY, BLACK = 0, 1, 2


@dc.dataclass(frozen=True)
class FixedPointSpec:
    """An e-bit fixed-point domain ``{0, 1, ..., 2**e}``.

    :param e: Precision bits.
    :param quantizer: Rounding used to map results back to the grid.
    """

    e: int
    quantizer: Quantizer = 'floor'

    def __post_init__(self):
        if self.e < 1:
            raise InvalidArgument(f'Precision must be >= 1 bit, got {self.e}')
        if self.quantizer not in QUANTIZERS:
            raise InvalidArgument(f'Unknown quantizer {self.quantizer!r}')


@dc.dataclass(frozen=True)
class MiniFloatSpec:
    """A small binary floating-point format with subnormals and no infinities.

    The largest exponent field encodes ordinary finite values; results beyond
    the largest finite value saturate.

    :param sign_bits: 0 or 1; only non-negative values are ever used.
    :param exp_bits: Exponent field width.
    :param mant_bits: Stored significand width (hidden bit excluded).
    :param bias: Exponent bias.
    """

    sign_bits: int = 1
    exp_bits: int = 4
    mant_bits: int = 4
    bias: int = 7

    def __post_init__(self):
        if self.sign_bits not in (0, 1):
            raise InvalidArgument(f'sign_bits must be 0 or 1, got {self.sign_bits}')
        if self.exp_bits < 1 or self.mant_bits < 0:
            raise InvalidArgument('Need at least one exponent bit and a non-negative significand width')
        if self.sign_bits + self.exp_bits + self.mant_bits > 16:
            raise InvalidArgument('Minifloat formats are limited to 16 bits')
        if not 1 <= self.bias < 2 ** self.exp_bits:
            raise InvalidArgument(f'Bias must lie in [1, {2 ** self.exp_bits - 1}], got {self.bias}')

    @property
    def min_exponent(self) -> int:
        return 1 - self.bias

    @property
    def max_value(self) -> Fraction:
        top = 2 ** self.exp_bits - 1 - self.bias
        return (2 - Fraction(1, 2 ** self.mant_bits)) * Fraction(2) ** top

    @property
    def label_scale(self) -> int:
        """Inverse of the smallest subnormal; turns every value into an integer label."""
        return 2 ** (self.bias - 1 + self.mant_bits)

    def values(self) -> t.List[Fraction]:
        """All non-negative representable values, ascending."""
        out = set()
        step = Fraction(1, 2 ** self.mant_bits)
        for field in range(2 ** self.exp_bits):
            for mantissa in range(2 ** self.mant_bits):
                if field == 0:
                    out.add(mantissa * step * Fraction(2) ** self.min_exponent)
                else:
                    out.add((1 + mantissa * step) * Fraction(2) ** (field - self.bias))
        return sorted(out)


@dc.dataclass(frozen=True, eq=False)
class FunctionalGraph:
    """A finite map given by one successor per node.

    :param succ: Successor index of every node.
    :param labels: Display value of every node.
    """

    succ: np.ndarray
    labels: t.List[str] | None = None

    def __post_init__(self):
        succ = np.asarray(self.succ, dtype=np.int64)
        if succ.ndim != 1 or len(succ) == 0:
            raise InvalidArgument('A functional graph needs a non-empty successor vector')
        if succ.min() < 0 or succ.max() >= len(succ):
            raise InvalidArgument('Successor outside the node range')
        if self.labels is not None and len(self.labels) != len(succ):
            raise InvalidArgument('One label per node is required')
        object.__setattr__(self, 'succ', succ)

    @property
    def n(self) -> int:
        return len(self.succ)

    def label(self, node: int) -> str:
        return self.labels[node] if self.labels is not None else str(node)


@dc.dataclass(frozen=True)
class CensusEntry:
    cycle_length: int
    component_size: int
    count: int


@dc.dataclass(frozen=True)
class ComponentCensus:
    """Connected components aggregated by (cycle length, component size).

    :param entries: Ordered by cycle length, then size, both descending.
    """

    entries: t.Tuple[CensusEntry, ...]

    @property
    def node_count(self) -> int:
        return sum(e.component_size * e.count for e in self.entries)

    @property
    def component_count(self) -> int:
        return sum(e.count for e in self.entries)

    def by_period(self) -> t.Dict[int, int]:
        """Number of components per cycle length."""
        out: t.Dict[int, int] = collections.defaultdict(int)
        for e in self.entries:
            out[e.cycle_length] += e.count
        return dict(out)

    def to_text(self) -> str:
        """One ``cycle_length component_size count`` line per entry."""
        return ''.join(f'{e.cycle_length} {e.component_size} {e.count}\n' for e in self.entries)


@dc.dataclass(frozen=True)
class CensusComparison:
    """Computed component counts next to published ones.

    :param rows: ``(period, computed, published)`` for every period seen in either.
    :param computed_nodes: Nodes covered by the computed census.
    :param published_nodes: Nodes the published counts account for (period x count).
    """

    rows: t.Tuple[t.Tuple[int, int, int], ...]
    computed_nodes: int
    published_nodes: int

    @property
    def matches(self) -> bool:
        return all(computed == published for _, computed, published in self.rows)

    @property
    def node_discrepancy(self) -> int:
        return self.computed_nodes - self.published_nodes


def round_minifloat(value: Fraction, spec: MiniFloatSpec) -> Fraction:
    """Round a non-negative rational into the format, ties to even.

    :param value: Exact value.
    :param spec: Target format.
    """
    value = Fraction(value)
    if value < 0:
        raise InvalidArgument(f'Only non-negative values are emulated, got {value}')
    if value == 0:
        return Fraction(0)
    exponent = value.numerator.bit_length() - value.denominator.bit_length()
    if Fraction(2) ** exponent > value:
        exponent -= 1
    exponent = max(exponent, spec.min_exponent)
    quantum = Fraction(2) ** (exponent - spec.mant_bits)
    scaled = value / quantum
    return min(quantize(scaled.numerator, scaled.denominator, 'round') * quantum, spec.max_value)


def logistic_fixed_map(mu_num: int, mu_den_pow2: int, spec: FixedPointSpec) -> FunctionalGraph:
    """Logistic map with ``mu = mu_num / 2**mu_den_pow2`` on ``{0, ..., 2**e}``.

    Node i stands for ``i / 2**e``; its successor is
    ``quantizer(2**e * mu * x * (1 - x))`` clamped to the domain.

    :param mu_num: Numerator of mu.
    :param mu_den_pow2: Base-2 exponent of mu's denominator.
    :param spec: Precision and quantizer.
    """
    if mu_den_pow2 < 0:
        raise InvalidArgument(f'Denominator exponent must be >= 0, got {mu_den_pow2}')
    size = 2 ** spec.e
    denominator = 2 ** (mu_den_pow2 + spec.e)
    succ = [
        min(max(quantize(mu_num * i * (size - i), denominator, spec.quantizer), 0), size)
        for i in range(size + 1)
    ]
    return FunctionalGraph(succ=np.array(succ), labels=[str(i) for i in range(size + 1)])


def logistic_minifloat_map(mu: Fraction | float | str, spec: MiniFloatSpec) -> FunctionalGraph:
    """Logistic map over every representable value in [0, 1].

    ``mu * x`` and ``1 - x`` are each rounded into the format, then their
    product is rounded; mu itself is used exactly. Nodes are labelled by
    ``value * spec.label_scale``.

    :param mu: Control parameter, e.g. ``Fraction(123, 32)`` or ``'123/32'``.
    :param spec: Minifloat format.
    """
    mu = Fraction(mu)
    nodes = [v for v in spec.values() if v <= 1]
    index = {v: i for i, v in enumerate(nodes)}
    rnd = functools.partial(round_minifloat, spec=spec)
    succ = []
    for x in nodes:
        y = min(rnd(rnd(mu * x) * rnd(1 - x)), Fraction(1))
        succ.append(index[y])
    labels = [str(v * spec.label_scale) for v in nodes]
    return FunctionalGraph(succ=np.array(succ), labels=labels)


def arnold_mod_map(a_prime: int, b_prime: int, e: int) -> FunctionalGraph:
    """Generalised Arnold map on ``Z_(2**e) x Z_(2**e)``; node ``z = x + y * 2**e``.

    :param a_prime: Control reduced mod ``2**e``.
    :param b_prime: Control reduced mod ``2**e``.
    :param e: Precision bits.
    """
    if e < 1:
        raise InvalidArgument(f'Precision must be >= 1 bit, got {e}')
    size = 2 ** e
    a, b = a_prime % size, b_prime % size
    z = np.arange(size * size, dtype=np.int64)
    x, y = z % size, z // size
    nx = (x + a * y) % size
    ny = (b * x + (1 + a * b) * y) % size
    return FunctionalGraph(succ=nx + ny * size, labels=[str(i) for i in range(size * size)])


def in_degrees(graph: FunctionalGraph) -> np.ndarray:
    return np.bincount(graph.succ, minlength=graph.n)


def is_permutation(graph: FunctionalGraph) -> bool:
    return bool((in_degrees(graph) == 1).all())


def component_census(graph: FunctionalGraph) -> ComponentCensus:
    """Decompose the graph into weakly connected components.

    Walks successors from every unvisited node, marking nodes gray while on
    the current path and black once assigned; linear time, no recursion.

    :param graph: Functional graph.
    """
    succ = graph.succ.tolist()
    color = [WHITE] * graph.n
    component = [-1] * graph.n
    cycle_lengths: t.List[int] = []
    sizes: t.List[int] = []

    for start in range(graph.n):
        if color[start] != WHITE:
            continue
        path = []
        node = start
        while color[node] == WHITE:
            color[node] = GRAY
            path.append(node)
            node = succ[node]
        if color[node] == GRAY:
            cid = len(cycle_lengths)
            cycle_lengths.append(len(path) - path.index(node))
            sizes.append(0)
        else:
            cid = component[node]
        for p in path:
            color[p] = BLACK
            component[p] = cid
        sizes[cid] += len(path)

    counts = collections.Counter(zip(cycle_lengths, sizes))
    entries = tuple(
        CensusEntry(cycle_length=c, component_size=s, count=n)
        for (c, s), n in sorted(counts.items(), key=lambda item: (-item[0][0], -item[0][1]))
    )
    census = ComponentCensus(entries=entries)
    if census.node_count != graph.n:
        raise InternalError(f'Census covers {census.node_count} of {graph.n} nodes')
    return census


def compare_census(census: ComponentCensus, published: t.Dict[int, int]) -> CensusComparison:
    """Line up computed component counts per period against published ones.

    The published node total assumes tail-free components (size = period).

    :param census: Computed census.
    :param published: Period -> component count.
    """
    computed = census.by_period()
    periods = sorted(set(computed) | set(published), reverse=True)
    comparison = CensusComparison(
        rows=tuple((p, computed.get(p, 0), published.get(p, 0)) for p in periods),
        computed_nodes=census.node_count,
        published_nodes=sum(p * c for p, c in published.items()),
    )
    if comparison.node_discrepancy:
        logger.warning(
            'Published counts cover %d nodes, the graph has %d',
            comparison.published_nodes, comparison.computed_nodes,
        )
    return comparison


def export_dot(graph: FunctionalGraph, labels: t.Sequence[str] | None = None, name: str = 'G') -> str:
    """Render the graph as a DOT digraph, one edge per node.

    :param graph: Functional graph.
    :param labels: Node labels; defaults to the graph's own.
    :param name: Graph identifier.
    """
    if labels is None:
        labels = [graph.label(i) for i in range(graph.n)]
    lines = [f'digraph {name} {{']
    lines += [f'  {i} [label="{labels[i]}"];' for i in range(graph.n)]
    lines += [f'  {i} -> {j};' for i, j in enumerate(graph.succ.tolist())]
    lines.append('}')
    return '\n'.join(lines) + '\n'


def pow10_stats(m: int) -> t.Tuple[int, int]:
    """Bit length and number of set bits of ``10**m``.

    :param m: Exponent in [1, 50].
    """
    if not 1 <= m <= 50:
        raise InvalidArgument(f'm must lie in [1, 50], got {m}')
    value = 10 ** m
    bit_length = value.bit_length()
    if bit_length != math.ceil(m * math.log2(10)):
        raise InternalError(f'Bit length of 10**{m} disagrees with ceil(m * log2(10))')
    return bit_length, value.bit_count()
