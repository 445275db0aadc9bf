from fractions import Fraction

import numpy as np
import pytest

from ieae.analysis import (
    CensusEntry,
    FixedPointSpec,
    FunctionalGraph,
    MiniFloatSpec,
    arnold_mod_map,
    compare_census,
    component_census,
    export_dot,
    in_degrees,
    is_permutation,
    logistic_fixed_map,
    logistic_minifloat_map,
    pow10_stats,
    round_minifloat,
)
from ieae.constants import PUBLISHED_ARNOLD_CENSUS
from ieae.exceptions import InvalidArgument


def test_fixed_point_by_hand():
    # mu = 4, e = 2: node i maps to i * (4 - i)
    g = logistic_fixed_map(4, 0, FixedPointSpec(e=2))
    assert g.succ.tolist() == [0, 3, 4, 3, 0]

    census = component_census(g)
    assert census.entries == (
        CensusEntry(cycle_length=1, component_size=3, count=1),
        CensusEntry(cycle_length=1, component_size=2, count=1),
    )
    assert census.to_text() == '1 3 1\n1 2 1\n'


def test_fixed_point_quantizers_differ():
    graphs = {q: logistic_fixed_map(61, 4, FixedPointSpec(e=6, quantizer=q)) for q in ('floor', 'round', 'ceil')}
    for g in graphs.values():
        assert g.n == 65
        assert len(g.succ) == 65
        assert 0 <= g.succ.min() and g.succ.max() <= 64
        assert component_census(g).node_count == 65
    assert not np.array_equal(graphs['floor'].succ, graphs['round'].succ)
    assert not np.array_equal(graphs['floor'].succ, graphs['ceil'].succ)
    assert not np.array_equal(graphs['round'].succ, graphs['ceil'].succ)


def test_fixed_point_validation():
    with pytest.raises(InvalidArgument):
        FixedPointSpec(e=0)
    with pytest.raises(InvalidArgument):
        FixedPointSpec(e=4, quantizer='trunc')


def test_census_of_cycle_with_tails():
    # 0 -> 1 -> 2 -> 0, 3 -> 0, 4 -> 3, 5 -> 5
    census = component_census(FunctionalGraph(succ=np.array([1, 2, 0, 0, 3, 5])))
    assert census.entries == (
        CensusEntry(cycle_length=3, component_size=5, count=1),
        CensusEntry(cycle_length=1, component_size=1, count=1),
    )
    assert census.by_period() == {3: 1, 1: 1}
    assert census.component_count == 2


def test_functional_graph_validation():
    with pytest.raises(InvalidArgument):
        FunctionalGraph(succ=np.array([1, 2]))
    with pytest.raises(InvalidArgument):
        FunctionalGraph(succ=np.array([], dtype=np.int64))
    with pytest.raises(InvalidArgument):
        FunctionalGraph(succ=np.array([0, 1]), labels=['a'])


def test_arnold_map():
    g = arnold_mod_map(7, 8, 4)
    assert g.n == 256
    # (x, y) = (1, 0) -> (1, 8)
    assert g.succ[1] == 1 + 8 * 16
    assert is_permutation(g)
    assert in_degrees(g).tolist() == [1] * 256


def test_arnold_census_against_published_counts():
    census = component_census(arnold_mod_map(7, 8, 4))
    assert census.node_count == 256
    assert all(e.cycle_length == e.component_size for e in census.entries)

    comparison = compare_census(census, PUBLISHED_ARNOLD_CENSUS)
    assert comparison.published_nodes == 254
    assert comparison.computed_nodes == 256
    assert comparison.node_discrepancy == 2
    assert not comparison.matches


def test_arnold_other_parameters_are_permutations():
    for a, b in [(12, 14), (1, 1), (3, 5)]:
        g = arnold_mod_map(a, b, 4)
        assert is_permutation(g)
        assert component_census(g).node_count == 256


def test_non_permutation_in_degrees():
    g = logistic_fixed_map(4, 0, FixedPointSpec(e=2))
    assert in_degrees(g).tolist() == [2, 0, 0, 2, 1]
    assert not is_permutation(g)


def test_minifloat_values():
    spec = MiniFloatSpec()
    values = spec.values()
    assert len(values) == 256
    assert values[0] == 0
    assert values[1] == Fraction(1, 1024)
    assert values[-1] == spec.max_value == 496
    assert len([v for v in values if v <= 1]) == 113
    assert spec.label_scale == 1024


def test_round_minifloat():
    spec = MiniFloatSpec()
    assert round_minifloat(Fraction(1, 3), spec) == Fraction(21, 64)
    assert round_minifloat(Fraction(1000), spec) == 496
    # ties go to even, including in the subnormal range
    assert round_minifloat(Fraction(1, 2048), spec) == 0
    assert round_minifloat(Fraction(3, 2048), spec) == Fraction(1, 512)
    assert round_minifloat(Fraction(33, 64), spec) == Fraction(1, 2)
    assert round_minifloat(Fraction(17, 32), spec) == Fraction(17, 32)
    assert round_minifloat(Fraction(0), spec) == 0
    with pytest.raises(InvalidArgument):
        round_minifloat(Fraction(-1), spec)


def test_minifloat_logistic():
    spec = MiniFloatSpec()
    g = logistic_minifloat_map(Fraction(123, 32), spec)
    assert g.n == 113
    assert component_census(g).node_count == 113
    assert all(Fraction(label).denominator == 1 for label in g.labels)

    g4 = logistic_minifloat_map('4', spec)
    half = g4.labels.index('512')
    assert g4.labels[g4.succ[half]] == '1024'


def test_export_dot():
    g = FunctionalGraph(succ=np.array([1, 0, 2]), labels=['a', 'b', 'c'])
    dot = export_dot(g)
    lines = dot.splitlines()
    assert lines[0] == 'digraph G {'
    assert lines[-1] == '}'
    assert '  0 [label="a"];' in lines
    assert '  2 -> 2;' in lines
    assert len([line for line in lines if '->' in line]) == 3
    assert 'label="x"' in export_dot(g, labels=['x', 'y', 'z'], name='H')


def test_pow10_stats():
    assert pow10_stats(1) == (4, 2)
    assert pow10_stats(14) == (47, 17)
    lengths = [pow10_stats(m)[0] for m in range(1, 51)]
    assert lengths == sorted(set(lengths))
    for m in (0, 51):
        with pytest.raises(InvalidArgument):
            pow10_stats(m)


def test_minifloat_spec_validation():
    with pytest.raises(InvalidArgument):
        MiniFloatSpec(exp_bits=10, mant_bits=10)
    with pytest.raises(InvalidArgument):
        MiniFloatSpec(exp_bits=0)
    with pytest.raises(InvalidArgument):
        MiniFloatSpec(bias=16)
    with pytest.raises(InvalidArgument):
        MiniFloatSpec(bias=0)
    assert MiniFloatSpec(bias=15).max_value > 0
