"""Ordered graphs, tree enumeration, covering walk counts, φ weights and symbolic integrals."""

import math
from collections import Counter

import pytest
import sympy as sp

from paspectra.core.symbolic import Y, SymbolicFn, basis, basis_antiderivative
from paspectra.core.trees import (
    DOUBLE_EDGE,
    DOUBLE_LOOP,
    PATH_CENTER_FIRST,
    PATH_CENTER_LAST,
    PATH_CENTER_MIDDLE,
    SINGLE_EDGE,
    SINGLE_LOOP,
    OrderedGraph,
    closed_form_walk_count,
    degree_sequences,
    enumerate_labeled_trees,
    falling,
    iter_labeled_trees,
    magnitude_exponents,
    moon_count,
    phi,
    rising,
    tree_shape,
    walk_count_M,
)


# --- symbolic -----------------------------------------------------------------------


def test_power_antiderivatives():
    assert SymbolicFn.monomial(2).definite(1.0, 2.0) == pytest.approx(1.5)
    assert SymbolicFn.monomial(-1).definite(1.0, 4.0) == pytest.approx(2.0)
    assert SymbolicFn.monomial(-2).definite(1.0, math.e) == pytest.approx(1.0)


def test_log_antiderivatives():
    assert SymbolicFn.monomial(0, 1).definite(1.0, math.e) == pytest.approx(1.0)
    assert SymbolicFn.monomial(-2, 1).definite(1.0, math.e) == pytest.approx(0.5)
    # y^{1/2} ln^2 y against a midpoint sum
    f = SymbolicFn.monomial(1, 2, 3.0)
    steps = 20000
    h = 4.0 / steps
    riemann = sum(f.evaluate(1.0 + (i + 0.5) * h) for i in range(steps)) * h
    assert f.definite(1.0, 5.0) == pytest.approx(riemann, rel=1e-6)


def test_integrate_from_vanishes_at_the_lower_limit():
    f = SymbolicFn.monomial(-3) + SymbolicFn.monomial(1, 1)
    g = f.integrate_from(0.2)
    assert g.evaluate(0.2) == pytest.approx(0.0, abs=1e-12)
    assert g.evaluate(0.9) == pytest.approx(f.definite(0.2, 0.9))


@pytest.mark.parametrize("a", range(-7, 5))
@pytest.mark.parametrize("b", range(4))
def test_antiderivative_differentiates_back(a, b):
    anti = SymbolicFn.monomial(a, b).antiderivative().to_sympy()
    derivative = sp.diff(anti, Y)
    for y in (0.3, 1.7, 4.0):
        assert float(derivative.subs(Y, y)) == pytest.approx(float(basis(a, b).subs(Y, y)), rel=1e-10, abs=1e-12)


def test_antiderivative_terms_are_cached():
    basis_antiderivative.cache_clear()
    SymbolicFn.monomial(-3, 2).antiderivative()
    SymbolicFn.monomial(-3, 2, 5.0).antiderivative()
    assert basis_antiderivative.cache_info().hits >= 1
    assert basis_antiderivative(-2, 1) == (((0, 2), 0.5),)


def test_cancelling_terms_disappear():
    f = SymbolicFn.monomial(3, 1) - SymbolicFn.monomial(3, 1)
    assert len(f) == 0
    with pytest.raises(ValueError):
        SymbolicFn.constant(1.0).evaluate(0.0)


# --- ordered graphs ------------------------------------------------------------------


def test_edges_are_normalized():
    h = OrderedGraph.from_edges(3, [(3, 1), (2, 1)])
    assert h == PATH_CENTER_FIRST
    with pytest.raises(ValueError):
        OrderedGraph.from_edges(2, [(1, 3)])


def test_in_and_out_degrees():
    assert PATH_CENTER_FIRST.in_out_degrees() == ((2, 0), (0, 1), (0, 1))
    assert SINGLE_LOOP.in_out_degrees() == ((1, 1),)
    assert DOUBLE_LOOP.degrees() == (4,)


def test_shape_predicates():
    assert PATH_CENTER_MIDDLE.is_tree()
    assert not DOUBLE_EDGE.is_simple()
    assert not OrderedGraph(3, ((1, 2),)).is_connected()


# --- enumeration ---------------------------------------------------------------------


@pytest.mark.parametrize("t", range(1, 8))
def test_prufer_enumeration_count(t):
    trees = enumerate_labeled_trees(t)
    assert len(trees) == (1 if t == 1 else t ** (t - 2))
    assert len(set(trees)) == len(trees)
    assert all(tree.is_tree() or t == 1 for tree in trees)


def test_enumeration_is_capped():
    with pytest.raises(ValueError, match="cap"):
        next(iter_labeled_trees(11))


@pytest.mark.parametrize("t", range(2, 8))
def test_moon_counts_match_enumeration(t):
    seen = Counter(tree.degrees() for tree in iter_labeled_trees(t))
    for seq in degree_sequences(t):
        assert moon_count(seq) == seen.get(seq, 0)
    assert sum(moon_count(seq) for seq in degree_sequences(t)) == t ** (t - 2)


def test_moon_count_examples():
    assert moon_count((1, 1)) == 1
    assert moon_count((1, 1, 1, 3)) == 1
    assert moon_count((1, 1, 2, 2)) == 2
    assert sum(moon_count(seq) for seq in degree_sequences(4)) == 16


def test_moon_count_rejects_non_tree_sequences(caplog):
    assert moon_count((2, 2, 2)) == 0
    assert "not a tree sequence" in caplog.text


def test_tree_shape_ignores_labels():
    assert tree_shape(PATH_CENTER_FIRST) == tree_shape(PATH_CENTER_MIDDLE) == tree_shape(PATH_CENTER_LAST)
    star = OrderedGraph.from_edges(4, [(1, 2), (1, 3), (1, 4)])
    path = OrderedGraph.from_edges(4, [(1, 2), (2, 3), (3, 4)])
    assert tree_shape(star) != tree_shape(path)


# --- covering walks -------------------------------------------------------------------


@pytest.mark.parametrize("t", range(2, 7))
def test_tree_walks_follow_the_closed_form(t):
    for tree in iter_labeled_trees(t):
        assert walk_count_M(tree, 2 * tree.num_edges) == closed_form_walk_count(tree)


def test_tree_walk_edge_cases():
    assert walk_count_M(PATH_CENTER_MIDDLE, 5) == 0
    assert walk_count_M(PATH_CENTER_MIDDLE, 2) == 0
    assert walk_count_M(SINGLE_EDGE, 2) == 2
    assert walk_count_M(SINGLE_EDGE, 6) == 2


def test_loop_walks():
    assert walk_count_M(SINGLE_LOOP, 1) == 1
    assert walk_count_M(SINGLE_LOOP, 4) == 1
    assert walk_count_M(DOUBLE_LOOP, 3) == 2**3 - 2
    assert walk_count_M(OrderedGraph(3, ((1, 2),)), 4) == 0


def test_longer_walks_on_a_path():
    # tr(A^4) = 8 for the 3-path; removing either edge leaves one edge with tr = 2
    assert walk_count_M(PATH_CENTER_MIDDLE, 4) == 8 - 2 - 2
    assert walk_count_M(PATH_CENTER_MIDDLE, 4) == closed_form_walk_count(PATH_CENTER_MIDDLE)


# --- weights ---------------------------------------------------------------------------


def test_rising_and_falling():
    assert rising(3, 0) == 1 and rising(3, 2) == 12
    assert falling(3, 2) == 6 and falling(2, 3) == 0


@pytest.mark.parametrize("m", [1, 2, 5])
def test_phi_values(m):
    assert phi(SINGLE_EDGE, m) == m * m
    assert phi(SINGLE_LOOP, m) == m * m
    assert phi(DOUBLE_EDGE, m) == m * m * (m + 1) * (m - 1)
    assert phi(PATH_CENTER_FIRST, m) == m * (m + 1) * m * m


def test_magnitude_exponents():
    exps = magnitude_exponents(PATH_CENTER_MIDDLE)
    assert (exps.leaves, exps.degree_two) == (2, 1)
    assert exps.f_half == 1.0 and exps.g == 1
    assert magnitude_exponents(SINGLE_LOOP) == (0, 1)
