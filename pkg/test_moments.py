"""Limiting moments C(k, ε, m), the ψ integral and moment-problem checks."""

import math

import pytest
import sympy as sp

from paspectra.core.moments import (
    MomentTable,
    build_moment_table,
    carleman_report,
    check_hamburger,
    limit_moment_C,
    psi,
    psi_quadrature,
    untruncated_moment_asymptotics,
)
from paspectra.core.trees import SINGLE_EDGE, iter_labeled_trees, phi, walk_count_M


def second_moment(eps, m):
    root = math.sqrt(eps)
    return 2 * m * (1 - root) / (1 + root)


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.25])
@pytest.mark.parametrize("m", [1, 2, 5])
def test_second_moment_closed_form(eps, m):
    assert limit_moment_C(2, eps, m) == pytest.approx(second_moment(eps, m), rel=1e-10)


def test_known_value():
    assert limit_moment_C(2, 0.1, 2) == pytest.approx(2.07797, abs=1e-4)


def test_trivial_orders():
    assert limit_moment_C(0, 0.3, 4) == 1.0
    for k in (1, 3, 5, 7):
        assert limit_moment_C(k, 0.1, 2) == 0.0


@pytest.mark.parametrize("degrees", [(1, 1), (2, 1, 1), (1, 2, 1), (1, 1, 2)])
def test_psi_matches_quadrature(degrees):
    exact = psi(degrees, 0.1, 3)
    assert exact == pytest.approx(psi_quadrature(degrees, 0.1, 3), rel=1e-7)


@pytest.mark.parametrize("degrees", [(1, 1), (2, 1, 1), (1, 2, 1), (1, 1, 2, 2)])
def test_psi_matches_sympy_over_exact_limits(degrees):
    eps, m = sp.Rational(1, 10), 2
    ys = sp.symbols(f"y1:{len(degrees) + 1}", positive=True)
    f = sp.Integer(1)
    for i, (y, d) in enumerate(zip(ys, degrees)):
        upper = ys[i + 1] if i + 1 < len(ys) else 1
        f = sp.integrate(f * y ** sp.Rational(-d, 2), (y, eps, upper))
    expected = float(f) / (2 * m) ** (len(degrees) - 1)
    assert psi(degrees, 0.1, m) == pytest.approx(expected, rel=1e-10)


def test_psi_at_a_quarter():
    assert psi((2, 1, 1), 0.25, 1) == pytest.approx(psi_quadrature((2, 1, 1), 0.25, 1), rel=1e-8)


def test_psi_of_a_single_edge():
    eps, m = 0.2, 3
    assert psi((1, 1), eps, m) == pytest.approx((1 - math.sqrt(eps)) ** 2 / m)


def test_psi_rejects_bad_input():
    with pytest.raises(ValueError):
        psi((0,), 0.1, 1)
    with pytest.raises(ValueError):
        psi((2, 2), 0.1, 1)
    with pytest.raises(ValueError):
        psi((1, 1), 1.0, 1)


def test_fourth_moment_equals_the_tree_sum():
    eps, m = 0.1, 2
    terms = []
    for t in (2, 3):
        for tree in iter_labeled_trees(t):
            walks = walk_count_M(tree, 4)
            terms.append(phi(tree, m) * walks * psi_quadrature(tree.degrees(), eps, m))
    expected = math.fsum(terms) / (1 - eps)
    assert walk_count_M(SINGLE_EDGE, 4) == 2
    assert limit_moment_C(4, eps, m) == pytest.approx(expected, rel=1e-7)


def test_moment_table_is_a_hamburger_sequence():
    table = build_moment_table(8, 0.1, 2)
    assert table.K == 8
    assert check_hamburger(table, 8)
    assert all(c > 0 for c in table.moments()[::2])


def test_hamburger_flags_impossible_moments(caplog):
    assert not check_hamburger([1.0, 0.0, -1.0], 2)
    assert "Hankel" in caplog.text


def test_carleman_ratios():
    report = carleman_report([1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0], 6)
    assert report.ratios[0] == pytest.approx(0.5)
    assert report.nonincreasing
    assert report.max_ratio == pytest.approx(0.5)
    assert report.bounded()


def test_table_json_round_trip(tmp_path):
    table = build_moment_table(4, 0.25, 1)
    back = MomentTable.from_json(table.to_json())
    assert back.entries == table.entries and back.m == 1 and back.epsilon == 0.25
    path = tmp_path / "moments.json"
    table.save(path)
    assert MomentTable.from_json(path.read_text()).moments() == table.moments()


def test_table_normalization_and_gaps():
    table = MomentTable(epsilon=0.1, m=4, entries={0: 1.0, 1: 0.0, 2: 8.0})
    assert table.normalized(2.0) == [1.0, 0.0, 2.0]
    with pytest.raises(ValueError, match="lacks"):
        MomentTable(epsilon=0.1, m=4, entries={0: 1.0, 2: 8.0}).moments()


def test_order_cap_and_parameter_checks():
    with pytest.raises(ValueError, match="cap"):
        limit_moment_C(14, 0.1, 2)
    with pytest.raises(ValueError):
        limit_moment_C(2, 0.0, 2)
    with pytest.raises(ValueError):
        limit_moment_C(2, 0.1, 0)


def test_untruncated_asymptotics():
    assert untruncated_moment_asymptotics(2, 3, 1000) == 6.0
    assert untruncated_moment_asymptotics(4, 1, 100) == pytest.approx(4 * math.log(100))
    assert untruncated_moment_asymptotics(6, 1, 100) is None
