import math
from fractions import Fraction

import numpy as np
import pytest

from tsallis_causal.causal import Dag, Node, builtin_dag, enumerate_ci_statements
from tsallis_causal.probability import (JointDistribution, VariableSpec, is_conditionally_independent,
                                        marginalize, sample_markov_compatible)
from tsallis_causal.quantum import random_povm
from tsallis_causal.scenarios import (TABLE1_SCENARIOS, TriangleStrategy, UniformQ, b1, b21, b22, b3, b_bound,
                                      b_star_bound, born_distribution, chained_angles, chained_bell_distribution,
                                      chained_bell_score, chained_bell_strategy, chsh_value, default_q_grid,
                                      fritz_distribution, inequality_lhs, lhs_coefficients,
                                      magic_square_distribution, magic_square_observables, permutations_for,
                                      random_strategy, random_violation_search, scenario_distribution,
                                      shared_copies_distribution, table1_csv, table1_di, violation_scan)


# -- constructions ---------------------------------------------------------------

def test_born_uniform_from_maximally_mixed():
    dims = {"A": (2, 2), "B": (2, 2), "C": (2, 2)}
    mixed = np.eye(4) / 4
    # rank-one projectors on maximally mixed, independent inputs: every outcome has weight 1/4
    proj = [random_povm(4, 4, seed=10 + s) for s in range(3)]
    d = born_distribution(TriangleStrategy(mixed, mixed, mixed, dims, *proj))
    np.testing.assert_allclose(d.table, np.full((4, 4, 4), 1 / 64), atol=1e-12)


def test_born_classical_matches_markov_semantics():
    rng = np.random.default_rng(0)
    for _ in range(5):
        d = born_distribution(random_strategy(2, 3, rng, classical=True))
        assert d.table.min() >= 0 and d.table.sum() == pytest.approx(1.0)
    strat = random_strategy(2, 2, seed=3, classical=True)
    pa, pb, pc = (np.diag(getattr(strat, f"rho_{s}")).real.reshape(2, 2) for s in "ABC")
    ex = np.array([np.diag(E).real.reshape(2, 2) for E in strat.povm_X])  # (x, b_x, c_x)
    ey = np.array([np.diag(E).real.reshape(2, 2) for E in strat.povm_Y])  # (y, a_y, c_y)
    ez = np.array([np.diag(E).real.reshape(2, 2) for E in strat.povm_Z])  # (z, a_z, b_z)
    brute = np.einsum("pq,rs,tu,xrt,ypu,zqs->xyz", pa, pb, pc, ex, ey, ez)
    np.testing.assert_allclose(born_distribution(strat).table, brute, atol=1e-14)


def test_born_validation():
    dims = {"A": (2, 2), "B": (2, 2), "C": (2, 2)}
    mixed = np.eye(4) / 4
    good = [random_povm(4, 2, seed=1)] * 3
    with pytest.raises(ValueError):
        TriangleStrategy(np.eye(2) / 2, mixed, mixed, dims, *good)
    with pytest.raises(ValueError):
        TriangleStrategy(mixed, mixed, mixed, dims, [np.eye(4)] * 2, *good[1:])
    with pytest.raises(ValueError):
        TriangleStrategy(mixed, mixed, mixed, dims, [np.eye(2)], *good[1:])


def test_fritz_distribution():
    d = fritz_distribution()
    assert d.shape == (4, 4, 4)
    np.testing.assert_allclose(marginalize(d, ["Z"]).table, np.full(4, 0.25), atol=1e-14)
    assert chsh_value(d) == pytest.approx(2 * math.sqrt(2), abs=1e-9)
    np.testing.assert_allclose(d.table, chained_bell_distribution(2).table, atol=1e-12)


def test_chained_bell():
    alpha, beta = chained_angles(3)
    assert alpha[0] == 0 and beta[0] == pytest.approx(math.pi / 6)
    for N in range(2, 7):
        d = chained_bell_distribution(N)
        assert d.shape == (2 * N, 2 * N, N * N)
        assert chained_bell_score(d, N) == pytest.approx(2 * N * math.cos(math.pi / (2 * N)), abs=1e-9)
    for N in (3, 4):
        np.testing.assert_allclose(born_distribution(chained_bell_strategy(N)).table,
                                   chained_bell_distribution(N).table, atol=1e-12)
    with pytest.raises(ValueError):
        chained_bell_distribution(1)


def test_magic_square():
    T = magic_square_observables()
    I4 = np.eye(4)
    for r in range(3):
        np.testing.assert_allclose(T[r][0] @ T[r][1] @ T[r][2], I4, atol=1e-14)
    for c in range(3):
        np.testing.assert_allclose(T[0][c] @ T[1][c] @ T[2][c], -I4, atol=1e-14)
    d, win = magic_square_distribution(return_win=True)
    assert d.shape == (12, 12, 9)
    assert win == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(marginalize(d, ["Z"]).table, np.full(9, 1 / 9), atol=1e-12)


def test_shared_copies():
    d = shared_copies_distribution(2, exact=True)
    assert d.shape == (4, 4, 4)
    nz = [v for v in d.exact_table.ravel() if v]
    assert len(nz) == 8 and all(v == Fraction(1, 8) for v in nz)
    with pytest.raises(ValueError):
        shared_copies_distribution(1)


def test_shared_copies_is_triangle_compatible():
    # expand to the full triangle with the hidden sources made explicit
    D = 2
    nodes = [Node(n, False, D) for n in "ABC"] + [Node(n, True, D * D) for n in "XYZ"]
    dag = Dag(nodes, builtin_dag("triangle").edges)
    P = np.zeros((D,) * 3 + (D * D,) * 3)
    for a in range(D):
        for b in range(D):
            for c in range(D):
                P[a, b, c, b * D + c, a * D + c, a * D + b] = 1 / D ** 3
    names = dag.names
    order = [("A", "B", "C", "X", "Y", "Z").index(n) for n in names]
    full = JointDistribution([VariableSpec(n, dag.cardinality(n)) for n in names], np.transpose(P, order))
    for s in enumerate_ci_statements(dag):
        assert is_conditionally_independent(full, s.X, s.Y, s.Z)
    np.testing.assert_allclose(marginalize(full, ["X", "Y", "Z"]).table, shared_copies_distribution(D).table)


def test_scenario_names():
    assert scenario_distribution("N=3").shape == (6, 6, 9)
    assert scenario_distribution("chained-2").shape == (4, 4, 4)
    assert scenario_distribution("Magic Sq.").shape == (12, 12, 9)
    assert scenario_distribution("shared-3").shape == (9, 9, 9)
    assert scenario_distribution("fritz").shape == (4, 4, 4)
    with pytest.raises(KeyError):
        scenario_distribution("nope")
    assert len(TABLE1_SCENARIOS) == 10


# -- bounds ----------------------------------------------------------------------

def test_bound_examples():
    assert b_bound(1, 2, 2, 2) == Fraction(-1, 2)
    assert b1(2, 2, 2) == Fraction(-1, 2)
    assert b_bound(2, 2, 3, 2) == max(b21(2, 3, 2), b22(2, 3, 2))
    assert b_bound(3, 3, 2, 2) == b3(3, 2, 2)
    for i in (1, 2, 3):
        for d_o, d_u in ((2, 2), (4, 2), (3, 7)):
            assert b_bound(i, 1, d_o, d_u) == 0
            assert abs(b_bound(i, 1 + 1e-6, d_o, d_u)) < 1e-4
    with pytest.raises(ValueError):
        b_bound(4, 2, 2, 2)


def test_bounds_exact_vs_float():
    for i in (1, 2, 3):
        assert float(b_bound(i, 3, 4, 5)) == pytest.approx(b_bound(i, 3.0, 4.0, 5.0), rel=1e-12)


def test_b1_monotone_decreasing():
    for q in (1.5, 2.0, 5.0):
        grid = [[b_bound(1, q, d_o, d_u) for d_u in range(2, 7)] for d_o in range(2, 7)]
        arr = np.array(grid, dtype=float)
        assert np.all(np.diff(arr, axis=0) < 0) and np.all(np.diff(arr, axis=1) < 0)


def test_b_star_below_b():
    for q in (1.5, 2, 3.0):
        for d_o in (2, 3):
            for i in (1, 2, 3):
                star = b_star_bound(i, q, d_o)
                assert star == b_bound(i, q, d_o, d_o ** 3 - d_o)
                for d_u in range(2, d_o ** 3 - d_o + 1):
                    assert float(star) <= float(b_bound(i, q, d_o, d_u)) + 1e-12


# -- inequality forms --------------------------------------------------------------

def test_permutations_and_coefficients():
    assert len(permutations_for(1)) == 3 and len(permutations_for(2)) == 1 and len(permutations_for(3)) == 3
    c = lhs_coefficients(1, ("X", "Y", "Z"))
    assert c[frozenset("XY")] == 1 and c[frozenset("XZ")] == 1 and frozenset("YZ") not in c
    c = lhs_coefficients(3, ("Y", "Z", "X"))
    assert c[frozenset("ZX")] == 3


def test_lhs_point_mass_and_uniform():
    point = JointDistribution([VariableSpec(n, 2) for n in "XYZ"], ["1", "0", "0", "0", "0", "0", "0", "0"])
    for i in (1, 2, 3):
        assert inequality_lhs(i, point, 2) == 0
    uni = JointDistribution.from_rational([VariableSpec(n, 3) for n in "XYZ"], [Fraction(1, 27)] * 27)
    s1, s2, s3 = Fraction(2, 3), Fraction(8, 9), Fraction(26, 27)  # S_2 of uniform on 3, 9, 27 values
    assert inequality_lhs(1, uni, 2) == -3 * s1 + 2 * s2
    assert inequality_lhs(2, uni, 2) == -15 * s1 + 12 * s2 - 2 * s3
    assert inequality_lhs(3, uni, 2) == -9 * s1 + 7 * s2 - s3


def test_lhs_policies_and_errors():
    d = chained_bell_distribution(3)
    allv = inequality_lhs(1, d, 2.5, policy="all")
    assert len(allv) == 3
    assert inequality_lhs(1, d, 2.5) == min(allv.values())
    assert inequality_lhs(1, d, 2.5, policy="best") == max(allv.values())
    assert inequality_lhs(1, d, 2.5, permutation=("Y", "Z", "X")) == allv[("Y", "Z", "X")]
    with pytest.raises(ValueError):
        inequality_lhs(1, d, 2, policy="median")
    two = JointDistribution([VariableSpec(n, 2) for n in "XY"], [0.25] * 4)
    with pytest.raises(ValueError):
        inequality_lhs(1, two, 2)


def test_shannon_inequalities_hold_classically():
    dag = builtin_dag("triangle", 2)
    for seed in range(10):
        d = marginalize(sample_markov_compatible(dag, seed=seed), ["X", "Y", "Z"])
        for i in (1, 2, 3):
            assert inequality_lhs(i, d, 1) >= -1e-12


def test_classical_soundness_of_bounds():
    nodes = [Node(n, False, 2) for n in "ABC"] + [Node(n, True, 3) for n in "XYZ"]
    dag = Dag(nodes, builtin_dag("triangle").edges)
    for seed in range(40):
        d = marginalize(sample_markov_compatible(dag, seed=seed), ["X", "Y", "Z"])
        for q in (1.5, 2.0, 5.0):
            for i in (1, 2, 3):
                assert inequality_lhs(i, d, q) >= float(b_bound(i, q, 3, 2)) - 1e-9


# -- scans -----------------------------------------------------------------------

def test_default_grid():
    g = default_q_grid()
    assert len(g) == 200 and g[0] == 1.0 and g[-1] == pytest.approx(100.0)


def test_violation_scan_fritz_no_violation():
    d = fritz_distribution()
    for i in (1, 2, 3):
        rep = violation_scan(d, i, d_o=4, d_u=2)
        assert rep.min_margin() >= -1e-9
        assert set(rep.to_dict()) >= {"margins", "worst", "q_grid"}
    with pytest.raises(ValueError):
        violation_scan(d, 1, q_grid=[0.5, 2.0])


def test_table1_di_small_cases():
    d = fritz_distribution()
    assert [table1_di(d, i) for i in (1, 2, 3)] == [2, 2, 2]
    value, per_perm = table1_di(chained_bell_distribution(3), 1, details=True)
    assert value == 3 and min(per_perm.values()) == 3
    assert table1_di(chained_bell_distribution(3), 1, policy="worst") >= value
    with pytest.raises(ValueError):
        table1_di(d, 1, policy="odd")


def test_table1_monotone_consistency():
    d = chained_bell_distribution(4)
    first = table1_di(d, 3)
    for d_o in range(first, first + 3):
        best = max(m for _, m in violation_scan(d, 3, d_o=d_o).worst.values())
        assert best >= -1e-9


def test_table1_csv_layout():
    csv_text = table1_csv([{"scenario": "N=2", "d1": 2, "d2": 2, "d3": 2, "smallest_observed_dim": 4}])
    assert csv_text == "scenario,d1,d2,d3,smallest_observed_dim\nN=2,2,2,2,4\n"


# -- random search ----------------------------------------------------------------

def test_random_search_small_and_deterministic():
    a = random_violation_search(2, 4, samples=20, seed=1)
    b = random_violation_search(2, 4, samples=20, seed=1, workers=2)
    assert a.to_dict() == b.to_dict()
    assert not a.found and a.min_margin >= -1e-9
    assert UniformQ(1, 3)(np.random.default_rng(0)) <= 3
    with pytest.raises(ValueError):
        random_violation_search(2, 4, samples=0)


def test_random_search_classical_sampler():
    rep = random_violation_search(2, 4, samples=30, seed=2, classical=True)
    assert not rep.found and rep.min_margin >= -1e-9
