import math

import pytest

import nprk


def test_counts():
    assert nprk.count_conditions(2, 4)["total"] == 26
    assert nprk.count_conditions(2, 4)["coupling"] == 18
    assert nprk.count_ark_conditions(5, 8) == 4635330
    assert len(nprk.generate_trees(3, 3)) == 15


def test_tree_queries():
    cherry = nprk.Tree([1, 2, 2], [0, 0, 1], 2)
    assert cherry.order == 3
    assert nprk.density(cherry) == 3
    assert nprk.classify(cherry) == "nonlinear"
    assert nprk.tag(cherry) == "†"
    assert nprk.parse_tree(str(cherry), 2) == cherry
    assert nprk.render_condition(cherry).endswith("= 1/3")
    with pytest.raises(nprk.ValidationError):
        nprk.Tree([1, 3], [0, 0], 2)


def test_order_check():
    m1 = nprk.load_tableau("builtin:method1")
    m2 = nprk.load_tableau("builtin:method2")
    assert nprk.verify_order(m1)["detected_order"] == 3
    v = nprk.verify_order(m2)
    assert v["detected_order"] == 2
    assert {f["class"] for f in v["failing"]} == {"nonlinear"}


def test_dense_lift():
    t = nprk.lift("builtin:lobatto3A3B", "dense")
    assert (t.M, t.s) == (2, 3)
    phi = nprk.elementary_weight(t, nprk.Tree([1, 2, 2], [0, 0, 1], 2))
    x = 1.5
    assert math.isclose(phi, x / 3 - x * x / 9, abs_tol=1e-12)
    with pytest.raises(nprk.ValidationError):
        nprk.lift("builtin:method1")


def test_integrate_and_convergence():
    m1 = nprk.load_tableau("builtin:method1")
    lv = nprk.lotka_volterra(2.0)
    times, states = nprk.integrate(m1, lv, [1.0, 1.0], 1.0, 0.25)
    assert times[-1] == 1.0 and len(states) == 5
    ref = nprk.lotka_volterra_reference(2.0, [1.0, 1.0], 0.5)
    res = nprk.convergence_study(m1, lv, [1.0, 1.0], 0.5, [0.1, 0.05, 0.025, 0.0125, 0.01], ref)
    assert res["fitted"] and abs(res["slope"] - 3.0) < 0.3


def test_scan_and_witness():
    rows = nprk.coupling_scan([0.0, 1.0], [1e-2])
    assert rows[0][2] < 1e-15 and rows[1][0] == 1.0
    m1 = nprk.load_tableau("builtin:method1")
    tree = nprk.Tree([1, 2, 2], [0, 0, 1], 2)
    expected = nprk.symmetry(tree) * nprk.density(tree) * nprk.elementary_weight(m1, tree) / 6
    assert math.isclose(nprk.witness_coefficient(m1, tree), expected, rel_tol=1e-6)
