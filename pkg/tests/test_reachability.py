from netctrl.ctrb import target_ctrb_matrix
from netctrl.fixtures import load_fixture, random_graph
from netctrl.graph import parse_graph, system_triple
from netctrl.reachability import analyze_reachability, prop1_check, zero_rows


def test_example2_classes():
    r = analyze_reachability(load_fixture("example2"))
    assert {d: set(c) for d, c in r.classes.items()} == {0: {4, 5}, 1: {6, 7}, 2: {8}}
    assert r.unreachable == {9}
    assert r.delta_of[8] == 2


def test_example2_unreachable_target_zero_row():
    g = load_fixture("example2").with_targets([2, 9])
    res = prop1_check(g)
    assert res.unreachable_targets == {9}
    assert res.w_zero_rows == {9}
    assert res.dim_upper_bound == 1


def test_zero_rows_helper():
    w = target_ctrb_matrix(system_triple(parse_graph("n 3\nleaders 1\ntargets 2 3\nedge 1 2 1\n")))
    assert zero_rows(w) == {1}


def test_prop1_random_both_directions(rng):
    failures = 0
    for _ in range(200):
        g = random_graph(rng, 1, 10)
        reach = analyze_reachability(g)
        w = target_ctrb_matrix(system_triple(g))
        zero_targets = {g.targets[i] for i in zero_rows(w)}
        if zero_targets != set(reach.unreachable_targets):
            failures += 1
        prop1_check(g, w)
    assert failures == 0


def test_leader_targets_are_reachable():
    g = parse_graph("n 2\nleaders 1\ntargets 1\n")
    assert prop1_check(g).unreachable_targets == frozenset()
    assert analyze_reachability(g).delta_of == {}
