import json

import numpy as np
import pytest

from netctrl.ctrb import target_controllable, target_ctrb_matrix
from netctrl.extensions import (
    GeneralLinearSpec,
    Prop5Verdict,
    general_linear_triple,
    lemma5_certificate,
    lift_high_order,
    lifted_zero_columns_ok,
    prop5_check,
    scc_analyze,
    tarjan_scc,
    theorem3_check,
)
from netctrl.fixtures import load_fixture, random_graph, random_prop5_graph
from netctrl.graph import parse_graph, system_triple
from netctrl.linalg import DimensionError, rat_rank


def test_example1_second_order():
    t = system_triple(load_fixture("example1"))
    res = theorem3_check(t, 2)
    assert res.rank_first == res.rank_lifted == 2
    lifted = lift_high_order(t, 2)
    assert lifted.n == 14
    assert lifted_zero_columns_ok(target_ctrb_matrix(lifted, lifted.n), 2, t.l)


def test_theorem3_random(rng):
    failures = 0
    for _ in range(100):
        g = random_graph(rng, 1, 8)
        m = rng.randint(1, 3)
        t = system_triple(g)
        lifted = lift_high_order(t, m)
        w = target_ctrb_matrix(lifted, lifted.n)
        failures += rat_rank(w) != rat_rank(target_ctrb_matrix(t))
        failures += not lifted_zero_columns_ok(w, m, t.l)
    assert failures == 0


def test_lift_order_one_is_identity():
    t = system_triple(load_fixture("example1"))
    assert lift_high_order(t, 1) is t
    with pytest.raises(ValueError):
        lift_high_order(t, 0)


def test_general_linear_first_order_matches():
    g = load_fixture("example1")
    t = general_linear_triple(g, GeneralLinearSpec.first_order())
    assert t == system_triple(g)


def test_general_linear_double_integrator_agents():
    g = load_fixture("example1")
    spec = GeneralLinearSpec.from_json(json.dumps({
        "sigma": 2, "A": [[0, 1], [0, 0]], "M": [[0], [1]], "N": [[0], [1]], "K": [[1, 0]],
    }))
    t = general_linear_triple(g, spec)
    assert (t.n, t.l, t.p) == (14, 1, 4)
    # equivalent to the second-order lift up to a state permutation
    assert rat_rank(target_ctrb_matrix(t)) == 2 * 2


def test_general_linear_spec_validation():
    with pytest.raises(ValueError):
        GeneralLinearSpec.from_dict({"A": [[0]]})
    with pytest.raises(DimensionError):
        GeneralLinearSpec.from_dict({"sigma": 2, "A": [[0]], "M": [[1]], "N": [[1]], "K": [[1]]})


def reach_sets(nodes, succ):
    out = {}
    for v in nodes:
        seen, stack = {v}, [v]
        while stack:
            u = stack.pop()
            for w in succ.get(u, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        out[v] = seen
    return out


def test_tarjan_against_mutual_reachability(rng):
    for _ in range(100):
        g = random_graph(rng, 1, 12)
        succ = {v: g.out_neighbors(v) for v in g.nodes}
        r = reach_sets(g.nodes, succ)
        expect = {frozenset(u for u in g.nodes if u in r[v] and v in r[u]) for v in g.nodes}
        got = {frozenset(c) for c in tarjan_scc(g.nodes, succ)}
        assert got == expect


def test_tarjan_deep_chain_no_recursion_limit():
    n = 5000
    succ = {i: [i + 1] for i in range(n - 1)}
    assert len(tarjan_scc(range(n), succ)) == n


def test_ltf_fixture_inconclusive():
    g = load_fixture("ltf_ten_node")
    rep = scc_analyze(g)
    assert rep.target_only_independent == [[4, 8, 9]]
    assert rep.ltf_connected and rep.reason == "ltf-connected"
    assert prop5_check(g).verdict is Prop5Verdict.INCONCLUSIVE


def test_ltf_fixture_edge_removed():
    g = load_fixture("ltf_ten_node").without_edges([(1, 4)])
    res = prop5_check(g)
    assert res.verdict is Prop5Verdict.NOT_TARGET_CONTROLLABLE
    assert res.witness == [4, 8, 9] and res.exact_rank < res.p
    assert scc_analyze(g).reason == "no-leader-edge"


def test_no_target_only_iscc_reason():
    rep = scc_analyze(load_fixture("example1"))
    assert rep.reason == "no-target-only-iscc" and not rep.ltf_connected


def test_prop5_random(rng):
    failures = 0
    for _ in range(100):
        g = random_prop5_graph(rng)
        res = prop5_check(g)
        if res.verdict is not Prop5Verdict.NOT_TARGET_CONTROLLABLE or not res.exact_rank < res.p:
            failures += 1
    assert failures == 0


def test_prop5_general_linear():
    g = load_fixture("ltf_ten_node").without_edges([(1, 4)])
    spec = GeneralLinearSpec.from_dict({"A": [[0, 1], [-1, 0]], "M": [[0], [1]], "N": [[0], [1]], "K": [[1, 1]]})
    res = prop5_check(g, spec)
    assert res.verdict is Prop5Verdict.NOT_TARGET_CONTROLLABLE and res.exact_rank < res.p


def test_lemma5_certificate_isolated_component():
    g = parse_graph("n 4\nleaders 1\ntargets 3 4\nedge 1 2 1\nedge 3 4 1\nedge 4 3 2\n")
    cert = lemma5_certificate(g, [3, 4])
    assert cert.residual < 1e-9 and cert.input_leak < 1e-12
    assert np.all(cert.theta[:2] == 0)
    assert not target_controllable(system_triple(g)).controllable
