import random
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from _generators import branched_cycle, cycle, fed_trap, networks, random_state, rct, rct_flux
from life.linalg import RationalMatrix
from life.network import SINK, SOURCE, Network, NetworkError
from life.pathways import (
    UNBOUNDED,
    FlowProblem,
    TableauError,
    cone_membership,
    extreme_pathways,
    feasible_flow_exists,
    implicit_zero_edges,
    intakes_reach_excretion,
    max_flow,
    sample_nonnegative_nullspace,
    verify_positive_basis,
)
from life.stoichiometry import evaluate_stoichiometric, row_roles

F = Fraction


# RCT cone descriptions in closed form, columns in edge order
# (0,1) (0,2) (0,3) (1,4) (2,4) (3,4) (4,5) (4,6) (5,6) (6,7)


def rct_pathway_rows(x):
    x1, x2, x3, x4, x5, x6 = x
    return [
        [x4, 0, 0, x4 / x1, 0, 0, 1, 0, x4 / x5, x4 / x6],
        [x4, 0, 0, x4 / x1, 0, 0, 0, 1, 0, x4 / x6],
        [0, x4, 0, 0, x4 / x2, 0, 1, 0, x4 / x5, x4 / x6],
        [0, x4, 0, 0, x4 / x2, 0, 0, 1, 0, x4 / x6],
        [0, 0, x4, 0, 0, x4 / x3, 1, 0, x4 / x5, x4 / x6],
        [0, 0, x4, 0, 0, x4 / x3, 0, 1, 0, x4 / x6],
    ]


def rct_cone_generators(x):
    x1, x2, x3, x4, x5, x6 = x
    return [
        [x6, 0, 0, x6 / x1, 0, 0, 0, x6 / x4, 0, 1],
        [x6, 0, 0, x6 / x1, 0, 0, x6 / x4, 0, x6 / x5, 1],
        [0, x6, 0, 0, x6 / x2, 0, 0, x6 / x4, 0, 1],
        [0, x6, 0, 0, x6 / x2, 0, x6 / x4, 0, x6 / x5, 1],
        [0, 0, x6, 0, 0, x6 / x3, 0, x6 / x4, 0, 1],
        [0, 0, x6, 0, 0, x6 / x3, x6 / x4, 0, x6 / x5, 1],
    ]


def rct_nullspace_vectors(x):
    x1, x2, x3, x4, x5, x6 = x
    return [
        [x6, 0, 0, x6 / x1, 0, 0, 0, x6 / x4, 0, 1],
        [0, 0, 0, 0, 0, 0, x5 / x4, -x5 / x4, 1, 0],
        [-x3, 0, x3, -x3 / x1, 0, 1, 0, 0, 0, 0],
        [-x2, x2, 0, -x2 / x1, 1, 0, 0, 0, 0, 0],
    ]


def satisfies_cone_inequalities(a, x):
    x1, x2, x3, x4, x5, x6 = x
    return all(v >= 0 for v in a) and a[0] * x6 >= a[2] * x3 + a[3] * x2 and a[0] * x6 >= a[1] * x5


def combine(coeffs, vectors):
    out = [F(0)] * len(vectors[0])
    for c, v in zip(coeffs, vectors):
        out = [o + c * F(w) for o, w in zip(out, v)]
    return tuple(out)


def sample_inequality_coefficients(rng, x, count):
    """Rejection-sample a-coefficients satisfying the cone inequalities in the nullspace coordinates."""
    out = []
    while len(out) < count:
        a = [F(rng.randint(0, 12), rng.randint(1, 4)) for _ in range(4)]
        if satisfies_cone_inequalities(a, x) and any(a):
            out.append(a)
    return out


def same_rows_up_to_scaling(rows_a, rows_b):
    def canon(r):
        lead = next(v for v in r if v != 0)
        return tuple(F(v) / lead for v in r)

    return sorted(canon(r) for r in rows_a) == sorted(canon(r) for r in rows_b)


def rct_S(x):
    return evaluate_stoichiometric(rct(), x)


states = st.tuples(*[st.fractions(min_value=F(1, 5), max_value=5, max_denominator=5)] * 6).filter(
    lambda x: all(v > 0 for v in x)
)


# cone membership


def test_cone_membership_simple_cases():
    res = cone_membership([[1, 0], [0, 1]], [2, 3])
    assert res.feasible and res.coefficients == (2, 3)
    res = cone_membership([[1, 0], [1, 1]], [0, 1])
    assert not res.feasible
    y = res.certificate
    assert all(sum(F(a) * b for a, b in zip(g, y)) >= 0 for g in [[1, 0], [1, 1]])
    assert sum(F(a) * b for a, b in zip([0, 1], y)) < 0
    assert cone_membership([], [0, 0]).feasible
    assert not cone_membership([], [1, 0]).feasible
    with pytest.raises(ValueError):
        cone_membership([[1, 2, 3]], [1, 2])


def test_cone_membership_degenerate_generators():
    # repeated and zero generators must not cycle the simplex
    gens = [[1, 1, 0], [1, 1, 0], [0, 0, 0], [0, 1, 1], [1, 2, 1], [1, 0, -1]]
    res = cone_membership(gens, [2, 3, 1])
    assert res.feasible
    assert combine(res.coefficients, gens) == (2, 3, 1)


@settings(max_examples=150, deadline=None)
@given(
    st.integers(1, 5).flatmap(
        lambda d: st.tuples(
            st.lists(st.lists(st.integers(-3, 3), min_size=d, max_size=d), min_size=0, max_size=7),
            st.lists(st.integers(-4, 4), min_size=d, max_size=d),
        )
    )
)
def test_cone_membership_matches_linprog(case):
    gens, target = case
    res = cone_membership(gens, target)
    if res.feasible:
        assert all(c >= 0 for c in res.coefficients)
        assert combine(res.coefficients, gens) == tuple(F(t) for t in target) if gens else all(t == 0 for t in target)
    else:
        y = res.certificate
        assert all(sum(F(a) * b for a, b in zip(g, y)) >= 0 for g in gens)
        assert sum(F(a) * b for a, b in zip(target, y)) < 0
    if gens:
        A = np.array(gens, dtype=float).T
        lp = linprog(np.zeros(len(gens)), A_eq=A, b_eq=np.array(target, float), bounds=(0, None), method="highs")
        assert (lp.status == 0) == res.feasible


# extreme pathways


def test_rct_extreme_pathways_at_ones_match_closed_form_in_order():
    net = rct()
    S = rct_S([1] * 6)
    basis = extreme_pathways(S, row_roles(net))
    assert len(basis) == 6
    assert basis.rows == [tuple(F(v) for v in r) for r in rct_pathway_rows([F(1)] * 6)]
    assert len(S.nullspace()) == 4
    assert basis.pivot_order == ("v4", "v5", "v6", "v1", "v2", "v3")


@settings(max_examples=25, deadline=None)
@given(states)
def test_rct_extreme_pathways_match_closed_form_at_random_states(x):
    basis = extreme_pathways(rct_S(x), row_roles(rct()))
    assert same_rows_up_to_scaling(basis.rows, rct_pathway_rows(x))


def test_closed_form_basis_passes_all_three_checks():
    x = [F(3, 2), F(1, 3), 2, F(5, 4), F(7, 2), F(2, 5)]
    report = verify_positive_basis(rct_pathway_rows(x), rct_S(x), samples=60, rng=random.Random(1))
    assert report.ok, report.summary()


def test_duplicated_row_fails_independence():
    x = [F(1)] * 6
    rows = rct_pathway_rows(x)
    report = verify_positive_basis(rows + [rows[2]], rct_S(x), samples=5, rng=random.Random(2))
    assert not report.independent and report.contained and report.spanning
    assert set(report.dependent_rows) == {2, 6}


def test_missing_row_fails_spanning_on_dropped_row_witness():
    rng = random.Random(3)
    x = [F(2), F(1, 2), F(3), F(3, 2), F(5, 3), F(4)]
    v6 = rct_pathway_rows(x)
    a_vecs = rct_nullspace_vectors(x)
    dropped = v6[0]
    # the dropped row in standard-basis coordinates, read off its free entries
    a = [F(dropped[9]), F(dropped[8]), F(dropped[5]), F(dropped[4])]
    assert satisfies_cone_inequalities(a, x)
    witness = combine(a, a_vecs)
    assert witness == tuple(F(v) for v in dropped)
    extra = [combine(c, a_vecs) for c in sample_inequality_coefficients(rng, x, 20)] + [witness]
    report = verify_positive_basis(v6[1:], rct_S(x), samples=0, extra=extra)
    assert report.independent and report.contained
    assert not report.spanning
    assert witness in report.uncovered


@settings(max_examples=20, deadline=None)
@given(states, st.randoms(use_true_random=False))
def test_generator_and_inequality_descriptions_agree(x, rnd):
    rng = random.Random(rnd.random())
    S = rct_S(x)
    a_vecs = rct_nullspace_vectors(x)
    b_vecs = rct_cone_generators(x)
    v6 = rct_pathway_rows(x)
    for a in sample_inequality_coefficients(rng, x, 5):
        vec = combine(a, a_vecs)
        assert all(v >= 0 for v in vec)
        assert cone_membership(b_vecs, vec).feasible
        assert cone_membership(v6, vec).feasible
    for _ in range(5):
        b = [F(rng.randint(0, 6), rng.randint(1, 3)) for _ in range(6)]
        vec = combine(b, b_vecs)
        assert all(v == 0 for v in S @ vec)
        a = [vec[9], vec[8], vec[5], vec[4]]
        assert combine(a, a_vecs) == vec
        assert satisfies_cone_inequalities(a, x)


def test_role_validation():
    S = rct_S([1] * 6)
    with pytest.raises(TableauError):
        extreme_pathways(S, ["internal"] * 6)
    with pytest.raises(TableauError):
        extreme_pathways(S, ["intake"] * 5)
    with pytest.raises(TableauError):
        extreme_pathways(S, ["intake", "intake", "intake", "internal", "internal", "bogus"])
    zero_col = RationalMatrix([[1, 0], [0, 0]])
    with pytest.raises(TableauError):
        extreme_pathways(zero_col, ["intake", "internal"])


def test_closed_cycle_has_one_pathway():
    net = cycle(4)
    basis = extreme_pathways(evaluate_stoichiometric(net, [1, 2, 3, 4]), row_roles(net))
    assert basis.rows == [(F(1), F(1, 2), F(1, 3), F(1, 4))]


def test_fed_trap_cone_forces_trap_edges_to_zero():
    net = fed_trap()
    S = evaluate_stoichiometric(net, [1] * 4)
    zeros, _ = implicit_zero_edges(S)
    # the trap cycle itself can circulate; only the feed into it is forced to zero
    assert [net.edge_labels[j] for j in zeros] == ["v2->v4"]
    basis = extreme_pathways(S, row_roles(net))
    assert basis.rows == [(F(1), F(1), 0, F(1), 0, 0), (0, 0, 0, 0, F(1), F(1))]
    report = verify_positive_basis(basis, S, samples=20, rng=random.Random(0))
    assert report.ok


def test_csv_and_provenance():
    net = branched_cycle()
    basis = extreme_pathways(evaluate_stoichiometric(net, [1] * 4), row_roles(net))
    csv = basis.to_csv().splitlines()
    assert csv[0] == ",".join(net.edge_labels)
    assert len(csv) == len(basis) + 1
    for p in basis.pathways:
        assert {net.edge_labels[j] for j in p.support} == {t for t in net.edge_labels if t in p.describe()}


@settings(max_examples=30, deadline=None)
@given(networks(n_max=6, m_max=12))
def test_random_positive_basis_properties(net):
    if net.n == 0:
        return
    rng = random.Random(net.n * 7 + net.m)
    S = evaluate_stoichiometric(net, random_state(rng, net.n))
    basis = extreme_pathways(S, row_roles(net))
    report = verify_positive_basis(basis, S, samples=15, rng=rng)
    assert report.ok, report.summary()
    # every row is supported on a minimal set: no other row's support is inside it
    for p in basis.pathways:
        assert not any(q.support < p.support for q in basis.pathways)


@settings(max_examples=30, deadline=None)
@given(networks(n_max=6, m_max=12))
def test_sampler_produces_cone_vectors(net):
    if net.n == 0 or net.m == 0:
        return
    rng = random.Random(net.m)
    S = evaluate_stoichiometric(net, random_state(rng, net.n))
    for v in sample_nonnegative_nullspace(S, 10, rng):
        assert all(c >= 0 for c in v)
        assert all(c == 0 for c in S @ v)


# max-flow


def test_rct_max_flow_is_total_intake():
    net = rct()
    caps = {v: F(c) for v, c in zip(["v1", "v2", "v3"], ["0.2729", "0.0372", "0.6733"])}
    res = max_flow(FlowProblem.with_intakes(net, caps))
    assert res.value == F("0.9834")
    assert res.cut_capacity == res.value
    assert [net.edge_labels[j] for j in res.cut] == ["<source>->v1", "<source>->v2", "<source>->v3"]


def test_feasibility_with_witness_at_state():
    net = rct()
    x = [F(1, 2), 2, 3, F(3, 4), 1, 5]
    res = feasible_flow_exists(net, x, [1, 2, 3])
    assert res.feasible
    assert all(v >= 0 for v in res.witness)
    assert all(v == 0 for v in evaluate_stoichiometric(net, x) @ res.witness)


def test_infeasible_when_intake_cannot_reach_sink():
    net = fed_trap()
    assert intakes_reach_excretion(net)
    trap_only = Network.build(["a", "b"], [("a", "b"), ("b", "a")], ["a"], [])
    res = feasible_flow_exists(trap_only, [1, 1], [1])
    assert not res.feasible and res.witness is None
    assert not intakes_reach_excretion(trap_only)
    with pytest.raises(NetworkError):
        max_flow(FlowProblem.with_intakes(trap_only, [1]))


def test_flow_argument_errors():
    net = rct()
    with pytest.raises(ValueError):
        feasible_flow_exists(net, [0, 1, 1, 1, 1, 1], [1, 1, 1])
    with pytest.raises(ValueError):
        feasible_flow_exists(net, [1] * 6, [0, 1, 1])
    with pytest.raises(NetworkError):
        FlowProblem.with_intakes(net, {"v5": 1})
    with pytest.raises(ValueError):
        FlowProblem(net, (-1,) + (None,) * 9)


def _nx_value(net, caps):
    g = nx.DiGraph()
    g.add_nodes_from([SOURCE, SINK, *net.vertices])
    for e, c in zip(net.edges, caps):
        if c is UNBOUNDED:
            g.add_edge(e.tail, e.head)
        else:
            g.add_edge(e.tail, e.head, capacity=c)
    try:
        return nx.maximum_flow_value(g, SOURCE, SINK)
    except nx.NetworkXUnbounded:
        return None


@settings(max_examples=80, deadline=None)
@given(networks(n_max=7, m_max=14, closed=False), st.randoms(use_true_random=False))
def test_max_flow_matches_networkx_and_conserves(net, rnd):
    if not net.intake_vertices or not net.excretion_vertices:
        return
    caps = [F(rnd.randint(0, 9), rnd.randint(1, 4)) if rnd.random() < 0.7 or e.is_intake else UNBOUNDED
            for e in net.edges]
    caps = [c if not e.is_intake else F(rnd.randint(1, 9), 4) for c, e in zip(caps, net.edges)]
    res = max_flow(FlowProblem(net, tuple(caps)))
    expected = _nx_value(net, caps)
    assert expected is not None
    assert res.value == expected
    assert res.cut_capacity == res.value
    for j, (fl, c) in enumerate(zip(res.flow, caps)):
        assert fl >= 0 and (c is UNBOUNDED or fl <= c)
    for v in net.vertices:
        inflow = sum((res.flow[j] for j, e in enumerate(net.edges) if e.head == v), F(0))
        outflow = sum((res.flow[j] for j, e in enumerate(net.edges) if e.tail == v), F(0))
        assert inflow == outflow
