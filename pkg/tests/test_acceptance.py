"""Acceptance criteria, one test each; every test prints a PASS/FAIL line with its runtime.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import random
import sys
import time
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from _generators import (
    REFERENCE_XBAR,
    RCT_X0,
    fed_trap,
    random_flux,
    random_network,
    random_state,
    rct,
    rct_flux,
    unfed_trap,
)
from life.dynamics import embed_on_cycle, simulate
from life.equilibrium import Regime, check_equilibrium_necessary, classify_asymptotics, linear_equilibrium
from life.linalg import RationalMatrix
from life.network import SINK, SOURCE, Edge, Network
from life.pathways import (
    FlowProblem,
    cone_membership,
    extreme_pathways,
    max_flow,
    verify_positive_basis,
)
from life.stoichiometry import evaluate_stoichiometric, flux_matrix, row_roles

F = Fraction


@pytest.fixture
def verdict(capsys):
    def report(label, checks, elapsed, budget=None):
        """``checks`` maps a description to a bool; all must hold, plus the runtime budget."""
        checks = dict(checks)
        if budget is not None:
            checks[f"runtime {elapsed:.2f}s < {budget}s"] = elapsed < budget
        ok = all(checks.values())
        failed = [k for k, v in checks.items() if not v]
        with capsys.disabled():
            line = f"{'PASS' if ok else 'FAIL'} {label} ({elapsed:.2f}s)"
            if failed:
                line += " -- failed: " + "; ".join(failed)
            print("\n" + line)
        assert ok, "; ".join(failed)

    return report


def _networkx_graph(net, extended=False):
    g = nx.DiGraph()
    g.add_nodes_from(net.vertices)
    if extended:
        g.add_nodes_from([SOURCE, SINK])
    for e in net.edges:
        if extended or (e.tail in net.index and e.head in net.index):
            g.add_edge(e.tail, e.head)
    return g


def _float_steady_state(net, flux):
    idx = {v: i for i, v in enumerate(net.vertices)}
    A = np.zeros((net.n, net.n))
    b = np.zeros(net.n)
    for e, fl in zip(net.edges, map(float, flux)):
        if e.is_intake:
            b[idx[e.head]] += fl
            continue
        A[idx[e.tail], idx[e.tail]] -= fl
        if not e.is_excretion:
            A[idx[e.head], idx[e.tail]] += fl
    return np.linalg.solve(A, -b)


def test_criterion_01_rct_equilibrium(verdict):
    start = time.perf_counter()
    net, flux = rct(), rct_flux()
    report = linear_equilibrium(net, flux)
    elapsed = time.perf_counter() - start
    xbar = np.array([float(v) for v in report.values])
    oracle = _float_steady_state(net, flux)
    gaps = np.abs(xbar - np.array(REFERENCE_XBAR))
    worst = int(np.argmax(gaps))
    verdict(
        "criterion 1: RCT linear equilibrium matches the four-decimal reference within 5e-5",
        {
            "regime UNIQUE_GLOBAL": report.regime is Regime.UNIQUE_GLOBAL,
            "exact solve agrees with independent float solve to 1e-12": np.max(np.abs(xbar - oracle)) < 1e-12,
            f"max gap to reference {gaps[worst]:.2e} at v{worst + 1} <= 5e-5": bool(np.all(gaps <= 5e-5)),
        },
        elapsed,
        budget=1,
    )


def test_criterion_02_rct_simulation(verdict):
    start = time.perf_counter()
    trace = simulate(rct(), rct_flux(), RCT_X0, 50, 0.01)
    elapsed = time.perf_counter() - start
    exact = np.array([float(v) for v in linear_equilibrium(rct(), rct_flux()).values])
    to_reference = float(np.max(np.abs(trace.final - np.array(REFERENCE_XBAR))))
    to_exact = float(np.max(np.abs(trace.final - exact)))
    verdict(
        "criterion 2: RCT simulation to t=50 lands within 1e-3 of the equilibrium",
        {
            f"inf-norm to reference {to_reference:.2e} <= 1e-3": to_reference <= 1e-3,
            f"inf-norm to exact solve {to_exact:.2e} <= 1e-3": to_exact <= 1e-3,
            "no positivity violations": not trace.violations,
        },
        elapsed,
        budget=5,
    )


# RCT extreme pathways at x = 1 worked by hand, columns in edge order
RCT_PATHWAYS_AT_ONES = [
    [1, 0, 0, 1, 0, 0, 1, 0, 1, 1],
    [1, 0, 0, 1, 0, 0, 0, 1, 0, 1],
    [0, 1, 0, 0, 1, 0, 1, 0, 1, 1],
    [0, 1, 0, 0, 1, 0, 0, 1, 0, 1],
    [0, 0, 1, 0, 0, 1, 1, 0, 1, 1],
    [0, 0, 1, 0, 0, 1, 0, 1, 0, 1],
]


def _canonical(row):
    lead = next(v for v in row if v != 0)
    return tuple(F(v) / lead for v in row)


def test_criterion_03_extreme_pathways_golden(verdict):
    start = time.perf_counter()
    net = rct()
    S = evaluate_stoichiometric(net, [1] * net.n)
    basis = extreme_pathways(S, row_roles(net))
    dim = len(S.nullspace())
    elapsed = time.perf_counter() - start
    verdict(
        "criterion 3: RCT extreme pathways at x=1 equal the hand-derived rows, nullspace dimension 4",
        {
            f"row count {len(basis)} == 6": len(basis) == 6,
            "rows match up to permutation and positive scaling": sorted(map(_canonical, basis.rows))
            == sorted(map(_canonical, RCT_PATHWAYS_AT_ONES)),
            f"nullspace dimension {dim} == 4": dim == 4,
        },
        elapsed,
        budget=1,
    )


def test_criterion_04_positive_basis_random(verdict):
    start = time.perf_counter()
    rng = random.Random(20240404)
    contained = independent = spanning = True
    total_rows = total_samples = 0
    for _ in range(50):
        net = random_network(rng, n_max=8, m_max=14, n_min=2)
        S = evaluate_stoichiometric(net, random_state(rng, net.n, den=5))
        basis = extreme_pathways(S, row_roles(net))
        report = verify_positive_basis(basis, S, samples=100, rng=rng)
        contained &= report.contained
        independent &= report.independent
        spanning &= report.spanning
        total_rows += len(basis)
        total_samples += report.samples_checked
    elapsed = time.perf_counter() - start
    verdict(
        f"criterion 4: positive basis on 50 random networks ({total_rows} rows, {total_samples} samples)",
        {
            "rows nonnegative and in the nullspace": contained,
            "no row in the cone of the others": independent,
            "every sample decomposes with nonnegative coefficients": spanning,
            "100 samples per network": total_samples == 5000,
        },
        elapsed,
        budget=60,
    )


def test_criterion_05_rank_laws(verdict):
    start = time.perf_counter()
    rng = random.Random(55)
    closed_ok = open_ok = True
    for k in range(100):
        closed = k < 50
        net = random_network(rng, n_max=8, m_max=14, closed=closed, n_min=1)
        x = random_state(rng, net.n, den=5)
        r = evaluate_stoichiometric(net, x).rank()
        weak = list(nx.weakly_connected_components(_networkx_graph(net)))
        boundary = set(net.intake_vertices) | set(net.excretion_vertices)
        if closed:
            closed_ok &= r == net.n - len(weak)
        else:
            k_closed = sum(1 for c in weak if not boundary & c)
            open_ok &= r == net.n - k_closed
    elapsed = time.perf_counter() - start
    verdict(
        "criterion 5: rank(S(x)) = n - l (closed) and n - k (open) on 100 random graphs",
        {"closed instances n - l": closed_ok, "open instances n - k": open_ok},
        elapsed,
        budget=10,
    )


def _strongly_connected_open(rng, n):
    vs = [f"v{i + 1}" for i in range(n)]
    order = vs[:]
    rng.shuffle(order)
    pairs = {(order[i], order[(i + 1) % n]) for i in range(n)}
    while len(pairs) < min(n * (n - 1), n + rng.randint(0, 4)):
        a, b = rng.sample(vs, 2)
        pairs.add((a, b))
    exits = rng.sample(vs, rng.randint(1, 2))
    entries = rng.sample(vs, rng.randint(1, 2))
    return Network.build(vs, sorted(pairs), entries, exits)


def test_criterion_06_spectral_surrogate(verdict):
    start = time.perf_counter()
    rng = random.Random(66)
    nullity_ok = det_ok = sign_ok = strict_ok = True
    strongly = 0
    for _ in range(100):
        net = random_network(rng, n_max=8, m_max=14, closed=True, n_min=1)
        J, _ = flux_matrix(net, random_flux(rng, net.m))
        cond = nx.condensation(_networkx_graph(net))
        terminal = sum(1 for c in cond.nodes if cond.out_degree(c) == 0)
        nullity_ok &= len(J.nullspace()) == terminal
    for k in range(100):
        net = _strongly_connected_open(rng, rng.randint(2, 7)) if k % 4 == 0 else random_network(
            rng, n_max=8, m_max=14, closed=False, n_min=1
        )
        J, _ = flux_matrix(net, random_flux(rng, net.m))
        ext = _networkx_graph(net, extended=True)
        all_reach = all(nx.has_path(ext, v, SINK) for v in net.vertices)
        invertible = J.determinant() != 0
        det_ok &= invertible == all_reach
        if invertible:
            neg_inv = -J.inverse()
            sign_ok &= all(v >= 0 for row in neg_inv.rows for v in row)
            if nx.is_strongly_connected(_networkx_graph(net)):
                strongly += 1
                strict_ok &= all(v > 0 for row in neg_inv.rows for v in row)
    elapsed = time.perf_counter() - start
    verdict(
        f"criterion 6: spectral structure of J(f) on 100 closed and 100 open graphs ({strongly} strongly connected)",
        {
            "closed: dim N(J) = number of terminal components": nullity_ok,
            "open: det J != 0 iff every vertex reaches SINK": det_ok,
            "open: -J^-1 >= 0 entrywise": sign_ok,
            "strongly connected: -J^-1 > 0 entrywise": strict_ok and strongly > 0,
        },
        elapsed,
        budget=30,
    )


def test_criterion_07_conservation(verdict):
    start = time.perf_counter()
    rng = random.Random(77)
    worst_closed = worst_open = 0.0
    for _ in range(8):
        net = random_network(rng, n_max=6, m_max=12, closed=True, n_min=2, kinetics="B")
        flux = [float(v) for v in random_flux(rng, net.m)]
        x0 = [rng.uniform(0.1, 3) for _ in range(net.n)]
        tr = simulate(net, flux, x0, 100, 0.01)
        worst_closed = max(worst_closed, float(np.max(np.abs(tr.mass - tr.mass[0])) / tr.mass[0]))
    for _ in range(8):
        net = random_network(rng, n_max=6, m_max=12, closed=False, n_min=2, kinetics="B")
        flux = [float(v) for v in random_flux(rng, net.m)]
        x0 = [rng.uniform(0.1, 3) for _ in range(net.n)]
        tr = simulate(net, flux, x0, 20, 0.01)
        change = tr.mass[-1] - tr.mass[0]
        scale = max(abs(change), tr.mass[0])
        worst_open = max(worst_open, abs(tr.boundary_integral() - change) / scale)
    elapsed = time.perf_counter() - start
    verdict(
        "criterion 7: mass conservation (closed, t=100) and boundary-flow balance (open)",
        {
            f"closed relative drift {worst_closed:.1e} <= 1e-9": worst_closed <= 1e-9,
            f"open relative imbalance {worst_open:.1e} <= 1e-6": worst_open <= 1e-6,
        },
        elapsed,
    )


def test_criterion_08_structural_counterexamples(verdict):
    start = time.perf_counter()
    fed = fed_trap()
    flux = [1, 2, F(1, 2), 1, F(3, 2), 1]
    cls = classify_asymptotics(fed, flux)
    tr = simulate(fed, flux, [0.1] * 4, 30, 0.01)
    trap_mass = tr.states[:, fed.index["v3"]] + tr.states[:, fed.index["v4"]]
    unfed = unfed_trap()
    cond = check_equilibrium_necessary(unfed)
    rep = linear_equilibrium(unfed, [1, 2, F(3, 2), 1, F(1, 2)])
    elapsed = time.perf_counter() - start
    verdict(
        "criterion 8: fed trap is UNBOUNDED with growing trap mass; unfed trap passes with v4 = 0",
        {
            "fed trap classified UNBOUNDED": cls.regime is Regime.UNBOUNDED,
            "structural justification first": cls.trace[0].regime is Regime.NO_EQUILIBRIUM_STRUCTURAL,
            "trap mass strictly increasing": bool(np.all(np.diff(trap_mass) > 0)),
            "unfed trap passes the path condition": bool(cond),
            "unfed trap report has v4 = 0": rep.value("v4") == 0,
        },
        elapsed,
    )


def _polynomial_field(rng, n):
    """F_i = (x_1 ... x_n) P_i(x), i < n, with F_n = -sum F_i; zero on T and summing to zero."""
    exps = [tuple(int(v) for v in rng.integers(0, 3, size=n)) for _ in range(4)]
    coeffs = rng.uniform(-3, 3, size=(n - 1, len(exps)))
    powers = np.array(exps)

    def field(x):
        monomials = np.prod(x[None, :] ** powers, axis=1)
        head = np.prod(x) * (coeffs @ monomials)
        return np.append(head, -head.sum())

    return field


def test_criterion_09_cycle_embedding(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(99)
    worst = 0.0
    nonneg = True
    for _ in range(10):
        n = int(rng.integers(2, 7))
        field = _polynomial_field(rng, n)
        emb = embed_on_cycle(field, n)
        for _ in range(1000):
            x = rng.dirichlet(np.ones(n + 1))[:n]  # x > 0, sum < 1
            worst = max(worst, float(np.max(np.abs(emb(x) - field(x)))))
            nonneg &= bool(np.all(emb.gains(x) >= 0))
    elapsed = time.perf_counter() - start
    verdict(
        "criterion 9: cycle embedding reproduces 10 random polynomial fields at 1000 interior points",
        {f"max deviation {worst:.1e} <= 1e-12": worst <= 1e-12, "edge gains nonnegative": nonneg},
        elapsed,
    )


def test_criterion_10_max_flow(verdict):
    start = time.perf_counter()
    net = rct()
    caps = dict(zip(net.intake_vertices, (F("0.2729"), F("0.0372"), F("0.6733"))))
    res = max_flow(FlowProblem.with_intakes(net, caps))
    conserved = all(
        sum((res.flow[j] for j, e in enumerate(net.edges) if e.head == v), F(0))
        == sum((res.flow[j] for j, e in enumerate(net.edges) if e.tail == v), F(0))
        for v in net.vertices
    )
    elapsed = time.perf_counter() - start
    verdict(
        "criterion 10: RCT intake-capacity max-flow is exactly 0.9834 with exact conservation",
        {
            f"value {res.value} == 4917/5000": res.value == F("0.9834") and isinstance(res.value, Fraction),
            "min-cut capacity equals the flow value": res.cut_capacity == res.value,
            "flow conserved at every internal vertex": conserved,
        },
        elapsed,
    )


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
