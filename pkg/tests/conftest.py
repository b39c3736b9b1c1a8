import numpy as np
import pytest

from alphabp import IsingModel, build_graph, ising_to_graph


def random_tree_graph(rng, n, n_states=2):
    """Random recursive tree: node c > 0 hangs off a uniform earlier node."""
    parents = [int(rng.integers(0, c)) for c in range(1, n)]
    singletons = np.exp(rng.standard_normal((n, n_states)))
    pairwise = [
        (p, c, np.exp(rng.standard_normal((n_states, n_states))))
        for c, p in zip(range(1, n), parents)
    ]
    return build_graph(np.arange(n_states, dtype=float), singletons, pairwise)


def random_loopy_graph(rng, n, edge_prob, n_states=2, scale=1.0):
    singletons = np.exp(scale * rng.standard_normal((n, n_states)))
    pairwise = [
        (i, j, np.exp(scale * rng.standard_normal((n_states, n_states))))
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < edge_prob
    ]
    return build_graph(np.arange(n_states, dtype=float), singletons, pairwise)


def two_spin_graph(J12=-1.0, b=(0.5, 0.0)):
    J = np.array([[0.0, J12], [J12, 0.0]])
    return ising_to_graph(IsingModel(J, np.asarray(b, dtype=float)))


def reference_sum_product(graph, n_sweeps, floor=1e-12):
    """Plain-Python sum-product with the engine's fixed schedule.

    Factors in id order, side 0 (toward the lower endpoint) before side 1,
    each new message committed at once.  Returns every committed message in
    order.
    """
    A = graph.n_states
    f = graph.singletons.tolist()
    msgs = {(k, s): [1.0 / A] * A for k in range(graph.n_factors) for s in (0, 1)}
    into = {v: [] for v in range(graph.n_vars)}
    for k, fac in enumerate(graph.pairwise):
        into[fac.i].append((k, 0))
        into[fac.j].append((k, 1))
    trace = []
    for _ in range(n_sweeps):
        for k, fac in enumerate(graph.pairwise):
            t = fac.table.tolist()
            for side in (0, 1):
                src = fac.j if side == 0 else fac.i
                v = list(f[src])
                for key in into[src]:
                    if key[0] != k:
                        v = [a * b for a, b in zip(v, msgs[key])]
                z = sum(v)
                v = [a / z for a in v]
                new = []
                for xt in range(A):
                    acc = 0.0
                    for xo in range(A):
                        entry = t[xt][xo] if side == 0 else t[xo][xt]
                        acc += entry * v[xo]
                    new.append(acc)
                m = max(new)
                new = [max(a / m, floor) for a in new]
                z = sum(new)
                new = [a / z for a in new]
                msgs[(k, side)] = new
                trace.append(new)
    return trace


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


_ACCEPTANCE = []


@pytest.fixture
def acceptance(capsys):
    """Record one pass/fail line per acceptance criterion."""
    def record(name, ok, detail=""):
        line = f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
        _ACCEPTANCE.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
