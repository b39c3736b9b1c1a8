"""Pairwise discrete factor graphs.

A :class:`FactorGraph` holds one singleton table per variable and a list of
pairwise tables, all over a single shared finite alphabet.  Every table is
stored twice, linear and log.  Inference only reads the log tables, so a
sharply peaked model (e.g. a high-SNR MIMO posterior) built with
:func:`build_graph_from_logs` stays usable even when its linear view
saturates to 0 or inf.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class GraphError(ValueError):
    """Raised when a factor graph (or its file form) is malformed."""


@dataclass(frozen=True)
class PairwiseFactor:
    """Factor ``t_k(x_i, x_j)`` with ``i < j``; ``table[a, b]`` is indexed
    by (alphabet index of x_i, alphabet index of x_j)."""

    factor_id: int
    i: int
    j: int
    table: np.ndarray = field(repr=False)
    log_table: np.ndarray = field(repr=False)

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.i, self.j)


@dataclass(frozen=True)
class FactorGraph:
    alphabet: np.ndarray
    singletons: np.ndarray  # (n_vars, |A|)
    log_singletons: np.ndarray
    pairwise: tuple[PairwiseFactor, ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def n_vars(self) -> int:
        return self.singletons.shape[0]

    @property
    def n_states(self) -> int:
        return self.alphabet.shape[0]

    @property
    def n_factors(self) -> int:
        return len(self.pairwise)

    @property
    def edges(self) -> np.ndarray:
        """``(n_factors, 2)`` integer array of factor endpoints."""
        if not self.pairwise:
            return np.zeros((0, 2), dtype=np.intp)
        return np.array([f.endpoints for f in self.pairwise], dtype=np.intp)

    @property
    def log_pairwise(self) -> np.ndarray:
        """``(n_factors, |A|, |A|)`` stacked log tables."""
        a = self.n_states
        if not self.pairwise:
            return np.zeros((0, a, a))
        return np.stack([f.log_table for f in self.pairwise])

    def neighbors(self, i: int) -> list[int]:
        out = []
        for k in self.adjacency[i]:
            f = self.pairwise[k]
            out.append(f.j if f.i == i else f.i)
        return out


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_alphabet(alphabet) -> np.ndarray:
    values = np.asarray(alphabet, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise GraphError("alphabet must be a flat list of at least 2 values")
    if not np.all(np.isfinite(values)):
        raise GraphError("alphabet values must be finite")
    if np.unique(values).size != values.size:
        raise GraphError("alphabet values must be distinct")
    return values


def _check_positive(table, what: str) -> None:
    if not np.all(np.isfinite(table)):
        raise GraphError(f"{what}: non-finite entry")
    if np.any(table <= 0):
        raise GraphError(f"{what}: non-positive entry")


def build_adjacency(n_vars: int, edges) -> tuple[tuple[int, ...], ...]:
    """``Pa[i]``: ids of pairwise factors touching variable ``i``, ascending."""
    pa: list[list[int]] = [[] for _ in range(n_vars)]
    for k, (i, j) in enumerate(edges):
        pa[int(i)].append(k)
        pa[int(j)].append(k)
    return tuple(tuple(p) for p in pa)


def _assemble(alphabet, singletons, log_singletons, specs) -> FactorGraph:
    # specs: (i, j, table, log_table), shapes already checked
    n_vars = singletons.shape[0]
    seen = set()
    factors = []
    for k, (i, j, table, log_table) in enumerate(specs):
        try:
            i, j = int(i), int(j)
        except (TypeError, ValueError):
            raise GraphError(f"pairwise factor {k}: endpoints must be integers") from None
        if not (0 <= i < n_vars and 0 <= j < n_vars):
            raise GraphError(f"pairwise factor {k}: variable id out of range ({i}, {j})")
        if i == j:
            raise GraphError(f"pairwise factor {k}: endpoints must differ")
        if i > j:
            i, j = j, i
            table, log_table = table.T, log_table.T
        if (i, j) in seen:
            raise GraphError(f"pairwise factor {k}: duplicate edge ({i}, {j})")
        seen.add((i, j))
        factors.append(PairwiseFactor(k, i, j, _frozen(table), _frozen(log_table)))
    adjacency = build_adjacency(n_vars, [f.endpoints for f in factors])
    return FactorGraph(
        _frozen(alphabet), _frozen(singletons), _frozen(log_singletons),
        tuple(factors), adjacency,
    )


def _as_tables(alphabet, singletons, pairwise):
    a = alphabet.size
    rows = []
    for i, s in enumerate(singletons):
        s = np.asarray(s, dtype=float)
        if s.shape != (a,):
            raise GraphError(f"singleton {i}: length {s.size} != alphabet size {a}")
        rows.append(s)
    if not rows:
        raise GraphError("graph needs at least one variable")
    specs = []
    for k, (i, j, t) in enumerate(pairwise):
        t = np.asarray(t, dtype=float)
        if t.shape != (a, a):
            raise GraphError(f"pairwise factor {k}: table shape {t.shape} != {(a, a)}")
        specs.append((i, j, t))
    return np.stack(rows), specs


def build_graph(alphabet, singletons, pairwise=()) -> FactorGraph:
    """Validate linear-domain tables and build a :class:`FactorGraph`.

    ``pairwise`` is a sequence of ``(i, j, table)``.  A factor given with
    ``i > j`` is stored transposed so endpoints are always ascending.
    """
    alphabet = _check_alphabet(alphabet)
    singletons, specs = _as_tables(alphabet, singletons, pairwise)
    for i, s in enumerate(singletons):
        _check_positive(s, f"singleton {i}")
    for k, (_, _, t) in enumerate(specs):
        _check_positive(t, f"pairwise factor {k}")
    specs = [(i, j, t, np.log(t)) for i, j, t in specs]
    return _assemble(alphabet, singletons, np.log(singletons), specs)


def build_graph_from_logs(alphabet, log_singletons, log_pairwise=()) -> FactorGraph:
    """Like :func:`build_graph`, but tables are given as finite logs."""
    alphabet = _check_alphabet(alphabet)
    log_singletons, specs = _as_tables(alphabet, log_singletons, log_pairwise)
    if not np.all(np.isfinite(log_singletons)):
        raise GraphError("singleton: non-finite log entry")
    for k, (_, _, lt) in enumerate(specs):
        if not np.all(np.isfinite(lt)):
            raise GraphError(f"pairwise factor {k}: non-finite log entry")
    with np.errstate(over="ignore"):
        specs = [(i, j, np.exp(lt), lt) for i, j, lt in specs]
        singletons = np.exp(log_singletons)
    return _assemble(alphabet, singletons, log_singletons, specs)


def _check_assignment(graph: FactorGraph, assignment) -> np.ndarray:
    x = np.asarray(assignment)
    if x.shape != (graph.n_vars,):
        raise GraphError(f"assignment length {x.size} != n_vars {graph.n_vars}")
    if not np.issubdtype(x.dtype, np.integer):
        raise GraphError("assignment must hold integer alphabet indices")
    if np.any(x < 0) or np.any(x >= graph.n_states):
        raise GraphError("assignment index out of range")
    return x


def evaluate_joint(graph: FactorGraph, assignment: Sequence[int]) -> float:
    """Unnormalized product of every factor entry at ``assignment``.

    ``assignment`` holds one alphabet index per variable.
    """
    x = _check_assignment(graph, assignment)
    value = 1.0
    for i in range(graph.n_vars):
        value *= float(graph.singletons[i, x[i]])
    for f in graph.pairwise:
        value *= float(f.table[x[f.i], x[f.j]])
    return value


def log_evaluate_joint(graph: FactorGraph, assignment: Sequence[int]) -> float:
    x = _check_assignment(graph, assignment)
    total = 0.0
    for i in range(graph.n_vars):
        total += float(graph.log_singletons[i, x[i]])
    for f in graph.pairwise:
        total += float(f.log_table[x[f.i], x[f.j]])
    return total


def values_to_indices(alphabet, values) -> np.ndarray:
    """Map alphabet values back to their indices."""
    alphabet = np.asarray(alphabet)
    values = np.asarray(values, dtype=float)
    hit = values[..., None] == alphabet
    if not np.all(hit.any(axis=-1)):
        raise GraphError("value not in alphabet")
    return hit.argmax(axis=-1)


# -- file format -------------------------------------------------------------


def graph_from_dict(data) -> FactorGraph:
    if not isinstance(data, dict):
        raise GraphError("graph file must hold an object at top level")
    for key in ("alphabet", "singletons"):
        if key not in data:
            raise GraphError(f"missing field '{key}'")
    pairwise = data.get("pairwise", [])
    if not isinstance(pairwise, list):
        raise GraphError("field 'pairwise' must be a list")
    specs = []
    for k, entry in enumerate(pairwise):
        if not isinstance(entry, dict):
            raise GraphError(f"field 'pairwise[{k}]' must be an object with i, j, table")
        for key in ("i", "j", "table"):
            if key not in entry:
                raise GraphError(f"missing field 'pairwise[{k}].{key}'")
        specs.append((entry["i"], entry["j"], entry["table"]))
    try:
        alphabet = _check_alphabet(data["alphabet"])
    except (TypeError, ValueError) as exc:
        raise GraphError(f"field 'alphabet': {exc}") from None
    try:
        return build_graph(alphabet, data["singletons"], specs)
    except GraphError:
        raise
    except (TypeError, ValueError) as exc:
        raise GraphError(f"malformed numeric data: {exc}") from None


def graph_to_dict(graph: FactorGraph) -> dict:
    return {
        "alphabet": graph.alphabet.tolist(),
        "singletons": graph.singletons.tolist(),
        "pairwise": [
            {"i": f.i, "j": f.j, "table": f.table.tolist()} for f in graph.pairwise
        ],
    }


def load_graph(path) -> FactorGraph:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GraphError(f"cannot parse graph file: {exc}") from None
    return graph_from_dict(data)


def save_graph(graph: FactorGraph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(graph), indent=1) + "\n")
