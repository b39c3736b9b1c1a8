"""alpha-BP message passing on pairwise factor graphs.

Messages live on the directed edges factor -> variable.  Factor ``k`` with
endpoints ``(i, j)`` owns two of them: side 0 is ``m_{k->i}`` and side 1 is
``m_{k->j}``.  A sweep visits the factors in schedule order and, for each,
refreshes side 0 and then side 1, committing each new message immediately
(Gauss-Seidel).  With ``alpha = 1`` the update is the ordinary sum-product
message.

The sweep loop is written against a :class:`GraphBatch`, a stack of graphs
sharing alphabet and edge list, so Monte-Carlo experiments can run thousands
of instances in lock step.  A batch member stops updating as soon as it has
converged, which makes its trajectory identical to a standalone run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from alphabp.graph import FactorGraph, GraphError

SCHEDULES = ("fixed", "random")


@dataclass(frozen=True)
class EngineConfig:
    alpha: float = 1.0
    max_sweeps: int = 50
    tolerance: float = 1e-6
    schedule: str = "fixed"
    seed: int = 0
    damping: float = 0.0
    message_floor: float = 1e-12

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if not self.message_floor > 0:
            raise ValueError("message_floor must be > 0")


@dataclass
class BeliefState:
    """Messages and surrogate singletons.

    Arrays may carry leading batch axes.  ``messages[..., k, s, :]`` is the
    normalized message from factor ``k`` to its endpoint ``s``;
    ``log_messages`` mirrors it.  ``log_surrogate`` holds the singleton
    surrogates and ``log_prior`` the optional extra singleton beliefs.
    """

    messages: np.ndarray
    log_messages: np.ndarray
    log_surrogate: np.ndarray
    log_prior: Optional[np.ndarray] = None

    @property
    def surrogate(self) -> np.ndarray:
        return np.exp(self.log_surrogate)

    @property
    def prior(self) -> Optional[np.ndarray]:
        return None if self.log_prior is None else np.exp(self.log_prior)

    def copy(self) -> "BeliefState":
        return BeliefState(
            self.messages.copy(),
            self.log_messages.copy(),
            self.log_surrogate.copy(),
            None if self.log_prior is None else self.log_prior.copy(),
        )


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    sweeps_used: int
    final_residual: float


@dataclass(frozen=True)
class BatchReport:
    converged: np.ndarray
    sweeps_used: np.ndarray
    final_residual: np.ndarray

    def __getitem__(self, b) -> ConvergenceReport:
        return ConvergenceReport(
            bool(self.converged[b]), int(self.sweeps_used[b]), float(self.final_residual[b])
        )


@dataclass(frozen=True)
class GraphBatch:
    """``B`` graphs over one alphabet and one edge list."""

    alphabet: np.ndarray
    edges: np.ndarray  # (K, 2)
    log_singletons: np.ndarray  # (B, N, A)
    log_pairwise: np.ndarray  # (B, K, A, A)

    @property
    def size(self) -> int:
        return self.log_singletons.shape[0]

    @property
    def n_vars(self) -> int:
        return self.log_singletons.shape[1]

    @property
    def n_states(self) -> int:
        return self.alphabet.shape[0]

    @classmethod
    def from_graph(cls, graph: FactorGraph) -> "GraphBatch":
        return cls(
            graph.alphabet,
            graph.edges,
            graph.log_singletons[None],
            graph.log_pairwise[None],
        )


def stack_graphs(graphs: Sequence[FactorGraph], edges=None) -> GraphBatch:
    """Stack graphs into a :class:`GraphBatch`.

    Without ``edges`` all graphs must share one edge list.  With ``edges``
    every graph is embedded on that list; factors a graph lacks become
    constant tables, which pass only uniform messages.
    """
    if not graphs:
        raise ValueError("need at least one graph")
    first = graphs[0]
    a = first.n_states
    if edges is None:
        edges = first.edges
    edges = np.asarray(edges, dtype=np.intp).reshape(-1, 2)
    slot = {(int(i), int(j)): k for k, (i, j) in enumerate(edges)}
    log_t = np.zeros((len(graphs), len(edges), a, a))
    for b, g in enumerate(graphs):
        if not np.array_equal(g.alphabet, first.alphabet) or g.n_vars != first.n_vars:
            raise GraphError("graphs in a batch must share alphabet and size")
        for f in g.pairwise:
            k = slot.get(f.endpoints)
            if k is None:
                raise GraphError(f"edge {f.endpoints} missing from batch edge list")
            log_t[b, k] = f.log_table
    log_f = np.stack([g.log_singletons for g in graphs])
    return GraphBatch(first.alphabet, edges, log_f, log_t)


# -- kernels -------------------------------------------------------------------
# All kernels accept arbitrary leading axes.


def _max_last(x: np.ndarray) -> np.ndarray:
    # the alphabet axis is tiny; elementwise passes beat an axis reduction
    out = x[..., 0].copy()
    for a in range(1, x.shape[-1]):
        np.maximum(out, x[..., a], out=out)
    return out


def _sum_last(x: np.ndarray) -> np.ndarray:
    out = x[..., 0].copy()
    for a in range(1, x.shape[-1]):
        out += x[..., a]
    return out


def _logsumexp(x: np.ndarray) -> np.ndarray:
    m = _max_last(x)
    return m + np.log(_sum_last(np.exp(x - m[..., None])))


def _log_normalize(x: np.ndarray) -> np.ndarray:
    return x - _logsumexp(x)[..., None]


def _factor_message(log_t, log_m_to_target, log_m_to_other, log_other_to_factor,
                    alpha: float, floor: float) -> np.ndarray:
    """New normalized linear message from a factor to its target variable.

    ``log_t[..., x_target, x_other]``; the three message arguments are logs
    of the factor's current message to the target, its current message to
    the other endpoint, and the other endpoint's message into the factor
    (which need not be normalized).
    """
    beta = 1.0 - alpha
    weight = beta * log_m_to_other + log_other_to_factor
    inner = alpha * log_t + weight[..., None, :]
    log_new = _logsumexp(inner) + beta * log_m_to_target
    v = np.exp(log_new - _max_last(log_new)[..., None])
    np.maximum(v, floor, out=v)
    v /= _sum_last(v)[..., None]
    return v


def _incoming_slots(edges: np.ndarray, n_vars: int) -> list[list[int]]:
    """Flat ``2*k + side`` message slots arriving at each variable."""
    slots: list[list[int]] = [[] for _ in range(n_vars)]
    for k, (i, j) in enumerate(edges):
        slots[int(i)].append(2 * k)
        slots[int(j)].append(2 * k + 1)
    return slots


def _cavity_slots(edges: np.ndarray, n_vars: int):
    """For each (k, side): source variable and the slots feeding it except k's own."""
    incoming = _incoming_slots(edges, n_vars)
    out = []
    for k, (i, j) in enumerate(edges):
        pair = []
        for side in (0, 1):
            src = int(j) if side == 0 else int(i)
            own = 2 * k + (1 - side)
            pair.append((src, np.array([s for s in incoming[src] if s != own], dtype=np.intp)))
        out.append(pair)
    return out


def _to_factor_log(log_sur_src, log_prior_src, flat_log_msgs, slots) -> np.ndarray:
    """Unnormalized log message from a variable into a factor."""
    acc = log_sur_src
    if log_prior_src is not None:
        acc = acc + log_prior_src
    for s in slots:
        acc = acc + flat_log_msgs[..., s, :]
    return acc


def _beliefs_log(state: BeliefState, edges: np.ndarray) -> np.ndarray:
    n_vars = state.log_surrogate.shape[-2]
    acc = state.log_surrogate.copy()
    if state.log_prior is not None:
        acc = acc + state.log_prior
    flat = state.log_messages.reshape(state.log_messages.shape[:-3] + (-1, acc.shape[-1]))
    for v, slots in enumerate(_incoming_slots(edges, n_vars)):
        if slots:
            acc[..., v, :] += np.sum(flat[..., slots, :], axis=-2)
    return _log_normalize(acc)


# -- state construction ----------------------------------------------------------


def _check_priors(priors, n_vars: int, n_states: int) -> Optional[np.ndarray]:
    """Priors: None, an (N, A) array, or a per-variable list with None holes."""
    if priors is None:
        return None
    rows = []
    for i in range(n_vars):
        p = priors[i]
        if p is None:
            rows.append(np.zeros(n_states))
            continue
        p = np.asarray(p, dtype=float)
        if p.shape != (n_states,):
            raise GraphError(f"prior {i}: length {p.size} != alphabet size {n_states}")
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise GraphError(f"prior {i}: non-positive entry")
        rows.append(np.log(p))
    if len(priors) != n_vars:
        raise GraphError(f"expected {n_vars} priors, got {len(priors)}")
    return np.stack(rows)


def _uniform_state(log_singletons: np.ndarray, n_factors: int, log_prior) -> BeliefState:
    lead = log_singletons.shape[:-2]
    a = log_singletons.shape[-1]
    msgs = np.full(lead + (n_factors, 2, a), 1.0 / a)
    return BeliefState(msgs, np.log(msgs), log_singletons.copy(), log_prior)


def init_state(graph: FactorGraph, priors=None) -> BeliefState:
    """Uniform factor messages, surrogate singletons equal to the graph's."""
    log_prior = _check_priors(priors, graph.n_vars, graph.n_states)
    return _uniform_state(graph.log_singletons, graph.n_factors, log_prior)


# -- single-edge operations --------------------------------------------------------


def _side(graph: FactorGraph, k: int, i: int) -> int:
    f = graph.pairwise[k]
    if i == f.i:
        return 0
    if i == f.j:
        return 1
    raise GraphError(f"variable {i} is not an endpoint of factor {k}")


def variable_to_factor(state: BeliefState, graph: FactorGraph, j: int, k: int) -> np.ndarray:
    """Message from variable ``j`` into factor ``k`` (normalized, linear)."""
    if k not in graph.adjacency[j]:
        raise GraphError(f"factor {k} is not incident to variable {j}")
    own = 2 * k + _side(graph, k, j)
    slots = np.array(
        [s for s in _incoming_slots(graph.edges, graph.n_vars)[j] if s != own], dtype=np.intp
    )
    prior = None if state.log_prior is None else state.log_prior[j]
    flat = state.log_messages.reshape(-1, graph.n_states)
    return np.exp(_log_normalize(_to_factor_log(state.log_surrogate[j], prior, flat, slots)))


def factor_to_variable_update(state: BeliefState, graph: FactorGraph, k: int, i: int,
                              alpha: float, message_floor: float = 1e-12) -> np.ndarray:
    """Candidate new message from factor ``k`` to endpoint ``i``.

    The state is left untouched; the caller decides whether to commit.
    """
    side = _side(graph, k, i)
    f = graph.pairwise[k]
    other = f.j if side == 0 else f.i
    log_t = f.log_table if side == 0 else f.log_table.T
    into = np.log(variable_to_factor(state, graph, other, k))
    return _factor_message(
        log_t,
        state.log_messages[k, side],
        state.log_messages[k, 1 - side],
        into,
        alpha,
        message_floor,
    )


def singleton_refresh(state: BeliefState, graph: FactorGraph, i: int, alpha: float) -> np.ndarray:
    """Replace the surrogate singleton of ``i`` by normalized ``f^alpha * f~^(1-alpha)``."""
    mixed = alpha * graph.log_singletons[i] + (1.0 - alpha) * state.log_surrogate[i]
    state.log_surrogate[i] = _log_normalize(mixed)
    return np.exp(state.log_surrogate[i])


# -- sweeps ------------------------------------------------------------------------

UpdateHook = Callable[[int, int, int, np.ndarray], None]


def _sweep_loop(batch: GraphBatch, state: BeliefState, config: EngineConfig,
                hook: Optional[UpdateHook] = None) -> BatchReport:
    """Run sweeps in place on a batched state."""
    edges = batch.edges
    n_b, n_k, a = batch.size, len(edges), batch.n_states
    cavity = _cavity_slots(edges, batch.n_vars)
    log_t = batch.log_pairwise
    log_t_rev = np.swapaxes(log_t, -1, -2)
    rng = np.random.default_rng(config.seed)
    alpha, damping, floor = config.alpha, config.damping, config.message_floor

    active = np.ones(n_b, dtype=bool)
    converged = np.zeros(n_b, dtype=bool)
    sweeps_used = np.zeros(n_b, dtype=np.int64)
    final_residual = np.full(n_b, np.inf)
    msgs, log_msgs = state.messages, state.log_messages
    flat_log = log_msgs.reshape(n_b, 2 * n_k, a)

    for sweep in range(1, config.max_sweeps + 1):
        refreshed = _log_normalize(alpha * batch.log_singletons
                                   + (1.0 - alpha) * state.log_surrogate)
        state.log_surrogate[active] = refreshed[active]
        if config.schedule == "random":
            order = rng.permutation(n_k)
        else:
            order = range(n_k)
        all_active = bool(active.all())
        residual = np.zeros(n_b)
        for k in order:
            for side in (0, 1):
                src, slots = cavity[k][side]
                prior = None if state.log_prior is None else state.log_prior[:, src]
                into = _to_factor_log(state.log_surrogate[:, src], prior, flat_log, slots)
                table = log_t[:, k] if side == 0 else log_t_rev[:, k]
                new = _factor_message(table, log_msgs[:, k, side], log_msgs[:, k, 1 - side],
                                      into, alpha, floor)
                old = msgs[:, k, side]
                if damping:
                    new = (1.0 - damping) * new + damping * old
                    new /= _sum_last(new)[..., None]
                change = _max_last(np.abs(new - old))
                if all_active:
                    np.maximum(residual, change, out=residual)
                    msgs[:, k, side] = new
                    log_msgs[:, k, side] = np.log(new)
                else:
                    residual = np.where(active, np.maximum(residual, change), residual)
                    msgs[active, k, side] = new[active]
                    log_msgs[active, k, side] = np.log(new[active])
                if hook is not None:
                    hook(sweep, int(k), side, msgs[:, k, side])
        final_residual[active] = residual[active]
        sweeps_used[active] = sweep
        done = active & (residual <= config.tolerance)
        converged |= done
        active &= ~done
        if not active.any():
            break
    return BatchReport(converged, sweeps_used, final_residual)


def run_batch(batch: GraphBatch, config: EngineConfig = EngineConfig(),
              log_priors: Optional[np.ndarray] = None,
              hook: Optional[UpdateHook] = None) -> tuple[BeliefState, BatchReport]:
    """Run alpha-BP on every member of ``batch``.

    ``log_priors``, if given, is a ``(B, N, A)`` array of log prior tables.
    """
    if log_priors is not None:
        log_priors = np.asarray(log_priors, dtype=float)
        if log_priors.shape != batch.log_singletons.shape:
            raise GraphError("log_priors must match the batch singleton shape")
        if not np.all(np.isfinite(log_priors)):
            raise GraphError("log_priors must be finite")
    state = _uniform_state(batch.log_singletons, len(batch.edges), log_priors)
    report = _sweep_loop(batch, state, config, hook)
    return state, report


def run(graph: FactorGraph, config: EngineConfig = EngineConfig(), priors=None,
        hook: Optional[UpdateHook] = None) -> tuple[BeliefState, ConvergenceReport]:
    """Run alpha-BP on one graph until converged or out of sweeps.

    Non-convergence is reported, never raised.  ``hook(sweep, k, side, msg)``
    is called after every committed message.
    """
    state = init_state(graph, priors)
    batch = GraphBatch.from_graph(graph)
    bstate = BeliefState(
        state.messages[None], state.log_messages[None], state.log_surrogate[None],
        None if state.log_prior is None else state.log_prior[None],
    )
    single_hook = None
    if hook is not None:
        def single_hook(sweep, k, side, msg):
            hook(sweep, k, side, msg[0].copy())
    report = _sweep_loop(batch, bstate, config, single_hook)
    out = BeliefState(
        bstate.messages[0], bstate.log_messages[0], bstate.log_surrogate[0],
        None if bstate.log_prior is None else bstate.log_prior[0],
    )
    return out, report[0]


# -- read-out ----------------------------------------------------------------------


def marginals(state: BeliefState, graph_or_edges) -> np.ndarray:
    """Beliefs ``q_i`` for every variable; shape ``(..., N, A)``."""
    edges = getattr(graph_or_edges, "edges", graph_or_edges)
    return np.exp(_beliefs_log(state, np.asarray(edges)))


def marginal(state: BeliefState, graph: FactorGraph, i: int) -> np.ndarray:
    return marginals(state, graph)[..., i, :]


def map_decision(state: BeliefState, graph_or_edges) -> np.ndarray:
    """Per-variable argmax of the beliefs as alphabet indices.

    Ties go to the lowest index.
    """
    edges = getattr(graph_or_edges, "edges", graph_or_edges)
    return np.argmax(_beliefs_log(state, np.asarray(edges)), axis=-1)
