"""Monte-Carlo sweeps: Ising MAP mismatch and MIMO symbol-error rate.

Trial ``t`` of every sweep point draws its model from seed ``seed + t``, so
all methods at a point see the same instances and neighbouring points share
random numbers.  Trials run in lock-step batches through
:func:`alphabp.engine.run_batch`; a batch member's result does not depend
on which other trials share its batch.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from alphabp.engine import EngineConfig, map_decision, run_batch, stack_graphs
from alphabp.exact import MAX_STATES, EnumerationTooLarge, exact_map_batch
from alphabp.mmse import mmse_decide, mmse_log_prior_factors, mmse_posterior
from alphabp.models import (
    BINARY,
    ising_to_graph,
    mimo_to_graph,
    sample_ising,
    sample_mimo,
    snr_db,
)

log = logging.getLogger(__name__)

EXPERIMENTS = ("ising-mismatch", "mimo-ser")
DEFAULT_ALPHAS = (0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4)
DEFAULT_EDGE_PROBS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
# SNR 8, 10, 12, 14, 16 dB at N = 8 under snr_db's convention
DEFAULT_SIGMAS = (1.12602, 0.894427, 0.710469, 0.564345, 0.448275)
CSV_HEADER = ("sweep", "method", "alpha", "metric", "trials", "converged_frac")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "ising-mismatch"
    n_vars: Optional[int] = None
    n_receive: Optional[int] = None
    trials: int = 1000
    sweep: Optional[tuple[float, ...]] = None
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    tolerance: float = 1e-6
    max_sweeps: int = 50
    schedule: str = "fixed"
    damping: float = 0.0
    seed: int = 0
    prior: str = "none"
    mismatch: str = "hamming"
    covariance_scaling: str = "sigma"
    batch_size: int = 2500
    out: Optional[str] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.prior not in ("none", "mmse"):
            raise ValueError("prior must be 'none' or 'mmse'")
        if self.mismatch not in ("hamming", "vector"):
            raise ValueError("mismatch must be 'hamming' or 'vector'")
        if not self.alphas:
            raise ValueError("need at least one alpha")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        for v in self.sweep_values:
            if self.experiment == "ising-mismatch" and not 0.0 <= v <= 1.0:
                raise ValueError(f"edge probability {v} outside [0, 1]")
            if self.experiment == "mimo-ser" and not v > 0:
                raise ValueError(f"sigma_w {v} must be > 0")
        self.engine(1.0)  # validates the engine settings early

    @property
    def n(self) -> int:
        if self.n_vars is not None:
            return self.n_vars
        return 9 if self.experiment == "ising-mismatch" else 8

    @property
    def sweep_values(self) -> tuple[float, ...]:
        if self.sweep is not None:
            return tuple(self.sweep)
        return DEFAULT_EDGE_PROBS if self.experiment == "ising-mismatch" else DEFAULT_SIGMAS

    def engine(self, alpha: float) -> EngineConfig:
        return EngineConfig(
            alpha=alpha,
            max_sweeps=self.max_sweeps,
            tolerance=self.tolerance,
            schedule=self.schedule,
            seed=self.seed,
            damping=self.damping,
        )

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("sweep", "alphas"):
            if data.get(key) is not None:
                data[key] = tuple(float(v) for v in data[key])
        return cls(**data)

    def to_mapping(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ResultRow:
    sweep: float
    method: str
    alpha: Optional[float]
    metric: float
    trials: int
    converged_frac: float
    errors: int = field(default=0, compare=False)
    units: int = field(default=0, compare=False)


@dataclass
class ResultTable:
    rows: list[ResultRow]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow([
                _fmt(r.sweep),
                r.method,
                "" if r.alpha is None else _fmt(r.alpha),
                _fmt(r.metric),
                r.trials,
                _fmt(r.converged_frac),
            ])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())

    def select(self, sweep: float, method: str, alpha: Optional[float] = None) -> ResultRow:
        for r in self.rows:
            if r.sweep == sweep and r.method == method and (alpha is None or r.alpha == alpha):
                return r
        raise KeyError((sweep, method, alpha))


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _method_label(alpha: float) -> str:
    return "BP" if alpha == 1.0 else "alpha-BP"


def _ising_alphas(alphas) -> list[float]:
    alphas = [float(a) for a in alphas]
    return alphas if 1.0 in alphas else [1.0] + alphas


def _chunks(trials: int, size: int):
    for start in range(0, trials, size):
        yield start, min(trials, start + size)


def _check_enumeration(n: int) -> None:
    if 2**n > MAX_STATES:
        raise EnumerationTooLarge(f"n = {n} is too large for exact MAP by enumeration")


def run_ising_mismatch(config: ExperimentConfig) -> ResultTable:
    """Disagreement between alpha-BP decisions and the exact MAP assignment."""
    n = config.n
    _check_enumeration(n)
    alphas = _ising_alphas(config.alphas)
    edges = np.array([(i, j) for i in range(n) for j in range(i + 1, n)], dtype=np.intp)
    edges = edges.reshape(-1, 2)
    rows = []
    for p in config.sweep_values:
        errors = {a: 0 for a in alphas}
        conv = {a: 0 for a in alphas}
        for lo, hi in _chunks(config.trials, config.batch_size):
            graphs = [ising_to_graph(sample_ising(n, p, config.seed + t)) for t in range(lo, hi)]
            batch = stack_graphs(graphs, edges)
            truth = exact_map_batch(batch.log_singletons, batch.edges, batch.log_pairwise)
            for a in alphas:
                state, report = run_batch(batch, config.engine(a))
                wrong = map_decision(state, batch.edges) != truth
                if config.mismatch == "vector":
                    errors[a] += int(np.sum(wrong.any(axis=1)))
                else:
                    errors[a] += int(np.sum(wrong))
                conv[a] += int(np.sum(report.converged))
        units = config.trials * (1 if config.mismatch == "vector" else n)
        for a in alphas:
            rows.append(ResultRow(
                float(p), _method_label(a), a, errors[a] / units, config.trials,
                conv[a] / config.trials, errors[a], units,
            ))
        log.info("edge_prob=%g done", p)
    return ResultTable(rows)


def run_mimo_ser(config: ExperimentConfig) -> ResultTable:
    """Symbol-error rate of MAP, MMSE, BP and alpha-BP (optionally MMSE-primed)."""
    n = config.n
    m = config.n_receive if config.n_receive is not None else n
    _check_enumeration(n)
    alphas = [float(a) for a in config.alphas]
    methods: list[tuple[str, Optional[float], bool]] = [("MAP", None, False), ("MMSE", None, False)]
    methods.append(("BP", 1.0, False))
    methods += [("alpha-BP", a, False) for a in alphas if a != 1.0]
    if config.prior == "mmse":
        methods += [("alpha-BP+MMSE", a, True) for a in alphas]
    rows = []
    for sigma in config.sweep_values:
        errors = {key: 0 for key in methods}
        conv = {key: 0 for key in methods}
        for lo, hi in _chunks(config.trials, config.batch_size):
            instances = [sample_mimo(n, m, sigma, config.seed + t) for t in range(lo, hi)]
            batch = stack_graphs([mimo_to_graph(inst) for inst in instances])
            truth = np.stack([inst.x_true for inst in instances]) > 0
            posts = [mmse_posterior(inst, config.covariance_scaling) for inst in instances]
            for key in methods:
                label, a, primed = key
                if label == "MAP":
                    decided = exact_map_batch(batch.log_singletons, batch.edges,
                                              batch.log_pairwise)
                    n_conv = hi - lo
                elif label == "MMSE":
                    decided = np.stack([mmse_decide(p, BINARY) for p in posts])
                    n_conv = hi - lo
                else:
                    priors = None
                    if primed:
                        priors = np.stack([mmse_log_prior_factors(p, BINARY) for p in posts])
                    state, report = run_batch(batch, config.engine(a), log_priors=priors)
                    decided = map_decision(state, batch.edges)
                    n_conv = int(np.sum(report.converged))
                errors[key] += int(np.sum((BINARY[decided] > 0) != truth))
                conv[key] += n_conv
        units = config.trials * n
        for key in methods:
            label, a, _ = key
            rows.append(ResultRow(
                float(sigma), label, a, errors[key] / units, config.trials,
                conv[key] / config.trials, errors[key], units,
            ))
        log.info("sigma_w=%g (%.2f dB) done", sigma, snr_db(n, sigma))
    return ResultTable(rows)


def run_experiment(config: ExperimentConfig) -> ResultTable:
    if config.experiment == "ising-mismatch":
        table = run_ising_mismatch(config)
    else:
        table = run_mimo_ser(config)
    if config.out:
        table.write_csv(config.out)
    return table


def with_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Copy of ``config`` with every non-None override applied."""
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
