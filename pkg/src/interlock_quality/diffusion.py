"""Discrete-time synchronous SIR cascades on a firm graph."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ._seeding import derive_rng
from ._validation import check_fraction, check_positive_int, check_probability
from .exceptions import EmptyGraph
from .graph import FirmGraph

SUSCEPTIBLE, INFECTED, RECOVERED = 0, 1, 2
_RUN_CHUNK = 50


@dataclass(frozen=True)
class SirParams:
    beta: float = 0.5
    gamma: float = 0.3
    ensemble: int = 1000
    max_iter: int = 10_000
    seed: int = 0
    dieoff_threshold: float = 0.01

    def __post_init__(self):
        check_probability(self.beta, "beta")
        check_probability(self.gamma, "gamma")
        check_positive_int(self.ensemble, "ensemble")
        check_positive_int(self.max_iter, "max_iter")
        check_fraction(self.dieoff_threshold, "dieoff_threshold", high_closed=False)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SirTrajectory:
    """Counts per iteration; index 0 is the state right after seeding."""

    S: np.ndarray
    I: np.ndarray
    R: np.ndarray
    seed_node: int

    @property
    def n(self) -> int:
        return int(self.S[0] + self.I[0] + self.R[0])

    @property
    def final_size(self) -> float:
        """Fraction of nodes ever infected."""
        return float(self.n - self.S[-1]) / self.n

    @property
    def iterations(self) -> int:
        return len(self.S) - 1


def _gather_neighbors(indptr: np.ndarray, indices: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    starts = indptr[nodes]
    lens = indptr[nodes + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return indices[:0]
    offsets = np.repeat(starts - np.cumsum(lens) + lens, lens)
    return indices[offsets + np.arange(total)]


def sir_run(g: FirmGraph, params: SirParams, seed_node: int | None = None,
            rng: np.random.Generator | int | None = None) -> SirTrajectory:
    """One synchronous SIR cascade.

    Each iteration every infected node tries to infect each susceptible
    neighbour with probability ``beta`` and then recovers with probability
    ``gamma``. Nodes infected during an iteration start spreading on the
    next one. Stops when nobody is infected or after ``max_iter`` iterations.
    """
    n = g.n_nodes
    if n == 0:
        raise EmptyGraph("cannot run SIR on an empty graph")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    indptr, indices = g.csr
    if seed_node is None:
        seed_node = int(rng.integers(n))
    elif not 0 <= seed_node < n:
        raise ValueError(f"seed node {seed_node} out of range")
    state = np.zeros(n, dtype=np.int8)
    state[seed_node] = INFECTED
    S, I, R = [n - 1], [1], [0]
    infected = np.array([seed_node], dtype=np.int64)
    it = 0
    while len(infected) and it < params.max_iter:
        it += 1
        targets = _gather_neighbors(indptr, indices, infected)
        targets = targets[state[targets] == SUSCEPTIBLE]
        hit = targets[rng.random(len(targets)) < params.beta]
        newly = np.unique(hit)
        recovered = infected[rng.random(len(infected)) < params.gamma]
        state[recovered] = RECOVERED
        state[newly] = INFECTED
        infected = np.flatnonzero(state == INFECTED)
        S.append(S[-1] - len(newly))
        I.append(len(infected))
        R.append(R[-1] + len(recovered))
    return SirTrajectory(np.array(S), np.array(I), np.array(R), int(seed_node))


@dataclass
class SirEnsembleSummary:
    mean_S: np.ndarray
    mean_I: np.ndarray
    mean_R: np.ndarray
    final_sizes: np.ndarray
    dieoff_fraction: float
    params: SirParams
    n_nodes: int

    @property
    def mean_final_recovered(self) -> float:
        return float(self.final_sizes.mean())

    @property
    def final_size_stderr(self) -> float:
        k = len(self.final_sizes)
        return float(self.final_sizes.std(ddof=1) / np.sqrt(k)) if k > 1 else 0.0

    def final_size_histogram(self, bins: int = 20) -> list[int]:
        counts, _ = np.histogram(self.final_sizes, bins=bins, range=(0.0, 1.0))
        return counts.tolist()

    def to_dict(self) -> dict:
        return {
            "dieoff_fraction": self.dieoff_fraction,
            "mean_final_recovered": self.mean_final_recovered,
            "final_size_stderr": self.final_size_stderr,
            "final_size_histogram": self.final_size_histogram(),
            "iterations": len(self.mean_S) - 1,
            "n_nodes": self.n_nodes,
            "params": self.params.to_dict(),
        }

    def write_trajectory_csv(self, path, fmt=lambda x: f"{x:.12g}") -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "mean_S", "mean_I", "mean_R"])
            for t in range(len(self.mean_S)):
                w.writerow([t, fmt(self.mean_S[t]), fmt(self.mean_I[t]), fmt(self.mean_R[t])])


def _run_chunk(g: FirmGraph, params: SirParams, runs: range) -> list[SirTrajectory]:
    return [sir_run(g, params, None, derive_rng(params.seed, "sir-run", r)) for r in runs]


def _pad(series: list[np.ndarray], length: int) -> np.ndarray:
    out = np.empty((len(series), length))
    for i, s in enumerate(series):
        out[i, :len(s)] = s
        out[i, len(s):] = s[-1]
    return out


def ensemble_runs(g: FirmGraph, params: SirParams, threads: int = 1) -> list[SirTrajectory]:
    """All ``params.ensemble`` trajectories, in run order.

    Run ``r`` draws its seed node and coin flips from a stream derived from
    ``(params.seed, r)``, so results are identical for any ``threads``.
    """
    if g.n_nodes == 0:
        raise EmptyGraph("cannot run SIR on an empty graph")
    chunks = [range(s, min(s + _RUN_CHUNK, params.ensemble)) for s in range(0, params.ensemble, _RUN_CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _run_chunk(g, params, c), chunks))
    else:
        parts = [_run_chunk(g, params, c) for c in chunks]
    return [t for p in parts for t in p]


def sir_ensemble(g: FirmGraph, params: SirParams, threads: int = 1) -> SirEnsembleSummary:
    """Run ``params.ensemble`` independent cascades and summarise them.

    Trajectories are aligned by iteration and padded with their final state.
    """
    runs = ensemble_runs(g, params, threads)
    length = max(len(t.S) for t in runs)
    n = g.n_nodes
    S = _pad([t.S for t in runs], length) / n
    I = _pad([t.I for t in runs], length) / n
    R = _pad([t.R for t in runs], length) / n
    finals = np.array([t.final_size for t in runs])
    return SirEnsembleSummary(
        S.mean(axis=0), I.mean(axis=0), R.mean(axis=0), finals,
        float(np.mean(finals < params.dieoff_threshold)), params, n,
    )
