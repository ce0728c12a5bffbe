"""Graph recovery: one Sparsitron run per node, then symmetric thresholding at 2*kappa/3."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, InsufficientSamples, MalformedInput
from .model import ModelParams, PrecisionModel, weight_vector
from .sampler import SampleBlock, normalize_for_node
from .sparsitron import SparsitronResult, double_sample, run_sparsitron


@dataclass
class NeighborhoodEstimate:
    node: int
    weights: np.ndarray  # signed, over the other nodes in ascending order
    risk: float = 0.0  # empirical risk of the selected candidate (normalized scale)
    t_star: int = 0
    n_out_of_range: int = 0
    scale: float = 1.0
    hedge_seconds: float = 0.0
    score_seconds: float = 0.0
    result: SparsitronResult | None = None


def learn_node(
    samples: SampleBlock,
    i: int,
    params: ModelParams,
    T: int,
    M: int,
    delta: float,
    *,
    stride: int = 1,
    keep_result: bool = False,
) -> NeighborhoodEstimate:
    """Estimate the neighborhood weight vector of node ``i``.

    The first ``T`` rows feed the online phase and the next ``M`` rows score the
    candidates; both use the same normalization, which depends on ``T`` only.
    """
    if samples.m < T + M:
        raise InsufficientSamples(f"need T + M = {T + M} samples, have {samples.m}")
    view = normalize_for_node(samples.rows(0, T + M), i, params, T, delta)
    x = double_sample(view.x_tilde)
    res = run_sparsitron(
        x[:T], view.y_tilde[:T], x[T:], view.y_tilde[T:], params.lam, stride=stride
    )
    return NeighborhoodEstimate(
        node=i,
        weights=res.weights,
        risk=res.risk,
        t_star=res.t_star,
        n_out_of_range=res.n_out_of_range,
        scale=view.scale,
        hedge_seconds=res.hedge_seconds,
        score_seconds=res.score_seconds,
        result=res if keep_result else None,
    )


@dataclass
class GraphEstimate:
    p: int
    adjacency: np.ndarray  # symmetric bool, false diagonal
    evidence: np.ndarray  # max(|v^i_j|, |v^j_i|)
    threshold: float

    def edges(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(np.triu(self.adjacency, k=1))
        return [(int(i), int(j)) for i, j in zip(rows, cols)]


def _full_matrix(estimates: Sequence[NeighborhoodEstimate], p: int) -> np.ndarray:
    full = np.zeros((p, p))
    for est in estimates:
        weights = np.asarray(est.weights, dtype=float)
        if weights.shape != (p - 1,):
            raise DimensionMismatch(f"node {est.node}: expected {p - 1} weights")
        others = np.arange(p) != est.node
        full[est.node, others] = weights
    return full


def threshold_graph(estimates: Sequence[NeighborhoodEstimate], kappa: float) -> GraphEstimate:
    p = len(estimates)
    if sorted(e.node for e in estimates) != list(range(p)):
        raise DimensionMismatch("need exactly one estimate per node")
    full = np.abs(_full_matrix(estimates, p))
    evidence = np.maximum(full, full.T)
    threshold = 2.0 * kappa / 3.0
    adjacency = evidence >= threshold
    np.fill_diagonal(adjacency, False)
    return GraphEstimate(p=p, adjacency=adjacency, evidence=evidence, threshold=threshold)


def true_estimates(model: PrecisionModel) -> list[NeighborhoodEstimate]:
    """Exact weight vectors packaged as estimates (perfect-input mode)."""
    return [NeighborhoodEstimate(node=i, weights=weight_vector(model, i)) for i in range(model.p)]


@dataclass
class RecoveryMetrics:
    exact_match: bool
    missed_edges: int
    extra_edges: int
    linf_errors: list[float | None]

    def to_dict(self) -> dict:
        return {
            "exact_match": self.exact_match,
            "missed_edges": self.missed_edges,
            "extra_edges": self.extra_edges,
            "linf_errors": list(self.linf_errors),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RecoveryMetrics":
        return cls(
            exact_match=bool(data["exact_match"]),
            missed_edges=int(data["missed_edges"]),
            extra_edges=int(data["extra_edges"]),
            linf_errors=[None if x is None else float(x) for x in data["linf_errors"]],
        )


def evaluate(
    estimate: GraphEstimate,
    truth: PrecisionModel,
    estimates: Sequence[NeighborhoodEstimate] | None = None,
) -> RecoveryMetrics:
    """Compare with the true support; l_inf errors need the per-node estimates."""
    if estimate.p != truth.p:
        raise DimensionMismatch(f"estimate has p={estimate.p}, truth p={truth.p}")
    true_adj = truth.adjacency()
    upper = np.triu(np.ones_like(true_adj), k=1)
    missed = int(np.sum(true_adj & ~estimate.adjacency & upper))
    extra = int(np.sum(estimate.adjacency & ~true_adj & upper))
    linf: list[float | None] = [None] * truth.p
    for est in estimates or ():
        linf[est.node] = float(np.abs(est.weights - weight_vector(truth, est.node)).max(initial=0.0))
    return RecoveryMetrics(
        exact_match=missed == 0 and extra == 0,
        missed_edges=missed,
        extra_edges=extra,
        linf_errors=linf,
    )


SampleSource = Union[SampleBlock, Callable[[int], SampleBlock]]


def recover_graph(
    samples: SampleSource,
    params: ModelParams,
    T: int,
    M: int,
    delta: float,
    *,
    p: int | None = None,
    kappa: float | None = None,
    stride: int = 1,
    keep_results: bool = False,
) -> tuple[GraphEstimate, list[NeighborhoodEstimate]]:
    """Learn every node and threshold.

    ``samples`` is either one shared block or a callable ``i -> SampleBlock``
    giving each node its own block. The failure budget ``delta`` is split evenly
    over the nodes.
    """
    if isinstance(samples, SampleBlock):
        shared = samples
        source = lambda i: shared  # noqa: E731
        p = shared.p
    else:
        source = samples
        if p is None:
            raise ValueError("p is required with a per-node sample source")
    kappa = params.require_kappa() if kappa is None else kappa
    node_delta = delta / p
    estimates = [
        learn_node(source(i), i, params, T, M, node_delta, stride=stride, keep_result=keep_results)
        for i in range(p)
    ]
    return threshold_graph(estimates, kappa), estimates


def report_dict(
    graph: GraphEstimate,
    estimates: Sequence[NeighborhoodEstimate],
    metrics: RecoveryMetrics | None = None,
) -> dict:
    linf = metrics.linf_errors if metrics is not None else [None] * graph.p
    return {
        "adjacency": graph.adjacency.astype(bool).tolist(),
        "evidence": graph.evidence.tolist(),
        "threshold": graph.threshold,
        "metrics": None if metrics is None else metrics.to_dict(),
        "per_node": [
            {"i": est.node, "risk": est.risk, "linf": linf[est.node], "t_star": est.t_star}
            for est in estimates
        ],
    }


def write_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=1) + "\n")


def read_report(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: {exc}") from exc
