"""Repeated-trial experiments, risk-decay tables and runtime benchmarks."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import GGMError
from .model import derive_params, generate_model
from .oracle import expected_risks, make_oracle
from .recovery import (
    RecoveryMetrics,
    evaluate,
    recover_graph,
    threshold_graph,
    true_estimates,
)
from .sampler import draw_samples, normalize_for_node
from .sparsitron import default_beta, double_sample, fold_back, hedge_pass, run_sparsitron


def derive_seed(*parts: int) -> int:
    """Stable 63-bit seed for a (seed, trial, role, ...) tuple."""
    return int(np.random.SeedSequence([int(x) for x in parts]).generate_state(1, np.uint64)[0] >> 1)


# seed roles
_MODEL, _SAMPLES, _NODE = 0, 1, 2


@dataclass
class ExperimentConfig:
    p: int = 15
    degree: int = 3
    strength_range: tuple[float, float] = (0.4, 0.6)
    T: int = 20_000
    M: int = 2_000
    delta: float = 0.1
    trials: int = 20
    seed: int = 0
    candidate_stride: int = 1
    fresh_samples_per_node: bool = False
    perfect_input: bool = False
    output_path: str | None = None

    def __post_init__(self):
        self.strength_range = tuple(float(x) for x in self.strength_range)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.T < 1 or self.M < 1:
            raise ValueError("T and M must be >= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.candidate_stride < 1:
            raise ValueError("candidate_stride must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["strength_range"] = list(self.strength_range)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    trials: list[RecoveryMetrics]
    success_rate: float
    risk_decay: list[dict] = field(default_factory=list)  # trial, T, min_oracle_risk
    timing: list[dict] = field(default_factory=list)  # trial, p, seconds

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "trials": [m.to_dict() for m in self.trials],
            "success_rate": self.success_rate,
            "risk_decay": self.risk_decay,
            "timing": self.timing,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        return cls(
            config=ExperimentConfig.from_dict(data["config"]),
            trials=[RecoveryMetrics.from_dict(m) for m in data["trials"]],
            success_rate=float(data["success_rate"]),
            risk_decay=[dict(r) for r in data["risk_decay"]],
            timing=[dict(r) for r in data["timing"]],
        )

    def without_timing(self) -> dict:
        d = self.to_dict()
        d.pop("timing")
        return d


def decay_checkpoints(T: int) -> list[int]:
    points = sorted({max(1, T // 8), max(1, T // 4), max(1, T // 2), T})
    return points


def prefix_min_oracle_risk(model, node, result, checkpoints) -> list[float]:
    """min over played candidates up to each checkpoint of the raw-scale oracle risk of lam * p^t."""
    oracle = make_oracle(model, node)
    lam = derive_params(model).lam
    risks = expected_risks(oracle, fold_back(lam * result.candidates))
    running = np.minimum.accumulate(risks)
    steps = result.steps
    out = []
    for cp in checkpoints:
        k = np.searchsorted(steps, cp, side="right") - 1
        out.append(float(running[max(k, 0)]))
    return out


def run_trial(config: ExperimentConfig, k: int):
    model = generate_model(
        config.p, config.degree, config.strength_range, derive_seed(config.seed, k, _MODEL)
    )
    params = derive_params(model)
    # a trial graph without edges still needs a threshold
    kappa = params.kappa if params.kappa is not None else config.strength_range[0]
    t0 = time.perf_counter()
    if config.perfect_input:
        estimates = true_estimates(model)
        graph = threshold_graph(estimates, kappa)
    else:
        m = config.T + config.M
        if config.fresh_samples_per_node:
            source = lambda i: draw_samples(model, m, derive_seed(config.seed, k, _NODE, i))  # noqa: E731
        else:
            source = draw_samples(model, m, derive_seed(config.seed, k, _SAMPLES))
        graph, estimates = recover_graph(
            source,
            params,
            config.T,
            config.M,
            config.delta,
            p=model.p,
            kappa=kappa,
            stride=config.candidate_stride,
            keep_results=True,
        )
    seconds = time.perf_counter() - t0
    metrics = evaluate(graph, model, estimates)
    decay = []
    if not config.perfect_input:
        cps = decay_checkpoints(config.T)
        per_node = np.array(
            [prefix_min_oracle_risk(model, e.node, e.result, cps) for e in estimates]
        )
        decay = [
            {"trial": k, "T": cp, "min_oracle_risk": float(x)}
            for cp, x in zip(cps, per_node.mean(axis=0))
        ]
        for e in estimates:
            e.result = None
    return model, estimates, metrics, decay, seconds


def run_experiment(config: ExperimentConfig, progress=None) -> ExperimentReport:
    trials, decay, timing = [], [], []
    for k in range(config.trials):
        try:
            _, _, metrics, rows, seconds = run_trial(config, k)
        except (GGMError, ValueError) as exc:
            raise type(exc)(f"trial {k}: {exc}") from exc
        except Exception as exc:
            raise RuntimeError(f"trial {k} failed: {exc}") from exc
        trials.append(metrics)
        decay.extend(rows)
        timing.append({"trial": k, "p": config.p, "seconds": seconds})
        if progress is not None:
            progress(k, metrics)
    success = sum(m.exact_match for m in trials) / config.trials
    return ExperimentReport(config, trials, success, decay, timing)


def write_experiment(report: ExperimentReport, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out / "report.json",
        "metrics": out / "metrics.csv",
        "trials": out / "trials.csv",
        "risk_decay": out / "risk_decay.csv",
        "timing": out / "timing.csv",
    }
    paths["report"].write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    exact = sum(m.exact_match for m in report.trials)
    summary = [
        ("trials", len(report.trials)),
        ("exact_matches", exact),
        ("success_rate", report.success_rate),
        ("mean_missed_edges", float(np.mean([m.missed_edges for m in report.trials]))),
        ("mean_extra_edges", float(np.mean([m.extra_edges for m in report.trials]))),
    ]
    _write_rows(paths["metrics"], ["key", "value"], summary)
    _write_rows(
        paths["trials"],
        ["trial", "exact_match", "missed_edges", "extra_edges", "max_linf"],
        [
            (k, m.exact_match, m.missed_edges, m.extra_edges, _max_or_blank(m.linf_errors))
            for k, m in enumerate(report.trials)
        ],
    )
    _write_rows(
        paths["risk_decay"],
        ["trial", "T", "min_oracle_risk"],
        [(r["trial"], r["T"], r["min_oracle_risk"]) for r in report.risk_decay],
    )
    _write_rows(
        paths["timing"],
        ["trial", "p", "seconds"],
        [(r["trial"], r["p"], r["seconds"]) for r in report.timing],
    )
    return paths


def read_experiment(path) -> ExperimentReport:
    return ExperimentReport.from_dict(json.loads(Path(path).read_text()))


def _max_or_blank(values):
    vals = [v for v in values if v is not None]
    return max(vals) if vals else ""


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def warm_up() -> None:
    """Trigger JIT compilation so it is not billed to the first timed run."""
    x = double_sample(np.zeros((2, 1)))
    run_sparsitron(x, np.zeros(2), x, np.zeros(2), 1.0)


def bench_learn(p_list, T: int, M: int, seed: int, *, degree: int = 3, repeats: int = 1):
    """Wall-clock of learning every node, per p; min over ``repeats``."""
    warm_up()
    rows = []
    for p in p_list:
        model = generate_model(p, min(degree, p - 1), (0.4, 0.6), derive_seed(seed, p, _MODEL))
        params = derive_params(model)
        block = draw_samples(model, T + M, derive_seed(seed, p, _SAMPLES))
        best = None
        for _ in range(repeats):
            t0 = time.perf_counter()
            _, estimates = recover_graph(block, params, T, M, 0.1, kappa=params.kappa or 0.4)
            total = time.perf_counter() - t0
            row = {
                "p": p,
                "total_seconds": total,
                "per_node_seconds": total / p,
                "hedge_seconds": sum(e.hedge_seconds for e in estimates),
                "score_seconds": sum(e.score_seconds for e in estimates),
            }
            if best is None or row["total_seconds"] < best["total_seconds"]:
                best = row
        rows.append(best)
    return rows


def bench_hedge_phase(p: int, T_list, seed: int, *, repeats: int = 3) -> list[dict]:
    """Online-phase time for one node at each T (no risk scoring)."""
    warm_up()
    model = generate_model(p, min(3, p - 1), (0.4, 0.6), derive_seed(seed, p, _MODEL))
    params = derive_params(model)
    block = draw_samples(model, max(T_list), derive_seed(seed, p, _SAMPLES))
    rows = []
    for T in T_list:
        view = normalize_for_node(block.rows(0, T), 0, params, T, 0.1)
        x = np.ascontiguousarray(double_sample(view.x_tilde))
        y = np.ascontiguousarray(view.y_tilde)
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            hedge_pass(x, y, params.lam, 0.99)
            times.append(time.perf_counter() - t0)
        rows.append({"p": p, "T": T, "hedge_seconds": min(times)})
    return rows


def min_candidate_risk(model, block, node: int, T: int, delta: float) -> float:
    """Smallest raw-scale oracle risk of lam * p^t over one fresh online pass of length T.

    Uses the default step size for this T, so separate calls trace risk against horizon.
    """
    params = derive_params(model)
    view = normalize_for_node(block.rows(0, T), node, params, T, delta / model.p)
    x = double_sample(view.x_tilde)
    candidates, _ = hedge_pass(x, view.y_tilde, params.lam, default_beta(T, x.shape[1]))
    oracle = make_oracle(model, node)
    return float(expected_risks(oracle, fold_back(params.lam * candidates)).min())


def risk_decay_curve(model, T_list, seed: int, delta: float = 0.1) -> list[dict]:
    """Node-averaged :func:`min_candidate_risk` at each horizon, one shared sample pool."""
    block = draw_samples(model, max(T_list), seed)
    rows = []
    for T in T_list:
        risks = [min_candidate_risk(model, block, i, T, delta) for i in range(model.p)]
        rows.append({"T": T, "min_oracle_risk": float(np.mean(risks))})
    return rows
