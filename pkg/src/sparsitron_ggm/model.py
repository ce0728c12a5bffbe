"""Sparse Gaussian graphical models: ground truth, random instances, derived parameters."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyGraph, InfeasibleDegree, MalformedInput, NotPositiveDefinite


@dataclass(frozen=True, eq=False)
class PrecisionModel:
    """Zero-mean Gaussian N(0, sigma) described by its precision matrix ``theta``.

    ``edges`` is the off-diagonal support of ``theta`` as sorted ``(i, j)`` pairs with ``i < j``.
    Build instances through :meth:`from_theta`, which validates and inverts.
    """

    p: int
    theta: np.ndarray
    sigma: np.ndarray
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_theta(cls, theta) -> "PrecisionModel":
        theta = np.array(theta, dtype=float)
        if theta.ndim != 2 or theta.shape[0] != theta.shape[1] or theta.shape[0] < 1:
            raise MalformedInput(f"theta must be square, got shape {theta.shape}")
        scale = max(np.abs(theta).max(), 1.0)
        if np.abs(theta - theta.T).max() > 1e-12 * scale:
            raise MalformedInput("theta is not symmetric")
        theta = 0.5 * (theta + theta.T)
        try:
            chol = np.linalg.cholesky(theta)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite("theta is not positive definite") from exc
        inv_chol = np.linalg.inv(chol)
        sigma = inv_chol.T @ inv_chol
        sigma = 0.5 * (sigma + sigma.T)
        p = theta.shape[0]
        rows, cols = np.nonzero(np.triu(theta, k=1))
        edges = tuple((int(i), int(j)) for i, j in zip(rows, cols))
        theta.setflags(write=False)
        sigma.setflags(write=False)
        return cls(p=p, theta=theta, sigma=sigma, edges=edges)

    def adjacency(self) -> np.ndarray:
        adj = self.theta != 0
        np.fill_diagonal(adj, False)
        return adj

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)

    def __eq__(self, other):
        if not isinstance(other, PrecisionModel):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.theta, other.theta)

    def __hash__(self):
        return hash((self.p, self.theta.tobytes()))


@dataclass(frozen=True)
class ModelParams:
    """Scalars consumed by the learner.

    kappa is ``None`` for a graph without edges.
    """

    kappa: float | None
    lam: float
    theta_max: float
    nu_max: float
    d: int = 0

    def require_kappa(self) -> float:
        if self.kappa is None:
            raise EmptyGraph("kappa is undefined for a graph without edges")
        return self.kappa

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "lambda": self.lam,
            "theta_max": self.theta_max,
            "nu_max": self.nu_max,
            "d": self.d,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        try:
            kappa = data.get("kappa")
            return cls(
                kappa=None if kappa is None else float(kappa),
                lam=float(data["lambda"]),
                theta_max=float(data["theta_max"]),
                nu_max=float(data["nu_max"]),
                d=int(data.get("d", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad params record: {exc}") from exc


def node_lambdas(theta: np.ndarray) -> np.ndarray:
    """Per-node l1 norms sum_{j != i} |theta_ij / theta_ii|."""
    diag = np.diag(theta)
    off = np.abs(theta).sum(axis=1) - np.abs(diag)
    return off / diag


def derive_params(model: PrecisionModel) -> ModelParams:
    theta = model.theta
    diag = np.diag(theta)
    if model.edges:
        kappa = float(
            min(abs(theta[i, j]) / math.sqrt(diag[i] * diag[j]) for i, j in model.edges)
        )
    else:
        kappa = None
    return ModelParams(
        kappa=kappa,
        lam=float(node_lambdas(theta).max()),
        theta_max=float(diag.max()),
        nu_max=float(np.diag(model.sigma).max()),
        d=int(model.degrees().max()),
    )


def weight_vector(model: PrecisionModel, i: int) -> np.ndarray:
    """Coefficients of E[X_i | X_rest] over the other nodes in ascending order."""
    if not 0 <= i < model.p:
        raise IndexError(f"node {i} out of range for p={model.p}")
    row = model.theta[i]
    others = np.arange(model.p) != i
    return -row[others] / row[i]


def _is_pd_with_margin(k: np.ndarray, floor: float) -> bool:
    try:
        np.linalg.cholesky(k - floor * np.eye(k.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


def generate_model(
    p: int,
    degree: int,
    strength_range: tuple[float, float],
    seed: int,
    *,
    diag_range: tuple[float, float] = (1.0, 2.0),
    edge_prob: float = 1.0,
    pd_floor: float = 0.1,
) -> PrecisionModel:
    """Random degree-bounded sparse model with prescribed normalized edge strengths.

    Node pairs are visited in random order. A pair is proposed (with probability
    ``edge_prob``) when both endpoints are below ``degree``, given a signed
    normalized strength drawn uniformly from ``strength_range``, and kept only if
    the unit-diagonal matrix stays positive definite with smallest eigenvalue
    above ``pd_floor``. The result is rescaled as ``D K D`` with ``D_ii**2``
    uniform in ``diag_range``, which leaves every normalized strength unchanged.
    """
    lo, hi = strength_range
    if p < 2:
        raise ValueError("p must be at least 2")
    if not 0 < lo <= hi < 1:
        raise ValueError(f"strength_range must lie inside (0, 1), got {strength_range}")
    if degree < 0 or degree >= p:
        raise InfeasibleDegree(f"no graph on {p} nodes has maximal degree {degree}")
    if not 0 < diag_range[0] <= diag_range[1]:
        raise ValueError("diag_range must be positive")

    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(p, k=1)
    order = rng.permutation(len(iu))
    k = np.eye(p)
    deg = np.zeros(p, dtype=int)
    for idx in order:
        i, j = int(iu[idx]), int(ju[idx])
        if deg[i] >= degree or deg[j] >= degree:
            continue
        if edge_prob < 1.0 and rng.random() >= edge_prob:
            continue
        s = rng.uniform(lo, hi) * (1.0 if rng.random() < 0.5 else -1.0)
        k[i, j] = k[j, i] = s
        if _is_pd_with_margin(k, pd_floor):
            deg[i] += 1
            deg[j] += 1
        else:
            k[i, j] = k[j, i] = 0.0
    scales = np.sqrt(rng.uniform(diag_range[0], diag_range[1], size=p))
    theta = scales[:, None] * k * scales[None, :]
    return PrecisionModel.from_theta(theta)


def model_to_dict(model: PrecisionModel, params: ModelParams | None = None) -> dict:
    params = derive_params(model) if params is None else params
    return {
        "p": model.p,
        "theta": [float(x) for x in model.theta.ravel()],
        "edges": [[i, j] for i, j in model.edges],
        "params": params.to_dict(),
    }


def save_model(model: PrecisionModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def model_from_dict(data: dict) -> PrecisionModel:
    try:
        p = int(data["p"])
        theta = np.asarray(data["theta"], dtype=float).reshape(p, p)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"bad model record: {exc}") from exc
    model = PrecisionModel.from_theta(theta)
    if "edges" in data:
        listed = sorted(tuple(sorted(map(int, e))) for e in data["edges"])
        if listed != sorted(model.edges):
            raise MalformedInput("edge list does not match the support of theta")
    return model


def load_model(path) -> PrecisionModel:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: {exc}") from exc
    return model_from_dict(data)
