"""Exact risk quantities for a known model, used as ground truth in tests and experiments.

Risks are reported in the raw sample scale; the normalized scale is reached by
multiplying with ``scale**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .model import PrecisionModel, weight_vector


@dataclass(frozen=True)
class RiskOracle:
    node: int
    sub_cov: np.ndarray  # covariance of the other p-1 variables
    w: np.ndarray
    theta_ii: float
    scale: float = 1.0

    @property
    def xi(self) -> float:
        """Expected conditional variance of the normalized target, scale^2 / theta_ii."""
        return self.scale**2 / self.theta_ii


def make_oracle(model: PrecisionModel, i: int, scale: float = 1.0) -> RiskOracle:
    others = np.arange(model.p) != i
    return RiskOracle(
        node=i,
        sub_cov=model.sigma[np.ix_(others, others)],
        w=weight_vector(model, i),
        theta_ii=float(model.theta[i, i]),
        scale=scale,
    )


def expected_risk(oracle: RiskOracle, v) -> float:
    """E[((v - w) . X_rest)^2] = (v - w)' Sigma_rest (v - w)."""
    v = np.asarray(v, dtype=float)
    if v.shape != oracle.w.shape:
        raise DimensionMismatch(f"v has shape {v.shape}, expected {oracle.w.shape}")
    diff = v - oracle.w
    return max(float(diff @ oracle.sub_cov @ diff), 0.0)


def expected_risks(oracle: RiskOracle, vs) -> np.ndarray:
    """Row-wise :func:`expected_risk` for a stack of candidate vectors."""
    diff = np.asarray(vs, dtype=float) - oracle.w
    return np.maximum(np.einsum("ij,jk,ik->i", diff, oracle.sub_cov, diff), 0.0)


def risk_identity_check(oracle: RiskOracle, v, a, b) -> float:
    """|empirical risk - (scale^2 * expected risk + xi)| on undoubled normalized pairs (a, b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    empirical = float(np.mean((a @ np.asarray(v, dtype=float) - b) ** 2))
    return abs(empirical - oracle.scale**2 * expected_risk(oracle, v) - oracle.xi)


def linf_bound(oracle: RiskOracle, v, theta_max: float) -> float:
    return math.sqrt(expected_risk(oracle, v) * theta_max)
