"""Hedge-based sparse linear regression (Sparsitron) over the doubled coordinate space.

A signed weight vector ``w`` with ``||w||_1 <= lam`` is represented by a
nonnegative vector over ``[x, -x, 0]`` whose l1 norm is exactly ``lam``; Hedge
runs over those ``2n + 1`` experts and the result is folded back to ``n`` signed
coordinates.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import BudgetExceeded, DimensionMismatch


def double_sample(x) -> np.ndarray:
    """``[x, -x, 0]`` along the last axis; accepts one sample or a matrix of rows."""
    x = np.asarray(x, dtype=float)
    zero = np.zeros(x.shape[:-1] + (1,))
    return np.concatenate([x, -x, zero], axis=-1)


def double_weights(w, lam: float) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    norm = float(np.abs(w).sum())
    if norm > lam:
        raise BudgetExceeded(f"||w||_1 = {norm} exceeds budget {lam}")
    return np.concatenate([np.maximum(w, 0.0), np.maximum(-w, 0.0), [lam - norm]])


def fold_back(entries) -> np.ndarray:
    entries = np.asarray(entries, dtype=float)
    n = (entries.shape[-1] - 1) // 2
    if entries.shape[-1] != 2 * n + 1:
        raise DimensionMismatch("doubled vectors have odd length 2n + 1")
    return entries[..., :n] - entries[..., n : 2 * n]


def make_loss(p_t, x_tilde, y_tilde: float, lam: float) -> np.ndarray:
    """Loss vector (1 + (lam p.x - y) x) / 2; deliberately not clamped to [0, 1]."""
    p_t = np.asarray(p_t, dtype=float)
    x_tilde = np.asarray(x_tilde, dtype=float)
    residual = lam * float(p_t @ x_tilde) - y_tilde
    return 0.5 * (1.0 + residual * x_tilde)


def default_beta(T: int, n_doubled: int) -> float:
    if T < 1 or n_doubled < 2:
        raise ValueError("need T >= 1 and at least two experts")
    return 1.0 / (1.0 + math.sqrt(math.log(n_doubled) / T))


@dataclass
class HedgeState:
    """Multiplicative-weights state.

    ``v`` is kept normalized (sum 1), so it is also the distribution played in
    the next round. ``candidates`` holds the distributions played so far, one
    per completed step. Mutable; :func:`hedge_step` updates it in place.
    """

    v: np.ndarray
    beta: float
    lam: float = 1.0
    t: int = 0
    candidates: list = field(default_factory=list)

    @classmethod
    def uniform(cls, n: int, beta: float, lam: float = 1.0) -> "HedgeState":
        return cls(v=np.full(n, 1.0 / n), beta=beta, lam=lam)

    @property
    def p(self) -> np.ndarray:
        return self.v / self.v.sum()


def hedge_step(state: HedgeState, loss) -> HedgeState:
    if not 0.0 < state.beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    loss = np.asarray(loss, dtype=float)
    if loss.shape != state.v.shape:
        raise DimensionMismatch(f"loss has shape {loss.shape}, weights {state.v.shape}")
    state.candidates.append(state.p)
    v = state.v * np.exp(loss * math.log(state.beta))
    state.v = v / v.sum()
    state.t += 1
    return state


@numba.njit(cache=True)
def _hedge_pass(x, y, lam, log_beta, stride, out):
    """T Hedge steps over doubled samples; writes every ``stride``-th played p into ``out``.

    Returns the number of loss entries that fell outside [0, 1].
    """
    T, N = x.shape
    v = np.full(N, 1.0 / N)
    n_out = 0
    k = 0
    for t in range(T):
        total = 0.0
        for j in range(N):
            total += v[j]
        pred = 0.0
        for j in range(N):
            v[j] /= total
            pred += v[j] * x[t, j]
        if t % stride == 0:
            for j in range(N):
                out[k, j] = v[j]
            k += 1
        residual = lam * pred - y[t]
        for j in range(N):
            loss = 0.5 * (1.0 + residual * x[t, j])
            if loss < 0.0 or loss > 1.0:
                n_out += 1
            v[j] *= math.exp(loss * log_beta)
    return n_out


def hedge_pass(x_doubled, y, lam: float, beta: float, stride: int = 1):
    """Run the online phase; returns ``(candidates, n_out_of_range)``.

    ``candidates[k]`` is the distribution played at step ``k * stride + 1``.
    Memory is ``ceil(T / stride) * (2n + 1)`` doubles.
    """
    x_doubled = np.ascontiguousarray(x_doubled, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    T, N = x_doubled.shape
    if y.shape != (T,):
        raise DimensionMismatch("x and y disagree on the number of samples")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    out = np.empty((-(-T // stride), N))
    n_out = _hedge_pass(x_doubled, y, float(lam), math.log(beta), int(stride), out)
    return out, int(n_out)


def empirical_risk(candidate, lam: float, a, b) -> float:
    """Mean of (lam * candidate . a_j - b_j)^2 over the risk samples."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    resid = lam * (a @ np.asarray(candidate, dtype=float)) - b
    return float(np.mean(resid**2))


def candidate_risks(candidates, lam: float, a, b, chunk: int = 2048) -> np.ndarray:
    """Empirical risk of every candidate (rows), O(len(candidates) * M * N)."""
    candidates = np.asarray(candidates, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.empty(candidates.shape[0])
    for start in range(0, candidates.shape[0], chunk):
        resid = candidates[start : start + chunk] @ a.T
        resid *= lam
        resid -= b
        out[start : start + chunk] = np.einsum("ij,ij->i", resid, resid)
    out /= a.shape[0]
    return out


@dataclass
class SparsitronResult:
    weights: np.ndarray  # signed, length n
    t_star: int  # 1-based step whose candidate was selected
    risk: float  # empirical risk of the selected candidate
    n_out_of_range: int  # loss entries outside [0, 1] during the online phase
    candidates: np.ndarray  # scored candidates, shape (ceil(T/stride), 2n+1)
    risks: np.ndarray
    stride: int = 1
    hedge_seconds: float = 0.0
    score_seconds: float = 0.0

    @property
    def steps(self) -> np.ndarray:
        return np.arange(len(self.risks)) * self.stride + 1


def run_sparsitron(
    x_train,
    y_train,
    a,
    b,
    lam: float,
    beta: float | None = None,
    stride: int = 1,
) -> SparsitronResult:
    """Online Hedge phase on the doubled training pairs, then risk-based selection.

    Returns the folded-back ``lam * p^{t*}`` with ``t*`` the empirical-risk
    minimizer over the scored candidates (earliest on ties).
    """
    x_train = np.asarray(x_train, dtype=float)
    a = np.asarray(a, dtype=float)
    T, N = x_train.shape
    if T < 1 or a.shape[0] < 1:
        raise ValueError("need at least one training and one risk sample")
    if a.shape[1] != N:
        raise DimensionMismatch("training and risk samples have different widths")
    if beta is None:
        beta = default_beta(T, N)

    t0 = time.perf_counter()
    candidates, n_out = hedge_pass(x_train, y_train, lam, beta, stride)
    t1 = time.perf_counter()
    risks = candidate_risks(candidates, lam, a, b)
    best = int(np.argmin(risks))
    t2 = time.perf_counter()
    return SparsitronResult(
        weights=fold_back(lam * candidates[best]),
        t_star=best * stride + 1,
        risk=float(risks[best]),
        n_out_of_range=n_out,
        candidates=candidates,
        risks=risks,
        stride=stride,
        hedge_seconds=t1 - t0,
        score_seconds=t2 - t1,
    )
