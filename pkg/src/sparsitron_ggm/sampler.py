"""Sampling from N(0, Sigma) and the per-node normalization used by the learner.

Normal draws come from a Philox counter stream keyed by the seed. Row ``t`` of a
block always reads the same counter range, so any prefix of rows, pulled one at a
time or as a block, is bit-identical.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import MalformedInput, NotPositiveDefinite
from .model import ModelParams, PrecisionModel

# rows are generated in fixed chunks so the floating-point path never depends on m
CHUNK_ROWS = 1024


def cholesky_lower(sigma) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("covariance is not positive definite") from exc


def _philox_key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(2, np.uint64)


def _row_stride(p: int) -> int:
    """uint64 words consumed per row: one pair per two normals, padded to Philox blocks."""
    words = 2 * ((p + 1) // 2)
    return 4 * ((words + 3) // 4)


def _standard_normal_chunk(key: np.ndarray, chunk: int, p: int) -> np.ndarray:
    stride = _row_stride(p)
    bitgen = np.random.Philox(key=key)
    bitgen.advance(chunk * CHUNK_ROWS * stride // 4)
    raw = bitgen.random_raw(CHUNK_ROWS * stride).reshape(CHUNK_ROWS, stride)
    half = (p + 1) // 2
    # 53-bit uniforms on (0, 1]
    u = ((raw[:, : 2 * half] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    radius = np.sqrt(-2.0 * np.log(u[:, 0::2]))
    angle = 2.0 * np.pi * u[:, 1::2]
    z = np.empty((CHUNK_ROWS, 2 * half))
    z[:, 0::2] = radius * np.cos(angle)
    z[:, 1::2] = radius * np.sin(angle)
    return z[:, :p]


def _sample_chunk(key: np.ndarray, chunk: int, chol: np.ndarray) -> np.ndarray:
    z = _standard_normal_chunk(key, chunk, chol.shape[0])
    return z @ chol.T


@dataclass(frozen=True, eq=False)
class SampleBlock:
    """``m`` i.i.d. rows of N(0, Sigma); read-only."""

    data: np.ndarray
    seed: int | None = None

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]

    def rows(self, start: int, stop: int) -> "SampleBlock":
        return SampleBlock(self.data[start:stop], self.seed)


def draw_samples(model: PrecisionModel, m: int, seed: int) -> SampleBlock:
    if m < 1:
        raise ValueError("m must be at least 1")
    chol = cholesky_lower(model.sigma)
    key = _philox_key(seed)
    n_chunks = -(-m // CHUNK_ROWS)
    data = np.concatenate([_sample_chunk(key, c, chol) for c in range(n_chunks)])[:m]
    data.setflags(write=False)
    return SampleBlock(data, seed)


def stream_source(model: PrecisionModel, seed: int) -> Iterator[np.ndarray]:
    """Endless iterator of single samples; equals ``draw_samples`` row for row."""
    chol = cholesky_lower(model.sigma)
    key = _philox_key(seed)
    chunk = 0
    while True:
        rows = _sample_chunk(key, chunk, chol)
        for row in rows:
            yield row.copy()
        chunk += 1


def normalization_bound(p: int, T: int, delta: float) -> float:
    """B = sqrt(2 ln(2 p T / delta))."""
    if T < 1:
        raise ValueError("T must be at least 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return math.sqrt(2.0 * math.log(2.0 * p * T / delta))


def normalization_scale(p: int, params: ModelParams, T: int, delta: float) -> float:
    bound = normalization_bound(p, T, delta)
    return 1.0 / (bound * math.sqrt(params.nu_max * (params.lam + 1.0)))


@dataclass(frozen=True)
class NormalizedView:
    """Supervised pairs for one target node, scaled so entries are <= 1/sqrt(lam+1) w.h.p."""

    node: int
    scale: float
    bound: float
    x_tilde: np.ndarray
    y_tilde: np.ndarray
    limit: float  # 1/sqrt(lam + 1)

    def exceeds_limit(self) -> bool:
        return bool(
            np.abs(self.x_tilde).max(initial=0.0) > self.limit
            or np.abs(self.y_tilde).max(initial=0.0) > self.limit
        )


def normalize_for_node(
    block: SampleBlock, i: int, params: ModelParams, T: int, delta: float
) -> NormalizedView:
    if not 0 <= i < block.p:
        raise IndexError(f"node {i} out of range for p={block.p}")
    bound = normalization_bound(block.p, T, delta)
    scale = normalization_scale(block.p, params, T, delta)
    others = np.arange(block.p) != i
    return NormalizedView(
        node=i,
        scale=scale,
        bound=bound,
        x_tilde=scale * block.data[:, others],
        y_tilde=scale * block.data[:, i],
        limit=1.0 / math.sqrt(params.lam + 1.0),
    )


def write_samples_csv(block: SampleBlock, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{j}" for j in range(block.p)])
        for row in block.data:
            writer.writerow([format(float(x), ".17g") for x in row])


def read_samples_csv(path) -> SampleBlock:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedInput(f"{path}: empty file") from None
        p = len(header)
        if header != [f"x{j}" for j in range(p)]:
            raise MalformedInput(f"{path}: header must be x0,...,x{{p-1}}, got {header!r}")
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != p:
                raise MalformedInput(
                    f"{path}: row {lineno} has {len(record)} fields, expected {p}"
                )
            try:
                rows.append([float(x) for x in record])
            except ValueError:
                raise MalformedInput(f"{path}: row {lineno} has a non-numeric field") from None
    data = np.array(rows, dtype=float).reshape(len(rows), p)
    data.setflags(write=False)
    return SampleBlock(data)
