"""Defect graphs and exact minimum-weight perfect matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels


@dataclass(frozen=True, eq=False)
class DefectGraph:
    """Complete weighted graph over defects (plus optional boundary nodes).

    ``weights[i, j] < 0`` marks a missing edge.  ``boundary[i]`` flags virtual
    nodes standing in for an open lattice boundary.
    """

    weights: np.ndarray
    coords: np.ndarray | None = None
    boundary: np.ndarray | None = None

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=np.int64)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError("weights must be a square matrix")
        if not np.array_equal(W, W.T):
            raise ValueError("weights must be symmetric")
        object.__setattr__(self, "weights", W)
        if self.boundary is None:
            object.__setattr__(self, "boundary", np.zeros(W.shape[0], dtype=bool))

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_edges(cls, n: int, edges) -> "DefectGraph":
        W = np.full((n, n), -1, dtype=np.int64)
        for i, j, w in edges:
            if w < 0:
                raise ValueError("edge weights must be nonnegative")
            W[i, j] = W[j, i] = w
        return cls(W)


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int], ...]
    total_weight: int


def min_weight_perfect_matching(g: DefectGraph) -> Matching:
    """Exact minimum-weight perfect matching (blossom algorithm).

    Raises ``ValueError`` for an odd node count or when no perfect matching
    exists.
    """
    if g.n_nodes % 2:
        raise ValueError(f"perfect matching needs an even node count, got {g.n_nodes}")
    mate = _kernels.min_weight_perfect_matching(g.weights)
    pairs = tuple((i, int(mate[i])) for i in range(g.n_nodes) if i < mate[i])
    total = int(sum(g.weights[i, j] for i, j in pairs))
    return Matching(pairs, total)


def brute_force_min_matching(weights) -> tuple[tuple[tuple[int, int], ...], int] | None:
    """Enumerate every perfect matching; reference oracle for small graphs."""
    W = np.asarray(weights, dtype=np.int64)
    n = W.shape[0]
    if n % 2:
        return None
    best: list = [None, None]

    def rec(free: list[int], acc: list[tuple[int, int]], total: int):
        if not free:
            if best[1] is None or total < best[1]:
                best[0], best[1] = tuple(acc), total
            return
        a = free[0]
        for idx in range(1, len(free)):
            b = free[idx]
            if W[a, b] < 0:
                continue
            rest = free[1:idx] + free[idx + 1:]
            rec(rest, acc + [(a, b)], total + int(W[a, b]))

    rec(list(range(n)), [], 0)
    if best[1] is None:
        return None
    return best[0], best[1]
