"""Minimum-weight perfect-matching decoder for toric and planar codes.

Each Pauli sector is decoded on its own matching graph: checks are nodes and
every qubit is an edge between the (one or two) checks it touches.  A qubit
touching only one check connects that check to the open boundary.  All-pairs
distances and shortest paths are precomputed once per code by BFS, visiting
neighbours in qubit-index order, so corrections are deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .codes import StabilizerCode
from .gf2 import BitVector
from .noise import PauliError, SyndromeRun

NO_BOUNDARY = -1


@dataclass(frozen=True, eq=False)
class SectorGraph:
    """Distances and CSR-packed shortest paths for one sector.

    ``path_ptr``/``path_idx`` hold the qubit list of the path between checks
    ``a`` and ``b`` under key ``a * n_checks + b``; the path from check ``c``
    to the boundary sits under key ``n_checks**2 + c``.
    """

    n_checks: int
    n_qubits: int
    dist: np.ndarray
    bdist: np.ndarray
    path_ptr: np.ndarray
    path_idx: np.ndarray

    @property
    def has_boundary(self) -> bool:
        return bool(self.bdist.size) and self.bdist[0] >= 0

    def path(self, a: int, b: int | None) -> np.ndarray:
        key = self.n_checks * self.n_checks + a if b is None else a * self.n_checks + b
        return self.path_idx[self.path_ptr[key]:self.path_ptr[key + 1]]

    @classmethod
    def from_checks(cls, H: np.ndarray) -> "SectorGraph":
        H = np.asarray(H, dtype=np.uint8)
        n_c, n_q = H.shape
        boundary = n_c
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n_c + 1)]
        for q in range(n_q):
            checks = np.flatnonzero(H[:, q]).tolist()
            if len(checks) == 2:
                a, b = checks
            elif len(checks) == 1:
                a, b = checks[0], boundary
            elif not checks:
                continue
            else:
                raise ValueError(f"qubit {q} touches {len(checks)} checks; matching needs at most 2")
            adj[a].append((b, q))
            adj[b].append((a, q))
        with_boundary = bool(adj[boundary])

        def bfs(src: int, through_boundary: bool):
            dist = np.full(n_c + 1, -1, dtype=np.int64)
            parent = np.full(n_c + 1, -1, dtype=np.int64)
            via = np.full(n_c + 1, -1, dtype=np.int64)
            dist[src] = 0
            queue = deque([src])
            while queue:
                u = queue.popleft()
                if u == boundary and u != src and not through_boundary:
                    continue
                for w, q in adj[u]:
                    if dist[w] < 0:
                        dist[w] = dist[u] + 1
                        parent[w] = u
                        via[w] = q
                        queue.append(w)
            return dist, parent, via

        def walk(parent, via, target):
            qubits = []
            while parent[target] >= 0:
                qubits.append(int(via[target]))
                target = int(parent[target])
            return sorted(qubits)

        dist = np.zeros((n_c, n_c), dtype=np.int64)
        paths: list[list[int]] = [[] for _ in range(n_c * n_c + n_c)]
        for a in range(n_c):
            d, parent, via = bfs(a, through_boundary=False)
            if np.any(d[:n_c] < 0):
                raise ValueError("check graph is disconnected")
            dist[a] = d[:n_c]
            for b in range(n_c):
                if b != a:
                    paths[a * n_c + b] = walk(parent, via, b)
        if with_boundary:
            d, parent, via = bfs(boundary, through_boundary=True)
            bdist = d[:n_c].copy()
            for c in range(n_c):
                paths[n_c * n_c + c] = walk(parent, via, c)
        else:
            bdist = np.full(n_c, NO_BOUNDARY, dtype=np.int64)
        lengths = np.array([len(p) for p in paths], dtype=np.int64)
        ptr = np.zeros(len(paths) + 1, dtype=np.int64)
        np.cumsum(lengths, out=ptr[1:])
        idx = np.fromiter((q for p in paths for q in p), dtype=np.int64, count=int(ptr[-1]))
        return cls(n_c, n_q, dist, bdist, ptr, idx)


class MwpmDecoder:
    """Batched MWPM decoding of every sector of ``code``."""

    def __init__(self, code: StabilizerCode, time_weight: int = 1, backend: str | None = None):
        self.code = code
        self.time_weight = int(time_weight)
        self.kernels = _kernels.get_backend(backend)
        H = code.H_dense
        self._blocks = []
        for sector in ("x", "z") if code.sector == "xz" else (code.sector,):
            want = "Z" if sector == "x" else "X"
            rows = np.array([i for i, t in enumerate(code.check_types) if t == want])
            if code.sector == "xz":
                cols = np.arange(code.n) if sector == "x" else np.arange(code.n, 2 * code.n)
            else:
                cols = np.arange(code.n)
            graph = _graph_cache(code, sector, H[np.ix_(rows, cols)])
            self._blocks.append((rows, cols, graph))

    @property
    def graphs(self) -> list[SectorGraph]:
        return [g for _, _, g in self._blocks]

    def _check(self, s: np.ndarray) -> None:
        if s.shape[-1] != self.code.n_s:
            raise ValueError(f"syndrome length {s.shape[-1]} does not match n_s={self.code.n_s}")

    def decode_batch(self, syndromes: np.ndarray) -> np.ndarray:
        """Corrections ``(B, n_err)`` for perfect syndromes ``(B, n_s)``."""
        s = np.asarray(syndromes, dtype=np.uint8)
        self._check(s)
        out = np.zeros((s.shape[0], self.code.n_err), dtype=np.uint8)
        for rows, cols, g in self._blocks:
            corr, _ = self.kernels.decode_batch(g.dist, g.bdist, g.path_ptr, g.path_idx,
                                                np.ascontiguousarray(s[:, rows]), g.n_qubits)
            out[:, cols] = corr
        return out

    def decode_spacetime_batch(self, syndromes: np.ndarray) -> np.ndarray:
        """Corrections ``(B, n_err)`` from repeated noisy rounds ``(B, T, n_s)``."""
        s = np.asarray(syndromes, dtype=np.uint8)
        self._check(s)
        events = detection_events(s)
        out = np.zeros((s.shape[0], self.code.n_err), dtype=np.uint8)
        for rows, cols, g in self._blocks:
            corr, _ = self.kernels.decode_spacetime_batch(
                g.dist, g.bdist, g.path_ptr, g.path_idx,
                np.ascontiguousarray(events[:, :, rows]), g.n_qubits, self.time_weight)
            out[:, cols] = corr
        return out

    def __call__(self, syndromes: np.ndarray) -> np.ndarray:
        s = np.asarray(syndromes)
        if s.ndim == 3:
            if s.shape[1] == 1:
                return self.decode_batch(s[:, 0])
            return self.decode_spacetime_batch(s)
        return self.decode_batch(s)


_GRAPHS: dict[tuple, SectorGraph] = {}


def _graph_cache(code: StabilizerCode, sector: str, H_block: np.ndarray) -> SectorGraph:
    key = (code.code_hash, sector)
    if key not in _GRAPHS:
        _GRAPHS[key] = SectorGraph.from_checks(H_block)
    return _GRAPHS[key]


def detection_events(syndromes: np.ndarray) -> np.ndarray:
    """``s_t xor s_{t-1}`` along axis -2, with ``s_0 = 0``."""
    s = np.asarray(syndromes, dtype=np.uint8)
    events = s.copy()
    events[..., 1:, :] ^= s[..., :-1, :]
    return events


def _as_pauli(code: StabilizerCode, corr: np.ndarray) -> PauliError:
    zeros = np.zeros(code.n, dtype=np.uint8)
    if code.sector == "x":
        return PauliError.from_dense(corr, zeros)
    if code.sector == "z":
        return PauliError.from_dense(zeros, corr)
    return PauliError.from_dense(corr[:code.n], corr[code.n:])


def decode_mwpm(code: StabilizerCode, s: BitVector | np.ndarray) -> PauliError:
    """MWPM correction for one perfect syndrome."""
    bits = s.to_bits() if isinstance(s, BitVector) else np.asarray(s, dtype=np.uint8)
    if bits.shape != (code.n_s,):
        raise ValueError(f"syndrome length {bits.shape[-1]} does not match n_s={code.n_s}")
    return _as_pauli(code, MwpmDecoder(code).decode_batch(bits[None])[0])


def decode_mwpm_spacetime(code: StabilizerCode, run: SyndromeRun | np.ndarray,
                          time_weight: int = 1) -> PauliError:
    """MWPM correction from ``T`` noisy syndrome rounds.

    Detection events ``(check, t)`` are matched with weight
    ``dist + time_weight * |dt|``.  The last round is taken as exact: on a
    code without boundary an odd event count pairs one event with the time
    boundary at cost ``time_weight * (T - 1 - t)``.
    """
    synd = run.syndromes if isinstance(run, SyndromeRun) else np.asarray(run, dtype=np.uint8)
    if synd.ndim != 2 or synd.shape[1] != code.n_s:
        raise ValueError(f"expected a (T, {code.n_s}) syndrome array, got {synd.shape}")
    dec = MwpmDecoder(code, time_weight=time_weight)
    return _as_pauli(code, dec.decode_spacetime_batch(synd[None])[0])
