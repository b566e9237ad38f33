"""Seeded noise channels: independent X/Z, depolarizing, faulty measurements.

All randomness flows through numpy ``Generator(PCG64)`` streams derived from
an integer seed plus a spawn key (``SeedSequence``).  Independent workers use
disjoint keys, so a sharded run reproduces the serial one exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import StabilizerCode, syndromes_dense
from .gf2 import BitVector, gf2_xor_acc

CHANNELS = ("independent", "depolarizing")


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """PCG64 stream for ``seed``, split by an optional integer spawn key."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key))))


@dataclass(frozen=True)
class RngState:
    """Serializable snapshot of a PCG64 generator (128-bit state + 128-bit increment)."""

    algorithm: str
    state: int
    inc: int

    @classmethod
    def capture(cls, rng: np.random.Generator) -> "RngState":
        st = rng.bit_generator.state
        return cls(st["bit_generator"], st["state"]["state"], st["state"]["inc"])

    def restore(self) -> np.random.Generator:
        bg = np.random.PCG64()
        bg.state = {"bit_generator": self.algorithm,
                    "state": {"state": self.state, "inc": self.inc},
                    "has_uint32": 0, "uinteger": 0}
        return np.random.Generator(bg)


@dataclass(frozen=True)
class PauliError:
    x_part: BitVector
    z_part: BitVector

    def __post_init__(self):
        if self.x_part.len != self.z_part.len:
            raise ValueError("X and Z parts must have equal length")

    @property
    def n(self) -> int:
        return self.x_part.len

    @classmethod
    def identity(cls, n: int) -> "PauliError":
        return cls(BitVector.zeros(n), BitVector.zeros(n))

    @classmethod
    def from_dense(cls, x, z) -> "PauliError":
        return cls(BitVector.from_bits(np.asarray(x, dtype=np.uint8)),
                   BitVector.from_bits(np.asarray(z, dtype=np.uint8)))

    def __xor__(self, other: "PauliError") -> "PauliError":
        return PauliError(gf2_xor_acc(self.x_part, other.x_part),
                          gf2_xor_acc(self.z_part, other.z_part))

    def y_positions(self) -> np.ndarray:
        return np.flatnonzero(self.x_part.to_bits() & self.z_part.to_bits())

    def weight(self) -> int:
        return int(np.count_nonzero(self.x_part.to_bits() | self.z_part.to_bits()))


@dataclass(frozen=True, eq=False)
class SyndromeRun:
    """``T`` noisy syndrome rounds and the data errors that produced them."""

    syndromes: np.ndarray           # (T, n_s) uint8
    measurement_errors: np.ndarray  # (T, n_s) uint8
    step_x: np.ndarray              # (T, n) uint8, fresh X errors per round
    step_z: np.ndarray              # (T, n) uint8

    @property
    def T(self) -> int:
        return self.syndromes.shape[0]

    @property
    def cumulative_error(self) -> PauliError:
        return PauliError.from_dense(np.bitwise_xor.reduce(self.step_x, axis=0),
                                     np.bitwise_xor.reduce(self.step_z, axis=0))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SyndromeRun):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(
            (self.syndromes, self.measurement_errors, self.step_x, self.step_z),
            (other.syndromes, other.measurement_errors, other.step_x, other.step_z)))


@dataclass(frozen=True, eq=False)
class RunBatch:
    """Dense batch of syndrome runs, the layout used by training and evaluation.

    Arrays are indexed ``(sample, round, ...)``.
    """

    syndromes: np.ndarray           # (B, T, n_s)
    measurement_errors: np.ndarray  # (B, T, n_s)
    step_x: np.ndarray              # (B, T, n)
    step_z: np.ndarray              # (B, T, n)

    def __len__(self) -> int:
        return self.syndromes.shape[0]

    @property
    def T(self) -> int:
        return self.syndromes.shape[1]

    @property
    def x(self) -> np.ndarray:
        return np.bitwise_xor.reduce(self.step_x, axis=1)

    @property
    def z(self) -> np.ndarray:
        return np.bitwise_xor.reduce(self.step_z, axis=1)

    def run(self, i: int) -> SyndromeRun:
        return SyndromeRun(self.syndromes[i], self.measurement_errors[i],
                           self.step_x[i], self.step_z[i])

    @classmethod
    def from_runs(cls, runs: list[SyndromeRun]) -> "RunBatch":
        return cls(*(np.stack([getattr(r, f) for r in runs]) for f in
                     ("syndromes", "measurement_errors", "step_x", "step_z")))

    def slice(self, sl) -> "RunBatch":
        return RunBatch(self.syndromes[sl], self.measurement_errors[sl],
                        self.step_x[sl], self.step_z[sl])


def _check_p(p: float, name: str = "p") -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def sample_error_arrays(n: int, channel: str, p: float, rng: np.random.Generator,
                        shape: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Dense X/Z error arrays of shape ``shape + (n,)``."""
    _check_p(p)
    size = tuple(shape) + (n,)
    if channel == "independent":
        x = rng.random(size) < p
        z = rng.random(size) < p
    elif channel == "depolarizing":
        u = rng.random(size)
        third = p / 3.0
        # [0, p/3): X   [p/3, 2p/3): Z   [2p/3, p): Y
        x = (u < third) | ((u >= 2 * third) & (u < p))
        z = (u >= third) & (u < p)
    else:
        raise ValueError(f"unknown channel {channel!r}; expected one of {CHANNELS}")
    return x.astype(np.uint8), z.astype(np.uint8)


def sample_independent(code: StabilizerCode, p: float, rng: np.random.Generator) -> PauliError:
    x, z = sample_error_arrays(code.n, "independent", p, rng, ())
    return PauliError.from_dense(x, z)


def sample_depolarizing(code: StabilizerCode, p: float, rng: np.random.Generator) -> PauliError:
    x, z = sample_error_arrays(code.n, "depolarizing", p, rng, ())
    return PauliError.from_dense(x, z)


def sample_batch(code: StabilizerCode, channel: str, p: float, rng: np.random.Generator,
                 count: int, T: int = 1, q: float | None = None) -> RunBatch:
    """``count`` independent syndrome runs of ``T`` rounds each.

    Round ``t`` measures ``H (e_1 ^ ... ^ e_t) ^ m_t`` where ``e_t`` are fresh
    data errors and ``m_t`` i.i.d. syndrome bit flips with rate ``q``
    (default ``q = p``).  With ``T == 1`` the measurement is perfect.
    """
    if T < 1:
        raise ValueError(f"T must be at least 1, got {T}")
    if q is None:
        q = p if T > 1 else 0.0
    _check_p(q, "q")
    step_x, step_z = sample_error_arrays(code.n, channel, p, rng, (count, T))
    if T > 1 or q > 0:
        meas = (rng.random((count, T, code.n_s)) < q).astype(np.uint8)
    else:
        meas = np.zeros((count, T, code.n_s), dtype=np.uint8)
    cum_x = np.bitwise_xor.accumulate(step_x, axis=1)
    cum_z = np.bitwise_xor.accumulate(step_z, axis=1)
    synd = syndromes_dense(code, code.error_dense(cum_x, cum_z)) ^ meas
    return RunBatch(synd, meas, step_x, step_z)


def sample_faulty_run(code: StabilizerCode, p: float, q: float | None, T: int,
                      rng: np.random.Generator, channel: str = "independent") -> SyndromeRun:
    if q is None:
        q = p
    return sample_batch(code, channel, p, rng, 1, T=T, q=q).run(0)


def reconstruct_syndromes(code: StabilizerCode, run: SyndromeRun) -> np.ndarray:
    """Recompute every round's syndrome from the stored per-round errors."""
    cum_x = np.bitwise_xor.accumulate(run.step_x, axis=0)
    cum_z = np.bitwise_xor.accumulate(run.step_z, axis=0)
    return syndromes_dense(code, code.error_dense(cum_x, cum_z)) ^ run.measurement_errors
