"""Toric and planar surface codes in binary block form.

Error vectors use the layout ``[x_part | z_part]`` for joint X/Z decoding and
just one part for single-sector decoding.  The joint parity-check matrix is
``[[H_Z, 0], [0, H_X]]``: Z-type checks (plaquettes) act on the X part,
X-type checks (vertices) on the Z part.

Rows of the logical matrix are in *detection* form: ``logicals @ e`` gives
the logical class of the error ``e``.  A row with support in the X part is the
support of a Z-type logical operator, and vice versa.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from .gf2 import BitMatrix, BitVector, dense_matmul_mod2, gf2_matvec

if TYPE_CHECKING:
    from .noise import PauliError

CODE_FILE_MAGIC = "QECC-CODE v1"


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    family: str
    L: int
    n: int
    H: BitMatrix
    logicals: BitMatrix
    sector: str  # "xz" (joint), "x" (X errors only) or "z"
    check_types: tuple[str, ...]
    check_coords: np.ndarray
    qubit_coords: np.ndarray
    stabilizers: BitMatrix = field(repr=False)

    @property
    def n_s(self) -> int:
        return self.H.rows

    @property
    def n_err(self) -> int:
        return self.H.cols

    @property
    def n_log(self) -> int:
        return self.logicals.rows

    @property
    def k(self) -> int:
        return 2 if self.family == "toric" else 1

    @cached_property
    def H_dense(self) -> np.ndarray:
        return self.H.to_dense()

    @cached_property
    def logicals_dense(self) -> np.ndarray:
        return self.logicals.to_dense()

    @cached_property
    def check_qubits(self) -> tuple[tuple[int, ...], ...]:
        """Error coordinates touched by each check row."""
        return tuple(tuple(np.flatnonzero(row).tolist()) for row in self.H_dense)

    @cached_property
    def code_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.family}:{self.L}:{self.sector}".encode())
        h.update(self.H.to_bytes())
        h.update(self.logicals.to_bytes())
        return h.hexdigest()[:16]

    @property
    def name(self) -> str:
        base = f"{self.family}:{self.L}"
        return base if self.sector == "xz" else f"{base}:{self.sector}"

    def error_vector(self, e: "PauliError") -> BitVector:
        """Project a Pauli error onto this code's error coordinates."""
        if e.n != self.n:
            raise ValueError(f"error acts on {e.n} qubits, code has {self.n}")
        if self.sector == "x":
            return e.x_part
        if self.sector == "z":
            return e.z_part
        return BitVector.from_bits(np.concatenate([e.x_part.to_bits(), e.z_part.to_bits()]))

    def error_dense(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Batched version of :meth:`error_vector` on dense 0/1 arrays."""
        if self.sector == "x":
            return x
        if self.sector == "z":
            return z
        return np.concatenate([x, z], axis=-1)

    def sector_code(self, sector: str) -> "StabilizerCode":
        """Restrict a joint code to the X or Z error sector."""
        if self.sector != "xz":
            if sector == self.sector:
                return self
            raise ValueError("sector codes cannot be re-split")
        if sector not in ("x", "z"):
            raise ValueError(f"unknown sector {sector!r}")
        want = "Z" if sector == "x" else "X"
        rows = np.array([i for i, t in enumerate(self.check_types) if t == want])
        cols = slice(0, self.n) if sector == "x" else slice(self.n, 2 * self.n)
        H = self.H_dense[rows][:, cols]
        Ld = self.logicals_dense[:, cols]
        Ld = Ld[Ld.any(axis=1)]
        stab = self.stabilizers.to_dense()[:, cols]
        stab = stab[stab.any(axis=1)]
        return StabilizerCode(
            family=self.family,
            L=self.L,
            n=self.n,
            H=BitMatrix.from_dense(H),
            logicals=BitMatrix.from_dense(Ld),
            sector=sector,
            check_types=tuple(want for _ in rows),
            check_coords=self.check_coords[rows],
            qubit_coords=self.qubit_coords,
            stabilizers=BitMatrix.from_dense(stab),
        )

    def sectors(self) -> list["StabilizerCode"]:
        if self.sector != "xz":
            return [self]
        return [self.sector_code("x"), self.sector_code("z")]


def _assemble(family, L, n, z_checks, x_checks, z_coords, x_coords,
              logical_x_detect, logical_z_detect, qubit_coords) -> StabilizerCode:
    """Build the joint block code from check supports given as qubit lists.

    ``logical_x_detect`` are supports (on the X part) of Z-type logicals;
    ``logical_z_detect`` are supports (on the Z part) of X-type logicals.
    """
    n_z, n_x = len(z_checks), len(x_checks)
    H = np.zeros((n_z + n_x, 2 * n), dtype=np.uint8)
    for i, support in enumerate(z_checks):
        H[i, list(support)] = 1
    for i, support in enumerate(x_checks):
        H[n_z + i, [n + q for q in support]] = 1
    logical_rows = []
    for support in logical_x_detect:
        row = np.zeros(2 * n, dtype=np.uint8)
        row[list(support)] = 1
        logical_rows.append(row)
    for support in logical_z_detect:
        row = np.zeros(2 * n, dtype=np.uint8)
        row[[n + q for q in support]] = 1
        logical_rows.append(row)
    # stabilizer generators written as Pauli errors: X-type checks are X errors
    stab = np.zeros((n_z + n_x, 2 * n), dtype=np.uint8)
    stab[:n_x, :n] = H[n_z:, n:]
    stab[n_x:, n:] = H[:n_z, :n]
    return StabilizerCode(
        family=family,
        L=L,
        n=n,
        H=BitMatrix.from_dense(H),
        logicals=BitMatrix.from_dense(np.array(logical_rows)),
        sector="xz",
        check_types=tuple(["Z"] * n_z + ["X"] * n_x),
        check_coords=np.array(list(z_coords) + list(x_coords), dtype=np.int64),
        qubit_coords=np.asarray(qubit_coords, dtype=np.int64),
        stabilizers=BitMatrix.from_dense(stab),
    )


def build_toric(L: int) -> StabilizerCode:
    """Toric code on an ``L x L`` periodic lattice, qubits on edges.

    Qubit order: horizontal edges ``h(r, c)`` row-major, then vertical edges
    ``v(r, c)`` row-major.  ``h(r, c)`` joins vertices ``(r, c)`` and
    ``(r, c+1)``; ``v(r, c)`` joins ``(r, c)`` and ``(r+1, c)``.  Plaquette
    ``(r, c)`` has corners ``(r, c)`` and ``(r+1, c+1)``.  All ``L**2`` checks of
    each type are kept, including the dependent one.
    """
    if int(L) != L or L < 2:
        raise ValueError(f"toric code needs L >= 2, got {L}")
    L = int(L)

    def h(r, c):
        return (r % L) * L + (c % L)

    def v(r, c):
        return L * L + (r % L) * L + (c % L)

    cells = [(r, c) for r in range(L) for c in range(L)]
    plaquettes = [(h(r, c), h(r + 1, c), v(r, c), v(r, c + 1)) for r, c in cells]
    vertices = [(h(r, c), h(r, c - 1), v(r, c), v(r - 1, c)) for r, c in cells]
    qubit_coords = [(2 * r, 2 * c + 1) for r, c in cells] + [(2 * r + 1, 2 * c) for r, c in cells]
    return _assemble(
        "toric", L, 2 * L * L,
        z_checks=plaquettes,
        x_checks=vertices,
        z_coords=[(2 * r + 1, 2 * c + 1) for r, c in cells],
        x_coords=[(2 * r, 2 * c) for r, c in cells],
        # primal cycles detect X-error loops on the dual lattice
        logical_x_detect=[[h(0, c) for c in range(L)], [v(r, 0) for r in range(L)]],
        # dual cycles detect Z-error loops on the primal lattice
        logical_z_detect=[[h(r, 0) for r in range(L)], [v(0, c) for c in range(L)]],
        qubit_coords=qubit_coords,
    )


def build_surface(L: int) -> StabilizerCode:
    """Unrotated planar surface code of distance ``L``.

    Sites live on a ``(2L-1) x (2L-1)`` grid.  Data qubits sit where ``i + j``
    is even (row-major order), Z-type checks at (even, odd), X-type checks at
    (odd, even).  X-error strings end on the left/right boundaries, Z-error
    strings on the top/bottom ones.
    """
    if int(L) != L or L < 2:
        raise ValueError(f"surface code needs L >= 2, got {L}")
    L = int(L)
    size = 2 * L - 1
    qubit_sites = [(i, j) for i in range(size) for j in range(size) if (i + j) % 2 == 0]
    index = {site: q for q, site in enumerate(qubit_sites)}

    def support(i, j):
        nbrs = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)]
        return tuple(sorted(index[s] for s in nbrs if s in index))

    z_sites = [(i, j) for i in range(0, size, 2) for j in range(1, size, 2)]
    x_sites = [(i, j) for i in range(1, size, 2) for j in range(0, size, 2)]
    return _assemble(
        "surface", L, len(qubit_sites),
        z_checks=[support(*s) for s in z_sites],
        x_checks=[support(*s) for s in x_sites],
        z_coords=z_sites,
        x_coords=x_sites,
        logical_x_detect=[[index[(i, 0)] for i in range(0, size, 2)]],
        logical_z_detect=[[index[(0, j)] for j in range(0, size, 2)]],
        qubit_coords=qubit_sites,
    )


def build_code(family: str, L: int, sector: str = "xz") -> StabilizerCode:
    builders = {"toric": build_toric, "surface": build_surface}
    if family not in builders:
        raise ValueError(f"unknown code family {family!r}")
    code = builders[family](L)
    return code if sector == "xz" else code.sector_code(sector)


def parse_code_spec(spec: str) -> StabilizerCode:
    """``family:L[:sector]`` or a path to an exported code file."""
    if os.path.exists(spec):
        return read_code_file(spec)[0]
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"code spec must look like 'toric:4' or 'toric:4:x', got {spec!r}")
    return build_code(parts[0], int(parts[1]), parts[2] if len(parts) == 3 else "xz")


def syndrome(code: StabilizerCode, e: "PauliError") -> BitVector:
    return gf2_matvec(code.H, code.error_vector(e))


def logical_projection(code: StabilizerCode, e: "PauliError") -> BitVector:
    return gf2_matvec(code.logicals, code.error_vector(e))


def syndromes_dense(code: StabilizerCode, errors: np.ndarray) -> np.ndarray:
    """Syndromes of a ``(..., n_err)`` batch of error vectors."""
    errors = np.asarray(errors)
    if errors.shape[-1] != code.n_err:
        raise ValueError(f"expected {code.n_err} error coordinates, got {errors.shape[-1]}")
    return dense_matmul_mod2(errors, code.H_dense.T)


def logical_dense(code: StabilizerCode, errors: np.ndarray) -> np.ndarray:
    errors = np.asarray(errors)
    if errors.shape[-1] != code.n_err:
        raise ValueError(f"expected {code.n_err} error coordinates, got {errors.shape[-1]}")
    return dense_matmul_mod2(errors, code.logicals_dense.T)


def random_stabilizers(code: StabilizerCode, rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniformly random stabilizer-group elements, as error vectors."""
    coeffs = rng.integers(0, 2, size=(count, code.stabilizers.rows), dtype=np.uint8)
    return dense_matmul_mod2(coeffs, code.stabilizers.to_dense())


@dataclass(frozen=True)
class AttentionMask:
    size: int
    bits: BitMatrix
    rule: str = "diag|err-err shared check|err-check incidence|check-check shared qubit"

    @property
    def dense(self) -> np.ndarray:
        return self.bits.to_dense().astype(bool)

    def unmasked_fraction(self) -> float:
        return float(self.bits.row_weights().sum()) / float(self.size * self.size)


def build_mask(code: StabilizerCode) -> AttentionMask:
    """Attention mask over ``n_err`` error positions followed by ``n_s`` checks."""
    A = code.H_dense.astype(np.int64)
    err_err = (A.T @ A) > 0
    chk_chk = (A @ A.T) > 0
    err_chk = A.T > 0
    top = np.concatenate([err_err, err_chk], axis=1)
    bottom = np.concatenate([err_chk.T, chk_chk], axis=1)
    full = np.concatenate([top, bottom], axis=0)
    np.fill_diagonal(full, True)
    return AttentionMask(size=full.shape[0], bits=BitMatrix.from_dense(full.astype(np.uint8)))


# code files --------------------------------------------------------------


def code_header(code: StabilizerCode) -> dict:
    return {
        "format": CODE_FILE_MAGIC,
        "family": code.family,
        "L": code.L,
        "sector": code.sector,
        "n": code.n,
        "n_s": code.n_s,
        "n_err": code.n_err,
        "n_log": code.n_log,
        "hash": code.code_hash,
        "check_types": "".join(code.check_types),
        "check_qubits": [list(q) for q in code.check_qubits],
        "check_coords": code.check_coords.tolist(),
        "qubit_coords": code.qubit_coords.tolist(),
        "sections": ["H", "logicals", "mask"],
    }


def write_code_file(path, code: StabilizerCode) -> None:
    """JSON header line, then H, logicals and mask as GF2M blobs."""
    header = json.dumps(code_header(code), sort_keys=True, separators=(",", ":"))
    with open(path, "wb") as fh:
        fh.write(header.encode() + b"\n")
        code.H.write(fh)
        code.logicals.write(fh)
        build_mask(code).bits.write(fh)


def read_code_file(path) -> tuple[StabilizerCode, dict, dict[str, BitMatrix]]:
    with open(path, "rb") as fh:
        blob = fh.read()
    stream = io.BytesIO(blob)
    header = json.loads(stream.readline().decode())
    if header.get("format") != CODE_FILE_MAGIC:
        raise ValueError(f"{path}: not a code file")
    sections = {name: BitMatrix.read(stream) for name in header["sections"]}
    code = build_code(header["family"], header["L"], header["sector"])
    if code.code_hash != header["hash"] or code.H != sections["H"]:
        raise ValueError(f"{path}: code hash mismatch")
    return code, header, sections
