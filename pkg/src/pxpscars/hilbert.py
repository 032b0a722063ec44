"""Bases: Rydberg-constrained bitmasks, spin-1 block states, full spin-1/2
space, and the projection maps between them.

Bitmask convention: bit i set means site i excited. Block states are base-3
integers, digit b (least significant = dimer 0 of the cover) encoding the
S^z eigenbasis of block b as 0 -> |+>, 1 -> |0>, 2 -> |->, with the
spin-1/2 content |0> = |dd>, |+> = |du>, |-> = |ud> on (alpha, beta).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import DimerCover, Lattice

MAX_RYD_SITES = 28
MAX_FULL_SITES = 24


def lucas(n: int) -> int:
    """Lucas numbers L_1 = 1, L_2 = 3, L_n = L_{n-1} + L_{n-2}."""
    if n < 1:
        raise ValueError("n >= 1")
    a, b = 2, 1  # L_0, L_1
    for _ in range(n):
        a, b = b, a + b
    return a


def fibonacci(n: int) -> int:
    """Fibonacci numbers F_1 = F_2 = 1."""
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


@dataclass
class RydbergBasis:
    """All blockade-satisfying configurations, sorted ascending by bitmask."""
    lattice: Lattice
    states: np.ndarray  # int64, sorted

    @property
    def dim(self) -> int:
        return len(self.states)

    def positions(self, masks) -> np.ndarray:
        """Vectorized bitmask -> basis position; -1 for masks not in the basis."""
        masks = np.atleast_1d(np.asarray(masks, dtype=np.int64))
        pos = np.searchsorted(self.states, masks)
        pos[pos >= self.dim] = self.dim - 1
        ok = self.states[pos] == masks
        return np.where(ok, pos, -1)

    def index(self, mask: int) -> int:
        p = int(self.positions(np.asarray([mask]))[0])
        if p < 0:
            raise KeyError(f"configuration {mask:#x} violates the blockade")
        return p


def blockade_mask_filter(masks: np.ndarray, edges) -> np.ndarray:
    ok = np.ones(len(masks), dtype=bool)
    for (i, j) in edges:
        ok &= ((masks >> i) & (masks >> j) & 1) == 0
    return ok


def enumerate_rydberg(lattice: Lattice) -> RydbergBasis:
    """Brute-force filter of all 2^n bitmasks against the edge list."""
    if lattice.n_sites > MAX_RYD_SITES:
        raise ValueError(f"{lattice.n_sites} sites exceeds the "
                         f"{MAX_RYD_SITES}-site enumeration guard")
    masks = np.arange(1 << lattice.n_sites, dtype=np.int64)
    return RydbergBasis(lattice, masks[blockade_mask_filter(masks, lattice.edges)])


def basis_dimension_table(n_range) -> list[tuple[int, int]]:
    """(2N, dim) for periodic chains of 2N sites, via the Lucas recurrence."""
    return [(2 * n, lucas(2 * n)) for n in n_range]


@dataclass
class BlockBasis:
    """Product basis of n_blocks spin-1 blocks over a dimer cover."""
    lattice: Lattice
    cover: DimerCover
    masks: np.ndarray          # bitmask image of every block state
    blockade_ok: np.ndarray    # True where the image satisfies the blockade

    @property
    def n_blocks(self) -> int:
        return self.cover.n_blocks

    @property
    def dim(self) -> int:
        return 3 ** self.n_blocks

    def digits(self, state_index: int) -> list[int]:
        return [(state_index // 3 ** b) % 3 for b in range(self.n_blocks)]


def block_to_halfspin(state_index, cover: DimerCover) -> np.ndarray:
    """Bitmask for block states: digit 0 -> (0,0), + -> beta bit, - -> alpha bit."""
    idx = np.atleast_1d(np.asarray(state_index, dtype=np.int64))
    masks = np.zeros(len(idx), dtype=np.int64)
    for b, (alpha, beta) in enumerate(cover.dimers):
        dig = (idx // 3 ** b) % 3
        masks |= np.where(dig == 0, np.int64(1) << beta, 0)
        masks |= np.where(dig == 2, np.int64(1) << alpha, 0)
    return masks


def halfspin_to_block_digits(masks, cover: DimerCover) -> np.ndarray:
    """(n_states, n_blocks) digit array for bitmasks with no intra-dimer
    double excitation; digit convention as in BlockBasis."""
    masks = np.atleast_1d(np.asarray(masks, dtype=np.int64))
    out = np.empty((len(masks), cover.n_blocks), dtype=np.int8)
    for b, (alpha, beta) in enumerate(cover.dimers):
        abit = (masks >> alpha) & 1
        bbit = (masks >> beta) & 1
        if np.any(abit & bbit):
            raise ValueError("bitmask excites both sites of a dimer")
        out[:, b] = np.where(bbit == 1, 0, np.where(abit == 1, 2, 1))
    return out


def block_basis(lattice: Lattice, cover: DimerCover) -> BlockBasis:
    cover.validate(lattice)
    masks = block_to_halfspin(np.arange(3 ** cover.n_blocks), cover)
    return BlockBasis(lattice, cover, masks,
                      blockade_mask_filter(masks, lattice.edges))


@dataclass
class FullBasis:
    """Implicit unconstrained spin-1/2 space (bitmask indexed)."""
    lattice: Lattice

    def __post_init__(self):
        if self.lattice.n_sites > MAX_FULL_SITES:
            raise ValueError(f"{self.lattice.n_sites} sites exceeds the "
                             f"{MAX_FULL_SITES}-site dense-vector guard")

    @property
    def dim(self) -> int:
        return 1 << self.lattice.n_sites


@dataclass
class StateVector:
    basis: object
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if len(self.amplitudes) != self.basis.dim:
            raise ValueError("amplitude count does not match basis dimension")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / n)

    def overlap(self, other: "StateVector") -> complex:
        if self.basis is not other.basis:
            raise ValueError("overlap requires the same basis object")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_csv(self, path_or_buf) -> None:
        """Rows (index, bitmask-or-digits, re, im); 17 significant digits."""
        buf = path_or_buf if hasattr(path_or_buf, "write") else open(path_or_buf, "w")
        try:
            buf.write("index,config,re,im\n")
            labels = _config_labels(self.basis)
            for k, a in enumerate(self.amplitudes):
                buf.write(f"{k},{labels[k]},{a.real:.17g},{a.imag:.17g}\n")
        finally:
            if buf is not path_or_buf:
                buf.close()

    @classmethod
    def from_csv(cls, basis, path_or_buf) -> "StateVector":
        buf = path_or_buf if hasattr(path_or_buf, "read") else open(path_or_buf)
        try:
            next(buf)  # header
            amps = np.zeros(basis.dim, dtype=np.complex128)
            for line in buf:
                k, _, re, im = line.rstrip("\n").split(",")
                amps[int(k)] = float(re) + 1j * float(im)
        finally:
            if buf is not path_or_buf:
                buf.close()
        return cls(basis, amps)


def _config_labels(basis) -> list[str]:
    if isinstance(basis, RydbergBasis):
        return [f"{int(m):b}".zfill(basis.lattice.n_sites) for m in basis.states]
    if isinstance(basis, BlockBasis):
        sym = "+0-"
        return ["".join(sym[d] for d in basis.digits(k)) for k in range(basis.dim)]
    return [f"{m:b}".zfill(basis.lattice.n_sites) for m in range(basis.dim)]


def project_ryd(v: StateVector, ryd: RydbergBasis) -> StateVector:
    """Drop inter-dimer blockade violations; reindex survivors by bitmask."""
    bb = v.basis
    if not isinstance(bb, BlockBasis):
        raise ValueError("project_ryd expects a BlockBasis vector")
    if bb.lattice is not ryd.lattice and bb.lattice != ryd.lattice:
        raise ValueError("bases live on different lattices")
    out = np.zeros(ryd.dim, dtype=np.complex128)
    sel = bb.blockade_ok
    rows = ryd.positions(bb.masks[sel])
    out[rows] = v.amplitudes[sel]
    return StateVector(ryd, out)


def lift_ryd(v: StateVector, bb: BlockBasis) -> StateVector:
    """Embed a constrained vector into the block basis (right inverse of
    project_ryd)."""
    if not isinstance(v.basis, RydbergBasis):
        raise ValueError("lift_ryd expects a RydbergBasis vector")
    out = np.zeros(bb.dim, dtype=np.complex128)
    sel = np.flatnonzero(bb.blockade_ok)
    rows = v.basis.positions(bb.masks[sel])
    out[sel] = v.amplitudes[rows]
    return StateVector(bb, out)


def project_ryd_full(v: StateVector, ryd: RydbergBasis) -> StateVector:
    """Keep amplitudes of blockade-satisfying bitmasks of the full space."""
    if not isinstance(v.basis, FullBasis):
        raise ValueError("project_ryd_full expects a FullBasis vector")
    if v.basis.lattice != ryd.lattice:
        raise ValueError("bases live on different lattices")
    return StateVector(ryd, v.amplitudes[ryd.states])
