"""Analytic scar trial states: ladder-generated parents, their Rydberg
projections, the dimerization-free construction, and the Neel state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import (BlockBasis, FullBasis, RydbergBasis, StateVector,
                      project_ryd, project_ryd_full)
from .lattice import DimerCover, Lattice
from .operators import SQRT2, XMINUS, XPLUS, build_ladder

# single-site change of basis: |phi> = cos(phi)|up> + sin(phi)|dn>,
# |-phi> = cos(phi)|up> - sin(phi)|dn>, phi = arctan(sqrt(2))
UPHI_COS = 1.0 / np.sqrt(3.0)
UPHI_SIN = np.sqrt(2.0 / 3.0)
UPHI_MATRIX = np.array([[-UPHI_SIN, UPHI_SIN],     # <dn|U|dn>, <dn|U|up>
                        [UPHI_COS, UPHI_COS]])      # <up|U|dn>, <up|U|up>


def x_polarized(basis: BlockBasis, direction: str = "+") -> StateVector:
    """Product of x-quantized single-block states |+hat> (or |-hat>)."""
    single = XPLUS if direction == "+" else XMINUS
    v = np.array([1.0], dtype=complex)
    for _ in range(basis.n_blocks):
        v = np.kron(single, v)
    return StateVector(basis, v)


def parent_state(basis: BlockBasis, n: int) -> StateVector:
    """(J^-)^{N_b - n} applied to the fully x-polarized product state.

    Renormalized after every ladder application (the raw coefficients grow
    factorially; only the ray matters downstream). Exact H_Z eigenstate with
    eigenvalue sqrt(2) * n.
    """
    nb = basis.n_blocks
    if not -nb <= n <= nb:
        raise ValueError(f"n={n} outside -{nb}..{nb}")
    jm = build_ladder(basis, "-")
    v = x_polarized(basis).amplitudes
    for _ in range(nb - n):
        v = jm.matvec(v)
        v /= np.linalg.norm(v)
    return StateVector(basis, v)


def trial_scar(basis: BlockBasis, ryd: RydbergBasis, n: int) -> StateVector:
    """Normalized Rydberg projection of the n-th parent."""
    pv = project_ryd(parent_state(basis, n), ryd)
    if pv.norm() < 1e-14:
        raise ValueError(f"projected trial state n={n} is numerically zero")
    return pv.normalized()


def apply_staggered_lowering(v: np.ndarray, lattice: Lattice) -> np.ndarray:
    """(-sum_A sigma^- + sum_B sigma^-) on a full-space vector."""
    idx = np.arange(len(v), dtype=np.int64)
    out = np.zeros_like(v)
    for i in range(lattice.n_sites):
        sign = -1.0 if lattice.sublattice[i] == "A" else 1.0
        src = idx[((idx >> i) & 1) == 1]
        out[src ^ (1 << i)] += sign * v[src]
    return out


def apply_uphi(v: np.ndarray, n_sites: int) -> np.ndarray:
    """Sitewise non-unitary map |up> -> |phi>, |dn> -> |-phi>."""
    out = v.copy()
    for i in range(n_sites):
        out = out.reshape(-1, 1 << (i + 1))
        lo = out[:, : 1 << i].copy()       # bit i = 0
        hi = out[:, 1 << i:].copy()        # bit i = 1
        out[:, : 1 << i] = UPHI_SIN * (hi - lo)
        out[:, 1 << i:] = UPHI_COS * (hi + lo)
        out = out.reshape(-1)
    return out


def trial_scar_invariant(lattice: Lattice, ryd: RydbergBasis, n: int
                         ) -> StateVector:
    """Cover-free route: staggered lowering of the all-up state, then the
    sitewise angle map, then the Rydberg projection."""
    full = FullBasis(lattice)
    nb = lattice.n_blocks
    if not -nb <= n <= nb:
        raise ValueError(f"n={n} outside -{nb}..{nb}")
    v = np.zeros(full.dim, dtype=np.complex128)
    v[full.dim - 1] = 1.0   # all sites excited
    for _ in range(nb - n):
        v = apply_staggered_lowering(v, lattice)
        v /= np.linalg.norm(v)
    v = apply_uphi(v, lattice.n_sites)
    pv = project_ryd_full(StateVector(full, v), ryd)
    if pv.norm() < 1e-14:
        raise ValueError(f"projected trial state n={n} is numerically zero")
    return pv.normalized()


def neel_bitmask(cover: DimerCover) -> int:
    return sum(1 << b for (_, b) in cover.dimers)


def neel_state(ryd: RydbergBasis, cover: DimerCover) -> StateVector:
    """Unit vector on the configuration with every beta site excited."""
    amps = np.zeros(ryd.dim, dtype=np.complex128)
    amps[ryd.index(neel_bitmask(cover))] = 1.0
    return StateVector(ryd, amps)


def verify_neel_decomposition(lattice: Lattice, cover: DimerCover,
                              basis: BlockBasis, ryd: RydbergBasis) -> float:
    """Residual of the coherent-sum identity
    |Z2> = 2^-N sum_k (1/k!) P (J^-)^k |x-polarized>, and of the mirrored
    variant built from |-hat> with the raising ladder."""
    worst = 0.0
    for sign, direction in (("-", "+"), ("+", "-")):
        ladder = build_ladder(basis, sign).matrix
        acc = x_polarized(basis, direction).amplitudes.copy()
        total = acc.copy()
        for k in range(1, 2 * basis.n_blocks + 1):
            acc = ladder @ acc / k
            total += acc
        total /= 2.0 ** basis.n_blocks
        lhs = neel_state(ryd, cover)
        rhs = project_ryd(StateVector(basis, total), ryd)
        worst = max(worst, float(np.linalg.norm(lhs.amplitudes - rhs.amplitudes)))
    return worst


@dataclass
class TrialTower:
    route: str
    states: dict[int, StateVector]

    @property
    def n_values(self) -> list[int]:
        return sorted(self.states)


def tower(lattice: Lattice, cover: DimerCover, basis: BlockBasis,
          ryd: RydbergBasis, route: str = "block-ladder") -> TrialTower:
    """All 2*N_b + 1 trial states by the requested construction route."""
    nb = lattice.n_blocks
    if route == "block-ladder":
        states = {n: trial_scar(basis, ryd, n) for n in range(-nb, nb + 1)}
    elif route == "invariant":
        states = {n: trial_scar_invariant(lattice, ryd, n)
                  for n in range(-nb, nb + 1)}
    elif route == "mps":
        from .mps import mps_trial
        states = {n: mps_trial(lattice, basis, ryd, n)
                  for n in range(-nb, nb + 1)}
    else:
        raise ValueError(f"unknown route {route!r}")
    return TrialTower(route, states)


def tower_agreement(a: TrialTower, b: TrialTower) -> float:
    """min over n of |<a_n|b_n>| (global phases ignored)."""
    return min(abs(a.states[n].overlap(b.states[n])) for n in a.n_values
               if n in b.states)


def export_tower(t: TrialTower, path_or_buf) -> None:
    """One CSV for the whole tower: (n, basis_index, re, im), nonzeros only."""
    buf = path_or_buf if hasattr(path_or_buf, "write") else open(path_or_buf, "w")
    try:
        buf.write("n,basis_index,re,im\n")
        for n in t.n_values:
            amps = t.states[n].amplitudes
            for k in np.flatnonzero(np.abs(amps) > 1e-15):
                buf.write(f"{n},{k},{amps[k].real:.17g},{amps[k].imag:.17g}\n")
    finally:
        if buf is not path_or_buf:
            buf.close()


def lesanovsky_state(ryd: RydbergBasis, z: float) -> StateVector:
    """Projected product state prod_i (|dn> + z |up>), normalized."""
    counts = np.array([bin(int(m)).count("1") for m in ryd.states])
    amps = np.power(complex(z), counts)
    return StateVector(ryd, amps).normalized()


def match_lesanovsky(basis: BlockBasis, ryd: RydbergBasis
                     ) -> dict[str, float | dict]:
    """Scan z in {+-sqrt2, +-1/sqrt2} against the edge trial states.

    Returns the overlap table and the best-matching z per edge state; the
    observed convention is |S_{+Nb}> at z = +1/sqrt2 and |S_{-Nb}> at
    z = -1/sqrt2 for the parameterization used here.
    """
    out = {}
    for n in (basis.n_blocks, -basis.n_blocks):
        sv = trial_scar(basis, ryd, n)
        table = {}
        for z in (SQRT2, -SQRT2, 1 / SQRT2, -1 / SQRT2):
            table[f"{z:+.6f}"] = abs(sv.overlap(lesanovsky_state(ryd, z)))
        best = max(table, key=table.get)
        out[f"n={n:+d}"] = {"overlaps": table, "matched_z": best}
    return out
