"""Exact bond-dimension-2 matrix product eigenstates of the constrained
chain, the ladder-generated trial tower built on them, and transfer-matrix
contractions of their norms and overlaps.

Two tensor normalizations appear. States are built from the bare tensors
(transfer eigenvalue 3/8); the contraction report uses the sqrt(2)-per-site
rescaled set, whose constrained transfer eigenvalue is 3/4, matching the
normalization in which the quoted large-N formulas are expressed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import (BlockBasis, RydbergBasis, StateVector,
                      halfspin_to_block_digits, project_ryd)
from .lattice import Lattice
from .operators import SQRT2, build_ladder

_Q = 1.0 / (2.0 * SQRT2)
A_PLUS = np.array([[SQRT2, 0.0], [0.0, 0.0]]) * _Q
A_ZERO = np.array([[0.0, -1.0], [1.0, 0.0]]) * _Q
A_MINUS = np.array([[0.0, 0.0], [0.0, -SQRT2]]) * _Q

V_RIGHT = [np.array([SQRT2, 0.0]) / 2, np.array([1.0, -1.0]) / 2,
           np.array([0.0, -SQRT2]) / 2]
V_LEFT = [np.array([SQRT2, 0.0]) / 2, np.array([-1.0, -1.0]) / 2,
          np.array([0.0, SQRT2]) / 2]
W_RIGHT = [np.array([SQRT2, 0.0]) * _Q, np.array([1.0, 1.0]) * _Q,
           np.array([0.0, SQRT2]) * _Q]
W_LEFT = [np.array([SQRT2, 0.0]) * _Q, np.array([-1.0, 1.0]) * _Q,
          np.array([0.0, -SQRT2]) * _Q]
V_DOWN = [(V_RIGHT[s] - V_LEFT[s]) / SQRT2 for s in range(3)]
W_UP = [(W_RIGHT[s] + W_LEFT[s]) / SQRT2 for s in range(3)]


@dataclass
class MpsTensors:
    """Bare site matrices and the four boundary-vector families."""
    A: tuple = (A_PLUS, A_ZERO, A_MINUS)
    v: dict = field(default_factory=lambda: {"r": V_RIGHT, "l": V_LEFT})
    w: dict = field(default_factory=lambda: {"r": W_RIGHT, "l": W_LEFT})

    def boundary_relations_defect(self) -> float:
        """max deviation of (1,1)A = v_r/sqrt2, (1,-1)A = v_l/sqrt2,
        A(1,1)^T = w_l, A(1,-1)^T = w_r."""
        one_one = np.array([1.0, 1.0])
        one_mone = np.array([1.0, -1.0])
        worst = 0.0
        for s in range(3):
            worst = max(worst, np.abs(one_one @ self.A[s] - self.v["r"][s] / SQRT2).max())
            worst = max(worst, np.abs(one_mone @ self.A[s] - self.v["l"][s] / SQRT2).max())
            worst = max(worst, np.abs(self.A[s] @ one_one - self.w["l"][s]).max())
            worst = max(worst, np.abs(self.A[s] @ one_mone - self.w["r"][s]).max())
        return float(worst)


def _cumulative_matmul(mats: np.ndarray) -> np.ndarray:
    """(n_states, n_pos, 2, 2) -> product over positions, (n_states, 2, 2)."""
    acc = mats[:, 0]
    for p in range(1, mats.shape[1]):
        acc = np.einsum("nij,njk->nik", acc, mats[:, p])
    return acc


def gamma_state(lattice: Lattice, basis: BlockBasis, ryd: RydbergBasis,
                boundary: str = "pbc", tau_pair: tuple[str, str] | None = None
                ) -> StateVector:
    """Exact chain eigenstate: the traced matrix product (PBC, a zero mode)
    or one of the four boundary-terminated products (OBC, energies
    {+sqrt2, 0, 0, -sqrt2} keyed by tau_pair in {'r','l'}^2)."""
    if lattice.name != "chain":
        raise ValueError("matrix product eigenstates are chain-specific")
    if boundary == "pbc":
        if not lattice.periodic or tau_pair is not None:
            raise ValueError("pbc form needs a periodic chain and no tau_pair")
    elif boundary == "obc":
        if lattice.periodic or tau_pair is None:
            raise ValueError("obc form needs an open chain and a tau_pair")
        if tau_pair[0] not in "rl" or tau_pair[1] not in "rl":
            raise ValueError("tau_pair entries must be 'r' or 'l'")
    else:
        raise ValueError(f"unknown boundary {boundary!r}")
    digs = halfspin_to_block_digits(ryd.states, basis.cover)
    A = np.stack([A_PLUS, A_ZERO, A_MINUS])
    nb = basis.n_blocks
    if boundary == "pbc":
        prod = _cumulative_matmul(A[digs])
        amps = np.trace(prod, axis1=1, axis2=2)
    else:
        v = np.stack({"r": V_RIGHT, "l": V_LEFT}[tau_pair[0]])
        w = np.stack({"r": W_RIGHT, "l": W_LEFT}[tau_pair[1]])
        inner = _cumulative_matmul(A[digs[:, 1:nb - 1]]) if nb > 2 else \
            np.broadcast_to(np.eye(2), (len(digs), 2, 2))
        amps = np.einsum("ni,nij,nj->n", v[digs[:, 0]], inner,
                         w[digs[:, nb - 1]])
    sv = StateVector(ryd, amps.astype(np.complex128))
    return sv.normalized()


def gamma_block_vector(basis: BlockBasis) -> np.ndarray:
    """Unnormalized traced-product amplitudes over all block strings
    (vanishing automatically on blockade-violating strings)."""
    nb = basis.n_blocks
    idx = np.arange(basis.dim)
    digs = np.stack([(idx // 3 ** b) % 3 for b in range(nb)], axis=1)
    A = np.stack([A_PLUS, A_ZERO, A_MINUS])
    prod = _cumulative_matmul(A[digs])
    return np.trace(prod, axis1=1, axis2=2).astype(np.complex128)


def mps_trial(lattice: Lattice, basis: BlockBasis, ryd: RydbergBasis,
              n: int) -> StateVector:
    """Projected ladder excitation of the zero mode: P (J^+)^n |Gamma>
    (J^- for negative n), normalized."""
    if lattice.name != "chain" or not lattice.periodic:
        raise ValueError("the trial tower over the zero mode needs a "
                         "periodic chain")
    nb = basis.n_blocks
    if not -nb <= n <= nb:
        raise ValueError(f"n={n} outside -{nb}..{nb}")
    ladder = build_ladder(basis, "+" if n >= 0 else "-")
    v = gamma_block_vector(basis)
    v /= np.linalg.norm(v)
    for _ in range(abs(n)):
        v = ladder.matvec(v)
        v /= np.linalg.norm(v)
    pv = project_ryd(StateVector(basis, v), ryd)
    if pv.norm() < 1e-14:
        raise ValueError(f"projected ladder state n={n} is numerically zero")
    return pv.normalized()


# ---------------------------------------------------------------------------
# transfer-matrix contractions
# ---------------------------------------------------------------------------

_S = SQRT2  # per-site rescale putting the constrained transfer eigenvalue at 3/4
_A_SC = [A_PLUS * _S, A_ZERO * _S, A_MINUS * _S]
_VR_SC = [v * _S for v in V_RIGHT]
_WR_SC = [w * _S for w in W_RIGHT]
_VDN_SC = [v * _S for v in V_DOWN]
_WUP_SC = [w * _S for w in W_UP]
_VL_SC = [v * _S for v in V_LEFT]
_WL_SC = [w * _S for w in W_LEFT]


def _bulk_site():
    return {s: _A_SC[s] for s in range(3)}


def mps1_site_tensors(N: int, b: int) -> list[dict]:
    """Defect form of one term of the ladder-excited sum: the boundary pair
    v_r (row, site b) / w_r (column, site b-1) inside the ring."""
    t = []
    for i in range(N):
        if i == b % N:
            t.append({s: _VR_SC[s].reshape(1, 2) for s in range(3)})
        elif i == (b - 1) % N:
            t.append({s: _WR_SC[s].reshape(2, 1) for s in range(3)})
        else:
            t.append(_bulk_site())
    return t


def delta_site_tensors(N: int, b: int) -> list[list[dict]]:
    """Remainder family I: explicit (+,0)/(0,-) on (b, b+1), w_up at b-1,
    v_down at b+2."""
    outs = []
    for (sb, sb1) in ((0, 1), (1, 2)):
        t = []
        for i in range(N):
            if i == (b - 1) % N:
                t.append({s: _WUP_SC[s].reshape(2, 1) for s in range(3)})
            elif i == b % N:
                t.append({sb: np.array([[_S]])})
            elif i == (b + 1) % N:
                t.append({sb1: np.array([[_S]])})
            elif i == (b + 2) % N:
                t.append({s: _VDN_SC[s].reshape(1, 2) for s in range(3)})
            else:
                t.append(_bulk_site())
        outs.append(t)
    return outs


def remainder_tensors(N: int, b: int) -> list[list[dict]]:
    """The exact remainder family: the blockade-detecting transition consumes
    the defect bond, leaving constant boundary contractions v_r^- (entering at
    site b+2) and w_r^+ (site b-1). Scaled by -4 so that the remainder state
    divided by 4 is exactly H|MPS_1> - sqrt2 |MPS_1>. The two-boundary-vector
    form built by `delta_site_tensors` is exactly twice this state."""
    vL = V_RIGHT[2]   # sigma_{b+1} = '-' consumed by the transition (bare)
    wR = W_RIGHT[0]   # sigma_b = '+' consumed (bare)
    outs = []
    for (sb, sb1) in ((0, 1), (1, 2)):
        t = []
        for i in range(N):
            if i == (b - 1) % N:
                t.append({s: (_A_SC[s] @ wR).reshape(2, 1) for s in range(3)})
            elif i == b % N:
                t.append({sb: np.array([[-4.0 * _S]])})
            elif i == (b + 1) % N:
                t.append({sb1: np.array([[_S]])})
            elif i == (b + 2) % N:
                t.append({s: (vL @ _A_SC[s]).reshape(1, 2) for s in range(3)})
            else:
                t.append(_bulk_site())
        outs.append(t)
    return outs


def ring_contract(tensA: list[dict], tensB: list[dict],
                  constrained: bool = True) -> complex:
    """sum over cyclic strings (blockade-filtered if constrained) of
    conj(coef_A) * coef_B, where each tensor list gives per-site, per-state
    matrices whose ordered product is the string coefficient."""
    N = len(tensA)
    kr = [{s: np.kron(np.conj(tensA[i][s]), tensB[i][s])
           for s in tensA[i] if s in tensB[i]} for i in range(N)]
    total = 0.0 + 0.0j
    for s0, first in kr[0].items():
        acc = {s0: first}
        for i in range(1, N):
            nxt = {}
            for sp, mat in acc.items():
                for s, k in kr[i].items():
                    if constrained and sp == 0 and s == 2:
                        continue
                    m2 = mat @ k
                    nxt[s] = nxt[s] + m2 if s in nxt else m2
            acc = nxt
        for sl, mat in acc.items():
            if constrained and sl == 0 and s0 == 2:
                continue
            total += np.trace(mat)
    return complex(total)


def _pair_sum(famA, famB, N: int) -> float:
    """N * sum over relative shifts of the cross contraction (translation
    invariance collapses one defect sum)."""
    tot = 0.0
    for tA in famA(0):
        for d in range(N):
            for tB in famB(d):
                tot += ring_contract(tA, tB).real
    return tot * N


def transfer_norms(N: int) -> dict:
    """Exact contraction record for the ladder-excited zero-mode state.

    Family-I fields follow the two-boundary-vector remainder construction
    alone; the *_rayleigh fields additionally include the neighboring-defect
    family, making sqrt2 + inner/(4*norm) the exact Rayleigh quotient.
    """
    if not 4 <= N <= 200:
        raise ValueError("N must be in 4..200")

    def fam_mps(b):
        return [mps1_site_tensors(N, b)]

    norm_gamma = ring_contract([_bulk_site()] * N, [_bulk_site()] * N).real
    norm = _pair_sum(fam_mps, fam_mps, N)
    inner1 = _pair_sum(fam_mps, lambda b: delta_site_tensors(N, b), N)
    dd1 = _pair_sum(lambda b: delta_site_tensors(N, b),
                    lambda b: delta_site_tensors(N, b), N)

    def fam_full(b):
        return remainder_tensors(N, b)

    inner_full = _pair_sum(fam_mps, fam_full, N)
    dd_full = _pair_sum(fam_full, fam_full, N)

    def energy(inner):
        return SQRT2 + 0.25 * inner / norm

    def perp(inner, dd):
        return float(np.sqrt(max(dd - inner ** 2 / norm, 0.0) / 16.0 / norm))

    return {
        "n_sites_blocks": N,
        "norm_gamma": norm_gamma,
        "norm_mps1": norm,
        "inner_mps1_delta": inner1,
        "norm_delta": dd1,
        "energy_estimate": energy(inner1),
        "perp_ratio": perp(inner1, dd1),
        "inner_mps1_remainder": inner_full,
        "norm_remainder": dd_full,
        "energy_rayleigh": energy(inner_full),
        "perp_rayleigh": perp(inner_full, dd_full),
    }


def dense_mps1_vector(basis: BlockBasis) -> np.ndarray:
    """Block-space amplitudes of the defect-sum form (scaled tensors);
    equals sqrt2^{N+1} (J^+ Gamma-bare) and is the transfer oracle's twin."""
    nb = basis.n_blocks
    idx = np.arange(basis.dim)
    digs = np.stack([(idx // 3 ** b) % 3 for b in range(nb)], axis=1)
    A = np.stack(_A_SC)
    out = np.zeros(basis.dim, dtype=np.complex128)
    for b in range(nb):
        order = [(b + j) % nb for j in range(1, nb - 1)]
        inner = _cumulative_matmul(A[digs[:, order]]) if nb > 2 else \
            np.broadcast_to(np.eye(2), (basis.dim, 2, 2))
        v = np.stack(_VR_SC)[digs[:, b % nb]]
        w = np.stack(_WR_SC)[digs[:, (b - 1) % nb]]
        out += np.einsum("ni,nij,nj->n", v, inner, w)
    return out
