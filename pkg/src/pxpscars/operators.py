"""Hamiltonians and perturbations as sparse operators.

Spin-1/2 operators are assembled by vectorized bitmask algebra over the
states of a basis (Rydberg-constrained, block-image, or full). Block-spin
operators are assembled from single-block 3x3 matrices by Kronecker
placement. The same builder therefore serves both representations: calling
a spin-1/2 builder with a BlockBasis transports the operator to the block
space exactly (all guarded flips stay inside the block image).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.io
import scipy.sparse as sp

from .hilbert import BlockBasis, FullBasis, RydbergBasis, StateVector
from .lattice import DimerCover, Lattice, SymmetryOp

SQRT2 = np.sqrt(2.0)

# spin-1 matrices in the z basis ordered |+>, |0>, |-> (m = 1, 0, -1)
S1X = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / SQRT2
S1Y = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]]) / SQRT2
S1Z = np.diag([1.0, 0.0, -1.0]).astype(complex)

P_PLUS = np.diag([1.0, 0, 0]).astype(complex)
P_ZERO = np.diag([0, 1.0, 0]).astype(complex)
P_MINUS = np.diag([0, 0, 1.0]).astype(complex)
KET0_BRAP = np.zeros((3, 3), dtype=complex); KET0_BRAP[1, 0] = 1   # |0><+|
KET0_BRAM = np.zeros((3, 3), dtype=complex); KET0_BRAM[1, 2] = 1   # |0><-|
KETP_BRA0 = KET0_BRAP.conj().T.copy()                              # |+><0|
KETM_BRA0 = KET0_BRAM.conj().T.copy()                              # |-><0|

# x-quantized single-block states in the z basis
XPLUS = np.array([0.5, 1 / SQRT2, 0.5], dtype=complex)
XZERO = np.array([1 / SQRT2, 0, -1 / SQRT2], dtype=complex)
XMINUS = np.array([0.5, -1 / SQRT2, 0.5], dtype=complex)


@dataclass
class SparseOperator:
    basis: object
    matrix: sp.csr_matrix
    hermitian: bool = False

    def __post_init__(self):
        self.matrix = sp.csr_matrix(self.matrix, dtype=np.complex128)
        if self.matrix.shape != (self.basis.dim, self.basis.dim):
            raise ValueError("matrix shape does not match basis dimension")
        self.matrix.sum_duplicates()

    @property
    def dim(self) -> int:
        return self.basis.dim

    def apply(self, v: StateVector) -> StateVector:
        if v.basis is not self.basis and v.basis != self.basis:
            raise ValueError("operator and vector bases differ")
        return StateVector(v.basis, self.matrix @ v.amplitudes)

    def matvec(self, amps: np.ndarray) -> np.ndarray:
        return self.matrix @ amps

    def dagger(self) -> "SparseOperator":
        return SparseOperator(self.basis, self.matrix.conj().T.tocsr(),
                              self.hermitian)

    def hermiticity_defect(self) -> float:
        d = self.matrix - self.matrix.conj().T
        return float(np.abs(d.data).max()) if d.nnz else 0.0

    def check_hermitian(self, tol: float = 1e-12) -> None:
        d = self.hermiticity_defect()
        if d >= tol:
            raise ValueError(f"operator is not Hermitian (defect {d:.2e})")

    def to_dense(self) -> np.ndarray:
        return np.asarray(self.matrix.todense())

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        if other.basis is not self.basis and other.basis != self.basis:
            raise ValueError("cannot add operators on different bases")
        return SparseOperator(self.basis, self.matrix + other.matrix,
                              self.hermitian and other.hermitian)

    def __mul__(self, c) -> "SparseOperator":
        return SparseOperator(self.basis, self.matrix * c,
                              self.hermitian and float(np.imag(c)) == 0.0)

    __rmul__ = __mul__

    def export_matrix_market(self, path, comment: str = "") -> None:
        scipy.io.mmwrite(path, self.matrix.tocoo(), comment=comment)


def operator_distance(a: SparseOperator, b: SparseOperator) -> float:
    """max |A - B| entrywise, after canonicalization."""
    d = (a.matrix - b.matrix).tocoo()
    return float(np.abs(d.data).max()) if d.nnz else 0.0


# ---------------------------------------------------------------------------
# bitmask machinery (spin-1/2 representation over any mask-listed basis)
# ---------------------------------------------------------------------------

def _basis_masks(basis):
    """(masks, finder) for a basis whose states carry bitmask images."""
    if isinstance(basis, RydbergBasis):
        masks = basis.states
        return masks, basis.positions
    if isinstance(basis, BlockBasis):
        masks = basis.masks
        order = np.argsort(masks, kind="stable")
        smasks = masks[order]

        def find(targets):
            pos = np.searchsorted(smasks, targets)
            pos[pos >= len(smasks)] = len(smasks) - 1
            ok = smasks[pos] == targets
            return np.where(ok, order[pos], -1)

        return masks, find
    if isinstance(basis, FullBasis):
        masks = np.arange(basis.dim, dtype=np.int64)
        return masks, lambda t: np.asarray(t, dtype=np.int64)
    raise TypeError(f"unsupported basis {type(basis).__name__}")


def _flip_triplets(masks, find, site, kind, guards_down, weights=None):
    """COO triplets of  w(m) * O_site * prod_{j} P_j  on the listed masks.

    kind: 'x' (flip), 'sp' (raise), 'sm' (lower). Guard sites must be
    distinct from `site`; weights is an optional per-source-mask array.
    """
    one = np.int64(1)
    sel = np.ones(len(masks), dtype=bool)
    for j in guards_down:
        sel &= ((masks >> j) & one) == 0
    if kind == "sp":
        sel &= ((masks >> site) & one) == 0
    elif kind == "sm":
        sel &= ((masks >> site) & one) == 1
    src = np.flatnonzero(sel)
    rows = find(masks[src] ^ (one << site))
    keep = rows >= 0
    src, rows = src[keep], rows[keep]
    vals = np.ones(len(src)) if weights is None else weights[src]
    return rows, src, vals


def _assemble(basis, parts, hermitian):
    rows = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0, int)
    cols = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0, int)
    vals = np.concatenate([p[2] for p in parts]) if parts else np.zeros(0)
    m = sp.coo_matrix((vals.astype(np.complex128), (rows, cols)),
                      shape=(basis.dim, basis.dim)).tocsr()
    return SparseOperator(basis, m, hermitian)


def build_pxp(lattice: Lattice, basis) -> SparseOperator:
    """Rabi flips gated by all graph neighbors being unexcited."""
    masks, find = _basis_masks(basis)
    nbrs = lattice.neighbors()
    parts = [_flip_triplets(masks, find, i, "x", nbrs[i])
             for i in range(lattice.n_sites)]
    return _assemble(basis, parts, hermitian=True)


def build_dh_lambda(lattice: Lattice, basis, lam: float) -> SparseOperator:
    """(lam/8) sum_i P_{i-1} X_i P_{i+1} (P_{i-2} + P_{i+2}), periodic chain."""
    if lattice.name != "chain" or not lattice.periodic:
        raise ValueError("dh_lambda is defined on periodic chains")
    if lattice.n_sites < 6:
        raise ValueError("need at least 6 sites")
    if lam == 0.0:
        return SparseOperator(basis, sp.csr_matrix((basis.dim, basis.dim)),
                              hermitian=True)
    masks, find = _basis_masks(basis)
    n = lattice.n_sites
    parts = []
    for i in range(n):
        for d in (-2, 2):
            guards = [(i - 1) % n, (i + 1) % n, (i + d) % n]
            r, c, v = _flip_triplets(masks, find, i, "x", guards)
            parts.append((r, c, v * (lam / 8.0)))
    return _assemble(basis, parts, hermitian=True)


def default_su2_coefficients(n_blocks: int, h0: float = 0.05) -> dict[int, float]:
    """Golden-ratio decaying couplings lam_d = h0 (phi^{d-1} - phi^{1-d})^-2,
    d = 2..n_blocks. A convention of this package, tuned only qualitatively."""
    phi = (1 + np.sqrt(5.0)) / 2
    return {d: h0 / (phi ** (d - 1) - phi ** (1 - d)) ** 2
            for d in range(2, n_blocks + 1)}


def build_dh_su2(lattice: Lattice, basis, coefficients: dict[int, float]
                 ) -> SparseOperator:
    """sum_d lam_d sum_i P_{i-1} X_i P_{i+1} (Z_{i-d} + Z_{i+d})."""
    if lattice.name != "chain" or not lattice.periodic:
        raise ValueError("dh_su2 is defined on periodic chains")
    n = lattice.n_sites
    nb = lattice.n_blocks
    for d in coefficients:
        if not 2 <= d <= nb:
            raise ValueError(f"range d={d} outside 2..{nb}")
    masks, find = _basis_masks(basis)
    one = np.int64(1)
    parts = []
    for d, lam_d in coefficients.items():
        if lam_d == 0.0:
            continue
        for i in range(n):
            zsum = np.zeros(len(masks))
            for dd in (-d, d):
                j = (i + dd) % n
                zsum += 2.0 * ((masks >> j) & one) - 1.0
            guards = [(i - 1) % n, (i + 1) % n]
            r, c, v = _flip_triplets(masks, find, i, "x", guards,
                                     weights=zsum * lam_d)
            parts.append((r, c, v))
    return _assemble(basis, parts, hermitian=True)


def build_dh_nh_chain(lattice: Lattice, basis) -> SparseOperator:
    """(1/2) sum_b P_{2b-1} (s+_{2b} P_{2b+1} + P_{2b} s+_{2b+1}) P_{2b+2}
    in the paper-style 1-indexed site labels (0-indexed internally)."""
    if lattice.name != "chain" or not lattice.periodic:
        raise ValueError("dh_nh_chain is defined on periodic chains")
    masks, find = _basis_masks(basis)
    n = lattice.n_sites
    parts = []
    for b in range(lattice.n_blocks):
        s0, s1, s2, s3 = (2 * b) % n, (2 * b + 1) % n, (2 * b + 2) % n, (2 * b + 3) % n
        r, c, v = _flip_triplets(masks, find, s1, "sp", [s0, s2, s3])
        parts.append((r, c, 0.5 * v))
        r, c, v = _flip_triplets(masks, find, s2, "sp", [s0, s1, s3])
        parts.append((r, c, 0.5 * v))
    return _assemble(basis, parts, hermitian=False)


def permutation_operator(basis, op: SymmetryOp) -> sp.csr_matrix:
    """Basis permutation induced by a site permutation."""
    masks, find = _basis_masks(basis)
    one = np.int64(1)
    tm = np.zeros(len(masks), dtype=np.int64)
    for i, p in enumerate(op.perm):
        tm |= ((masks >> i) & one) << p
    rows = find(tm)
    if np.any(rows < 0):
        raise ValueError(f"permutation {op.label!r} does not preserve the basis")
    return sp.csr_matrix((np.ones(len(masks)), (rows, np.arange(len(masks)))),
                         shape=(len(masks),) * 2)


def symmetrize(op: SparseOperator, group: list[SymmetryOp]) -> SparseOperator:
    """(1/|G|) sum_g O_g op O_g^{-1} over site-permutation operators."""
    if not group:
        raise ValueError("symmetry group must be nonempty")
    if isinstance(op.basis, BlockBasis):
        raise ValueError("block-basis operators must be compressed to the "
                         "Rydberg basis before symmetrizing")
    acc = sp.csr_matrix((op.dim, op.dim), dtype=np.complex128)
    for g in group:
        P = permutation_operator(op.basis, g)
        acc = acc + P @ op.matrix @ P.T
    return SparseOperator(op.basis, acc / len(group), op.hermitian)


# ---------------------------------------------------------------------------
# block-spin (S=1) operators
# ---------------------------------------------------------------------------

def kron_place(ops_by_block: dict[int, np.ndarray], n_blocks: int
               ) -> sp.csr_matrix:
    """Product operator with given 3x3 factors; digit 0 is least significant."""
    m = sp.identity(1, format="csr", dtype=complex)
    for b in range(n_blocks):
        o = sp.csr_matrix(ops_by_block.get(b, np.eye(3, dtype=complex)))
        m = sp.kron(o, m, format="csr")
    return m


def place_multiblock(op_small: np.ndarray, blocks: tuple[int, ...],
                     n_blocks: int) -> sp.csr_matrix:
    """Embed a joint operator on the listed blocks (identity elsewhere).

    The small space is base-3 indexed with blocks[0] least significant.
    """
    k = len(blocks)
    dim = 3 ** n_blocks
    rest = np.arange(dim, dtype=np.int64)
    for b in blocks:
        rest = rest[(rest // 3 ** b) % 3 == 0]
    small = sp.coo_matrix(op_small)

    def offset(small_idx):
        return sum(((small_idx // 3 ** j) % 3) * 3 ** blocks[j] for j in range(k))

    rows, cols, vals = [], [], []
    for i, j, v in zip(small.row, small.col, small.data):
        rows.append(rest + offset(int(i)))
        cols.append(rest + offset(int(j)))
        vals.append(np.full(len(rest), v))
    return sp.coo_matrix((np.concatenate(vals),
                          (np.concatenate(rows), np.concatenate(cols))),
                         shape=(dim, dim)).tocsr()


def _block_neighbor_sets(lattice: Lattice, cover: DimerCover):
    """Per block b: (alpha_side, beta_side) spectator blocks.

    alpha_side: blocks c whose beta site neighbors b's alpha site (these gate
    the excitation of b_alpha); beta_side: blocks d whose alpha site neighbors
    b's beta site.
    """
    nbrs = lattice.neighbors()
    site2block = {}
    beta_sites = set()
    for b, (a, be) in enumerate(cover.dimers):
        site2block[a] = b
        site2block[be] = b
        beta_sites.add(be)
    alpha_side, beta_side = [], []
    for (a, be) in cover.dimers:
        alpha_side.append(tuple(sorted(site2block[s] for s in nbrs[a]
                                       if s != be and s in beta_sites)))
        beta_side.append(tuple(sorted(site2block[s] for s in nbrs[be]
                                      if s != a and s not in beta_sites)))
    return alpha_side, beta_side


def build_blockspin_parts(lattice: Lattice, cover: DimerCover,
                          basis: BlockBasis):
    """(H_Z, H_1, H_2): Zeeman term plus the non-Hermitian remainder pair.

    H_1 collects the blockade-detecting transitions |0><-|_b (gated by +
    spectators at b_alpha's neighbors) and |0><+|_b (gated by - spectators at
    b_beta's neighbors); H_2 is its adjoint. The split satisfies
    H P_Ryd = P_Ryd (H_Z + H_1 + H_2) and P_Ryd H_2 = 0.
    """
    nb = basis.n_blocks
    hz = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for b in range(nb):
        hz = hz + SQRT2 * kron_place({b: S1X}, nb)
    alpha_side, beta_side = _block_neighbor_sets(lattice, cover)
    eye = np.eye(3, dtype=complex)
    h1 = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for b in range(nb):
        if alpha_side[b]:
            ops = {b: KET0_BRAM}
            for c in alpha_side[b]:
                ops[c] = eye - P_PLUS
            h1 = h1 + kron_place(ops, nb) - kron_place({b: KET0_BRAM}, nb)
        if beta_side[b]:
            ops = {b: KET0_BRAP}
            for d in beta_side[b]:
                ops[d] = eye - P_MINUS
            h1 = h1 + kron_place(ops, nb) - kron_place({b: KET0_BRAP}, nb)
    HZ = SparseOperator(basis, hz, hermitian=True)
    H1 = SparseOperator(basis, h1, hermitian=False)
    return HZ, H1, H1.dagger()


def build_h1_expanded(lattice: Lattice, cover: DimerCover,
                      basis: BlockBasis) -> SparseOperator:
    """Alternating-sum form sum_b sum_k (-1)^k (h_b^{k;alpha} + h_b^{k;beta})."""
    nb = basis.n_blocks
    alpha_side, beta_side = _block_neighbor_sets(lattice, cover)
    m = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for b in range(nb):
        for k in range(1, len(alpha_side[b]) + 1):
            for cs in combinations(alpha_side[b], k):
                ops = {b: KET0_BRAM}
                for c in cs:
                    ops[c] = P_PLUS
                m = m + (-1) ** k * kron_place(ops, nb)
        for k in range(1, len(beta_side[b]) + 1):
            for ds in combinations(beta_side[b], k):
                ops = {b: KET0_BRAP}
                for d in ds:
                    ops[d] = P_MINUS
                m = m + (-1) ** k * kron_place(ops, nb)
    return SparseOperator(basis, m, hermitian=False)


def build_ladder(basis: BlockBasis, sign: str) -> SparseOperator:
    """Collective ladder J^{+/-} = -(+/-) i sum_b (S^y_b +/- i S^z_b)."""
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    single = (-1j * (S1Y + 1j * S1Z)) if sign == "+" else (1j * (S1Y - 1j * S1Z))
    m = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for b in range(basis.n_blocks):
        m = m + kron_place({b: single}, basis.n_blocks)
    return SparseOperator(basis, m, hermitian=False)


def build_dh_nh_generic(lattice: Lattice, cover: DimerCover,
                        basis: BlockBasis) -> SparseOperator:
    """Counterterm cancelling the remainder H_1 on every maximal-spin parent.

    Each gated transition of H_1 gets a partner whose input is replaced by the
    matched equal-projection combination (1/2k) sum_j of single-spectator
    demotions; the pair then annihilates maximal-spin states exactly.
    """
    nb = basis.n_blocks
    alpha_side, beta_side = _block_neighbor_sets(lattice, cover)
    if any(len(s) > 3 for s in alpha_side + beta_side):
        raise ValueError("counterterm construction supports coordination <= 4")
    m = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for b in range(nb):
        for side, spect_proj, demote in (
                (alpha_side[b], P_PLUS, KETP_BRA0),
                (beta_side[b], P_MINUS, KETM_BRA0)):
            for k in range(1, len(side) + 1):
                for cs in combinations(side, k):
                    for j in cs:
                        ops = {b: P_ZERO}
                        for c in cs:
                            ops[c] = demote if c == j else spect_proj
                        m = m - (-1) ** k / (2 * k) * kron_place(ops, nb)
    return SparseOperator(basis, m, hermitian=False)


def blockade_projector(basis: BlockBasis) -> SparseOperator:
    """Diagonal 0/1 projector onto inter-dimer blockade-satisfying states."""
    return SparseOperator(basis, sp.diags(basis.blockade_ok.astype(complex)),
                          hermitian=True)


def total_spin_squared(n_blocks: int) -> np.ndarray:
    """Dense (sum_b S_b)^2 on a small block cluster."""
    dim = 3 ** n_blocks
    tot = {ax: np.zeros((dim, dim), dtype=complex) for ax in "xyz"}
    for b in range(n_blocks):
        for ax, s1 in (("x", S1X), ("y", S1Y), ("z", S1Z)):
            tot[ax] += kron_place({b: s1}, n_blocks).toarray()
    return sum(tot[ax] @ tot[ax] for ax in "xyz")


def maximal_spin_projector(basis: BlockBasis, blocks) -> SparseOperator:
    """Orthogonal projector onto total spin S = len(blocks) of the chosen
    blocks (identity on the rest), by spectral projection of (sum S)^2."""
    blocks = tuple(blocks)
    k1 = len(blocks)
    if not 2 <= k1 <= 4:
        raise ValueError("subset size must be 2..4")
    s2 = total_spin_squared(k1)
    evals, vecs = np.linalg.eigh(s2)
    target = k1 * (k1 + 1)
    sel = np.abs(evals - target) < 1e-9
    p_small = vecs[:, sel] @ vecs[:, sel].conj().T
    return SparseOperator(basis, place_multiblock(p_small, blocks, basis.n_blocks),
                          hermitian=True)


def compress_to_rydberg(op: SparseOperator, ryd: RydbergBasis
                        ) -> SparseOperator:
    """Restrict a block-basis operator to the constrained subspace.

    Sound whenever the operator never maps a blockade-violating state to a
    satisfying one (checked for the counterterms by
    `one_sided_blockade_defect`).
    """
    bb = op.basis
    if not isinstance(bb, BlockBasis):
        raise ValueError("expected a block-basis operator")
    sel = np.flatnonzero(bb.blockade_ok)
    rows = ryd.positions(bb.masks[sel])
    E = sp.csr_matrix((np.ones(len(sel)), (rows, sel)), shape=(ryd.dim, bb.dim))
    return SparseOperator(ryd, (E @ op.matrix @ E.T).tocsr(), op.hermitian)


def blockade_commutator_defect(op: SparseOperator) -> float:
    """max |[op, P]| for the diagonal blockade projector P."""
    P = blockade_projector(op.basis).matrix
    d = (op.matrix @ P - P @ op.matrix).tocoo()
    return float(np.abs(d.data).max()) if d.nnz else 0.0


def one_sided_blockade_defect(op: SparseOperator) -> float:
    """max |P op (1-P)|: the amplitude with which op repairs a violation."""
    bb = op.basis
    P = sp.diags(bb.blockade_ok.astype(float))
    Q = sp.diags((~bb.blockade_ok).astype(float))
    d = (P @ op.matrix @ Q).tocoo()
    return float(np.abs(d.data).max()) if d.nnz else 0.0


def counterterm_state(k: int, flavor: str) -> tuple[np.ndarray, np.ndarray]:
    """(chi, reference) pair on k+1 blocks for the matched-projection identity.

    flavor 'beta': reference |+,-,..,->, chi = (1/2k) sum_j |0,-,..,0_j,..,->;
    flavor 'alpha': the +/- mirrored pair. Index convention: block 0 least
    significant is the transition block b.
    """
    dim = 3 ** (k + 1)
    chi = np.zeros(dim, dtype=complex)
    ref = np.zeros(dim, dtype=complex)
    head, spect = (0, 2) if flavor == "beta" else (2, 0)
    ref_idx = head + sum(spect * 3 ** (j + 1) for j in range(k))
    ref[ref_idx] = 1.0
    for j in range(k):
        idx = 1 + sum((1 if i == j else spect) * 3 ** (i + 1) for i in range(k))
        chi[idx] = 1.0 / (2 * k)
    return chi, ref
