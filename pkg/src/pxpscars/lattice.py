"""Bipartite lattices, dimer covers, and lattice symmetry permutations.

Sites are 0-indexed internally; the CLI prints 1-indexed ids for chains.
A lattice is bipartite with sublattices A and B of equal size; every edge
connects an A site to a B site.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass


@dataclass(frozen=True)
class Lattice:
    """Undirected bipartite graph with equal sublattices.

    ``name`` is "chain", "honeycomb" or a user tag; ``dims`` holds
    (n_blocks,) for chains and (n1, n2) for honeycomb tori; ``periodic``
    is meaningful for chains only.
    """
    n_sites: int
    edges: tuple[tuple[int, int], ...]
    sublattice: tuple[str, ...]
    name: str = "custom"
    dims: tuple[int, ...] = ()
    periodic: bool = True

    def __post_init__(self):
        if len(self.sublattice) != self.n_sites:
            raise ValueError("sublattice labels must cover every site")
        seen = set()
        for (i, j) in self.edges:
            if i == j:
                raise ValueError(f"self-loop at site {i}")
            if not (0 <= i < self.n_sites and 0 <= j < self.n_sites):
                raise ValueError(f"edge ({i},{j}) out of range")
            if (i, j) in seen or (j, i) in seen:
                raise ValueError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
            if self.sublattice[i] == self.sublattice[j]:
                raise ValueError(f"edge ({i},{j}) joins same sublattice")
        n_a = sum(1 for s in self.sublattice if s == "A")
        if 2 * n_a != self.n_sites:
            raise ValueError("sublattices A and B must have equal size")

    @property
    def n_blocks(self) -> int:
        return self.n_sites // 2

    def neighbors(self) -> list[list[int]]:
        nbr = [[] for _ in range(self.n_sites)]
        for (i, j) in self.edges:
            nbr[i].append(j)
            nbr[j].append(i)
        return [sorted(x) for x in nbr]

    def coordination(self) -> list[int]:
        return [len(x) for x in self.neighbors()]


@dataclass(frozen=True)
class DimerCover:
    """Perfect matching by nearest-neighbor bonds, (alpha, beta) per dimer."""
    dimers: tuple[tuple[int, int], ...]

    def validate(self, lattice: Lattice) -> None:
        edge_set = {frozenset(e) for e in lattice.edges}
        used = set()
        for (a, b) in self.dimers:
            if frozenset((a, b)) not in edge_set:
                raise ValueError(f"dimer ({a},{b}) is not a lattice edge")
            if lattice.sublattice[a] != "A" or lattice.sublattice[b] != "B":
                raise ValueError(f"dimer ({a},{b}) must be ordered (A, B)")
            if a in used or b in used:
                raise ValueError(f"site reused by dimer ({a},{b})")
            used.update((a, b))
        if len(used) != lattice.n_sites:
            raise ValueError("cover must touch every site exactly once")

    @property
    def n_blocks(self) -> int:
        return len(self.dimers)


@dataclass(frozen=True)
class SymmetryOp:
    """Site permutation ``perm``: site i is mapped to perm[i]."""
    perm: tuple[int, ...]
    label: str = ""

    def preserves_edges(self, lattice: Lattice) -> bool:
        edge_set = {frozenset(e) for e in lattice.edges}
        return all(frozenset((self.perm[i], self.perm[j])) in edge_set
                   for (i, j) in lattice.edges)


def build_chain(n_blocks: int, boundary: str = "periodic") -> Lattice:
    """Chain of 2*n_blocks sites; odd 1-indexed sites (even 0-indexed) are A."""
    if n_blocks < 2:
        raise ValueError("chain needs n_blocks >= 2")
    if boundary not in ("periodic", "open"):
        raise ValueError(f"unknown boundary {boundary!r}")
    n = 2 * n_blocks
    m = n if boundary == "periodic" else n - 1
    edges = tuple((i, (i + 1) % n) if i + 1 < n else (0, i) for i in range(m))
    sub = tuple("A" if i % 2 == 0 else "B" for i in range(n))
    return Lattice(n, edges, sub, name="chain", dims=(n_blocks,),
                   periodic=(boundary == "periodic"))


def honeycomb_site(a1: int, a2: int, beta: bool, n1: int, n2: int) -> int:
    """Flattening (a1, a2, A/B) -> index: 2*(a1*n2 + a2) + beta."""
    return 2 * ((a1 % n1) * n2 + (a2 % n2)) + int(beta)


def build_honeycomb(n1: int, n2: int) -> Lattice:
    """Honeycomb torus, n1 x n2 unit cells, 2*n1*n2 sites, coordination 3.

    A sites sit at Bravais vectors r = a1*e1 + a2*e2, B sites at r + e_y.
    Edges: (r_A, r_B), (r_A, (r-e1)_B), (r_A, (r-e2)_B), wrapped periodically.
    """
    if n1 < 2 or n2 < 2:
        raise ValueError("honeycomb needs n1, n2 >= 2 (wraparound would "
                         "duplicate edges)")
    edges = []
    for a1 in range(n1):
        for a2 in range(n2):
            a = honeycomb_site(a1, a2, False, n1, n2)
            for (b1, b2) in ((a1, a2), (a1 - 1, a2), (a1, a2 - 1)):
                b = honeycomb_site(b1, b2, True, n1, n2)
                edges.append((min(a, b), max(a, b)))
    sub = tuple("A" if i % 2 == 0 else "B" for i in range(2 * n1 * n2))
    return Lattice(2 * n1 * n2, tuple(sorted(set(edges))), sub,
                   name="honeycomb", dims=(n1, n2))


def default_cover(lattice: Lattice) -> DimerCover:
    """Canonical cover: chain pairs (2b-1, 2b) (1-indexed); honeycomb
    vertical bonds (r, r + e_y)."""
    if lattice.name == "chain":
        cov = DimerCover(tuple((2 * b, 2 * b + 1)
                               for b in range(lattice.n_blocks)))
    elif lattice.name == "honeycomb":
        cov = DimerCover(tuple((2 * k, 2 * k + 1)
                               for k in range(lattice.n_blocks)))
    else:
        raise ValueError(f"no default cover for lattice {lattice.name!r}")
    cov.validate(lattice)
    return cov


def alternate_cover(lattice: Lattice) -> DimerCover:
    """Shifted chain cover (2b, 2b+1) (1-indexed), wrapping around."""
    if lattice.name != "chain":
        raise ValueError("alternate cover is defined for chains only")
    if not lattice.periodic:
        raise ValueError("open chain cannot be covered by the shifted pairing")
    n = lattice.n_sites
    cov = DimerCover(tuple((2 * b + 2 if 2 * b + 2 < n else 0, 2 * b + 1)
                           for b in range(lattice.n_blocks)))
    cov.validate(lattice)
    return cov


def symmetry_group(lattice: Lattice, kind: str) -> list[SymmetryOp]:
    """Cyclic translations of a periodic chain, or the order-3 site-centered
    rotation group of a honeycomb torus (about the A site of cell (0,0))."""
    if lattice.name == "chain" and kind == "translations":
        if not lattice.periodic:
            raise ValueError("open chain has no translation symmetry")
        n = lattice.n_sites
        return [SymmetryOp(tuple((i + k) % n for i in range(n)), label=f"T^{k}")
                for k in range(n)]
    if lattice.name == "honeycomb" and kind == "rotations":
        n1, n2 = lattice.dims
        if n1 != n2:
            raise ValueError("site-centered rotation needs n1 == n2")

        def rot(perm_in):
            out = [0] * lattice.n_sites
            for a1 in range(n1):
                for a2 in range(n2):
                    # alpha (a1,a2) -> (-a1-a2, a1); beta (a1,a2) -> (-a1-a2-1, a1)
                    out[honeycomb_site(a1, a2, False, n1, n2)] = \
                        perm_in[honeycomb_site(-a1 - a2, a1, False, n1, n2)]
                    out[honeycomb_site(a1, a2, True, n1, n2)] = \
                        perm_in[honeycomb_site(-a1 - a2 - 1, a1, True, n1, n2)]
            return tuple(out)

        ident = tuple(range(lattice.n_sites))
        g1 = rot(ident)
        g2 = rot(g1)
        ops = [SymmetryOp(ident, "id"), SymmetryOp(g1, "g"), SymmetryOp(g2, "g2")]
        for op in ops:
            if not op.preserves_edges(lattice):
                raise RuntimeError("rotation does not preserve the edge set")
        return ops
    if lattice.name not in ("chain", "honeycomb"):
        warnings.warn(f"lattice {lattice.name!r} declares no symmetries; "
                      "returning the empty group")
        return []
    raise ValueError(f"unsupported symmetry kind {kind!r} for {lattice.name}")


def lattice_from_json(source) -> tuple[Lattice, DimerCover | None, list[SymmetryOp]]:
    """Load a user lattice description.

    Schema: {"n_sites": int, "edges": [[i,j],...], "sublattice": ["A","B",...],
    "dimers": [[a,b],...] (optional), "symmetries":
    [{"label": str, "perm": [...]}, ...] (optional)}.
    Bipartiteness is verified on load, not trusted.
    """
    if isinstance(source, (str, bytes)):
        with open(source) as f:
            data = json.load(f)
    else:
        data = source
    known = {"n_sites", "edges", "sublattice", "dimers", "symmetries"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown lattice JSON keys: {sorted(unknown)}")
    lat = Lattice(int(data["n_sites"]),
                  tuple((int(i), int(j)) for i, j in data["edges"]),
                  tuple(str(s) for s in data["sublattice"]))
    cover = None
    if "dimers" in data:
        cover = DimerCover(tuple((int(a), int(b)) for a, b in data["dimers"]))
        cover.validate(lat)
    syms = []
    for s in data.get("symmetries", []):
        op = SymmetryOp(tuple(int(p) for p in s["perm"]), s.get("label", ""))
        if not op.preserves_edges(lat):
            raise ValueError(f"symmetry {op.label!r} does not map edges to edges")
        syms.append(op)
    return lat, cover, syms
