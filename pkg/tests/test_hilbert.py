import io

import numpy as np
import pytest
from numpy.testing import assert_allclose

import pxpscars as px
from pxpscars.hilbert import (StateVector, blockade_mask_filter,
                              halfspin_to_block_digits)


def brute_force_count(n, edges):
    """Independent per-mask loop (no vectorization, no Lucas)."""
    count = 0
    for m in range(1 << n):
        if all(not ((m >> i) & 1 and (m >> j) & 1) for (i, j) in edges):
            count += 1
    return count


def test_four_site_cycle_has_seven_states():
    lat = px.build_chain(2)
    basis = px.enumerate_rydberg(lat)
    assert basis.dim == 7
    assert basis.dim == brute_force_count(4, lat.edges)
    assert sorted(basis.states) == [0b0000, 0b0001, 0b0010, 0b0100,
                                    0b0101, 0b1000, 0b1010]


def test_four_site_path_has_eight_states():
    lat = px.build_chain(2, "open")
    assert px.enumerate_rydberg(lat).dim == 8


def test_twenty_site_cycle_matches_lucas():
    lat = px.build_chain(10)
    assert px.enumerate_rydberg(lat).dim == 15127
    assert px.lucas(20) == 15127


@pytest.mark.parametrize("two_n,dim", [(8, 47), (12, 322), (16, 2207)])
def test_dimension_table(two_n, dim):
    assert px.lucas(two_n) == dim
    assert dict(px.basis_dimension_table([two_n // 2]))[two_n] == dim


def test_obc_counts_are_fibonacci():
    for nb in (2, 3, 4, 5):
        lat = px.build_chain(nb, "open")
        assert px.enumerate_rydberg(lat).dim == px.fibonacci(2 * nb + 2)


def test_enumeration_guard():
    lat = px.build_chain(15)  # 30 sites
    with pytest.raises(ValueError):
        px.enumerate_rydberg(lat)


def test_block_to_halfspin_examples():
    lat = px.build_chain(3)
    cov = px.default_cover(lat)
    nb = 3
    # digits 0 (|+>) on every block -> every beta site set (the Neel mask)
    assert px.block_to_halfspin(0, cov)[0] == sum(1 << (2 * b + 1)
                                                  for b in range(nb))
    # all |0> -> empty mask: index with digits (1,1,1) = 1 + 3 + 9
    assert px.block_to_halfspin(13, cov)[0] == 0
    # single |-> on block 0, rest |0>: digits (2,1,1) = 2 + 3 + 9
    assert px.block_to_halfspin(14, cov)[0] == 1  # alpha site of dimer 0


def test_block_to_halfspin_injective(chain4):
    masks = chain4.block.masks
    assert len(np.unique(masks)) == len(masks)
    digs = halfspin_to_block_digits(masks, chain4.cover)
    rebuilt = np.array([sum(int(d) * 3 ** b for b, d in enumerate(row))
                        for row in digs])
    assert_allclose(rebuilt, np.arange(chain4.block.dim))


def test_blockade_image_matches_projection_support(chain4):
    bb, ryd = chain4.block, chain4.ryd
    ok = blockade_mask_filter(bb.masks, chain4.lattice.edges)
    assert ok.sum() == ryd.dim  # block image covers the constrained set


def test_project_ryd_drops_adjacent_plus_minus(chain4):
    bb, ryd = chain4.block, chain4.ryd
    # |+,-,0,0>: digits (0,2,1,1) -> beta(0) and alpha(1) excited: adjacent
    idx = 0 + 2 * 3 + 1 * 9 + 1 * 27
    v = np.zeros(bb.dim); v[idx] = 1.0
    out = px.project_ryd(StateVector(bb, v), ryd)
    assert out.norm() == 0.0


def test_project_ryd_keeps_neel(chain4):
    bb, ryd = chain4.block, chain4.ryd
    v = np.zeros(bb.dim); v[0] = 1.0  # all blocks |+>
    out = px.project_ryd(StateVector(bb, v), ryd)
    assert out.norm() == pytest.approx(1.0)
    neel_mask = sum(1 << (2 * b + 1) for b in range(4))
    assert out.amplitudes[ryd.index(neel_mask)] == 1.0


def test_projection_norm_nonincreasing(chain4, rng):
    bb, ryd = chain4.block, chain4.ryd
    for _ in range(20):
        v = rng.normal(size=bb.dim) + 1j * rng.normal(size=bb.dim)
        sv = StateVector(bb, v / np.linalg.norm(v))
        assert px.project_ryd(sv, ryd).norm() <= 1.0 + 1e-12


def test_project_lift_identity(chain4, rng):
    bb, ryd = chain4.block, chain4.ryd
    v = rng.normal(size=ryd.dim) + 1j * rng.normal(size=ryd.dim)
    sv = StateVector(ryd, v)
    back = px.project_ryd(px.lift_ryd(sv, bb), ryd)
    assert_allclose(back.amplitudes, sv.amplitudes, atol=1e-15)


def test_project_full_examples(chain4):
    lat, ryd = chain4.lattice, chain4.ryd
    full = px.FullBasis(lat)
    v = np.zeros(full.dim); v[full.dim - 1] = 1.0  # all up
    assert px.project_ryd_full(StateVector(full, v), ryd).norm() == 0.0
    v = np.zeros(full.dim); v[0] = 1.0  # all down
    out = px.project_ryd_full(StateVector(full, v), ryd)
    assert out.amplitudes[ryd.index(0)] == 1.0
    neel = sum(1 << (2 * b + 1) for b in range(4))
    v = np.zeros(full.dim); v[neel] = 1.0
    assert px.project_ryd_full(StateVector(full, v),
                               ryd).amplitudes[ryd.index(neel)] == 1.0


def test_full_basis_guard():
    with pytest.raises(ValueError):
        px.FullBasis(px.build_chain(13))


def test_statevector_csv_roundtrip(chain4, rng):
    ryd = chain4.ryd
    v = rng.normal(size=ryd.dim) + 1j * rng.normal(size=ryd.dim)
    sv = StateVector(ryd, v)
    buf = io.StringIO()
    sv.to_csv(buf)
    buf.seek(0)
    back = StateVector.from_csv(ryd, buf)
    assert np.array_equal(back.amplitudes, sv.amplitudes)  # bit-exact


def test_statevector_basis_mismatch(chain4, chain6):
    a = StateVector(chain4.ryd, np.zeros(chain4.ryd.dim))
    b = StateVector(chain6.ryd, np.zeros(chain6.ryd.dim))
    with pytest.raises(ValueError):
        a.overlap(b)
