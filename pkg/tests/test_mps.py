import numpy as np
import pytest
from numpy.testing import assert_allclose

import pxpscars as px
from pxpscars.hilbert import StateVector, project_ryd
from pxpscars.mps import (MpsTensors, A_MINUS, A_PLUS, A_ZERO,
                          dense_mps1_vector, delta_site_tensors,
                          gamma_block_vector, gamma_state, mps_trial,
                          remainder_tensors, ring_contract, transfer_norms)
from pxpscars.operators import SQRT2


def test_tensor_values_exact():
    q = 1 / (2 * np.sqrt(2))
    assert_allclose(A_PLUS, q * np.diag([np.sqrt(2), 0]), atol=0)
    assert_allclose(A_ZERO, q * np.array([[0, -1], [1, 0]]), atol=0)
    assert_allclose(A_MINUS, q * np.diag([0, -np.sqrt(2)]), atol=0)
    assert MpsTensors().boundary_relations_defect() < 1e-15


@pytest.mark.parametrize("nb", range(3, 9))
def test_gamma_is_zero_mode(nb):
    lat = px.build_chain(nb)
    ryd = px.enumerate_rydberg(lat)
    bb = px.block_basis(lat, px.default_cover(lat))
    gam = gamma_state(lat, bb, ryd, "pbc")
    H = px.build_pxp(lat, ryd)
    assert np.linalg.norm(H.matvec(gam.amplitudes)) < 1e-12


def test_gamma_blockade_support(chain6):
    """Local blockade factors leave the zero mode unchanged: amplitudes on
    strings with an adjacent (+,-) pair vanish identically."""
    v = gamma_block_vector(chain6.block)
    nb = chain6.block.n_blocks
    idx = np.arange(chain6.block.dim)
    for b in range(nb):
        d0 = (idx // 3 ** b) % 3
        d1 = (idx // 3 ** ((b + 1) % nb)) % 3
        assert np.abs(v[(d0 == 0) & (d1 == 2)]).max() == 0.0


def test_obc_gamma_states():
    nb = 5
    lat = px.build_chain(nb, "open")
    ryd = px.enumerate_rydberg(lat)
    bb = px.block_basis(lat, px.default_cover(lat))
    H = px.build_pxp(lat, ryd)
    expected = {("r", "r"): SQRT2, ("r", "l"): 0.0,
                ("l", "r"): 0.0, ("l", "l"): -SQRT2}
    states = {}
    for pair, energy in expected.items():
        sv = gamma_state(lat, bb, ryd, "obc", pair)
        states[pair] = sv
        assert np.linalg.norm(H.matvec(sv.amplitudes)
                              - energy * sv.amplitudes) < 1e-10
    # states at different energies are orthogonal; the two zero modes are
    # linearly independent with an exact overlap 2/(3^N + (-1)^N), decaying
    # exponentially but nonzero at finite size
    for pair in (("r", "r"), ("l", "l")):
        for other in (("r", "l"), ("l", "r")):
            assert abs(states[pair].overlap(states[other])) < 1e-10
    assert abs(states[("r", "r")].overlap(states[("l", "l")])) < 1e-10
    zz = abs(states[("r", "l")].overlap(states[("l", "r")]))
    assert zz == pytest.approx(2 / (3 ** nb + (-1) ** nb), abs=1e-12)


def test_gamma_argument_validation(chain4):
    with pytest.raises(ValueError):
        gamma_state(chain4.lattice, chain4.block, chain4.ryd, "obc")
    with pytest.raises(ValueError):
        gamma_state(chain4.lattice, chain4.block, chain4.ryd, "pbc", ("r", "r"))


def test_mps_trial_base_case(chain6):
    t0 = mps_trial(chain6.lattice, chain6.block, chain6.ryd, 0)
    gam = gamma_state(chain6.lattice, chain6.block, chain6.ryd, "pbc")
    assert abs(abs(t0.overlap(gam)) - 1.0) < 1e-12
    with pytest.raises(ValueError):
        mps_trial(chain6.lattice, chain6.block, chain6.ryd, 7)


def test_mps_trial_negative_mirror(chain6):
    tm = mps_trial(chain6.lattice, chain6.block, chain6.ryd, -2)
    assert tm.norm() == pytest.approx(1.0)


def test_transfer_norm_matches_dense_oracle(chain6):
    """Defect-sum norm from the ring contraction equals the dense block-space
    evaluation, and the Rayleigh fields reproduce a direct expectation."""
    tn = transfer_norms(6)
    mv = dense_mps1_vector(chain6.block)
    pv = project_ryd(StateVector(chain6.block, mv), chain6.ryd)
    assert tn["norm_mps1"] == pytest.approx(pv.norm() ** 2, rel=1e-12)
    u = pv.normalized().amplitudes
    rayleigh = np.vdot(u, chain6.H.matvec(u)).real
    assert tn["energy_rayleigh"] == pytest.approx(rayleigh, abs=1e-12)


def test_remainder_identity_dense(chain6):
    """H acting on the defect-sum state decomposes exactly as
    sqrt2 * state + (1/4) * remainder; the two-boundary-vector family is
    twice the true remainder."""
    bb, ryd, H = chain6.block, chain6.ryd, chain6.H
    nb = bb.n_blocks

    def dense_family(tensors_fn):
        idx = np.arange(bb.dim)
        digs = np.stack([(idx // 3 ** b) % 3 for b in range(nb)], axis=1)
        out = np.zeros(bb.dim, dtype=complex)
        for b in range(nb):
            for tens in tensors_fn(b):
                for s in range(bb.dim):
                    acc = None
                    ok = True
                    for i in range(nb):
                        t = tens[i].get(int(digs[s, i]))
                        if t is None:
                            ok = False
                            break
                        acc = t if acc is None else acc @ t
                    if ok:
                        out[s] += np.trace(acc) if acc.shape == (2, 2) \
                            else acc.reshape(-1)[0]
        return out

    mv = dense_mps1_vector(bb)
    pv = project_ryd(StateVector(bb, mv), ryd).amplitudes
    rem = dense_family(lambda b: remainder_tensors(nb, b))
    prem = project_ryd(StateVector(bb, rem), ryd).amplitudes
    lhs = H.matvec(pv)
    assert np.linalg.norm(lhs - SQRT2 * pv - 0.25 * prem) < 1e-12
    two_vec = dense_family(lambda b: delta_site_tensors(nb, b))
    assert np.linalg.norm(two_vec - 2.0 * rem) < 1e-12


def test_transfer_asymptotics_converged():
    a, b = transfer_norms(100), transfer_norms(200)
    assert a["energy_rayleigh"] == pytest.approx(b["energy_rayleigh"],
                                                 abs=1e-10)
    assert a["perp_rayleigh"] == pytest.approx(b["perp_rayleigh"], abs=1e-10)
    # converged limits of the exact contractions
    assert b["energy_rayleigh"] == pytest.approx(16 / 17 * SQRT2, abs=1e-9)
    lam = 0.75
    for N in (40, 100):
        t = transfer_norms(N)
        assert t["norm_mps1"] / (N * lam ** N) == pytest.approx(68 / 9,
                                                                rel=1e-3)


def test_transfer_range_guard():
    with pytest.raises(ValueError):
        transfer_norms(3)


def test_ring_contract_unconstrained_flag():
    bulk = [{s: m for s, m in enumerate((A_PLUS, A_ZERO, A_MINUS))}] * 6
    con = ring_contract(bulk, bulk, constrained=True).real
    unc = ring_contract(bulk, bulk, constrained=False).real
    # Gamma strings avoid the forbidden pattern on their own
    assert con == pytest.approx(unc, rel=1e-12)
