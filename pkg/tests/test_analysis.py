import numpy as np
import pytest
from numpy.testing import assert_allclose

import pxpscars as px
from pxpscars.analysis import (alpha_beta_integrals, block_energy_correction,
                               diagonalize, eigen_clusters,
                               energy_correction_analytic, honeycomb_tail_check,
                               identify_scars, nh_exactness_report,
                               quench_fidelity, residual_objective,
                               spectrum_overlap_table)
from pxpscars.operators import SQRT2, build_dh_nh_chain
from pxpscars.trial import neel_state, tower


@pytest.fixture(scope="module")
def spec6(chain6):
    return diagonalize(chain6.H)


def test_diagonalize_refuses_nonhermitian(chain4):
    nh = build_dh_nh_chain(chain4.lattice, chain4.ryd)
    with pytest.raises(ValueError):
        diagonalize(nh)


def test_spectrum_symmetric_and_traceless():
    lat = px.build_chain(2)
    ryd = px.enumerate_rydberg(lat)
    spec = diagonalize(px.build_pxp(lat, ryd))
    assert_allclose(spec.eigenvalues, -spec.eigenvalues[::-1], atol=1e-12)
    assert abs(spec.eigenvalues.sum()) < 1e-12


def test_reconstruction_residual(chain6, spec6):
    assert spec6.reconstruction_residual(chain6.H) < 1e-8 * np.abs(
        spec6.eigenvalues).max()
    v = spec6.eigenvectors
    gram = v.T @ v
    assert np.abs(gram - np.eye(len(gram))).max() < 1e-10


def test_identify_scars_basic(chain6, spec6):
    t = tower(chain6.lattice, chain6.cover, chain6.block, chain6.ryd)
    neel = neel_state(chain6.ryd, chain6.cover)
    mt = tower(chain6.lattice, chain6.cover, chain6.block, chain6.ryd, "mps")
    table = identify_scars(spec6, t, neel, mt)
    rows = table.by_n()
    assert set(rows) == set(range(-6, 7))
    for r in table.rows:
        assert 0.0 <= r.overlap2_trial <= 1.0 + 1e-12
        assert 0.0 <= r.overlap2_neel <= 1.0 + 1e-12
    energies = [rows[n].energy for n in range(-6, 7)]
    assert all(b > a for a, b in zip(energies, energies[1:]))
    assert rows[0].degenerate and rows[0].eig_index == -1
    assert abs(rows[0].energy) < 1e-10


def test_identify_scars_scaling_stability(chain6, spec6):
    t = tower(chain6.lattice, chain6.cover, chain6.block, chain6.ryd)
    table1 = identify_scars(spec6, t)
    spec2 = diagonalize(2.0 * chain6.H)
    table2 = identify_scars(spec2, t)
    for r1, r2 in zip(table1.rows, table2.rows):
        assert r2.energy == pytest.approx(2.0 * r1.energy, abs=1e-9)
        assert r2.eig_index == r1.eig_index
        assert r2.overlap2_trial == pytest.approx(r1.overlap2_trial, abs=1e-9)


def test_degenerate_subspace_upper_bounds_single(chain6, spec6):
    t = tower(chain6.lattice, chain6.cover, chain6.block, chain6.ryd)
    sv = t.states[0]
    ov2 = np.abs(spec6.eigenvectors.T @ sv.amplitudes) ** 2
    clusters = eigen_clusters(spec6.eigenvalues)
    zero = [c for c in clusters
            if abs(np.mean(spec6.eigenvalues[c[0]:c[1]])) < 1e-10][0]
    assert ov2[zero[0]:zero[1]].sum() >= ov2.max() - 1e-12


def test_scar_table_csv(tmp_path, chain6, spec6):
    t = tower(chain6.lattice, chain6.cover, chain6.block, chain6.ryd)
    table = identify_scars(spec6, t, neel_state(chain6.ryd, chain6.cover))
    path = tmp_path / "scars.csv"
    table.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("n,E_n,spacing_to_previous")
    assert len(lines) == 14


def test_energy_correction_matches_block_oracle():
    for nb in (4, 6):
        lat = px.build_chain(nb)
        cov = px.default_cover(lat)
        bb = px.block_basis(lat, cov)
        for n in range(-nb, nb + 1):
            oracle = block_energy_correction(lat, cov, bb, n)
            assert energy_correction_analytic(nb, n) == pytest.approx(
                oracle, abs=1e-10)


def test_energy_correction_tail_values():
    assert energy_correction_analytic(10, 10) == pytest.approx(
        -SQRT2 / 8 * 10, abs=1e-12)
    assert px.analytic_energy(10, 10) == pytest.approx(70 * SQRT2 / 8,
                                                       abs=1e-12)
    assert px.analytic_energy(10, 9) == pytest.approx((7 * 10 - 6) * SQRT2 / 8,
                                                      abs=1e-12)


def test_energy_correction_asymptote():
    assert px.analytic_energy(10 ** 4, 1) == pytest.approx(15 / 16 * SQRT2,
                                                           abs=1e-3)


def test_honeycomb_tail_closed_forms(honeycomb22):
    rec = honeycomb_tail_check(honeycomb22.lattice, honeycomb22.cover,
                               honeycomb22.block)
    assert rec["defect_top"] < 1e-10
    assert rec["defect_next"] < 1e-10
    assert rec["estimate_tail_spacing"] == pytest.approx(15 / 32 * SQRT2)


def test_residual_objective_quadratic(chain6):
    grid = np.linspace(0.0, 1.6, 17)
    out = residual_objective(chain6.lattice, chain6.cover, chain6.block,
                             chain6.ryd, grid)
    lam = out["minimizer"]
    assert lam == pytest.approx(0.9158, abs=0.001)  # frozen from this size
    assert out["values"][0] > out["values"].min()
    assert grid[np.argmin(out["values"])] == pytest.approx(lam, abs=0.1)
    # quadratic fit through three samples reproduces every grid value
    c = np.polyfit(grid, out["values"], 2)
    assert np.abs(np.polyval(c, grid) - out["values"]).max() < 1e-8


def test_residual_objective_unprojected(chain4):
    out = residual_objective(chain4.lattice, chain4.cover, chain4.block,
                             chain4.ryd, [0.0, 1.0], projected=False)
    assert 0.5 < out["minimizer"] < 1.2


def test_alpha_beta_integrals_variants():
    tab = alpha_beta_integrals("tabulated")
    # frozen values of the quadrature of the tabulated weight set
    assert tab["alpha"] == pytest.approx(0.508232, abs=2e-6)
    assert tab["beta"] == pytest.approx(0.453959, abs=2e-6)
    assert tab["lambda_appendix"] == pytest.approx(0.264102, abs=2e-6)
    ex = alpha_beta_integrals("exact")
    # binomial channel weights integrate to exact rationals
    assert ex["alpha"] == pytest.approx(8 / 15, abs=1e-9)
    assert ex["beta"] == pytest.approx(2 / 5, abs=1e-9)
    assert ex["lambda_appendix"] == pytest.approx(2 / 7, abs=1e-9)
    with pytest.raises(ValueError):
        alpha_beta_integrals("bogus")


def test_nh_exactness_and_negative_control(chain6, honeycomb22):
    for b in (chain6, honeycomb22):
        res = nh_exactness_report(b.lattice, b.cover, b.block, b.ryd, b.H)
        assert res < 1e-8
    bad = nh_exactness_report(chain6.lattice, chain6.cover, chain6.block,
                              chain6.ryd, chain6.H, negate=True)
    assert bad > 1e-2


def test_hermitian_part_alone_is_inexact(chain6):
    """Keeping only the Hermitian part of the counterterm breaks exactness."""
    dh = build_dh_nh_chain(chain6.lattice, chain6.ryd)
    herm = 0.5 * (dh + dh.dagger())
    herm.hermitian = True
    total = chain6.H + herm
    worst = 0.0
    for n in range(-6, 7):
        sv = px.trial_scar(chain6.block, chain6.ryd, n)
        worst = max(worst, np.linalg.norm(
            total.matvec(sv.amplitudes) - SQRT2 * n * sv.amplitudes))
    assert worst > 1e-2


def test_quench_fidelity_basics(chain4):
    spec = diagonalize(chain4.H)
    psi0 = neel_state(chain4.ryd, chain4.cover)
    fid = quench_fidelity(spec, psi0, [0.0, 0.5, 1.0])
    assert fid[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(fid >= 0) and np.all(fid <= 1 + 1e-12)


def test_quench_revival_near_tower_period(chain6):
    grid = np.linspace(0.0, 1.6, 9)
    lam = residual_objective(chain6.lattice, chain6.cover, chain6.block,
                             chain6.ryd, grid)["minimizer"]
    spec = diagonalize(chain6.H + px.build_dh_lambda(chain6.lattice,
                                                     chain6.ryd, lam))
    psi0 = neel_state(chain6.ryd, chain6.cover)
    ts = np.linspace(0.0, 8.0, 3201)
    fid = quench_fidelity(spec, psi0, ts)
    peaks = [i for i in range(1, len(ts) - 1)
             if fid[i] > fid[i - 1] and fid[i] > fid[i + 1] and fid[i] > 0.5]
    assert peaks, "no revival found"
    assert ts[peaks[0]] == pytest.approx(2 * np.pi / SQRT2, rel=0.05)
    assert fid[peaks[0]] > 0.9


def test_spectrum_overlap_table(chain4):
    spec = diagonalize(chain4.H)
    rows = spectrum_overlap_table(spec, neel_state(chain4.ryd, chain4.cover))
    assert rows.shape == (chain4.ryd.dim, 3)
    assert rows[:, 2].sum() == pytest.approx(1.0, abs=1e-10)
