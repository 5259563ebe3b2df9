import numpy as np
import pytest

import nqptomo.oracle as orc
import nqptomo.simulator as sim
from nqptomo.core import DataError, PhaseSpaceGrid
from nqptomo.filters import build_kernel


def test_wigner_known_values():
    assert orc.wigner(sim.vacuum(), 0.0) == pytest.approx(2 / np.pi, rel=1e-6)
    assert orc.wigner(sim.fock_state(1), 0.0) == pytest.approx(-2 / np.pi,
                                                               rel=1e-6)
    # photon addition to vacuum is the one-photon state
    assert orc.wigner(sim.spacs(0.0), 0.0) == pytest.approx(-2 / np.pi,
                                                            rel=1e-6)
    # coherent-state peak translates
    assert orc.wigner(sim.coherent_state(1.4), 1.4) == pytest.approx(
        2 / np.pi, rel=1e-6)
    assert orc.wigner_field(sim.vacuum(),
                            PhaseSpaceGrid(-1, 1, -1, 1, 5, 5))[2, 2] == \
        pytest.approx(2 / np.pi, rel=1e-6)


def test_wigner_normalized():
    grid = PhaseSpaceGrid(-4.5, 4.5, -4.5, 4.5, 91, 91)
    for model in (sim.fock_state(1), sim.spacs(0.9)):
        w = orc.wigner_field(model, grid)
        assert w.sum() * grid.cell_area == pytest.approx(1.0, abs=1e-3)


def test_coherent_product_structure(kernel19):
    # coherent (x) vacuum: P_00 is the translated filter transform, all
    # other elements vanish; the matrix is PSD everywhere
    model = sim.coherent_state(1.4)
    mat = orc.nqp_matrix_analytic(model, 1.4, 1.9, 3, kernel=kernel19)
    assert mat[0, 0].real > 1.0
    for (m, n) in ((1, 1), (2, 2), (0, 1), (0, 2), (1, 2)):
        assert abs(mat[m, n]) < 1e-9
    off = orc.nqp_matrix_analytic(model, 1.4 + 2.0j, 1.9, 1, kernel=kernel19)
    assert 0 < off[0, 0].real < mat[0, 0].real  # peak at beta


def test_translation_covariance(kernel19):
    # P_00 for coherent(beta) at alpha equals vacuum at alpha - beta
    v1 = orc.nqp_matrix_analytic(sim.coherent_state(0.9 + 0.4j), 1.1 + 0.4j,
                                 1.9, 1, kernel=kernel19)[0, 0]
    v2 = orc.nqp_matrix_analytic(sim.vacuum(), 0.2, 1.9, 1,
                                 kernel=kernel19)[0, 0]
    assert v1.real == pytest.approx(v2.real, rel=1e-5)


def test_fock1_filtered_negative_at_origin():
    for w in (1.2, 1.9, 2.4):
        kern = build_kernel(w)
        val = orc.nqp_matrix_analytic(sim.fock_state(1), 0.0, w, 1,
                                      kernel=kern)[0, 0].real
        assert val < 0.0, w


def test_hybrid_cat_off_diagonal_drives_negativity(kernel19):
    grid = PhaseSpaceGrid(-3, 3, -3, 3, 41, 41)
    fld = orc.nqp_field_analytic(sim.hybrid_cat(1.4), None, 1.9, 2,
                                 kernel=kernel19, grid=grid)
    assert np.abs(fld[:, :, 0, 1]).max() > 1.0
    evals = np.linalg.eigvalsh(fld)
    assert evals[..., 0].min() < -1.0  # strongly non-PSD somewhere
    # hermitian by construction
    np.testing.assert_array_equal(fld, np.conj(np.swapaxes(fld, -1, -2)))


def test_trace_normalization_catalog(kernel19):
    cases = [
        (sim.vacuum(), 2, PhaseSpaceGrid(-5, 5, -5, 5, 101, 101)),
        (sim.coherent_state(1.4), 2, PhaseSpaceGrid(-5, 5, -5, 5, 101, 101)),
        (sim.fock_state(1), 3, PhaseSpaceGrid(-5, 5, -5, 5, 101, 101)),
        (sim.spacs(1.4), 2, PhaseSpaceGrid(-5.5, 5.5, -5.5, 5.5, 111, 111)),
        (sim.hybrid_cat(1.4), 2, PhaseSpaceGrid(-5.5, 5.5, -5.5, 5.5, 111, 111)),
        (sim.experimental(1.4), 3, PhaseSpaceGrid(-5.5, 5.5, -5.5, 5.5, 111, 111)),
    ]
    for model, d, grid in cases:
        fld = orc.nqp_field_analytic(model, None, 1.9, d, kernel=kernel19,
                                     grid=grid)
        tr = sum(fld[:, :, n, n].real.sum() * grid.cell_area
                 for n in range(d))
        assert tr == pytest.approx(1.0, abs=1e-4), model.tag


def test_trace_normalization_fock_mixtures(kernel19):
    grid = PhaseSpaceGrid(-7.5, 7.5, -7.5, 7.5, 151, 151)
    for model in (sim.tmsv(0.35), sim.dephased_tmsv(0.35)):
        d = 9  # residual weight beyond: 0.35^9 < 8e-5
        fld = orc.nqp_field_analytic(model, None, 1.9, d, kernel=kernel19,
                                     grid=grid)
        tr = sum(fld[:, :, n, n].real.sum() * grid.cell_area
                 for n in range(d))
        assert tr == pytest.approx(1.0, abs=2e-4), model.tag


def test_widening_filter_keeps_unit_mass():
    # vacuum: the filtered P narrows towards a delta peak of mass 1
    prev_peak = 0.0
    for w, half, n in ((2.0, 3.0, 121), (4.0, 1.5, 121), (8.0, 0.8, 129)):
        # the oracle only needs the filter's own decay, so an explicit
        # cutoff keeps large widths usable here
        kern = build_kernel(w, b_max=8.4 * w)
        grid = PhaseSpaceGrid(-half, half, -half, half, n, n)
        fld = orc.nqp_field_analytic(sim.vacuum(), None, w, 1, kernel=kern,
                                     grid=grid)
        mass = fld[:, :, 0, 0].real.sum() * grid.cell_area
        peak = fld[:, :, 0, 0].real.max()
        assert mass == pytest.approx(1.0, abs=1e-3), w
        assert peak > prev_peak
        prev_peak = peak


def test_comparison_tables_orderings(kernel19):
    grid = PhaseSpaceGrid()
    rows, fields = orc.wigner_filtered_p_comparison([0.0, 0.9, 2.6], 1.9,
                                                    grid, kernel19)
    assert len(fields) == 3 and fields[0]["wigner"].shape == (101, 101)
    r0, r1, r2 = rows
    assert r0["wigner_min"] < 0 and r0["p_min"] < 0
    assert r0["wigner_neg_ratio"] > r1["wigner_neg_ratio"] > r2["wigner_neg_ratio"]
    assert r0["p_neg_ratio"] > r1["p_neg_ratio"] > r2["p_neg_ratio"]
    assert r2["p_neg_ratio"] > r2["wigner_neg_ratio"]
    with pytest.raises(DataError):
        orc.wigner_filtered_p_comparison([], 1.9, grid, kernel19)


def test_kernel_width_mismatch_rejected(kernel19):
    with pytest.raises(DataError):
        orc.nqp_matrix_analytic(sim.vacuum(), 0.0, 1.4, 1, kernel=kernel19)


def test_loss_has_no_analytic_char():
    lossy = sim.apply_loss(sim.fock_state(1), 0.5)
    with pytest.raises(DataError):
        orc.nqp_matrix_analytic(lossy, 0.0, 1.9, 1)
