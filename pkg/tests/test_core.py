import numpy as np
import pytest

from nqptomo.core import (Binning, DataError, PhaseSpaceGrid, build_ensemble,
                          ensemble_to_records, parse_column_map,
                          projection_vector, read_samples, wrap_phase,
                          write_samples)


def test_wrap_phase_mod_pi_with_sign_flip():
    phi, x = wrap_phase(np.pi + 0.1, 1.3)
    assert phi == pytest.approx(0.1)
    assert x == pytest.approx(-1.3)
    # even number of subtractions keeps the sign
    phi, x = wrap_phase(2 * np.pi + 0.2, 0.7)
    assert phi == pytest.approx(0.2)
    assert x == pytest.approx(0.7)
    phi, x = wrap_phase(-0.3, 0.5)  # negative phases wrap upward
    assert 0 <= phi < np.pi
    assert x == pytest.approx(-0.5)


def test_wrap_phase_rejects_nonfinite():
    with pytest.raises(DataError):
        wrap_phase(np.nan, 0.0)
    with pytest.raises(DataError):
        wrap_phase(0.0, np.inf)


def test_exact_grouping_counts():
    rows = [
        (0.1, 0.0, 0.2, 0.0),
        (0.3, 0.0, 0.1, 0.0),
        (-0.2, np.pi / 2, 0.0, 0.0),
        (0.4, np.pi / 2, -0.5, 0.0),
    ]
    ens = build_ensemble(rows)
    assert ens.n_groups == 2
    assert [g.n for g in ens.groups] == [2, 2]
    assert ens.n_total == 4


def test_grouping_is_partition_and_order_preserving():
    rng = np.random.default_rng(5)
    phases = np.array([0.0, np.pi / 3, 2 * np.pi / 3])
    rows = np.column_stack([
        rng.normal(size=60),
        phases[rng.integers(0, 3, size=60)],
        rng.normal(size=60),
        np.zeros(60),
    ])
    ens = build_ensemble(rows)
    assert ens.n_total == 60
    for g in ens.groups:
        sel = rows[:, 1] == g.phi_cv
        np.testing.assert_array_equal(g.x_cv, rows[sel, 0])


def test_rebinning_idempotent():
    rng = np.random.default_rng(9)
    phases = np.array([0.0, np.pi / 2])
    rows = np.column_stack([
        rng.normal(size=20), phases[rng.integers(0, 2, 20)],
        rng.normal(size=20), np.zeros(20)])
    ens1 = build_ensemble(rows)
    ens2 = build_ensemble(ensemble_to_records(ens1))
    assert ens1.n_groups == ens2.n_groups
    for a, b in zip(ens1.groups, ens2.groups):
        np.testing.assert_array_equal(np.sort(a.x_cv), np.sort(b.x_cv))


def test_equidistant_flag():
    def ens_for(phases):
        rows = []
        for p in phases:
            rows += [(0.1, p, 0.0, 0.0), (0.2, p, 0.1, 0.0)]
        return build_ensemble(rows)

    assert ens_for([k * np.pi / 6 for k in range(6)]).equidistant_cv
    # equally spaced but not spanning [0, pi) in pi/I steps
    assert not ens_for([0.0, 0.1, 0.2]).equidistant_cv
    assert ens_for([0.25 + k * np.pi / 4 for k in range(4)]).equidistant_cv


def test_tolerance_binning_merges_jitter():
    rng = np.random.default_rng(3)
    base = np.array([0.0, np.pi / 2])
    phases = base[rng.integers(0, 2, 40)] + rng.uniform(-1e-8, 1e-8, 40)
    phases = np.abs(phases)
    rows = np.column_stack([rng.normal(size=40), phases,
                            rng.normal(size=40), np.zeros(40)])
    ens = build_ensemble(rows, Binning("tolerance", 1e-6))
    assert ens.n_groups == 2


def test_group_too_small_rejected():
    rows = [(0.1, 0.0, 0.0, 0.0), (0.2, 0.0, 0.0, 0.0), (0.3, 1.0, 0.0, 0.0)]
    with pytest.raises(DataError):
        build_ensemble(rows)


def test_empty_input_rejected():
    with pytest.raises(DataError):
        build_ensemble(np.empty((0, 4)))


def test_grid_validation_and_lattice():
    g = PhaseSpaceGrid()
    assert g.n_re == 101 and g.re_min == -5.0
    assert g.alphas.shape == (101, 101)
    assert g.alphas[0, 0] == -5 - 5j
    assert g.cell_area == pytest.approx(0.01)
    with pytest.raises(DataError):
        PhaseSpaceGrid(re_min=2.0, re_max=-2.0)
    with pytest.raises(DataError):
        PhaseSpaceGrid(n_re=1)


def test_projection_vector_norm():
    v = projection_vector([1 / np.sqrt(2), 1j / np.sqrt(2)])
    assert v.dtype == complex
    with pytest.raises(DataError):
        projection_vector([1.0, 1.0])


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    rec = np.column_stack([rng.normal(size=50),
                           rng.uniform(0, np.pi, 50),
                           rng.normal(size=50),
                           rng.uniform(0, np.pi, 50)])
    path = tmp_path / "data.csv"
    write_samples(path, rec)
    back = read_samples(path)
    np.testing.assert_array_equal(back, rec)  # 17 digits round-trip exactly


def test_csv_reports_bad_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x_cv,phi_cv,x_dv,phi_dv\n1,0,1,0\n1,zap,1,0\n")
    with pytest.raises(DataError, match="bad.csv:3"):
        read_samples(path)


def test_column_map(tmp_path):
    roles = parse_column_map("cv=3,4 dv=1,2")
    assert roles == {"x_cv": 2, "phi_cv": 3, "x_dv": 0, "phi_dv": 1}
    path = tmp_path / "swapped.csv"
    path.write_text("a,b,c,d\n0.5,0.1,1.5,0.2\n")
    rec = read_samples(path, column_map="cv=3,4 dv=1,2")
    np.testing.assert_allclose(rec[0], [1.5, 0.2, 0.5, 0.1])
    with pytest.raises(DataError):
        parse_column_map("cv=1,2")
