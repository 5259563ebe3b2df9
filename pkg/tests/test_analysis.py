import json

import numpy as np
import pytest

import nqptomo.simulator as sim
from nqptomo.analysis import (NqpMatrixField, assemble_field,
                              conditional_distribution, eigenvalue_error,
                              field_from_json, field_to_json, load_field,
                              min_eigenpair, save_field, significance_report)
from nqptomo.core import DataError, PhaseSpaceGrid
from nqptomo.estimator import compute_weights


def small_grid():
    return PhaseSpaceGrid(-2.0, 2.0, -2.0, 2.0, 9, 9)


def synthetic_field(mat_fn, err_fn, d=3, oracle=False):
    grid = small_grid()
    vals = np.zeros((9, 9, d, d), dtype=complex)
    errs = np.zeros((9, 9, d, d))
    for i in range(9):
        for j in range(9):
            vals[i, j] = mat_fn(i, j)
            errs[i, j] = err_fn(i, j)
    return NqpMatrixField(grid, d, 1.9, vals, errs, oracle=oracle)


def test_min_eigenpair_diag():
    e, v = min_eigenpair(np.diag([1.0, 0.0]))
    assert e == 0.0
    np.testing.assert_allclose(np.abs(v), [0.0, 1.0], atol=1e-14)


def test_min_eigenpair_offdiag_closed_form():
    c = 0.4 - 0.9j
    e, v = min_eigenpair(np.array([[0.0, c], [np.conj(c), 0.0]]))
    assert e == pytest.approx(-abs(c), rel=1e-12)
    want = np.array([1.0, -np.conj(c) / abs(c)]) / np.sqrt(2)
    # eigenvectors match up to a global phase
    assert abs(np.vdot(want, v)) == pytest.approx(1.0, abs=1e-12)


def test_min_eigenpair_bounds_and_oracle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = 0.5 * (a + np.conj(a.T))
        e, v = min_eigenpair(h)
        assert e <= np.min(np.diag(h).real) + 1e-12
        assert e == pytest.approx(np.linalg.eigvalsh(h)[0], rel=1e-12)
        assert np.vdot(v, h @ v).real == pytest.approx(e, abs=1e-10)


def test_min_eigenpair_rejects_non_hermitian():
    with pytest.raises(DataError):
        min_eigenpair(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigenvalue_error_examples():
    s = 0.3
    v = np.array([1.0, -1.0]) / np.sqrt(2)
    assert eigenvalue_error(v, np.full((2, 2), s)) == pytest.approx(2 * s)
    assert eigenvalue_error(np.array([0, 1.0, 0]),
                            np.diag([1.0, 2.0, 3.0])) == pytest.approx(2.0)
    assert eigenvalue_error(v, np.zeros((2, 2))) == 0.0
    with pytest.raises(DataError):
        eigenvalue_error(v, np.zeros((3, 3)))


def test_report_on_psd_field_flags_no_chn():
    rng = np.random.default_rng(8)

    def mat(i, j):
        a = rng.normal(size=(3, 3)) * 0.05
        m = a @ a.T  # PSD
        return m + np.eye(3) * 0.2

    fld = synthetic_field(mat, lambda i, j: np.full((3, 3), 0.5))
    rep = significance_report(fld)
    assert not rep.chn_detected
    assert rep.verdict() == "no CHN at this width"
    assert np.all(rep.e >= -1e-12)


def test_interlacing_and_sigma0_identity():
    rng = np.random.default_rng(9)

    def mat(i, j):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        return 0.5 * (a + np.conj(a.T))

    fld = synthetic_field(mat, lambda i, j: np.abs(rng.normal(size=(3, 3))) + 0.1)
    fld = NqpMatrixField(fld.grid, 3, 1.9, fld.values,
                         0.5 * (fld.errors + np.swapaxes(fld.errors, -1, -2)))
    rep = significance_report(fld)
    # exact interlacing of leading principal submatrices
    assert np.all(rep.e[2] <= rep.e[1] + 1e-14)
    assert np.all(rep.e[1] <= rep.e[0] + 1e-14)
    # the 1x1 submatrix: Sigma_0 == S_0 identically
    np.testing.assert_array_equal(rep.sigma_maps[0], rep.s_maps[0])
    # e_0 is the (0,0) element itself
    np.testing.assert_allclose(rep.e[0], fld.values[:, :, 0, 0].real,
                               atol=1e-14)


def test_rayleigh_quotient_optimality():
    rng = np.random.default_rng(21)

    def mat(i, j):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        return 0.5 * (a + np.conj(a.T))

    fld = synthetic_field(mat, lambda i, j: np.full((3, 3), 0.1))
    rep = significance_report(fld)
    for _ in range(50):
        for k in (1, 2, 3):
            psi = rng.normal(size=k) + 1j * rng.normal(size=k)
            psi /= np.linalg.norm(psi)
            i, j = rng.integers(0, 9), rng.integers(0, 9)
            sub = fld.values[i, j, :k, :k]
            quad = np.vdot(psi, sub @ psi).real
            assert quad >= rep.e[k - 1, i, j] - 1e-10


def test_conditional_distribution_cases():
    rng = np.random.default_rng(31)

    def mat(i, j):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        return 0.5 * (a + np.conj(a.T))

    fld = synthetic_field(mat, lambda i, j: np.abs(rng.normal(size=(3, 3))))
    fld = NqpMatrixField(fld.grid, 3, 1.9, fld.values,
                         0.5 * (fld.errors + np.swapaxes(fld.errors, -1, -2)))
    # basis vector selects the diagonal element
    vals, sig = conditional_distribution(fld, [0, 1, 0])
    np.testing.assert_allclose(vals, fld.values[:, :, 1, 1].real, atol=1e-14)
    np.testing.assert_allclose(sig, fld.errors[:, :, 1, 1], atol=1e-14)
    # eigenvector of the minimal eigenvalue reproduces it at that point
    e, v = min_eigenpair(fld.values[4, 4])
    vals, _ = conditional_distribution(fld, v)
    assert vals[4, 4] == pytest.approx(e, abs=1e-12)
    with pytest.raises(DataError):
        conditional_distribution(fld, [1.0, 0.0])


def test_conditional_exposes_off_diagonal_interference():
    # field with only off-diagonal structure: psi = (1,1)/sqrt(2) sees it
    def mat(i, j):
        return np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)

    fld = synthetic_field(mat, lambda i, j: np.full((2, 2), 0.1), d=2)
    vals, _ = conditional_distribution(fld, np.array([1, 1]) / np.sqrt(2))
    assert vals[0, 0] == pytest.approx(0.5)
    vals_m, _ = conditional_distribution(fld, np.array([1, -1]) / np.sqrt(2))
    assert vals_m[0, 0] == pytest.approx(-0.5)


def test_zero_sigma_sentinel_warns():
    def mat(i, j):
        return np.array([[-0.5]], dtype=complex)

    fld = synthetic_field(mat, lambda i, j: np.zeros((1, 1)), d=1)
    rep = significance_report(fld)
    assert np.all(np.isinf(rep.sigma_maps[0]))
    assert any("zero error" in w for w in rep.warnings_)


def test_degenerate_eigenvalues_flagged():
    fld = synthetic_field(lambda i, j: np.eye(2, dtype=complex),
                          lambda i, j: np.full((2, 2), 0.1), d=2)
    rep = significance_report(fld)
    assert rep.degenerate == 81
    assert any("degenerate" in w for w in rep.warnings_)


def test_product_state_field_is_psd_within_noise(cv19, dv3, phases6):
    # coherent (x) DV superposition: the matrix is a rank-one peak times
    # psi psi^dag, so it stays positive semidefinite up to sampling noise
    # (at this width the statistical error dominates the finite-phase-scan
    # residual of the bin-averaged estimator)
    psi = np.array([1.0, 1.0]) / np.sqrt(2)
    model = sim.product(sim.Coherent(1.0), dv_vector=psi)
    counts = np.full((6, 6), 1500)
    ens, _ = sim.sample_ensemble(model, phases6, phases6, counts, seed=17)
    w = compute_weights(ens)
    grid = PhaseSpaceGrid(-3, 3, -3, 3, 13, 13)
    fld = assemble_field(ens, w, cv19, dv3, grid, 2)
    rep = significance_report(fld)
    assert float(rep.sigma_maps[1].max()) < 4.0  # no significant negativity
    # analytic structure: off-diagonal equals the diagonals at the peak
    import nqptomo.oracle as orc
    ora = orc.nqp_field_analytic(model, None, 1.9, 2, kernel=cv19.kernel,
                                 grid=grid)
    peak = np.unravel_index(ora[:, :, 0, 0].real.argmax(), (13, 13))
    mat = ora[peak[0], peak[1]]
    assert mat[0, 1].real == pytest.approx(mat[0, 0].real, rel=1e-6)
    assert np.linalg.eigvalsh(ora).min() > -1e-9


def test_assemble_field_hermitian(cv19, dv3, phases6):
    counts = np.full((6, 6), 200)
    ens, _ = sim.sample_ensemble(sim.vacuum(), phases6, phases6, counts,
                                 seed=2)
    w = compute_weights(ens)
    grid = PhaseSpaceGrid(-2, 2, -2, 2, 5, 5)
    fld = assemble_field(ens, w, cv19, dv3, grid, 3)
    np.testing.assert_array_equal(
        fld.values, np.conj(np.swapaxes(fld.values, -1, -2)))
    np.testing.assert_array_equal(fld.errors,
                                  np.swapaxes(fld.errors, -1, -2))
    assert np.all(fld.errors >= 0)
    assert fld.w == 1.9


def test_json_roundtrip(tmp_path):
    rng = np.random.default_rng(5)

    def mat(i, j):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        return 0.5 * (a + np.conj(a.T))

    fld = synthetic_field(mat, lambda i, j: np.full((2, 2), 0.2), d=2)
    path = tmp_path / "field.json"
    save_field(path, fld, significance_report(fld))
    back = load_field(path)
    np.testing.assert_array_equal(back.values, fld.values)
    np.testing.assert_array_equal(back.errors, fld.errors)
    assert back.grid == fld.grid and back.d == 2 and back.w == 1.9
    doc = json.loads(path.read_text())
    assert set(doc) >= {"grid", "w", "d", "matrices", "errors", "significance"}
    assert {m["order"] for m in doc["significance"]["maxima"]} == {0, 1}
    # json must stay finite-valued (nulls for undefined significances)
    json.loads(path.read_text(), parse_constant=lambda s: pytest.fail(s))


def test_oracle_field_flag_roundtrip(tmp_path):
    fld = synthetic_field(lambda i, j: np.eye(1, dtype=complex),
                          lambda i, j: np.zeros((1, 1)), d=1, oracle=True)
    path = tmp_path / "oracle.json"
    save_field(path, fld)
    doc = json.loads(path.read_text())
    assert doc["oracle"] is True
    assert load_field(path).oracle


def test_field_from_json_rejects_malformed():
    with pytest.raises(DataError):
        field_from_json({"grid": {"re_min": 0}})
