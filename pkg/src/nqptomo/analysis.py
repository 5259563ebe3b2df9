"""Assembly of the sampled NQP matrix field, eigenvalue negativity maps,
error propagation, and the conditional-nonclassicality verdict.

A hybrid state is conditionally nonclassical when the matrix field fails
positive semidefiniteness somewhere: some DV projection then prepares a CV
state whose filtered P function is negative.  The certificates are

    S_n(alpha)     = -P_{n,n}(alpha) / sigma(P_{n,n}(alpha)),
    Sigma_n(alpha) = -e_n(alpha) / sigma(e_n(alpha)),

with e_n the minimal eigenvalue of the (n+1)x(n+1) leading principal
submatrix and sigma(e) = |v|^T sigma |v| the linearly propagated error of
the minimizing eigenvector v.  Positive values flag significant negativity.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import DataError, PhaseSpaceGrid, projection_vector
from .estimator import compute_field
from .pattern_cv import CvPatternEvaluator
from .pattern_dv import DvPatternEvaluator

#: negativities above this many standard deviations count as a detection
CHN_THRESHOLD = 5.0

#: eigenvalue gap (relative to the matrix scale) below which the minimal
#: eigenvalue is flagged degenerate and first-order error propagation is
#: unreliable
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class NqpMatrixField:
    """Hermitian matrix estimates and element-wise errors on a grid."""

    grid: PhaseSpaceGrid
    d: int
    w: float
    values: np.ndarray   # (n_re, n_im, d, d) complex, Hermitian
    errors: np.ndarray   # (n_re, n_im, d, d) real, symmetric
    oracle: bool = False

    def __post_init__(self):
        expect = (self.grid.n_re, self.grid.n_im, self.d, self.d)
        if self.values.shape != expect or self.errors.shape != expect:
            raise DataError("field arrays do not match the grid/dimension")

    def at(self, i: int, j: int) -> np.ndarray:
        return self.values[i, j]


def assemble_field(ensemble, weights, cv_eval: CvPatternEvaluator,
                   dv_eval: DvPatternEvaluator, grid: PhaseSpaceGrid,
                   d: int) -> NqpMatrixField:
    """Sample every matrix element on the grid and Hermitize.

    The estimator fills m <= n and mirrors, so the symmetrization
    value <- (value + value^dagger)/2 is exact; it is applied anyway as the
    documented invariant.
    """
    alphas = grid.alphas.ravel()
    values, errors = compute_field(ensemble, weights, cv_eval, dv_eval,
                                   alphas, d)
    values = values.reshape(grid.n_re, grid.n_im, d, d)
    errors = errors.reshape(grid.n_re, grid.n_im, d, d)
    values = 0.5 * (values + np.conj(np.swapaxes(values, -1, -2)))
    errors = 0.5 * (errors + np.swapaxes(errors, -1, -2))
    return NqpMatrixField(grid, d, cv_eval.w, values, errors)


def min_eigenpair(matrix: np.ndarray):
    """Smallest eigenvalue and its (normalized) eigenvector of a Hermitian
    matrix; ties resolve to the first vector of the LAPACK decomposition."""
    matrix = np.asarray(matrix)
    scale = max(float(np.max(np.abs(matrix))), 1e-300)
    if np.max(np.abs(matrix - np.conj(matrix.T))) > 1e-10 * scale:
        raise DataError("matrix is not Hermitian")
    evals, evecs = np.linalg.eigh(matrix)
    return float(evals[0]), evecs[:, 0]


def eigenvalue_error(v: np.ndarray, sigma_matrix: np.ndarray) -> float:
    """Linearly propagated error sigma(e) = |v|^T sigma |v|."""
    v = np.asarray(v)
    sigma_matrix = np.asarray(sigma_matrix)
    if sigma_matrix.shape != (len(v), len(v)):
        raise DataError("error matrix does not match the eigenvector")
    a = np.abs(v)
    return float(a @ sigma_matrix @ a)


@dataclass(frozen=True)
class SignificanceReport:
    """Per-order eigenvalue and diagonal negativity maps with their maxima."""

    grid: PhaseSpaceGrid
    d: int
    w: float
    e: np.ndarray            # (d, n_re, n_im) minimal eigenvalues e_n
    sigma_e: np.ndarray      # propagated errors
    eigenvectors: np.ndarray  # (d, n_re, n_im, d) padded with zeros
    s_maps: np.ndarray       # (d, n_re, n_im) diagonal significances
    sigma_maps: np.ndarray   # (d, n_re, n_im) eigenvalue significances
    maxima: list = field(default_factory=list)
    degenerate: int = 0
    warnings_: list = field(default_factory=list)

    @property
    def chn_detected(self) -> bool:
        return any(m["sigma_max"] is not None
                   and m["sigma_max"] >= CHN_THRESHOLD for m in self.maxima)

    @property
    def best(self) -> dict:
        return max(self.maxima,
                   key=lambda m: -np.inf if m["sigma_max"] is None
                   else m["sigma_max"])

    def verdict(self) -> str:
        if self.chn_detected:
            b = self.best
            return (f"CHN detected at Sigma_{b['order']} = "
                    f"{b['sigma_max']:.2f} sigma (alpha = "
                    f"{b['sigma_argmax'][0]:+.3f}{b['sigma_argmax'][1]:+.3f}i)")
        return "no CHN at this width"


def _ratio_map(numer: np.ndarray, sigma: np.ndarray, warn: list, label: str):
    out = np.full(numer.shape, np.nan)
    ok = sigma > 0
    out[ok] = numer[ok] / sigma[ok]
    bad = (~ok) & (np.abs(numer) > 0)
    if np.any(bad):
        warn.append(f"{label}: {int(bad.sum())} points have zero error with "
                    "nonzero estimate; significance undefined there")
        out[bad] = np.inf
    out[(~ok) & ~bad] = 0.0
    return out


def significance_report(field_: NqpMatrixField) -> SignificanceReport:
    """Eigenvalue and diagonal negativity significances for every leading
    principal submatrix order."""
    d = field_.d
    n_re, n_im = field_.grid.n_re, field_.grid.n_im
    vals, errs = field_.values, field_.errors
    warn: list[str] = []
    if field_.oracle or not np.any(errs > 0):
        warn.append("error matrix is identically zero (analytic field); "
                    "significance maps are undefined")

    e = np.empty((d, n_re, n_im))
    sig_e = np.empty((d, n_re, n_im))
    vecs = np.zeros((d, n_re, n_im, d), dtype=complex)
    degenerate = 0
    for order in range(d):
        k = order + 1
        sub = vals[:, :, :k, :k]
        evals, evecs = np.linalg.eigh(sub)
        e[order] = evals[..., 0]
        v = evecs[..., :, 0]
        vecs[order, :, :, :k] = v
        sig_e[order] = np.einsum("...m,...mn,...n->...", np.abs(v),
                                 errs[:, :, :k, :k], np.abs(v))
        if k > 1:
            gap = evals[..., 1] - evals[..., 0]
            scale = np.maximum(np.abs(evals).max(axis=-1), 1e-300)
            degenerate += int(np.count_nonzero(gap <= DEGENERACY_TOL * scale))

    diag = np.moveaxis(np.diagonal(vals, axis1=2, axis2=3).real, -1, 0)
    diag_err = np.moveaxis(np.diagonal(errs, axis1=2, axis2=3), -1, 0)
    s_maps = _ratio_map(-diag, diag_err, warn, "S")
    sigma_maps = _ratio_map(-e, sig_e, warn, "Sigma")

    if degenerate:
        warn.append(f"{degenerate} grid points have a (near-)degenerate "
                    "minimal eigenvalue; propagated errors there are "
                    "first-order only")

    res = field_.grid.re_values
    ims = field_.grid.im_values
    maxima = []
    for order in range(d):
        entry = {"order": order}
        for name, mp in (("s", s_maps[order]), ("sigma", sigma_maps[order])):
            finite = np.where(np.isfinite(mp), mp, -np.inf)
            if np.all(~np.isfinite(finite)):
                entry[f"{name}_max"] = None
                entry[f"{name}_argmax"] = None
                continue
            idx = np.unravel_index(np.argmax(finite), mp.shape)
            entry[f"{name}_max"] = float(mp[idx])
            entry[f"{name}_argmax"] = (float(res[idx[0]]), float(ims[idx[1]]))
        maxima.append(entry)

    return SignificanceReport(field_.grid, d, field_.w, e, sig_e, vecs,
                              s_maps, sigma_maps, maxima, degenerate, warn)


def conditional_distribution(field_: NqpMatrixField, psi):
    """Unnormalized conditional quasiprobability psi^dag P(alpha) psi with
    its propagated error; the positive normalization constant cannot change
    signs and is not applied."""
    psi = projection_vector(psi)
    if len(psi) != field_.d:
        raise DataError("projection vector dimension does not match d")
    vals = np.einsum("m,ijmn,n->ij", np.conj(psi), field_.values, psi).real
    a = np.abs(psi)
    sig = np.einsum("m,ijmn,n->ij", a, field_.errors, a)
    return vals, sig


# ---------------------------------------------------------------------------
# JSON document (fixed schema)


def _complex_nested(arr: np.ndarray):
    stacked = np.stack([arr.real, arr.imag], axis=-1)
    return stacked.tolist()


def _nested_complex(lst) -> np.ndarray:
    arr = np.asarray(lst, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def field_to_json(field_: NqpMatrixField,
                  report: SignificanceReport | None = None) -> dict:
    doc = {
        "grid": field_.grid.to_dict(),
        "w": field_.w,
        "d": field_.d,
        "matrices": _complex_nested(field_.values),
        "errors": field_.errors.tolist(),
        "significance": None,
    }
    if field_.oracle:
        doc["oracle"] = True
    if report is not None:
        def clean(x):
            if x is None or np.isfinite(x):
                return x
            return None
        doc["significance"] = {
            "S": np.where(np.isfinite(report.s_maps), report.s_maps, None).tolist(),
            "Sigma": np.where(np.isfinite(report.sigma_maps),
                              report.sigma_maps, None).tolist(),
            "maxima": [
                {"order": m["order"],
                 "s_max": clean(m["s_max"]),
                 "s_argmax": list(m["s_argmax"]) if m["s_argmax"] else None,
                 "sigma_max": clean(m["sigma_max"]),
                 "sigma_argmax": list(m["sigma_argmax"]) if m["sigma_argmax"] else None}
                for m in report.maxima
            ],
            "e": report.e.tolist(),
            "sigma_e": report.sigma_e.tolist(),
            "verdict": report.verdict(),
            "warnings": list(report.warnings_),
        }
    return doc


def field_from_json(doc: dict) -> NqpMatrixField:
    try:
        grid = PhaseSpaceGrid.from_dict(doc["grid"])
        d = int(doc["d"])
        w = float(doc["w"])
        values = _nested_complex(doc["matrices"])
        errors = np.asarray(doc["errors"], dtype=float)
    except (KeyError, TypeError, IndexError) as exc:
        raise DataError(f"not a valid field document: {exc}") from None
    return NqpMatrixField(grid, d, w, values, errors,
                          oracle=bool(doc.get("oracle", False)))


def save_field(path, field_: NqpMatrixField,
               report: SignificanceReport | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(field_to_json(field_, report), fh)


def load_field(path) -> NqpMatrixField:
    with open(path) as fh:
        return field_from_json(json.load(fh))
