"""Weighted pattern-function sampling of the NQP matrix with error bars.

Measured quadratures use the pinned vacuum-variance-1/2 normalization while
the pattern integrals are defined in vacuum-variance-1 units, so data enter
every kernel through the scaled argument sqrt(2)*x.

Per phase-pair group l the sampled kernel is

    g_j = f'(sqrt2 x_cv,j; alpha, w) * F'_{m,n}(sqrt2 x_dv,j, phi_dv)

with both pattern functions averaged over their mode's phase bin.  The
weighted estimate and its error are

    estimate = sum_l N_l varpi_l mean_l(g),
    sigma^2  = sum_l varpi_l^2 N_l (mean_l |g|^2 - |mean_l g|^2),

the variance without Bessel correction.  Groups combine in ascending
(phi_cv, phi_dv) order, so results are reproducible bit for bit.

`compute_field` evaluates the same estimator on a whole set of alphas at
once: per group the data are deposited on the pattern-function lattice
(linear split, equivalent to per-sample linear interpolation of the
kernel), one FFT cross-correlation per matrix element yields the group sum
for every shift, and the phase-bin average reduces to a few Gauss-Legendre
lattice lookups per alpha.  Second moments use a coarser lattice and
two-point product tables; they carry percent-level accuracy, which only
affects the error bars, not the estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DataError, PhaseGroupedEnsemble, as_amplitude
from .fourier import Correlator
from .pattern_cv import CvPatternEvaluator, _gauss_nodes, shift_argument
from .pattern_dv import DvPatternEvaluator

SQRT2 = math.sqrt(2.0)

WEIGHT_SCHEMES = ("equidistant", "general-interval", "uniform")


def phase_bins(phases: np.ndarray) -> dict[float, tuple[float, float]]:
    """Midpoint bins around each distinct phase, with periodic closure over
    [0, pi); bin widths sum to pi."""
    phases = np.sort(np.asarray(phases, dtype=float))
    k = len(phases)
    out = {}
    for i, p in enumerate(phases):
        lo = 0.5 * (phases[i - 1] - (np.pi if i == 0 else 0.0) + p)
        nxt = phases[(i + 1) % k] + (np.pi if i == k - 1 else 0.0)
        hi = 0.5 * (p + nxt)
        out[float(p)] = (float(lo), float(hi))
    return out


@dataclass(frozen=True)
class WeightAssignment:
    """Per-sample weights varpi^(l), constant within each group."""

    scheme: str
    per_group: np.ndarray  # aligned with ensemble.groups

    def __post_init__(self):
        if self.scheme not in WEIGHT_SCHEMES:
            raise DataError(f"unknown weight scheme {self.scheme!r}")
        if np.any(self.per_group < 0):
            raise DataError("weights must be non-negative")

    def validate(self, ensemble: PhaseGroupedEnsemble):
        tot = sum(g.n * w for g, w in zip(ensemble.groups, self.per_group))
        if abs(tot - 1.0) > 1e-12:
            raise DataError(f"weights sum to {tot}, not 1")
        return self


def compute_weights(ensemble: PhaseGroupedEnsemble,
                    scheme: str | None = None) -> WeightAssignment:
    """Weights for the sampling formula.

    Equidistant phase grids get varpi^(l) = 1/(N_l I); general grids get the
    product of the per-mode interval fractions (interval width / pi) divided
    by the cell count.  "uniform" forces the plain mean varpi = 1/N, which
    is biased for non-uniform counts and exists for diagnostics.
    """
    if scheme is None:
        scheme = "equidistant" if ensemble.equidistant else "general-interval"
    groups = ensemble.groups
    if scheme == "uniform":
        n = ensemble.n_total
        w = np.array([1.0 / n] * len(groups))
        return WeightAssignment("uniform", w)
    if scheme == "equidistant":
        if not ensemble.equidistant:
            raise DataError("ensemble phases are not equidistant")
        i_tot = ensemble.n_groups
        w = np.array([1.0 / (g.n * i_tot) for g in groups])
        return WeightAssignment("equidistant", w).validate(ensemble)
    # general-interval: require a complete product grid of phase pairs
    pcs, pds = ensemble.phases_cv, ensemble.phases_dv
    if ensemble.n_groups != len(pcs) * len(pds):
        raise DataError(
            "general-interval weights need a complete product grid of phase "
            f"pairs; have {ensemble.n_groups} groups for {len(pcs)}x{len(pds)} phases")
    bins_cv = phase_bins(pcs)
    bins_dv = phase_bins(pds)
    w = []
    for g in groups:
        lo1, hi1 = bins_cv[g.phi_cv]
        lo2, hi2 = bins_dv[g.phi_dv]
        w.append((hi1 - lo1) * (hi2 - lo2) / (np.pi ** 2) / g.n)
    return WeightAssignment("general-interval", np.asarray(w)).validate(ensemble)


def weighted_moments(ensemble: PhaseGroupedEnsemble, weights: WeightAssignment,
                     group_values: list[np.ndarray]):
    """Weighted estimate and sampling error for precomputed per-sample
    kernel values g_j (one array per group, input order)."""
    est = 0.0 + 0.0j
    var = 0.0
    for g, w, vals in zip(ensemble.groups, weights.per_group, group_values):
        vals = np.asarray(vals)
        if len(vals) != g.n:
            raise DataError("kernel values do not match group size")
        mu = vals.mean()
        m2 = np.mean(np.abs(vals) ** 2)
        est += (g.n * w) * mu
        var += (w ** 2) * g.n * max(m2 - abs(mu) ** 2, 0.0)
    return est, math.sqrt(var)


def _group_kernels(ensemble, cv_eval, dv_eval, m, n, alpha):
    """Per-sample kernel values g_j for every group (direct path)."""
    bins_cv = phase_bins(ensemble.phases_cv)
    bins_dv = phase_bins(ensemble.phases_dv)
    out = []
    for g in ensemble.groups:
        lo1, hi1 = bins_cv[g.phi_cv]
        lo2, hi2 = bins_dv[g.phi_dv]
        fav = cv_eval.phase_averaged_bin(SQRT2 * g.x_cv, lo1, hi1, alpha)
        rad = dv_eval.radial(m, n, SQRT2 * g.x_dv)
        fac = dv_eval.phase_factor_avg(m - n, lo2, hi2)
        out.append(fav * rad * fac)
    return out


def sample_nqp_element(ensemble, weights, cv_eval: CvPatternEvaluator,
                       dv_eval: DvPatternEvaluator, m: int, n: int, alpha):
    """One NQP matrix element P_{m,n}(alpha) with its sampling error."""
    alpha = as_amplitude(alpha)
    vals = _group_kernels(ensemble, cv_eval, dv_eval, m, n, alpha)
    return weighted_moments(ensemble, weights, vals)


def sample_dv_density(ensemble, weights, dv_eval: DvPatternEvaluator,
                      m: int, n: int):
    """DV density-matrix element rho_{m,n} sampled from the DV mode alone
    (the CV mode is marginalized)."""
    bins_dv = phase_bins(ensemble.phases_dv)
    vals = []
    for g in ensemble.groups:
        lo2, hi2 = bins_dv[g.phi_dv]
        rad = dv_eval.radial(m, n, SQRT2 * g.x_dv)
        fac = dv_eval.phase_factor_avg(m - n, lo2, hi2)
        vals.append(rad * fac)
    return weighted_moments(ensemble, weights, vals)


def _dirichlet(theta, count):
    """sum_{k=0}^{count-1} e^{i k theta}, stable near theta = 0."""
    theta = np.asarray(theta, dtype=float)
    half = 0.5 * theta
    num = np.sin(count * half)
    den = np.sin(half)
    small = np.abs(den) < 1e-12
    ratio = np.where(small, count * np.cos(count * half) /
                     np.where(small, np.cos(half), 1.0), num / np.where(small, 1.0, den))
    return ratio * np.exp(1j * (count - 1) * half)


def sample_integrated_nqp(ensemble, weights, cv_eval: CvPatternEvaluator,
                          dv_eval: DvPatternEvaluator, m: int, n: int, grid):
    """The Riemann sum  dA * sum_{alpha in grid} P_{m,n}(alpha)  sampled as a
    single estimator, so its error bar is the honest per-sample one.

    The lattice sum over the tensor grid collapses into Dirichlet kernels in
    the pattern function's Fourier variable, giving one 1-D kernel per group
    that is evaluated directly at the data points.
    """
    bins_cv = phase_bins(ensemble.phases_cv)
    bins_dv = phase_bins(ensemble.phases_dv)
    b = cv_eval.b_grid
    db = b[1] - b[0]
    simp = np.ones(len(b))
    simp[1:-1:2], simp[2:-1:2] = 4.0, 2.0
    simp *= db / 3.0
    res = grid.re_values
    ims = grid.im_values
    vals = []
    for g in ensemble.groups:
        lo1, hi1 = bins_cv[g.phi_cv]
        mid, half = 0.5 * (hi1 + lo1), 0.5 * (hi1 - lo1)
        omega = 2.0 * grid.radius * cv_eval.kernel.b_max * half
        nodes, wq = _gauss_nodes(max(24, int(math.ceil(omega)) + 8))
        gt = np.zeros(len(b), dtype=complex)
        for xq, wq_ in zip(nodes, wq):
            phi = mid + half * xq
            c, s = 2.0 * math.cos(phi), 2.0 * math.sin(phi)
            d1 = np.exp(-1j * b * c * res[0]) * _dirichlet(-b * c * (res[1] - res[0]), len(res))
            d2 = np.exp(-1j * b * s * ims[0]) * _dirichlet(-b * s * (ims[1] - ims[0]), len(ims))
            gt += (0.5 * wq_) * d1 * d2
        # fold the two half-lines: int_-bmax^bmax = 2 Re int_0^bmax
        kernel_b = 2.0 * simp * cv_eval.g * gt / np.pi
        X1 = SQRT2 * g.x_cv
        # T(X) = Re sum_b kernel_b e^{i b X}, in chunks to bound memory
        t_vals = np.empty(len(X1))
        for lo in range(0, len(X1), 4096):
            chunk = X1[lo:lo + 4096]
            phase = np.exp(1j * np.outer(chunk, b))
            t_vals[lo:lo + 4096] = (phase @ kernel_b).real
        t_vals *= grid.cell_area
        lo2, hi2 = bins_dv[g.phi_dv]
        rad = dv_eval.radial(m, n, SQRT2 * g.x_dv)
        fac = dv_eval.phase_factor_avg(m - n, lo2, hi2)
        vals.append(t_vals * rad * fac)
    return weighted_moments(ensemble, weights, vals)


# ---------------------------------------------------------------------------
# bulk field engine


def _cic_bins(x, h, x0, dx, n_bins):
    """Deposit weights h at positions x onto the lattice x0 + k*dx by linear
    (two-point) splitting; equivalent to linear interpolation of any kernel
    later correlated against the bins."""
    pos = (x - x0) / dx
    i0 = np.floor(pos).astype(np.int64)
    t = pos - i0
    if np.any(i0 < 0) or np.any(i0 + 1 >= n_bins):
        raise ValueError("binning lattice does not cover the data")
    out = np.bincount(i0, weights=h * (1.0 - t), minlength=n_bins)
    out += np.bincount(i0 + 1, weights=h * t, minlength=n_bins)
    return out


def _var_gl_order(omega: float) -> int:
    """Gauss-Legendre order for the bin average inside second moments."""
    for cut, n in ((8.0, 8), (14.0, 12), (22.0, 16), (34.0, 24)):
        if omega <= cut:
            return n
    return int(math.ceil(0.8 * omega)) + 8


def compute_field(ensemble, weights, cv_eval: CvPatternEvaluator,
                  dv_eval: DvPatternEvaluator, alphas, d: int,
                  coarse_step: float = 8e-3):
    """Sampled NQP matrices and errors at every alpha in `alphas`.

    Returns (values, errors) of shapes (n_alpha, d, d); values are exactly
    Hermitian and errors symmetric by construction (elements are computed
    for m <= n and mirrored).
    """
    if d > dv_eval.d:
        raise DataError(f"d={d} exceeds the DV evaluator dimension {dv_eval.d}")
    alphas = np.asarray(alphas, dtype=complex).ravel()
    n_alpha = len(alphas)
    pairs = [(m, n) for m in range(d) for n in range(m, d)]
    n_pairs = len(pairs)

    table = cv_eval.table
    dx = table.dx
    n_half = len(table.values)
    f_full = np.concatenate([table.values[:0:-1], table.values])
    f_x0 = -(n_half - 1) * dx

    bins_cv = phase_bins(ensemble.phases_cv)
    bins_dv = phase_bins(ensemble.phases_dv)
    abs_a = np.abs(alphas)
    a_max = float(abs_a.max())
    s_lim = 2.0 * a_max + 2.0 * dx
    b_max = cv_eval.kernel.b_max

    # coarse lattice for the second moments
    k_dec = max(1, int(round(coarse_step / dx)))
    off0 = (n_half - 1) % k_dec
    f_c = f_full[off0::k_dec]
    dx_c = k_dec * dx
    fc_x0 = f_x0 + off0 * dx
    n_c = len(f_c)

    est = np.zeros((n_alpha, n_pairs), dtype=complex)
    var = np.zeros((n_alpha, n_pairs))

    order = sorted(range(len(ensemble.groups)),
                   key=lambda i: (ensemble.groups[i].phi_cv,
                                  ensemble.groups[i].phi_dv))
    for gi in order:
        g = ensemble.groups[gi]
        w_l = weights.per_group[gi]
        X1 = SQRT2 * g.x_cv
        X2 = SQRT2 * g.x_dv
        lo1, hi1 = bins_cv[g.phi_cv]
        lo2, hi2 = bins_dv[g.phi_dv]
        mid, half = 0.5 * (hi1 + lo1), 0.5 * (hi1 - lo1)

        rad = np.array([dv_eval.radial(m, n, X2) for (m, n) in pairs])
        facs = np.array([dv_eval.phase_factor_avg(m - n, lo2, hi2)
                         for (m, n) in pairs])

        # --- first moments: fine bins, one correlation per element --------
        b_x0 = (math.floor(X1.min() / dx) - 1) * dx
        n_bins = int(math.ceil((X1.max() - b_x0) / dx)) + 2
        corr = Correlator(n_bins, b_x0, len(f_full), f_x0, dx, -s_lim, s_lim)
        f_fft = corr.table_fft(f_full)
        c_tabs = np.array([
            corr.apply(corr.bins_fft(_cic_bins(X1, rad[t], b_x0, dx, n_bins)),
                       f_fft)
            for t in range(n_pairs)])

        n_mean = max(32, int(math.ceil(2.0 * a_max * b_max * half)) + 8)
        nodes, wq = _gauss_nodes(n_mean)
        mean_acc = np.zeros((n_alpha, n_pairs))
        n_s = c_tabs.shape[1]
        for xq, wq_ in zip(nodes, wq):
            s_vals = shift_argument(alphas, mid + half * xq)
            pos = np.clip((s_vals - corr.s0) / dx, 0.0, n_s - 1.000001)
            i0 = pos.astype(np.int64)
            ts = pos - i0
            vals = c_tabs[:, i0] * (1.0 - ts) + c_tabs[:, i0 + 1] * ts
            mean_acc += (0.5 * wq_) * vals.T
        g_mean = mean_acc * facs[None, :] / g.n
        est += (g.n * w_l) * g_mean

        # --- second moments: coarse bins, two-shift product tables --------
        bc_x0 = (math.floor(X1.min() / dx_c) - 1) * dx_c
        n_binsc = int(math.ceil((X1.max() - bc_x0) / dx_c)) + 2
        corr_c = Correlator(n_binsc, bc_x0, n_c, fc_x0, dx_c, -s_lim, s_lim)
        bins2_fft = [corr_c.bins_fft(_cic_bins(X1, rad[t] ** 2, bc_x0, dx_c,
                                               n_binsc))
                     for t in range(n_pairs)]

        dx_delta = 2.0 * dx_c
        d_max = 4.0 * a_max * math.sin(half)
        n_slices = int(math.ceil(d_max / dx_delta)) + 2
        n_sb = corr_c.n_out
        g_tabs = np.empty((n_slices, n_pairs, n_sb))
        for k in range(n_slices):
            h_delta = np.zeros(n_c)
            if 2 * k < n_c:
                h_delta[k:n_c - k] = f_c[:n_c - 2 * k] * f_c[2 * k:] if k \
                    else f_c * f_c
            h_fft = corr_c.table_fft(h_delta)
            for t in range(n_pairs):
                g_tabs[k, t] = corr_c.apply(bins2_fft[t], h_fft)

        orders_per_alpha = np.array(
            [_var_gl_order(2.0 * r * b_max * half) for r in abs_a])
        e2_acc = np.zeros((n_alpha, n_pairs))
        t_cols = np.arange(n_pairs)[None, :]
        for n_q in np.unique(orders_per_alpha):
            sel = np.nonzero(orders_per_alpha == n_q)[0]
            nod, wgt = _gauss_nodes(int(n_q))
            s_nodes = np.array([shift_argument(alphas[sel], mid + half * x)
                                for x in nod])  # (n_q, n_sel)
            for qa in range(int(n_q)):
                for qb in range(qa, int(n_q)):
                    s_bar = 0.5 * (s_nodes[qa] + s_nodes[qb])
                    kf = np.abs(s_nodes[qa] - s_nodes[qb]) / dx_delta
                    k0 = np.minimum(kf.astype(np.int64), n_slices - 2)
                    tk = np.clip(kf - k0, 0.0, 1.0)[:, None]
                    ps = np.clip((s_bar - corr_c.s0) / dx_c, 0.0, n_sb - 1.000001)
                    i0 = ps.astype(np.int64)
                    ts = (ps - i0)[:, None]
                    k0c, i0c = k0[:, None], i0[:, None]
                    v_lo = (g_tabs[k0c, t_cols, i0c] * (1.0 - ts)
                            + g_tabs[k0c, t_cols, i0c + 1] * ts)
                    v_hi = (g_tabs[k0c + 1, t_cols, i0c] * (1.0 - ts)
                            + g_tabs[k0c + 1, t_cols, i0c + 1] * ts)
                    mult = (0.25 * wgt[qa] * wgt[qb]) * (1.0 if qa == qb else 2.0)
                    e2_acc[sel] += mult * ((1.0 - tk) * v_lo + tk * v_hi)

        g_m2 = e2_acc * (np.abs(facs) ** 2)[None, :] / g.n
        var += (w_l ** 2) * g.n * np.maximum(g_m2 - np.abs(g_mean) ** 2, 0.0)

    values = np.zeros((n_alpha, d, d), dtype=complex)
    errors = np.zeros((n_alpha, d, d))
    for t_idx, (m, n) in enumerate(pairs):
        values[:, m, n] = est[:, t_idx]
        sig = np.sqrt(var[:, t_idx])
        errors[:, m, n] = sig
        if m != n:
            values[:, n, m] = np.conj(est[:, t_idx])
            errors[:, n, m] = sig
    return values, errors
