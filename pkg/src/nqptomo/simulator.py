"""Synthetic two-mode balanced-homodyne data for a catalog of hybrid states.

Every model exposes the exact joint quadrature density
p(x1, phi1, x2, phi2) in the pinned convention (vacuum variance 1/2, phase
in the rotated-quadrature sense p(x; phi + pi) = p(-x; phi)) and knows how
to draw exact samples per phase pair.  Pure hybrid states are represented as
sum_k c_k |cv_k> (x) |k>, which covers coherent/Fock/photon-added catalog
entries; the two-mode squeezed vacuum is Gaussian and sampled in closed
form; its dephased variant is a Fock mixture.

Samplers are deterministic: cell (i, j) of the phase grid uses the seeded
generator default_rng([seed, i, j]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .core import DataError, PhaseGroup, PhaseGroupedEnsemble, _equidistant

SQRT2 = math.sqrt(2.0)
_PI4 = math.pi ** (-0.25)


def hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """Harmonic-oscillator eigenfunctions psi_0..psi_n_max on x, shape
    (n_max+1, len(x)); vacuum variance 1/2: psi_0 = pi^-1/4 e^{-x^2/2}."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1, len(x)))
    out[0] = _PI4 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = SQRT2 * x * out[0]
    for n in range(2, n_max + 1):
        out[n] = math.sqrt(2.0 / n) * x * out[n - 1] \
            - math.sqrt((n - 1) / n) * out[n - 2]
    return out


def coherent_wavefunction(x, phi: float, beta: complex) -> np.ndarray:
    """<x, phi|beta> for a coherent state."""
    x = np.asarray(x, dtype=float)
    g = beta * np.exp(-1j * phi)
    a, b = SQRT2 * g.real, SQRT2 * g.imag
    return _PI4 * np.exp(-0.5 * (x - a) ** 2 + 1j * b * x - 0.5j * a * b)


# ---------------------------------------------------------------------------
# single-mode constituents


class Coherent:
    def __init__(self, beta):
        self.beta = complex(beta)

    tag = "coherent"

    def amplitude(self, x, phi):
        return coherent_wavefunction(x, phi, self.beta)

    def char_n(self, xi):
        """Normally ordered characteristic function Tr[rho e^{xi a+} e^{-xi* a}]."""
        xi = np.asarray(xi, dtype=complex)
        b = self.beta
        return np.exp(xi * np.conj(b) - np.conj(xi) * b)

    def x_halfwidth(self):
        return SQRT2 * abs(self.beta) + 7.0

    def params(self):
        return {"beta_re": self.beta.real, "beta_im": self.beta.imag}


class Fock:
    def __init__(self, n: int):
        if n < 0:
            raise DataError("photon number must be >= 0")
        self.n = int(n)

    tag = "fock"

    def amplitude(self, x, phi):
        psi = hermite_functions(self.n, np.atleast_1d(np.asarray(x, float)))[self.n]
        return psi * np.exp(-1j * self.n * phi)

    def char_n(self, xi):
        from .pattern_dv import laguerre_recurrence
        xi = np.asarray(xi, dtype=complex)
        return laguerre_recurrence(self.n, 0, np.abs(xi) ** 2).astype(complex)

    def x_halfwidth(self):
        return math.sqrt(2.0 * self.n + 1.0) + 6.0

    def params(self):
        return {"n_photon": self.n}


class PhotonAddedCoherent:
    """a+|beta> normalized; reduces to |1> at beta = 0."""

    def __init__(self, beta):
        self.beta = complex(beta)
        self._norm = 1.0 / math.sqrt(1.0 + abs(self.beta) ** 2)

    tag = "spacs"

    def amplitude(self, x, phi):
        x = np.asarray(x, dtype=float)
        g = self.beta * np.exp(-1j * phi)
        base = coherent_wavefunction(x, phi, self.beta)
        return self._norm * np.exp(-1j * phi) * (SQRT2 * x - g) * base

    def char_n(self, xi):
        xi = np.asarray(xi, dtype=complex)
        b = self.beta
        lin = xi * np.conj(b) - np.conj(xi) * b
        pre = 1.0 + abs(b) ** 2 + lin - np.abs(xi) ** 2
        return self._norm ** 2 * np.exp(lin) * pre

    def x_halfwidth(self):
        return SQRT2 * abs(self.beta) + 8.0

    def params(self):
        return {"beta_re": self.beta.real, "beta_im": self.beta.imag}


def _cross_char(left, right, xi):
    """<right| e^{xi a+} e^{-xi* a} |left> for coherent/photon-added pairs."""
    xi = np.asarray(xi, dtype=complex)

    def coh(b1, b2):
        # <b2| E(xi) |b1> = e^{xi b2* - xi* b1} <b2|b1>
        ov = np.exp(np.conj(b2) * b1 - 0.5 * abs(b1) ** 2 - 0.5 * abs(b2) ** 2)
        return np.exp(xi * np.conj(b2) - np.conj(xi) * b1) * ov

    lc, rc = isinstance(left, Coherent), isinstance(right, Coherent)
    la, ra = isinstance(left, PhotonAddedCoherent), isinstance(right, PhotonAddedCoherent)
    if lc and rc:
        return coh(left.beta, right.beta)
    if la and rc:
        # <b2| E a+ |b1> / norm = (b2* - xi*) <b2|E|b1> ... with a+ acting right
        b1, b2 = left.beta, right.beta
        return left._norm * (np.conj(b2) - np.conj(xi)) * coh(b1, b2)
    if lc and ra:
        b1, b2 = left.beta, right.beta
        return right._norm * (b1 + xi) * coh(b1, b2)
    if la and ra:
        b1, b2 = left.beta, right.beta
        pre = (1.0 + np.conj(b2) * b1 + xi * np.conj(b2) - np.conj(xi) * b1
               - xi * np.conj(xi))
        return left._norm * right._norm * pre * coh(b1, b2)
    if isinstance(left, Fock) and isinstance(right, Fock):
        from .pattern_dv import laguerre_recurrence
        from scipy.special import gammaln
        m, n = left.n, right.n  # <n| E |m>
        z = np.abs(xi) ** 2
        if n >= m:
            pref = math.exp(0.5 * (gammaln(m + 1) - gammaln(n + 1)))
            return pref * xi ** (n - m) * laguerre_recurrence(m, n - m, z)
        pref = math.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
        return pref * (-np.conj(xi)) ** (m - n) * laguerre_recurrence(n, m - n, z)
    raise DataError(
        f"no closed-form characteristic function for {type(left).__name__} x "
        f"{type(right).__name__}")


# ---------------------------------------------------------------------------
# generic term-table sampler (marginal inverse-CDF + conditional bisection)


class TermTableSampler:
    """Samples p(x1, x2) = sum_t R_t(x1) S_t(x2) given on uniform grids."""

    def __init__(self, x1_grid, R, x2_grid, S):
        self.x1 = x1_grid
        self.x2 = x2_grid
        self.R = R
        d2 = x2_grid[1] - x2_grid[0]
        # cumulative trapezoid of each S_t
        mids = 0.5 * (S[:, 1:] + S[:, :-1]) * d2
        self.cum_s = np.concatenate([np.zeros((S.shape[0], 1)), np.cumsum(mids, axis=1)], axis=1)
        self.s_int = self.cum_s[:, -1]
        marg = np.maximum(self.R.T @ self.s_int, 0.0)
        d1 = x1_grid[1] - x1_grid[0]
        m_mids = 0.5 * (marg[1:] + marg[:-1]) * d1
        cdf = np.concatenate([[0.0], np.cumsum(m_mids)])
        self.norm = cdf[-1]
        if not self.norm > 0:
            raise DataError("term tables give a non-normalizable density")
        cdf = cdf / self.norm
        keep = np.concatenate([[True], np.diff(cdf) > 1e-15])
        keep[0] = keep[-1] = True
        self._inv1 = PchipInterpolator(cdf[keep], x1_grid[keep])
        self._cdf_lo, self._cdf_hi = cdf[keep][0], cdf[keep][-1]

    def sample(self, n, rng):
        u1 = np.clip(rng.random(n), self._cdf_lo, self._cdf_hi)
        x1 = self._inv1(u1)
        # conditional coefficients: R_t at the sampled x1 (linear interp)
        d1 = self.x1[1] - self.x1[0]
        pos = np.clip((x1 - self.x1[0]) / d1, 0.0, len(self.x1) - 1.000001)
        i0 = pos.astype(np.int64)
        t = pos - i0
        coef = (1.0 - t) * self.R[:, i0] + t * self.R[:, i0 + 1]  # (T, n)
        tot = np.einsum("tn,t->n", coef, self.s_int)
        tot = np.maximum(tot, 1e-300)
        target = rng.random(n) * tot
        lo = np.zeros(n, dtype=np.int64)
        hi = np.full(n, len(self.x2) - 1, dtype=np.int64)
        for _ in range(int(math.ceil(math.log2(len(self.x2)))) + 1):
            mid = (lo + hi) // 2
            val = np.einsum("tn,tn->n", coef, self.cum_s[:, mid])
            less = val < target
            lo = np.where(less, mid, lo)
            hi = np.where(less, hi, mid)
            if np.all(hi - lo <= 1):
                break
        c_lo = np.einsum("tn,tn->n", coef, self.cum_s[:, lo])
        c_hi = np.einsum("tn,tn->n", coef, self.cum_s[:, hi])
        frac = np.where(c_hi > c_lo, (target - c_lo) / np.maximum(c_hi - c_lo, 1e-300), 0.5)
        x2 = self.x2[lo] + np.clip(frac, 0.0, 1.0) * (self.x2[hi] - self.x2[lo])
        return np.asarray(x1), x2


def _loss_transform(grid: np.ndarray, values: np.ndarray, eta: float) -> np.ndarray:
    """Detection-loss map on a 1-D (quasi)density table over `grid`:
    scale x -> sqrt(eta) x, then convolve with the vacuum admixture
    N(0, (1-eta)/2).  Linear, applied term by term."""
    if eta == 1.0:
        return values
    d = grid[1] - grid[0]
    scaled = np.interp(grid / math.sqrt(eta), grid, values, left=0.0, right=0.0)
    scaled = scaled / math.sqrt(eta)
    sig = math.sqrt((1.0 - eta) / 2.0)
    half = int(math.ceil(5.0 * sig / d))
    k = np.arange(-half, half + 1) * d
    kern = np.exp(-k * k / (2.0 * sig * sig))
    kern /= kern.sum()
    out = np.convolve(scaled, kern, mode="same")
    return out


# ---------------------------------------------------------------------------
# catalog models


class PureHybridModel:
    """Pure hybrid state sum_k c_k |cv_k> (x) |k>_DV."""

    def __init__(self, components, tag, params, meta=None, eta=1.0,
                 grid_n=4096):
        # components: list of (dv_index, coeff, single-mode constituent)
        self.components = list(components)
        norm = math.sqrt(sum(abs(c) ** 2 for _, c, _ in self.components))
        if not math.isclose(norm, 1.0, rel_tol=1e-9):
            raise DataError(f"hybrid components are not normalized (norm={norm})")
        self.tag = tag
        self._params = params
        self.meta_extra = meta or {}
        self.eta = float(eta)
        self.grid_n = grid_n
        self._dmax = max(k for k, _, _ in self.components)

    def params(self):
        out = dict(self._params)
        if self.eta != 1.0:
            out["eta"] = self.eta
        return out

    def with_loss(self, eta):
        return PureHybridModel(self.components, self.tag, self._params,
                               self.meta_extra, eta=self.eta * eta,
                               grid_n=self.grid_n)

    # -- exact densities ---------------------------------------------------

    def _amplitudes(self, x1, phi1):
        return {k: c * cv.amplitude(x1, phi1) for k, c, cv in self.components}

    def joint_pdf(self, x1, phi1, x2, phi2):
        scalar = np.ndim(x1) == 0 and np.ndim(x2) == 0
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        x2 = np.atleast_1d(np.asarray(x2, dtype=float))
        if self.eta != 1.0:
            out = self._lossy_pdf(x1, phi1, x2, phi2)
        else:
            amps = self._amplitudes(x1, phi1)
            psi = hermite_functions(self._dmax, x2)
            total = np.zeros(np.broadcast_shapes(x1.shape, x2.shape),
                             dtype=complex)
            for k, a in amps.items():
                total = total + a * psi[k] * np.exp(-1j * k * phi2)
            out = np.abs(total) ** 2
        return float(out.reshape(-1)[0]) if scalar else out

    # -- gridded pair terms (used for sampling and for lossy densities) ----

    def x1_halfwidth(self):
        return max(cv.x_halfwidth() for _, _, cv in self.components) \
            + (2.0 if self.eta != 1.0 else 0.0)

    def x2_halfwidth(self):
        return math.sqrt(2.0 * self._dmax + 1.0) + 6.0 \
            + (2.0 if self.eta != 1.0 else 0.0)

    def _pair_terms(self, phi1, phi2):
        """Real term tables (R_t on x1-grid, S_t on x2-grid) for the joint
        density, with per-mode loss applied."""
        n = self.grid_n
        x1 = np.linspace(-self.x1_halfwidth(), self.x1_halfwidth(), n)
        x2 = np.linspace(-self.x2_halfwidth(), self.x2_halfwidth(), n)
        amps = self._amplitudes(x1, phi1)
        psi = hermite_functions(self._dmax, x2)
        keys = sorted(amps)
        R, S = [], []
        for i, k in enumerate(keys):
            for l in keys[i:]:
                p = amps[k] * np.conj(amps[l])            # CV side
                q = psi[k] * psi[l] * np.exp(-1j * (k - l) * phi2)
                if k == l:
                    R.append(p.real)
                    S.append(q.real)
                else:
                    # 2 Re(p q) = 2[Re p Re q - Im p Im q]
                    R.append(2.0 * p.real)
                    S.append(q.real)
                    R.append(-2.0 * p.imag)
                    S.append(q.imag)
        R = np.array([_loss_transform(x1, r, self.eta) for r in R])
        S = np.array([_loss_transform(x2, s, self.eta) for s in S])
        return x1, R, x2, S

    def _lossy_pdf(self, x1, phi1, x2, phi2):
        key = (round(float(phi1), 12), round(float(phi2), 12))
        cache = getattr(self, "_pdf_cache", None)
        if cache is None:
            cache = self._pdf_cache = {}
        if key not in cache:
            cache[key] = self._pair_terms(phi1, phi2)
        g1, R, g2, S = cache[key]
        rv = np.array([np.interp(x1, g1, r, left=0.0, right=0.0) for r in R])
        sv = np.array([np.interp(x2, g2, s, left=0.0, right=0.0) for s in S])
        return np.maximum(np.einsum("t...,t...->...", rv, sv), 0.0)

    def build_cell_sampler(self, phi1, phi2):
        x1, R, x2, S = self._pair_terms(phi1, phi2)
        return TermTableSampler(x1, R, x2, S)

    # -- characteristic matrix (oracle) -------------------------------------

    def nqp_char(self, m, n, xi):
        """Phi_{m,n}(xi) = Tr[<m|rho|n>_DV e^{xi a+} e^{-xi* a}]."""
        if self.eta != 1.0:
            raise DataError("no analytic characteristic matrix with loss")
        by_k = {k: (c, cv) for k, c, cv in self.components}
        if m not in by_k or n not in by_k:
            return np.zeros(np.shape(xi), dtype=complex)
        cm, cvm = by_k[m]
        cn, cvn = by_k[n]
        return cm * np.conj(cn) * _cross_char(cvm, cvn, xi)

    def char_n(self, xi):
        """Single-mode characteristic function of the CV state when the DV
        side is trivial (one component)."""
        if len(self.components) == 1 and self.eta == 1.0:
            return self.components[0][2].char_n(xi)
        raise DataError("char_n requires a single-component (product) state")


class GaussianTmsvModel:
    """Two-mode squeezed vacuum, mean photon number p/(1-p) per mode."""

    tag = "tmsv"

    def __init__(self, p: float, eta: float = 1.0):
        if not 0.0 < p < 1.0:
            raise DataError("tmsv parameter must satisfy 0 < p < 1")
        self.p = float(p)
        self.eta = float(eta)

    def params(self):
        out = {"p": self.p}
        if self.eta != 1.0:
            out["eta"] = self.eta
        return out

    def with_loss(self, eta):
        return GaussianTmsvModel(self.p, self.eta * eta)

    def covariance(self, phi1, phi2):
        """Covariance of (x1, x2) at the given phase pair (vacuum = 1/2)."""
        t = math.sqrt(self.p) * np.exp(-1j * (phi1 + phi2))
        c1 = (t / (1.0 - t * t)).real
        c2 = (t * t / (1.0 - t * t)).real
        a = 1.0 + 2.0 * c2
        prec = np.array([[2.0 * a, -4.0 * c1], [-4.0 * c1, 2.0 * a]])
        cov = np.linalg.inv(prec)
        if self.eta != 1.0:
            cov = self.eta * cov + (1.0 - self.eta) * 0.5 * np.eye(2)
        return cov

    def joint_pdf(self, x1, phi1, x2, phi2):
        cov = self.covariance(phi1, phi2)
        det = np.linalg.det(cov)
        prec = np.linalg.inv(cov)
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        q = (prec[0, 0] * x1 * x1 + 2.0 * prec[0, 1] * x1 * x2
             + prec[1, 1] * x2 * x2)
        return np.exp(-0.5 * q) / (2.0 * np.pi * math.sqrt(det))

    def build_cell_sampler(self, phi1, phi2):
        chol = np.linalg.cholesky(self.covariance(phi1, phi2))

        class _G:
            def sample(self, n, rng, _c=chol):
                z = rng.standard_normal((2, n))
                xy = _c @ z
                return xy[0], xy[1]
        return _G()

    def nqp_char(self, m, n, xi):
        if self.eta != 1.0:
            raise DataError("no analytic characteristic matrix with loss")
        pref = (1.0 - self.p) * math.sqrt(self.p ** (m + n))
        return pref * _cross_char(Fock(m), Fock(n), xi)


class DephasedTmsvModel:
    """Fully dephased two-mode squeezed vacuum: separable Fock mixture
    sum_n (1-p) p^n |n,n><n,n|."""

    tag = "dephased_tmsv"

    def __init__(self, p: float, eta: float = 1.0, tail: float = 1e-14):
        if not 0.0 < p < 1.0:
            raise DataError("tmsv parameter must satisfy 0 < p < 1")
        self.p = float(p)
        self.eta = float(eta)
        self.n_max = max(1, int(math.ceil(math.log(tail) / math.log(p))))
        probs = (1.0 - p) * p ** np.arange(self.n_max + 1)
        self.probs = probs / probs.sum()

    def params(self):
        out = {"p": self.p}
        if self.eta != 1.0:
            out["eta"] = self.eta
        return out

    def with_loss(self, eta):
        return DephasedTmsvModel(self.p, self.eta * eta)

    def x_halfwidth(self):
        return math.sqrt(2.0 * self.n_max + 1.0) + 6.0 + (2.0 if self.eta != 1.0 else 0.0)

    def _tables(self):
        cached = getattr(self, "_tab", None)
        if cached is None:
            grid = np.linspace(-self.x_halfwidth(), self.x_halfwidth(), 8192)
            dens = hermite_functions(self.n_max, grid) ** 2
            dens = np.array([_loss_transform(grid, r, self.eta) for r in dens])
            cached = self._tab = (grid, dens)
        return cached

    def joint_pdf(self, x1, phi1, x2, phi2):
        grid, dens = self._tables()
        p1 = np.array([np.interp(x1, grid, d, left=0.0, right=0.0) for d in dens])
        p2 = np.array([np.interp(x2, grid, d, left=0.0, right=0.0) for d in dens])
        return np.einsum("n,n...,n...->...", self.probs, p1, p2)

    def build_cell_sampler(self, phi1, phi2):
        grid, dens = self._tables()
        d = grid[1] - grid[0]
        mids = 0.5 * (dens[:, 1:] + dens[:, :-1]) * d
        cums = np.concatenate([np.zeros((dens.shape[0], 1)), np.cumsum(mids, axis=1)], axis=1)
        invs = []
        for n in range(dens.shape[0]):
            cdf = cums[n] / cums[n, -1]
            keep = np.concatenate([[True], np.diff(cdf) > 1e-15])
            keep[-1] = True
            invs.append(PchipInterpolator(cdf[keep], grid[keep]))
        probs = self.probs

        class _M:
            def sample(self, n, rng):
                comp = rng.choice(len(probs), size=n, p=probs)
                u1, u2 = rng.random(n), rng.random(n)
                x1 = np.empty(n)
                x2 = np.empty(n)
                for c in np.unique(comp):
                    sel = comp == c
                    x1[sel] = invs[c](u1[sel])
                    x2[sel] = invs[c](u2[sel])
                return x1, x2
        return _M()

    def nqp_char(self, m, n, xi):
        if self.eta != 1.0:
            raise DataError("no analytic characteristic matrix with loss")
        xi = np.asarray(xi, dtype=complex)
        if m != n:
            return np.zeros(xi.shape, dtype=complex)
        from .pattern_dv import laguerre_recurrence
        pref = (1.0 - self.p) * self.p ** n
        return pref * laguerre_recurrence(n, 0, np.abs(xi) ** 2).astype(complex)


# ---------------------------------------------------------------------------
# catalog constructors


def vacuum():
    return product(Coherent(0.0), 0)


def coherent_state(beta):
    return product(Coherent(beta), 0)


def fock_state(n):
    return product(Fock(n), 0)


def spacs(beta):
    return product(PhotonAddedCoherent(beta), 0)


def product(cv, dv_fock: int = 0, dv_vector=None, tag=None):
    """Product state cv (x) |dv>; dv is a Fock level or a DV amplitude
    vector (a pure DV state)."""
    if dv_vector is not None:
        vec = np.asarray(dv_vector, dtype=complex)
        vec = vec / np.linalg.norm(vec)
        comps = [(k, vec[k], cv) for k in range(len(vec)) if vec[k] != 0]
    else:
        comps = [(int(dv_fock), 1.0, cv)]
    name = tag or f"product_{getattr(cv, 'tag', 'cv')}"
    return PureHybridModel(comps, name, {"cv": getattr(cv, "tag", "?"),
                                         **cv.params()})


def hybrid_cat(beta):
    """(|beta>|0> + |-beta>|1>) / sqrt(2)."""
    b = complex(beta)
    c = 1.0 / math.sqrt(2.0)
    return PureHybridModel([(0, c, Coherent(b)), (1, c, Coherent(-b))],
                           "hybrid_cat", {"beta_re": b.real, "beta_im": b.imag})


def experimental(beta):
    """(|beta>|1> + a+|beta>/||.|| |0>) / sqrt(2), the photon-addition
    superposition with interferometer transmission t = 1/sqrt(|beta|^2 + 2);
    the coherent approximation to the added branch has optimal gain
    g = (1 + sqrt(1 + 4/|beta|^2))/2."""
    b = complex(beta)
    if b == 0:
        raise DataError("experimental state needs beta != 0")
    c = 1.0 / math.sqrt(2.0)
    g = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 / abs(b) ** 2))
    t = 1.0 / math.sqrt(abs(b) ** 2 + 2.0)
    return PureHybridModel(
        [(0, c, PhotonAddedCoherent(b)), (1, c, Coherent(b))],
        "experimental", {"beta_re": b.real, "beta_im": b.imag},
        meta={"gain": g, "transmission": t})


def tmsv(p):
    return GaussianTmsvModel(p)


def dephased_tmsv(p):
    return DephasedTmsvModel(p)


def apply_loss(model, eta: float):
    """Detection efficiency eta on both modes (beam-splitter vacuum
    admixture at the quadrature level); eta = 1 is the identity."""
    if not 0.0 < eta <= 1.0:
        raise DataError("eta must be in (0, 1]")
    if eta == 1.0:
        return model
    # coherent states stay coherent under loss: shortcut keeps them exact
    if isinstance(model, PureHybridModel) and len(model.components) == 1 \
            and isinstance(model.components[0][2], Coherent) and model.eta == 1.0:
        k, c, cv = model.components[0]
        if k == 0:
            return product(Coherent(math.sqrt(eta) * cv.beta), 0)
    return model.with_loss(eta)


def make_model(tag: str, **kw):
    """CLI-facing factory; see the catalog constructors for parameters."""
    tag = tag.lower()
    beta = complex(kw.get("beta", 0.0))
    if tag == "vacuum":
        m = vacuum()
    elif tag == "coherent":
        if "beta" not in kw:
            raise DataError("coherent state needs --beta")
        m = coherent_state(beta)
    elif tag == "fock":
        if "n_photon" not in kw:
            raise DataError("fock state needs --n-photon")
        m = fock_state(int(kw["n_photon"]))
    elif tag == "spacs":
        if "beta" not in kw:
            raise DataError("photon-added coherent state needs --beta")
        m = spacs(beta)
    elif tag == "hybrid_cat":
        if "beta" not in kw:
            raise DataError("hybrid cat state needs --beta")
        m = hybrid_cat(beta)
    elif tag == "experimental":
        if "beta" not in kw:
            raise DataError("experimental state needs --beta")
        m = experimental(beta)
    elif tag == "tmsv":
        if "p" not in kw:
            raise DataError("tmsv needs --p")
        m = tmsv(float(kw["p"]))
    elif tag == "dephased_tmsv":
        if "p" not in kw:
            raise DataError("dephased tmsv needs --p")
        m = dephased_tmsv(float(kw["p"]))
    elif tag == "product":
        cv_tag = kw.get("cv", "coherent")
        if cv_tag == "coherent":
            cv = Coherent(beta)
        elif cv_tag == "fock":
            cv = Fock(int(kw.get("n_photon", 0)))
        elif cv_tag == "spacs":
            cv = PhotonAddedCoherent(beta)
        else:
            raise DataError(f"unknown cv constituent {cv_tag!r}")
        m = product(cv, int(kw.get("dv_fock", 0)))
    else:
        raise DataError(f"unknown state tag {tag!r}")
    eta = float(kw.get("eta", 1.0))
    return apply_loss(m, eta)


# ---------------------------------------------------------------------------
# ensemble generation


def sample_ensemble(model, phases_cv, phases_dv, counts, seed: int):
    """Draw a phase-grouped ensemble from `model`.

    counts[i, j] >= 2 samples are drawn at phase pair (phases_cv[i],
    phases_dv[j]); cell (i, j) uses the generator default_rng([seed, i, j]),
    so ensembles are reproducible cell by cell.  Returns (ensemble, meta).
    """
    phases_cv = np.asarray(phases_cv, dtype=float)
    phases_dv = np.asarray(phases_dv, dtype=float)
    counts = np.asarray(counts, dtype=int)
    if counts.shape != (len(phases_cv), len(phases_dv)):
        raise DataError("counts must have shape (len(phases_cv), len(phases_dv))")
    if np.any(counts < 2):
        raise DataError("every phase-pair cell needs at least 2 samples")
    if np.any(phases_cv < 0) or np.any(phases_cv >= np.pi) \
            or np.any(phases_dv < 0) or np.any(phases_dv >= np.pi):
        raise DataError("phases must lie in [0, pi)")

    groups = []
    for i, p1 in enumerate(phases_cv):
        for j, p2 in enumerate(phases_dv):
            rng = np.random.default_rng([int(seed), i, j])
            sampler = model.build_cell_sampler(float(p1), float(p2))
            x1, x2 = sampler.sample(int(counts[i, j]), rng)
            groups.append(PhaseGroup(float(p1), float(p2), x1, x2))
    groups.sort(key=lambda g: (g.phi_cv, g.phi_dv))
    ens = PhaseGroupedEnsemble(
        groups=tuple(groups),
        equidistant_cv=_equidistant(np.unique(phases_cv)),
        equidistant_dv=_equidistant(np.unique(phases_dv)),
    )
    meta = {
        "state": model.tag,
        "params": model.params(),
        "seed": int(seed),
        "phases_cv": [float(p) for p in phases_cv],
        "phases_dv": [float(p) for p in phases_dv],
        "counts": counts.tolist(),
        "n_total": int(counts.sum()),
    }
    meta.update(getattr(model, "meta_extra", {}))
    return ens, meta
