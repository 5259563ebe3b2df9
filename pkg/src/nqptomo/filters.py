"""The non-Gaussian autocorrelation filter used to regularize P functions.

Omega_w(b) = N_w * int d^2g exp(-(|g|/w)^4) exp(-(|g + b|/w)^4),

with N_w fixed by Omega_w(0) = 1.  The filter is radially symmetric and
scales as Omega_w(b) = Omega_1(b/w).  The kernel object tabulates
log Omega_w on [0, b_max]; working in log space keeps the far tail accurate
and lets downstream code form b*exp(b^2/2)*Omega_w(b) without overflow.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import CubicSpline

from .core import DataError, NumericalError

#: widths beyond this underflow/overflow double precision in the tabulated
#: autocorrelation tail and the pattern integrands
W_MAX = 5.0


def _autocorr_values(bs: np.ndarray, w: float, n_r: int, n_t: int) -> np.ndarray:
    """A(b) = int d^2g e^{-(|g|/w)^4 - (|g+b|/w)^4} for each b, by a
    radial Gauss-Legendre x periodic-trapezoid product rule."""
    # the tail mass sits near the correlation saddle r = b/2, so the radial
    # domain must grow with the largest requested b
    r_cut = 3.4 * w + 0.5 * float(np.max(bs, initial=0.0))
    rx, rw = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * r_cut * (rx + 1.0)
    rw = 0.5 * r_cut * rw
    theta = np.linspace(0.0, 2.0 * np.pi, n_t, endpoint=False)
    ct = np.cos(theta)
    out = np.empty(len(bs))
    w4 = w ** 4
    chunk = max(1, int(2e6 / (n_r * n_t)))
    for lo in range(0, len(bs), chunk):
        b = bs[lo:lo + chunk][:, None, None]
        s2 = r[None, :, None] ** 2 + b * b + 2.0 * b * r[None, :, None] * ct[None, None, :]
        ang = np.exp(-(s2 * s2) / w4).sum(axis=2) * (2.0 * np.pi / n_t)
        rad = (rw * r * np.exp(-((r / w) ** 4)) * ang).sum(axis=1)
        out[lo:lo + chunk] = rad
    return out


class FilterKernel:
    """Radial table of the autocorrelation filter at one width."""

    def __init__(self, w: float, b_max: float, table_b: np.ndarray,
                 table_log_omega: np.ndarray, norm: float):
        self.w = float(w)
        self.b_max = float(b_max)
        self.table_b = table_b
        self.table_log_omega = table_log_omega
        #: normalization N_w = 1/A(0)
        self.norm = float(norm)
        self._spline = CubicSpline(table_b, table_log_omega)

    @property
    def n_table(self) -> int:
        return len(self.table_b)

    def log_eval(self, b) -> np.ndarray:
        """log Omega_w(|b|); -inf beyond b_max."""
        b = np.abs(np.asarray(b, dtype=float))
        out = self._spline(np.minimum(b, self.b_max))
        return np.where(b > self.b_max, -np.inf, np.minimum(out, 0.0))

    def eval(self, b):
        """Omega_w(|b|) in [0, 1]; 0 beyond b_max."""
        out = np.exp(self.log_eval(b))
        return out if out.ndim else float(out)

    __call__ = eval

    # -- persistence ------------------------------------------------------

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# filter-kernel w={self.w!r} b_max={self.b_max!r} "
                     f"n_table={self.n_table} norm={self.norm!r}\n")
            fh.write("b,log_omega\n")
            for b, lo in zip(self.table_b, self.table_log_omega):
                fh.write(f"{float(b)!r},{float(lo)!r}\n")

    @classmethod
    def load(cls, path, w=None, b_max=None, n_table=None) -> "FilterKernel":
        """Load a cached table; optional arguments must match the file key."""
        with open(path) as fh:
            head = fh.readline().strip()
            if not head.startswith("# filter-kernel "):
                raise DataError(f"{path}: not a filter-kernel table")
            meta = dict(tok.split("=") for tok in head[16:].split())
            fh.readline()
            data = np.loadtxt(fh, delimiter=",")
        fw, fb, fn = float(meta["w"]), float(meta["b_max"]), int(meta["n_table"])
        for name, want, got in (("w", w, fw), ("b_max", b_max, fb),
                                ("n_table", n_table, fn)):
            if want is not None and not math.isclose(want, got, rel_tol=1e-12):
                raise DataError(f"{path}: cached {name}={got} != requested {want}")
        return cls(fw, fb, data[:, 0], data[:, 1], float(meta["norm"]))


def _scan_b_max(w: float) -> float:
    """Smallest b where b*e^{b^2/2}*Omega_w(b) drops 12 decades below its
    peak; this bounds the oscillatory-integral domain of the CV pattern."""
    hi = 10.5 * max(w, 1.0) * max(w, 1.0)
    bs = np.linspace(1e-3, hi, 4096)
    a = _autocorr_values(bs, w, 96, 128)
    a0 = _autocorr_values(np.array([0.0]), w, 96, 128)[0]
    ratio = a / a0
    valid = ratio > 1e-280  # past this the tail has underflowed
    if not np.any(valid):
        raise NumericalError(f"autocorrelation underflows everywhere for w={w}")
    n_valid = int(np.nonzero(valid)[0].max()) + 1
    bs, ratio = bs[:n_valid], ratio[:n_valid]
    log_g = np.log(bs) + 0.5 * bs * bs + np.log(np.maximum(ratio, 1e-300))
    peak = int(np.argmax(log_g))
    target = log_g[peak] - 12.0 * math.log(10.0)
    after = np.nonzero(log_g[peak:] < target)[0]
    if len(after) == 0:
        raise NumericalError(f"no decayed tail found for w={w}; width too large")
    return float(bs[peak + after[0]]) * 1.02


def build_kernel(w: float, b_max: float | None = None,
                 n_table: int = 2048) -> FilterKernel:
    """Tabulate Omega_w(b) = A(b)/A(0) on [0, b_max].

    The 2-D autocorrelation reduces to a radial-angular product rule; node
    counts are doubled until the table is stable to 1e-8 relative.  When
    b_max is omitted it is chosen by the tail scan so the CV pattern
    integrand is negligible at the boundary.
    """
    if not w > 0:
        raise DataError("filter width must be positive")
    if n_table < 64:
        raise DataError("n_table must be >= 64")
    if b_max is None:
        # the auto cutoff covers the full pattern-integrand support, which
        # overflows double precision beyond W_MAX; explicit b_max is exempt
        if w > W_MAX:
            raise DataError(f"filter width {w} exceeds the supported range "
                            f"(w <= {W_MAX}); the pattern integrand overflows")
        b_max = _scan_b_max(w)
    if not b_max > 0:
        raise DataError("b_max must be positive")

    bs = np.linspace(0.0, b_max, n_table)
    n_r, n_t = 128, 128
    prev = None
    for _ in range(5):
        vals = _autocorr_values(bs, w, n_r, n_t)
        if prev is not None:
            scale = prev[0]
            if np.max(np.abs(vals - prev)) <= 1e-8 * scale:
                break
        prev = vals
        n_r *= 2
        n_t *= 2
    else:
        raise NumericalError("filter autocorrelation did not converge to 1e-8")

    a0 = vals[0]
    ratio = vals / a0
    if np.any(ratio <= 0.0):
        raise NumericalError(
            f"autocorrelation tail underflows for w={w}, b_max={b_max}")
    log_omega = np.log(ratio)
    return FilterKernel(w, b_max, bs, log_omega, 1.0 / a0)
