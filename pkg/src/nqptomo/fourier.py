"""Uniform-lattice evaluation of oscillatory integrals by zero-padded FFT,
plus fast linear interpolation on uniform lattices.

The pattern-function modules tabulate integrals of the form

    T(x) = int_0^umax  v(u) * cos(u x) du     (or sin)

on a dense uniform x-lattice.  Sampling v on u_k = k*du with Simpson weights
and zero-padding to M points turns the lattice values into one real FFT:
u_k * x_m = 2*pi*k*m/M for x_m = 2*pi*m/(M*du).
"""

from __future__ import annotations

import math

import numpy as np


def simpson_weights(n: int, du: float) -> np.ndarray:
    """Composite Simpson weights for n uniformly spaced samples (n odd)."""
    if n < 3 or n % 2 == 0:
        raise ValueError("Simpson rule needs an odd sample count >= 3")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (du / 3.0)


class CosSinTable:
    """T(x) = int_0^inf v(u) trig(u x) du tabulated on x_m = m*dx, m >= 0.

    `kind` is "cos" or "sin"; the implied parity (+1 / -1) is used when the
    table is evaluated at negative arguments.
    """

    def __init__(self, v_samples: np.ndarray, du: float, kind: str,
                 dx_target: float, x_max: float):
        v = np.asarray(v_samples, dtype=float)
        if len(v) % 2 == 0:       # Simpson needs an odd count; v decays to 0
            v = np.append(v, 0.0)
        weighted = v * simpson_weights(len(v), du)
        m_fft = 1 << math.ceil(math.log2(2.0 * np.pi / (dx_target * du)))
        if m_fft < 2 * len(weighted):
            m_fft = 1 << math.ceil(math.log2(2 * len(weighted)))
        spec = np.fft.rfft(weighted, n=m_fft)
        self.dx = 2.0 * np.pi / (m_fft * du)
        keep = min(int(x_max / self.dx) + 2, len(spec))
        if kind == "cos":
            self.values = spec.real[:keep].copy()
            self.parity = 1.0
        elif kind == "sin":
            self.values = -spec.imag[:keep].copy()
            self.parity = -1.0
        else:
            raise ValueError(f"kind must be 'cos' or 'sin', got {kind!r}")
        self.x_max = (keep - 1) * self.dx

    def __call__(self, x):
        """Linear interpolation; odd/even extension for x < 0; 0 beyond x_max."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        pos = np.minimum(ax / self.dx, len(self.values) - 1.000001)
        i0 = pos.astype(np.int64)
        t = pos - i0
        out = (1.0 - t) * self.values[i0] + t * self.values[i0 + 1]
        if self.parity < 0:
            out = out * np.sign(x)
        out = np.where(ax > self.x_max, 0.0, out)
        return out


def lerp_uniform(table: np.ndarray, x0: float, dx: float, x):
    """Linear interpolation of `table` sampled at x0 + k*dx; clamps to the
    table edges (callers size tables so the edges are negligible)."""
    x = np.asarray(x, dtype=float)
    pos = (x - x0) / dx
    pos = np.clip(pos, 0.0, len(table) - 1.000001)
    i0 = pos.astype(np.int64)
    t = pos - i0
    return (1.0 - t) * table[i0] + t * table[i0 + 1]


class Correlator:
    """Lattice cross-correlations C(s) = sum_u bins(u) * table(u - s).

    `bins` lives on u = bin_x0 + i*dx and `table` on t = table_x0 + k*dx
    (the lattices must share the step dx); C is returned on the lattice
    s = s0 + j*dx covering [s_min, s_max].  FFTs of bins and tables can be
    reused across many pairings.
    """

    def __init__(self, n_bins: int, bin_x0: float, n_table: int,
                 table_x0: float, dx: float, s_min: float, s_max: float):
        off = (bin_x0 - table_x0) / dx
        off_i = int(round(off))
        if abs(off - off_i) > 1e-6:
            raise ValueError("bin and table lattices are not aligned")
        self.dx = dx
        self.j_lo = math.floor((s_min - 1e-12) / dx) - 1
        j_hi = math.ceil((s_max + 1e-12) / dx) + 1
        self.s0 = self.j_lo * dx
        self.n_out = j_hi - self.j_lo + 1
        # C[j] = sum_i bins[i] * table[i + off_i - j]; restrict the table to
        # the indices that can contribute
        m_lo = -j_hi
        m_hi = (n_bins - 1) - self.j_lo
        self.k_lo = max(0, m_lo + off_i)
        self.k_hi = min(n_table - 1, m_hi + off_i)
        self.shift = off_i - self.k_lo
        n_sub = max(self.k_hi - self.k_lo + 1, 1)
        self.n_fft = 1 << math.ceil(math.log2(n_bins + n_sub))
        self._m_idx = (np.arange(self.j_lo, j_hi + 1) - self.shift) % self.n_fft
        self.empty = self.k_hi < self.k_lo

    def bins_fft(self, bins: np.ndarray) -> np.ndarray:
        return np.fft.rfft(bins, self.n_fft)

    def table_fft(self, table: np.ndarray) -> np.ndarray:
        if self.empty:
            return np.zeros(self.n_fft // 2 + 1, dtype=complex)
        return np.fft.rfft(table[self.k_lo:self.k_hi + 1], self.n_fft)

    def apply(self, fft_bins: np.ndarray, fft_table: np.ndarray) -> np.ndarray:
        if self.empty:
            return np.zeros(self.n_out)
        corr = np.fft.irfft(fft_bins * np.conj(fft_table), self.n_fft)
        return corr[self._m_idx]


def correlate_table(bins: np.ndarray, bin_x0: float, table: np.ndarray,
                    table_x0: float, dx: float, s_min: float, s_max: float):
    """One-shot convenience wrapper around Correlator; returns (s0, C)."""
    c = Correlator(len(bins), bin_x0, len(table), table_x0, dx, s_min, s_max)
    return c.s0, c.apply(c.bins_fft(bins), c.table_fft(table))
