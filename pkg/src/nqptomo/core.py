"""Shared domain types: phase-space grid, quadrature records, phase-grouped
ensembles, and the flat-file data format.

Conventions pinned here and used everywhere else:

* Quadratures are normalized so that the vacuum distribution is
  p_vac(x) = exp(-x^2)/sqrt(pi), i.e. vacuum variance 1/2.
* Phases live in [0, pi).  Reducing a phase by pi flips the sign of the
  quadrature (periodicity of the rotated quadrature operator).
* All container types are immutable after construction and safe to share
  across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CSV_HEADER = "x_cv,phi_cv,x_dv,phi_dv"

#: tolerance for deciding that per-mode phases are equally spaced
EQUIDISTANT_TOL = 1e-9


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its accuracy target."""


def as_amplitude(z) -> complex:
    """Validate a phase-space amplitude: both components must be finite."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DataError(f"non-finite phase-space amplitude: {z!r}")
    return z


def wrap_phase(phi, x):
    """Reduce phases mod pi, flipping the quadrature sign for each odd
    number of pi subtractions: p(x; phi + pi) = p(-x; phi)."""
    phi = np.asarray(phi, dtype=float)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(phi)) or not np.all(np.isfinite(x)):
        raise DataError("non-finite quadrature or phase value")
    k = np.floor(phi / np.pi).astype(np.int64)
    phi_w = phi - k * np.pi
    # guard against phi_w == pi from rounding
    hit = phi_w >= np.pi
    phi_w = np.where(hit, phi_w - np.pi, phi_w)
    k = k + hit
    x_w = np.where(k % 2 == 0, x, -x)
    return phi_w, x_w


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Regular rectangular lattice of phase-space points alpha = re + i*im."""

    re_min: float = -5.0
    re_max: float = 5.0
    im_min: float = -5.0
    im_max: float = 5.0
    n_re: int = 101
    n_im: int = 101

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise DataError("grid bounds must satisfy min < max")
        if self.n_re < 2 or self.n_im < 2:
            raise DataError("grid needs at least 2 points per axis")
        for v in (self.re_min, self.re_max, self.im_min, self.im_max):
            as_amplitude(v)

    @property
    def re_values(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.n_re)

    @property
    def im_values(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.n_im)

    @property
    def alphas(self) -> np.ndarray:
        """Complex lattice, shape (n_re, n_im); alphas[i, j] = re_i + 1j*im_j."""
        return self.re_values[:, None] + 1j * self.im_values[None, :]

    @property
    def cell_area(self) -> float:
        d_re = (self.re_max - self.re_min) / (self.n_re - 1)
        d_im = (self.im_max - self.im_min) / (self.n_im - 1)
        return d_re * d_im

    @property
    def radius(self) -> float:
        """Largest |alpha| on the lattice."""
        r = max(abs(self.re_min), abs(self.re_max))
        i = max(abs(self.im_min), abs(self.im_max))
        return math.hypot(r, i)

    def to_dict(self) -> dict:
        return {
            "re_min": self.re_min, "re_max": self.re_max,
            "im_min": self.im_min, "im_max": self.im_max,
            "n_re": self.n_re, "n_im": self.n_im,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PhaseSpaceGrid":
        return cls(d["re_min"], d["re_max"], d["im_min"], d["im_max"],
                   int(d["n_re"]), int(d["n_im"]))


@dataclass(frozen=True)
class PhaseGroup:
    """All samples recorded at one (phi_cv, phi_dv) phase pair, in the order
    they appeared in the input."""

    phi_cv: float
    phi_dv: float
    x_cv: np.ndarray
    x_dv: np.ndarray

    @property
    def n(self) -> int:
        return len(self.x_cv)


def _equidistant(phases: np.ndarray) -> bool:
    """True if the distinct phases split [0, pi) into equal intervals."""
    k = len(phases)
    target = np.pi / k
    diffs = np.diff(phases)
    wrap = phases[0] + np.pi - phases[-1]
    gaps = np.concatenate([diffs, [wrap]])
    return bool(np.all(np.abs(gaps - target) < EQUIDISTANT_TOL))


@dataclass(frozen=True)
class PhaseGroupedEnsemble:
    """A two-mode quadrature data set partitioned into phase-pair groups.

    Groups are ordered by ascending (phi_cv, phi_dv); per-group sample order
    is the input order, so accumulation over an ensemble is reproducible.
    """

    groups: tuple[PhaseGroup, ...]
    equidistant_cv: bool = field(default=False)
    equidistant_dv: bool = field(default=False)

    def __post_init__(self):
        if not self.groups:
            raise DataError("ensemble has no groups")
        seen = set()
        for g in self.groups:
            if g.n < 2:
                raise DataError(
                    f"group at phases ({g.phi_cv}, {g.phi_dv}) has {g.n} < 2 samples"
                )
            key = (g.phi_cv, g.phi_dv)
            if key in seen:
                raise DataError(f"duplicate phase pair {key}")
            seen.add(key)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def n_total(self) -> int:
        return sum(g.n for g in self.groups)

    @property
    def equidistant(self) -> bool:
        return self.equidistant_cv and self.equidistant_dv

    @property
    def phases_cv(self) -> np.ndarray:
        return np.unique([g.phi_cv for g in self.groups])

    @property
    def phases_dv(self) -> np.ndarray:
        return np.unique([g.phi_dv for g in self.groups])


@dataclass(frozen=True)
class Binning:
    """How raw records are grouped into phase pairs.

    mode "exact" groups identical (wrapped) phase values; mode "tolerance"
    merges phases closer than `tol` and uses the cluster mean as the group
    phase.
    """

    mode: str = "exact"
    tol: float = 1e-6

    def __post_init__(self):
        if self.mode not in ("exact", "tolerance"):
            raise DataError(f"unknown binning mode {self.mode!r}")
        if self.mode == "tolerance" and not self.tol > 0:
            raise DataError("tolerance binning needs tol > 0")


def _cluster(values: np.ndarray, tol: float) -> dict[float, float]:
    """Map each distinct value to its cluster representative (cluster mean)."""
    uniq = np.unique(values)
    out: dict[float, float] = {}
    start = 0
    for i in range(1, len(uniq) + 1):
        if i == len(uniq) or uniq[i] - uniq[i - 1] > tol:
            rep = float(np.mean(uniq[start:i]))
            for v in uniq[start:i]:
                out[float(v)] = rep
            start = i
    return out


def build_ensemble(samples, binning: Binning = Binning()) -> PhaseGroupedEnsemble:
    """Group raw quadrature records by phase pair.

    `samples` is an (N, 4) array-like with columns (x_cv, phi_cv, x_dv,
    phi_dv).  Grouping is a partition: every record lands in exactly one
    group and per-group input order is preserved.
    """
    arr = np.atleast_2d(np.asarray(samples, dtype=float))
    if arr.size == 0:
        raise DataError("empty input")
    if arr.shape[1] != 4:
        raise DataError(f"expected 4 columns, got {arr.shape[1]}")

    phi_cv, x_cv = wrap_phase(arr[:, 1], arr[:, 0])
    phi_dv, x_dv = wrap_phase(arr[:, 3], arr[:, 2])

    if binning.mode == "tolerance":
        cmap = _cluster(phi_cv, binning.tol)
        dmap = _cluster(phi_dv, binning.tol)
        phi_cv = np.array([cmap[float(p)] for p in phi_cv])
        phi_dv = np.array([dmap[float(p)] for p in phi_dv])

    keys: dict[tuple[float, float], list[int]] = {}
    for idx in range(len(arr)):
        keys.setdefault((float(phi_cv[idx]), float(phi_dv[idx])), []).append(idx)

    groups = []
    for (pc, pd) in sorted(keys):
        sel = np.array(keys[(pc, pd)])
        groups.append(PhaseGroup(pc, pd, x_cv[sel].copy(), x_dv[sel].copy()))

    ens = PhaseGroupedEnsemble(
        groups=tuple(groups),
        equidistant_cv=_equidistant(np.unique([g.phi_cv for g in groups])),
        equidistant_dv=_equidistant(np.unique([g.phi_dv for g in groups])),
    )
    return ens


def ensemble_to_records(ens: PhaseGroupedEnsemble) -> np.ndarray:
    """Flatten an ensemble back to an (N, 4) record array, group by group."""
    rows = []
    for g in ens.groups:
        block = np.column_stack([
            g.x_cv,
            np.full(g.n, g.phi_cv),
            g.x_dv,
            np.full(g.n, g.phi_dv),
        ])
        rows.append(block)
    return np.vstack(rows)


def projection_vector(components) -> np.ndarray:
    """Validate a DV projection vector: unit Euclidean norm within 1e-12."""
    v = np.asarray(components, dtype=complex).ravel()
    if v.ndim != 1 or len(v) == 0:
        raise DataError("projection vector must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(v.view(float))):
        raise DataError("projection vector has non-finite entries")
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > 1e-12:
        raise DataError(f"projection vector norm {nrm} differs from 1 by > 1e-12")
    return v


# ---------------------------------------------------------------------------
# flat-file data format


def parse_column_map(spec: str | list | None) -> dict[str, int] | None:
    """Parse a column-role mapping like 'cv=1,2 dv=3,4' (1-based indices).

    Returns {'x_cv': i, 'phi_cv': j, 'x_dv': k, 'phi_dv': l} with 0-based
    indices, or None when no mapping was given.
    """
    if spec is None:
        return None
    if isinstance(spec, str):
        tokens = spec.replace(";", " ").split()
    else:
        tokens = list(spec)
    roles: dict[str, int] = {}
    for tok in tokens:
        if "=" not in tok:
            raise DataError(f"bad column-map token {tok!r}")
        name, cols = tok.split("=", 1)
        name = name.strip().lower()
        parts = cols.split(",")
        if name not in ("cv", "dv") or len(parts) != 2:
            raise DataError(f"bad column-map token {tok!r}")
        xi, pi_ = (int(p) - 1 for p in parts)
        roles[f"x_{name}"] = xi
        roles[f"phi_{name}"] = pi_
    if set(roles) != {"x_cv", "phi_cv", "x_dv", "phi_dv"}:
        raise DataError("column map must assign both cv=<x>,<phi> and dv=<x>,<phi>")
    return roles


def read_samples(path, column_map=None) -> np.ndarray:
    """Read records from CSV; returns an (N, 4) array in role order
    (x_cv, phi_cv, x_dv, phi_dv).  Reports the line number of a bad row."""
    roles = parse_column_map(column_map)
    with open(path, "r") as fh:
        header = fh.readline().strip()
        names = [c.strip() for c in header.split(",")]
        if roles is None:
            try:
                roles = {name: names.index(name)
                         for name in ("x_cv", "phi_cv", "x_dv", "phi_dv")}
            except ValueError:
                raise DataError(
                    f"{path}: header {header!r} does not name the required "
                    f"columns; pass a column map"
                ) from None
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError:
            fh.seek(0)
            fh.readline()
            _locate_bad_row(path, fh)
            raise DataError(f"{path}: malformed CSV") from None
    if data.size == 0:
        raise DataError(f"{path}: no data rows")
    try:
        cols = [data[:, roles[r]] for r in ("x_cv", "phi_cv", "x_dv", "phi_dv")]
    except IndexError:
        raise DataError(f"{path}: column map exceeds column count "
                        f"{data.shape[1]}") from None
    return np.column_stack(cols)


def _locate_bad_row(path, fh):
    """Slow path: find the first malformed row and report its line number."""
    width = None
    for lineno, line in enumerate(fh, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        try:
            [float(p) for p in parts]
        except ValueError:
            raise DataError(f"{path}:{lineno}: malformed row {line!r}") from None
        if width is None:
            width = len(parts)
        elif len(parts) != width:
            raise DataError(f"{path}:{lineno}: row has {len(parts)} fields, "
                            f"expected {width}") from None


def write_samples(path, records: np.ndarray) -> None:
    """Write (N, 4) records as CSV with the canonical header, 17 significant
    digits (round-trip exact)."""
    records = np.asarray(records, dtype=float)
    np.savetxt(path, records, fmt="%.17g", delimiter=",",
               header=CSV_HEADER, comments="")
