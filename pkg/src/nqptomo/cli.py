"""Command-line pipeline: simulate homodyne data, reconstruct the NQP
matrix field, analyze significance, evaluate the analytic oracle, and
compare sampled against analytic fields.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Every subcommand is deterministic given its inputs, flags, and seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, core, estimator, oracle, simulator
from .core import DataError, NumericalError, PhaseSpaceGrid
from .filters import build_kernel
from .pattern_cv import CvPatternEvaluator
from .pattern_dv import DvPatternEvaluator


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_grid(spec: str) -> PhaseSpaceGrid:
    try:
        re_part, im_part = spec.split(",")
        r0, r1, nr = re_part.split(":")
        i0, i1, ni = im_part.split(":")
        return PhaseSpaceGrid(float(r0), float(r1), float(i0), float(i1),
                              int(nr), int(ni))
    except (ValueError, TypeError):
        raise UsageError(f"bad grid spec {spec!r}; expected "
                         "'remin:remax:n,immin:immax:n'") from None


def _parse_phases(spec: str):
    try:
        if "x" in spec:
            a, b = (int(t) for t in spec.lower().split("x"))
        else:
            a, b = int(spec), 1
        if a < 1 or b < 1:
            raise ValueError
    except ValueError:
        raise UsageError(f"bad phase spec {spec!r}; expected 'I' or 'I1xI2'") \
            from None
    return ([k * np.pi / a for k in range(a)],
            [k * np.pi / b for k in range(b)])


def _uniform_counts(n_total: int, n1: int, n2: int) -> np.ndarray:
    cells = n1 * n2
    base = n_total // cells
    counts = np.full((n1, n2), base, dtype=int)
    counts.ravel()[: n_total - base * cells] += 1
    if np.any(counts < 2):
        raise DataError(f"{n_total} samples cannot fill {cells} phase cells "
                        "with at least 2 each")
    return counts


def _load_config(parser: Parser, argv):
    """Apply --config file values as defaults; explicit flags override."""
    pre = Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read config {known.config}: {exc}") from None
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}

    def apply(p):
        p.set_defaults(**cfg)
        for action in p._actions:
            if isinstance(action, argparse._SubParsersAction):
                for sub in action.choices.values():
                    apply(sub)
            elif action.dest in cfg:
                action.required = False

    apply(parser)


def _state_kwargs(args) -> dict:
    kw = {}
    if args.beta is not None:
        kw["beta"] = complex(args.beta)
    if args.n_photon is not None:
        kw["n_photon"] = args.n_photon
    if args.p is not None:
        kw["p"] = args.p
    if args.eta is not None:
        kw["eta"] = args.eta
    if getattr(args, "cv", None):
        kw["cv"] = args.cv
    if getattr(args, "dv_fock", None) is not None:
        kw["dv_fock"] = args.dv_fock
    return kw


def _add_state_flags(p):
    p.add_argument("--state", required=True,
                   help="catalog state: vacuum, coherent, fock, spacs, "
                        "hybrid_cat, experimental, tmsv, dephased_tmsv, product")
    p.add_argument("--beta", help="coherent amplitude (complex literal)")
    p.add_argument("--n-photon", type=int, dest="n_photon")
    p.add_argument("--p", type=float, help="squeezed-vacuum parameter")
    p.add_argument("--eta", type=float, help="detection efficiency in (0, 1]")
    p.add_argument("--cv", help="cv constituent for --state product")
    p.add_argument("--dv-fock", type=int, dest="dv_fock",
                   help="dv Fock level for --state product")


def cmd_simulate(args):
    phases_cv, phases_dv = _parse_phases(args.phases)
    model = simulator.make_model(args.state, **_state_kwargs(args))
    counts = _uniform_counts(args.n, len(phases_cv), len(phases_dv))
    ens, meta = simulator.sample_ensemble(model, phases_cv, phases_dv,
                                          counts, args.seed)
    core.write_samples(args.out, core.ensemble_to_records(ens))
    meta_path = Path(args.out).with_suffix(".meta.json")
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=1)
    print(f"wrote {ens.n_total} records to {args.out} (metadata: {meta_path})")
    return 0


def _widths(spec) -> list[float]:
    if isinstance(spec, (int, float)):
        return [float(spec)]
    try:
        ws = [float(t) for t in str(spec).split(",") if t]
    except ValueError:
        raise UsageError(f"bad width list {spec!r}") from None
    if not ws or any(w <= 0 for w in ws):
        raise UsageError("filter widths must be positive")
    return ws


def cmd_reconstruct(args):
    grid = _parse_grid(args.grid)
    widths = _widths(args.w)
    records = core.read_samples(args.data, column_map=args.column_map)
    binning = core.Binning(args.binning, args.binning_tol)
    ens = core.build_ensemble(records, binning)
    scheme = None if args.weights == "auto" else args.weights
    weights = estimator.compute_weights(ens, scheme)
    print(f"grouped {ens.n_total} records into {ens.n_groups} phase pairs; "
          f"weight scheme: {weights.scheme}")
    dv_eval = DvPatternEvaluator(d=args.d)
    for w in widths:
        kernel = build_kernel(w)
        cv_eval = CvPatternEvaluator(kernel)
        fld = analysis.assemble_field(ens, weights, cv_eval, dv_eval, grid,
                                      args.d)
        out = args.out if len(widths) == 1 else _width_path(args.out, w)
        analysis.save_field(out, fld)
        print(f"w={w}: wrote field to {out}")
    return 0


def _width_path(out, w) -> str:
    p = Path(out)
    return str(p.with_name(f"{p.stem}_w{w}{p.suffix}"))


def cmd_analyze(args):
    fld = analysis.load_field(args.field)
    report = analysis.significance_report(fld)
    for wmsg in report.warnings_:
        print(f"warning: {wmsg}", file=sys.stderr)
    doc = analysis.field_to_json(fld, report)
    with open(args.out, "w") as fh:
        json.dump(doc, fh)
    for m in report.maxima:
        s = "None" if m["s_max"] is None else f"{m['s_max']:.2f}"
        g = "None" if m["sigma_max"] is None else f"{m['sigma_max']:.2f}"
        print(f"order {m['order']}: max S = {s}, max Sigma = {g}")
    print(report.verdict())
    return 0


def cmd_oracle(args):
    grid = _parse_grid(args.grid)
    if args.compare_wigner:
        betas = [float(t) for t in str(args.betas).split(",") if t]
        kernel = build_kernel(args.w_single)
        rows, fields = oracle.wigner_filtered_p_comparison(betas,
                                                           args.w_single,
                                                           grid, kernel)
        doc = {
            "grid": grid.to_dict(), "w": args.w_single, "betas": betas,
            "rows": rows,
            "wigner": [f["wigner"].tolist() for f in fields],
            "p_filtered": [f["p_filtered"].tolist() for f in fields],
            "oracle": True,
        }
        with open(args.out, "w") as fh:
            json.dump(doc, fh)
        for r in rows:
            print(f"beta={r['beta']}: W in [{r['wigner_min']:.4f}, "
                  f"{r['wigner_max']:.4f}] ratio {r['wigner_neg_ratio']:.4f}; "
                  f"P in [{r['p_min']:.4f}, {r['p_max']:.4f}] ratio "
                  f"{r['p_neg_ratio']:.4f}")
        return 0
    model = simulator.make_model(args.state, **_state_kwargs(args))
    widths = _widths(args.w)
    for w in widths:
        kernel = build_kernel(w)
        vals = oracle.nqp_field_analytic(model, None, w, args.d,
                                         kernel=kernel, grid=grid)
        fld = analysis.NqpMatrixField(grid, args.d, w, vals,
                                      np.zeros(vals.shape), oracle=True)
        out = args.out if len(widths) == 1 else _width_path(args.out, w)
        analysis.save_field(out, fld)
        print(f"w={w}: wrote oracle field to {out}")
    return 0


def cmd_compare(args):
    fld = analysis.load_field(args.field)
    ref = analysis.load_field(args.oracle)
    if fld.grid != ref.grid:
        raise DataError("grid mismatch between field and oracle")
    if abs(fld.w - ref.w) > 1e-12:
        raise DataError(f"width mismatch: field w={fld.w}, oracle w={ref.w}")
    if fld.d != ref.d:
        raise DataError(f"dimension mismatch: {fld.d} vs {ref.d}")
    result = {}
    worst = 1.0
    for m in range(fld.d):
        for n in range(m, fld.d):
            dev = np.abs(fld.values[:, :, m, n] - ref.values[:, :, m, n])
            sig = fld.errors[:, :, m, n]
            ok = dev <= args.n_sigma * np.where(sig > 0, sig, np.inf)
            frac = float(np.mean(ok))
            result[f"{m},{n}"] = frac
            worst = min(worst, frac)
            print(f"P[{m},{n}]: {100*frac:.2f}% of grid points within "
                  f"{args.n_sigma} sigma")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"per_element": result, "worst": worst,
                       "n_sigma": args.n_sigma}, fh)
    print(f"worst element agreement: {100*worst:.2f}%")
    return 0


def build_parser() -> Parser:
    parser = Parser(prog="nqptomo", description=__doc__)
    parser.add_argument("--config", help="JSON file of flag defaults")
    parser.add_argument("--threads", type=int, default=None,
                        help="BLAS thread hint; results are independent of it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic homodyne data")
    _add_state_flags(p)
    p.add_argument("--phases", default="6x6", help="'I' or 'I1xI2' equidistant")
    p.add_argument("--n", type=int, required=True, help="total sample count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="sample the NQP matrix field")
    p.add_argument("--data", required=True, help="input CSV")
    p.add_argument("--w", required=True, help="filter width(s), comma separated")
    p.add_argument("--d", type=int, default=3, help="matrix dimension")
    p.add_argument("--grid", default="-5:5:101,-5:5:101")
    p.add_argument("--column-map", nargs="+", dest="column_map",
                   help="e.g. cv=1,2 dv=3,4 (1-based CSV columns)")
    p.add_argument("--weights", default="auto",
                   choices=["auto", "equidistant", "general-interval", "uniform"])
    p.add_argument("--binning", default="exact", choices=["exact", "tolerance"])
    p.add_argument("--binning-tol", type=float, default=1e-6)
    p.add_argument("--out", required=True, help="output field JSON")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("analyze", help="significance maps and CHN verdict")
    p.add_argument("--field", required=True)
    p.add_argument("--out", required=True, help="output report JSON")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("oracle", help="analytic field for a catalog state")
    _add_state_flags(p)
    p.add_argument("--w", default="1.9")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--grid", default="-5:5:101,-5:5:101")
    p.add_argument("--compare-wigner", action="store_true",
                   help="emit Wigner vs filtered-P comparison tables for "
                        "photon-added coherent states")
    p.add_argument("--betas", default="0,0.9,2.6")
    p.add_argument("--w-single", type=float, default=1.9,
                   help="width for --compare-wigner")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("compare", help="sampled vs oracle agreement")
    p.add_argument("--field", required=True)
    p.add_argument("--oracle", required=True)
    p.add_argument("--n-sigma", type=float, default=3.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _load_config(parser, argv)
        args = parser.parse_args(argv)
        # state flags are only defined on some subcommands
        for name in ("beta", "n_photon", "p", "eta"):
            if not hasattr(args, name):
                setattr(args, name, None)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
