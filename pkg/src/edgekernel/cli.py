"""Command-line front end.

Every command writes a table: CSV (``# edgekernel v<version>``, a manifest
comment, the column header, then rows) or JSON with the same columns as
arrays.  Exit codes: 0 ok, 2 usage, 3 numerical failure, 4 calibration
mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .finite_kernels import Ensemble, EnsembleSpec, FiniteKernel, ScalingMap
from .fredholm import DetConfig, DeterminantError, RhoMode, cdf_table, gap_matrix
from .kernels import eps
from .limit_kernels import GOELimitKernel, GSELimitKernel

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CALIBRATION = 0, 2, 3, 4
GRID_FLAGS = ("--s-grid", "--t-grid", "--grid", "--s", "--t")
PROBES = ((0.0, 0.0), (1.0, -1.0), (2.0, 2.0))
ENTRY_INDEX = {"S": 0, "SD": 1, "IS": 2}

GRID_HELP = ("grid 'a:b:step' (both ends included when (b-a)/step is integral), "
             "a comma list, or one number")


class UsageError(ValueError):
    pass


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` inclusive of ``b`` when it lies on the lattice, ``x,y,z``, or ``x``."""
    try:
        if ":" in text:
            a, b, step = (float(p) for p in text.split(":"))
            if not step > 0 or b < a:
                raise UsageError(f"grid {text!r}: need step > 0 and b >= a")
            n = int(math.floor((b - a) / step + 1e-9))
            vals = [a + k * step for k in range(n + 1)]
        else:
            vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"cannot parse grid {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"grid {text!r} is empty or not finite")
    return vals


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}") from None


def _spec(ensemble: str, N: int) -> EnsembleSpec:
    try:
        return EnsembleSpec(ensemble, N)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# output

def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def render(columns: dict[str, list], manifest: dict, fmt: str) -> str:
    if fmt == "json":
        payload = {"version": __version__, "manifest": manifest,
                   "columns": {k: [None if isinstance(x, float) and math.isnan(x) else x for x in v]
                               for k, v in columns.items()}}
        return json.dumps(payload, indent=1, default=_json_default) + "\n"
    buf = io.StringIO()
    buf.write(f"# edgekernel v{__version__}\n")
    buf.write("# manifest " + json.dumps(manifest, sort_keys=True, default=_json_default) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    writer.writerow(names)
    for row in zip(*(columns[n] for n in names)):
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "value"):
        return obj.value
    return str(obj)


def read_csv_table(text: str) -> tuple[dict, dict[str, list[str]]]:
    """Parse :func:`render` CSV output back into ``(manifest, columns)``."""
    lines = text.splitlines()
    manifest = {}
    body = []
    for line in lines:
        if line.startswith("# manifest "):
            manifest = json.loads(line[len("# manifest "):])
        elif not line.startswith("#"):
            body.append(line)
    rows = list(csv.reader(body))
    header, data = rows[0], rows[1:]
    return manifest, {h: [r[i] for r in data] for i, h in enumerate(header)}


def _manifest(args, started: float, seed=None, **extra) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "format", "output", "command", "oracle")}
    command = " ".join(filter(None, (args.command, getattr(args, "oracle", None))))
    out = {"command": command, "params": params, "version": __version__,
           "seed": seed, "wall_time_s": round(time.perf_counter() - started, 6)}
    out.update(extra)
    return out


def _write(args, columns, manifest) -> None:
    text = render(columns, manifest, args.format)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _det_config(args) -> DetConfig:
    try:
        return DetConfig(m=args.m, tol=args.tol, rho_mode=RhoMode(args.rho_mode))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _table_columns(table, grid, var: str):
    by_s = {r.s: r for r in table.rows}
    cols = {var: [], "F": [], "det": [], "err_est": [], "m_used": [], "T_used": [], "status": []}
    for s in grid:
        r = by_s.get(s)
        if r is None:
            vals = [math.nan, math.nan, math.nan, 0, math.nan, "failed: " + table.failures[s]]
        else:
            vals = [r.sqrt_value, r.det_value, r.err_est, r.m_used, r.T_used,
                    "ok" if r.converged else "unconverged"]
        cols[var].append(s)
        for key, v in zip(list(cols)[1:], vals):
            cols[key].append(v)
    return cols


# commands

def cmd_limit(args) -> int:
    started = time.perf_counter()
    grid = parse_grid(args.s_grid)
    kind = {"goe": "GOE_LIMIT", "gse": "GSE_LIMIT", "gue": "AIRY_F2"}[args.ensemble]
    table = cdf_table(kind, grid, _det_config(args))
    _write(args, _table_columns(table, grid, "s"), _manifest(args, started, kind=table.kind))
    return EXIT_OK if table.ok else EXIT_NUMERIC


def cmd_finite(args) -> int:
    from .oracles.smalln import MAX_EIGENVALUES, smalln_cdf_direct

    started = time.perf_counter()
    spec = _spec(args.ensemble, args.N)
    grid = parse_grid(args.t_grid)
    table = cdf_table(spec, grid, _det_config(args))
    cols = _table_columns(table, grid, "t")
    if spec.n_eigenvalues <= MAX_EIGENVALUES:
        oracle = [smalln_cdf_direct(spec, t) for t in grid]
        cols["oracle"] = oracle
        cols["residual"] = [abs(f - o) for f, o in zip(cols["F"], oracle)]
    _write(args, cols, _manifest(args, started, kind=table.kind, n_eigenvalues=spec.n_eigenvalues))
    return EXIT_OK if table.ok else EXIT_NUMERIC


def _limit_kernel(ensemble: Ensemble):
    return GSELimitKernel() if ensemble is Ensemble.GSE else GOELimitKernel()


def cmd_converge(args) -> int:
    started = time.perf_counter()
    Ns = parse_int_list(args.N_list)
    if not Ns:
        raise UsageError("--N-list is empty")
    specs = [_spec(args.ensemble, N) for N in Ns]
    cfg = _det_config(args)
    limit = _limit_kernel(specs[0].ensemble)
    F_inf = gap_matrix(limit, args.s, cfg).sqrt_value
    refs = [limit(x, y).as_array() for x, y in PROBES]
    cols = {"N": [], "t": [], "F_N": [], "F_inf": [], "abs_err": [], "decreasing": []}
    for k in range(len(PROBES)):
        cols[f"kernel_err_{k}"] = []
    ok = True
    for spec in specs:
        kern = FiniteKernel(spec, scaled=True)
        res = gap_matrix(kern, args.s, cfg)
        ok &= res.converged
        err = abs(res.sqrt_value - F_inf)
        prev = cols["abs_err"][-1] if cols["abs_err"] else None
        cols["N"].append(spec.N)
        cols["t"].append(float(ScalingMap(spec.N)(args.s)))
        cols["F_N"].append(res.sqrt_value)
        cols["F_inf"].append(F_inf)
        cols["abs_err"].append(err)
        cols["decreasing"].append("" if prev is None else str(err < prev).lower())
        for k, ((x, y), ref) in enumerate(zip(PROBES, refs)):
            cols[f"kernel_err_{k}"].append(float(np.max(np.abs(kern(x, y).as_array() - ref))))
    errs = cols["abs_err"]
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    kernel_monotone = all(
        all(b < a for a, b in zip(cols[f"kernel_err_{k}"], cols[f"kernel_err_{k}"][1:]))
        for k in range(len(PROBES)))
    _write(args, cols, _manifest(args, started, probes=[list(p) for p in PROBES],
                                 monotone_decrease=monotone, kernel_monotone_decrease=kernel_monotone))
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_oracle_small_n(args) -> int:
    from .oracles.smalln import smalln_cdf_direct

    started = time.perf_counter()
    spec = _spec(args.ensemble, args.N)
    grid = parse_grid(args.t)
    try:
        vals = [smalln_cdf_direct(spec, t, m=args.nodes) for t in grid]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(args, {"t": grid, "F": vals}, _manifest(args, started, n_eigenvalues=spec.n_eigenvalues))
    return EXIT_OK


def cmd_oracle_painleve(args) -> int:
    from .oracles.painleve import S_MIN, painleve_f1, painleve_f2, painleve_f4

    started = time.perf_counter()
    grid = parse_grid(args.s)
    if min(grid) < S_MIN:
        raise UsageError(f"painleve oracle needs s >= {S_MIN}")
    cols = {"s": grid, "F1": [painleve_f1(s) for s in grid], "F2": [painleve_f2(s) for s in grid],
            "F4": [painleve_f4(s) for s in grid]}
    _write(args, cols, _manifest(args, started))
    return EXIT_OK


def cmd_oracle_mc(args) -> int:
    from .oracles.montecarlo import McConfig, mc_edge_cdf

    started = time.perf_counter()
    try:
        cfg = McConfig(args.samples, args.N, args.ensemble, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    grid = parse_grid(args.s_grid)
    res = mc_edge_cdf(cfg, grid, scaled=not args.unscaled)
    cols = {"s": grid, "cdf": res.cdf.tolist(), "stderr": res.stderr.tolist()}
    _write(args, cols, _manifest(args, started, seed=args.seed, samples=res.samples))
    return EXIT_OK


def cmd_oracle_calibrate(args) -> int:
    from .oracles.calibration import CANDIDATES, calibrate_f4, write_constants

    started = time.perf_counter()
    grid = parse_grid(args.s_grid)
    res = calibrate_f4(tuple(grid), args.tol, DetConfig(m=args.m))
    names = list(CANDIDATES)
    cols = {"candidate": names, "scale": [CANDIDATES[n] for n in names],
            "max_residual": [res.residuals[n] for n in names],
            "match": [str(n in res.matching).lower() for n in names]}
    path = write_constants(args.calibration_file, res)
    _write(args, cols, _manifest(args, started, convention=res.convention, constants_file=str(path)))
    if not res.ok:
        print(f"calibration mismatch: matching conventions {res.matching}", file=sys.stderr)
        return EXIT_CALIBRATION
    return EXIT_OK


PLOT_TEMPLATE = '''"""Render {csv_name} written by `edgekernel kernel`."""
import csv
import sys

import matplotlib.pyplot as plt
import numpy as np

path = sys.argv[1] if len(sys.argv) > 1 else {csv_name!r}
with open(path) as fh:
    rows = list(csv.reader(line for line in fh if not line.startswith("#")))
header, data = rows[0], np.array(rows[1:], dtype=float)
x, y = data[:, 0], data[:, 1]
xs, ys = np.unique(x), np.unique(y)
entries = header[2:]
fig, axes = plt.subplots(1, len(entries), figsize=(4 * len(entries), 3.6), squeeze=False)
for ax, name, col in zip(axes[0], entries, data[:, 2:].T):
    Z = col.reshape(xs.size, ys.size)
    im = ax.pcolormesh(ys, xs, Z, shading="nearest", cmap="RdBu_r")
    ax.set_title({title!r} + " " + name)
    ax.set_xlabel("y")
    ax.set_ylabel("x")
    fig.colorbar(im, ax=ax)
fig.tight_layout()
fig.savefig({png_name!r}, dpi=120)
'''


def _kernel_values(kernel, grid: np.ndarray, entry: str) -> dict[str, np.ndarray]:
    b = list(kernel.blocks(grid, grid))
    b[2] = b[2] - kernel.eps_weight * eps(grid[:, None] - grid[None, :])
    if entry == "full":
        return {"e11": b[0], "e12": b[1], "e21": b[2], "e22": b[3]}
    return {entry: b[ENTRY_INDEX[entry]]}


def cmd_kernel(args) -> int:
    started = time.perf_counter()
    grid = np.array(parse_grid(args.grid))
    ensemble = Ensemble.coerce(args.ensemble)
    if args.which == "finite":
        if args.N is None:
            raise UsageError("kernel finite needs --N")
        kernel = FiniteKernel(_spec(ensemble, args.N), scaled=not args.unscaled)
    else:
        kernel = _limit_kernel(ensemble)
    values = _kernel_values(kernel, grid, args.entry)
    X, Y = np.meshgrid(grid, grid, indexing="ij")
    cols = {"x": X.ravel().tolist(), "y": Y.ravel().tolist()}
    cols.update({k: v.ravel().tolist() for k, v in values.items()})
    extra = {"kernel": kernel.name}
    if args.compare_limit and args.which == "finite":
        ref = _kernel_values(_limit_kernel(ensemble), grid, args.entry)
        diff = max(float(np.max(np.abs(values[k] - ref[k]))) for k in values)
        extra["max_abs_diff_vs_limit"] = diff
    if not all(np.all(np.isfinite(v)) for v in values.values()):
        print("non-finite kernel values", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = _manifest(args, started, **extra)
    _write(args, cols, manifest)
    if args.emit_plot:
        stem = Path(args.emit_plot)
        csv_path = stem.with_suffix(".csv")
        csv_path.write_text(render(cols, manifest, "csv"))
        script = PLOT_TEMPLATE.format(csv_name=csv_path.name, png_name=stem.with_suffix(".png").name,
                                      title=kernel.name)
        stem.with_suffix(".py").write_text(script)
    return EXIT_OK


# parser

def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", help="write here instead of stdout")


def _add_det(p):
    p.add_argument("--tol", type=float, default=1e-8, help="determinant tolerance (default 1e-8)")
    p.add_argument("--m", type=int, default=64, help="initial quadrature nodes (default 64)")
    p.add_argument("--rho-mode", choices=[m.value for m in RhoMode], default="none")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgekernel",
        description="Edge-scaled GOE/GSE matrix kernels and their Fredholm gap probabilities.",
        epilog="Grid values starting with '-' may be given as --s-grid=-5:2:1 or --s-grid -5:2:1.")
    parser.add_argument("--version", action="version", version=f"edgekernel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("limit", help="limiting edge distribution table")
    p.add_argument("--ensemble", choices=("goe", "gse", "gue"), required=True)
    p.add_argument("--s-grid", required=True, help=GRID_HELP)
    _add_det(p)
    _add_output(p)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("finite", help="finite-N largest eigenvalue CDF (unscaled variable t)")
    p.add_argument("--ensemble", choices=("goe", "gse"), required=True)
    p.add_argument("--N", type=int, required=True, help="kernel order; GSE needs odd N, GOE even N")
    p.add_argument("--t-grid", required=True, help=GRID_HELP)
    _add_det(p)
    _add_output(p)
    p.set_defaults(func=cmd_finite)

    p = sub.add_parser("converge", help="F_N(s) against the limit over a list of N")
    p.add_argument("--ensemble", choices=("goe", "gse"), required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--N-list", required=True, help="comma separated, e.g. 51,101,201")
    _add_det(p)
    _add_output(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("oracle", help="independent reference computations")
    osub = p.add_subparsers(dest="oracle", required=True)

    q = osub.add_parser("small-n", help="direct integration of the joint density")
    q.add_argument("--ensemble", choices=("goe", "gse"), required=True)
    q.add_argument("--N", type=int, required=True)
    q.add_argument("--t", required=True, help=GRID_HELP)
    q.add_argument("--nodes", type=int, default=48, help="Gauss-Legendre nodes per dimension")
    _add_output(q)
    q.set_defaults(func=cmd_oracle_small_n)

    q = osub.add_parser("painleve", help="F1, F2, F4 from Painleve II")
    q.add_argument("--s", required=True, help=GRID_HELP)
    _add_output(q)
    q.set_defaults(func=cmd_oracle_painleve)

    q = osub.add_parser("mc", help="Monte Carlo largest eigenvalue CDF")
    q.add_argument("--ensemble", choices=("goe", "gse"), required=True)
    q.add_argument("--N", type=int, required=True)
    q.add_argument("--samples", type=int, default=100_000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--s-grid", required=True, help=GRID_HELP)
    q.add_argument("--unscaled", action="store_true", help="CDF of lambda_max itself, no edge scaling")
    _add_output(q)
    q.set_defaults(func=cmd_oracle_mc)

    q = osub.add_parser("calibrate-f4", help="pin the F4 argument convention")
    q.add_argument("--s-grid", default="-5,-3,-1,0,1,2", help=GRID_HELP)
    q.add_argument("--tol", type=float, default=1e-5)
    q.add_argument("--m", type=int, default=64)
    q.add_argument("--calibration-file", default="edgekernel_constants.txt")
    _add_output(q)
    q.set_defaults(func=cmd_oracle_calibrate)

    p = sub.add_parser("kernel", help="dump kernel entries on a grid")
    p.add_argument("which", choices=("finite", "limit"))
    p.add_argument("--ensemble", choices=("goe", "gse"), required=True)
    p.add_argument("--entry", choices=("S", "SD", "IS", "full"), default="full",
                   help="IS includes the -eps(x-y) term for GOE")
    p.add_argument("--grid", required=True, help=GRID_HELP)
    p.add_argument("--N", type=int)
    p.add_argument("--unscaled", action="store_true", help="finite kernel without edge scaling")
    p.add_argument("--compare-limit", action="store_true", help="report max difference to the limit kernel")
    p.add_argument("--emit-plot", metavar="STEM", help="also write STEM.csv and a matplotlib script STEM.py")
    _add_output(p)
    p.set_defaults(func=cmd_kernel)
    return parser


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse reads '-5:2:1' as an option; attach it to its flag instead
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if tok in GRID_FLAGS and nxt[:1] == "-" and (nxt[1:2].isdigit() or nxt[1:2] == "."):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_negative_values(list(sys.argv[1:] if argv is None else argv)))
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"edgekernel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DeterminantError, ArithmeticError) as exc:
        print(f"edgekernel: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
