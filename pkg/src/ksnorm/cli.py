"""Command-line front end: norms, integrals, kernels, and the batch suite.

Reports are single JSON objects with sorted keys and floats printed to 17
significant digits, so identical inputs reproduce byte-identical output.
Wall-clock timing is only included with --timing (it would break
determinism otherwise).  Exit codes: 0 success, 1 computation did not
converge or a criterion failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from typing import Optional, TextIO

import numpy as np

from . import gauge, kernels, ks, oscillation, sd
from .config import DEFAULT_K, ENUMERATION_ID, TOOL_VERSION, thread_cap
from .errors import KsnormError, NonConvergenceError
from .fields import field_from_expression
from .oscillation import GridField


# ---------------------------------------------------------------------------
# Deterministic JSON


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e15:
        return repr(float(x))
    return format(x, ".17g")


def _serialize(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, complex):
        return _serialize({"im": obj.imag, "re": obj.real})
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: kv[0])
        inner = ", ".join(f'{_serialize(str(k))}: {_serialize(v)}' for k, v in items)
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else list(obj)
        return "[" + ", ".join(_serialize(v) for v in seq) + "]"
    raise TypeError(f"cannot serialize {type(obj)}")


def serialize_report(report: dict, include_timing: bool = False) -> str:
    def strip(o):
        if isinstance(o, dict):
            return {k: strip(v) for k, v in o.items()
                    if include_timing or k not in ("elapsed_s", "timing_s")}
        if isinstance(o, (list, tuple)):
            return [strip(v) for v in o]
        return o

    return _serialize(strip(report)) + "\n"


def _base_report(command: str, **values) -> dict:
    return {
        "command": command,
        "enumeration_id": ENUMERATION_ID,
        "tool_version": TOOL_VERSION,
        **values,
    }


# ---------------------------------------------------------------------------
# Grid file format: "ksnorm-grid v1; n=<dim>; shape=<d1,...>; box=<a1,b1,...>;"


def write_grid(f: GridField, stream: TextIO) -> None:
    shape = ",".join(str(s) for s in f.values.shape)
    box = ",".join(f"{lo:.17g},{hi:.17g}" for lo, hi in zip(f.lo, f.hi))
    stream.write(f"ksnorm-grid v1; n={f.n}; shape={shape}; box={box};\n")
    flat = f.values.ravel(order="C")
    if np.iscomplexobj(flat):
        for v in flat:
            stream.write(f"{v.real:.17g},{v.imag:.17g}\n")
    else:
        for v in flat:
            stream.write(f"{v:.17g}\n")


def read_grid(stream: TextIO) -> GridField:
    header = stream.readline().strip()
    if not header.startswith("ksnorm-grid v1;"):
        raise ValueError("not a ksnorm-grid v1 file")
    fields = {}
    for part in header.split(";")[1:]:
        part = part.strip()
        if "=" in part:
            key, val = part.split("=", 1)
            fields[key.strip()] = val.strip()
    n = int(fields["n"])
    shape = tuple(int(s) for s in fields["shape"].split(","))
    box_vals = [float(v) for v in fields["box"].split(",")]
    lo = np.array(box_vals[0::2])
    hi = np.array(box_vals[1::2])
    values = []
    is_complex = False
    for line in stream:
        line = line.strip()
        if not line:
            continue
        if "," in line:
            re_s, im_s = line.split(",")
            values.append(complex(float(re_s), float(im_s)))
            is_complex = True
        else:
            values.append(float(line))
    arr = np.array(values, dtype=complex if is_complex else float).reshape(shape)
    return GridField(arr, lo, hi)


def _load_grid_arg(path: str) -> GridField:
    if path == "-":
        return read_grid(sys.stdin)
    with open(path, "r", encoding="utf-8") as fh:
        return read_grid(fh)


# ---------------------------------------------------------------------------
# Subcommands


def _emit(args, report: dict) -> None:
    if args.timing:
        report = {**report, "timing_s": time.monotonic() - args._t0}
    text = serialize_report(report, include_timing=args.timing)
    sys.stdout.write(text)


def cmd_integrate(args) -> int:
    field = field_from_expression(args.expr, args.n)
    if args.n == 1:
        res = gauge.hk_integrate_1d(field, args.a[0], args.b[0], tol=args.tol,
                                    singularities=args.singularity)
    else:
        res = gauge.hk_integrate_box(field, args.a, args.b, tol=args.tol)
    report = _base_report("integrate", expr=args.expr, n=args.n,
                          a=list(args.a), b=list(args.b), tol=args.tol,
                          value=complex(res.value),
                          abs_error_estimate=res.abs_error_estimate,
                          converged=res.converged, evaluations=res.evaluations)
    _emit(args, report)
    return 0 if res.converged else 1


def cmd_alexiewicz(args) -> int:
    field = field_from_expression(args.expr, args.n)
    box = None
    if args.box is not None:
        half = args.box
        box = (np.full(args.n, -half), np.full(args.n, half))
    rep = gauge.alexiewicz_norm(field, search_box=box, tol=args.tol)
    report = _base_report("alexiewicz", expr=args.expr, n=args.n, tol=args.tol,
                          value=rep.value, **rep.extras)
    _emit(args, report)
    return 0


def _parse_p(text: str) -> float:
    return math.inf if text in ("inf", "Inf", "INF") else float(text)


def cmd_ks_norm(args) -> int:
    field = field_from_expression(args.expr, args.n)
    rep = ks.ks_norm(field, p=_parse_p(args.p), K=args.K, tol=args.tol,
                     sup_bound=args.sup_bound)
    report = _base_report("ks-norm", expr=args.expr, n=args.n, p=rep.p,
                          K=rep.K, value=rep.value, tail_bound=rep.tail_bound,
                          tail_is_heuristic=rep.tail_is_heuristic)
    _emit(args, report)
    return 0


def cmd_sd_norm(args) -> int:
    field = field_from_expression(args.expr, args.n)
    from .fields import ScalarField, VectorField

    if isinstance(field, ScalarField):
        field = VectorField([field])
    if len(field.components) != args.n:
        raise KsnormError("sd-norm needs one component per dimension")
    rep = sd.sd_norm(field, p=_parse_p(args.p), K=args.K, tol=args.tol)
    report = _base_report("sd-norm", expr=args.expr, n=args.n, p=rep.p,
                          K=rep.K, value=rep.value, tail_bound=rep.tail_bound,
                          tail_is_heuristic=rep.tail_is_heuristic)
    _emit(args, report)
    return 0


def cmd_maximal(args) -> int:
    f = _load_grid_arg(args.grid)
    norms = oscillation.bmo_norms(f)
    report = _base_report("maximal", grid=args.grid, bmo=norms["bmo"],
                          bmow=norms["bmow"], N=f.N, n=f.n, h=f.h)
    _emit(args, report)
    return 0


def cmd_zachary(args) -> int:
    f = _load_grid_arg(args.grid)
    p = _parse_p(args.p)
    rep = oscillation.zachary_norm(f, p=p, K=args.K)
    values = {"zachary": rep.value, "tail_bound": rep.tail_bound}
    if args.negative:
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            neg = oscillation.zachary_neg_norm(f, p=p, K=args.K)
        values["zachary_neg"] = neg.value
        values["zachary_neg_argmax_r"] = neg.extras["argmax_r"]
    report = _base_report("zachary", grid=args.grid, p=p, K=args.K,
                          **values)
    _emit(args, report)
    return 0


def cmd_kernel(args) -> int:
    spec = kernels.KernelSpec(args.kind, args.n, args.t, args.s)
    x = np.full(args.n, args.x)
    y = np.full(args.n, args.y)
    value = (kernels.heat_kernel(args.t, x, args.s, y, args.n)
             if args.kind == "heat"
             else kernels.feynman_kernel(args.t, x, args.s, y, args.n))
    values = {"kernel": complex(value)}
    if args.compose is not None:
        values["composed"] = complex(
            kernels.compose_kernels(spec, args.compose, x, y, tol=args.tol))
    if args.slices is not None:
        values["time_sliced"] = complex(
            kernels.time_sliced_propagator(spec, args.slices, x, y))
    if args.poisson_lambda is not None:
        ps = kernels.poisson_path_sum(spec, args.poisson_lambda, x,
                                      _const_one(args.n), tol=args.tol)
        values["poisson_value"] = complex(ps["value"])
        values["poisson_weight"] = ps["poisson_weight"]
    if args.ks_norm:
        rep = kernels.kernel_ks_norm(spec, x, region=(np.full(args.n, -64.0),
                                                      np.full(args.n, 64.0)),
                                     p=math.inf, K=args.K, tol=args.tol)
        values["ks_norm"] = rep.value
        values["ks_tail_bound"] = rep.tail_bound
    report = _base_report("kernel", kind=args.kind, n=args.n, t=args.t,
                          s=args.s, x=args.x, y=args.y, **values)
    _emit(args, report)
    return 0


def _const_one(n: int):
    from .fields import ConstantField

    return ConstantField(1.0, n)


def cmd_nse_check(args) -> int:
    from . import nse
    from .ensembles import make_rng

    rng = make_rng(args.seed)
    L = 2 * math.pi
    u = nse.random_solenoidal_field(args.N, L, rng)
    v = nse.random_solenoidal_field(args.N, L, rng)
    w = nse.random_solenoidal_field(args.N, L, rng)
    pv = nse.leray_project(u)
    idem = float(np.abs(pv.u - u.u).max())
    energy = abs(nse.energy_pairing(u, u, u))
    out = nse.nonlinear_bound_check(u, v, w, K=args.K)
    report = _base_report("nse-check", N=args.N, seed=args.seed, K=args.K,
                          leray_idempotence=idem, energy_identity=energy,
                          pairing=complex(out["pairing"]),
                          ratio=out["ratio"],
                          sell_you_ratio=out["sell_you_ratio"],
                          hsd_norms=list(out["hsd_norms"]))
    _emit(args, report)
    return 0


def cmd_suite(args) -> int:
    from .suite import run_suite

    report = run_suite(name_filter=args.filter, seed=args.seed)
    for crit in report["criteria"]:
        status = "PASS" if crit["passed"] else "FAIL"
        print(f"{status} {crit['id']} {crit['name']} ({crit['elapsed_s']}s)",
              file=sys.stderr)
    full = _base_report("suite", **report)
    _emit(args, full)
    return 0 if report["all_passed"] else 1


# ---------------------------------------------------------------------------


def parse_field(expr: str, n: int):
    """Parse an expression into a scalar or vector field (library surface)."""
    return field_from_expression(expr, n)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ksnorm",
        description="Gauge integrals and KS/SD/Zachary norm computations")
    top.add_argument("--timing", action="store_true",
                     help="include wall-clock timing in the JSON report")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", help="HK integral of an expression")
    p.add_argument("--expr", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--a", type=float, nargs="+", default=[0.0])
    p.add_argument("--b", type=float, nargs="+", default=[1.0])
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--singularity", type=float, nargs="*", default=[])
    p.set_defaults(fn=cmd_integrate)

    p = sub.add_parser("alexiewicz", help="Alexiewicz norm of an expression")
    p.add_argument("--expr", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--box", type=float, default=None,
                   help="half-width of the search box (default config R)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(fn=cmd_alexiewicz)

    p = sub.add_parser("ks-norm", help="KS^p norm of an expression")
    p.add_argument("--expr", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--p", default="2")
    p.add_argument("--K", type=int, default=DEFAULT_K)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--sup-bound", type=float, default=None)
    p.set_defaults(fn=cmd_ks_norm)

    p = sub.add_parser("sd-norm", help="SD^p norm of a vector expression")
    p.add_argument("--expr", required=True,
                   help="comma-separated component expressions")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--p", default="2")
    p.add_argument("--K", type=int, default=DEFAULT_K)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(fn=cmd_sd_norm)

    p = sub.add_parser("maximal", help="BMO / BMO^w norms of a grid file")
    p.add_argument("--grid", required=True, help="path or - for stdin")
    p.set_defaults(fn=cmd_maximal)

    p = sub.add_parser("zachary", help="Zachary norms of a grid file")
    p.add_argument("--grid", required=True)
    p.add_argument("--p", default="2")
    p.add_argument("--K", type=int, default=DEFAULT_K)
    p.add_argument("--negative", action="store_true",
                   help="also compute the heat-evolution Z^-p norm")
    p.set_defaults(fn=cmd_zachary)

    p = sub.add_parser("kernel", help="propagator kernels and compositions")
    p.add_argument("--kind", choices=["heat", "feynman"], required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--compose", type=float, default=None,
                   help="intermediate time for Chapman-Kolmogorov")
    p.add_argument("--slices", type=int, default=None)
    p.add_argument("--poisson-lambda", type=float, default=None)
    p.add_argument("--ks-norm", action="store_true")
    p.add_argument("--K", type=int, default=DEFAULT_K)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(fn=cmd_kernel)

    p = sub.add_parser("nse-check", help="Leray/pairing sanity checks")
    p.add_argument("--N", type=int, default=24)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--K", type=int, default=DEFAULT_K)
    p.set_defaults(fn=cmd_nse_check)

    p = sub.add_parser("suite", help="run the acceptance criteria")
    p.add_argument("--filter", default="")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(fn=cmd_suite)

    return top


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    thread_cap()  # validated here; worker pools consult it lazily
    args._t0 = time.monotonic()
    try:
        return args.fn(args)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KsnormError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
