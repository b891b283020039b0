"""Command-line front end: averaged | zeros | verify | reproduce.

Exit status is 0 only when every requested certification passes; infeasible
reproduction rows (targets provably outside the reachable coefficient span)
are reported but do not fail the run, since the report carries the
diagnostic.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .avgcore import build_averaged_system
from .flowsim import DEFAULT_EPS_SWEEP, eps_sweep, write_cycle_csv
from .polyalg import PolyVec
from .repro import RunConfig, build_report
from .rootfind import SearchBox, find_simple_zeros, write_zero_csv
from .sysspec import SystemSpec
from .trigkernel import TWO_PI, load_cache, save_cache


def _parse_phi(text: str) -> float:
    """Accept plain floats plus 'pi', '2pi', and 'pi/3'-style fractions."""
    text = text.strip().lower().replace(" ", "")
    if text in ("pi", "1pi"):
        return math.pi
    if text == "2pi":
        return TWO_PI
    if text.endswith("pi") and text[:-2].replace(".", "").replace("-", "").isdigit():
        return float(text[:-2]) * math.pi
    if text.startswith("pi/"):
        return math.pi / float(text[3:])
    return float(text)


def _parse_box(text: str, dim: int) -> SearchBox:
    """'lo1,lo2:hi1,hi2' -> SearchBox; dimension must match the system."""
    try:
        lo_txt, hi_txt = text.split(":")
        lo = [float(v) for v in lo_txt.split(",")]
        hi = [float(v) for v in hi_txt.split(",")]
    except ValueError as exc:
        raise SystemExit(f"bad --box {text!r}: expected 'lo1,..:hi1,..' ({exc})")
    if len(lo) != dim or len(hi) != dim:
        raise SystemExit(f"--box has dimension {len(lo)}, the system needs {dim}")
    return SearchBox(lo, hi)


def _default_box(dim: int) -> SearchBox:
    return SearchBox([0.05] + [-1.25] * (dim - 1), [2.1] + [1.25] * (dim - 1))


def _load_spec(path: str) -> SystemSpec:
    if not os.path.exists(path):
        raise SystemExit(f"spec file not found: {path}")
    return SystemSpec.load(path)


def _poly_text(pv: PolyVec, names):
    return "\n".join(f"{name} = {p}" for name, p in zip(names, pv))


def _out_path(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def cmd_averaged(args) -> int:
    spec = _load_spec(args.spec)
    avg = build_averaged_system(spec)
    names_f1 = [f"f1_{k}" for k in range(spec.m + 1)]
    names_f2 = [f"r*f2_{k}" for k in range(spec.m + 1)]
    text = _poly_text(avg.f1, names_f1)
    if avg.rf2 is not None:
        text += "\n" + _poly_text(avg.rf2, names_f2)
    print(text)
    with open(_out_path(args, "averaged.txt"), "w") as fh:
        fh.write(text + "\n")
    payload = {
        "f1": [{",".join(map(str, mo)): c for mo, c in sorted(p.terms.items())} for p in avg.f1],
        "rf2": None if avg.rf2 is None else
               [{",".join(map(str, mo)): c for mo, c in sorted(p.terms.items())} for p in avg.rf2],
        "first_order_zero": avg.rf2 is not None,
    }
    with open(_out_path(args, "averaged.json"), "w") as fh:
        json.dump(payload, fh, indent=2)
    return 0


def _system_for_zeros(spec: SystemSpec):
    avg = build_averaged_system(spec)
    if avg.rf2 is not None:
        return avg.rf2, 2
    return avg.f1, 1


def cmd_zeros(args) -> int:
    spec = _load_spec(args.spec)
    system, order = _system_for_zeros(spec)
    dim = spec.m + 1
    box = _parse_box(args.box, dim) if args.box else _default_box(dim)
    records = find_simple_zeros(system, box)
    write_zero_csv(_out_path(args, "zeros.csv"), records, dim)
    simple = sum(1 for r in records if r.simple)
    print(f"order-{order} averaged system: {simple} simple zeros "
          f"({len(records)} candidates) -> {_out_path(args, 'zeros.csv')}")
    for rec in records:
        print("  ", rec.as_row())
    return 0 if all(r.simple for r in records) else 1


def cmd_verify(args) -> int:
    spec = _load_spec(args.spec)
    system, order = _system_for_zeros(spec)
    dim = spec.m + 1
    box = _parse_box(args.box, dim) if args.box else _default_box(dim)
    eps_values = tuple(float(v) for v in args.eps_sweep.split(",")) if args.eps_sweep \
        else DEFAULT_EPS_SWEEP
    zero_records = [r for r in find_simple_zeros(system, box) if r.simple]
    if not zero_records:
        print("no simple zeros to verify")
        return 1
    ok = True
    for k, zr in enumerate(zero_records):
        records = eps_sweep(spec, zr.nu, eps_values)
        path = _out_path(args, f"cycles_{k}.csv")
        write_cycle_csv(path, records, spec.d)
        accepted = sum(1 for rec in records if rec.accepted)
        ok &= accepted == len(records)
        print(f"zero {k} at {zr.nu}: {accepted}/{len(records)} eps values verified -> {path}")
    return 0 if ok else 1


def cmd_reproduce(args) -> int:
    config = RunConfig(
        suite=args.suite,
        max_n=args.max_n,
        m_values=tuple(int(v) for v in args.m.split(",")),
        phi=_parse_phi(args.phi),
        seed=args.seed,
        verify_cycles=args.verify_cycles,
        eps_values=tuple(float(v) for v in args.eps_sweep.split(",")) if args.eps_sweep else (),
    )
    report = build_report(config)
    report.write_csv(_out_path(args, "report.csv"))
    table = report.text_table()
    print(table)
    with open(_out_path(args, "report.txt"), "w") as fh:
        fh.write(table + "\n")
    return 0 if report.all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avgcycles",
        description="Averaged functions and limit-cycle counts for piecewise "
                    "polynomial perturbations of linear systems.",
    )
    parser.add_argument("--version", action="version", version=f"avgcycles {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spec=False):
        p.add_argument("--out-dir", default=".", help="directory for output files")
        p.add_argument("--seed", type=int, default=0, help="RNG seed recorded in outputs")
        if spec:
            p.add_argument("--spec", required=True, help="system spec JSON file")

    p = sub.add_parser("averaged", help="write the averaged functions of a spec")
    common(p, spec=True)
    p.set_defaults(func=cmd_averaged)

    p = sub.add_parser("zeros", help="locate simple zeros of the averaged system")
    common(p, spec=True)
    p.add_argument("--box", help="search box 'lo1,..:hi1,..' in (r, z_1..z_m)")
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("verify", help="verify predicted cycles by direct integration")
    common(p, spec=True)
    p.add_argument("--box", help="search box 'lo1,..:hi1,..' in (r, z_1..z_m)")
    p.add_argument("--eps-sweep", help="comma-separated eps values")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reproduce", help="run the generator matrix and emit the count report")
    common(p)
    p.add_argument("--suite", default="all", help="th3 | th6 | th7 | all")
    p.add_argument("--max-n", type=int, default=2, help="largest polynomial degree n")
    p.add_argument("--m", default="0,1", help="comma-separated tail dimensions")
    p.add_argument("--phi", default="pi/3", help="switching angle for the generic suite")
    p.add_argument("--eps-sweep", help="comma-separated eps values for cycle verification")
    p.add_argument("--verify-cycles", action="store_true",
                   help="also integrate one cycle per first-order row")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    load_cache()
    try:
        return args.func(args)
    finally:
        save_cache()


if __name__ == "__main__":
    sys.exit(main())
