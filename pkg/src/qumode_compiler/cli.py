"""Command-line interface: ``qumode-compiler <command> [options]``.

Exit codes: 0 success, 2 bad input, 3 a requested ``--assert`` failed.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .bench import run_bench, write_bench_csv
from .circuit import (
    MODES,
    angle_histogram,
    circuit_to_dict,
    default_bin_edges,
    read_circuit,
    read_report,
    write_circuit,
    write_histogram_csv,
    write_report,
)
from .compiler import DEFAULT_TAU, compile_unitary
from .dropout import DEFAULT_ITERATIONS, DEFAULT_POWERS, UnreachableFidelityError, model_from_params, sample_masks
from .numerics import fidelity, haar_random_unitary, read_unitary, write_unitary

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ASSERT = 3


class AssertionFailed(Exception):
    pass


def _int_list(text):
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("list must not be empty")
    return vals


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def cmd_gen_unitary(args):
    u = haar_random_unitary(args.n, args.seed)
    if args.out in (None, "-"):
        from .numerics import unitary_to_dict

        json.dump(unitary_to_dict(u), sys.stdout)
        sys.stdout.write("\n")
    else:
        write_unitary(args.out, u)


def cmd_compile(args):
    u = read_unitary(args.input)
    if args.mode in ("baseline", "rot-cut") and args.map_k is not None:
        print(f"note: --map-k is ignored in mode {args.mode}", file=sys.stderr)
    res = compile_unitary(u, args.device, args.mode, args.tau, args.map_k, args.power_k,
                          args.iterations, args.seed)
    if args.out:
        write_circuit(args.out, res.circuit)
    if args.report:
        write_report(args.report, res.report)
    if args.histogram:
        write_histogram_csv(args.histogram, res.report.histogram_edges, res.report.histogram_counts)
    r = res.report
    print(f"{r.mode}: {r.bs_kept}/{r.bs_total} beamsplitters kept "
          f"({100 * r.drop_fraction:.1f}% dropped), fidelity {r.fidelity_deterministic:.6f}")


def cmd_verify(args):
    u = read_unitary(args.input)
    c = read_circuit(args.circuit)
    if c.n_qumodes != u.shape[0]:
        raise ValueError(f"dimension mismatch: circuit has {c.n_qumodes} qumodes, unitary is {u.shape[0]}x{u.shape[0]}")
    f = fidelity(c.logical_unitary(), u)
    bad = c.violations()
    print(f"fidelity {f:.12f}")
    if bad:
        print(f"{len(bad)} gate(s) not lattice-adjacent, first: {bad[0]}")
    if args.assert_min is not None and (f < args.assert_min or bad):
        raise AssertionFailed(f"fidelity {f:.12f} below {args.assert_min}" if not bad else "illegal gates")


def cmd_sample_circuits(args):
    c = read_circuit(args.input)
    rep = read_report(args.report)
    info = rep.get("dropout") if isinstance(rep, dict) else None
    if not info:
        raise ValueError(f"{args.report}: no dropout model (compile with --mode full-opt)")
    model = model_from_params(c.thetas, info["tau"], info["theta_cut"], info["kept_count"],
                              info["power_k"], info["iterations"], info["mean_fidelity"])
    masks = sample_masks(model, args.shots, args.seed)
    with _open_out(args.out) as fh:
        for m in masks:
            fh.write(json.dumps(circuit_to_dict(c.with_dropped(~m)), separators=(",", ":")))
            fh.write("\n")


def cmd_analyze(args):
    c = read_circuit(args.input)
    edges, counts = angle_histogram(c.thetas, default_bin_edges(args.bins))
    if args.out in (None, "-"):
        write_histogram_csv(sys.stdout, edges, counts)
    else:
        write_histogram_csv(args.out, edges, counts)


def cmd_bench(args):
    rows = run_bench(args.sizes, args.tau, args.repeats, args.seed, args.device, args.mode, args.workers)
    if args.out in (None, "-"):
        write_bench_csv(sys.stdout, rows)
    else:
        with open(args.out, "w", newline="") as fh:
            write_bench_csv(fh, rows)


def build_parser():
    p = argparse.ArgumentParser(prog="qumode-compiler",
                                description="Compile linear-interferometer unitaries to lattice MZI circuits.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-unitary", help="write a Haar-random unitary")
    g.add_argument("-n", "--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen_unitary)

    c = sub.add_parser("compile", help="compile a unitary file")
    c.add_argument("--input", required=True)
    c.add_argument("--device", required=True, help="lattice as RxC, e.g. 6x6")
    c.add_argument("--mode", choices=MODES, default="full-opt")
    c.add_argument("--tau", type=float, default=DEFAULT_TAU)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--map-k", type=_int_list, default=None)
    c.add_argument("--power-k", type=_int_list, default=list(DEFAULT_POWERS))
    c.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    c.add_argument("--out", help="circuit JSON")
    c.add_argument("--report", help="report JSON")
    c.add_argument("--histogram", help="angle histogram CSV")
    c.set_defaults(func=cmd_compile)

    v = sub.add_parser("verify", help="fidelity of a circuit against a unitary")
    v.add_argument("--input", required=True, help="reference unitary JSON")
    v.add_argument("--circuit", required=True)
    v.add_argument("--assert", dest="assert_min", type=float, nargs="?", const=1 - 1e-9, default=None,
                   metavar="MIN", help="exit 3 when fidelity < MIN (default 1-1e-9)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sample-circuits", help="per-shot dropout circuits as JSON lines")
    s.add_argument("--input", required=True, help="full-opt circuit JSON")
    s.add_argument("--report", required=True, help="report JSON holding the dropout model")
    s.add_argument("--shots", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample_circuits)

    a = sub.add_parser("analyze", help="angle histogram CSV of a circuit")
    a.add_argument("--input", required=True)
    a.add_argument("--bins", type=int, default=50)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bench", help="mean drop over Haar instances per size")
    b.add_argument("--sizes", type=_int_list, default=[10, 15, 20, 60, 100])
    b.add_argument("--tau", type=float, default=0.95)
    b.add_argument("--repeats", type=int, default=5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--device", default=None, help="override the 3 x ceil(N/3) default")
    b.add_argument("--mode", choices=MODES, default="full-opt")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except AssertionFailed as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except UnreachableFidelityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
