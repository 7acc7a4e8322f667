"""Command-line front end.

Subcommands: ``spectrum`` (eigenvalues by the matching-determinant
solver, the finite-element solver, or both), ``trace-avg`` (averaged
eigenvalue-shift report), ``check`` (rigidity verdict), and ``demo``
(run a bundled example end to end).

Exit codes: 0 success (certified where applicable), 1 error, 2 the run
finished but a completeness certificate failed.  Output files are
written atomically: a temporary file in the target directory is renamed
into place only on success.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

from .errors import QglabError
from .fem import assemble, solve_eigen
from .fixtures import FIXTURE_NAMES, fixture_graph, save_fixture
from .graphs import load_graph
from .rigidity import check_conditions, functionals, verdict_to_json
from .secular import SpectrumRequest, compute_spectrum
from .trace import report_to_csv, report_to_json, trace_average

__all__ = ["main", "console_main"]

# finite-element comparison mesh; matches the cross-validation oracle
FEM_MESH_H = 1e-3

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNCERTIFIED = 2


def _write_text(path, text):
    """Write atomically with LF endings, or to stdout when path is None."""
    if path is None:
        sys.stdout.write(text)
        return
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target),
                               prefix=".qglab-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fem_values(g, count=None, lambda_max=None):
    system = assemble(g, FEM_MESH_H)
    if count is not None:
        want = count
    else:
        # eigenvalue count estimate below lambda_max, plus safety
        want = int(g.total_length() * math.sqrt(max(lambda_max, 0.0))
                   / math.pi) + len(g.vertices) + len(g.edges) + 2
    want = min(want, system.size)
    vals = solve_eigen(system, want)
    if lambda_max is not None:
        vals = [v for v in vals if v <= lambda_max]
    return vals


def _spectrum_rows(args, g):
    request = SpectrumRequest(count=args.count, lambda_max=args.lambda_max,
                              tol=args.tol)
    certified = True
    doc = {"method": args.method}
    if args.method in ("secular", "both"):
        sec = compute_spectrum(g, request)
        certified = sec.certified
        doc["certified"] = sec.certified
        doc["weyl_expected"] = sec.weyl_expected
        doc["lambda_max"] = sec.lambda_max
        doc["values"] = list(sec.values)
        doc["multiplicities"] = [int(m) for m in sec.multiplicities]
        flat_sec = sec.flat()
    if args.method in ("fem", "both"):
        n_want = args.count if args.count is not None else None
        if args.method == "both" and n_want is None:
            n_want = len(flat_sec)
        fem_vals = _fem_values(g, count=n_want, lambda_max=args.lambda_max)
        doc["fem_values"] = list(fem_vals)

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if args.method == "secular":
        writer.writerow(["n", "lambda", "multiplicity"])
        n = 0
        for lam, mult in zip(doc["values"], doc["multiplicities"]):
            writer.writerow(["%d" % n, "%.17g" % lam, "%d" % mult])
            n += mult
    elif args.method == "fem":
        writer.writerow(["n", "lambda"])
        for n, lam in enumerate(doc["fem_values"]):
            writer.writerow(["%d" % n, "%.17g" % lam])
    else:
        writer.writerow(["n", "lambda_secular", "lambda_fem", "abs_diff"])
        for n, (a, b) in enumerate(zip(flat_sec, doc["fem_values"])):
            writer.writerow(["%d" % n, "%.17g" % a, "%.17g" % b,
                             "%.17g" % abs(a - b)])
    return doc, out.getvalue(), certified


def cmd_spectrum(args):
    g = load_graph(args.graph)
    doc, table, certified = _spectrum_rows(args, g)
    if args.format == "json":
        _write_text(args.output,
                    json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        _write_text(args.output, table)
    return EXIT_OK if certified else EXIT_UNCERTIFIED


def cmd_trace_avg(args):
    g = load_graph(args.graph)
    report = trace_average(g, args.count, tol=args.tol)
    if args.format == "json":
        _write_text(args.output, report_to_json(report))
    else:
        _write_text(args.output, report_to_csv(report))
    if args.output is not None:
        # gnuplot companion: one (N, S_N) pair per line
        lines = ["%d %.17g" % (i + 1, s)
                 for i, s in enumerate(report.partial_averages)]
        _write_text(args.output + ".plot", "\n".join(lines) + "\n")
    return EXIT_OK if report.certified else EXIT_UNCERTIFIED


def cmd_check(args):
    g = load_graph(args.graph)
    verdict = check_conditions(g, tol=args.tol)
    _write_text(args.output, verdict_to_json(verdict))
    # keep stdout machine-parseable when the JSON itself goes there
    summary_stream = sys.stdout if args.output is not None else sys.stderr
    print("conclusion: %s (phi1=%.12g, phi2=%.12g)"
          % (verdict.conclusion, verdict.phi1, verdict.phi2),
          file=summary_stream)
    return EXIT_OK


def _demo_narrative(name, g, flat):
    lines = []
    if name == "interval":
        lines.append("free unit interval; eigenvalues should be (n pi)^2:")
        for n, lam in enumerate(flat[:10]):
            lines.append("  n=%2d  lambda=%18.12f  (n pi)^2=%18.12f"
                         % (n, lam, (n * math.pi) ** 2))
    elif name == "star3":
        p1, _p2 = functionals(g)
        lines.append("unit 3-star with an attractive center coupling:")
        lines.append("  ground state lambda_0 = %.12f (negative: the free"
                     " operator starts at 0)" % flat[0])
        lines.append("  shift functional phi1 = %.12f (nonzero forces a"
                     " different spectrum)" % p1)
    else:
        devs = [abs(flat[n] - (2 * n * math.pi) ** 2)
                / (2 * n * math.pi) ** 2 for n in range(1, 21)]
        lines.append("interval carrying a nonzero potential yet isospectral"
                     " to the free Neumann operator:")
        lines.append("  lambda_0 = %.3e (should vanish)" % flat[0])
        lines.append("  max relative deviation of lambda_1..lambda_20 from"
                     " (2 n pi)^2: %.3e" % max(devs))
    return "\n".join(lines)


def cmd_demo(args):
    name = args.name
    if name not in FIXTURE_NAMES:
        print("unknown demo %r; choose one of: %s"
              % (name, ", ".join(FIXTURE_NAMES)), file=sys.stderr)
        return EXIT_ERROR
    outdir = args.output or "."
    os.makedirs(outdir, exist_ok=True)
    graph_path = os.path.join(outdir, name + ".json")
    save_fixture(name, graph_path)
    g = fixture_graph(name)

    count = 21 if name == "counterexample" else 12
    spec = compute_spectrum(g, SpectrumRequest(count=count))
    flat = spec.flat()
    rows = ["n,lambda,multiplicity"]
    n = 0
    for lam, mult in zip(spec.values, spec.multiplicities):
        rows.append("%d,%.17g,%d" % (n, lam, mult))
        n += mult
    _write_text(os.path.join(outdir, name + "-spectrum.csv"),
                "\n".join(rows) + "\n")

    report = trace_average(g, 40)
    _write_text(os.path.join(outdir, name + "-trace.csv"),
                report_to_csv(report))
    plot = ["%d %.17g" % (i + 1, s)
            for i, s in enumerate(report.partial_averages)]
    _write_text(os.path.join(outdir, name + "-trace.plot"),
                "\n".join(plot) + "\n")

    verdict = check_conditions(g)
    _write_text(os.path.join(outdir, name + "-check.json"),
                verdict_to_json(verdict))

    print(_demo_narrative(name, g, flat))
    print("shift average: S_40 = %.6f, extrapolated = %.6f, analytic"
          " limit = %.6f" % (report.partial_averages[-1],
                             report.extrapolated, report.rhs))
    print("rigidity verdict: %s" % verdict.conclusion)
    print("files written under %s: %s.json, %s-spectrum.csv, %s-trace.csv,"
          " %s-trace.plot, %s-check.json"
          % (outdir, name, name, name, name, name))
    ok = spec.certified and report.certified
    return EXIT_OK if ok else EXIT_UNCERTIFIED


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="qglab",
        description="spectral laboratory for delta-coupled metric graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_graph=True):
        if need_graph:
            p.add_argument("--graph", required=True,
                           help="path to a graph description JSON file")
        p.add_argument("--tol", type=float, default=1e-8,
                       help="solver tolerance (default 1e-8)")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="report format (default csv)")
        p.add_argument("--output", default=None,
                       help="output file (default: stdout)")

    p_spec = sub.add_parser("spectrum", help="compute eigenvalues")
    common(p_spec)
    p_spec.add_argument("--count", type=int, default=None,
                        help="number of eigenvalues (with multiplicity)")
    p_spec.add_argument("--lambda-max", type=float, default=None,
                        dest="lambda_max",
                        help="compute every eigenvalue at most this value")
    p_spec.add_argument("--method", choices=("secular", "fem", "both"),
                        default="secular")

    p_tr = sub.add_parser("trace-avg",
                          help="averaged eigenvalue-shift report")
    common(p_tr)
    p_tr.add_argument("--count", type=int, required=True,
                      help="number of eigenvalue pairs N")

    p_chk = sub.add_parser("check", help="rigidity verdict")
    common(p_chk)
    p_chk.set_defaults(tol=1e-9)

    p_demo = sub.add_parser("demo", help="run a bundled example")
    p_demo.add_argument("name", help="one of: %s" % ", ".join(FIXTURE_NAMES))
    p_demo.add_argument("--output", default=None,
                        help="directory for demo files (default: .)")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "spectrum": cmd_spectrum,
        "trace-avg": cmd_trace_avg,
        "check": cmd_check,
        "demo": cmd_demo,
    }
    try:
        return handlers[args.command](args)
    except QglabError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR


def console_main():
    sys.exit(main())
