"""``gptctx`` command-line program.

Exit codes: 0 success (or "holds" / "feasible"), 1 failed check ("refuted",
"infeasible", validation failure), 2 unreadable input, 3 solver failure,
4 inconclusive comparison.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

from gptctx import core
from gptctx.io import DocumentError, FIXTURES, fixture_path, load_simulation, load_system
from gptctx.measures import classical_excess, compare, pom_value, pom_yield
from gptctx.optimize.pom import PARITY_MODES, seesaw_pom
from gptctx.optimize.seesaw import SeesawConfig, SeesawFailure
from gptctx.physical import FEASIBLE, INFEASIBLE, find_realisation

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_SOLVER, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    tol: float = 1e-9
    seed: int = 0
    restarts: int = 32
    max_iters: int = 200
    fmt: str = "json"
    preserve_unit: bool = False
    csv_out: str | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("--tol must be positive")

    def seesaw(self):
        return SeesawConfig(restarts=self.restarts, max_iters=self.max_iters, seed=self.seed,
                            inner_tol=self.tol)


def _num(x):
    """12 significant digits, shared by JSON and CSV output."""
    if x is None:
        return None
    return float("%.12g" % x)


def _emit(doc, out):
    out.write(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit_table(cfg, doc, header, rows, out):
    text = _csv_text(header, rows)
    if cfg.csv_out:
        with open(cfg.csv_out, "w") as fh:
            fh.write(text)
    if cfg.fmt == "csv":
        out.write(text)
    else:
        _emit(doc, out)


def cmd_validate(args, cfg, out):
    system = load_system(args.system)
    report = core.validate_system(system, cfg.tol)
    doc = {"system": system.label, "dim": system.dim}
    doc.update(report.to_dict())
    _emit(doc, out)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_excess(args, cfg, out):
    system = load_system(args.system)
    sweep = classical_excess(system, args.m_max, cfg.seesaw(), preserve_unit=cfg.preserve_unit)
    records = []
    rows = []
    for e in sweep.estimates:
        rec = e.to_dict()
        rec["upper"] = _num(rec["upper"])
        rec["lower"] = _num(rec["lower"])
        records.append(rec)
        rows.append([e.m, "" if e.failed else _num(e.upper), _num(e.lower), int(sweep.stabilized),
                     "%.6f" % e.wall_time])
    doc = {
        "system": system.label,
        "estimates": records,
        "stabilized_value": _num(sweep.stabilized_value),
        "stabilized": sweep.stabilized,
        "preserve_unit": cfg.preserve_unit,
        "seed": cfg.seed,
    }
    _emit_table(cfg, doc, ["m", "upper", "lower", "stabilized", "wall_time"], rows, out)
    return EXIT_SOLVER if any(e.failed for e in sweep.estimates) else EXIT_OK


def cmd_pom(args, cfg, out):
    system = load_system(args.system)
    scfg = cfg.seesaw()
    if args.parity == "all":
        value, strategy = pom_value(system, args.bits, scfg)
    else:
        value, strategy = seesaw_pom(system, args.bits, scfg, parity=args.parity)
    doc = {
        "system": system.label,
        "bits": args.bits,
        "parity": args.parity,
        "value": _num(value),
        "po_residual": _num(strategy.po_residual()),
        "strategy_digest": strategy.digest(),
        "seed": cfg.seed,
    }
    rows = []
    if args.yield_dmax:
        result = pom_yield(system, args.bits, args.yield_dmax, scfg)
        doc["yield"] = _num(result.value)
        doc["yield_stabilized"] = result.stabilized
        doc["yield_trace"] = [{"d": d, "value": _num(v), "strategy_digest": h} for d, v, h in result.per_d]
        rows = [[d, _num(v), "", int(result.stabilized), ""] for d, v, _ in result.per_d]
    _emit_table(cfg, doc, ["d", "upper", "lower", "stabilized", "wall_time"], rows, out)
    return EXIT_OK


def cmd_compare(args, cfg, out):
    a = load_system(args.system_a)
    b = load_system(args.system_b)
    ev = compare(a, b, args.n_free_max, cfg.seesaw(), m_max=args.m_max, preserve_unit=cfg.preserve_unit)
    doc = ev.to_dict()
    doc["search_errors"] = {k: _num(v) for k, v in doc["search_errors"].items()}
    for key in ("epsilon", "lower_source", "upper_target"):
        if key in doc:
            doc[key] = _num(doc[key])
    if not args.with_certificate:
        doc.pop("certificate", None)
    _emit(doc, out)
    return {"holds": EXIT_OK, "refuted": EXIT_FAIL}.get(ev.verdict, EXIT_INCONCLUSIVE)


def cmd_realize(args, cfg, out):
    sim = load_simulation(args.simulation)
    result = find_realisation(sim, cfg.tol)
    _emit(result.to_dict(), out)
    if result.status == FEASIBLE:
        return EXIT_OK
    return EXIT_FAIL if result.status == INFEASIBLE else EXIT_SOLVER


def cmd_fixture(args, cfg, out):
    if args.name is None:
        out.write("\n".join(FIXTURES) + "\n")
        return EXIT_OK
    path = fixture_path(args.name)
    out.write(str(path) + "\n" if args.path else path.read_text())
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="membership and validation tolerance")
    common.add_argument("--seed", type=int, default=0, help="base seed; restart r uses seed + r")
    common.add_argument("--restarts", type=int, default=32)
    common.add_argument("--max-iters", type=int, default=200)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--csv-out", metavar="PATH", help="also write the CSV table to PATH")
    common.add_argument("--preserve-unit", action="store_true",
                        help="require excess certificates to map the unit effect to the unit")

    parser = argparse.ArgumentParser(prog="gptctx", description="Contextuality measures for polytope GPT systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check the invariants of a system")
    p.add_argument("system", help="zoo name or system JSON file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("excess", parents=[common], help="classical excess sweep over m = 1..m-max")
    p.add_argument("system")
    p.add_argument("--m-max", type=int, default=4)
    p.set_defaults(func=cmd_excess)

    p = sub.add_parser("pom", parents=[common], help="parity-oblivious multiplexing value and yield")
    p.add_argument("system")
    p.add_argument("--bits", type=int, default=2)
    p.add_argument("--yield-dmax", type=int, default=0, help="also compute the yield over d = 1..D")
    p.add_argument("--parity", choices=PARITY_MODES, default="all",
                   help="'all' hides every parity of two or more bits; 'xor' only the full parity")
    p.set_defaults(func=cmd_pom)

    p = sub.add_parser("compare", parents=[common], help="evidence for 'A is at most as contextual as B'")
    p.add_argument("system_a")
    p.add_argument("system_b")
    p.add_argument("--n-free-max", type=int, default=2)
    p.add_argument("--m-max", type=int, default=4, help="simplex sizes used for the excess of B")
    p.add_argument("--with-certificate", action="store_true", help="include the simulation in the output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("realize", parents=[common], help="search for a physical realisation of a simulation")
    p.add_argument("--simulation", required=True, help="simulation JSON file")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("fixture", parents=[common], help="print a bundled simulation fixture")
    p.add_argument("name", nargs="?", choices=FIXTURES)
    p.add_argument("--path", action="store_true", help="print the file location instead of its contents")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.tol, args.seed, args.restarts, args.max_iters, args.format,
                        args.preserve_unit, args.csv_out)
        SeesawConfig(restarts=cfg.restarts, max_iters=cfg.max_iters)
    except ValueError as exc:
        parser.error(str(exc))
    previous_tol = core.DEFAULT_TOL
    core.set_default_tol(cfg.tol)
    try:
        return args.func(args, cfg, out)
    except DocumentError as exc:
        sys.stderr.write("gptctx: %s\n" % exc)
        return EXIT_PARSE
    except (SeesawFailure, core.MembershipLPError) as exc:
        sys.stderr.write("gptctx: solver failure: %s\n" % exc)
        return EXIT_SOLVER
    finally:
        core.set_default_tol(previous_tol)


if __name__ == "__main__":
    sys.exit(main())
