"""Command-line front end.

Human-readable text goes to stdout; ``--out PATH`` also writes a JSON run
report carrying input digests, the defaults in force and the tool version.

Exit status: 0 success, 1 input error, 2 solver or search ran out of
iterations/budget, 3 a modelling assumption does not hold.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import metadata

import numpy as np

from . import bounds, codes, montecarlo, transform
from .channelmath import (
    Distribution,
    WiretapChannel,
    check_simultaneously_maximizable,
    compose_degraded,
    mutual_information,
)
from .errors import (
    BudgetError,
    ConvergenceError,
    ModelAssumptionError,
    ParseError,
    PreconditionError,
    StructuralError,
)
from .netmodel import (
    AdversarySet,
    Network,
    Noiseless,
    export_dot,
    format_rational,
    key_capacity,
    load_network,
    network_to_dict,
    parse_rational,
    serialize_network,
)

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_MODEL = 0, 1, 2, 3


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def digest(path: str) -> str:
    with open(path, "rb") as fh:
        return "sha256:" + hashlib.sha256(fh.read()).hexdigest()


@dataclass
class RunReport:
    command: list[str]
    defaults: dict
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    cited: list = field(default_factory=list)
    exit_status: int = EXIT_OK

    def add_input(self, path: str) -> None:
        self.inputs[path] = digest(path)

    def to_dict(self) -> dict:
        return {
            "tool": "wiretapnet",
            "version": version(),
            "command": self.command,
            "inputs": self.inputs,
            "defaults": self.defaults,
            "results": self.results,
            "records": self.records,
            "cited": self.cited,
            "exit_status": self.exit_status,
        }


class _Fail(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _quantum(text: str) -> Fraction:
    try:
        q = parse_rational(text)
    except (ValueError, ZeroDivisionError, ParseError) as exc:
        raise argparse.ArgumentTypeError(f"bad quantum {text!r}") from exc
    if not 0 < q <= 1 or q.numerator != 1:
        raise argparse.ArgumentTypeError("quantum must look like 1/D")
    return q


def _common_parser(defaults: bool) -> argparse.ArgumentParser:
    sup = argparse.SUPPRESS
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--out", metavar="PATH", default=None if defaults else sup, help="write the JSON run report here")
    g.add_argument("--threads", type=int, default=(os.cpu_count() or 1) if defaults else sup)
    g.add_argument("--tol", type=float, default=transform.CHECK_TOL if defaults else sup,
                   help="tolerance of the maximizability checks")
    g.add_argument("--quantum", type=_quantum, default=transform.QUANTUM if defaults else sup,
                   help="rationalization quantum, written 1/D")
    g.add_argument("--seed", type=int, default=0 if defaults else sup)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wiretapnet",
        description="Bounds and codes for networks of degraded wiretap channels.",
        parents=[_common_parser(True)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {version()}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser(False)

    p = sub.add_parser("analyze", parents=[common], help="per-edge capacities and key sizes")
    p.add_argument("network")

    p = sub.add_parser("transform", parents=[common], help="rewrite noisy edges as bit pipes")
    p.add_argument("network")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--theorem", type=int, choices=(2, 3, 4),
                      help="2: upper bound, 3: equivalence, 4: keep confidential part only")
    mode.add_argument("--model2", action="store_true", help="build the adversary-enhanced network")
    p.add_argument("--edge", action="append", default=[], help="edge reference or name (repeatable)")
    p.add_argument("--rates", metavar="FILE", help="JSON map edge -> [rc, rp] for --model2")
    p.add_argument("--strict", action="store_true", help="offset rates by one quantum into the open region")
    p.add_argument("-o", "--network-out", metavar="PATH", help="write the transformed network here (default stdout)")

    p = sub.add_parser("bound", parents=[common], help="upper and lower bounds on the secure rate")
    p.add_argument("network")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--upper", action="store_true", help="cut bound of the upper-bounding network")
    mode.add_argument("--model1", action="store_true", help="lower bound through model-I")
    mode.add_argument("--model2", action="store_true", help="lower bound through the enhanced network")
    p.add_argument("--order", help="comma-separated edges to zero for --model1")
    p.add_argument("--code", metavar="FILE", help="enhanced-network code to certify with --model2")
    p.add_argument("--rates", metavar="FILE", help="JSON map edge -> [rc, rp] for --model2")
    p.add_argument("--no-search", action="store_true", help="skip the code search")
    p.add_argument("--blocklength", type=int)
    p.add_argument("--field", type=int, default=2)
    p.add_argument("--budget", type=int, default=bounds.DEFAULT_BUDGET)
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("verify-code", parents=[common], help="exact error and leakage of a linear code")
    p.add_argument("network")
    p.add_argument("--code", metavar="FILE", required=True)
    p.add_argument("--method", choices=("rank", "enumeration", "both"), default="rank")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo on a wiretap channel")
    p.add_argument("--channel", metavar="FILE", help="channel document, or a network with --edge")
    p.add_argument("--edge", help="edge of the network given by --channel")
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--double-exposure", type=float, metavar="P",
                   help="probability that each of two copies of a bit is erased")

    p = sub.add_parser("export-dot", parents=[common], help="Graphviz rendering of a network")
    p.add_argument("network")
    return parser


def _defaults(args) -> dict:
    out = {
        "tol": args.tol,
        "quantum": format_rational(args.quantum),
        "seed": args.seed,
        "threads": args.threads,
        "solver_tol": 1e-9,
        "solver_max_iter": 100000,
    }
    for name in ("budget", "field", "blocklength", "trials", "method", "strict"):
        if hasattr(args, name):
            out[name] = getattr(args, name)
    return out


def _load(path: str, report: RunReport) -> tuple[Network, AdversarySet]:
    net, adv = load_network(path)
    report.add_input(path)
    return net, adv


def _fmt(x: float) -> str:
    return f"{x:.6f}".rstrip("0").rstrip(".") if abs(x - round(x)) > 1e-12 else str(int(round(x)))


# ---------------------------------------------------------------- commands


def cmd_analyze(args, report: RunReport) -> None:
    net, adv = _load(args.network, report)
    rows = []
    print(f"{'edge':<10} {'cap_main':>10} {'cap_eave':>10} {'max_diff':>10}  maximizable")
    for e, model in net.edges.items():
        if isinstance(model, Noiseless):
            row = {"edge": net.label(e), "type": "noiseless", "cap_main": float(model.total),
                   "cap_eave": float(model.rp), "max_difference": float(model.rc), "maximizable": None}
            verdict = "n/a"
        else:
            rep = check_simultaneously_maximizable(model.channel, args.tol, threads=args.threads)
            row = {"edge": net.label(e), "type": "noisy", "cap_main": rep.cap_main, "cap_eave": rep.cap_eave,
                   "max_difference": rep.max_difference, "maximizable": rep.is_simultaneously_maximizable,
                   "argmax_main": rep.argmax_main.probs.tolist()}
            verdict = "yes" if rep.is_simultaneously_maximizable else "no"
        rows.append(row)
        print(f"{row['edge']:<10} {_fmt(row['cap_main']):>10} {_fmt(row['cap_eave']):>10} "
              f"{_fmt(row['max_difference']):>10}  {verdict}")
    keys = {str(i): key_capacity(net, i) for i in net.nodes}
    print("key sizes C(i): " + ", ".join(f"{i}: {_fmt(v)}" for i, v in keys.items()))
    report.results = {"edges": rows, "key_capacity": keys}


def _rates_file(path: str | None, report: RunReport):
    if path is None:
        return None
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    report.add_input(path)
    return {k: (parse_rational(v[0]), parse_rational(v[1])) for k, v in doc.items()}


def cmd_transform(args, report: RunReport) -> None:
    net, adv = _load(args.network, report)
    if args.model2:
        enh = transform.build_a_enhanced(
            net, adv, _rates_file(args.rates, report), strict=args.strict, tol=args.tol, quantum=args.quantum
        )
        doc = enh.to_dict()
        _emit(json.dumps(doc, indent=2), args.network_out)
        report.results = {
            "nodes": enh.num_nodes,
            "hyperedges": len(enh.hyperedges),
            "pipe_capacity": {"{" + ",".join(sorted(net.label(e) for e in E)) + "}": format_rational(c)
                              for E, c in enh.pipe_capacity.items()},
            "key_capacity": {str(i): format_rational(c) for i, c in enh.key_capacity.items()},
        }
        print(f"enhanced network: {enh.num_nodes} nodes, {len(enh.hyperedges)} hyperedges", file=sys.stderr)
        for lab, c in report.results["pipe_capacity"].items():
            print(f"  key pipe {lab}: {c}", file=sys.stderr)
        return
    if not args.edge:
        raise _Fail(EXIT_INPUT, "--theorem needs at least one --edge")
    records = []
    if args.theorem == 2:
        net, records = transform.theorem2_transform(net, adv, args.edge, tol=args.tol, quantum=args.quantum,
                                                    strict=args.strict)
    else:
        for ref in args.edge:
            if args.theorem == 3:
                net, rec = transform.theorem3_transform(net, adv, ref, tol=args.tol, quantum=args.quantum)
            else:
                net, adv, rec = transform.model1_transform(net, adv, ref, tol=args.tol, quantum=args.quantum,
                                                           strict=args.strict)
            records.append(rec)
    for rec in records:
        rc, rp = rec.rates_used
        print(f"{rec.kind:<12} {net.label(rec.edge):<8} -> ({rc}, {rp})", file=sys.stderr)
    report.records = [r.to_dict(net) for r in records]
    report.results = {"network": network_to_dict(net, adv)}
    _emit(serialize_network(net, adv), args.network_out)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _warn_flooring(net: Network, n: int) -> None:
    lost = [net.label(e) for e, m in net.edges.items()
            if isinstance(m, Noiseless) and ((m.rc * n).denominator != 1 or (m.rp * n).denominator != 1)]
    if lost:
        dens = [x.denominator for m in net.edges.values() if isinstance(m, Noiseless) for x in (m.rc, m.rp)]
        suggest = bounds._lcm_blocklength(dens)
        print(f"warning: blocklength {n} floors the symbol budgets of {', '.join(lost)}; "
              f"try a multiple of {suggest}", file=sys.stderr)


def _search_summary(res) -> dict | None:
    return res.to_dict() if res is not None else None


def _check_search(res, report: RunReport) -> None:
    if res is not None and not res.exhaustive and res.code is None:
        report.exit_status = EXIT_SOLVER
        print("search stopped on its budget before finding a code", file=sys.stderr)


def cmd_bound(args, report: RunReport) -> None:
    net, adv = _load(args.network, report)
    demand = net.demands[0] if net.demands else None
    if demand is None:
        raise _Fail(EXIT_INPUT, "network has no demand")
    report.cited.append(dict(bounds.LITERATURE_CONVERSE))
    if args.upper:
        cut, upper, records = bounds.upper_bound(net, adv, demand, tol=args.tol, quantum=args.quantum,
                                                 strict=args.strict)
        report.records = [r.to_dict(net) for r in records]
        report.results = {"upper_cut_bound": cut.to_dict(upper), "source": "computed"}
        print(f"upper bound (cut of upper-bounding network): {_fmt(cut.value)}")
        print(f"  witness: sink {cut.sink}, cut {{{','.join(upper.label(e) for e in cut.cut)}}}, "
              f"tapped {{{','.join(sorted(upper.label(e) for e in cut.adversary_set))}}}")
    elif args.model1:
        order = args.order.split(",") if args.order else None
        res = bounds.model1_lower_bound(net, adv, demand, order, n=args.blocklength, q=args.field,
                                        budget=args.budget, search=not args.no_search, tol=args.tol,
                                        quantum=args.quantum, strict=args.strict)
        report.records = [r.to_dict(net) for r in res.records]
        report.results = {
            "model1_rate": res.rate,
            "cut_bound": res.cut.to_dict(res.network),
            "blocklength": res.blocklength,
            "search": _search_summary(res.search),
            "network": network_to_dict(res.network, res.adversary),
            "source": "computed",
        }
        if res.search is not None and res.search.code is not None:
            report.results["code"] = codes.code_to_dict(res.search.code, demand, res.network)
        for rec in res.records:
            print(f"{rec.kind:<12} {net.label(rec.edge):<8} -> ({rec.rates_used[0]}, {rec.rates_used[1]})")
        print(f"model-I cut bound: {_fmt(res.cut.value)}")
        print(f"model-I certified rate: {_fmt(res.rate)} (blocklength {res.blocklength})")
        _check_search(res.search, report)
    elif args.model2:
        code = None
        if args.code:
            code, _ = codes.load_code(args.code)
            report.add_input(args.code)
        res = bounds.model2_lower_bound(net, adv, demand, code, rates=_rates_file(args.rates, report),
                                        n=args.blocklength, q=args.field, budget=args.budget,
                                        search=not args.no_search, strict=args.strict, tol=args.tol,
                                        quantum=args.quantum)
        enh = res.enhanced
        report.results = {
            "model2_rate": res.rate,
            "cut_bound_base": res.cut.to_dict(res.network),
            "pipe_capacity": {"{" + ",".join(sorted(net.label(e) for e in E)) + "}": format_rational(c)
                              for E, c in enh.pipe_capacity.items()},
            "blocklength": res.blocklength,
            "search": _search_summary(res.search),
            "notes": list(res.notes),
            "source": "computed",
        }
        if res.search is not None and res.search.report is not None:
            report.results["demands"] = res.search.report.to_dict()
        if res.search is not None and res.search.code is not None:
            report.results["code"] = codes.code_to_dict(res.search.code)
        for lab, c in report.results["pipe_capacity"].items():
            print(f"key pipe {lab}: {c}")
        for note in res.notes:
            print(note)
        print(f"model-II certified rate: {_fmt(res.rate)} (blocklength {res.blocklength})")
        _check_search(res.search, report)
    else:
        if not net.is_noiseless:
            raise _Fail(EXIT_INPUT, "network has noisy edges; use --upper, --model1 or --model2")
        cut = bounds.secure_cut_bound(net, adv, demand.source, demand.sinks)
        report.results = {"cut_bound": cut.to_dict(net), "source": "computed"}
        print(f"secure cut bound: {_fmt(cut.value)}")
        if not args.no_search:
            n = args.blocklength or bounds._lcm_blocklength([r for m in net.edges.values() for r in (m.rc, m.rp)])
            _warn_flooring(net, n)
            res = bounds.search_linear_codes(net, adv, demand, n, args.field, args.budget)
            report.results["search"] = res.to_dict()
            report.results["blocklength"] = n
            if res.code is not None:
                report.results["code"] = codes.code_to_dict(res.code, demand, net)
            status = "optimal" if res.exhaustive and abs(res.best_rate - cut.value) < 1e-12 else (
                "exhaustive" if res.exhaustive else "budget-limited")
            print(f"best linear code: rate {_fmt(res.best_rate)} at blocklength {n} ({status}, "
                  f"{res.explored} candidates)")
            _check_search(res, report)
    print(f"cited, not computed: {bounds.LITERATURE_CONVERSE['statement']} [source: paper]")


def cmd_verify(args, report: RunReport) -> None:
    net, adv = _load(args.network, report)
    with open(args.code, encoding="utf-8") as fh:
        doc = json.load(fh)
    report.add_input(args.code)
    code, demand = codes.code_from_dict(doc, net if "edges" in doc else None)
    demand = demand or net.demands[0]
    if "hyperedges" in doc:
        enh = transform.build_a_enhanced(net, adv, tol=args.tol, quantum=args.quantum)
        rep = codes.evaluate_enhanced(enh, code, demand)
        report.results = rep.to_dict()
        print(f"enhanced-network code: message rate {_fmt(rep.rate_messages)}, key rate {_fmt(rep.rate_keys)}")
        for v, ok in rep.decodes.items():
            print(f"  node {v}: {'decodes' if ok else 'FAILS'}")
        if not rep.all_demands_met:
            report.exit_status = EXIT_INPUT
        return
    _warn_flooring(net, code.space.blocklength)
    methods = ("rank", "enumeration") if args.method == "both" else (args.method,)
    results = {}
    for m in methods:
        try:
            results[m] = codes.evaluate_code(net, adv, demand, code, method=m)
        except BudgetError as exc:
            raise _Fail(EXIT_SOLVER, str(exc)) from exc
    rep = results[methods[0]]
    report.results = {m: r.to_dict() for m, r in results.items()}
    if len(results) == 2:
        agree = results["rank"].to_dict() == results["enumeration"].to_dict()
        report.results["oracles_agree"] = agree
        print(f"rank and enumeration oracles {'agree' if agree else 'DISAGREE'}")
    print(f"rate: {_fmt(rep.rate)} bits/use")
    for t, err in rep.decoding_error.items():
        print(f"  sink {t}: decoding error {err}")
    for lab, bits in rep.leakage.items():
        print(f"  tapped {lab}: leakage {_fmt(bits)} bits")
    if not rep.is_secure_and_reliable:
        report.exit_status = EXIT_INPUT


def _load_channel(args, report: RunReport) -> tuple[WiretapChannel, Distribution | None]:
    if not args.channel:
        raise _Fail(EXIT_INPUT, "simulate needs --channel unless --double-exposure is given")
    with open(args.channel, encoding="utf-8") as fh:
        doc = json.load(fh)
    report.add_input(args.channel)
    if "forward" in doc:
        wt = WiretapChannel(doc["forward"], doc["degrading"])
        dist = Distribution(doc["input"]) if "input" in doc else None
        return wt, dist
    net, _ = load_network(args.channel)
    if not args.edge:
        raise _Fail(EXIT_INPUT, "--channel names a network; pick an edge with --edge")
    model = net.edges[net.resolve(args.edge)]
    if isinstance(model, Noiseless):
        raise _Fail(EXIT_INPUT, f"edge {args.edge} is noiseless")
    return model.channel, None


def cmd_simulate(args, report: RunReport) -> None:
    if args.double_exposure is not None:
        cfg = montecarlo.SimConfig(args.trials, args.seed, threads=args.threads)
        frac = montecarlo.double_exposure(args.double_exposure, cfg)
        p = args.double_exposure
        report.results = {"double_exposure": {"erasure_prob": p, "fraction": frac, "analytic": 1 - p * p}}
        print(f"double exposure, erasure {p}: {frac:.5f} of bits seen at least once "
              f"(analytic {1 - p * p:.5f}, {args.trials} trials)")
        if not args.channel:
            return
    wt, dist = _load_channel(args, report)
    cfg = montecarlo.SimConfig(args.trials, args.seed, dist, args.threads)
    counts = montecarlo.simulate_channel(wt, cfg)
    est = {pair: montecarlo.empirical_mi(counts, pair) for pair in ("xy", "xz")}
    sig = {pair: montecarlo.plugin_sigma(counts, pair) for pair in ("xy", "xz")}
    px = dist.probs if dist is not None else np.full(wt.forward.n_inputs, 1 / wt.forward.n_inputs)
    exact = {"xy": mutual_information(px, wt.forward), "xz": mutual_information(px, compose_degraded(wt))}
    report.results.update({
        "counts": counts.counts.tolist(),
        "trials": counts.total,
        "empirical_mi": est,
        "sigma": sig,
        "analytic_mi": exact,
    })
    for pair in ("xy", "xz"):
        print(f"I(X;{pair[1].upper()}): empirical {est[pair]:.5f} +- {sig[pair]:.5f}, analytic {exact[pair]:.5f}")


def cmd_export_dot(args, report: RunReport) -> None:
    net, adv = _load(args.network, report)
    print(export_dot(net, adv))


COMMANDS = {
    "analyze": cmd_analyze,
    "transform": cmd_transform,
    "bound": cmd_bound,
    "verify-code": cmd_verify,
    "simulate": cmd_simulate,
    "export-dot": cmd_export_dot,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    report = RunReport(command=["wiretapnet", *argv], defaults=_defaults(args))
    status = EXIT_OK
    try:
        COMMANDS[args.command](args, report)
        status = report.exit_status
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = exc.status
    except ModelAssumptionError as exc:
        print(f"model assumption violated: {exc}", file=sys.stderr)
        status = EXIT_MODEL
    except (ConvergenceError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_SOLVER
    except (ParseError, StructuralError, PreconditionError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_INPUT
    report.exit_status = status
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, default=str)
    return status


if __name__ == "__main__":
    sys.exit(main())
