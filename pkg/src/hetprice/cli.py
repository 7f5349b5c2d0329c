"""Command-line interface: every analysis writes one JSON report to standard output.

Exit codes: 0 satisfied or constructed, 1 refuted or violated (with a
witness), 2 unknown (search budget exhausted), 3 input or configuration error.
Indices inside reports (observations, consumers, witness nodes) are 0-based;
command-line flags take 1-based consumer and good numbers.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from fractions import Fraction
from typing import Any

from . import aggregators as agg
from . import behavioral, constructions, rum, synth
from .dataset import PanelDataset, dump_panel, fmt, load_cross_section, load_disaggregation, load_panel
from .errors import HetPriceError, PreconditionError, SearchBudgetExceeded
from .revpref import PriceSystem, afriat_construct, check_gapp, check_garp

SCHEMA = 1
EXIT_OK, EXIT_REFUTED, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3


class InputError(HetPriceError):
    """Bad command-line arguments or unreadable input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


class Run:
    """Collects the pieces of one report."""

    def __init__(self, command: str):
        self.command = command
        self.inputs: list[bytes] = []
        self.parameters: dict[str, Any] = {}
        self.verdicts: dict[str, Any] = {}
        self.certificates: dict[str, Any] = {}
        self.bound_log: list = []

    def read(self, path: str) -> bytes:
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc}") from exc
        self.inputs.append(data)
        return data

    def report(self) -> dict:
        digest = hashlib.sha256()
        for data in self.inputs:
            digest.update(hashlib.sha256(data).digest())
        return {
            "schema": SCHEMA,
            "command": self.command,
            "input_digest": digest.hexdigest(),
            "parameters": self.parameters,
            "verdicts": self.verdicts,
            "certificates": self.certificates,
            "bound_log": self.bound_log,
        }


def _require(args, name: str):
    v = getattr(args, name)
    if v is None:
        raise InputError(f"--{name.replace('_', '-')} is required for {args.command}")
    return v


def _panel(run: Run, args) -> PanelDataset:
    return load_panel(run.read(_require(args, "panel")))


def _cross_section(run: Run, args):
    return load_cross_section(run.read(_require(args, "cross_section")))


def _consumers(args, panel: PanelDataset) -> list[int]:
    if args.consumer is None:
        return list(range(panel.N))
    if not 1 <= args.consumer <= panel.N:
        raise InputError(f"--consumer must be in 1..{panel.N}")
    return [args.consumer - 1]


def _scale_set(args, K: int) -> list[int]:
    if args.scale_set is None:
        return list(range(K))
    try:
        R = sorted({int(v) - 1 for v in args.scale_set.split(",") if v.strip()})
    except ValueError as exc:
        raise InputError(f"--scale-set must be a comma list of goods: {exc}") from exc
    if not R or R[0] < 0 or R[-1] >= K:
        raise InputError(f"--scale-set goods must lie in 1..{K}")
    return R


def _homogeneous_aggregator(key: str, N: int) -> agg.AggregatorSpec:
    if key == "harmonic":
        return agg.weighted_harmonic([1] * N)
    return agg.resolve(key)


def _cell_aggregator(key: str, panel: PanelDataset):
    if key == "harmonic":
        specs = {(t, k): agg.weighted_harmonic([panel.e[i][t][k] for i in range(panel.N)])
                 for t in range(panel.T) for k in range(panel.K)}
        return lambda t, k: specs[(t, k)]
    return agg.resolve(key)


def _stream(panel: PanelDataset, i: int) -> list:
    return [(panel.bundle(i, t), panel.pbar[t]) for t in range(panel.T)]


def _prices_json(prices) -> list:
    return [[[fmt(v) for v in row] for row in cons] for cons in prices.p]


def _precondition(run: Run, exc: PreconditionError) -> int:
    run.verdicts["precondition"] = {"satisfied": False, "message": str(exc), "consumer": exc.consumer,
                                    "witness": exc.witness}
    return EXIT_REFUTED


# --- subcommands ------------------------------------------------------------------------


def cmd_garp(run: Run, args) -> int:
    panel = _panel(run, args)
    ok = True
    for i in _consumers(args, panel):
        v = check_garp(_stream(panel, i))
        run.verdicts[f"consumer_{i + 1}"] = v.to_json()
        ok &= v.satisfied
    return EXIT_OK if ok else EXIT_REFUTED


def cmd_gapp(run: Run, args) -> int:
    panel = _panel(run, args)
    idx = _consumers(args, panel)
    if args.phi is None:
        pts = [(panel.bundle(i, t), PriceSystem.linear(panel.pbar[t])) for i in idx for t in range(panel.T)]
    else:
        phi = behavioral.resolve(args.phi)
        lam = [Fraction(v) for v in args.lam.split(",")] if args.lam else [Fraction(1)] * panel.N
        systems = behavioral.make_price_systems(panel, lam, phi)
        pts = [(panel.bundle(i, t), systems[i][t]) for i in idx for t in range(panel.T)]
        run.parameters.update(phi=phi.key, lam=[fmt(v) for v in lam])
    v = check_gapp(pts)
    run.verdicts["gapp"] = v.to_json()
    return EXIT_OK if v.satisfied else EXIT_REFUTED


def cmd_afriat(run: Run, args) -> int:
    panel = _panel(run, args)
    ok = True
    for i in _consumers(args, panel):
        obs = _stream(panel, i)
        v = check_garp(obs)
        run.verdicts[f"consumer_{i + 1}"] = v.to_json()
        if v.satisfied:
            run.certificates[f"consumer_{i + 1}"] = afriat_construct(obs).to_json()
        ok &= v.satisfied
    return EXIT_OK if ok else EXIT_REFUTED


def cmd_prop1(run: Run, args) -> int:
    panel = _panel(run, args)
    W = _cell_aggregator(args.aggregator, panel)
    try:
        prices, params = constructions.prop1_rationalize(panel, W)
    except PreconditionError as exc:
        return _precondition(run, exc)
    audit = constructions.pooled_garp(panel, prices)
    run.verdicts["pooled_garp"] = {"satisfied": audit.satisfied, "witness": audit.witness}
    run.verdicts["consistency_residual"] = fmt(constructions.consistency_residual(panel, prices, W))
    run.certificates["prices"] = _prices_json(prices)
    run.certificates["params"] = params.to_json()
    run.bound_log = [b.to_json() for b in params.bound_log]
    return EXIT_OK if audit.satisfied else EXIT_REFUTED


def cmd_prop2(run: Run, args) -> int:
    e, xbar = load_disaggregation(run.read(_require(args, "disaggregation")))
    try:
        result = constructions.prop2_disaggregate(e, xbar)
    except PreconditionError as exc:
        return _precondition(run, exc)
    audit = constructions.pooled_garp(result.panel, result.prices)
    N, T, K = result.panel.N, result.panel.T, result.panel.K
    exact = all(sum(result.x[i][t][k] for i in range(N)) == xbar[t][k] for t in range(T) for k in range(K))
    run.verdicts["pooled_garp"] = {"satisfied": audit.satisfied, "witness": audit.witness}
    run.verdicts["demands_sum_to_aggregate"] = exact
    run.certificates["pbar"] = [[fmt(v) for v in row] for row in result.panel.pbar]
    run.certificates["demands"] = [[[fmt(v) for v in row] for row in cons] for cons in result.x]
    run.certificates["prices"] = _prices_json(result.prices)
    run.certificates["params"] = result.params.to_json()
    run.bound_log = [b.to_json() for b in result.params.bound_log]
    return EXIT_OK if audit.satisfied and exact else EXIT_REFUTED


def _parse_lam_matrix(text: str, N: int, K: int) -> list[list[Fraction]]:
    rows = [r for r in text.split(";") if r.strip()]
    try:
        lam = [[Fraction(v) for v in r.split(",")] for r in rows]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"--lam: {exc}") from exc
    if len(lam) != N or any(len(r) != K for r in lam):
        raise InputError(f"--lam needs {N} rows of {K} multipliers separated by ';'")
    return lam


def cmd_prop3_check(run: Run, args) -> int:
    panel = _panel(run, args)
    if args.lam:
        lam = _parse_lam_matrix(args.lam, panel.N, panel.K)
    else:
        rng = random.Random(args.seed)
        choices = [Fraction(1, 3), Fraction(1, 2), Fraction(2), Fraction(5)]
        lam = [[rng.choice(choices) for _ in range(panel.K)] for _ in range(panel.N)]
    run.parameters["lam"] = [[fmt(v) for v in r] for r in lam]
    results = constructions.check_stable_invariance(panel, lam)
    for r in results:
        run.verdicts[f"consumer_{r.consumer + 1}"] = {
            "scaled": r.scaled.satisfied, "index": r.index.satisfied,
            "edges_identical": r.edges_identical, "witness": r.index.witness,
        }
    return EXIT_OK


def cmd_prop4(run: Run, args) -> int:
    panel = _panel(run, args)
    R = _scale_set(args, panel.K)
    W = _homogeneous_aggregator(args.aggregator, panel.N)
    try:
        scale, prices, params = constructions.prop4_stable_prices(panel, R, W)
    except PreconditionError as exc:
        return _precondition(run, exc)
    audit = constructions.pooled_garp(panel, prices)
    base = afriat_construct(prices.pooled_observations(panel))
    verified = constructions.scale_transform_verify(panel, scale, base, seed=args.seed)
    run.verdicts["pooled_garp"] = {"satisfied": audit.satisfied, "witness": audit.witness}
    run.verdicts["aggregate_scale"] = fmt(W(scale.lam))
    run.verdicts["cross_edges_low_to_high"] = constructions.cross_edges(audit.graph.weak, panel.N, panel.T)
    run.verdicts["scale_transform_verified"] = verified
    run.certificates["scales"] = scale.to_json()
    run.certificates["prices"] = _prices_json(prices)
    run.certificates["utility"] = base.to_json()
    run.certificates["params"] = params.to_json()
    run.bound_log = [b.to_json() for b in params.bound_log]
    return EXIT_OK if audit.satisfied and verified else EXIT_REFUTED


def cmd_prop6(run: Run, args) -> int:
    panel = _panel(run, args)
    phi = behavioral.resolve(_require(args, "phi"))
    W = _homogeneous_aggregator(args.aggregator, panel.N)
    try:
        scale, systems, params = constructions.prop6_au_lambdas(panel, phi, W)
    except PreconditionError as exc:
        return _precondition(run, exc)
    pts = [(panel.bundle(i, t), systems[i][t]) for i in range(panel.N) for t in range(panel.T)]
    audit = check_gapp(pts)
    run.parameters["phi"] = phi.key
    run.verdicts["pooled_gapp"] = {"satisfied": audit.satisfied, "witness": audit.witness}
    run.verdicts["cross_edges_high_to_low"] = constructions.cross_edges(audit.graph.weak, panel.N, panel.T,
                                                                         upward=False)
    run.verdicts["aggregate_scale"] = fmt(W(scale.lam))
    run.certificates["scales"] = scale.to_json()
    run.certificates["params"] = params.to_json()
    run.bound_log = [b.to_json() for b in params.bound_log]
    return EXIT_OK if audit.satisfied else EXIT_REFUTED


def _rum_exit(run: Run, verdict: rum.RumVerdict) -> int:
    run.verdicts["rum"] = verdict.to_json()
    return EXIT_OK if verdict.rationalizable else EXIT_REFUTED


def cmd_rum(run: Run, args) -> int:
    cs = _cross_section(run, args)
    return _rum_exit(run, rum.rum_check(cs, args.search_budget))


def cmd_rpm(run: Run, args) -> int:
    cs = _cross_section(run, args)
    R = _scale_set(args, cs.K)
    W = _homogeneous_aggregator(args.aggregator, cs.N)
    verdict, cert = rum.rpm_check(cs, R, W, args.search_budget)
    if cert is not None:
        audit = check_garp(cert.prices.pooled_observations(verdict.sorting.apply(cs)))
        run.verdicts["pooled_garp"] = {"satisfied": audit.satisfied, "witness": audit.witness}
        run.certificates["rpm"] = cert.to_json()
        run.bound_log = [b.to_json() for b in cert.params.bound_log]
    return _rum_exit(run, verdict)


def cmd_au_rum(run: Run, args) -> int:
    cs = _cross_section(run, args)
    phi = behavioral.resolve(_require(args, "phi"))
    W = _homogeneous_aggregator(args.aggregator, cs.N)
    run.parameters["phi"] = phi.key
    verdict, cert = rum.au_rum_check(cs, phi, W, args.search_budget)
    if cert is not None:
        run.certificates["au_rpm"] = cert.to_json()
        run.bound_log = [b.to_json() for b in cert.params.bound_log]
    return _rum_exit(run, verdict)


def cmd_patches(run: Run, args) -> int:
    if args.budgets is not None:
        doc = json.loads(run.read(args.budgets))
        try:
            budgets = [(b["pbar"], Fraction(str(b["m"]))) for b in doc]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"budgets file must be a list of {{pbar, m}} objects: {exc}") from exc
        dec = rum.compute_patches(budgets)
    else:
        cs = _cross_section(run, args)
        budgets = list(zip(cs.pbar, cs.m))
        dec = rum.compute_patches(budgets, None if args.geometric else cs)
    run.verdicts["patch_count"] = len(dec.patches)
    run.certificates["patches"] = dec.to_json()
    return EXIT_OK


def cmd_one_good_refute(run: Run, args) -> int:
    panel = _panel(run, args)
    good = args.good - 1
    W = agg.resolve(args.aggregator) if args.aggregator != "harmonic" else agg.weighted_harmonic([1] * panel.N)
    result = rum.check_one_good_refutation(panel, good, W)
    run.verdicts["one_good"] = result.to_json()
    return {True: EXIT_REFUTED, False: EXIT_OK, None: EXIT_UNKNOWN}[result.refuted]


def cmd_synth(run: Run, args) -> int:
    if args.spec is not None:
        spec = synth.spec_from_json(run.read(args.spec).decode())
    else:
        spec = synth.GeneratorSpec(family=args.family, seed=args.seed, N=args.N, T=args.T, K=args.K)
    panel = synth.generate_panel(spec)
    doc = dump_panel(panel)
    run.parameters.update(family=spec.family, seed=spec.seed, N=spec.N, T=spec.T, K=spec.K)
    run.certificates["panel"] = doc
    run.verdicts["consumer_garp"] = [check_garp(_stream(panel, i)).satisfied for i in range(panel.N)]
    return EXIT_OK


COMMANDS = {
    "garp": cmd_garp,
    "gapp": cmd_gapp,
    "afriat": cmd_afriat,
    "prop1": cmd_prop1,
    "prop2": cmd_prop2,
    "prop3-check": cmd_prop3_check,
    "prop4": cmd_prop4,
    "prop6": cmd_prop6,
    "rum": cmd_rum,
    "rpm": cmd_rpm,
    "au-rum": cmd_au_rum,
    "patches": cmd_patches,
    "one-good-refute": cmd_one_good_refute,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hetprice", description="Rationalize consumer data by heterogeneous prices or preferences.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--panel", help="panel JSON document")
    p.add_argument("--cross-section", dest="cross_section", help="cross-section JSON document")
    p.add_argument("--disaggregation", help="expenditures plus aggregate demands (prop2)")
    p.add_argument("--budgets", help="JSON list of {pbar, m} budgets (patches, geometric mode)")
    p.add_argument("--geometric", action="store_true", help="patches: enumerate cells from the budgets alone")
    p.add_argument("--consumer", type=int, help="1-based consumer to analyse (default: all)")
    p.add_argument("--aggregator", default="arithmetic", help="arithmetic | harmonic | module:attr")
    p.add_argument("--phi", help="misperception | reference:<name> | module:attr")
    p.add_argument("--lam", help="multipliers: comma list (gapp) or ';'-separated rows (prop3-check)")
    p.add_argument("--scale-set", dest="scale_set", help="comma list of 1-based goods carrying the scale")
    p.add_argument("--good", type=int, default=1, help="1-based good for one-good-refute")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs single-threaded")
    p.add_argument("--search-budget", dest="search_budget", type=int, default=rum.DEFAULT_BUDGET)
    p.add_argument("--out", help="also write the report (synth: the panel document) to this path")
    p.add_argument("--timing", action="store_true", help="add wall-clock seconds (breaks byte stability)")
    p.add_argument("--spec", help="synth: generator spec JSON file")
    p.add_argument("--family", default=synth.COBB_DOUGLAS, choices=synth.FAMILIES)
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--T", type=int, default=3)
    p.add_argument("--K", type=int, default=2)
    return p


def _emit(obj: dict, out) -> None:
    out.write(json.dumps(obj, indent=2, sort_keys=True))
    out.write("\n")


def main(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    start = time.perf_counter()
    command = "unknown"
    run = Run(command)
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        run = Run(command)
        run.parameters.update(aggregator=args.aggregator, seed=args.seed, search_budget=args.search_budget)
        code = COMMANDS[command](run, args)
    except SearchBudgetExceeded as exc:
        run.verdicts["unknown"] = {"message": str(exc), "nodes": exc.nodes}
        code = EXIT_UNKNOWN
    except (HetPriceError, TypeError, ValueError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        _emit({"schema": SCHEMA, "command": command,
               "error": {"type": type(exc).__name__, "message": str(exc)}}, stdout)
        return EXIT_INPUT
    report = run.report()
    report["exit_code"] = code
    if args.timing:
        report["wall_clock_seconds"] = round(time.perf_counter() - start, 6)
    _emit(report, stdout)
    if args.out:
        with open(args.out, "w") as fh:
            if command == "synth":
                _emit(run.certificates["panel"], fh)
            else:
                _emit(report, fh)
    return code


if __name__ == "__main__":
    sys.exit(main())
