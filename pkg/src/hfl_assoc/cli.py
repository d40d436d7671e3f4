"""Command-line harness: ``hfl-assoc solve | sweep | gen``.

Exit codes: 0 success, 2 usage error (bad arguments, unknown algorithm,
unsupported edge count), 3 instance too large for exhaustive search.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import baselines
from .core import (
    InstanceTooLargeError,
    Scenario,
    SolveReport,
    UnsupportedDimensionError,
    round_latency_dba,
)
from .dba import DEFAULT_BUDGET, solve_allocation
from .refine import PipelineConfig, tsdp_assisted
from .scenario import (
    Ranges,
    fedch_layout,
    fmt17,
    geometric_topology,
    heterogeneous_topology,
    load_scenario,
    random_instance,
    save_scenario,
    two_edge_topology,
)
from .tsdp import tsdp_solve

EXIT_USAGE = 2
EXIT_GUARD = 3

SIMPLE = {
    "max-snr": baselines.max_snr_assign,
    "bag": baselines.bag_assign,
    "exhaustive": baselines.exhaustive_solve,
    "fedch": baselines.fedch_assign,
    "tsdp": tsdp_solve,
}
# named pipeline variants, e.g. tsdp-bag-dba-cpr
VARIANT = re.compile(r"^tsdp-(maxsnr|bag|fedch)(-dba)?(-cpr)?$")
TOPOLOGIES = ("two-edge", "heterogeneous", "geometric", "random")


class UsageError(Exception):
    pass


def check_algorithm(name: str) -> None:
    if name in SIMPLE or name == "tsdp-assisted":
        return
    m = VARIANT.match(name)
    if m and not (m.group(3) and not m.group(2)):
        return
    raise UsageError(
        f"unknown algorithm {name!r}; known: {', '.join([*SIMPLE, 'tsdp-assisted'])} "
        "or tsdp-{maxsnr,bag,fedch}[-dba[-cpr]]"
    )


def run_algorithm(
    s: Scenario,
    name: str,
    *,
    dba: bool = False,
    baseline: str = "max_snr",
    cpr_rounds: int = 10,
    mlbs_budget: int = DEFAULT_BUDGET,
    swap: bool = False,
) -> SolveReport:
    """Solve ``s`` with a named algorithm.

    ``dba`` re-scores a single-shot policy with optimal per-edge shares; for
    ``tsdp-assisted`` it switches on the bandwidth and CPR phases.
    """
    check_algorithm(name)
    moves = ("migrate", "swap") if swap else ("migrate",)
    if name in SIMPLE:
        rep = SIMPLE[name](s)
        if not dba:
            return rep
        b, _ = solve_allocation(s, rep.assignment, mlbs_budget)
        h = round_latency_dba(s, rep.assignment, b)
        return SolveReport(f"{name}-dba", h, rep.assignment, b, rep.work, "dba", rep.info)
    if name == "tsdp-assisted":
        cfg = PipelineConfig(
            baseline=baseline, cpr_rounds=cpr_rounds, mlbs_budget=mlbs_budget,
            dba=dba, cpr=dba and cpr_rounds > 0, cpr_moves=moves,
        )
    else:
        m = VARIANT.match(name)
        base = {"maxsnr": "max_snr"}.get(m.group(1), m.group(1))
        cfg = PipelineConfig(
            baseline=base, cpr_rounds=cpr_rounds, mlbs_budget=mlbs_budget,
            dba=bool(m.group(2)), cpr=bool(m.group(3)), cpr_moves=moves,
        )
    return tsdp_assisted(s, cfg)


def format_report(s: Scenario, rep: SolveReport) -> str:
    lines = [
        f"algorithm   {rep.algorithm}",
        f"latency     {fmt17(rep.latency)}",
        f"allocation  {rep.mode}",
        f"loads       {' '.join(str(int(x)) for x in rep.assignment.loads())}",
        f"work        {rep.work}",
    ]
    for n, members in enumerate(rep.assignment.sets()):
        lines.append(f"edge {n:<6} {list(members)}")
    return "\n".join(lines) + "\n"


def report_json(rep: SolveReport) -> dict:
    return {
        "algorithm": rep.algorithm,
        "latency": rep.latency,
        "mode": rep.mode,
        "loads": [int(x) for x in rep.assignment.loads()],
        "edge_of": list(rep.assignment.edge_of),
        "work": rep.work,
    }


def build_topology(name: str, *, K=4, d2=10.0, M=20, N=2, seed=None, rho=0.01) -> Scenario:
    if name == "two-edge":
        return two_edge_topology(K, d2)
    if name == "heterogeneous":
        return heterogeneous_topology(K, d2)
    if name == "geometric":
        s = geometric_topology(fedch_layout(M, N, rho, seed))
        return s.with_d2(1, d2)
    if name == "random":
        return random_instance(M, N, 0 if seed is None else seed, Ranges())
    raise UsageError(f"unknown topology {name!r}; known: {', '.join(TOPOLOGIES)}")


@dataclass
class SweepSpec:
    scenario: Scenario
    index: int
    values: list[float]
    algorithms: list[str]
    output: str | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.values:
            raise UsageError("sweep needs at least one value")
        if not self.algorithms:
            raise UsageError("sweep needs at least one algorithm")
        for name in self.algorithms:
            check_algorithm(name)
        if not 0 <= self.index < self.scenario.num_edges:
            raise UsageError(f"d2 index {self.index} outside [0, {self.scenario.num_edges})")


def run_sweep(spec: SweepSpec, timings: bool = True) -> str:
    """CSV text with one row per (value, algorithm), values ascending.

    Wall time is the last column so golden comparisons can drop it.
    """
    N = spec.scenario.num_edges
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["value", "algorithm", "h", *[f"load_{n}" for n in range(N)], "wall_time"])
    for value in sorted(spec.values):
        s = spec.scenario.with_d2(spec.index, value)
        for name in spec.algorithms:
            t0 = time.perf_counter()
            rep = run_algorithm(s, name, **spec.options)
            dt = time.perf_counter() - t0
            loads = [int(x) for x in rep.assignment.loads()]
            w.writerow([fmt17(value), name, fmt17(rep.latency), *loads,
                        f"{dt:.6f}" if timings else ""])
    return buf.getvalue()


def parse_values(text: str) -> list[float]:
    """``"10:200:10"`` (inclusive range) or ``"10,20,50"``."""
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise UsageError(f"bad range {text!r}; expected start:stop:step")
        start, stop, step = parts
        count = int(round((stop - start) / step)) + 1
        return [start + i * step for i in range(count) if start + i * step <= stop + 1e-9 * abs(step)]
    return [float(x) for x in text.split(",") if x.strip()]


def _solver_options(args) -> dict:
    return {
        "dba": args.dba,
        "baseline": args.baseline,
        "cpr_rounds": args.cpr_rounds,
        "mlbs_budget": args.mlbs_budget,
        "swap": args.swap,
    }


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--dba", action="store_true", help="optimal per-edge bandwidth shares")
    p.add_argument("--baseline", default="max_snr", help="phase-1 policy for tsdp-assisted")
    p.add_argument("--cpr-rounds", type=int, default=10)
    p.add_argument("--mlbs-budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--swap", action="store_true", help="also try critical-user swaps")


def _add_topology_flags(p: argparse.ArgumentParser):
    p.add_argument("--topology", choices=TOPOLOGIES)
    p.add_argument("--K", type=int, default=4)
    p.add_argument("--d2", type=float, default=10.0, help="d2 of the second edge")
    p.add_argument("--M", type=int, default=20)
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--rho", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hfl-assoc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("--scenario", help="scenario JSON file")
    _add_topology_flags(p)
    p.add_argument("--algo", required=True)
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    _add_solver_flags(p)

    p = sub.add_parser("sweep", help="sweep one edge's cloud delay")
    p.add_argument("--spec", help="sweep spec JSON file")
    p.add_argument("--scenario", help="scenario JSON file")
    _add_topology_flags(p)
    p.add_argument("--index", type=int, default=1, help="which d2 entry to sweep (0-based)")
    p.add_argument("--values", default="10:200:10")
    p.add_argument("--algos", default="max-snr,bag,tsdp,exhaustive")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--no-timing", action="store_true", help="leave the wall_time column empty")
    _add_solver_flags(p)

    p = sub.add_parser("gen", help="write a scenario file")
    _add_topology_flags(p)
    p.add_argument("--out", required=True)
    return parser


def _scenario_from_args(args) -> Scenario:
    if args.scenario:
        return load_scenario(args.scenario)
    if not args.topology:
        raise UsageError("give --scenario or --topology")
    return build_topology(args.topology, K=args.K, d2=args.d2, M=args.M, N=args.N,
                          seed=args.seed, rho=args.rho)


def _spec_from_file(path: str, args) -> SweepSpec:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if "scenario" in doc:
        s = load_scenario(doc["scenario"])
    else:
        topo = dict(doc["topology"])
        s = build_topology(topo.pop("name"), **topo)
    return SweepSpec(
        scenario=s,
        index=doc.get("index", 1),
        values=[float(v) for v in doc["values"]],
        algorithms=list(doc["algorithms"]),
        output=doc.get("output"),
        options={**_solver_options(args), **doc.get("options", {})},
    )


def _cmd_solve(args) -> int:
    s = _scenario_from_args(args)
    rep = run_algorithm(s, args.algo, **_solver_options(args))
    if args.json:
        print(json.dumps(report_json(rep)))
    else:
        sys.stdout.write(format_report(s, rep))
    return 0


def _cmd_sweep(args) -> int:
    if args.spec:
        spec = _spec_from_file(args.spec, args)
    else:
        spec = SweepSpec(
            scenario=_scenario_from_args(args),
            index=args.index,
            values=parse_values(args.values),
            algorithms=[a.strip() for a in args.algos.split(",") if a.strip()],
            output=args.out,
            options=_solver_options(args),
        )
    text = run_sweep(spec, timings=not args.no_timing)
    out = args.out or spec.output
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_gen(args) -> int:
    if not args.topology:
        raise UsageError("gen needs --topology")
    s = build_topology(args.topology, K=args.K, d2=args.d2, M=args.M, N=args.N,
                       seed=args.seed, rho=args.rho)
    save_scenario(s, args.out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"solve": _cmd_solve, "sweep": _cmd_sweep, "gen": _cmd_gen}[args.command]
    try:
        return handler(args)
    except InstanceTooLargeError as exc:
        print(f"hfl-assoc: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, UnsupportedDimensionError, ValueError, OSError, KeyError) as exc:
        print(f"hfl-assoc: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
