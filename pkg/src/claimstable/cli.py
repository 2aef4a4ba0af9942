"""Command-line front end.

    claimstable solve --input problem.json --algorithm theta-cea --verify
    claimstable verify --input problem.json --partition '[[1,3],[2]]'
    claimstable enumerate --input problem.json
    claimstable axioms --input problem.json --rule cea --samples 200 --seed 7
    claimstable sweep --input problem.json --alpha-from 1/10 --alpha-to 9/10 --steps 8

Exit status: 0 on success or stability, 1 when instability (or an axiom
violation) is detected, 2 on bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import algorithms as alg
from . import singlepeaked as sp
from .errors import ClaimsError, ContractViolation, PreconditionError, RegimeError, SizeGuardError
from .problems import ThetaProblem, from_mask, to_mask
from .rules import as_rational, check_consistency, check_resource_monotonicity, get_rule
from .stability import (
    canonical_partition,
    enumerate_stable_partitions,
    find_blocking,
    partition_masks,
    validate_partition,
)

EXIT_OK, EXIT_UNSTABLE, EXIT_INPUT = 0, 1, 2

CLAIMS_ALGORITHMS = ("theta-cea", "theta-cel", "cea", "top-coalition")
SUPPLY_ALGORITHMS = ("uniform", "equal-surplus", "monotonic-supply")
SWEEP_COLUMNS = ("alpha", "alpha_float", "partition", "cases", "assortativity",
                 "all_positive", "all_negative", "beta1", "delta1", "gamma1")


class InputError(Exception):
    pass


@dataclass
class Loaded:
    """A parsed problem file.

    ``kind`` is "claims" (excess demand), "supply" (claims with alpha > 1 and
    monotonic preferences), "peaks" (single-peaked, distance preferences) or
    "table" (explicit endowment table).
    """

    problem: object
    kind: str
    rule: str | None
    echo: dict


def _num(x, what: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str, Fraction, float)):
        raise InputError(f"{what}: expected a number or a 'p/q' string, got {x!r}")
    try:
        return as_rational(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{what}: cannot parse {x!r} as a rational") from exc


def _s(x: Fraction) -> str:
    return str(x)


def parse_problem(data) -> Loaded:
    if not isinstance(data, dict):
        raise InputError("the problem file must hold a JSON object")
    if ("claims" in data) == ("peaks" in data):
        raise InputError("give exactly one of 'claims' and 'peaks'")
    key = "claims" if "claims" in data else "peaks"
    raw = data[key]
    if not isinstance(raw, list) or not raw:
        raise InputError(f"'{key}' must be a nonempty array")
    values = [_num(x, f"{key}[{k}]") for k, x in enumerate(raw)]
    given = [k for k in ("endowment", "alpha", "endowments") if k in data]
    if len(given) != 1:
        raise InputError("give exactly one of 'endowment', 'alpha' and 'endowments'")
    theta = data.get("theta", 1)
    if isinstance(theta, bool) or not isinstance(theta, int) or theta < 1:
        raise InputError(f"'theta' must be an integer >= 1, got {theta!r}")
    rule = data.get("rule")
    if rule is not None and rule not in ("proportional", "cea", "cel", "uniform", "cel-es"):
        raise InputError(f"unknown rule {rule!r}")
    echo = {key: [_s(v) for v in values], "theta": theta}
    if rule:
        echo["rule"] = rule

    if given[0] == "endowments":
        table = {}
        for k, row in enumerate(data["endowments"]):
            if not isinstance(row, dict) or "coalition" not in row or "value" not in row:
                raise InputError(f"endowments[{k}] needs 'coalition' and 'value'")
            members = row["coalition"]
            if not isinstance(members, list) or not members or not all(isinstance(i, int) for i in members):
                raise InputError(f"endowments[{k}].coalition must be a list of agent ids")
            if min(members) < 1 or max(members) > len(values):
                raise InputError(f"endowments[{k}].coalition has ids outside 1..{len(values)}")
            table[to_mask(members)] = _num(row["value"], f"endowments[{k}].value")
        preference = "distance" if key == "peaks" else "monotonic"
        problem = sp.SinglePeakedProblem(tuple(values), endowments=table, preference=preference)
        echo["endowments"] = [
            {"coalition": list(from_mask(m)), "value": _s(v)} for m, v in sorted(problem.endowments.items())
        ]
        return Loaded(problem, "table", rule, echo)

    total = sum(values, Fraction(0))
    if given[0] == "alpha":
        alpha = _num(data["alpha"], "alpha")
        endowment = alpha * total
    else:
        endowment = _num(data["endowment"], "endowment")
        if total == 0:
            raise InputError("alpha is undefined when all peaks are zero")
        alpha = endowment / total
    echo["endowment"], echo["alpha"] = _s(endowment), _s(alpha)
    if key == "peaks":
        return Loaded(sp.SinglePeakedProblem.proportional(values, alpha=alpha, theta=theta), "peaks", rule, echo)
    if alpha > 1:
        return Loaded(sp.monotonic_supply_problem(values, alpha=alpha, theta=theta), "supply", rule, echo)
    return Loaded(ThetaProblem(tuple(values), endowment, theta), "claims", rule, echo)


def load_problem(path: str) -> Loaded:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    return parse_problem(data)


def _regime(loaded: Loaded) -> str:
    p = loaded.problem
    if loaded.kind == "table":
        return "an explicit endowment table"
    label = "excess demand" if p.alpha <= 1 else "excess supply"
    return f"alpha = {p.alpha} ({label})"


def _default_rule(loaded: Loaded, algorithm: str | None = None) -> str:
    fixed = {"theta-cea": "cea", "cea": "cea", "theta-cel": "cel",
             "uniform": "uniform", "equal-surplus": "cel-es"}
    # a table problem runs no algorithm, so its own rule wins
    if algorithm in fixed and loaded.kind != "table":
        return fixed[algorithm]
    if loaded.rule:
        return loaded.rule
    return "cea" if loaded.kind == "claims" else "uniform"


def _run_algorithm(loaded: Loaded, algorithm: str, rule: str):
    p = loaded.problem
    if algorithm in CLAIMS_ALGORITHMS:
        if loaded.kind != "claims":
            raise RegimeError(f"{algorithm} needs an excess-demand claims problem; got {_regime(loaded)}")
        if algorithm == "cea":
            return alg.cea_algorithm(p)
        if algorithm == "theta-cea":
            return alg.theta_cea_algorithm(p)
        if algorithm == "theta-cel":
            return alg.theta_cel_algorithm(p)
        return alg.top_coalition_constructor(p, rule)
    if algorithm == "monotonic-supply":
        if loaded.kind != "supply":
            raise RegimeError(f"monotonic-supply needs claims with alpha > 1; got {_regime(loaded)}")
        return sp.monotonic_supply_algorithm(p.peaks, alpha=p.alpha, theta=p.theta)
    if loaded.kind != "peaks":
        raise RegimeError(f"{algorithm} needs a proportional single-peaked problem; got {_regime(loaded)}")
    if algorithm == "uniform":
        return sp.uniform_algorithm(p)
    return sp.equal_surplus_algorithm(p)


def _partition_json(partition) -> list[list[int]]:
    return [list(b) for b in canonical_partition(partition)]


def _payoffs_json(p, rule, partition) -> dict[str, str]:
    pay = {}
    for m in partition_masks(partition):
        pay.update(p.payoffs(rule, m))
    return {str(i): _s(pay[i]) for i in sorted(pay)}


def solve_report(loaded: Loaded, algorithm: str, rule: str | None = None, verify: bool = False,
                 exhaustive: bool = False, max_n: int | None = None) -> dict:
    p = loaded.problem
    rule_name = rule or _default_rule(loaded, algorithm)
    rule_obj = get_rule(rule_name)
    report = {"problem": loaded.echo, "algorithm": algorithm, "rule": rule_name}
    if loaded.kind == "table":
        if not exhaustive:
            raise PreconditionError("no algorithm applies to an explicit endowment table; pass --exhaustive")
        report.update(partition=None, payoffs=None, stable=None, blocking=None, trace=[], assortativity=[])
    else:
        partition, trace = _run_algorithm(loaded, algorithm, rule_name)
        canon = canonical_partition(partition)
        report["partition"] = _partition_json(canon)
        report["payoffs"] = _payoffs_json(p, rule_obj, canon)
        report["stable"] = None
        report["blocking"] = None
        if verify:
            blocker = find_blocking(p, rule_obj, canon, max_n=max_n)
            report["stable"] = blocker is None
            report["blocking"] = list(blocker) if blocker else None
        report["trace"] = trace.to_list()
        report["assortativity"] = alg.classify_assortativity(p, canon, trace)
    if exhaustive:
        found = enumerate_stable_partitions(p, rule_obj, max_n=max_n)
        report["stable_partitions"] = [_partition_json(s) for s in found]
    return report


def solve_exit(report: dict) -> int:
    if report.get("stable") is False:
        return EXIT_UNSTABLE
    if "stable_partitions" in report and not report["stable_partitions"]:
        return EXIT_UNSTABLE
    return EXIT_OK


def parse_partition(text: str, n: int):
    source = text
    if not text.lstrip().startswith("["):
        try:
            source = Path(text).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read partition file {text}: {exc}") from exc
    try:
        blocks = json.loads(source)
    except json.JSONDecodeError as exc:
        raise InputError(f"partition is not valid JSON: {exc}") from exc
    if not isinstance(blocks, list) or not all(isinstance(b, list) for b in blocks):
        raise InputError("a partition is a list of lists of agent ids")
    if not all(isinstance(i, int) and not isinstance(i, bool) for b in blocks for i in b):
        raise InputError("agent ids must be integers")
    return validate_partition(blocks, n)


def verify_report(loaded: Loaded, partition, rule: str | None = None, max_n: int | None = None) -> dict:
    p = loaded.problem
    rule_name = rule or _default_rule(loaded)
    rule_obj = get_rule(rule_name)
    blocker = find_blocking(p, rule_obj, partition, max_n=max_n)
    return {
        "problem": loaded.echo,
        "rule": rule_name,
        "partition": _partition_json(partition),
        "payoffs": _payoffs_json(p, rule_obj, partition),
        "stable": blocker is None,
        "blocking": list(blocker) if blocker else None,
    }


def enumerate_report(loaded: Loaded, rule: str | None = None, max_n: int | None = None) -> dict:
    rule_name = rule or _default_rule(loaded)
    found = enumerate_stable_partitions(loaded.problem, get_rule(rule_name), max_n=max_n)
    return {"problem": loaded.echo, "rule": rule_name, "stable_partitions": [_partition_json(s) for s in found]}


def _audit_sample(args) -> dict:
    rule_name, claims, seed, index = args
    # one independent stream per sample keeps results independent of scheduling
    rng = random.Random(f"{seed}:{index}")
    c = tuple(x * Fraction(rng.randint(50, 150), 100) for x in claims)
    total = sum(c, Fraction(0))
    grid = 1000
    k1 = rng.randint(1, grid - 1)
    k2 = rng.randint(k1 + 1, grid)
    E, E2 = total * k1 / grid, total * k2 / grid
    rule = get_rule(rule_name)
    out = {"claims": [_s(x) for x in c], "endowment": _s(E), "larger_endowment": _s(E2)}
    rm = check_resource_monotonicity(rule, c, E, E2)
    srm = check_resource_monotonicity(rule, c, E, E2, strict=True)
    out["rm"] = None if rm else rm.witness
    out["strict_rm"] = None if srm else srm.witness
    if len(c) > 1:
        subset = sorted(rng.sample(range(1, len(c) + 1), rng.randint(1, len(c) - 1)))
        cons = check_consistency(rule, c, E, subset)
        out["subset"] = subset
        out["consistency"] = None if cons else _witness(cons.witness)
    else:
        out["subset"] = None
        out["consistency"] = None
    return out


def _witness(w):
    if isinstance(w, tuple):
        return list(w)
    return w


def _pool_map(fn, items, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order, so output does not depend on scheduling
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def axioms_report(loaded: Loaded, rule: str | None, samples: int, seed: int, workers: int = 1) -> dict:
    rule_name = rule or _default_rule(loaded)
    if get_rule(rule_name).validate is False:
        raise InputError(f"the axiom audit covers claims rules, not {rule_name}")
    claims = loaded.problem.claims
    rows = _pool_map(_audit_sample, [(rule_name, claims, seed, k) for k in range(samples)], workers)
    summary = {}
    for axiom in ("rm", "strict_rm", "consistency"):
        bad = [(k, r) for k, r in enumerate(rows) if r[axiom] is not None]
        first = None
        if bad:
            k, r = bad[0]
            first = {"sample": k, "claims": r["claims"], "endowment": r["endowment"],
                     "larger_endowment": r["larger_endowment"], "subset": r["subset"], "witness": r[axiom]}
        summary[axiom] = {"holds": not bad, "violations": len(bad), "first_witness": first}
    return {"problem": loaded.echo, "rule": rule_name, "samples": samples, "seed": seed, "axioms": summary}


def axioms_exit(report: dict) -> int:
    ok = report["axioms"]["rm"]["holds"] and report["axioms"]["consistency"]["holds"]
    return EXIT_OK if ok else EXIT_UNSTABLE


def alpha_grid(start: Fraction, stop: Fraction, steps: int) -> list[Fraction]:
    if steps < 1:
        raise InputError("--steps must be at least 1")
    return [start + (stop - start) * k / steps for k in range(steps + 1)]


def _sweep_row(args) -> dict:
    claims, alpha, theta = args
    p = ThetaProblem.from_alpha(claims, alpha, theta)
    partition, trace = alg.cea_algorithm(p) if theta == 2 else alg.theta_cea_algorithm(p)
    canon = canonical_partition(partition)
    labels = alg.classify_assortativity(p, canon, trace)
    flags = alg.regime_flags(p, canon, trace)
    th = alg.thresholds(p)
    return {
        "alpha": _s(alpha),
        "alpha_float": repr(float(alpha)),
        "partition": json.dumps(_partition_json(canon)),
        "cases": "".join(f"({c})" for c in trace.cases()),
        "assortativity": "|".join(labels),
        "all_positive": str(flags["all_positive"]).lower(),
        "all_negative": str(flags["all_negative"]).lower(),
        "beta1": _s(th.beta),
        "delta1": _s(th.delta),
        "gamma1": _s(th.gamma),
    }


def sweep_rows(loaded: Loaded, start, stop, steps: int, workers: int = 1) -> list[dict]:
    if loaded.kind != "claims":
        raise InputError(f"sweeps run on claims problems; got {_regime(loaded)}")
    p = loaded.problem
    grid = alpha_grid(as_rational(start), as_rational(stop), steps)
    for a in grid:
        if not 0 < a <= 1:
            raise RegimeError(f"sweep grid point alpha = {a} is outside (0, 1], the excess-demand regime")
    return _pool_map(_sweep_row, [(p.claims, a, p.theta) for a in grid], workers)


def write_csv(rows: list[dict], stream) -> None:
    writer = csv.DictWriter(stream, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def _dump(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def _max_n(args, loaded: Loaded) -> int | None:
    return loaded.problem.n if getattr(args, "force", False) else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="claimstable", description="Stable coalitions under rationing rules.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, rule=True):
        p.add_argument("--input", required=True, help="problem JSON file, or - for stdin")
        if rule:
            p.add_argument("--rule", choices=("proportional", "cea", "cel", "uniform", "cel-es"))

    s = sub.add_parser("solve", help="run a partition algorithm")
    common(s)
    s.add_argument("--algorithm", required=True, choices=CLAIMS_ALGORITHMS + SUPPLY_ALGORITHMS)
    s.add_argument("--verify", action="store_true", help="scan for a blocking coalition")
    s.add_argument("--exhaustive", action="store_true", help="also list every stable partition")
    s.add_argument("--force", action="store_true", help="lift the enumeration size guard")

    v = sub.add_parser("verify", help="check one partition for stability")
    common(v)
    v.add_argument("--partition", required=True, help="JSON list of blocks, inline or a file path")
    v.add_argument("--force", action="store_true")

    e = sub.add_parser("enumerate", help="list all stable partitions")
    common(e)
    e.add_argument("--force", action="store_true")

    a = sub.add_parser("axioms", help="sampled RM / strict RM / consistency audit")
    common(a)
    a.add_argument("--samples", type=int, default=100)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--workers", type=int, default=1)

    w = sub.add_parser("sweep", help="CEA partitions over a grid of alpha values")
    common(w, rule=False)
    w.add_argument("--alpha-from", required=True)
    w.add_argument("--alpha-to", required=True)
    w.add_argument("--steps", type=int, required=True)
    w.add_argument("--out", help="CSV path (default stdout)")
    w.add_argument("--workers", type=int, default=1)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        loaded = load_problem(args.input)
        if args.command == "solve":
            report = solve_report(loaded, args.algorithm, args.rule, args.verify, args.exhaustive,
                                  _max_n(args, loaded))
            stdout.write(_dump(report))
            return solve_exit(report)
        if args.command == "verify":
            partition = parse_partition(args.partition, loaded.problem.n)
            report = verify_report(loaded, partition, args.rule, _max_n(args, loaded))
            stdout.write(_dump(report))
            if report["blocking"]:
                stderr.write(f"blocked by {report['blocking']}\n")
            return EXIT_OK if report["stable"] else EXIT_UNSTABLE
        if args.command == "enumerate":
            report = enumerate_report(loaded, args.rule, _max_n(args, loaded))
            stdout.write(_dump(report))
            return EXIT_OK if report["stable_partitions"] else EXIT_UNSTABLE
        if args.command == "axioms":
            if args.samples < 1:
                raise InputError("--samples must be at least 1")
            report = axioms_report(loaded, args.rule, args.samples, args.seed, args.workers)
            stdout.write(_dump(report))
            return axioms_exit(report)
        rows = sweep_rows(loaded, _num(args.alpha_from, "--alpha-from"), _num(args.alpha_to, "--alpha-to"),
                          args.steps, args.workers)
        if args.out:
            with open(args.out, "w", newline="", encoding="utf-8") as fh:
                write_csv(rows, fh)
        else:
            buf = io.StringIO()
            write_csv(rows, buf)
            stdout.write(buf.getvalue())
        return EXIT_OK
    except (InputError, ClaimsError, RegimeError, SizeGuardError, PreconditionError) as exc:
        stderr.write(f"claimstable: error: {exc}\n")
        return EXIT_INPUT
    except ContractViolation as exc:
        stderr.write(f"claimstable: contract violation: {exc}\n")
        return EXIT_UNSTABLE


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
