"""``gsat bench``: run a benchmark matrix from flags or a JSON config file."""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .bench import TREE_NAMES, BenchConfig, emit_report, run_matrix, verify_trends
from .errors import ConfigurationError, ContractViolation, ResourceError

# JSON config key -> BenchConfig field (flags and config keys share names)
_FIELDS = ("tree", "workload", "keys", "ops", "duration", "reps", "seed", "mix",
           "lazy_delete", "baseline", "out", "format", "warmup", "backend", "rules")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gsat", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    b = sub.add_parser("bench", help="run a (tree x workload) benchmark matrix")
    b.add_argument("--tree", nargs="+", action="extend", metavar="NAME",
                   help=f"trees to run ({', '.join(TREE_NAMES)})")
    b.add_argument("--workload", nargs="+", action="extend", metavar="SPEC",
                   help="uniform | xy:X/Y | zipf:S")
    b.add_argument("--keys", type=int, help="universe size (default 100000)")
    b.add_argument("--ops", type=int, help="measured operations per cell (default 1000000)")
    b.add_argument("--duration", type=float, help="measure for SECONDS of wall clock instead")
    b.add_argument("--reps", type=int, help="repetitions per cell (default 5)")
    b.add_argument("--seed", type=int)
    b.add_argument("--mix", choices=("read-only", "mixed"))
    b.add_argument("--lazy-delete", action="store_const", const=True, default=None)
    b.add_argument("--baseline", help="tree whose throughput is 1.0 (default splay)")
    b.add_argument("--warmup", type=int, help="warmup operations (default 10 * keys)")
    b.add_argument("--out", help="write the report here as well as stdout")
    b.add_argument("--format", choices=("csv", "markdown"))
    b.add_argument("--backend", choices=("python", "compiled"))
    b.add_argument("--rules", help="file of trend rules, one per line, checked after the run")
    b.add_argument("--config", help="JSON document with any of the flags above")
    b.add_argument("-q", "--quiet", action="store_true", help="no per-cell progress on stderr")
    return p


def _as_list(v):
    return [v] if isinstance(v, str) else list(v)


def resolve(args: argparse.Namespace) -> tuple[BenchConfig, Optional[str]]:
    """Merge config-file values with flags (flags win)."""
    merged = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        for k, v in doc.items():
            key = k.replace("-", "_")
            key = {"trees": "tree", "workloads": "workload"}.get(key, key)
            if key not in _FIELDS:
                raise ConfigurationError(f"unknown config key {k!r}")
            merged[key] = v
    for k in _FIELDS:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    rules = merged.pop("rules", None)
    if "tree" not in merged or "workload" not in merged:
        raise ConfigurationError("--tree and --workload are required (flag or config)")
    kw = {"trees": _as_list(merged.pop("tree")), "workloads": _as_list(merged.pop("workload"))}
    kw.update(merged)
    return BenchConfig(**kw), rules


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, rules_path = resolve(args)

        def progress(r):
            if not args.quiet:
                print(f"{r.tree:>20} {r.workload:>8} {r.mix:>14}  {r.ops_per_sec:12,.0f} ops/s"
                      f"  {r.nodes_per_op:8.3f} nodes/op", file=sys.stderr)

        results = run_matrix(cfg, progress)
        sys.stdout.write(emit_report(results, cfg.format, cfg.out))
        if rules_path:
            with open(rules_path, encoding="utf-8") as fh:
                rules = [ln for ln in fh.read().splitlines() if ln.strip() and not ln.startswith("#")]
            outcomes = verify_trends(results, rules)
            for o in outcomes:
                print(f"{'PASS' if o.passed else 'FAIL'}  {o.rule}  ({o.lhs:.4g} vs {o.rhs:.4g})")
            if not all(o.passed for o in outcomes):
                return 1
    except (ConfigurationError, ContractViolation) as e:
        print(f"gsat: error: {e}", file=sys.stderr)
        return 2
    except ResourceError as e:
        print(f"gsat: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
