"""Compiled core vs pure-Python core on the same op streams.

    python benchmarks/bench_kernels.py --keys 100000 --ops 300000

Both backends must report identical node-visit and rebuild counts; only the
wall-clock time differs.
"""
import argparse
import time

from gsat import GSATree, available_backends, get_policy
from gsat.range_ext import RangeGSATree
from gsat.workloads import WorkloadSpec, generate, parse_distribution


def point_run(backend, policy, keys, ops, workload, mix):
    spec = WorkloadSpec(keys, mix=mix, op_count=ops, seed=7, **parse_distribution(workload))
    s = generate(spec)
    t = GSATree(get_policy(policy), backend=backend)
    t.bulk_load(range(keys))
    get, insert, delete = t.get, t.insert, t.delete
    start = time.perf_counter()
    for o, k in zip(s.ops.tolist(), s.keys.tolist()):
        if o == 0:
            get(k)
        elif o == 1:
            insert(k, k)
        else:
            delete(k)
    return time.perf_counter() - start, t.stats()


def build_run(backend, policy, keys):
    t = GSATree(get_policy(policy), backend=backend)
    start = time.perf_counter()
    t.bulk_load(range(keys), ac=[1 + (k % 7) for k in range(keys)])
    return time.perf_counter() - start


def range_run(backend, policy, keys, ops):
    t = RangeGSATree(get_policy(policy), "sum-add", backend=backend)
    t.bulk_load(range(keys), [1] * keys)
    span = max(keys // 100, 1)
    start = time.perf_counter()
    for i in range(ops):
        a = (i * 7919) % keys
        t.range_calculate(a, a + span)
        t.get((i * 104729) % keys)
    return time.perf_counter() - start, t.stats()["visited"]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--keys", type=int, default=100_000)
    p.add_argument("--ops", type=int, default=300_000)
    p.add_argument("--policy", nargs="+", default=["sait", "sabt", "salt", "sa2t"])
    args = p.parse_args()
    backends = available_backends()
    if "compiled" not in backends:
        print("compiled core not built; only the pure-Python backend is available")
    print(f"{'kernel':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for pol in args.policy:
        for workload, mix in (("uniform", "read_only"), ("xy:99/1", "mixed")):
            times, stats = [], []
            for b in backends:
                dt, st = point_run(b, pol, args.keys, args.ops, workload, mix)
                times.append(dt)
                stats.append(st)
            assert all(s == stats[0] for s in stats), f"backends disagree: {stats}"
            label = f"{pol} {workload} {mix}"
            print(f"{label:<28}" + "".join(f"{t:11.2f}s" for t in times)
                  + (f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""))
        times = [build_run(b, pol, args.keys) for b in backends]
        print(f"{pol + ' bulk build':<28}" + "".join(f"{t:11.2f}s" for t in times)
              + (f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""))
        res = [range_run(b, pol, args.keys, args.ops // 10) for b in backends]
        assert all(r[1] == res[0][1] for r in res)
        print(f"{pol + ' range sum':<28}" + "".join(f"{r[0]:11.2f}s" for r in res)
              + (f"{res[0][0] / res[-1][0]:9.1f}x" if len(res) > 1 else ""))


if __name__ == "__main__":
    main()
