"""Compiled kernels vs the numpy fallback.

Times BP decoding of ensemble codes and zigzag-cycle enumeration with both
backends on identical inputs and checks the outputs agree.

    python benchmarks/bench_backends.py --N 315 --m 4 --trials 20
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from nbldpc import _pykernels
from nbldpc.channel import BiAWGN, initial_message, sample_llr_block
from nbldpc.decoder import DecoderConfig, decode
from nbldpc.graph import DegreeDistPair, EnsembleSpec, _contracted, sample_graph

try:
    from nbldpc import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_decode(args, backends):
    rng = np.random.default_rng(args.seed)
    spec = EnsembleSpec(args.N, args.m, DegreeDistPair.parse("x", "x^2"))
    cases = []
    for _ in range(args.trials):
        g = sample_graph(spec, rng)
        C = initial_message(sample_llr_block(BiAWGN(args.sigma2), g.N, args.m, rng), g.field)
        cases.append((g, C))
    cfg = DecoderConfig(max_iter=args.max_iter)
    res = {}
    for name, k in backends.items():
        dt, outs = _time(lambda: [decode(g, C, cfg, kernels=k) for g, C in cases], args.repeat)
        res[name] = (dt, [o.eventually_correct for o in outs], sum(o.iterations_run for o in outs))
    return res


def bench_cycles(args, backends):
    rng = np.random.default_rng(args.seed)
    g = sample_graph(EnsembleSpec(args.cycle_N, args.m, DegreeDistPair.parse("x", "x^2")), rng)
    ptr, nbr, var, _ = _contracted(g)
    res = {}
    for name, k in backends.items():
        dt, out = _time(lambda: k.count_cycles(ptr, nbr, var, g.M, args.cycle_len), args.repeat)
        res[name] = (dt, np.asarray(out))
    return res


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=315)
    ap.add_argument("--m", type=int, default=4)
    ap.add_argument("--sigma2", type=float, default=0.8)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--max-iter", dest="max_iter", type=int, default=100)
    ap.add_argument("--cycle-N", dest="cycle_N", type=int, default=3000)
    ap.add_argument("--cycle-len", dest="cycle_len", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = {"python": _pykernels}
    if compiled is not None:
        backends["cython"] = compiled
    else:
        print("compiled extension not available; timing the fallback only")

    dec = bench_decode(args, backends)
    iters = dec["python"][2]
    print(f"decode  N={args.N} m={args.m} trials={args.trials} ({iters} iterations total)")
    for name, (dt, _, _) in dec.items():
        print(f"  {name:7s} {dt:9.4f} s   {1e3 * dt / max(iters, 1):8.3f} ms/iteration")
    cyc = bench_cycles(args, backends)
    print(f"cycles  N={args.cycle_N} weight<={args.cycle_len}")
    for name, (dt, counts) in cyc.items():
        print(f"  {name:7s} {dt:9.4f} s   total {int(counts.sum())}")

    if "cython" in backends:
        same = all(np.array_equal(a, b) for a, b in zip(dec["python"][1], dec["cython"][1]))
        same &= np.array_equal(cyc["python"][1], cyc["cython"][1])
        print(f"speedup decode x{dec['python'][0] / dec['cython'][0]:.1f}, "
              f"cycles x{cyc['python'][0] / cyc['cython'][0]:.1f}; outputs identical: {same}")


if __name__ == "__main__":
    main()
