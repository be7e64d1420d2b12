"""Command-line entry point: ``nbldpc {field,design,bound,zigzag,ensemble}``.

Every experiment writes ``PREFIX.csv`` and a ``PREFIX.json`` sidecar holding
the full configuration; ``--config PREFIX.json`` reruns it exactly (explicit
flags still override values from the file).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import _backend
from .analysis import awgn_threshold, bsc_threshold, floor_bound
from .channel import BEC, BSC, BiAWGN, ChannelConfigError, sigma2_from_ebno
from .decoder import DecoderConfig
from .gf import H_exponents, compute_H, get_field
from .graph import DegreeDistPair, EnsembleSpec, export_code, expurgate, resolve_H
from .sim import SimConfig, emit_results, run_ensemble, run_zigzag

log = logging.getLogger("nbldpc")


def _floats(text: str) -> list[float]:
    return [float(t) for t in str(text).split(",") if t.strip()]


def _grid(args, rate: float | None):
    """Channel points from ``--eps``, ``--sigma2`` or ``--ebno-db``."""
    kind = args.channel
    if kind in ("bec", "bsc"):
        if args.eps is None:
            raise ChannelConfigError(f"--eps is required for {kind}")
        ctor = BEC if kind == "bec" else BSC
        return [ctor(e) for e in _floats(args.eps)]
    if args.sigma2 is not None and args.ebno_db is not None:
        raise ChannelConfigError("give either --sigma2 or --ebno-db, not both")
    if args.sigma2 is not None:
        return [BiAWGN(s) for s in _floats(args.sigma2)]
    if args.ebno_db is not None:
        r = args.rate if args.rate is not None else rate
        if r is None:
            raise ChannelConfigError("--ebno-db needs --rate for this experiment")
        return [BiAWGN(sigma2_from_ebno(x, r)) for x in _floats(args.ebno_db)]
    raise ChannelConfigError("--sigma2 or --ebno-db is required for awgn")


def _add_channel(p):
    p.add_argument("--channel", choices=["bec", "bsc", "awgn"], default="awgn")
    p.add_argument("--eps", help="erasure/crossover probabilities, comma separated")
    p.add_argument("--sigma2", help="noise variances, comma separated")
    p.add_argument("--ebno-db", dest="ebno_db", help="Eb/N0 points in dB, comma separated")
    p.add_argument("--rate", type=float, help="code rate for the Eb/N0 conversion")


def _add_ensemble(p):
    p.add_argument("--N", type=int, default=315)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--lambda", dest="lam", default="x", help="edge-perspective variable degrees")
    p.add_argument("--rho", default="x^2", help="edge-perspective check degrees")
    p.add_argument("--sg", type=int, default=1)
    p.add_argument("--sc", type=int, default=1)
    p.add_argument("--prim-poly", dest="prim_poly", type=lambda t: int(t, 0), default=0)


def _add_sim(p):
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--min-errors", dest="min_errors", type=int, default=100)
    p.add_argument("--max-symbols", dest="max_symbols", type=int, default=10**7)
    p.add_argument("--batch-trials", dest="batch_trials", type=int, default=0)
    p.add_argument("--no-early-stop", dest="early_stop", action="store_false")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=200)
    p.add_argument("--ec-window", dest="ec_window", type=int, default=8)
    p.add_argument("--out", help="output prefix for PREFIX.csv and PREFIX.json")
    p.add_argument("--points", "--gnuplot", dest="points", help="write two-column plot data here")
    p.add_argument("--allow-low-confidence", dest="allow_low_confidence", action="store_true")
    p.add_argument("--config", help="JSON config or sidecar to rerun")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nbldpc", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field", help="print the set of non-maximal-order elements")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--prim-poly", dest="prim_poly", type=lambda t: int(t, 0), default=0)

    p = sub.add_parser("design", help="sample an expurgated code, print extended alist")
    _add_ensemble(p)
    p.add_argument("--H", default="proposed", help="proposed | cc | none | alpha exponents a,b,c")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="write here instead of stdout")

    p = sub.add_parser("bound", help="per-weight floor-bound terms as CSV")
    _add_ensemble(p)
    _add_channel(p)
    p.add_argument("--smax", type=int, default=None, help="fixed truncation weight")

    p = sub.add_parser("zigzag", help="SER of zigzag cycle codes")
    p.add_argument("--s", type=int, default=3)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--prim-poly", dest="prim_poly", type=lambda t: int(t, 0), default=0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--beta-exp", dest="beta_exp", type=int, help="beta = alpha^k")
    g.add_argument("--gammas", help="step exponents k_1,..,k_s (gamma_i = alpha^k_i)")
    g.add_argument("--beta-sweep", dest="beta_sweep", action="store_true")
    p.add_argument("--engine", choices=["predicate", "bp"], default="predicate")
    _add_channel(p)
    _add_sim(p)

    p = sub.add_parser("ensemble", help="SER of expurgated ensembles by BP")
    _add_ensemble(p)
    p.add_argument("--H", action="append", help="repeatable: proposed | cc | none | exponents")
    p.add_argument("--fixed-code", dest="fixed_code", action="store_true")
    _add_channel(p)
    _add_sim(p)
    ap.subcommands = sub.choices
    return ap


def _parse(argv):
    """Parse, then reparse with defaults from ``--config`` if given."""
    ap = build_parser()
    args = ap.parse_args(argv)
    path = getattr(args, "config", None)
    if path:
        with open(path) as fp:
            doc = json.load(fp)
        cfg = doc.get("config", doc)
        if cfg.get("command", args.command) != args.command:
            raise SystemExit(f"config is for '{cfg['command']}', not '{args.command}'")
        sub = ap.subcommands[args.command]
        known = {a.dest for a in sub._actions}
        sub.set_defaults(**{k: v for k, v in cfg.items() if k in known and k not in ("config", "out", "points")})
        args = ap.parse_args(argv)
    return args


def _spec(args, H=frozenset()) -> EnsembleSpec:
    dd = DegreeDistPair.parse(args.lam, args.rho)
    return EnsembleSpec(args.N, args.m, dd, args.sg, args.sc, H, args.prim_poly)


def _sim_cfg(args, engine) -> SimConfig:
    dec = DecoderConfig(max_iter=args.max_iter, ec_window=args.ec_window)
    return SimConfig(seed=args.seed, min_errors=args.min_errors, max_symbols=args.max_symbols,
                     batch_trials=args.batch_trials, early_stop=args.early_stop,
                     workers=args.workers, engine=engine,
                     fixed_code=getattr(args, "fixed_code", False), decoder=dec)


def _config_dict(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}


def _finish(args, records) -> int:
    cfg = _config_dict(args)
    if args.out:
        emit_results(records, f"{args.out}.csv", cfg, f"{args.out}.json", args.points)
    else:
        emit_results(records, None, cfg, None, args.points, stream=sys.stdout)
    low = [r for r in records if r.low_confidence]
    if low and not args.allow_low_confidence:
        for r in low:
            log.error("low confidence: %s %s=%g (%d errors)", r.curve, r.channel, r.channel_param, r.errors)
        return 2
    return 0


def cmd_field(args) -> int:
    f = get_field(args.m, args.prim_poly)
    H = compute_H(f)
    items = ", ".join(f.format(f.exp(k)) for k in H_exponents(f))
    print(f"m={args.m} prim_poly={f.prim_poly:#x} |H|={len(H)}")
    print("{" + items + "}")
    return 0


def cmd_design(args) -> int:
    f = get_field(args.m, args.prim_poly)
    spec = _spec(args, resolve_H(args.H, f))
    g = expurgate(spec, np.random.default_rng(args.seed))
    text = export_code(g)
    if args.out:
        with open(args.out, "w") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bound(args) -> int:
    spec = _spec(args)
    grid = _grid(args, spec.degrees.design_rate)
    mu_ = spec.mu
    print("channel_param,weight,term")
    for ch in grid:
        fb = floor_bound(spec, ch, args.smax)
        for s, t in fb.terms.items():
            print(f"{ch.param!r},{s},{t!r}")
        if fb.convergent:
            print(f"{ch.param!r},tail,{fb.tail_estimate!r}")
            print(f"{ch.param!r},total,{fb.value!r}")
        else:
            thr = (bsc_threshold(mu_, spec.m) if ch.kind == "bsc"
                   else awgn_threshold(mu_, spec.m) ** 2 if ch.kind == "awgn" else float("nan"))
            log.warning("series diverges at %s (threshold %g)", ch, thr)
            print(f"{ch.param!r},total,")
    return 0


def cmd_zigzag(args) -> int:
    if args.beta_sweep:
        beta = "sweep"
    elif args.gammas is not None:
        beta = [int(k) for k in str(args.gammas).split(",")]
    else:
        beta = args.beta_exp if args.beta_exp is not None else 1
    grid = _grid(args, None)
    recs = run_zigzag(args.s, args.m, beta, grid, _sim_cfg(args, args.engine), args.prim_poly)
    return _finish(args, recs)


def cmd_ensemble(args) -> int:
    f = get_field(args.m, args.prim_poly)
    names = args.H or ["proposed"]
    spec0 = _spec(args)
    grid = _grid(args, spec0.degrees.design_rate)
    cfg = _sim_cfg(args, "bp")
    recs = []
    for i, name in enumerate(names):
        spec = _spec(args, resolve_H(name, f))
        recs += run_ensemble(spec, grid, cfg, curve=f"H={name}", curve_idx=i)
    return _finish(args, recs)


COMMANDS = {"field": cmd_field, "design": cmd_design, "bound": cmd_bound,
            "zigzag": cmd_zigzag, "ensemble": cmd_ensemble}


def main(argv=None) -> int:
    args = _parse(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    log.debug("kernel backend: %s", _backend.BACKEND)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, ChannelConfigError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
