"""Monte Carlo driver: zigzag-cycle sweeps and expurgated-ensemble SER curves.

Reproducibility
---------------
Every batch of trials draws from its own Philox stream keyed by
``(seed, curve, point, batch)``, so counts do not depend on how batches are
spread over worker processes.  Batches are merged strictly in index order and
the early-stopping rule is evaluated after each merged batch, which makes the
parallel and serial runs bit-identical.

Confidence intervals
--------------------
Symbol errors within one trial are correlated (a failing zigzag cycle takes
all its symbols with it), so the Wilson interval is computed on an effective
sample ``n / deff`` where the design effect ``deff`` is the ratio of the
observed per-trial error variance to the binomial one (at least 1).
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__, _backend
from .analysis import ZigzagPredicate, floor_bound, gammas_for_beta, p_zz
from .channel import initial_message, sample_llr_block
from .decoder import DecoderConfig, decode
from .gf import get_field
from .graph import ConstructionError, EnsembleSpec, expurgate, zigzag_code_from_gammas

log = logging.getLogger(__name__)

Z95 = 1.959963984540054


class SimConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    """Budget, stopping rule, seeding and engine choices shared by all runs."""

    seed: int = 1
    min_errors: int = 100
    max_symbols: int = 10**7
    batch_trials: int = 0  # 0 = engine default
    early_stop: bool = True
    rel_halfwidth: float = 0.2
    workers: int = 1
    engine: str = "predicate"
    fixed_code: bool = False
    decoder: DecoderConfig = field(default_factory=DecoderConfig)

    def __post_init__(self):
        if self.max_symbols < 1:
            raise SimConfigError("symbol budget must be >= 1")
        if self.engine not in ("predicate", "bp"):
            raise SimConfigError(f"unknown engine {self.engine!r}")
        if self.workers < 1:
            raise SimConfigError("workers must be >= 1")


@dataclass
class SERRecord:
    channel: str
    channel_param: float
    errors: int
    observed: int
    ser: float
    ci_low: float
    ci_high: float
    bound: float | None
    seed: int
    engine: str
    curve: str = ""
    trials: int = 0
    deff: float = 1.0
    low_confidence: bool = False
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# statistics


def wilson_interval(k: float, n: float, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for ``k`` successes in ``n`` trials."""
    if n <= 0:
        return 0.0, 1.0
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    lo = 0.0 if k <= 0 else max(0.0, center - half)
    hi = 1.0 if k >= n else min(1.0, center + half)
    return lo, hi


def design_effect(errors: int, sumsq: int, trials: int, block: int) -> float:
    """Variance inflation of per-trial error counts over the binomial case."""
    if trials < 2 or errors == 0:
        return 1.0
    mean = errors / trials
    var = sumsq / trials - mean * mean
    p = errors / (trials * block)
    if p >= 1.0:
        return 1.0
    return max(1.0, var / (block * p * (1 - p)))


def estimate_ser(errors: int, observed: int, deff: float = 1.0, z: float = Z95):
    """``(ser, ci_low, ci_high)`` with a design-effect adjusted Wilson CI."""
    if observed <= 0:
        return 0.0, 0.0, 1.0
    ser = errors / observed
    lo, hi = wilson_interval(errors / deff, observed / deff, z)
    return ser, min(lo, ser), max(hi, ser)


def _precise_enough(errors, observed, deff, min_errors, rel_halfwidth) -> bool:
    if errors / deff < min_errors or errors == 0:
        return False
    ser, lo, hi = estimate_ser(errors, observed, deff)
    return (hi - lo) / 2 < rel_halfwidth * ser


# ---------------------------------------------------------------------------
# seeding and batch driving


def batch_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox stream for one batch."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class _Tally:
    trials: int = 0
    errors: int = 0
    sumsq: int = 0

    def add(self, per_trial: np.ndarray):
        per_trial = np.asarray(per_trial, dtype=np.int64)
        self.trials += int(per_trial.size)
        self.errors += int(per_trial.sum())
        self.sumsq += int((per_trial * per_trial).sum())

    def merge(self, other: "_Tally"):
        self.trials += other.trials
        self.errors += other.errors
        self.sumsq += other.sumsq


def _drive(job, keys, n_batches: int, stop, pool):
    """Run ``job(key + (b,))`` for ``b = 0..n_batches-1`` in waves, merging in
    order via ``stop(result) -> bool`` until it asks to stop."""
    width = getattr(pool, "_max_workers", 1) if pool is not None else 1
    b = 0
    while b < n_batches:
        wave = [keys + (i,) for i in range(b, min(b + width, n_batches))]
        results = list(pool.map(job, wave)) if pool is not None else [job(k) for k in wave]
        for r in results:
            b += 1
            if stop(r):
                return b
    return b


def _make_pool(workers: int):
    return ProcessPoolExecutor(max_workers=workers) if workers > 1 else None


# ---------------------------------------------------------------------------
# zigzag experiments


def parse_beta_spec(beta_spec, field, s: int) -> list[tuple[int, ...]]:
    """Steps for each curve.

    ``beta_spec`` may be an alpha exponent ``k`` (``beta = alpha^k``), a
    sequence of ``s`` step exponents, or ``"sweep"`` for every ``beta``.
    """
    if isinstance(beta_spec, str) and beta_spec == "sweep":
        return [tuple(gammas_for_beta(field, field.exp(k), s)) for k in range(field.q - 1)]
    if isinstance(beta_spec, (int, np.integer)):
        return [tuple(gammas_for_beta(field, field.exp(int(beta_spec)), s))]
    exps = [int(k) for k in beta_spec]
    if len(exps) != s:
        raise SimConfigError(f"need {s} step exponents, got {len(exps)}")
    return [tuple(field.exp(k) for k in exps)]


def _beta_label(field, gammas) -> str:
    k = sum(field.log(g) for g in gammas) % (field.q - 1)
    return f"beta=a^{k}"


class _ZigzagBatch:
    """Picklable worker: one batch of paired trials for every curve."""

    def __init__(self, s, m, prim_poly, curves, ch, trials, seed, engine, dec):
        self.s, self.m, self.prim_poly = s, m, prim_poly
        self.curves, self.ch, self.trials = curves, ch, trials
        self.seed, self.engine, self.dec = seed, engine, dec

    def __call__(self, key):
        f = get_field(self.m, self.prim_poly)
        rng = batch_rng(self.seed, *key)
        Z = sample_llr_block(self.ch, self.trials * self.s, self.m, rng).reshape(self.trials, self.s, self.m)
        out = []
        for gam in self.curves:
            if self.engine == "predicate":
                ok = ZigzagPredicate(f, gam).evaluate(Z)
                per = np.where(ok, 0, self.s)
            else:
                g = zigzag_code_from_gammas(f, gam)
                dec = _zigzag_decoder_cfg(self.dec, f, gam)
                C = initial_message(Z, f)
                per = np.array([decode(g, C[t], dec).symbol_errors for t in range(self.trials)])
            t = _Tally()
            t.add(per)
            out.append(t)
        return out


def _zigzag_decoder_cfg(dec: DecoderConfig, f, gammas) -> DecoderConfig:
    """Window must cover at least one period ``s * order(beta)``."""
    beta = f.exp(sum(f.log(g) for g in gammas))
    need = len(gammas) * f.order(beta)
    if dec.ec_window >= need:
        return dec
    return replace(dec, ec_window=need, max_iter=max(dec.max_iter, 2 * need))


def run_zigzag(s: int, m: int, beta_spec, grid, cfg: SimConfig, prim_poly: int = 0) -> list[SERRecord]:
    """SER of zigzag cycle codes over a channel grid.

    With several curves (a ``beta`` sweep) all curves see the same noise.
    """
    f = get_field(m, prim_poly)
    curves = parse_beta_spec(beta_spec, f, s)
    batch = cfg.batch_trials or (100_000 if cfg.engine == "predicate" else 200)
    max_trials = max(1, cfg.max_symbols // s)
    n_batches = -(-max_trials // batch)
    records = []
    pool = _make_pool(cfg.workers)
    try:
        for pi, ch in enumerate(grid):
            t0 = time.perf_counter()
            tallies = [_Tally() for _ in curves]
            job = _ZigzagBatch(s, m, f.prim_poly, curves, ch, batch, cfg.seed, cfg.engine, cfg.decoder)

            def stop(res):
                for t, r in zip(tallies, res):
                    t.merge(r)
                if not cfg.early_stop:
                    return False
                return all(
                    _precise_enough(t.errors, t.trials * s, design_effect(t.errors, t.sumsq, t.trials, s),
                                    cfg.min_errors, cfg.rel_halfwidth)
                    for t in tallies
                )

            _drive(job, (0, pi), n_batches, stop, pool)
            wall = time.perf_counter() - t0
            for gam, t in zip(curves, tallies):
                records.append(_record(ch, t, s, cfg, cfg.engine, _beta_label(f, gam), None, wall,
                                       {"gammas": [f.log(g) for g in gam],
                                        "sigma_ord": f.order(f.exp(sum(f.log(g) for g in gam))),
                                        "p_zz_max_order": p_zz(s, m, ch)}))
    finally:
        if pool is not None:
            pool.shutdown()
    return records


def _record(ch, t: _Tally, block, cfg, engine, curve, bound, wall, extra) -> SERRecord:
    deff = design_effect(t.errors, t.sumsq, t.trials, block)
    observed = t.trials * block
    ser, lo, hi = estimate_ser(t.errors, observed, deff)
    low = t.errors / deff < cfg.min_errors
    return SERRecord(ch.kind, ch.param, t.errors, observed, ser, lo, hi, bound, cfg.seed, engine,
                     curve, t.trials, deff, low, wall, extra)


# ---------------------------------------------------------------------------
# ensemble experiments


class _EnsembleBatch:
    def __init__(self, spec, ch, trials, seed, dec, fixed_graph):
        self.spec, self.ch, self.trials = spec, ch, trials
        self.seed, self.dec, self.fixed_graph = seed, dec, fixed_graph

    def __call__(self, key):
        rng = batch_rng(self.seed, *key)
        f = self.spec.field
        per = []
        skipped = nonperiodic = 0
        for _ in range(self.trials):
            g = self.fixed_graph
            if g is None:
                try:
                    g = expurgate(self.spec, rng)
                except ConstructionError as exc:
                    log.warning("construction failed, trial skipped: %s", exc)
                    skipped += 1
                    continue
            Z = sample_llr_block(self.ch, self.spec.N, f.m, rng)
            r = decode(g, initial_message(Z, f), self.dec)
            nonperiodic += r.period == 0
            per.append(r.symbol_errors)
        t = _Tally()
        t.add(np.array(per, dtype=np.int64))
        return t, skipped, nonperiodic


def run_ensemble(spec: EnsembleSpec, grid, cfg: SimConfig, curve: str = "",
                 curve_idx: int = 0) -> list[SERRecord]:
    """Ensemble-average SER by BP with a fresh expurgated code per trial
    (or one fixed code when ``cfg.fixed_code``)."""
    batch = cfg.batch_trials or 16
    max_trials = max(1, cfg.max_symbols // spec.N)
    n_batches = -(-max_trials // batch)
    fixed = None
    if cfg.fixed_code:
        fixed = expurgate(spec, batch_rng(cfg.seed, 1 << 30, curve_idx))
    records = []
    pool = _make_pool(cfg.workers)
    try:
        for pi, ch in enumerate(grid):
            t0 = time.perf_counter()
            tally = _Tally()
            diag = {"skipped": 0, "nonperiodic": 0}
            job = _EnsembleBatch(spec, ch, batch, cfg.seed, cfg.decoder, fixed)

            def stop(res):
                t, sk, npd = res
                tally.merge(t)
                diag["skipped"] += sk
                diag["nonperiodic"] += npd
                if not cfg.early_stop:
                    return False
                deff = design_effect(tally.errors, tally.sumsq, tally.trials, spec.N)
                return _precise_enough(tally.errors, tally.trials * spec.N, deff,
                                       cfg.min_errors, cfg.rel_halfwidth)

            _drive(job, (1, curve_idx, pi), n_batches, stop, pool)
            fb = floor_bound(spec, ch)
            records.append(_record(ch, tally, spec.N, cfg, "bp", curve, fb.value,
                                   time.perf_counter() - t0, dict(diag, fixed_code=cfg.fixed_code)))
    finally:
        if pool is not None:
            pool.shutdown()
    return records


# ---------------------------------------------------------------------------
# output

CSV_COLUMNS = ["channel_param", "ser", "ci_low", "ci_high", "bound", "errors",
               "observed", "seed", "engine", "curve"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(records, fp) -> None:
    w = csv.writer(fp, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])


def write_points(records, fp) -> None:
    """Two-column ``channel_param ser`` blocks, one per curve (gnuplot index
    blocks separated by two blank lines)."""
    curves: dict[str, list] = {}
    for r in records:
        curves.setdefault(r.curve, []).append(r)
    first = True
    for name, rs in curves.items():
        if not first:
            fp.write("\n\n")
        first = False
        fp.write(f"# {name or 'ser'}\n")
        for r in sorted(rs, key=lambda r: r.channel_param):
            fp.write(f"{r.channel_param!r} {r.ser!r}\n")


def emit_results(records, csv_path=None, config: dict | None = None, sidecar_path=None,
                 points_path=None, stream=None) -> None:
    """Write the CSV (or to ``stream``), the JSON sidecar and optional
    plot points."""
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fp:
            write_csv(records, fp)
    elif stream is not None:
        write_csv(records, stream)
    if sidecar_path is not None:
        doc = {
            "tool": "nbldpc",
            "version": __version__,
            "backend": _backend.BACKEND,
            "config": config or {},
            "records": [asdict(r) for r in records],
        }
        with open(sidecar_path, "w") as fp:
            json.dump(doc, fp, indent=2, default=_json_default)
            fp.write("\n")
    if points_path is not None:
        with open(points_path, "w") as fp:
            write_points(records, fp)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"not JSON serialisable: {type(o)}")


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fp:
        return list(csv.DictReader(fp))
