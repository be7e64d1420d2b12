import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nbldpc.analysis import p_zz
from nbldpc.channel import BSC, BiAWGN
from nbldpc.decoder import DecoderConfig
from nbldpc.gf import get_field
from nbldpc.graph import DegreeDistPair, EnsembleSpec
from nbldpc.sim import (
    CSV_COLUMNS,
    SimConfig,
    SimConfigError,
    batch_rng,
    design_effect,
    emit_results,
    estimate_ser,
    parse_beta_spec,
    read_csv,
    run_ensemble,
    run_zigzag,
    wilson_interval,
    write_csv,
    write_points,
)

Z = 1.959963984540054


def test_wilson_zero_errors():
    lo, hi = wilson_interval(0, 10**6)
    assert lo == 0.0
    assert hi == pytest.approx(Z**2 / (10**6 + Z**2), rel=1e-12)
    assert hi == pytest.approx(3.7e-6, rel=0.05)


def test_wilson_hundred_errors():
    n, k = 10**6, 100
    p = k / n
    c = (p + Z**2 / (2 * n)) / (1 + Z**2 / n)
    h = Z * math.sqrt(p * (1 - p) / n + Z**2 / (4 * n * n)) / (1 + Z**2 / n)
    assert wilson_interval(k, n) == pytest.approx((c - h, c + h), rel=1e-12)
    ser, lo, hi = estimate_ser(k, n)
    assert ser == 1e-4 and lo < ser < hi


def test_single_symbol_error():
    ser, lo, hi = estimate_ser(1, 1)
    assert ser == 1.0 and hi == 1.0


@given(st.integers(0, 1000), st.integers(1, 10**6))
def test_wilson_contains_estimate(k, n):
    k = min(k, n)
    ser, lo, hi = estimate_ser(k, n)
    assert 0.0 <= lo <= ser <= hi <= 1.0


def test_design_effect_inflates_clustered_errors():
    # 10 trials of 100 symbols: all errors in one trial vs spread evenly
    clustered = design_effect(10, 100, 10, 100)
    spread = design_effect(10, 10, 10, 100)
    assert clustered > 5 and spread == 1.0


def test_batch_streams_are_independent_and_reproducible():
    a = batch_rng(1, 0, 0, 0).random(4)
    assert np.array_equal(a, batch_rng(1, 0, 0, 0).random(4))
    assert not np.array_equal(a, batch_rng(1, 0, 0, 1).random(4))
    assert not np.array_equal(a, batch_rng(2, 0, 0, 0).random(4))


def test_config_validation():
    with pytest.raises(SimConfigError):
        SimConfig(engine="magic")
    with pytest.raises(SimConfigError):
        SimConfig(max_symbols=0)
    with pytest.raises(SimConfigError):
        parse_beta_spec([1, 2], get_field(4), 3)


def test_parse_beta_spec():
    f = get_field(4)
    assert len(parse_beta_spec("sweep", f, 3)) == 15
    assert parse_beta_spec(2, f, 3) == [(f.exp(2), 1, 1)]
    assert parse_beta_spec([1, 0, 3], f, 3) == [(f.exp(1), 1, f.exp(3))]


def test_zigzag_run_matches_closed_form():
    cfg = SimConfig(seed=3, max_symbols=3 * 2 * 10**5, early_stop=False)
    (r,) = run_zigzag(3, 4, 1, [BiAWGN(1.0)], cfg)
    p = p_zz(3, 4, BiAWGN(1.0))
    se = math.sqrt(p * (1 - p) / r.trials)
    assert abs(r.ser - p) <= 4 * se
    assert r.bound is None and r.curve == "beta=a^1"
    assert r.observed == 3 * r.trials


def test_zigzag_engines_agree_on_same_noise():
    cfg_p = SimConfig(seed=5, max_symbols=3 * 400, batch_trials=200, early_stop=False)
    # small-margin instances converge slowly, so give BP a long horizon
    cfg_b = SimConfig(seed=5, max_symbols=3 * 400, batch_trials=200, early_stop=False, engine="bp",
                      decoder=DecoderConfig(max_iter=3000))
    for beta in (1, 5):
        (a,) = run_zigzag(3, 4, beta, [BiAWGN(2.0)], cfg_p)
        (b,) = run_zigzag(3, 4, beta, [BiAWGN(2.0)], cfg_b)
        assert a.errors == b.errors and a.errors > 0


def test_early_stop_and_low_confidence():
    cfg = SimConfig(seed=1, min_errors=50, max_symbols=3 * 10**6, batch_trials=20000)
    (r,) = run_zigzag(3, 4, 1, [BiAWGN(2.0)], cfg)
    assert r.trials < 10**6 and not r.low_confidence
    assert (r.ci_high - r.ci_low) / 2 < 0.2 * r.ser
    cfg = SimConfig(seed=1, min_errors=50, max_symbols=3000)
    (r,) = run_zigzag(3, 4, 1, [BiAWGN(0.3)], cfg)
    assert r.low_confidence


def test_zigzag_determinism_and_parallel_equivalence():
    base = dict(seed=11, max_symbols=3 * 60000, batch_trials=10000, early_stop=False)
    a = run_zigzag(3, 4, "sweep", [BiAWGN(1.5)], SimConfig(**base))
    b = run_zigzag(3, 4, "sweep", [BiAWGN(1.5)], SimConfig(**base))
    c = run_zigzag(3, 4, "sweep", [BiAWGN(1.5)], SimConfig(workers=2, **base))
    assert [r.errors for r in a] == [r.errors for r in b] == [r.errors for r in c]


def test_ensemble_run_small():
    spec = EnsembleSpec(60, 3, DegreeDistPair.parse("x", "x^2"), 1, 4, frozenset({1}))
    cfg = SimConfig(seed=2, max_symbols=60 * 32, batch_trials=16, early_stop=False,
                    engine="bp", decoder=DecoderConfig(max_iter=50))
    (r,) = run_ensemble(spec, [BiAWGN(1.2)], cfg, curve="cc")
    assert r.trials == 32 and r.observed == 60 * 32
    assert r.bound is not None and r.bound > 0
    assert r.extra["skipped"] == 0
    (r2,) = run_ensemble(spec, [BiAWGN(1.2)], cfg, curve="cc")
    assert r2.errors == r.errors


def test_ensemble_without_degree_two_has_zero_bound():
    spec = EnsembleSpec(40, 2, DegreeDistPair.parse("x^2", "x^5"))
    cfg = SimConfig(seed=2, max_symbols=40 * 8, batch_trials=8, early_stop=False, engine="bp",
                    decoder=DecoderConfig(max_iter=30))
    (r,) = run_ensemble(spec, [BSC(0.01)], cfg)
    assert r.bound == 0.0


def _records():
    cfg = SimConfig(seed=4, max_symbols=3 * 20000, batch_trials=10000, early_stop=False)
    return run_zigzag(3, 4, [1, 2, 3], [BiAWGN(1.0), BiAWGN(2.0)], cfg)


def test_csv_is_rfc4180():
    recs = _records()
    recs[0].curve = 'odd, "quoted"\nname'
    buf = io.StringIO(newline="")
    write_csv(recs, buf)
    text = buf.getvalue()
    assert text.endswith("\r\n")
    rows = list(csv.reader(io.StringIO(text, newline="")))
    assert rows[0] == CSV_COLUMNS
    assert rows[1][CSV_COLUMNS.index("curve")] == 'odd, "quoted"\nname'
    assert rows[1][CSV_COLUMNS.index("bound")] == ""
    assert float(rows[1][CSV_COLUMNS.index("ser")]) == recs[0].ser


def test_emit_results(tmp_path):
    recs = _records()
    emit_results(recs, tmp_path / "r.csv", {"seed": 4}, tmp_path / "r.json", tmp_path / "r.dat")
    rows = read_csv(tmp_path / "r.csv")
    assert [int(r["errors"]) for r in rows] == [r.errors for r in recs]
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["config"] == {"seed": 4} and len(doc["records"]) == 2
    assert doc["backend"] in ("cython", "python")
    pts = (tmp_path / "r.dat").read_text()
    assert pts.startswith("# beta=") and len(pts.split("\n\n\n")) == 1


def test_points_blocks_per_curve():
    recs = run_zigzag(2, 2, "sweep", [BiAWGN(1.0), BiAWGN(2.0)],
                      SimConfig(seed=1, max_symbols=2 * 1000, batch_trials=1000, early_stop=False))
    buf = io.StringIO()
    write_points(recs, buf)
    blocks = buf.getvalue().split("\n\n\n")
    assert len(blocks) == 3
    for b in blocks:
        lines = [s for s in b.splitlines() if s and not s.startswith("#")]
        assert [float(s.split()[0]) for s in lines] == [1.0, 2.0]
