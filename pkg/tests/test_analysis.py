import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbldpc.analysis import (
    ALL_CORRECT,
    NONE_CORRECT,
    ZigzagInstance,
    ZigzagPredicate,
    awgn_threshold,
    bsc_threshold,
    max_order_dominates,
    llr_sum_outcome,
    floor_bound,
    floor_bound_general,
    gammas_for_beta,
    p_zz,
    zigzag_outcome,
)
from nbldpc.channel import BEC, BSC, BiAWGN, bhattacharyya, initial_message, sample_llr_block
from nbldpc.decoder import DecoderConfig, decode
from nbldpc.gf import get_field
from nbldpc.graph import DegreeDistPair, EnsembleSpec, zigzag_code_from_gammas

REGULAR = DegreeDistPair.parse("x", "x^2")


def instance(rng, s, m, ch, gammas=None):
    f = get_field(m)
    if gammas is None:
        gammas = [int(g) for g in rng.integers(1, f.q, size=s)]
    Z = sample_llr_block(ch, s, m, rng)
    return ZigzagInstance(f, gammas, initial_message(Z, f)), Z


def bp_outcome(z):
    g = zigzag_code_from_gammas(z.params, list(z.gammas))
    win = 2 * z.s * z.sigma_ord
    r = decode(g, z.C, DecoderConfig(max_iter=max(400, 4 * win), ec_window=win))
    return r.eventually_correct


# -- predicates ------------------------------------------------------------------


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=80, deadline=None)
def test_predicate_matches_bp(seed):
    rng = np.random.default_rng(seed)
    s, m = int(rng.integers(1, 5)), int(rng.integers(2, 4))
    ch = BiAWGN(float(rng.choice([0.5, 1.0, 2.0])))
    z, Z = instance(rng, s, m, ch)
    pred = ZigzagPredicate(z.params, z.gammas)
    if pred.borderline(Z[None])[0]:
        return
    ec = bp_outcome(z)
    verdict = zigzag_outcome(z)
    assert ec.all() == (verdict == ALL_CORRECT)
    assert ec.all() or not ec.any()  # all-or-nothing
    assert pred.evaluate(Z[None])[0] == (verdict == ALL_CORRECT)


def test_batch_predicate_matches_scalar():
    rng = np.random.default_rng(1)
    f = get_field(4)
    for gam in ([f.exp(3), f.exp(7), 1], [f.exp(5), 1, 1], [1, 1, 1]):
        pred = ZigzagPredicate(f, gam)
        Z = sample_llr_block(BiAWGN(1.0), 3 * 400, 4, rng).reshape(400, 3, 4)
        got = pred.evaluate(Z)
        want = [zigzag_outcome(ZigzagInstance(f, gam, initial_message(z, f))) == ALL_CORRECT
                for z in Z]
        assert got.tolist() == want


def test_predicate_handles_infinite_llrs():
    f = get_field(3)
    pred = ZigzagPredicate(f, [f.exp(1), 1])
    Z = np.array([[[np.inf, 0.0, 0.0], [0.0, 0.0, 0.0]], [[0.0] * 3, [0.0] * 3]])
    assert pred.evaluate(Z).tolist() == [True, False]


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=100)
def test_llr_sum_rule_agrees_with_general_condition(seed):
    rng = np.random.default_rng(seed)
    s, m = int(rng.integers(1, 5)), int(rng.integers(2, 5))
    f = get_field(m)
    beta = f.exp(1)
    gam = gammas_for_beta(f, beta, s)
    ch = BiAWGN(float(rng.uniform(0.3, 3.0))) if rng.random() < 0.7 else BSC(0.15)
    z, Z = instance(rng, s, m, ch, gam)
    assert llr_sum_outcome(Z) == zigzag_outcome(z)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=100)
def test_maximal_order_dominates(seed):
    rng = np.random.default_rng(seed)
    s, m = int(rng.integers(1, 5)), int(rng.integers(2, 5))
    f = get_field(m)
    Z = sample_llr_block(BiAWGN(float(rng.uniform(0.5, 2.0))), s, m, rng)
    C = initial_message(Z, f)
    low = ZigzagInstance(f, [int(g) for g in rng.integers(1, f.q, size=s)], C)
    high = ZigzagInstance(f, gammas_for_beta(f, f.exp(1), s), C)
    assert max_order_dominates(low, high)


def test_max_order_dominates_argument_checks():
    f = get_field(3)
    C = np.full((2, 8), 1 / 8)
    with pytest.raises(ValueError):
        max_order_dominates(ZigzagInstance(f, [1, 1], C), ZigzagInstance(f, [1, 1], C))


def test_zero_mass_at_zero_is_none_correct():
    f = get_field(2)
    C = np.array([[0.0, 0.5, 0.25, 0.25], [0.25] * 4])
    assert zigzag_outcome(ZigzagInstance(f, [2, 3], C)) == NONE_CORRECT


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50)
def test_rhs_sums_over_all_nonzero_elements(seed):
    # the orbits {beta^t x chi_k^-1} over coset representatives x partition
    # the nonzero elements, so the right-hand sides add up to a fixed total
    rng = np.random.default_rng(seed)
    s, m = int(rng.integers(1, 5)), int(rng.integers(2, 6))
    z, _ = instance(rng, s, m, BiAWGN(1.0))
    logC = np.log(z.C)
    margin, _ = z.margins()
    lhs = z.sigma_ord * logC[:, 0].sum()
    total_rhs = np.sum(lhs - margin)
    assert total_rhs == pytest.approx(logC[:, 1:].sum(), rel=1e-10, abs=1e-9)


def test_exhaustive_small_field_outcomes():
    # m=2, s=2, BSC: every flip pattern, predicate against BP
    f = get_field(2)
    L = BSC(0.1).bsc_llr
    for gam in itertools.product(range(1, 4), repeat=2):
        for flips in itertools.product([1, -1], repeat=4):
            Z = L * np.array(flips, dtype=float).reshape(2, 2)
            z = ZigzagInstance(f, gam, initial_message(Z, f))
            ec = bp_outcome(z)
            assert ec.all() == (zigzag_outcome(z) == ALL_CORRECT), (gam, flips)


# -- zigzag SER and floor bound ---------------------------------------------------


def test_p_zz_closed_form():
    assert p_zz(3, 4, BiAWGN(1.0)) == pytest.approx(float(mpmath.ncdf(-mpmath.sqrt(12))), rel=1e-12)
    assert p_zz(3, 4, BiAWGN(1.0)) == pytest.approx(2.66e-4, rel=0.01)
    assert p_zz(2, 2, BEC(0.3)) == pytest.approx(0.3**4)


def test_thresholds_are_where_the_ratio_hits_one():
    mu_, m = 2.0, 4
    eps = bsc_threshold(mu_, m)
    assert mu_ * bhattacharyya(BSC(eps)) ** m == pytest.approx(1.0, rel=1e-12)
    sig = awgn_threshold(mu_, m)
    assert mu_ * bhattacharyya(BiAWGN(sig**2)) ** m == pytest.approx(1.0, rel=1e-12)
    assert bsc_threshold(1.0, 4) == 0.5 and awgn_threshold(0.5, 4) == math.inf


def test_floor_bound_convergence_regions():
    spec = EnsembleSpec(315, 4, REGULAR)
    sig = awgn_threshold(spec.mu, 4)
    below = floor_bound(spec, BiAWGN(0.95 * sig**2))
    above = floor_bound(spec, BiAWGN(1.05 * sig**2))
    assert below.convergent and below.value > 0
    assert not above.convergent and above.value is None and len(above.terms) == 50
    eps = bsc_threshold(spec.mu, 4)
    assert floor_bound(spec, BSC(0.9 * eps)).convergent
    assert not floor_bound(spec, BSC(min(0.49, 1.1 * eps))).convergent


def test_floor_bound_value_at_unit_noise():
    spec = EnsembleSpec(315, 4, REGULAR)
    fb = floor_bound(spec, BiAWGN(1.0))
    # leading term mu Q(2)/(2N) plus a short geometric-ish series
    oracle = mpmath.fsum(2**s * mpmath.ncdf(-mpmath.sqrt(4 * s)) for s in range(1, 400)) / 630
    assert fb.value == pytest.approx(float(oracle), rel=2e-3)
    assert fb.value <= float(oracle) <= fb.upper()


@pytest.mark.parametrize("sigma2", [0.5, 0.8, 1.0, 1.3])
def test_tail_estimate_bounds_the_remainder(sigma2):
    spec = EnsembleSpec(315, 4, REGULAR)
    auto = floor_bound(spec, BiAWGN(sigma2))
    full = floor_bound(spec, BiAWGN(sigma2), S_max=auto.truncation_weight + 300)
    assert auto.value <= full.value <= auto.upper()
    assert auto.tail_estimate <= 1e-3 * auto.value


def test_floor_bound_respects_sg_and_mu_zero():
    spec = EnsembleSpec(315, 4, REGULAR, s_g=3, s_c=5)
    fb = floor_bound(spec, BSC(0.02))
    assert min(fb.terms) == 3
    assert floor_bound(EnsembleSpec(100, 4, DegreeDistPair.parse("x^2", "x^5")), BSC(0.1)).value == 0.0


def test_floor_bound_general_overrides():
    spec = EnsembleSpec(315, 4, REGULAR)
    ch = BiAWGN(0.8)
    a = floor_bound(spec, ch)
    b = floor_bound_general(spec, ch, tail_fn=lambda k: p_zz(1, k, ch), bhatt=bhattacharyya(ch))
    assert a.value == b.value


def test_floor_bound_monotone_in_noise():
    spec = EnsembleSpec(315, 4, REGULAR)
    vals = [floor_bound(spec, BiAWGN(s2)).value for s2 in (0.4, 0.6, 0.8, 1.0, 1.2)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
