import io
import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbldpc import _pykernels
from nbldpc.analysis import ALL_CORRECT, ZigzagInstance, zigzag_outcome
from nbldpc.channel import BSC, BiAWGN, initial_message, sample_llr_block
from nbldpc.decoder import (
    DecoderConfig,
    DecoderConfigError,
    check_update,
    decide,
    decode,
    dump_trace,
    tie_set,
    variable_update,
    xor_convolve,
    xor_convolve_direct,
)
from nbldpc.gf import get_field
from nbldpc.graph import DegreeDistPair, EnsembleSpec, TannerGraph, sample_graph, zigzag_code_from_gammas

F3 = get_field(3)
F4 = get_field(4)


def rand_msg(rng, q):
    x = rng.random(q) + 1e-3
    return x / x.sum()


def brute_check(incoming, h_out, f):
    """Marginal of x on the edge h_out given the parity h_out x + sum h_j x_j = 0."""
    out = np.zeros(f.q)
    for xs in itertools.product(range(f.q), repeat=len(incoming)):
        acc, w = 0, 1.0
        for (psi, h), xj in zip(incoming, xs):
            acc ^= f.mul(h, xj)
            w *= psi[xj]
        for x in range(f.q):
            if f.mul(h_out, x) == acc:
                out[x] += w
    return out / out.sum()


def reference_decode(g, C, iters, floor=1e-300):
    """Textbook flooding schedule built from the node functions."""
    f, q = g.field, g.field.q
    phi = np.full((g.E, q), 1.0 / q)
    D = None
    for it in range(iters + 1):
        if it > 0:
            psi = np.empty_like(phi)
            for v in range(g.N):
                es = range(g.var_ptr[v], g.var_ptr[v + 1])
                for e in es:
                    psi[e] = variable_update(C[v], [phi[o] for o in es if o != e], floor)
            new = np.empty_like(phi)
            for c in range(g.M):
                es = g.check_edges[g.check_ptr[c]: g.check_ptr[c + 1]]
                for e in es:
                    inc = [(psi[o], int(g.edge_label[o])) for o in es if o != e]
                    new[e] = check_update(inc, int(g.edge_label[e]), f, floor=floor)
            phi = new
        D = np.empty((g.N, q))
        for v in range(g.N):
            d = np.array(C[v])
            for e in range(g.var_ptr[v], g.var_ptr[v + 1]):
                d = d * phi[e]
            D[v] = d / d.sum()
    return D


# -- convolution --------------------------------------------------------------


def test_delta_convolution():
    q = 16
    for u, w in [(0, 0), (3, 5), (15, 1)]:
        a, b = np.eye(q)[u], np.eye(q)[w]
        assert np.allclose(xor_convolve(a, b), np.eye(q)[u ^ w], atol=1e-15)


def test_uniform_absorbs():
    rng = np.random.default_rng(0)
    u = np.full(8, 1 / 8)
    assert np.allclose(xor_convolve(u, rand_msg(rng, 8)), u, rtol=1e-14)


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_fast_convolution_matches_double_sum(m, seed):
    rng = np.random.default_rng(seed)
    q = 1 << m
    a, b = rand_msg(rng, q), rand_msg(rng, q)
    assert np.max(np.abs(xor_convolve(a, b) - xor_convolve_direct(a, b))) <= 1e-12


# -- node updates -------------------------------------------------------------


def test_variable_update_examples():
    rng = np.random.default_rng(1)
    C, phi = rand_msg(rng, 8), rand_msg(rng, 8)
    assert np.allclose(variable_update(C, [phi]), C * phi / (C * phi).sum())
    u = np.full(8, 1 / 8)
    assert np.allclose(variable_update(C, [u, u]), C)
    delta = np.eye(8)[0]
    out = variable_update(delta, [rand_msg(rng, 8), rand_msg(rng, 8)])
    assert out[0] == pytest.approx(1.0) and out[1:].max() <= 1e-299


def test_variable_update_extinction_resets_to_uniform(caplog):
    out = variable_update(np.eye(4)[0], [np.eye(4)[1]])
    assert np.allclose(out, 0.25)
    assert "extinction" in caplog.text


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
@settings(max_examples=60)
def test_check_update_matches_brute_force(seed, k):
    rng = np.random.default_rng(seed)
    f = F3
    inc = [(rand_msg(rng, f.q), int(rng.integers(1, f.q))) for _ in range(k)]
    h_out = int(rng.integers(1, f.q))
    for conv in ("wht", "direct"):
        got = check_update(inc, h_out, f, conv=conv)
        assert np.allclose(got, brute_check(inc, h_out, f), atol=1e-13)


def test_degree_two_check_is_a_relabeling():
    rng = np.random.default_rng(2)
    f = F4
    h1, h2 = f.exp(3), f.exp(11)
    psi2 = rand_msg(rng, f.q)
    phi1 = check_update([(psi2, h2)], h1, f)
    expect = np.array([psi2[f.mul(f.mul(f.inv(h2), h1), x)] for x in range(f.q)])
    assert np.allclose(phi1, expect, rtol=1e-12)


def test_check_update_zero_inputs_and_identity_labels():
    f = F4
    delta = np.eye(f.q)[0]
    out = check_update([(delta, 5), (delta, 9)], 7, f)
    assert out[0] == pytest.approx(1.0)
    rng = np.random.default_rng(3)
    a, b = rand_msg(rng, f.q), rand_msg(rng, f.q)
    assert np.allclose(check_update([(a, 1), (b, 1)], 1, f), xor_convolve(a, b))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50)
def test_messages_are_normalized_and_floored(seed):
    rng = np.random.default_rng(seed)
    f = F3
    msgs = [rng.random(f.q) ** 30 for _ in range(3)]
    v = variable_update(msgs[0], msgs[1:], floor=1e-200)
    c = check_update([(msgs[0], 3), (msgs[1], 6)], 2, f, floor=1e-200)
    for out in (v, c):
        assert out.sum() == pytest.approx(1.0, rel=1e-12)
        assert out.min() >= 1e-200 * (1 - 1e-12)


# -- decisions ----------------------------------------------------------------


def test_decide_strict_maximum():
    C = np.array([0.5, 0.2, 0.2, 0.1])
    assert decide(C, [np.full(4, 0.25)]) == (0, 1)


def test_decide_uniform_tie_is_uniform():
    rng = np.random.default_rng(4)
    q = 8
    counts = np.zeros(q, dtype=int)
    for _ in range(8000):
        x, size = decide(np.full(q, 1 / q), [], rng)
        assert size == q
        counts[x] += 1
    chi2 = ((counts - 1000) ** 2 / 1000).sum()
    assert chi2 < 24.3  # 99.9% quantile, 7 dof


def test_tie_set_tolerance():
    assert tie_set([1.0, 1.0 - 1e-12, 0.5]).tolist() == [0, 1]
    assert tie_set([1.0, 1.0 - 1e-6, 0.5]).tolist() == [0]


# -- full decoder ---------------------------------------------------------------


def test_config_validation():
    with pytest.raises(DecoderConfigError):
        DecoderConfig(max_iter=5, ec_window=6)
    with pytest.raises(DecoderConfigError):
        DecoderConfig(floor=0.0)
    with pytest.raises(DecoderConfigError):
        DecoderConfig(conv="fft")


@pytest.mark.parametrize("kern", [_pykernels, None], ids=["python", "default"])
@pytest.mark.parametrize("iters", [0, 1, 2, 5])
def test_kernel_matches_reference_schedule(kern, iters):
    rng = np.random.default_rng(5 + iters)
    spec = EnsembleSpec(50, 3, DegreeDistPair.parse("0.5x+0.5x^2", "0.5x^3+0.5x^5"))
    g = sample_graph(spec, rng)
    C = initial_message(sample_llr_block(BiAWGN(1.5), g.N, 3, rng), g.field)
    ref = reference_decode(g, C, iters)
    k = kern if kern is not None else __import__("nbldpc._backend", fromlist=["kernels"]).kernels
    from nbldpc.decoder import edge_permutations
    _, D, it, _, _ = k.bp_decode(C, edge_permutations(g), g.var_ptr, g.check_ptr, g.check_edges,
                                 iters, 1e-300, 1e-9, False, None, None)
    assert it == iters
    assert np.allclose(np.asarray(D), ref, rtol=1e-9, atol=1e-15)


def test_noiseless_decoding_is_correct():
    rng = np.random.default_rng(6)
    g = sample_graph(EnsembleSpec(60, 4, DegreeDistPair.parse("x", "x^2")), rng)
    Z = np.full((g.N, 4), 40.0)
    r = decode(g, initial_message(Z, g.field))
    assert r.eventually_correct.all() and (r.decisions == 0).all()
    assert r.syndrome_ok and r.converged


def test_eventually_correct_implies_zero_decision():
    rng = np.random.default_rng(7)
    g = sample_graph(EnsembleSpec(90, 4, DegreeDistPair.parse("x", "x^2")), rng)
    for _ in range(10):
        Z = sample_llr_block(BiAWGN(1.2), g.N, 4, rng)
        r = decode(g, initial_message(Z, g.field))
        assert (r.decisions[r.eventually_correct] == 0).all()


def test_exact_tie_is_not_eventually_correct():
    # maximal-order cycle with LLR sum exactly zero: the all-zero word ties forever
    f = get_field(2)
    L = BSC(0.1).bsc_llr
    Z = np.array([[L, -L], [-L, L]])
    g = zigzag_code_from_gammas(f, [f.exp(1), 1])
    C = initial_message(Z, f)
    assert zigzag_outcome(ZigzagInstance(f, (f.exp(1), 1), C)) != ALL_CORRECT
    r = decode(g, C, DecoderConfig(max_iter=100))
    assert not r.eventually_correct.any()


def test_scaling_initial_messages_changes_nothing():
    rng = np.random.default_rng(8)
    g = sample_graph(EnsembleSpec(30, 3, DegreeDistPair.parse("x", "x^2")), rng)
    C = initial_message(sample_llr_block(BiAWGN(1.0), g.N, 3, rng), g.field)
    a = decode(g, C)
    b = decode(g, C * rng.uniform(0.1, 10.0, size=(g.N, 1)))
    assert np.array_equal(a.eventually_correct, b.eventually_correct)
    assert np.array_equal(a.decisions, b.decisions)


def test_wht_and_direct_modes_agree():
    rng = np.random.default_rng(9)
    g = sample_graph(EnsembleSpec(30, 3, DegreeDistPair.parse("x", "x^3")), rng)
    C = initial_message(sample_llr_block(BiAWGN(0.8), g.N, 3, rng), g.field)
    a = decode(g, C, DecoderConfig(max_iter=20))
    b = decode(g, C, DecoderConfig(max_iter=20, conv="direct"))
    assert np.array_equal(a.eventually_correct, b.eventually_correct)


def test_bad_initial_messages():
    g = zigzag_code_from_gammas(F3, [1, 1])
    with pytest.raises(ValueError):
        decode(g, np.zeros((2, 8)))
    with pytest.raises(ValueError):
        decode(g, np.ones((3, 8)))


def test_trace_and_dump():
    f = F3
    g = zigzag_code_from_gammas(f, [3, 5, 1])
    Z = np.full((3, 3), 2.0)
    r = decode(g, initial_message(Z, f), DecoderConfig(max_iter=10), trace=True)
    assert r.trace["argmax"].shape == (r.iterations_run + 1, 3)
    buf = io.StringIO()
    dump_trace(r, buf)
    lines = [json.loads(s) for s in buf.getvalue().splitlines()]
    assert lines[0]["iter"] == 0 and len(lines) == r.iterations_run + 1
    with pytest.raises(ValueError):
        dump_trace(decode(g, initial_message(Z, f)), buf)


def test_degree_one_check_forces_zero():
    g = TannerGraph(1, 1, F3, [0], [0], [5])
    C = initial_message(np.array([[-1.0, -1.0, -1.0]]), F3)
    r = decode(g, C)
    assert r.eventually_correct.all()


def test_decide_two_way_tie_is_fair():
    rng = np.random.default_rng(12)
    D = np.array([0.4, 0.1, 0.4, 0.1])  # tie between 0 and alpha (= 2)
    picks = np.array([decide(D, [], rng)[0] for _ in range(10**4)])
    assert set(np.unique(picks)) == {0, 2}
    n0 = int((picks == 0).sum())
    assert abs(n0 - 5000) <= 3.29 * 50  # two-sided 0.1% binomial test
