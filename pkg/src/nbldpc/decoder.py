"""Probability-domain q-ary belief propagation with a flooding schedule.

Messages are length-q probability vectors indexed by field elements.  The
heavy lifting happens in the compiled kernel (or its numpy twin); the small
per-node functions here are the readable reference versions and are what the
unit tests compare the kernel against.

"Eventually correct" is decided exactly whenever possible.  The decoder state
(the check-to-variable messages) is a deterministic function of the previous
state, so once a state repeats the decision sequence is periodic forever.  The
kernel detects the first repeat with Brent's cycle finder and a symbol is
eventually correct iff its decision is uniquely 0 over the whole period.  If
``max_iter`` is reached without a repeat, the trailing window of
``ec_window`` iterations is used instead.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._pykernels import wht, xor_conv_direct
from .gf import FieldParams
from .graph import TannerGraph

log = logging.getLogger(__name__)

DEFAULT_FLOOR = 1e-300
DEFAULT_TIE_RTOL = 1e-9


class DecoderConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DecoderConfig:
    """Decoder knobs.

    Parameters
    ----------
    max_iter : int
        Iteration cap ``l_max``.
    ec_window : int
        Trailing iterations that must all decide 0 when no period was found.
    tie_break_seed : int or None
        Seed for the random choice among tied maximisers of the final
        decision.
    floor : float
        Entries are clamped to at least this value before renormalising.
    tie_rtol : float
        Entries within this relative distance of the maximum count as tied.
    conv : {"wht", "direct"}
        Check-node convolution: fast transform or O(q^2) double sum.
    """

    max_iter: int = 200
    ec_window: int = 8
    tie_break_seed: int | None = 0
    floor: float = DEFAULT_FLOOR
    tie_rtol: float = DEFAULT_TIE_RTOL
    conv: str = "wht"

    def __post_init__(self):
        if not 1 <= self.ec_window <= self.max_iter:
            raise DecoderConfigError("need 1 <= ec_window <= max_iter")
        if not 0.0 < self.floor < 1e-6:
            raise DecoderConfigError("floor must be a small positive number")
        if not 0.0 <= self.tie_rtol < 1.0:
            raise DecoderConfigError("tie_rtol must be in [0, 1)")
        if self.conv not in ("wht", "direct"):
            raise DecoderConfigError(f"unknown convolution mode {self.conv!r}")


@dataclass
class DecodeResult:
    """Outcome of one decode.

    ``period`` is the detected period of the message state (0 when the
    iteration cap was hit first).  ``trace``, when requested, maps
    ``"argmax"`` and ``"ties"`` to ``(iterations_run + 1, N)`` arrays.
    """

    decisions: np.ndarray
    eventually_correct: np.ndarray
    iterations_run: int
    period: int
    extinctions: int = 0
    syndrome_ok: bool = True
    trace: dict | None = field(default=None, repr=False)

    @property
    def symbol_errors(self) -> int:
        return int((~self.eventually_correct).sum())

    @property
    def converged(self) -> bool:
        return self.period > 0


# ---------------------------------------------------------------------------
# reference node operations


def _normalize(x: np.ndarray, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    s = x.sum()
    if not (s > 0) or not np.isfinite(s):
        log.warning("message extinction; resetting to uniform")
        return np.full(x.shape, 1.0 / x.size)
    x = np.maximum(x / s, floor)
    return x / x.sum()


def variable_update(C_v, incoming, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """Normalised product of the channel message and the other incoming
    check messages (the excluded edge is simply left out of ``incoming``)."""
    out = np.array(C_v, dtype=float)
    for phi in incoming:
        out = out * np.asarray(phi, dtype=float)
        m = out.max()
        if m > 0:
            out = out / m
    return _normalize(out, floor)


def xor_convolve(a, b) -> np.ndarray:
    """``[a (+) b](x) = sum_{y ^ z = x} a(y) b(z)`` via the Walsh-Hadamard
    transform."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    q = a.shape[-1]
    return wht(wht(a) * wht(b)) / q


def xor_convolve_direct(a, b) -> np.ndarray:
    """O(q^2) double sum; the oracle for :func:`xor_convolve`."""
    return xor_conv_direct(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def check_update(incoming, h_out: int, field: FieldParams, conv: str = "wht",
                 floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """Check-to-variable message.

    Parameters
    ----------
    incoming : list of (message, label)
        Variable-to-check messages of the *other* edges with their labels.
    h_out : int
        Label of the outgoing edge.
    """
    q = field.q
    mt = field.mul_table
    acc = np.zeros(q)
    acc[0] = 1.0
    for psi, h in incoming:
        psi = np.asarray(psi, dtype=float)
        shifted = np.empty(q)
        shifted[mt[h]] = psi  # shifted(h x) = psi(x)
        acc = xor_convolve(acc, shifted) if conv == "wht" else xor_convolve_direct(acc, shifted)
    return _normalize(acc[mt[h_out]], floor)


def tie_set(D, tie_rtol: float = DEFAULT_TIE_RTOL) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    return np.flatnonzero(D >= D.max() * (1.0 - tie_rtol))


def decide(C_v, incoming, rng: np.random.Generator | None = None,
           tie_rtol: float = DEFAULT_TIE_RTOL) -> tuple[int, int]:
    """Decision from ``D = C_v * prod(incoming)``; ties broken uniformly.

    Returns ``(decision, tie_size)``.
    """
    D = np.array(C_v, dtype=float)
    for phi in incoming:
        D = D * np.asarray(phi, dtype=float)
        m = D.max()
        if m > 0:
            D = D / m
    ties = tie_set(D, tie_rtol)
    if ties.size == 1:
        return int(ties[0]), 1
    rng = rng if rng is not None else np.random.default_rng()
    return int(rng.choice(ties)), int(ties.size)


# ---------------------------------------------------------------------------
# full decoder


def edge_permutations(g: TannerGraph) -> np.ndarray:
    """``perm[e, x] = h_e * x`` as an ``(E, q)`` int64 array."""
    return np.ascontiguousarray(g.field.mul_table[g.edge_label], dtype=np.int64)


def decode(g: TannerGraph, init, cfg: DecoderConfig = DecoderConfig(),
           trace: bool = False, kernels=None) -> DecodeResult:
    """Run flooding BP on ``g`` from initial messages ``init`` (shape (N, q)).

    Iteration 0 decides from the channel alone; each later iteration runs all
    variable updates, then all check updates, then the decisions.
    """
    C = np.array(init, dtype=float)
    if C.shape != (g.N, g.field.q):
        raise ValueError(f"init must have shape {(g.N, g.field.q)}, got {C.shape}")
    if (C < 0).any() or not np.isfinite(C).all():
        raise ValueError("initial messages must be finite and nonnegative")
    s = C.sum(axis=1, keepdims=True)
    if (s <= 0).any():
        raise ValueError("initial message with no mass")
    C = np.ascontiguousarray(C / s)
    k = kernels if kernels is not None else _backend.kernels
    ta = tt = None
    if trace:
        ta = np.zeros((cfg.max_iter + 1, g.N), dtype=np.int64)
        tt = np.zeros((cfg.max_iter + 1, g.N), dtype=np.int64)
    last_bad, D, iters, period, ext = k.bp_decode(
        C, edge_permutations(g), g.var_ptr, g.check_ptr, g.check_edges,
        int(cfg.max_iter), float(cfg.floor), float(cfg.tie_rtol),
        cfg.conv == "direct", ta, tt,
    )
    last_bad = np.asarray(last_bad)
    if period:
        first_good = iters - period + 1
    else:
        first_good = iters - cfg.ec_window + 1
    ec = last_bad < first_good
    if ext:
        log.warning("%d message extinctions during decoding", ext)

    rng = np.random.default_rng(cfg.tie_break_seed)
    D = np.asarray(D)
    thr = D.max(axis=1, keepdims=True) * (1.0 - cfg.tie_rtol)
    tied = D >= thr
    decisions = D.argmax(axis=1)
    for v in np.flatnonzero(tied.sum(axis=1) > 1):
        decisions[v] = rng.choice(np.flatnonzero(tied[v]))
    syn_ok = not g.syndrome(decisions).any()
    tr = None
    if trace:
        tr = {"argmax": ta[: iters + 1], "ties": tt[: iters + 1]}
    return DecodeResult(decisions, ec, int(iters), int(period), int(ext), syn_ok, tr)


def dump_trace(result: DecodeResult, fp) -> None:
    """Write the per-iteration decision trace as JSON lines."""
    if result.trace is None:
        raise ValueError("decode was run without trace=True")
    for it, (am, ts) in enumerate(zip(result.trace["argmax"], result.trace["ties"])):
        fp.write(json.dumps({"iter": it, "argmax": am.tolist(), "ties": ts.tolist()}) + "\n")
