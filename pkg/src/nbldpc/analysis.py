"""Closed-form zigzag-cycle success conditions and error-floor lower bounds.

Zigzag predicate
----------------
For a single zigzag cycle with step parameters ``gamma_1..gamma_s``, cycle
parameter ``beta = prod gamma_k`` of order ``sigma_ord`` and initial messages
``C_1..C_s``, all symbols are eventually correct under BP iff for every coset
representative ``x`` in ``{alpha^j : 0 <= j < (q-1)/sigma_ord}``::

    sigma_ord * sum_k log C_k(0)  >  sum_{t < sigma_ord} sum_k log C_k(beta^t x / chi_k)

with ``chi_k = gamma_1 ... gamma_{k-1}`` (``chi_1 = 1``).  The division by
``chi_k`` follows from the check equations ``x_{k+1} = x_k / gamma_k``: the
symbol pattern seen along the cycle is ``(x, x/chi_2, ..., x/chi_s)``.  If the
inequality fails for some ``x`` (including exact equality) no symbol is
eventually correct.

With per-bit LLRs ``Z[k, i]`` we have ``log C_k(y) = -sum_i bit_i(y) Z[k, i]``
up to a constant that cancels, so the condition is linear in the LLRs::

    margin(x) = sum_{k,i} W[x, k, i] Z[k, i] > 0,
    W[x, k, i] = #{t < sigma_ord : bit i of beta^t x / chi_k is set}

which :class:`ZigzagPredicate` evaluates for whole batches at once.  For a
maximal-order ``beta`` every weight equals ``2^(m-1)`` and the condition
reduces to ``sum Z > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelModel, bhattacharyya, tail_prob
from .gf import FieldParams

ALL_CORRECT = "AllCorrect"
NONE_CORRECT = "NoneCorrect"

TIE_RTOL = 1e-12


def gammas_for_beta(field: FieldParams, beta: int, s: int) -> list[int]:
    """Synthesised steps ``(beta, 1, ..., 1)`` whose product is ``beta``."""
    if s < 1:
        raise ValueError("s must be >= 1")
    return [int(beta)] + [1] * (s - 1)


def _chi_inverses(field: FieldParams, gammas) -> list[int]:
    out, acc = [], 0
    n = field.q - 1
    for g in gammas:
        out.append(field.exp(-acc % n))
        acc += field.log(g)
    return out


def _coset_reps(field: FieldParams, sigma_ord: int) -> list[int]:
    return [field.exp(j) for j in range((field.q - 1) // sigma_ord)]


@dataclass
class ZigzagInstance:
    """One zigzag cycle code with its channel observation.

    Parameters
    ----------
    params : FieldParams
    gammas : sequence of int
        Nonzero steps ``gamma_k = h_{k,k}^{-1} h_{k,k+1}``.
    C : array (s, q)
        Initial messages (any positive scaling per row).
    """

    params: FieldParams
    gammas: tuple
    C: np.ndarray

    def __post_init__(self):
        self.gammas = tuple(int(g) for g in self.gammas)
        if not self.gammas or any(not 0 < g < self.params.q for g in self.gammas):
            raise ValueError("gammas must be nonzero field elements")
        self.C = np.asarray(self.C, dtype=float)
        if self.C.shape != (self.s, self.params.q):
            raise ValueError(f"C must have shape {(self.s, self.params.q)}")
        if (self.C < 0).any():
            raise ValueError("initial messages must be nonnegative")

    @property
    def s(self) -> int:
        return len(self.gammas)

    @property
    def beta(self) -> int:
        f = self.params
        return f.exp(sum(f.log(g) for g in self.gammas))

    @property
    def sigma_ord(self) -> int:
        return self.params.order(self.beta)

    def margins(self) -> tuple[np.ndarray, np.ndarray]:
        """Per coset representative: ``lhs - rhs`` and the magnitude scale
        used for tie detection."""
        f = self.params
        sig = self.sigma_ord
        with np.errstate(divide="ignore"):
            logC = np.log(self.C)
        chi_inv = _chi_inverses(f, self.gammas)
        b = self.beta
        lhs = sig * logC[:, 0].sum()
        out, scale = [], []
        for x in _coset_reps(f, sig):
            rhs = 0.0
            mag = sig * np.abs(logC[:, 0]).sum()
            y = x
            for _ in range(sig):
                for k in range(self.s):
                    v = logC[k, f.mul(y, chi_inv[k])]
                    rhs += v
                    mag += abs(v)
                y = f.mul(y, b)
            out.append(lhs - rhs)
            scale.append(mag)
        return np.array(out), np.array(scale)


def zigzag_outcome(z: ZigzagInstance, rtol: float = TIE_RTOL) -> str:
    """Whether BP on the cycle code ends up correct on every symbol.

    ``AllCorrect`` iff for every coset representative ``x`` of the subgroup
    generated by ``beta``::

        ord(beta) * sum_k log C_k(0) > sum_t sum_k log C_k(beta^t x / chi_k)

    with ``chi_k = gamma_1 ... gamma_{k-1}``.  Otherwise every symbol fails
    (``NoneCorrect``); margins within ``rtol`` of a tie count as failure.
    """
    if (z.C[:, 0] <= 0).any():
        return NONE_CORRECT
    diff, scale = z.margins()
    with np.errstate(invalid="ignore"):
        ok = np.where(np.isfinite(diff), diff > rtol * np.where(np.isfinite(scale), scale, 0.0),
                      diff > 0)
    return ALL_CORRECT if ok.all() else NONE_CORRECT


class ZigzagPredicate:
    """Batch evaluator of the zigzag success condition on raw LLRs.

    ``evaluate(Z)`` takes LLRs of shape ``(T, s, m)`` and returns a boolean
    array of length ``T`` (True = all symbols eventually correct).
    """

    def __init__(self, params: FieldParams, gammas, rtol: float = TIE_RTOL):
        self.params = params
        self.gammas = tuple(int(g) for g in gammas)
        self.rtol = rtol
        f = params
        s, m = len(self.gammas), f.m
        beta = f.exp(sum(f.log(g) for g in self.gammas))
        self.beta = beta
        self.sigma_ord = f.order(beta)
        chi_inv = _chi_inverses(f, self.gammas)
        reps = _coset_reps(f, self.sigma_ord)
        W = np.zeros((len(reps), s, m), dtype=np.int64)
        for a, x in enumerate(reps):
            y = x
            for _ in range(self.sigma_ord):
                for k in range(s):
                    W[a, k] += f.bits[f.mul(y, chi_inv[k])]
                y = f.mul(y, beta)
        self.weights = W

    def margins(self, Z) -> tuple[np.ndarray, np.ndarray]:
        """``(margin, scale)`` arrays of shape ``(T, n_reps)``."""
        Z = np.asarray(Z, dtype=float)
        T = Z.shape[0]
        Wf = self.weights.reshape(self.weights.shape[0], -1).T.astype(float)  # (s*m, R)
        Zf = Z.reshape(T, -1)
        inf = np.isposinf(Zf)
        if inf.any():
            fin = np.where(inf, 0.0, Zf)
            margin = fin @ Wf
            hit = inf.astype(float) @ Wf
            margin = np.where(hit > 0, np.inf, margin)
            scale = np.abs(fin) @ Wf
        else:
            margin = Zf @ Wf
            scale = np.abs(Zf) @ Wf
        return margin, scale

    def evaluate(self, Z) -> np.ndarray:
        margin, scale = self.margins(Z)
        return (margin > self.rtol * scale).all(axis=1)

    def borderline(self, Z, atol_rel: float = 1e-9) -> np.ndarray:
        """Instances whose worst margin lies within ``atol_rel`` of a tie."""
        margin, scale = self.margins(Z)
        return (np.abs(margin) <= atol_rel * np.maximum(scale, 1.0)).any(axis=1)


def llr_sum_outcome(llrs, rtol: float = TIE_RTOL) -> str:
    """For maximal-order ``beta``: ``AllCorrect`` iff the LLR sum is positive."""
    z = np.asarray(llrs, dtype=float).ravel()
    if np.isposinf(z).any():
        return ALL_CORRECT
    total = math.fsum(z)
    return ALL_CORRECT if total > rtol * np.abs(z).sum() else NONE_CORRECT


def max_order_dominates(low: ZigzagInstance, high: ZigzagInstance) -> bool:
    """Whether success of ``low`` implies success of ``high`` on the same
    initial messages (``high`` must have maximal-order ``beta``)."""
    if not np.array_equal(low.C, high.C):
        raise ValueError("instances must share their initial messages")
    if low.s != high.s or low.params != high.params:
        raise ValueError("instances must share s and the field")
    if not high.params.is_max_order(high.beta):
        raise ValueError("second instance must have a maximal-order cycle parameter")
    return zigzag_outcome(low) != ALL_CORRECT or zigzag_outcome(high) == ALL_CORRECT


def p_zz(s: int, m: int, ch: ChannelModel) -> float:
    """Symbol error rate of a zigzag cycle code with maximal-order ``beta``."""
    return tail_prob(ch, s * m)


# ---------------------------------------------------------------------------
# floor bounds

TAIL_REL = 1e-3
MAX_TERMS = 100_000
NONCONVERGENT_TERMS = 50


@dataclass
class FloorBound:
    """Truncated lower bound ``(1/2N) sum_s mu^s Pr(Z^(sm) <= 0)``.

    ``terms[s]`` already carries the ``1/(2N)`` factor.  ``value`` is ``None``
    when the series diverges.
    """

    value: float | None
    terms: dict = field(default_factory=dict)
    truncation_weight: int = 0
    tail_estimate: float = 0.0
    convergent: bool = True
    ratio: float = 0.0

    def upper(self) -> float | None:
        """Partial sum plus the geometric tail bound."""
        if self.value is None:
            return None
        return self.value + self.tail_estimate


def bsc_threshold(mu_: float, m: int) -> float:
    """Largest crossover probability for which the series converges."""
    if mu_ <= 1:
        return 0.5
    return (1.0 - math.sqrt(1.0 - mu_ ** (-2.0 / m))) / 2.0


def awgn_threshold(mu_: float, m: int) -> float:
    """Largest noise standard deviation for which the series converges."""
    if mu_ <= 1:
        return math.inf
    return math.sqrt(m / (2.0 * math.log(mu_)))


def floor_bound_general(spec, ch: ChannelModel, S_max: int | None = None,
                        tail_fn=None, bhatt: float | None = None) -> FloorBound:
    """Floor bound for any channel.

    Parameters
    ----------
    spec : EnsembleSpec
    ch : ChannelModel
    S_max : int, optional
        Fixed truncation weight; chosen automatically when omitted so that
        the tail bound is at most 1e-3 of the partial sum.
    tail_fn, bhatt : optional
        Overrides for ``Pr(Z^(k) <= 0)`` and the Bhattacharyya value, for
        L-densities outside the built-in set.
    """
    m, N, sg = spec.m, spec.N, spec.s_g
    mu_ = spec.mu
    tail = tail_fn if tail_fn is not None else (lambda k: tail_prob(ch, k))
    B = bhatt if bhatt is not None else bhattacharyya(ch)
    scale = 1.0 / (2.0 * N)
    r = mu_ * B**m
    if mu_ == 0.0:
        return FloorBound(0.0, {}, sg, 0.0, True, 0.0)
    if r >= 1.0:
        S = S_max if S_max is not None else sg + NONCONVERGENT_TERMS - 1
        terms = {s: scale * mu_**s * tail(s * m) for s in range(sg, S + 1)}
        return FloorBound(None, terms, S, math.inf, False, r)
    terms: dict[int, float] = {}
    partial = 0.0
    s = sg
    while True:
        t = scale * mu_**s * tail(s * m)
        terms[s] = t
        partial += t
        tail_bound = scale * r ** (s + 1) / (1.0 - r)
        if S_max is not None:
            if s >= S_max:
                break
        elif (partial > 0 and tail_bound <= TAIL_REL * partial) or tail_bound == 0.0 or s >= MAX_TERMS:
            break
        s += 1
    total = math.fsum(terms.values())
    return FloorBound(total, terms, s, scale * r ** (s + 1) / (1.0 - r), True, r)


def floor_bound_bsc(spec, eps: float, S_max: int | None = None) -> FloorBound:
    """BSC floor bound; terms ``mu^s sum_{i <= ms/2} C(ms,i) eps^(ms-i) (1-eps)^i``."""
    from .channel import BSC

    return floor_bound_general(spec, BSC(eps), S_max)


def floor_bound_awgn(spec, sigma2: float, S_max: int | None = None) -> FloorBound:
    """AWGN floor bound; terms ``mu^s Q(sqrt(sm)/sigma)``."""
    from .channel import BiAWGN

    return floor_bound_general(spec, BiAWGN(sigma2), S_max)


def floor_bound(spec, ch: ChannelModel, S_max: int | None = None) -> FloorBound:
    if ch.kind == "bsc":
        return floor_bound_bsc(spec, ch.param, S_max)
    if ch.kind == "awgn":
        return floor_bound_awgn(spec, ch.param, S_max)
    return floor_bound_general(spec, ch, S_max)
