"""Memoryless binary-input output-symmetric channels.

All sampling assumes the all-zero codeword, i.e. every bit is sent as +1, so
an LLR ``Z = log p(y|+1)/p(y|-1)`` has the channel's L-density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gf import FieldParams


class ChannelConfigError(ValueError):
    pass


class NumericError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ChannelModel:
    """One of ``bec``, ``bsc`` or ``awgn``.

    ``param`` is the erasure probability, the crossover probability or the
    noise variance sigma^2 respectively.
    """

    kind: str
    param: float

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        p = float(self.param)
        object.__setattr__(self, "param", p)
        if kind == "bec":
            ok = 0.0 <= p <= 1.0
        elif kind == "bsc":
            ok = 0.0 <= p <= 0.5
        elif kind == "awgn":
            ok = p > 0.0 and math.isfinite(p)
        else:
            raise ChannelConfigError(f"unknown channel {self.kind!r}")
        if not ok:
            raise ChannelConfigError(f"invalid parameter {p} for {kind}")

    def __str__(self):
        name = {"bec": "eps", "bsc": "eps", "awgn": "sigma2"}[self.kind]
        return f"{self.kind.upper()}({name}={self.param:g})"

    @property
    def bsc_llr(self) -> float:
        eps = self.param
        if eps == 0.0:
            return math.inf
        return math.log((1.0 - eps) / eps)


def BEC(eps: float) -> ChannelModel:
    return ChannelModel("bec", eps)


def BSC(eps: float) -> ChannelModel:
    return ChannelModel("bsc", eps)


def BiAWGN(sigma2: float) -> ChannelModel:
    return ChannelModel("awgn", sigma2)


def sigma2_from_ebno(ebno_db: float, rate: float) -> float:
    """Noise variance for unit-energy BPSK at the given Eb/N0 and code rate."""
    if not 0.0 < rate <= 1.0:
        raise ChannelConfigError(f"rate must be in (0, 1], got {rate}")
    return 1.0 / (2.0 * rate * 10.0 ** (ebno_db / 10.0))


def sample_llrs(ch: ChannelModel, shape, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. LLRs of the given shape under +1 transmission."""
    if ch.kind == "bec":
        erased = rng.random(shape) < ch.param
        return np.where(erased, 0.0, np.inf)
    if ch.kind == "bsc":
        L = ch.bsc_llr
        flipped = rng.random(shape) < ch.param
        if math.isinf(L):
            return np.full(shape, np.inf)
        return np.where(flipped, -L, L)
    s2 = ch.param
    y = 1.0 + math.sqrt(s2) * rng.standard_normal(shape)
    return (2.0 / s2) * y


def sample_llr_block(
    ch: ChannelModel, n_symbols: int, m: int, rng: np.random.Generator
) -> np.ndarray:
    """``(n_symbols, m)`` block of per-bit LLRs."""
    if n_symbols < 1:
        raise ChannelConfigError("n_symbols must be >= 1")
    return sample_llrs(ch, (n_symbols, m), rng)


def log_initial_messages(llrs: np.ndarray, params: FieldParams) -> np.ndarray:
    """Unnormalised ``log C(gamma) = -sum_{i: gamma_i = 1} Z_i``.

    ``llrs`` has shape ``(..., m)``; the result has shape ``(..., q)``.
    ``+inf`` LLRs give ``-inf`` exactly on the elements with that bit set.
    """
    z = np.asarray(llrs, dtype=float)
    if z.shape[-1] != params.m:
        raise ValueError(f"expected {params.m} LLRs per symbol, got {z.shape[-1]}")
    if np.isnan(z).any():
        raise NumericError("NaN LLR")
    if np.isneginf(z).any():
        raise NumericError("LLR of -inf cannot occur under all-zero transmission")
    bits = params.bits.astype(bool)  # (q, m)
    pos_inf = np.isposinf(z)
    zf = np.where(pos_inf, 0.0, z)
    out = -(zf @ bits.T.astype(float))
    if pos_inf.any():
        killed = (pos_inf[..., None, :] & bits).any(axis=-1)
        out = np.where(killed, -np.inf, out)
    return out


def initial_message(llrs_for_symbol, params: FieldParams) -> np.ndarray:
    """Normalised initial message ``C`` for one symbol (or a batch).

    ``C(gamma)`` is proportional to ``prod_i Pr(y_i | gamma_i)``.
    """
    logc = log_initial_messages(llrs_for_symbol, params)
    top = logc.max(axis=-1, keepdims=True)
    if not np.isfinite(top).all():
        raise NumericError("initial message has no mass")
    c = np.exp(logc - top)
    return c / c.sum(axis=-1, keepdims=True)


def bhattacharyya(ch: ChannelModel) -> float:
    """``B = E[exp(-Z/2)]`` under the channel's L-density."""
    if ch.kind == "bec":
        return ch.param
    if ch.kind == "bsc":
        eps = ch.param
        return 2.0 * math.sqrt(eps * (1.0 - eps))
    return math.exp(-1.0 / (2.0 * ch.param))


def q_function(y: float) -> float:
    """Upper tail of the standard normal distribution."""
    return 0.5 * math.erfc(y / math.sqrt(2.0))


def bsc_tail(k: int, eps: float) -> float:
    """``Pr(sum of k BSC LLRs <= 0)``: at least half of the k bits flipped."""
    if eps == 0.0:
        return 0.0
    terms = [
        math.comb(k, i) * eps ** (k - i) * (1.0 - eps) ** i
        for i in range(0, k // 2 + 1)
    ]
    return math.fsum(terms)


def tail_prob(ch: ChannelModel, k: int) -> float:
    """``Pr(Z_1 + ... + Z_k <= 0)`` for i.i.d. channel LLRs."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if ch.kind == "bec":
        return ch.param**k
    if ch.kind == "bsc":
        return bsc_tail(k, ch.param)
    return q_function(math.sqrt(k) / math.sqrt(ch.param))


def llr_moments(ch: ChannelModel) -> tuple[float, float]:
    """Mean and variance of the finite part of the L-density (AWGN, BSC)."""
    if ch.kind == "awgn":
        return 2.0 / ch.param, 4.0 / ch.param
    if ch.kind == "bsc":
        L = ch.bsc_llr
        eps = ch.param
        mean = (1.0 - 2.0 * eps) * L
        return mean, L * L - mean * mean
    raise ValueError("BEC LLRs take the value +inf; use the erasure rate instead")
