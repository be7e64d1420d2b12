"""Labeled Tanner graphs, ensemble sampling and label design.

A Tanner graph is stored as a flat edge list ordered variable-major (all edges
of variable 0 first, then variable 1, ...).  Each edge carries a nonzero field
element.  Parallel edges are allowed: a degree-2 variable whose two sockets
land on the same check is a weight-1 zigzag cycle.
"""

from __future__ import annotations

import logging
import re
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _backend
from .gf import FieldParams, close_under_inverse, compute_H, get_field

log = logging.getLogger(__name__)

STOPPING_SET_WEIGHT_LIMIT = 12


class GraphConfigError(ValueError):
    pass


class ConstructionError(RuntimeError):
    def __init__(self, msg, **diagnostics):
        super().__init__(f"{msg} ({', '.join(f'{k}={v}' for k, v in diagnostics.items())})")
        self.diagnostics = diagnostics


class AlistParseError(ValueError):
    def __init__(self, msg, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


# ---------------------------------------------------------------------------
# degree distributions


_TERM = re.compile(
    r"^(?P<coef>[0-9.eE+-]*?)\s*\*?\s*(?:(?P<x>x)(?:\s*\^\s*(?P<exp>\d+))?)?$"
)


def parse_poly(text: str) -> dict[int, float]:
    """Parse an edge-perspective polynomial into ``{node degree: coefficient}``.

    Accepts ``"0.5x + 0.5x^2"``, ``"x^2"``, ``"1"`` or ``"2:0.5,3:0.5"`` (the
    latter keyed by node degree directly).
    """
    text = text.strip()
    if ":" in text:
        out: dict[int, float] = {}
        for part in text.split(","):
            d, c = part.split(":")
            out[int(d)] = out.get(int(d), 0.0) + float(c)
        return out
    out = {}
    # split on '+' signs that are not part of an exponent like 1e+3
    terms = re.split(r"(?<![eE])\+", text.replace(" ", ""))
    for term in terms:
        if not term:
            continue
        mt = _TERM.match(term)
        if mt is None or (not mt.group("coef") and not mt.group("x")):
            raise GraphConfigError(f"cannot parse polynomial term {term!r}")
        coef = float(mt.group("coef")) if mt.group("coef") not in ("", None) else 1.0
        if mt.group("x"):
            power = int(mt.group("exp")) if mt.group("exp") else 1
        else:
            power = 0
        out[power + 1] = out.get(power + 1, 0.0) + coef
    return out


def format_poly(coeffs: dict[int, float]) -> str:
    parts = []
    for d in sorted(coeffs):
        c = coeffs[d]
        p = d - 1
        mono = "1" if p == 0 else ("x" if p == 1 else f"x^{p}")
        parts.append(mono if c == 1.0 and p else f"{c:g}{'' if p == 0 else mono}")
    return " + ".join(parts)


@dataclass(frozen=True)
class DegreeDistPair:
    """Edge-perspective pair ``lambda(x) = sum l_i x^(i-1)``, ``rho`` likewise.

    Stored as sorted ``(degree, coefficient)`` tuples.
    """

    lam: tuple[tuple[int, float], ...]
    rho: tuple[tuple[int, float], ...]

    def __post_init__(self):
        for name in ("lam", "rho"):
            raw = getattr(self, name)
            items = dict(raw) if not isinstance(raw, dict) else raw
            items = {int(d): float(c) for d, c in dict(items).items() if float(c) != 0.0}
            if not items:
                raise GraphConfigError(f"{name} is empty")
            if any(d < 1 for d in items) or any(c < 0 for c in items.values()):
                raise GraphConfigError(f"{name} has invalid degrees or negative coefficients")
            if abs(sum(items.values()) - 1.0) > 1e-9:
                raise GraphConfigError(f"{name} coefficients sum to {sum(items.values())}, not 1")
            object.__setattr__(self, name, tuple(sorted(items.items())))

    @classmethod
    def parse(cls, lam: str, rho: str) -> "DegreeDistPair":
        return cls(tuple(parse_poly(lam).items()), tuple(parse_poly(rho).items()))

    @property
    def lam_dict(self) -> dict[int, float]:
        return dict(self.lam)

    @property
    def rho_dict(self) -> dict[int, float]:
        return dict(self.rho)

    def node_fractions(self, side: str = "var") -> dict[int, float]:
        coeffs = self.lam if side == "var" else self.rho
        w = {d: c / d for d, c in coeffs}
        tot = sum(w.values())
        return {d: v / tot for d, v in w.items()}

    def design_rate(self) -> float:
        a = sum(c / d for d, c in self.lam)
        b = sum(c / d for d, c in self.rho)
        return 1.0 - b / a


def mu(dd: DegreeDistPair) -> float:
    """``lambda'(0) * rho'(1)``."""
    lam2 = dd.lam_dict.get(2, 0.0)
    return lam2 * sum((d - 1) * c for d, c in dd.rho)


def _as_int(x: float, what: str) -> int:
    r = round(x)
    if abs(x - r) > 1e-6 * max(1.0, abs(x)):
        raise GraphConfigError(f"{what} = {x} is not an integer")
    return int(r)


def node_counts(dd: DegreeDistPair, N: int) -> tuple[dict[int, int], dict[int, int]]:
    """Variable and check node counts per degree for length ``N``."""
    if N < 1:
        raise GraphConfigError("N must be >= 1")
    vfrac = dd.node_fractions("var")
    vcount = {d: _as_int(N * f, f"number of degree-{d} variable nodes") for d, f in vfrac.items()}
    if sum(vcount.values()) != N:
        raise GraphConfigError("variable node counts do not add up to N")
    E = sum(d * n for d, n in vcount.items())
    ccount = {d: _as_int(E * c / d, f"number of degree-{d} check nodes") for d, c in dd.rho}
    if sum(d * n for d, n in ccount.items()) != E:
        raise GraphConfigError("check sockets do not match variable sockets")
    vcount = {d: n for d, n in vcount.items() if n}
    ccount = {d: n for d, n in ccount.items() if n}
    if not vcount or not ccount:
        raise GraphConfigError("empty degree class")
    return vcount, ccount


# ---------------------------------------------------------------------------
# Tanner graph


@dataclass(frozen=True, eq=False)
class TannerGraph:
    N: int
    M: int
    field: FieldParams
    edge_var: np.ndarray
    edge_check: np.ndarray
    edge_label: np.ndarray

    def __post_init__(self):
        ev = np.ascontiguousarray(self.edge_var, dtype=np.int64)
        ec = np.ascontiguousarray(self.edge_check, dtype=np.int64)
        el = np.ascontiguousarray(self.edge_label, dtype=np.int64)
        if not (ev.shape == ec.shape == el.shape) or ev.ndim != 1:
            raise GraphConfigError("edge arrays must be 1-D and of equal length")
        if ev.size and (np.any(np.diff(ev) < 0)):
            raise GraphConfigError("edges must be ordered by variable index")
        if ev.size and (ev.min() < 0 or ev.max() >= self.N or ec.min() < 0 or ec.max() >= self.M):
            raise GraphConfigError("edge endpoint out of range")
        if el.size and (el.min() < 1 or el.max() >= self.field.q):
            raise GraphConfigError("edge labels must be nonzero field elements")
        for name, arr in (("edge_var", ev), ("edge_check", ec), ("edge_label", el)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __eq__(self, other):
        return (
            isinstance(other, TannerGraph)
            and self.N == other.N
            and self.M == other.M
            and self.field == other.field
            and np.array_equal(self.edge_var, other.edge_var)
            and np.array_equal(self.edge_check, other.edge_check)
            and np.array_equal(self.edge_label, other.edge_label)
        )

    __hash__ = None

    @property
    def E(self) -> int:
        return int(self.edge_var.size)

    @cached_property
    def var_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_var, minlength=self.N)

    @cached_property
    def check_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_check, minlength=self.M)

    @cached_property
    def var_ptr(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.var_degrees))).astype(np.int64)

    @cached_property
    def check_edges(self) -> np.ndarray:
        return np.argsort(self.edge_check, kind="stable").astype(np.int64)

    @cached_property
    def check_ptr(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.check_degrees))).astype(np.int64)

    def edges_of_var(self, v: int) -> np.ndarray:
        return np.arange(self.var_ptr[v], self.var_ptr[v + 1])

    def edges_of_check(self, c: int) -> np.ndarray:
        return self.check_edges[self.check_ptr[c]: self.check_ptr[c + 1]]

    def with_labels(self, labels) -> "TannerGraph":
        return TannerGraph(self.N, self.M, self.field, self.edge_var, self.edge_check, labels)

    def syndrome(self, x) -> np.ndarray:
        """``H x`` over GF(2^m) for a symbol vector ``x``."""
        x = np.asarray(x, dtype=np.int64)
        prods = self.field.mul_table[self.edge_label, x[self.edge_var]]
        out = np.zeros(self.M, dtype=np.int64)
        np.bitwise_xor.at(out, self.edge_check, prods)
        return out


def zigzag_code(field: FieldParams, h_diag, h_next) -> TannerGraph:
    """Single zigzag cycle of weight ``s = len(h_diag)``.

    Check ``i`` joins variable ``i`` (label ``h_diag[i]``) and variable
    ``i+1 mod s`` (label ``h_next[i]``).  Each variable lists its edge to check
    ``i`` before its edge to check ``i-1``.
    """
    s = len(h_diag)
    if s < 1 or len(h_next) != s:
        raise GraphConfigError("need s >= 1 diagonal and off-diagonal labels")
    ev, ec, el = [], [], []
    for i in range(s):
        ev += [i, i]
        ec += [i, (i - 1) % s]
        el += [h_diag[i], h_next[(i - 1) % s]]
    return TannerGraph(s, s, field, ev, ec, el)


def zigzag_code_from_gammas(field: FieldParams, gammas) -> TannerGraph:
    """Zigzag code with ``h_{i,i} = 1`` and ``h_{i,i+1} = gamma_i``."""
    gammas = [int(g) for g in gammas]
    return zigzag_code(field, [1] * len(gammas), gammas)


# ---------------------------------------------------------------------------
# ensembles


@dataclass(frozen=True)
class EnsembleSpec:
    """Expurgated ensemble: no stopping sets of weight < ``s_g`` and no zigzag
    cycles of weight in ``[s_g, s_c - 1]`` whose cycle parameter is in ``H``."""

    N: int
    m: int
    degrees: DegreeDistPair
    s_g: int = 1
    s_c: int = 1
    H: frozenset = frozenset()
    prim_poly: int = 0

    def __post_init__(self):
        if not 1 <= self.s_g <= self.s_c:
            raise GraphConfigError("need 1 <= s_g <= s_c")
        f = self.field
        H = frozenset(int(h) for h in self.H)
        if any(not 0 < h < f.q for h in H):
            raise GraphConfigError("H must contain nonzero field elements only")
        closed = close_under_inverse(f, H)
        if closed != H:
            warnings.warn("forbidden set H is not closed under inversion; closing it", stacklevel=2)
        object.__setattr__(self, "H", closed)

    @property
    def field(self) -> FieldParams:
        return get_field(self.m, self.prim_poly)

    @property
    def mu(self) -> float:
        return mu(self.degrees)


def resolve_H(name_or_set, field: FieldParams) -> frozenset:
    """``"proposed"`` -> H_m, ``"cc"``/``"cycle-cancellation"`` -> {1},
    ``"none"`` -> {}, or a comma list of alpha exponents such as ``"0,3,5"``."""
    if not isinstance(name_or_set, str):
        return frozenset(int(h) for h in name_or_set)
    key = name_or_set.strip().lower()
    if key in ("proposed", "hm", "h_m"):
        return compute_H(field)
    if key in ("cc", "cycle-cancellation", "cycle_cancellation", "1"):
        return frozenset({1})
    if key in ("none", ""):
        return frozenset()
    return frozenset(field.exp(int(k)) for k in key.split(","))


def sample_graph(spec: EnsembleSpec, rng: np.random.Generator) -> TannerGraph:
    """Configuration-model sample from LDPC(N, m, lambda, rho) with i.i.d.
    uniform nonzero labels."""
    vcount, ccount = node_counts(spec.degrees, spec.N)
    var_deg = np.concatenate([np.full(n, d) for d, n in sorted(vcount.items())])
    chk_deg = np.concatenate([np.full(n, d) for d, n in sorted(ccount.items())])
    var_sockets = np.repeat(np.arange(spec.N), var_deg)
    chk_sockets = np.repeat(np.arange(chk_deg.size), chk_deg)
    E = var_sockets.size
    perm = rng.permutation(E)
    labels = rng.integers(1, spec.field.q, size=E)
    return TannerGraph(spec.N, int(chk_deg.size), spec.field, var_sockets, chk_sockets[perm], labels)


# ---------------------------------------------------------------------------
# zigzag cycles


@dataclass(frozen=True)
class ZigzagCycle:
    """A zigzag cycle in canonical orientation.

    ``checks[i]`` sits between ``vars[i]`` and ``vars[(i+1) % s]``;
    ``left_edges[i]`` joins ``checks[i]`` to ``vars[i]`` and ``right_edges[i]``
    joins it to ``vars[i+1]``.  ``labels[i]`` is the pair
    ``(h_{i,i}, h_{i,i+1})``.
    """

    vars: tuple[int, ...]
    checks: tuple[int, ...]
    left_edges: tuple[int, ...]
    right_edges: tuple[int, ...]
    labels: tuple[tuple[int, int], ...]
    beta: int

    @property
    def weight(self) -> int:
        return len(self.vars)

    @property
    def edges(self) -> tuple[int, ...]:
        return self.left_edges + self.right_edges


def cycle_parameter_from_labels(field: FieldParams, labels) -> int:
    """Product of ``h_{i,i}^{-1} h_{i,i+1}`` over the cycle."""
    n = field.q - 1
    k = 0
    for h_ii, h_next in labels:
        k += field.log(h_next) - field.log(h_ii)
    return field.exp(k % n)


def cycle_parameter(z: ZigzagCycle, field: FieldParams) -> int:
    return cycle_parameter_from_labels(field, z.labels)


def _contracted(g: TannerGraph):
    """Multigraph on checks with one edge per degree-2 variable.

    Returns CSR adjacency (excluding self-loops) and the list of self-loop
    variables.
    """
    deg2 = np.flatnonzero(g.var_degrees == 2)
    e0 = g.var_ptr[deg2]
    ca = g.edge_check[e0]
    cb = g.edge_check[e0 + 1]
    loops = deg2[ca == cb]
    keep = ca != cb
    v, ca, cb = deg2[keep], ca[keep], cb[keep]
    src = np.concatenate([ca, cb])
    dst = np.concatenate([cb, ca])
    var = np.concatenate([v, v])
    order = np.lexsort((var, src))
    src, dst, var = src[order], dst[order], var[order]
    ptr = np.zeros(g.M + 1, dtype=np.int64)
    np.add.at(ptr, src + 1, 1)
    ptr = np.cumsum(ptr)
    return ptr, dst.astype(np.int64), var.astype(np.int64), loops


def _edge_to(g: TannerGraph, v: int, c: int, skip: int = -1) -> int:
    for e in range(g.var_ptr[v], g.var_ptr[v + 1]):
        if g.edge_check[e] == c and e != skip:
            return int(e)
    raise AssertionError("variable not adjacent to check")


def _canonical(g: TannerGraph, vs: list[int], cs: list[int]) -> ZigzagCycle:
    s = len(vs)
    r = vs.index(min(vs))
    vs = vs[r:] + vs[:r]
    cs = cs[r:] + cs[:r]
    flip = False
    if s >= 3:
        flip = vs[-1] < vs[1]
    elif s == 2:
        flip = cs[1] < cs[0]
    if flip:
        vs = [vs[0]] + vs[1:][::-1]
        cs = cs[::-1]
    left, right = [], []
    for i in range(s):
        left.append(_edge_to(g, vs[i], cs[i]))
        right.append(_edge_to(g, vs[(i + 1) % s], cs[i]))
    labels = tuple((int(g.edge_label[a]), int(g.edge_label[b])) for a, b in zip(left, right))
    return ZigzagCycle(
        tuple(int(v) for v in vs),
        tuple(int(c) for c in cs),
        tuple(left),
        tuple(right),
        labels,
        cycle_parameter_from_labels(g.field, labels),
    )


def find_zigzag_cycles(g: TannerGraph, max_weight: int) -> list[ZigzagCycle]:
    """All zigzag cycles of weight ``<= max_weight``, each once.

    Sorted by weight, then by variable tuple.
    """
    if max_weight < 1:
        return []
    ptr, nbr, var, loops = _contracted(g)
    out = []
    for v in loops:
        e0 = int(g.var_ptr[v])
        labels = ((int(g.edge_label[e0]), int(g.edge_label[e0 + 1])),)
        c = int(g.edge_check[e0])
        out.append(
            ZigzagCycle((int(v),), (c,), (e0,), (e0 + 1,), labels,
                        cycle_parameter_from_labels(g.field, labels))
        )
    if max_weight >= 2:
        lengths, chk_flat, var_flat = _backend.kernels.enumerate_cycles(ptr, nbr, var, g.M, max_weight)
        pos = 0
        for L in lengths:
            cs = [int(c) for c in chk_flat[pos: pos + L]]
            us = [int(u) for u in var_flat[pos: pos + L]]
            pos += L
            # path c0 -u0- c1 -u1- ... c_{L-1} -u_{L-1}- c0; check between u_i and u_{i+1} is c_{i+1}
            out.append(_canonical(g, us, cs[1:] + cs[:1]))
    out.sort(key=lambda z: (z.weight, z.vars, z.checks))
    return out


def count_zigzag_cycles(g: TannerGraph, max_weight: int) -> np.ndarray:
    """``counts[s]`` = number of zigzag cycles of weight ``s`` (index 0 unused)."""
    ptr, nbr, var, loops = _contracted(g)
    counts = np.zeros(max_weight + 1, dtype=np.int64)
    if max_weight >= 2:
        counts[:] = _backend.kernels.count_cycles(ptr, nbr, var, g.M, max_weight)
    if max_weight >= 1:
        counts[1] = loops.size
    counts[0] = 0
    return counts


# ---------------------------------------------------------------------------
# stopping sets


def find_stopping_sets(g: TannerGraph, max_weight: int) -> list[frozenset]:
    """All nonempty stopping sets with at most ``max_weight`` variables.

    Multiplicity counts: a check joined twice to the same variable sees that
    variable twice.
    """
    if max_weight > STOPPING_SET_WEIGHT_LIMIT:
        raise GraphConfigError(
            f"max_weight {max_weight} exceeds the safety limit {STOPPING_SET_WEIGHT_LIMIT}"
        )
    if max_weight < 1 or g.N == 0:
        return []
    var_checks = [g.edge_check[g.var_ptr[v]: g.var_ptr[v + 1]].tolist() for v in range(g.N)]
    check_vars = [sorted(set(g.edge_var[g.edges_of_check(c)].tolist())) for c in range(g.M)]
    dmax = max(1, int(g.var_degrees.max()))
    found: set[frozenset] = set()
    seen: set[frozenset] = set()

    def grow(members: frozenset, cnt: dict, vmin: int):
        if members in seen:
            return
        seen.add(members)
        dangling = [c for c, k in cnt.items() if k == 1]
        if not dangling:
            found.add(members)
            if len(members) < max_weight:
                # any stopping superset is this set plus another stopping part
                for u in range(vmin + 1, g.N):
                    if u not in members:
                        add(members, cnt, u, vmin)
            return
        if len(members) + -(-len(dangling) // dmax) > max_weight:
            return
        c = min(dangling, key=lambda c: len(check_vars[c]))
        for u in check_vars[c]:
            if u > vmin and u not in members:
                add(members, cnt, u, vmin)

    def add(members, cnt, u, vmin):
        new = dict(cnt)
        for c in var_checks[u]:
            new[c] = new.get(c, 0) + 1
        grow(members | {u}, new, vmin)

    for v in range(g.N):
        cnt: dict[int, int] = {}
        for c in var_checks[v]:
            cnt[c] = cnt.get(c, 0) + 1
        grow(frozenset({v}), cnt, v)
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def has_small_stopping_set(g: TannerGraph, below: int) -> bool:
    if below <= 1:
        return False
    if below == 2:
        # weight-1 stopping set: every check of v sees it at least twice
        for v in range(g.N):
            cs = g.edge_check[g.var_ptr[v]: g.var_ptr[v + 1]]
            if cs.size and np.all(np.unique(cs, return_counts=True)[1] >= 2):
                return True
        return False
    return bool(find_stopping_sets(g, below - 1))


# ---------------------------------------------------------------------------
# expurgation


@dataclass
class ExpurgationStats:
    graph_draws: int = 0
    label_sweeps: int = 0
    label_redraws: int = 0
    cycles_checked: int = 0
    label_failures: int = 0


def _betas(field: FieldParams, cycles, labels: np.ndarray) -> np.ndarray:
    lg = field.log_table
    n = field.q - 1
    out = np.empty(len(cycles), dtype=np.int64)
    for i, z in enumerate(cycles):
        k = int(lg[labels[list(z.right_edges)]].sum() - lg[labels[list(z.left_edges)]].sum())
        out[i] = field.antilog_table[k % n]
    return out


def _repair_labels(g: TannerGraph, cycles, bad: np.ndarray, rng, max_sweeps: int, stats):
    f = g.field
    labels = np.array(g.edge_label)
    for _ in range(max_sweeps):
        viol = np.flatnonzero(bad[_betas(f, cycles, labels)])
        if viol.size == 0:
            return labels
        stats.label_sweeps += 1
        for i in viol:
            z = cycles[i]
            if not bad[_betas(f, [z], labels)[0]]:
                continue
            e = z.edges[rng.integers(len(z.edges))]
            labels[e] = rng.integers(1, f.q)
            stats.label_redraws += 1
    return None


def expurgate(
    spec: EnsembleSpec,
    rng: np.random.Generator,
    max_graph_draws: int = 1000,
    max_label_sweeps: int = 200,
    stats: ExpurgationStats | None = None,
) -> TannerGraph:
    """Draw a code from the expurgated ensemble.

    Graphs are rejection-sampled until they have no stopping set of weight
    below ``s_g``.  Labels are then repaired: every zigzag cycle of weight in
    ``[s_g, s_c-1]`` whose cycle parameter lies in ``H`` gets one of its edge
    labels redrawn uniformly, sweeping until no cycle violates.  Some graphs
    admit no valid labelling at all (overlapping short cycles can make the
    constraints contradictory), so a graph whose repair does not finish within
    ``max_label_sweeps`` is discarded and a new one drawn.
    """
    stats = stats if stats is not None else ExpurgationStats()
    f = spec.field
    bad = np.zeros(f.q, dtype=bool)
    bad[list(spec.H)] = True
    for _ in range(max_graph_draws):
        g = sample_graph(spec, rng)
        stats.graph_draws += 1
        if has_small_stopping_set(g, spec.s_g):
            continue
        if spec.s_c <= spec.s_g or not spec.H:
            return g
        cycles = [z for z in find_zigzag_cycles(g, spec.s_c - 1) if z.weight >= spec.s_g]
        stats.cycles_checked += len(cycles)
        if not cycles:
            return g
        labels = _repair_labels(g, cycles, bad, rng, max_label_sweeps, stats)
        if labels is not None:
            return g.with_labels(labels)
        stats.label_failures += 1
    raise ConstructionError(
        "no admissible code found",
        s_g=spec.s_g, s_c=spec.s_c, H=len(spec.H), draws=stats.graph_draws,
        label_failures=stats.label_failures,
    )


# ---------------------------------------------------------------------------
# extended alist


def export_code(g: TannerGraph) -> str:
    """Extended alist text.

    Line 1 ``N M q``; line 2 max variable/check degree; then the variable and
    check degree lists; then one line per variable and per check whose
    entries are ``index:label_exponent`` with 1-based indices.  A leading
    ``#`` comment records the field polynomial.
    """
    f = g.field
    lines = [f"# prim_poly {f.prim_poly:#x}", f"{g.N} {g.M} {f.q}"]
    vd, cd = g.var_degrees, g.check_degrees
    lines.append(f"{int(vd.max(initial=0))} {int(cd.max(initial=0))}")
    lines.append(" ".join(str(int(d)) for d in vd))
    lines.append(" ".join(str(int(d)) for d in cd))
    lg = f.log_table
    for v in range(g.N):
        es = g.edges_of_var(v)
        lines.append(" ".join(f"{g.edge_check[e] + 1}:{lg[g.edge_label[e]]}" for e in es))
    for c in range(g.M):
        es = g.edges_of_check(c)
        lines.append(" ".join(f"{g.edge_var[e] + 1}:{lg[g.edge_label[e]]}" for e in es))
    return "\n".join(lines) + "\n"


def import_code(text: str) -> TannerGraph:
    prim_poly = 0
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s.startswith("#"):
            mt = re.match(r"#\s*prim_poly\s+(\S+)", s)
            if mt:
                try:
                    prim_poly = int(mt.group(1), 0)
                except ValueError:
                    raise AlistParseError("bad prim_poly", lineno) from None
            continue
        rows.append((lineno, s.split()))
    if not rows:
        raise AlistParseError("empty file", 1)

    def ints(idx, count=None):
        lineno, toks = rows[idx]
        try:
            vals = [int(t) for t in toks]
        except ValueError:
            raise AlistParseError("expected integers", lineno) from None
        if count is not None and len(vals) != count:
            raise AlistParseError(f"expected {count} values, got {len(vals)}", lineno)
        return vals

    N, M, q = ints(0, 3)
    m = q.bit_length() - 1
    if q != 1 << m:
        raise AlistParseError(f"q={q} is not a power of two", rows[0][0])
    try:
        f = get_field(m, prim_poly)
    except ValueError as exc:
        raise AlistParseError(str(exc), rows[0][0]) from None
    if len(rows) < 4 + N + M:
        raise AlistParseError("file truncated", rows[-1][0])
    ints(1, 2)
    vdeg = ints(2, N)
    cdeg = ints(3, M)

    def entries(idx, deg, limit):
        lineno, toks = rows[idx]
        if len(toks) != deg:
            raise AlistParseError(f"expected {deg} entries, got {len(toks)}", lineno)
        out = []
        for t in toks:
            try:
                a, b = t.split(":")
                j, k = int(a), int(b)
            except ValueError:
                raise AlistParseError(f"bad entry {t!r}", lineno) from None
            if not 1 <= j <= limit:
                raise AlistParseError(f"index {j} out of range", lineno)
            if not 0 <= k < q - 1:
                raise AlistParseError(f"label exponent {k} out of range", lineno)
            out.append((j - 1, k))
        return out

    ev, ec, el = [], [], []
    for v in range(N):
        for c, k in entries(4 + v, vdeg[v], M):
            ev.append(v)
            ec.append(c)
            el.append(f.exp(k))
    from_checks = []
    for c in range(M):
        for v, k in entries(4 + N + c, cdeg[c], N):
            from_checks.append((v, c, k))
    from_vars = sorted(zip(ev, ec, (f.log(h) for h in el)))
    if sorted(from_checks) != from_vars:
        raise AlistParseError("check lists disagree with variable lists", rows[4 + N][0])
    return TannerGraph(N, M, f, ev, ec, el)
