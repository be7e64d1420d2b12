"""Pure numpy implementations of the hot kernels.

Same call signatures and semantics as the compiled ``_kernels`` module; used
when the extension is not built or when ``NBLDPC_PURE_PYTHON=1``.
"""

from __future__ import annotations

import numpy as np


def wht(x: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis."""
    x = np.array(x, dtype=float, copy=True)
    q = x.shape[-1]
    lead = x.shape[:-1]
    h = 1
    while h < q:
        y = x.reshape(lead + (q // (2 * h), 2, h))
        a = y[..., 0, :].copy()
        b = y[..., 1, :]
        y[..., 0, :] = a + b
        y[..., 1, :] = a - b
        h *= 2
    return x


def xor_conv_direct(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``out[x] = sum_y a[y] b[x ^ y]`` along the last axis, O(q^2)."""
    q = a.shape[-1]
    idx = np.arange(q)
    xor = idx[:, None] ^ idx[None, :]  # [x, y] -> x ^ y
    return np.einsum("...y,...xy->...x", a, b[..., xor])


def _rescale(x: np.ndarray) -> np.ndarray:
    m = x.max(axis=-1, keepdims=True)
    return np.where(m > 0, x / np.where(m > 0, m, 1.0), x)


def _normalize_floor(x: np.ndarray, floor: float):
    q = x.shape[-1]
    s = x.sum(axis=-1, keepdims=True)
    bad = ~(s > 0) | ~np.isfinite(s)
    nbad = int(bad.sum())
    x = x / np.where(bad, 1.0, s)
    x = np.where(x < floor, floor, x)
    x = x / x.sum(axis=-1, keepdims=True)
    if nbad:
        x = np.where(bad, 1.0 / q, x)
    return x, nbad


def _groups(ptr: np.ndarray, order: np.ndarray | None = None):
    """Yield ``(degree, node_ids, edge_matrix)`` for each degree class."""
    deg = np.diff(ptr)
    for d in np.unique(deg):
        nodes = np.flatnonzero(deg == d)
        pos = ptr[nodes][:, None] + np.arange(d)[None, :]
        edges = pos if order is None else order[pos]
        yield int(d), nodes, edges


def bp_decode(C, perm, var_ptr, chk_ptr, chk_edges, max_iter, floor, tie_rtol,
              direct, trace_argmax=None, trace_ties=None):
    """Flooding q-ary BP; see ``nbldpc.decoder.decode`` for the contract.

    Returns ``(last_bad, D, iterations_run, period, extinctions)``.
    """
    C = np.asarray(C, dtype=float)
    N, q = C.shape
    perm = np.asarray(perm)
    E = perm.shape[0]
    invperm = np.empty_like(perm)
    np.put_along_axis(invperm, perm, np.broadcast_to(np.arange(q), perm.shape), axis=1)
    vgroups = list(_groups(np.asarray(var_ptr)))
    cgroups = list(_groups(np.asarray(chk_ptr), np.asarray(chk_edges)))

    phi = np.full((E, q), 1.0 / q)
    psi = np.empty((E, q))
    last_bad = np.full(N, -1, dtype=np.int64)
    D = np.empty((N, q))
    extinctions = 0

    def decide(it):
        for d, nodes, edges in vgroups:
            acc = C[nodes]
            for j in range(d):
                acc = _rescale(acc * phi[edges[:, j]])
            acc = acc / acc.sum(axis=-1, keepdims=True)
            D[nodes] = acc
        mx = D.max(axis=1)
        ties = (D >= (mx * (1.0 - tie_rtol))[:, None]).sum(axis=1)
        amax = D.argmax(axis=1)
        bad = (amax != 0) | (ties != 1)
        last_bad[bad] = it
        if trace_argmax is not None:
            trace_argmax[it] = amax
            trace_ties[it] = ties

    def var_update():
        nonlocal extinctions
        for d, nodes, edges in vgroups:
            if d == 0:
                continue
            Cn = C[nodes]
            pre = [Cn]
            for j in range(1, d):
                pre.append(_rescale(pre[-1] * phi[edges[:, j - 1]]))
            suf = [None] * (d + 2)
            suf[d + 1] = None  # all-ones
            for j in range(d, 1, -1):
                t = phi[edges[:, j - 1]] if suf[j + 1] is None else phi[edges[:, j - 1]] * suf[j + 1]
                suf[j] = _rescale(t)
            for j in range(1, d + 1):
                out = pre[j - 1] if suf[j + 1] is None else pre[j - 1] * suf[j + 1]
                out, nb = _normalize_floor(out, floor)
                extinctions += nb
                psi[edges[:, j - 1]] = out

    def check_update():
        nonlocal extinctions
        psich = np.take_along_axis(psi, invperm, axis=1)
        for k, nodes, edges in cgroups:
            if k == 1:
                out = np.zeros((len(nodes), 1, q))
                out[..., 0] = 1.0
            elif k == 2:
                out = psich[edges[:, ::-1]]
            elif not direct:
                T = wht(psich[edges])  # (n, k, q)
                L = np.ones_like(T)
                R = np.ones_like(T)
                for j in range(1, k):
                    L[:, j] = L[:, j - 1] * T[:, j - 1]
                for j in range(k - 2, -1, -1):
                    R[:, j] = R[:, j + 1] * T[:, j + 1]
                out = wht(L * R) / q
            else:
                P = psich[edges]
                delta = np.zeros((len(nodes), q))
                delta[:, 0] = 1.0
                Lc = [delta]
                for j in range(1, k):
                    Lc.append(xor_conv_direct(Lc[-1], P[:, j - 1]))
                Rc = [None] * k
                Rc[k - 1] = delta
                for j in range(k - 2, -1, -1):
                    Rc[j] = xor_conv_direct(P[:, j + 1], Rc[j + 1])
                out = np.stack([xor_conv_direct(Lc[j], Rc[j]) for j in range(k)], axis=1)
            flat_e = edges.reshape(-1)
            res = np.take_along_axis(out.reshape(-1, q), perm[flat_e], axis=1)
            res, nb = _normalize_floor(res, floor)
            extinctions += nb
            phi[flat_e] = res

    decide(0)
    saved = phi.copy()
    saved_it = 0
    power = lam = 1
    period = 0
    it = 0
    for it in range(1, max_iter + 1):
        var_update()
        check_update()
        decide(it)
        if np.array_equal(phi, saved):
            period = it - saved_it
            break
        if lam == power:
            saved = phi.copy()
            saved_it = it
            power *= 2
            lam = 0
        lam += 1
    return last_bad, D.copy(), it, period, extinctions


def count_cycles(ptr, nbr, var, n_checks, max_len):
    counts = np.zeros(max_len + 1, dtype=np.int64)
    for lengths, _, _ in _walk(ptr, nbr, var, n_checks, max_len, store=False):
        counts[lengths] += 1
    return counts


def enumerate_cycles(ptr, nbr, var, n_checks, max_len):
    lengths, chks, vars_ = [], [], []
    for L, cs, us in _walk(ptr, nbr, var, n_checks, max_len, store=True):
        lengths.append(L)
        chks.extend(cs)
        vars_.extend(us)
    return (np.array(lengths, dtype=np.int64), np.array(chks, dtype=np.int64),
            np.array(vars_, dtype=np.int64))


def _walk(ptr, nbr, var, n_checks, max_len, store):
    """Simple cycles of length 2..max_len in a multigraph given in CSR form.

    Each cycle is rooted at its smallest check and reported in the direction
    whose first edge id is smaller than its closing edge id.
    """
    ptr = np.asarray(ptr).tolist()
    nbr = np.asarray(nbr).tolist()
    var = np.asarray(var).tolist()
    onpath = [False] * n_checks
    path_c = [0] * (max_len + 1)
    path_u = [0] * (max_len + 1)

    def dfs(c0, cur, depth):
        path_c[depth] = cur
        for k in range(ptr[cur], ptr[cur + 1]):
            nb = nbr[k]
            u = var[k]
            if nb == c0:
                if depth >= 1 and path_u[0] < u:
                    if store:
                        yield depth + 1, path_c[: depth + 1], path_u[:depth] + [u]
                    else:
                        yield depth + 1, None, None
            elif nb > c0 and not onpath[nb] and depth + 1 < max_len:
                path_u[depth] = u
                onpath[nb] = True
                yield from dfs(c0, nb, depth + 1)
                onpath[nb] = False

    for c0 in range(n_checks):
        onpath[c0] = True
        yield from dfs(c0, c0, 0)
        onpath[c0] = False
