"""Regular-representation tables for extensional computation.

Elements are coded as base-``p`` integers (see ``PcPresentation.index_of``).
For every pc generator ``g_j`` we store the permutation ``u -> u g_j`` of
``range(|G|)``.  Tables are built bottom-up along the pc series directly from
the relations, without calling the collector, so comparing table products
with collected products is a genuine cross-check.

Everything here is vectorised over numpy index arrays.
"""

from __future__ import annotations

import functools
import weakref

import numpy as np

from .config import gates
from .pc import PcPresentation


class GateExceeded(RuntimeError):
    """An enumeration was requested above the configured order gate."""


_cache: "weakref.WeakKeyDictionary[PcPresentation, GroupTable]" = weakref.WeakKeyDictionary()


def table_for(pres: PcPresentation, limit: int | None = None) -> "GroupTable":
    limit = gates().table if limit is None else limit
    if pres.order > limit:
        raise GateExceeded(f"|G| = {pres.p}^{pres.n} exceeds table gate {limit}")
    t = _cache.get(pres)
    if t is None:
        t = GroupTable(pres)
        _cache[pres] = t
    return t


def has_table(pres: PcPresentation) -> bool:
    return pres.order <= gates().table


class GroupTable:
    def __init__(self, pres: PcPresentation):
        self.pres = pres
        self.p = p = pres.p
        self.n = n = pres.n
        self.size = p ** n
        dtype = np.int64 if self.size > 2 ** 31 - 1 else np.int32
        self.dtype = dtype
        # weights[i] = p^(n-1-i)
        self.weights = np.array([p ** (n - 1 - i) for i in range(n)], dtype=np.int64)
        self.right = self._build_right_tables()

    # -- construction ------------------------------------------------------

    def _build_right_tables(self) -> list[np.ndarray]:
        p, n, pres = self.p, self.n, self.pres
        if n == 0:
            return []
        # tables for the tail subgroup G_k = <g_k, .., g_{n-1}>, indexed by tail codes
        right: dict[int, np.ndarray] = {n - 1: ((np.arange(p) + 1) % p).astype(self.dtype)}
        for k in range(n - 2, -1, -1):
            m = p ** (n - k - 1)
            digits = _digits(np.arange(m, dtype=np.int64), p, n - k - 1)

            def rmul_fixed(y: tuple[int, ...], start: np.ndarray) -> np.ndarray:
                cur = start.copy()
                for off, e in enumerate(y):
                    tab = right[k + 1 + off]
                    for _ in range(e):
                        cur = tab[cur]
                return cur

            def rmul_var(start: np.ndarray) -> np.ndarray:
                cur = start.copy()
                for off in range(n - k - 1):
                    tab = right[k + 1 + off]
                    col = digits[:, off]
                    for s in range(1, p):
                        mask = col >= s
                        cur[mask] = tab[cur[mask]]
                return cur

            # phi = conjugation by g_k restricted to G_{k+1}
            phi = np.zeros(m, dtype=self.dtype)
            ident = np.arange(m, dtype=self.dtype)
            for off in range(n - k - 1):
                j = k + 1 + off
                y = pres.comms[(j, k)][k + 1:]
                y = tuple(1 if t == off else e for t, e in enumerate(y))
                perm = rmul_fixed(y, ident)
                col = digits[:, off]
                for s in range(1, p):
                    mask = col >= s
                    phi[mask] = perm[phi[mask]]
            w = pres.powers[k][k + 1:]
            w_code = int(sum(e * p ** (n - k - 2 - t) for t, e in enumerate(w)))
            left_w = rmul_var(np.full(m, w_code, dtype=self.dtype))

            new: dict[int, np.ndarray] = {}
            block = np.arange(p, dtype=self.dtype)[:, None] * m
            for j in range(k + 1, n):
                new[j] = (block + right[j][None, :]).reshape(-1)
            rk = np.empty((p, m), dtype=self.dtype)
            for e in range(p - 1):
                rk[e] = (e + 1) * m + phi
            rk[p - 1] = left_w[phi]
            new[k] = rk.reshape(-1)
            right = new
        return [right[j] for j in range(n)]

    # -- coding ------------------------------------------------------------

    def codes(self, exps: np.ndarray) -> np.ndarray:
        return (np.asarray(exps, dtype=np.int64) @ self.weights).astype(self.dtype)

    def code(self, exps) -> int:
        return int(self.pres.index_of(tuple(exps)))

    def digits(self, codes) -> np.ndarray:
        return _digits(np.asarray(codes, dtype=np.int64), self.p, self.n)

    def all(self) -> np.ndarray:
        return np.arange(self.size, dtype=self.dtype)

    # -- arithmetic ----------------------------------------------------------

    def mul(self, a, b) -> np.ndarray:
        """Elementwise product of code arrays (either side may be a scalar)."""
        a = np.asarray(a, dtype=self.dtype)
        b = np.asarray(b, dtype=self.dtype)
        a, b = np.broadcast_arrays(a, b)
        cur = a.copy()
        if b.size == 0:
            return cur
        d = self.digits(b.reshape(-1))
        flat = cur.reshape(-1)
        for j in range(self.n):
            col = d[:, j]
            if not col.any():
                continue
            tab = self.right[j]
            for s in range(1, self.p):
                mask = col >= s
                if not mask.any():
                    break
                flat[mask] = tab[flat[mask]]
        return flat.reshape(cur.shape)

    def rmul_perm(self, y: int) -> np.ndarray:
        """Permutation ``u -> u y`` of all codes."""
        return self.mul(self.all(), np.full(self.size, y, dtype=self.dtype))

    def inv(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=self.dtype)
        cur = a.reshape(-1).copy()
        out = np.zeros((cur.size, self.n), dtype=np.int64)
        for k in range(self.n):
            dk = (cur.astype(np.int64) // self.weights[k]) % self.p
            t = (-dk) % self.p
            out[:, k] = t
            tab = self.right[k]
            for s in range(1, self.p):
                mask = t >= s
                if not mask.any():
                    break
                cur[mask] = tab[cur[mask]]
        return self.codes(out).reshape(a.shape)

    def pow(self, a, k: int) -> np.ndarray:
        a = np.asarray(a, dtype=self.dtype)
        if k < 0:
            a, k = self.inv(a), -k
        result = np.zeros_like(a)
        base = a
        while k:
            if k & 1:
                result = self.mul(result, base)
            k >>= 1
            if k:
                base = self.mul(base, base)
        return result

    def comm(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=self.dtype)
        b = np.asarray(b, dtype=self.dtype)
        return self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b))

    def conj(self, a, b) -> np.ndarray:
        """``a^b``."""
        return self.mul(self.mul(self.inv(b), a), b)

    def orders(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=self.dtype)
        out = np.ones(a.shape, dtype=np.int64)
        cur = a.copy()
        while True:
            live = cur != 0
            if not live.any():
                return out
            out[live] *= self.p
            cur = self.pow(cur, self.p)

    @functools.cached_property
    def inverses(self) -> np.ndarray:
        return self.inv(self.all())

    # -- classes -------------------------------------------------------------

    @functools.cached_property
    def class_labels(self) -> np.ndarray:
        """Conjugacy class label (smallest code in the class) of every element."""
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        allc = self.all()
        rows, cols = [], []
        for j in range(self.n):
            g = np.zeros(self.n, dtype=np.int64)
            g[j] = 1
            perm = self.conj(allc, self.codes(g[None, :])[0])
            rows.append(allc)
            cols.append(perm)
        if not rows:
            return np.zeros(self.size, dtype=np.int64)
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        graph = coo_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(self.size, self.size))
        _, comp = connected_components(graph, directed=True, connection="weak")
        # relabel by smallest member
        first = np.full(comp.max() + 1, self.size, dtype=np.int64)
        np.minimum.at(first, comp, allc.astype(np.int64))
        return first[comp]

    def class_of(self, x: int) -> np.ndarray:
        labels = self.class_labels
        return np.flatnonzero(labels == labels[x])

    # -- subgroups ----------------------------------------------------------

    def span(self, igs_codes: list[int]) -> np.ndarray:
        """All products ``l_1^a_1 ... l_m^a_m`` of an induced sequence, sorted."""
        cur = np.zeros(1, dtype=self.dtype)
        for c in reversed(igs_codes):
            powers = [0]
            for _ in range(self.p - 1):
                powers.append(int(self.mul(powers[-1], c)))
            cur = np.concatenate([self.mul(np.full(cur.size, q, dtype=self.dtype), cur) for q in powers])
        return np.sort(cur)

    def mask(self, codes) -> np.ndarray:
        m = np.zeros(self.size, dtype=bool)
        m[np.asarray(codes, dtype=np.int64)] = True
        return m


def _digits(codes: np.ndarray, p: int, n: int) -> np.ndarray:
    out = np.empty((codes.size, n), dtype=np.int64)
    c = codes.copy()
    for i in range(n - 1, -1, -1):
        c, out[:, i] = np.divmod(c, p)
    return out
