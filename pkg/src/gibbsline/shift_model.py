"""Countable Markov shifts and their nested compact truncations.

A model describes a countable-alphabet incidence structure generatively
(built-in families or an explicit edge list with an optional tail rule).
Truncations are finite irreducible subshifts on prefix alphabets, augmented
with connecting symbols when the prefix alone is not transitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    AlphabetTooLarge,
    BudgetExceeded,
    NoCycleThroughZero,
    NonTransitive,
    ValidationError,
)

# Largest alphabet for which the incidence matrix is materialized; beyond it
# only the structured built-in families are supported (pressure fast path).
DENSE_LIMIT = 4096


class ModelKind(Enum):
    FULL = "full"
    RENEWAL = "renewal"
    CUSTOM = "custom"


class TailRule(Enum):
    NONE = "none"
    FULL_TAIL = "full_tail"
    RENEWAL_TAIL = "renewal_tail"


@dataclass(frozen=True)
class ShiftModel:
    """Incidence structure of a one-sided countable Markov shift.

    FULL: every pair (i, j) is an edge.
    RENEWAL: edges 0 -> j for all j and i -> i-1 for i >= 1.
    CUSTOM: the explicit edge list, extended beyond its largest symbol by
    the tail rule (no tail, full-shift tail, or renewal tail).
    """

    kind: ModelKind
    custom_edges: tuple[tuple[int, int], ...] = ()
    custom_tail_rule: TailRule = TailRule.NONE

    def __post_init__(self):
        if self.kind is ModelKind.CUSTOM:
            if not self.custom_edges:
                raise ValidationError("custom model requires a non-empty edge list")
            for i, j in self.custom_edges:
                if not (isinstance(i, int) and isinstance(j, int)) or i < 0 or j < 0:
                    raise ValidationError(f"custom edge ({i}, {j}) is not a pair of nonnegative integers")
        elif self.custom_edges:
            raise ValidationError("edge lists are only meaningful for custom models")

    @property
    def _edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.custom_edges)

    @property
    def _tail_start(self) -> int:
        """First symbol governed by the tail rule of a custom model."""
        return 1 + max(max(i, j) for i, j in self.custom_edges)

    def is_infinite_alphabet(self) -> bool:
        if self.kind in (ModelKind.FULL, ModelKind.RENEWAL):
            return True
        return self.custom_tail_rule is not TailRule.NONE

    def has_edge(self, i: int, j: int) -> bool:
        if i < 0 or j < 0:
            return False
        if self.kind is ModelKind.FULL:
            return True
        if self.kind is ModelKind.RENEWAL:
            return i == 0 or j == i - 1
        if (i, j) in self._edge_set:
            return True
        rule = self.custom_tail_rule
        if rule is TailRule.NONE:
            return False
        ts = self._tail_start
        if rule is TailRule.FULL_TAIL:
            return i >= ts or j >= ts
        # renewal tail: 0 enters every tail symbol, tail symbols step down
        return (i == 0 and j >= ts) or (i >= ts and j == i - 1)


@dataclass(frozen=True, eq=False)
class Truncation:
    """Finite irreducible subshift: sorted symbol alphabet plus 0/1 incidence.

    For very large built-in truncations the incidence is not materialized
    (`incidence is None`); only structured operations accept those.
    """

    k: int
    alphabet: np.ndarray
    incidence: np.ndarray | None
    period: int
    kind: ModelKind

    @property
    def n_symbols(self) -> int:
        return int(self.alphabet.size)

    def require_incidence(self) -> np.ndarray:
        if self.incidence is None:
            raise AlphabetTooLarge(
                f"operation needs a materialized incidence matrix; alphabet has "
                f"{self.n_symbols} symbols (limit {DENSE_LIMIT})"
            )
        return self.incidence

    def local_index(self) -> dict[int, int]:
        return {int(s): a for a, s in enumerate(self.alphabet)}

    def successor_lists(self) -> list[np.ndarray]:
        inc = self.require_incidence()
        return [np.flatnonzero(inc[a]) for a in range(self.n_symbols)]


# ---------------------------------------------------------------------------
# graph utilities


def strongly_connected_components(adj: np.ndarray) -> list[list[int]]:
    """Tarjan's algorithm, iterative; returns SCCs in reverse topological order."""
    n = adj.shape[0]
    succ = [np.flatnonzero(adj[v]).tolist() for v in range(n)]
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work.pop()
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for off in range(pi, len(succ[v])):
                w = succ[v][off]
                if index[w] == -1:
                    work.append((v, off + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return sccs


def is_irreducible(adj: np.ndarray) -> bool:
    """True when the whole vertex set is one strongly connected component.

    A single vertex counts only with a self-loop (it must carry a cycle).
    """
    n = adj.shape[0]
    if n == 0:
        return False
    if n == 1:
        return bool(adj[0, 0])
    fwd = _reachable(adj, 0)
    bwd = _reachable(adj.T, 0)
    return bool(fwd.all() and bwd.all())


def _reachable(adj: np.ndarray, start: int) -> np.ndarray:
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt: list[int] = []
        for v in frontier:
            for w in np.flatnonzero(adj[v]):
                if not seen[w]:
                    seen[w] = True
                    nxt.append(int(w))
        frontier = nxt
    return seen


def graph_period(adj: np.ndarray) -> int:
    """gcd of all cycle lengths of an irreducible graph.

    Computed as the gcd of (depth[u] + 1 - depth[v]) over all edges (u, v),
    with depths taken from a BFS spanning structure rooted at vertex 0.
    """
    n = adj.shape[0]
    depth = np.full(n, -1, dtype=np.int64)
    depth[0] = 0
    frontier = [0]
    while frontier:
        nxt: list[int] = []
        for v in frontier:
            for w in np.flatnonzero(adj[v]):
                if depth[w] == -1:
                    depth[w] = depth[v] + 1
                    nxt.append(int(w))
        frontier = nxt
    g = 0
    us, vs = np.nonzero(adj)
    for u, v in zip(us, vs):
        if depth[u] >= 0 and depth[v] >= 0:
            g = math.gcd(g, int(depth[u] + 1 - depth[v]))
    return max(g, 1)


# ---------------------------------------------------------------------------
# truncation construction


def build_truncation(model: ShiftModel, k: int, k0_base: int = 1, dense_limit: int = DENSE_LIMIT) -> Truncation:
    """Truncation on the prefix alphabet {0, ..., k + k0_base - 1}.

    For custom models the prefix is augmented by the smallest additional
    symbols (explicit first, then tail symbols) until the induced subgraph
    is irreducible; raises NonTransitive when no finite augmentation works.
    """
    if k < 0:
        raise ValidationError("truncation index must be nonnegative")
    if k0_base < 1:
        raise ValidationError("k0_base must be at least 1")
    m = k + k0_base

    if model.kind is ModelKind.FULL:
        alphabet = np.arange(m, dtype=np.int64)
        if m > dense_limit:
            return Truncation(k, alphabet, None, 1, model.kind)
        inc = np.ones((m, m), dtype=bool)
        return Truncation(k, alphabet, inc, 1, model.kind)

    if model.kind is ModelKind.RENEWAL:
        alphabet = np.arange(m, dtype=np.int64)
        if m > dense_limit:
            return Truncation(k, alphabet, None, 1, model.kind)
        inc = np.zeros((m, m), dtype=bool)
        inc[0, :] = True
        for i in range(1, m):
            inc[i, i - 1] = True
        return Truncation(k, alphabet, inc, graph_period(inc), model.kind)

    return _custom_truncation(model, k, m, dense_limit)


def _custom_truncation(model: ShiftModel, k: int, m: int, dense_limit: int) -> Truncation:
    explicit = sorted({s for e in model.custom_edges for s in e})
    symbols = sorted(set(range(m)))
    tailed = model.custom_tail_rule is not TailRule.NONE
    cap = max(m, (explicit[-1] + 1 if explicit else 0)) + 64

    while True:
        if len(symbols) > dense_limit:
            raise AlphabetTooLarge("custom truncation exceeds the dense alphabet limit")
        inc = _induced_incidence(model, symbols)
        if is_irreducible(inc):
            alphabet = np.asarray(symbols, dtype=np.int64)
            return Truncation(k, alphabet, inc, graph_period(inc), model.kind)
        cand = None
        for s in explicit:
            if s not in symbols:
                cand = s
                break
        if cand is None and tailed:
            cand = symbols[-1] + 1
        if cand is None or cand > cap:
            raise NonTransitive(
                f"prefix alphabet {{0..{m - 1}}} has no irreducible finite augmentation"
            )
        symbols = sorted(set(symbols) | {cand})


def _induced_incidence(model: ShiftModel, symbols: list[int]) -> np.ndarray:
    n = len(symbols)
    inc = np.zeros((n, n), dtype=bool)
    for a, i in enumerate(symbols):
        for b, j in enumerate(symbols):
            inc[a, b] = model.has_edge(i, j)
    return inc


def largest_transitive_core(incidence: np.ndarray) -> Truncation:
    """Restriction to the strongly connected component of symbol 0.

    Raises NoCycleThroughZero when symbol 0 lies on no cycle.
    """
    adj = np.asarray(incidence, dtype=bool)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValidationError("incidence matrix must be square")
    comp0 = None
    for comp in strongly_connected_components(adj):
        if 0 in comp:
            comp0 = comp
            break
    assert comp0 is not None
    if len(comp0) == 1 and not adj[0, 0]:
        raise NoCycleThroughZero("symbol 0 lies in no cycle")
    idx = np.asarray(comp0, dtype=np.int64)
    core = adj[np.ix_(idx, idx)]
    return Truncation(0, idx, core, graph_period(core), ModelKind.CUSTOM)


# ---------------------------------------------------------------------------
# word enumeration and period


def admissible_words(trunc: Truncation, n: int, budget: int = 500_000) -> list[tuple[int, ...]]:
    """All admissible words of length n, in lexicographic symbol order."""
    if n < 1:
        raise ValidationError("word length must be at least 1")
    succ = trunc.successor_lists()
    alphabet = trunc.alphabet
    words: list[tuple[int, ...]] = []
    # iterative DFS in lexicographic order
    stack: list[tuple[tuple[int, ...], int]] = [((), a) for a in range(trunc.n_symbols - 1, -1, -1)]
    while stack:
        prefix, a = stack.pop()
        word = prefix + (a,)
        if len(word) == n:
            words.append(tuple(int(alphabet[b]) for b in word))
            if len(words) > budget:
                raise BudgetExceeded(f"more than {budget} admissible words of length {n}")
            continue
        for b in succ[a][::-1]:
            stack.append((word, int(b)))
    return words


def period(trunc: Truncation) -> int:
    """gcd of cycle lengths; 1 exactly when the truncation is topologically mixing."""
    if trunc.incidence is None:
        return trunc.period
    return graph_period(trunc.incidence)
