"""Zero-temperature objects on finite truncations.

Maximum ergodic average beta as a max mean cycle (Karp dynamic program with
a brute-force oracle), max-plus subactions, the critical graph of tight
edges with its transitive components, and stabilization detection across
the truncation schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BudgetExceeded,
    EmptyCriticalGraph,
    NoConvergence,
    NonTransitive,
    NotStabilized,
    SolverError,
    ValidationError,
)
from .potential import MarkovPotential, check_summability
from .rpf_finite import MarkovMeasure, equilibrium, perron
from .shift_model import (
    ShiftModel,
    Truncation,
    build_truncation,
    graph_period,
    strongly_connected_components,
)

_NEG_INF = -np.inf


@dataclass(frozen=True, eq=False)
class Component:
    """One transitive component of the critical graph."""

    symbols: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    h_top: float
    pressure: float
    measure: MarkovMeasure


@dataclass(frozen=True, eq=False)
class CriticalDecomposition:
    """Max cycle mean, subaction, tight edges and critical components."""

    beta: float
    subaction: np.ndarray
    tight_edges: tuple[tuple[int, int], ...]
    components: tuple[Component, ...]
    maximal_components: tuple[int, ...]
    witness_cycle: tuple[int, ...]
    tie_tol_used: float


@dataclass(frozen=True)
class K0Report:
    """Heuristic stabilization index of beta_k and the critical structure."""

    k0: int
    window: int
    heuristic: bool
    ks: tuple[int, ...]
    betas: tuple[float, ...]


def _weight_matrix(trunc: Truncation, f: MarkovPotential) -> np.ndarray:
    inc = trunc.require_incidence()
    vals = f.value_grid(trunc.alphabet, trunc.alphabet)
    return np.where(inc, vals, _NEG_INF)


def max_mean_cycle(trunc: Truncation, f: MarkovPotential) -> tuple[float, tuple[int, ...]]:
    """Maximum cycle mean and a witness cycle (as a symbol tuple).

    Karp's dynamic program over walk lengths 0..n from source 0; the witness
    is reconstructed from back-pointers and beta is returned as the exact
    mean of the witness cycle.
    """
    W = _weight_matrix(trunc, f)
    n = trunc.n_symbols
    D = np.full((n + 1, n), _NEG_INF)
    D[0, 0] = 0.0
    parent = np.full((n + 1, n), -1, dtype=np.int64)
    for r in range(1, n + 1):
        cand = D[r - 1][:, None] + W
        parent[r] = np.argmax(cand, axis=0)
        D[r] = cand[parent[r], np.arange(n)]
    best = _NEG_INF
    best_v = -1
    for v in range(n):
        if not np.isfinite(D[n, v]):
            continue
        finite_r = [r for r in range(n) if np.isfinite(D[r, v])]
        q = min((D[n, v] - D[r, v]) / (n - r) for r in finite_r)
        if q > best:
            best, best_v = q, v
    if best_v < 0:
        raise SolverError("no cycle reachable from symbol 0")
    cycle = _extract_cycle(W, parent, best_v, n, best)
    mean = _cycle_mean(W, cycle)
    symbols = tuple(int(trunc.alphabet[v]) for v in cycle)
    # canonical rotation: start at the smallest symbol
    pivot = symbols.index(min(symbols))
    return mean, symbols[pivot:] + symbols[:pivot]


def _cycle_mean(W: np.ndarray, cycle: list[int]) -> float:
    total = 0.0
    L = len(cycle)
    for a in range(L):
        total += W[cycle[a], cycle[(a + 1) % L]]
    return total / L


def _extract_cycle(W: np.ndarray, parent: np.ndarray, v: int, n: int, target: float) -> list[int]:
    path = [v]
    for r in range(n, 0, -1):
        v = int(parent[r, v])
        path.append(v)
    path.reverse()  # forward walk of length n from the source
    best_cycle: list[int] | None = None
    best_mean = _NEG_INF
    seen: dict[int, int] = {}
    for pos, u in enumerate(path):
        if u in seen:
            cyc = path[seen[u]:pos]
            mean = _cycle_mean(W, cyc)
            if mean > best_mean:
                best_mean, best_cycle = mean, cyc
        seen[u] = pos
    if best_cycle is None or abs(best_mean - target) > 1e-7 * max(1.0, abs(target)):
        # fall back to enumeration on small graphs
        if n <= 12:
            _, cyc = _brute_force_cycles(W, n)
            return cyc
        raise SolverError("witness-cycle reconstruction failed")
    return best_cycle


def _brute_force_cycles(W: np.ndarray, Lmax: int) -> tuple[float, list[int]]:
    n = W.shape[0]
    best = _NEG_INF
    best_cycle: list[int] = []

    def dfs(start: int, v: int, path: list[int], total: float):
        nonlocal best, best_cycle
        for w in range(n):
            weight = W[v, w]
            if not np.isfinite(weight):
                continue
            if w == start:
                mean = (total + weight) / len(path)
                if mean > best:
                    best, best_cycle = mean, path.copy()
            elif w > start and w not in path and len(path) < Lmax:
                path.append(w)
                dfs(start, w, path, total + weight)
                path.pop()

    for s in range(n):
        dfs(s, s, [s], 0.0)
    return best, best_cycle


def brute_force_max_mean(trunc: Truncation, f: MarkovPotential, Lmax: int) -> float:
    """Max mean over all simple cycles up to length Lmax (independent oracle)."""
    if trunc.n_symbols > 10:
        raise BudgetExceeded("brute-force cycle enumeration limited to 10 symbols")
    if Lmax > trunc.n_symbols:
        raise BudgetExceeded("Lmax exceeds the alphabet size")
    W = _weight_matrix(trunc, f)
    best, _ = _brute_force_cycles(W, Lmax)
    return best


def subaction(
    trunc: Truncation,
    f: MarkovPotential,
    beta: float,
    witness: tuple[int, ...] | None = None,
    tie_tol: float = 1e-9,
) -> np.ndarray:
    """Max-plus vector v with f(i,j) - beta + v_j - v_i <= 0, tight on a spanning set.

    v_i is the best reduced weight of a walk from i to a critical vertex,
    computed by damped value iteration (at most n sweeps); gauge v[0] = 0.
    """
    if witness is None:
        _, witness = max_mean_cycle(trunc, f)
    idx = trunc.local_index()
    c = idx[min(witness)]
    W = _weight_matrix(trunc, f)
    G = W - beta
    n = trunc.n_symbols
    v = np.full(n, _NEG_INF)
    v[c] = 0.0
    for _ in range(n + 1):
        with np.errstate(invalid="ignore"):
            candidate = np.max(G + v[None, :], axis=1)
        new = np.maximum(v, candidate)
        if np.allclose(new, v, rtol=0.0, atol=tie_tol / 100.0, equal_nan=True):
            v = new
            break
        v = new
    if not np.all(np.isfinite(v)):
        raise NoConvergence(n + 1, math.inf)
    with np.errstate(invalid="ignore"):
        resid = float(np.max(np.max(G + v[None, :], axis=1) - v))
    if resid > tie_tol / 10.0:
        raise NoConvergence(n + 1, resid)
    return v - v[0]


def critical_graph(
    trunc: Truncation,
    f: MarkovPotential,
    beta: float,
    v: np.ndarray,
    tie_tol: float = 1e-9,
    witness: tuple[int, ...] | None = None,
) -> CriticalDecomposition:
    """Tight-edge graph and its transitive components.

    Components are the strongly connected pieces of the tight graph that
    carry a cycle; every cycle made of tight edges has mean exactly beta,
    so their union is the maximizing subshift of the truncation.
    """
    W = _weight_matrix(trunc, f)
    with np.errstate(invalid="ignore"):
        residue = W - beta + v[None, :] - v[:, None]
    tight = np.isfinite(W) & (np.abs(residue) <= tie_tol)
    if not tight.any():
        raise EmptyCriticalGraph(tie_tol)
    alphabet = trunc.alphabet
    tight_edges = tuple(
        (int(alphabet[a]), int(alphabet[b])) for a, b in zip(*np.nonzero(tight))
    )
    comps = []
    for comp in strongly_connected_components(tight):
        sub = tight[np.ix_(comp, comp)]
        if len(comp) == 1 and not sub[0, 0]:
            continue
        comps.append((comp, sub))
    if not comps:
        raise EmptyCriticalGraph(tie_tol)

    components = []
    for comp, sub in comps:
        syms = tuple(int(alphabet[a]) for a in comp)
        edges = tuple(
            (int(alphabet[comp[a]]), int(alphabet[comp[b]])) for a, b in zip(*np.nonzero(sub))
        )
        d = graph_period(sub)
        # entropy of the component subshift: zero-potential pressure
        log_zero = np.where(sub, 0.0, _NEG_INF)
        h_top = perron(log_zero, period=d).log_lambda
        # restricted pressure of f: solve for f - beta, then shift back
        vals = f.value_grid(np.asarray(syms, dtype=np.int64), np.asarray(syms, dtype=np.int64))
        log_red = np.where(sub, vals - beta, _NEG_INF)
        pd = perron(log_red, period=d)
        meas = equilibrium(pd, log_red, np.asarray(syms, dtype=np.int64))
        components.append(Component(syms, edges, float(h_top), float(beta + pd.log_lambda), meas))

    components.sort(key=lambda c: (-c.pressure, c.symbols[0]))
    p_max = max(c.pressure for c in components)
    maximal = tuple(j for j, c in enumerate(components) if c.pressure >= p_max - 1e-8)
    if witness is None:
        _, witness = max_mean_cycle(trunc, f)
    return CriticalDecomposition(
        beta=beta,
        subaction=v,
        tight_edges=tight_edges,
        components=tuple(components),
        maximal_components=maximal,
        witness_cycle=witness,
        tie_tol_used=tie_tol,
    )


def critical_decomposition(trunc: Truncation, f: MarkovPotential, tie_tol: float = 1e-9) -> CriticalDecomposition:
    """Full pipeline beta -> subaction -> critical graph, with the tie-tolerance
    ladder: on an empty critical graph the tolerance is widened tenfold up to 1e-6."""
    beta, witness = max_mean_cycle(trunc, f)
    tol = tie_tol
    while True:
        try:
            v = subaction(trunc, f, beta, witness=witness, tie_tol=tol)
            return critical_graph(trunc, f, beta, v, tie_tol=tol, witness=witness)
        except EmptyCriticalGraph:
            if tol >= 1e-6:
                raise
            tol *= 10.0


def _structure_key(dec: CriticalDecomposition) -> tuple:
    return tuple(sorted((c.symbols, tuple(sorted(c.edges))) for c in dec.components))


def detect_k0(
    model: ShiftModel,
    f: MarkovPotential,
    ks: tuple[int, ...] | None = None,
    stability_window: int = 3,
    tie_tol: float = 1e-9,
    beta_tol: float = 1e-10,
) -> K0Report:
    """Smallest k whose beta and critical structure repeat over the window.

    Purely heuristic: stabilization over finitely many truncations is
    necessary but not a certificate that the maximizing set has been found.
    """
    cert = check_summability(f)
    if not cert.converges:
        raise ValidationError("stabilization detection requires a summable potential")
    if ks is None:
        ks = tuple(range(0, 10))
    decs = []
    saturated = False
    for k in ks:
        try:
            trunc = build_truncation(model, k)
        except NonTransitive:
            # finite custom model exhausted: the last truncation already is
            # the whole (compact) shift, so the structure is final
            saturated = True
            break
        decs.append((k, critical_decomposition(trunc, f, tie_tol=tie_tol)))
    window = stability_window if not saturated else min(stability_window, len(decs))
    if not decs or window < 1:
        raise NotStabilized(max(ks))
    betas = tuple(d.beta for _, d in decs)
    keys = [_structure_key(d) for _, d in decs]
    for i in range(len(decs) - window + 1):
        window_betas = betas[i : i + window]
        window_keys = keys[i : i + window]
        if all(k == window_keys[0] for k in window_keys) and all(
            abs(b - window_betas[0]) <= beta_tol for b in window_betas
        ):
            return K0Report(k0=decs[i][0], window=window, heuristic=True, ks=tuple(k for k, _ in decs), betas=betas)
    raise NotStabilized(max(k for k, _ in decs))


def max_entropy_over_maximizing(dec: CriticalDecomposition) -> float:
    """Largest entropy over maximizing measures: topological entropy of the
    maximal-pressure critical components (f - beta is a coboundary there)."""
    return max(dec.components[j].h_top for j in dec.maximal_components)
