"""Markov potentials f(i, j) with tail majorants and summability certificates.

All values are in natural-log units. A potential is attached to an ambient
model (for edge admissibility) and carries a tail descriptor: a closed-form
upper bound on sup f|_[i] for symbols beyond the explicit range, which is
what certifies any statement about the full countable alphabet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import (
    DeadEndSymbol,
    InadmissibleEdge,
    InvalidT,
    NoTailDescriptor,
    UnboundedV1,
    ValidationError,
)
from .shift_model import ShiftModel, Truncation

_INF = float("inf")


class Family(Enum):
    LOG_QUADRATIC = "log_quadratic"      # f(i, j) = -log((i+1)(i+2)), j-independent
    TIE_TWO_LOOPS = "tie_two_loops"      # 0 on {0,1}^2, else -(max(i,j)+1)
    RENEWAL_WEIGHTED = "renewal_weighted"  # f(0,j) = -(j+1), f(i,i-1) = -i
    TABLE = "table"


class TailKind(Enum):
    GEOMETRIC = "geometric"    # sup f|_[i] <= a - b*i
    POLYNOMIAL = "polynomial"  # sup f|_[i] <= a - p*log(i+1)
    NONE = "none"


@dataclass(frozen=True)
class TailDescriptor:
    """Closed-form majorant of the cylinder sups beyond the explicit range.

    `row_osc`, when given, bounds the oscillation of every row beyond the
    explicit range; without it the ambient first variation is unknowable.
    """

    kind: TailKind
    a: float = 0.0
    b: float = 0.0
    p: float = 0.0
    row_osc: float | None = None

    def bound(self, i: np.ndarray | float) -> np.ndarray | float:
        if self.kind is TailKind.GEOMETRIC:
            return self.a - self.b * np.asarray(i, dtype=float)
        if self.kind is TailKind.POLYNOMIAL:
            return self.a - self.p * np.log(np.asarray(i, dtype=float) + 1.0)
        return np.full_like(np.asarray(i, dtype=float), _INF)


@dataclass(frozen=True)
class SummabilityCertificate:
    """Upper-bound certificate for a positive series over the 1-cylinders."""

    converges: bool
    partial_sum: float
    tail_bound: float
    total_upper_bound: float
    terms_used: int
    tol_met: bool


_FAMILY_TAILS = {
    Family.LOG_QUADRATIC: TailDescriptor(TailKind.POLYNOMIAL, a=0.0, p=2.0, row_osc=0.0),
    Family.TIE_TWO_LOOPS: TailDescriptor(TailKind.GEOMETRIC, a=1.0, b=1.0, row_osc=None),
    Family.RENEWAL_WEIGHTED: TailDescriptor(TailKind.GEOMETRIC, a=0.0, b=1.0, row_osc=None),
}


@dataclass(frozen=True, eq=False)
class MarkovPotential:
    """Two-symbol potential over an ambient model, plus an additive shift.

    `table` maps (i, j) -> value for the TABLE family; built-in families
    compute values from their formulas. `shift` carries normalization.
    """

    model: ShiftModel
    family: Family
    table: tuple[tuple[int, int, float], ...] = ()
    tail: TailDescriptor = TailDescriptor(TailKind.NONE)
    explicit_hi: int = 64
    shift: float = 0.0

    def __post_init__(self):
        if self.family is Family.TABLE and not self.table:
            raise ValidationError("table potential requires explicit entries")
        if self.family is not Family.TABLE and self.table:
            raise ValidationError("table entries only apply to the table family")
        if self.family is not Family.TABLE and self.tail.kind is TailKind.NONE:
            object.__setattr__(self, "tail", _FAMILY_TAILS[self.family])
        object.__setattr__(self, "_table_map", {(i, j): v for i, j, v in self.table})
        self._validate_tail_majorizes()

    # -- raw values ---------------------------------------------------------

    def _base_value(self, i: int, j: int) -> float | None:
        if self.family is Family.LOG_QUADRATIC:
            return -math.log((i + 1.0) * (i + 2.0))
        if self.family is Family.TIE_TWO_LOOPS:
            return 0.0 if (i < 2 and j < 2) else -(max(i, j) + 1.0)
        if self.family is Family.RENEWAL_WEIGHTED:
            if i == 0:
                return -(j + 1.0)
            if j == i - 1:
                return -float(i)
            return None
        return self._table_map.get((i, j))

    def value(self, i: int, j: int) -> float:
        """f(i, j); the pair must be an admissible edge of the ambient model."""
        if not self.model.has_edge(i, j):
            raise InadmissibleEdge(f"({i}, {j}) is not an edge of the model")
        base = self._base_value(i, j)
        if base is None:
            raise ValidationError(f"admissible edge ({i}, {j}) has no defined value")
        return base + self.shift

    def value_grid(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Vectorized f over the grid rows x cols; NaN where undefined."""
        ii = np.asarray(rows, dtype=np.int64)[:, None].astype(float)
        jj = np.asarray(cols, dtype=np.int64)[None, :].astype(float)
        if self.family is Family.LOG_QUADRATIC:
            vals = -np.log((ii + 1.0) * (ii + 2.0)) + 0.0 * jj
        elif self.family is Family.TIE_TWO_LOOPS:
            vals = np.where((ii < 2) & (jj < 2), 0.0, -(np.maximum(ii, jj) + 1.0))
        elif self.family is Family.RENEWAL_WEIGHTED:
            vals = np.where(ii == 0, -(jj + 1.0), np.where(jj == ii - 1.0, -ii, np.nan))
        else:
            vals = np.full(np.broadcast_shapes(ii.shape, jj.shape), np.nan)
            tm = self._table_map
            for a, i in enumerate(np.asarray(rows, dtype=np.int64)):
                for b, j in enumerate(np.asarray(cols, dtype=np.int64)):
                    v = tm.get((int(i), int(j)))
                    if v is not None:
                        vals[a, b] = v
        return vals + self.shift

    @property
    def is_row_constant(self) -> bool:
        """True when f(i, j) does not depend on j (exact Gibbs, rank-one transfer)."""
        return self.family is Family.LOG_QUADRATIC

    # -- cylinder sups ------------------------------------------------------

    def cylinder_sup(self, i: int, trunc: Truncation | None = None) -> float:
        """max over admissible j of f(i, j); restricted to a truncation if given."""
        if trunc is not None:
            pos = np.flatnonzero(trunc.alphabet == i)
            if pos.size == 0:
                raise ValidationError(f"symbol {i} not in the truncation alphabet")
            a = int(pos[0])
            succ = np.flatnonzero(trunc.require_incidence()[a])
            if succ.size == 0:
                raise DeadEndSymbol(f"symbol {i} has no successor in the truncation")
            return float(max(self.value(i, int(trunc.alphabet[b])) for b in succ))
        return float(self._ambient_sups(np.asarray([i], dtype=np.int64))[0])

    def _ambient_sups(self, symbols: np.ndarray) -> np.ndarray:
        """Closed-form sup f|_[i] over the full countable row of each symbol."""
        s = np.asarray(symbols, dtype=float)
        if self.family is Family.LOG_QUADRATIC:
            out = -np.log((s + 1.0) * (s + 2.0))
        elif self.family is Family.TIE_TWO_LOOPS:
            out = np.where(s < 2, 0.0, -(s + 1.0))
        elif self.family is Family.RENEWAL_WEIGHTED:
            out = np.where(s == 0, -1.0, -s)
        else:
            out = np.empty(s.shape, dtype=float)
            for a, i in enumerate(np.asarray(symbols, dtype=np.int64)):
                out[a] = self._table_row_sup(int(i))
        return out + self.shift

    def _table_row_sup(self, i: int) -> float:
        vals = [v for (a, _b), v in self._table_map.items() if a == i and self.model.has_edge(a, _b)]
        if not vals:
            raise DeadEndSymbol(f"symbol {i} has no admissible successor with a defined value")
        return max(vals)

    def _explicit_symbols(self) -> np.ndarray:
        if self.family is Family.TABLE:
            rows = sorted({i for i, _j, _v in self.table})
            return np.asarray(rows, dtype=np.int64)
        return np.arange(self.explicit_hi + 1, dtype=np.int64)

    def _validate_tail_majorizes(self):
        if self.tail.kind is TailKind.NONE:
            return
        syms = self._explicit_symbols()
        sups = self._ambient_sups(syms)
        bounds = np.asarray(self.tail.bound(syms), dtype=float) + self.shift
        bad = np.flatnonzero(bounds < sups - 1e-12)
        if bad.size:
            i = int(syms[bad[0]])
            raise ValidationError(
                f"tail descriptor fails to majorize sup f|_[{i}] "
                f"({bounds[bad[0]]:.6g} < {sups[bad[0]]:.6g})"
            )

    def _tail_bound_at(self, i: np.ndarray | float) -> np.ndarray | float:
        return self.tail.bound(i) + self.shift

    # -- normalization ------------------------------------------------------

    def global_sup(self) -> float:
        """sup over admissible edges of f; finite for coercive potentials."""
        syms = self._explicit_symbols()
        explicit = float(np.max(self._ambient_sups(syms)))
        if self.tail.kind is TailKind.NONE:
            if self.model.is_infinite_alphabet() and self.family is Family.TABLE:
                raise NoTailDescriptor("global sup over an infinite alphabet needs a tail descriptor")
            return explicit
        beyond = float(self._tail_bound_at(float(syms[-1]) + 1.0))
        return max(explicit, beyond)

    def normalized(self) -> "MarkovPotential":
        """f - sup f; idempotent, leaves cycle-mean argmax structure unchanged."""
        return replace(self, shift=self.shift - self.global_sup())


def evaluate(f: MarkovPotential, i: int, j: int) -> float:
    return f.value(i, j)


def cylinder_sup(f: MarkovPotential, i: int, trunc: Truncation | None = None) -> float:
    return f.cylinder_sup(i, trunc)


def normalize(f: MarkovPotential) -> MarkovPotential:
    return f.normalized()


# ---------------------------------------------------------------------------
# summability certificates


def _finite_alphabet_symbols(f: MarkovPotential) -> np.ndarray | None:
    """Symbols of a genuinely finite model, or None for infinite alphabets."""
    if f.model.is_infinite_alphabet():
        return None
    syms = sorted({s for e in f.model.custom_edges for s in e})
    return np.asarray(syms, dtype=np.int64)


def _geometric_tail(a: float, b: float, t: float, start: int) -> float:
    """sum_{i >= start} exp(t * (a - b i)), closed form; inf when b <= 0."""
    if b <= 0.0:
        return _INF
    q = math.exp(-t * b)
    return math.exp(t * (a - b * start)) / (1.0 - q)


def _polynomial_tail(a: float, p: float, t: float, start: int) -> float:
    """Integral bound on sum_{i >= start} exp(t*a) (i+1)^(-t p); inf when t*p <= 1."""
    s = t * p
    if s <= 1.0:
        return _INF
    return math.exp(t * a) * float(start) ** (1.0 - s) / (s - 1.0)


def check_summability(f: MarkovPotential, tol: float = 1e-9, max_terms: int = 2_000_000) -> SummabilityCertificate:
    """Certificate for the series of exp(sup f|_[i]) over all 1-cylinders.

    The explicit range is grown geometrically until the tail majorant is
    below tol * total or the term budget is hit; `converges` records tail
    finiteness, `tol_met` whether the requested resolution was reached.
    """
    finite_syms = _finite_alphabet_symbols(f)
    if finite_syms is not None:
        sups = f._ambient_sups(finite_syms)
        partial = float(np.sum(np.exp(sups)))
        return SummabilityCertificate(True, partial, 0.0, partial, int(finite_syms.size), True)

    if f.tail.kind is TailKind.NONE:
        raise NoTailDescriptor("summability over an infinite alphabet needs a tail descriptor")

    hi = int(f._explicit_symbols()[-1])
    grow_ok = f.family is not Family.TABLE
    while True:
        syms = np.arange(hi + 1, dtype=np.int64)
        sups = f._ambient_sups(syms)
        partial = float(np.sum(np.exp(sups)))
        a_eff = f.tail.a + f.shift
        if f.tail.kind is TailKind.GEOMETRIC:
            tail = _geometric_tail(a_eff, f.tail.b, 1.0, hi + 1)
        else:
            tail = _polynomial_tail(a_eff, f.tail.p, 1.0, hi + 1)
        total = partial + tail
        tol_met = math.isfinite(tail) and tail <= tol * total
        if tol_met or not grow_ok or not math.isfinite(tail) or hi + 1 >= max_terms:
            return SummabilityCertificate(bool(math.isfinite(tail)), partial, tail, total, hi + 1, tol_met)
        hi = min(max_terms - 1, max(2 * hi, 64))


def check_summability_t(f: MarkovPotential, t: float, tol: float = 1e-9, max_terms: int = 2_000_000) -> SummabilityCertificate:
    """Certificate for the weighted series (-t sup f|_[i]) exp(t sup f|_[i]).

    Requires t > 1 and a normalized potential (applied automatically).
    Tails use the monotonicity of x exp(-x) for x >= 1: the certificate is
    an upper bound once the tail majorant has -t * bound >= 1; when the
    descriptor cannot reach that regime the series is reported divergent
    (convergence cannot be certified).
    """
    if t <= 1.0:
        raise InvalidT(f"t must exceed 1, got {t}")
    g = f.normalized()

    def term(sups: np.ndarray) -> np.ndarray:
        x = -t * np.minimum(sups, 0.0)
        return x * np.exp(-x)

    finite_syms = _finite_alphabet_symbols(g)
    if finite_syms is not None:
        partial = float(np.sum(term(g._ambient_sups(finite_syms))))
        return SummabilityCertificate(True, partial, 0.0, partial, int(finite_syms.size), True)

    if g.tail.kind is TailKind.NONE:
        raise NoTailDescriptor("summability over an infinite alphabet needs a tail descriptor")

    a_eff = g.tail.a + g.shift
    if g.tail.kind is TailKind.GEOMETRIC:
        if g.tail.b <= 0.0:
            return SummabilityCertificate(False, float("nan"), _INF, _INF, 0, False)
        # first index with -t * bound >= 1
        start_min = max(0, math.ceil((a_eff + 1.0 / t) / g.tail.b))
    else:
        if g.tail.p <= 0.0 or t * g.tail.p <= 1.0:
            return SummabilityCertificate(False, float("nan"), _INF, _INF, 0, False)
        start_min = max(0, math.ceil(math.exp((a_eff + 1.0 / t) / g.tail.p) - 1.0))

    hi = int(g._explicit_symbols()[-1])
    grow_ok = g.family is not Family.TABLE
    if grow_ok:
        hi = max(hi, start_min)
    while True:
        syms = np.arange(hi + 1, dtype=np.int64)
        partial = float(np.sum(term(g._ambient_sups(syms))))
        # bridge with majorant terms where the explicit table stops early
        start = int(syms[-1]) + 1
        bridge = 0.0
        if start <= start_min:
            mid = np.arange(start, start_min + 1, dtype=np.int64)
            bridge = float(np.sum(term(np.asarray(g._tail_bound_at(mid), dtype=float))))
            start = start_min + 1
        if g.tail.kind is TailKind.GEOMETRIC:
            tail = bridge + _weighted_geometric_tail(a_eff, g.tail.b, t, start)
        else:
            tail = bridge + _weighted_polynomial_tail(a_eff, g.tail.p, t, start)
        total = partial + tail
        tol_met = math.isfinite(tail) and tail <= tol * max(total, 1e-300)
        if tol_met or not grow_ok or hi + 1 >= max_terms:
            return SummabilityCertificate(bool(math.isfinite(tail)), partial, tail, total, int(syms.size), tol_met)
        hi = min(max_terms - 1, max(2 * hi, 64, start_min))


def _weighted_geometric_tail(a: float, b: float, t: float, start: int) -> float:
    """sum_{i >= start} t (b i - a) exp(t (a - b i)), closed form (b > 0)."""
    q = math.exp(-t * b)
    s0 = q ** start / (1.0 - q)
    s1 = q ** start * (start - (start - 1) * q) / (1.0 - q) ** 2
    return t * math.exp(t * a) * (b * s1 - a * s0)


def _weighted_polynomial_tail(a: float, p: float, t: float, start: int) -> float:
    """Integral bound on sum_{i >= start} t (p log(i+1) - a) exp(t a) (i+1)^(-t p)."""
    s = t * p
    c = float(start)  # integrand decreasing from here on (x e^{-x} regime)
    log_c = math.log(c)
    i_log = c ** (1.0 - s) * (log_c / (s - 1.0) + 1.0 / (s - 1.0) ** 2)
    i_one = c ** (1.0 - s) / (s - 1.0)
    return t * math.exp(t * a) * (p * i_log - a * i_one)


# ---------------------------------------------------------------------------
# variations


def variation(f: MarkovPotential, n: int, trunc: Truncation | None = None) -> float:
    """n-th variation; exactly 0 for n >= 2 since the potential is Markov.

    For n = 1 the ambient value needs bounded row oscillation; per-truncation
    values are always finite and feed the per-truncation Gibbs constants.
    """
    if n < 1:
        raise ValidationError("variation index must be at least 1")
    if n >= 2:
        return 0.0
    if trunc is not None:
        inc = trunc.require_incidence()
        vals = f.value_grid(trunc.alphabet, trunc.alphabet)
        vals = np.where(inc, vals, np.nan)
        with np.errstate(invalid="ignore"):
            osc = np.nanmax(vals, axis=1) - np.nanmin(vals, axis=1)
        return float(np.nanmax(osc)) if osc.size else 0.0

    finite_syms = _finite_alphabet_symbols(f)
    if finite_syms is not None:
        return _row_osc_exact(f, finite_syms)

    if f.family is Family.LOG_QUADRATIC:
        return 0.0
    if f.family in (Family.TIE_TWO_LOOPS, Family.RENEWAL_WEIGHTED):
        # rows take arbitrarily negative values along the full countable row
        raise UnboundedV1(f"{f.family.value} has unbounded ambient row oscillation")
    if f.tail.row_osc is None:
        raise UnboundedV1("tail descriptor does not bound row oscillation")
    return max(_row_osc_exact(f, f._explicit_symbols()), float(f.tail.row_osc))


def _row_osc_exact(f: MarkovPotential, symbols: np.ndarray) -> float:
    worst = 0.0
    for i in symbols:
        vals = [
            f._base_value(int(i), int(j))
            for j in symbols
            if f.model.has_edge(int(i), int(j)) and f._base_value(int(i), int(j)) is not None
        ]
        if vals:
            worst = max(worst, max(vals) - min(vals))
    return worst
