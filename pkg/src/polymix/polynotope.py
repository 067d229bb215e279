"""Mixed polynotopes: polynomial images of typed-symbol domains.

A polynotope is the record ``(c, R, I, E)`` read as the function

    s  |->  c + R * (s_I ** E)

where ``c`` is an n-vector, ``R`` an n-by-m generator matrix, ``I`` a vector
of p distinct symbol identifiers and ``E`` a p-by-m matrix of nonnegative
integer exponents: column j of ``E`` is the monomial multiplying generator
column j.  Evaluating over the symbols' domains (interval / signed / boolean
per the id type) yields a set that may be non-convex and non-connected; a
zonotope is the affine special case ``E = identity``.

Canonical form maintained by every operation here:

* exponents of signed symbols reduced mod 2, of boolean symbols capped at 1
  (both rewrites are exact on the respective domains);
* no two equal exponent columns (duplicates merge by summing generators);
* no all-zero exponent column (constants fold into ``c``), no all-zero
  generator column, no all-zero exponent row (unused symbols drop);
* ``I`` strictly increasing.

Column order is the order of first occurrence, which keeps constructions
like the data-structure examples stable; equality is structural.

Closed operations (sum, linear image, concatenation, element-wise product,
substitution) commute exactly with pointwise evaluation.  The enclosure
operations (``zono_hull``, ``box_hull``, ``reduce``) only ever grow the
evaluated set, never shrink it.
"""

from __future__ import annotations

import json
import numbers

import numpy as np

from .errors import DimensionError, DomainError
from .symbols import SymbolProvider, SymbolType, provider, type_of

__all__ = [
    "Polynotope",
    "IntervalVec",
    "make",
    "punctual",
    "from_symbol",
    "add",
    "linear_image",
    "translate",
    "vcat",
    "multiply",
    "row_product",
    "substitute",
    "evaluate",
    "evaluate_batch",
    "monomial_range",
    "zono_hull",
    "box_hull",
    "covariation",
    "reduce",
    "to_json",
    "from_json",
    "sample_valuations",
]

_MAX_EXPONENT = 16384  # int16 headroom guard; degrees this large are a bug


# --------------------------------------------------------------------------
# column dedup: hash, group, verify (exact; falls back on hash collision)
# --------------------------------------------------------------------------

_HASH_RNG = np.random.default_rng(0x5EED)
_HASH_W = _HASH_RNG.integers(1, 2**63, size=64, dtype=np.uint64) | np.uint64(1)


def _hash_weights(p: int) -> np.ndarray:
    global _HASH_W
    while _HASH_W.size < p:
        more = _HASH_RNG.integers(1, 2**63, size=_HASH_W.size, dtype=np.uint64)
        _HASH_W = np.concatenate([_HASH_W, more | np.uint64(1)])
    return _HASH_W[:p]


def _group_columns(E: np.ndarray):
    """Group equal columns of ``E``.

    Returns ``(first, inv)`` where ``first`` lists one column index per
    distinct column in order of first occurrence and ``inv`` maps every
    column to its position in ``first``.  Grouping is by 64-bit hashing but
    verified exactly; a (vanishingly unlikely) collision triggers an exact
    lexicographic fallback.
    """
    p, m = E.shape
    if m == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    if p == 0:  # no symbols: every column is the empty monomial
        return np.zeros(1, dtype=np.int64), np.zeros(m, dtype=np.int64)
    if m == 1:
        return np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)
    if m <= 12:  # plain scan beats the vectorized pipeline at this size
        seen: dict = {}
        first_l, inv_l = [], []
        for j in range(m):
            key = E[:, j].tobytes()
            g = seen.get(key)
            if g is None:
                g = len(first_l)
                seen[key] = g
                first_l.append(j)
            inv_l.append(g)
        return (np.asarray(first_l, dtype=np.int64),
                np.asarray(inv_l, dtype=np.int64))
    h = E.T.astype(np.uint64, copy=False) @ _hash_weights(p)
    order = np.argsort(h, kind="stable")
    hs = h[order]
    boundary = np.empty(m, dtype=bool)
    boundary[0] = True
    np.not_equal(hs[1:], hs[:-1], out=boundary[1:])
    gid_sorted = np.cumsum(boundary) - 1
    inv_sorted = np.empty(m, dtype=np.int64)
    inv_sorted[order] = gid_sorted
    first_sorted = order[boundary]  # stable sort => earliest original index
    # equal columns always hash equal, so only groups that merge need the
    # exact check; a collision inside one of them triggers the fallback
    if first_sorted.size != m:
        counts = np.bincount(gid_sorted)
        multi = np.flatnonzero(counts[inv_sorted] > 1)
        if not np.array_equal(E[:, multi], E[:, first_sorted[inv_sorted[multi]]]):
            return _group_columns_exact(E)
    # renumber groups into first-occurrence order
    perm = np.argsort(first_sorted, kind="stable")
    first = first_sorted[perm]
    remap = np.empty(first.size, dtype=np.int64)
    remap[perm] = np.arange(first.size)
    return first, remap[inv_sorted]


def _group_columns_exact(E: np.ndarray):
    """Lexicographic exact fallback for :func:`_group_columns`."""
    _, index, inverse = np.unique(E, axis=1, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    perm = np.argsort(index, kind="stable")
    first = index[perm]
    remap = np.empty(index.size, dtype=np.int64)
    remap[perm] = np.arange(index.size)
    return first.astype(np.int64), remap[inverse]


# --------------------------------------------------------------------------
# core data types
# --------------------------------------------------------------------------


class IntervalVec:
    """A vector of closed intervals ``[lo, hi]`` (componentwise)."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = np.atleast_1d(np.asarray(lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if self.lo.shape != self.hi.shape:
            raise DimensionError("interval bounds must share a shape")
        if np.any(self.lo > self.hi):
            raise DomainError("interval lower bound exceeds upper bound")

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalVec):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def __repr__(self) -> str:
        pairs = ", ".join(f"[{lo:g}, {hi:g}]" for lo, hi in zip(self.lo, self.hi))
        return f"IntervalVec({pairs})"


class Polynotope:
    """Canonical ``(c, R, I, E)`` record.  Instances are immutable values.

    Arithmetic is overloaded so models read like the formulas they encode:
    ``+``/``-`` are exact symbolic sums, ``*`` is the element-wise product
    (or a scalar scaling), ``T @ x`` is the linear image under matrix ``T``
    and ``x[i]`` selects components.
    """

    __slots__ = ("c", "R", "I", "E", "_colhash")

    # keep numpy from consuming us in mixed expressions like `T @ x`
    __array_ufunc__ = None

    def __init__(self, c, R, I, E, _trusted: bool = False):
        self._colhash = None
        if _trusted:
            self.c, self.R, self.I, self.E = c, R, I, E
            return
        canon = make(c, R, I, E)
        self.c, self.R, self.I, self.E = canon.c, canon.R, canon.I, canon.E

    def _column_hashes(self) -> np.ndarray:
        """Embed-invariant 64-bit hash per monomial column (cached).

        Weights are keyed by symbol id, so padding with unused symbol rows
        leaves the hashes unchanged; equal monomials always hash equal.
        """
        if self._colhash is None:
            if self.gen_count == 0:
                self._colhash = np.zeros(0, dtype=np.uint64)
            else:
                w = _splitmix(self.I.astype(np.uint64)) | np.uint64(1)
                self._colhash = self.E.T.astype(np.uint64, copy=False) @ w
        return self._colhash

    # -- basic queries ------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    @property
    def gen_count(self) -> int:
        """Number of monomial/generator columns (the constant not counted)."""
        return self.R.shape[1]

    @property
    def symbol_count(self) -> int:
        return self.I.shape[0]

    @property
    def max_degree(self) -> int:
        if self.E.shape[1] == 0:
            return 0
        return int(self.E.sum(axis=0, dtype=np.int64).max())

    @property
    def is_punctual(self) -> bool:
        return self.gen_count == 0

    @property
    def is_zonotope(self) -> bool:
        """True when every monomial is a single symbol to the first power."""
        E = self.E
        return bool(((E == 1).sum(axis=0) == 1).all() and (E.sum(axis=0) == 1).all())

    def symbol_types(self) -> np.ndarray:
        return (self.I & 0b11).astype(np.int64)

    # -- operators ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Polynotope):
            return add(self, other)
        return translate(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Polynotope):
            return add(self, linear_image(-np.eye(other.dim), other))
        return translate(self, -np.asarray(other, dtype=float))

    def __rsub__(self, other):
        return translate(linear_image(-np.eye(self.dim), self), other)

    def __neg__(self):
        return linear_image(-np.eye(self.dim), self)

    def __mul__(self, other):
        if isinstance(other, Polynotope):
            return multiply(self, other)
        if isinstance(other, numbers.Number):
            s = float(other)
            if s == 0.0:
                return punctual(np.zeros(self.dim))
            return _trusted(s * self.c, s * self.R, self.I, self.E)
        return NotImplemented

    __rmul__ = __mul__

    def __rmatmul__(self, t):
        return linear_image(t, self)

    def __getitem__(self, rows):
        if isinstance(rows, (int, np.integer)):
            rows = [int(rows)]
        elif isinstance(rows, slice):
            rows = range(*rows.indices(self.dim))
        rows = list(rows)
        return _prune(self.c[rows], self.R[rows], self.I, self.E)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynotope):
            return NotImplemented
        return (
            np.array_equal(self.c, other.c)
            and self.R.shape == other.R.shape
            and np.array_equal(self.R, other.R)
            and np.array_equal(self.I, other.I)
            and np.array_equal(self.E, other.E)
        )

    def __repr__(self) -> str:
        return (
            f"Polynotope(dim={self.dim}, generators={self.gen_count}, "
            f"symbols={self.symbol_count}, max_degree={self.max_degree})"
        )


# --------------------------------------------------------------------------
# construction and canonicalization
# --------------------------------------------------------------------------


def _trusted(c, R, I, E, colhash=None) -> Polynotope:
    """Wrap arrays already known to be canonical (no copies, no checks)."""
    out = Polynotope.__new__(Polynotope)
    out.c, out.R, out.I, out.E = c, R, I, E
    out._colhash = colhash
    return out


def _prune(c, R, I, E, colhash=None) -> Polynotope:
    """Light canonicalization for results whose exponent columns are
    already rewritten, distinct and nonconstant: drop exactly-zero
    generator columns and unused symbol rows."""
    keep = (R != 0.0).any(axis=0) if R.shape[0] else np.zeros(R.shape[1], bool)
    if not keep.all():
        R = R[:, keep]
        E = E[:, keep]
        if colhash is not None:
            colhash = colhash[keep]
    used = (E != 0).any(axis=1) if E.shape[1] else np.zeros(I.size, bool)
    if not used.all():
        I = I[used]
        E = E[used]
    return _trusted(c, np.ascontiguousarray(R), I, np.ascontiguousarray(E),
                    colhash)


def _canon(c, R, I, E) -> Polynotope:
    """Normalize raw ``(c, R, I, E)`` arrays into a canonical Polynotope.

    Assumes shapes are consistent and ``I`` has no duplicates; ``make``
    validates user input before delegating here.  Takes ownership of ``E``
    (typed power rewrites may happen in place), so callers must pass a
    freshly built array.
    """
    c = np.asarray(c, dtype=float).reshape(-1).copy()
    R = np.asarray(R, dtype=float)
    I = np.asarray(I, dtype=np.int64).reshape(-1)
    E = np.asarray(E)
    n = c.shape[0]
    m = R.shape[1] if R.ndim == 2 else 0
    if E.dtype != np.int16:
        E = E.astype(np.int16)

    if not np.all(I[1:] > I[:-1]):  # sort symbols, permuting exponent rows
        order = np.argsort(I, kind="stable")
        I = I[order]
        E = E[order]

    if m:
        types = I & 0b11
        signed_rows = types == SymbolType.SIGNED
        if signed_rows.any():
            E[signed_rows] &= 1
        bool_rows = types == SymbolType.BOOLEAN
        if bool_rows.any():
            E[bool_rows] = np.minimum(E[bool_rows], 1)

        first, inv = _group_columns(E)
        if first.size != m:
            merged = np.zeros((n, first.size))
            for i in range(n):
                merged[i] = np.bincount(inv, weights=R[i], minlength=first.size)
            R = merged
            E = E[:, first]
            m = first.size
        else:
            R = np.array(R, dtype=float, copy=True)
            E = np.ascontiguousarray(E)

        degrees = E.sum(axis=0, dtype=np.int64)
        const = degrees == 0
        if const.any():
            j = int(np.flatnonzero(const)[0])
            c += R[:, j]
            keep = ~const
            R = R[:, keep]
            E = E[:, keep]
            m = R.shape[1]

        nonzero_gen = (R != 0.0).any(axis=0) if n else np.zeros(m, dtype=bool)
        if not nonzero_gen.all():
            R = R[:, nonzero_gen]
            E = E[:, nonzero_gen]
            m = R.shape[1]

    used = (E != 0).any(axis=1) if m else np.zeros(I.size, dtype=bool)
    if not used.all():
        I = I[used]
        E = E[used]

    return _trusted(c, np.ascontiguousarray(R, dtype=float), I,
                    np.ascontiguousarray(E))


def make(c, R, I, E) -> Polynotope:
    """Build a canonical polynotope from raw arrays, validating shapes.

    ``c``: length-n center; ``R``: n-by-m generators; ``I``: p distinct
    nonnegative symbol ids; ``E``: p-by-m nonnegative integer exponents.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.ndim != 1:
        raise DimensionError("center must be a vector")
    n = c.shape[0]
    R = np.asarray(R, dtype=float)
    if R.size == 0:
        R = R.reshape(n, -1)
    R = np.atleast_2d(R)
    if R.shape[0] != n:
        raise DimensionError(f"generator matrix has {R.shape[0]} rows, center {n}")
    m = R.shape[1]
    I = np.asarray(I, dtype=np.int64).reshape(-1)
    if I.size and I.min() < 0:
        raise DomainError("unknown symbol id: ids are nonnegative integers")
    if np.unique(I).size != I.size:
        raise DimensionError("symbol ids must be pairwise distinct")
    E = np.asarray(E)
    if E.size == 0:
        E = np.zeros((I.size, m), dtype=np.int16)
    E = np.atleast_2d(E)
    if E.shape != (I.size, m):
        raise DimensionError(
            f"exponent matrix shape {E.shape} != ({I.size}, {m})"
        )
    if not np.issubdtype(E.dtype, np.integer):
        Ef = np.asarray(E, dtype=float)
        E = Ef.astype(np.int64)
        if not np.array_equal(Ef, E):
            raise DomainError("exponents must be integers")
    if E.size and E.min() < 0:
        raise DomainError("exponents must be nonnegative")
    if E.size and E.max() > _MAX_EXPONENT:
        raise DomainError(f"exponent exceeds supported bound {_MAX_EXPONENT}")
    return _canon(c, R, I, E.astype(np.int16))


def punctual(value) -> Polynotope:
    """The singleton set {value}."""
    value = np.atleast_1d(np.asarray(value, dtype=float))
    n = value.shape[0]
    return _canon(value, np.zeros((n, 0)), np.zeros(0, dtype=np.int64),
                  np.zeros((0, 0), dtype=np.int16))


def from_symbol(symbol_id: int, coeff: float = 1.0) -> Polynotope:
    """The scalar polynotope ``coeff * s_id``."""
    return _canon(
        np.zeros(1),
        np.array([[float(coeff)]]),
        np.array([symbol_id], dtype=np.int64),
        np.ones((1, 1), dtype=np.int16),
    )


# --------------------------------------------------------------------------
# symbol-set alignment
# --------------------------------------------------------------------------


def _embed(p: Polynotope, q: Polynotope):
    """Common sorted symbol vector plus both exponent matrices padded onto it."""
    if p.I.shape == q.I.shape and np.array_equal(p.I, q.I):
        return p.I, p.E, q.E
    union = np.union1d(p.I, q.I)
    Ep = np.zeros((union.size, p.E.shape[1]), dtype=np.int16)
    Ep[np.searchsorted(union, p.I)] = p.E
    Eq = np.zeros((union.size, q.E.shape[1]), dtype=np.int16)
    Eq[np.searchsorted(union, q.I)] = q.E
    return union, Ep, Eq


# --------------------------------------------------------------------------
# closed (exact) operations
# --------------------------------------------------------------------------


def _aligned_combine(p: Polynotope, q: Polynotope, stack: bool) -> Polynotope:
    """Shared machinery of ``add`` (stack=False) and pairwise ``vcat``
    (stack=True): q's columns land on p's matching monomials, summing
    (resp. stacking) generators; unmatched columns are appended.

    Matching joins the cached embed-invariant column hashes and verifies
    matched pairs exactly; any hash anomaly falls back to the generic
    canonicalization.
    """
    rows_p, rows_q = p.dim, q.dim
    n = rows_p + rows_q if stack else rows_p
    c = np.concatenate([p.c, q.c]) if stack else p.c + q.c
    I, Ep, Eq = _embed(p, q)
    mp, mq = p.gen_count, q.gen_count

    fast = None
    if mp and mq:
        hp, hq = p._column_hashes(), q._column_hashes()
        order_p = np.argsort(hp, kind="stable")
        sp = hp[order_p]
        if not (sp[1:] == sp[:-1]).any():  # internal collisions: go generic
            pos = np.searchsorted(sp, hq)
            pos_clip = np.minimum(pos, mp - 1)
            hit = sp[pos_clip] == hq
            j_p = order_p[pos_clip]
            if hit.any():
                a_cols, b_cols = j_p[hit], np.flatnonzero(hit)
                if np.array_equal(Ep[:, a_cols], Eq[:, b_cols]):
                    fast = (hit, a_cols, b_cols, hq)
                # else: hash collision across operands -> generic
            else:
                fast = (hit, None, None, hq)

    if fast is None:
        if stack:
            R = np.zeros((n, mp + mq))
            R[:rows_p, :mp] = p.R
            R[rows_p:, mp:] = q.R
        else:
            R = np.hstack([p.R, q.R])
        return _canon(c, R, I, np.hstack([Ep, Eq]))

    hit, a_cols, b_cols, hq = fast
    miss = ~hit
    m_out = mp + int(miss.sum())
    R = np.zeros((n, m_out))
    R[:rows_p, :mp] = p.R
    if stack:
        if a_cols is not None:
            R[rows_p:, a_cols] = q.R[:, b_cols]
        R[rows_p:, mp:] = q.R[:, miss]
    else:
        if a_cols is not None:
            R[:, a_cols] += q.R[:, b_cols]
        R[:, mp:] = q.R[:, miss]
    E = np.hstack([Ep, Eq[:, miss]])
    colhash = np.concatenate([p._column_hashes(), hq[miss]])
    return _prune(c, R, I, E, colhash)


def add(p: Polynotope, q: Polynotope) -> Polynotope:
    """Exact symbolic sum: generators of shared monomials add columnwise."""
    if p.dim != q.dim:
        raise DimensionError(f"dimension mismatch: {p.dim} vs {q.dim}")
    if q.gen_count == 0:
        return _trusted(p.c + q.c, p.R, p.I, p.E, p._colhash)
    if p.gen_count == 0:
        return _trusted(p.c + q.c, q.R, q.I, q.E, q._colhash)
    return _aligned_combine(p, q, stack=False)


def translate(p: Polynotope, d) -> Polynotope:
    d = np.broadcast_to(np.asarray(d, dtype=float), (p.dim,))
    return _trusted(p.c + d, p.R, p.I, p.E)


def linear_image(t, p: Polynotope) -> Polynotope:
    """Image under the linear map ``x -> t x`` (exact).

    A linear map cannot merge or create monomials, so only zero generator
    columns need pruning afterwards.
    """
    t = np.atleast_2d(np.asarray(t, dtype=float))
    if t.shape[1] != p.dim:
        raise DimensionError(f"map expects {t.shape[1]} rows, operand has {p.dim}")
    return _prune(t @ p.c, t @ p.R, p.I, p.E)


def vcat(*parts: Polynotope) -> Polynotope:
    """Stack polynotopes vertically, aligning shared monomials exactly."""
    if not parts:
        raise DimensionError("vcat needs at least one operand")
    out = parts[0]
    for q in parts[1:]:
        out = _aligned_combine(out, q, stack=True)
    return out


def multiply(p: Polynotope, q: Polynotope) -> Polynotope:
    """Element-wise product; a 1-dimensional operand broadcasts.

    Row i of the result is the polynomial product of row i of each operand:
    exponent columns add pairwise and the typed power rewrites collapse the
    discrete part, so e.g. a signed symbol squared folds into the constant.
    """
    if p.dim != q.dim:
        if p.dim == 1:
            p = linear_image(np.ones((q.dim, 1)), p)
        elif q.dim == 1:
            q = linear_image(np.ones((p.dim, 1)), q)
        else:
            raise DimensionError(f"dimension mismatch: {p.dim} vs {q.dim}")
    n = p.dim
    I, Ep, Eq = _embed(p, q)
    mp, mq = Ep.shape[1], Eq.shape[1]
    blocks_R = [p.R * q.c[:, None], q.R * p.c[:, None]]
    blocks_E = [Ep, Eq]
    if mp and mq:
        cross_R = np.einsum("ij,ik->ijk", p.R, q.R).reshape(n, mp * mq)
        cross_E = (
            Ep[:, :, None].astype(np.int16) + Eq[:, None, :].astype(np.int16)
        ).reshape(I.size, mp * mq)
        blocks_R.append(cross_R)
        blocks_E.append(cross_E)
    return _canon(
        p.c * q.c,
        np.hstack(blocks_R) if blocks_R else np.zeros((n, 0)),
        I,
        np.hstack(blocks_E) if blocks_E else np.zeros((I.size, 0), dtype=np.int16),
    )


_TRIANGLE_CACHE: dict = {}


def _triangle(m: int):
    got = _TRIANGLE_CACHE.get(m)
    if got is None:
        got = np.triu_indices(m)
        if len(_TRIANGLE_CACHE) > 64:
            _TRIANGLE_CACHE.clear()
        _TRIANGLE_CACHE[m] = got
    return got


def _splitmix(x: np.ndarray) -> np.ndarray:
    """Cheap vectorized u64 mixer (splitmix64 finalizer)."""
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    x ^= x >> np.uint64(30)
    x *= np.uint64(0xBF58476D1CE4E5B9)
    x ^= x >> np.uint64(27)
    x *= np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def row_product(x: Polynotope, i: int, j: int) -> Polynotope:
    """Product of rows i and j of one polynotope (== multiply(x[i], x[j])).

    Exploits the shared exponent matrix: monomial keys of the product are
    additive over the interval rows, xor over signed rows and or over
    boolean rows, so the symmetric cross terms are grouped by combined
    64-bit keys before any column is materialized, then verified exactly.
    Falls back to the generic product when a discrete mask cannot fit 64
    symbols.
    """
    types = x.symbol_types()
    sgn_rows = np.flatnonzero(types == SymbolType.SIGNED)
    bool_rows = np.flatnonzero(types == SymbolType.BOOLEAN)
    if sgn_rows.size > 64 or bool_rows.size > 64:
        return multiply(x[i], x[j])
    other_rows = np.flatnonzero(
        (types != SymbolType.SIGNED) & (types != SymbolType.BOOLEAN)
    )
    E, R = x.E, x.R
    m = x.gen_count
    ci, cj = float(x.c[i]), float(x.c[j])
    ri, rj = R[i], R[j]
    if m == 0:
        return punctual([ci * cj])

    # per-column keys: additive hash over non-discrete rows + exponent bits
    h_int = (
        E[other_rows].T.astype(np.uint64, copy=False)
        @ _hash_weights(x.symbol_count)[other_rows]
        if other_rows.size
        else np.zeros(m, dtype=np.uint64)
    )
    pow2_s = (np.uint64(1) << np.arange(sgn_rows.size, dtype=np.uint64))
    pow2_b = (np.uint64(1) << np.arange(bool_rows.size, dtype=np.uint64))
    sgn_mask = (
        (E[sgn_rows].T.astype(np.uint64, copy=False) & np.uint64(1)) @ pow2_s
        if sgn_rows.size else np.zeros(m, dtype=np.uint64)
    )
    bool_mask = (
        (E[bool_rows].T.astype(np.uint64, copy=False) != 0).astype(np.uint64)
        @ pow2_b
        if bool_rows.size else np.zeros(m, dtype=np.uint64)
    )

    kk, ll = _triangle(m)
    cross_w = ri[kk] * rj[ll]
    off = kk != ll
    cross_w[off] += ri[ll[off]] * rj[kk[off]]
    aff_w = ci * rj + cj * ri
    keys = np.concatenate([
        _splitmix(h_int) ^ _splitmix(_splitmix(sgn_mask))
        ^ _splitmix(_splitmix(_splitmix(bool_mask))),
        _splitmix(h_int[kk] + h_int[ll])
        ^ _splitmix(_splitmix(sgn_mask[kk] ^ sgn_mask[ll]))
        ^ _splitmix(_splitmix(_splitmix(bool_mask[kk] | bool_mask[ll]))),
    ])
    weights = np.concatenate([aff_w, cross_w])
    total = keys.size

    order = np.argsort(keys, kind="stable")
    ks = keys[order]
    boundary = np.empty(total, dtype=bool)
    boundary[0] = True
    np.not_equal(ks[1:], ks[:-1], out=boundary[1:])
    gid_sorted = np.cumsum(boundary) - 1
    inv = np.empty(total, dtype=np.int64)
    inv[order] = gid_sorted
    first = order[boundary]

    # candidates in monomial-major layout: row gathers stay contiguous
    ET = np.ascontiguousarray(E.T)

    def candidate_rows(idx):
        aff = idx < m
        out = np.empty((idx.size, x.symbol_count), dtype=np.int16)
        if aff.any():
            out[aff] = ET[idx[aff]]
        cr = ~aff
        if cr.any():
            block = ET[kk[idx[cr] - m]] + ET[ll[idx[cr] - m]]
            if sgn_rows.size:
                block[:, sgn_rows] &= 1
            if bool_rows.size:
                bl = block[:, bool_rows]
                block[:, bool_rows] = np.minimum(bl, 1)
            out[cr] = block
        return out

    reps = candidate_rows(first)
    # equal columns always share a key; verify exactly the merging groups
    if first.size != total:
        counts = np.bincount(inv, minlength=first.size)
        multi = np.flatnonzero(counts[inv] > 1)
        if not np.array_equal(candidate_rows(multi), reps[inv[multi]]):
            return multiply(x[i], x[j])

    merged = np.bincount(inv, weights=weights, minlength=first.size)
    c_out = np.array([ci * cj])
    degs = reps.sum(axis=1, dtype=np.int64)
    const = degs == 0
    if const.any():
        c_out[0] += merged[const].sum()
    keep = ~const & (merged != 0.0)
    return _prune(c_out, merged[None, keep], x.I,
                  np.ascontiguousarray(reps[keep].T))


def substitute(p: Polynotope, assignment: dict) -> Polynotope:
    """Fix some symbols to concrete in-domain values (exact partial eval)."""
    if not assignment:
        return p
    ids = np.asarray(sorted(assignment), dtype=np.int64)
    vals = np.array([float(assignment[int(i)]) for i in ids])
    for i, v in zip(ids, vals):
        t = type_of(int(i))
        if t == SymbolType.INTERVAL:
            ok = -1.0 <= v <= 1.0
        elif t == SymbolType.SIGNED:
            ok = v in (-1.0, 1.0)
        elif t == SymbolType.BOOLEAN:
            ok = v in (0.0, 1.0)
        else:
            ok = False
        if not ok:
            raise DomainError(f"value {v} outside domain of symbol {int(i)}")
    if p.I.size == 0:
        return p
    keep = ~np.isin(p.I, ids)
    rows = np.flatnonzero(~keep)
    if rows.size == 0:
        return p
    row_vals = vals[np.isin(ids, p.I)]
    factors = np.prod(row_vals[:, None] ** p.E[rows].astype(np.int64), axis=0)
    return _canon(p.c, p.R * factors[None, :], p.I[keep], p.E[keep])


def evaluate(p: Polynotope, assignment) -> np.ndarray:
    """Concrete value of the underlying polynomial at a full valuation.

    ``assignment`` is either a mapping id -> value or an array aligned with
    ``p.I``.  All symbols must be assigned.
    """
    if isinstance(assignment, dict):
        try:
            sigma = np.array([float(assignment[int(i)]) for i in p.I])
        except KeyError as e:
            raise DomainError(f"valuation missing symbol {e}") from None
    else:
        sigma = np.asarray(assignment, dtype=float).reshape(-1)
        if sigma.size != p.symbol_count:
            raise DimensionError("valuation length != symbol count")
    return evaluate_batch(p, sigma[None, :])[0]


def evaluate_batch(p: Polynotope, sigma: np.ndarray) -> np.ndarray:
    """Evaluate at many valuations at once; ``sigma`` is (count, p)."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[1] != p.symbol_count:
        raise DimensionError("valuations must be (count, symbol_count)")
    m = p.gen_count
    if m == 0:
        return np.broadcast_to(p.c, (sigma.shape[0], p.dim)).copy()
    mono = np.ones((sigma.shape[0], m))
    for r in range(p.symbol_count):
        exps = p.E[r]
        cols = np.flatnonzero(exps)
        if cols.size:
            mono[:, cols] *= sigma[:, r, None] ** exps[cols].astype(np.int64)
    return p.c[None, :] + mono @ p.R.T


# --------------------------------------------------------------------------
# ranges and hulls
# --------------------------------------------------------------------------


def monomial_range(exponents, I) -> tuple[float, float]:
    """Range of one monomial over the typed domains of its symbols.

    The factor ranges are: interval symbol with odd power -> [-1, 1], with
    even power >= 2 -> [0, 1]; signed -> [-1, 1]; boolean -> [0, 1].  Their
    product collapses to [-1, 1] if any factor is sign-indefinite, else to
    [0, 1] (or [1, 1] for the empty monomial).
    """
    lo, hi = _column_ranges(
        np.asarray(exponents, dtype=np.int16).reshape(-1, 1),
        np.asarray(I, dtype=np.int64),
    )
    return float(lo[0]), float(hi[0])


def _column_ranges(E: np.ndarray, I: np.ndarray):
    """Vectorized :func:`monomial_range` over all columns of ``E``."""
    types = (I & 0b11).astype(np.int64)
    unspec = types == SymbolType.UNSPECIFIED
    if unspec.any() and (E[unspec] != 0).any():
        raise DomainError("cannot bound a monomial over an unspecified-type symbol")
    m = E.shape[1]
    interval = types == SymbolType.INTERVAL
    signed = types == SymbolType.SIGNED
    boolean = types == SymbolType.BOOLEAN
    # sign-indefinite iff any odd interval/signed exponent; else one-sided
    # iff any even interval power >= 2 or any boolean factor
    sym = E[interval | signed]
    odd = (sym & 1).astype(bool)
    spans_neg = odd.any(axis=0) if sym.size else np.zeros(m, dtype=bool)
    Ei = E[interval]
    spans_zero = ((Ei >= 2) & ~(Ei & 1).astype(bool)).any(axis=0) \
        if Ei.size else np.zeros(m, dtype=bool)
    Eb = E[boolean]
    if Eb.size:
        spans_zero |= (Eb >= 1).any(axis=0)
    hi = np.ones(m)
    lo = np.where(spans_neg, -1.0, np.where(spans_zero, 0.0, 1.0))
    return lo, hi


def box_hull(p: Polynotope) -> IntervalVec:
    """Componentwise interval enclosure of the evaluated set.

    Pure (allocates no symbols): sums each generator column scaled by its
    monomial's range.
    """
    if p.gen_count == 0:
        return IntervalVec(p.c.copy(), p.c.copy())
    lo_j, hi_j = _column_ranges(p.E, p.I)
    low = p.R * lo_j[None, :]
    high = p.R * hi_j[None, :]
    lower = p.c + np.minimum(low, high).sum(axis=1)
    upper = p.c + np.maximum(low, high).sum(axis=1)
    return IntervalVec(lower, upper)


def zono_hull(p: Polynotope, prov: SymbolProvider | None = None) -> Polynotope:
    """Enclosing mixed zonotope (exponent matrix becomes an identity).

    Affine interval/signed columns pass through untouched.  An affine
    boolean column is recoded as ``1/2 + sign/2`` with a replacement signed
    symbol memoized per boolean id, so every occurrence across all calls
    maps to the same symbol and the recoding stays exact set-wise.  Every
    non-affine column is replaced by ``mid + rad * iota`` over its monomial
    range, with the replacement interval symbol memoized per exponent
    pattern: two occurrences of the same monomial name the same function,
    hence may share the same symbol without losing soundness.
    """
    prov = prov or provider()
    if p.gen_count == 0:
        return p
    E, I, R = p.E, p.I, p.R
    nnz = (E != 0).sum(axis=0)
    degrees = E.sum(axis=0, dtype=np.int64)
    affine = (nnz == 1) & (degrees == 1)
    types = (I & 0b11).astype(np.int64)

    c = p.c.copy()
    out_ids = np.empty(p.gen_count, dtype=np.int64)
    out_R = np.array(R, copy=True)
    row_of = E.argmax(axis=0) if p.symbol_count else np.zeros(p.gen_count, int)
    for j in range(p.gen_count):
        if affine[j]:
            r = int(row_of[j])
            t = types[r]
            if t == SymbolType.BOOLEAN:
                sid = prov.memo_bool_to_signed(int(I[r]))
                c += 0.5 * R[:, j]
                out_R[:, j] = 0.5 * R[:, j]
                out_ids[j] = sid
            elif t == SymbolType.UNSPECIFIED:
                raise DomainError("cannot hull an unspecified-type symbol")
            else:
                out_ids[j] = I[r]
        else:
            col = E[:, j]
            rows = np.flatnonzero(col)
            key = tuple((int(I[r]), int(col[r])) for r in rows)
            lo, hi = monomial_range(col, I)
            mid, rad = 0.5 * (lo + hi), 0.5 * (hi - lo)
            c += mid * R[:, j]
            out_R[:, j] = rad * R[:, j]
            out_ids[j] = prov.memo_monomial(key)
    uniq, inv = np.unique(out_ids, return_inverse=True)
    Ez = np.zeros((uniq.size, p.gen_count), dtype=np.int16)
    Ez[inv, np.arange(p.gen_count)] = 1
    return _canon(c, out_R, uniq, Ez)


def covariation(p: Polynotope, phi: np.ndarray | None = None) -> np.ndarray:
    """Generator outer product ``R Phi R^T`` (``Phi = I`` when omitted)."""
    if phi is None:
        return p.R @ p.R.T
    phi = np.asarray(phi, dtype=float)
    m = p.gen_count
    if phi.shape != (m, m):
        raise DimensionError(f"weighting must be {m}x{m}, got {phi.shape}")
    if not np.array_equal(phi, phi.T):
        raise DimensionError("weighting must be symmetric")
    return p.R @ phi @ p.R.T


# --------------------------------------------------------------------------
# reduction
# --------------------------------------------------------------------------


def _split_by_rank(p: Polynotope, keep_n: int):
    """Partition columns for reduction: the ``keep_n`` largest generator
    norms are kept, ties at the boundary broken by lower total degree then
    lexicographic exponent pattern (so the split is deterministic)."""
    norms = np.einsum("ij,ij->j", p.R, p.R)
    m = norms.size
    if keep_n <= 0:
        return np.zeros(0, dtype=np.int64), np.arange(m, dtype=np.int64)
    if keep_n >= m:
        return np.arange(m, dtype=np.int64), np.zeros(0, dtype=np.int64)
    part = np.argpartition(-norms, keep_n - 1)
    kept = part[:keep_n]
    dropped = part[keep_n:]
    boundary = norms[part[keep_n - 1]]
    # resolve ties straddling the cut deterministically
    kt = kept[norms[kept] == boundary]
    dt = dropped[norms[dropped] == boundary]
    if dt.size and kt.size:
        block = np.concatenate([kt, dt])
        degrees = p.E[:, block].sum(axis=0, dtype=np.int64)
        keys = [tuple(p.E[:, j]) for j in block]
        sub = sorted(range(block.size), key=lambda k: (degrees[k], keys[k], block[k]))
        chosen = block[sub][: kt.size]
        kept = np.concatenate([kept[norms[kept] != boundary], chosen])
        chosen_set = set(chosen.tolist())
        rest = np.array([j for j in block if j not in chosen_set], dtype=np.int64)
        dropped = np.concatenate([dropped[norms[dropped] != boundary], rest])
    return np.sort(kept), np.sort(dropped)


def reduce(p: Polynotope, q: int, prov: SymbolProvider | None = None) -> Polynotope:
    """Enclose ``p`` by a polynotope with at most ``q`` monomial columns.

    Keeps the ``q - n`` highest-norm columns and wraps the dropped columns'
    total contribution, row by row, into fresh independent interval symbols
    (center shift plus diagonal radius block).  Identity when already small
    enough.
    """
    if q < 0:
        raise DomainError("reduction order must be nonnegative")
    m = p.gen_count
    if m <= q:
        return p
    prov = prov or provider()
    n = p.dim
    keep_n = max(q - n, 0)
    kept, dropped = _split_by_rank(p, keep_n)

    lo_all, hi_all = _column_ranges(p.E, p.I)
    lo_j, hi_j = lo_all[dropped], hi_all[dropped]
    low = p.R[:, dropped] * lo_j[None, :]
    high = p.R[:, dropped] * hi_j[None, :]
    lower = np.minimum(low, high).sum(axis=1)
    upper = np.maximum(low, high).sum(axis=1)
    mid, rad = 0.5 * (lower + upper), 0.5 * (upper - lower)

    fresh_ids = prov.fresh(n, SymbolType.INTERVAL)
    while p.I.size and fresh_ids[0] <= p.I[-1] and np.isin(fresh_ids, p.I).any():
        # hand-built literal ids can sit above the provider's counter;
        # skip forward until the replacement symbols are genuinely new
        fresh_ids = prov.fresh(n, SymbolType.INTERVAL)
    I = np.concatenate([p.I, fresh_ids])
    R = np.hstack([p.R[:, kept], np.diag(rad)])
    E = np.zeros((I.size, keep_n + n), dtype=np.int16)
    E[: p.symbol_count, :keep_n] = p.E[:, kept]
    E[p.symbol_count :, keep_n:] = np.eye(n, dtype=np.int16)
    if p.I.size == 0 or fresh_ids[0] > p.I[-1]:
        return _prune(p.c + mid, R, I, E)  # kept and fresh columns distinct
    return _canon(p.c + mid, R, I, E)


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def to_json(p: Polynotope) -> dict:
    """JSON-ready dict: dense rows for ``R``, COO triplets for ``E``."""
    rows, cols = np.nonzero(p.E)
    triplets = [
        [int(r), int(col), int(p.E[r, col])] for r, col in zip(rows, cols)
    ]
    return {
        "c": [float(v) for v in p.c],
        "R": [[float(v) for v in row] for row in p.R],
        "I": [int(i) for i in p.I],
        "E": triplets,
    }


def from_json(obj: dict) -> Polynotope:
    """Inverse of :func:`to_json`; the identity on canonical polynotopes."""
    try:
        c = np.asarray(obj["c"], dtype=float)
        I = np.asarray(obj["I"], dtype=np.int64)
        R = np.asarray(obj["R"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise DomainError(f"malformed polynotope record: {e}") from None
    n = c.shape[0]
    if R.size == 0:
        R = np.zeros((n, 0))
    m = R.shape[1]
    E = np.zeros((I.size, m), dtype=np.int16)
    for r, col, e in obj.get("E", []):
        E[int(r), int(col)] = int(e)
    return make(c, R, I, E)


def dumps(p: Polynotope) -> str:
    return json.dumps(to_json(p))


def loads(text: str) -> Polynotope:
    return from_json(json.loads(text))


# --------------------------------------------------------------------------
# sampling support (oracles, containment checks)
# --------------------------------------------------------------------------


def sample_valuations(I, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform valuations respecting each symbol's typed domain."""
    I = np.asarray(I, dtype=np.int64)
    out = np.empty((count, I.size))
    for r, sid in enumerate(I):
        t = type_of(int(sid))
        if t == SymbolType.INTERVAL:
            out[:, r] = rng.uniform(-1.0, 1.0, size=count)
        elif t == SymbolType.SIGNED:
            out[:, r] = rng.choice([-1.0, 1.0], size=count)
        elif t == SymbolType.BOOLEAN:
            out[:, r] = rng.choice([0.0, 1.0], size=count)
        else:
            raise DomainError("cannot sample an unspecified-type symbol")
    return out
