"""Unique typed symbol identifiers.

Every uncertain quantity in this library is expressed over *symbols*: scalar
variables that carry a domain through their type,

    INTERVAL -> [-1, +1]      SIGNED -> {-1, +1}      BOOLEAN -> {0, 1}

and that are identified by a globally unique nonnegative integer.  The two
low bits of an identifier encode the type, the remaining bits hold the value
of a process-wide allocation counter, so distinct allocations can never
produce equal identifiers and the type can be decoded from the identifier
alone.  Sharing an identifier is what lets downstream algebra cancel
dependent uncertainty exactly (``x - x = 0``) instead of inflating it.

The provider also owns two memo tables used by the hull rewrites of
:mod:`polymix.polynotope`; keeping them here makes those rewrites global,
which is what renders them inclusion-neutral.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from enum import IntEnum

import numpy as np

from .errors import AllocationError, DomainError

__all__ = [
    "SymbolType",
    "SymbolProvider",
    "fresh",
    "type_of",
    "provider",
    "fresh_provider",
]

# Counter budget: ids are 64-bit with 2 type bits, and we refuse to wrap.
_MAX_COUNTER = 2**62 - 1
_TYPE_BITS = 2


class SymbolType(IntEnum):
    """Symbol type tag; the integer value is the 2-bit id suffix."""

    UNSPECIFIED = 0
    INTERVAL = 1
    SIGNED = 2
    BOOLEAN = 3


class SymbolProvider:
    """Allocator of unique typed symbol identifiers.

    ``fresh`` reserves a counter range under a lock, so concurrent callers
    always receive disjoint identifiers.  Instances also hold the global
    rewrite memos (boolean-to-signed and monomial-to-interval replacement
    symbols) used when computing enclosures.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._counter = 0
        # bool symbol id -> signed symbol id (affine recoding of {0,1})
        self.bool_to_signed: dict[int, int] = {}
        # packed monomial key -> interval symbol id standing for its range
        self.monomial_to_interval: dict[tuple, int] = {}

    def fresh(self, n: int, t: SymbolType) -> np.ndarray:
        """Return ``n`` new identifiers of type ``t``, strictly increasing."""
        if n < 0:
            raise ValueError(f"symbol count must be nonnegative, got {n}")
        t = SymbolType(t)
        with self._lock:
            if self._counter + n > _MAX_COUNTER:
                raise AllocationError("symbol counter exhausted")
            start = self._counter + 1
            self._counter += n
        counters = np.arange(start, start + n, dtype=np.int64)
        return (counters << _TYPE_BITS) + int(t)

    def fresh_one(self, t: SymbolType) -> int:
        return int(self.fresh(1, t)[0])

    def memo_bool_to_signed(self, bool_id: int) -> int:
        """Signed replacement symbol for a boolean symbol (stable per id)."""
        with self._lock:
            got = self.bool_to_signed.get(bool_id)
        if got is not None:
            return got
        fresh_id = self.fresh_one(SymbolType.SIGNED)
        with self._lock:
            return self.bool_to_signed.setdefault(bool_id, fresh_id)

    def memo_monomial(self, key: tuple) -> int:
        """Interval replacement symbol for a monomial, stable per exponent
        pattern.  ``key`` is a tuple of ``(symbol_id, exponent)`` pairs."""
        with self._lock:
            got = self.monomial_to_interval.get(key)
        if got is not None:
            return got
        fresh_id = self.fresh_one(SymbolType.INTERVAL)
        with self._lock:
            return self.monomial_to_interval.setdefault(key, fresh_id)


_global = SymbolProvider()


def provider() -> SymbolProvider:
    """The process-wide provider used by default everywhere."""
    return _global


def fresh(n: int, t: SymbolType) -> np.ndarray:
    """Allocate ``n`` fresh identifiers of type ``t`` from the global provider."""
    return _global.fresh(n, t)


def type_of(symbol_id: int) -> SymbolType:
    """Decode the type carried by an identifier (its two low bits)."""
    if symbol_id < 0:
        raise DomainError(f"symbol ids are nonnegative, got {symbol_id}")
    return SymbolType(symbol_id & 0b11)


@contextmanager
def fresh_provider():
    """Swap in a pristine provider (tests use this to pin allocation order)."""
    global _global
    saved = _global
    _global = SymbolProvider()
    try:
        yield _global
    finally:
        _global = saved
