"""Allocator behavior: typed id encoding, uniqueness, overflow."""

import threading

import pytest

from polymix.errors import AllocationError
from polymix.symbols import (
    SymbolProvider,
    SymbolType,
    fresh,
    fresh_provider,
    type_of,
)


def test_zero_count_allocation_is_empty():
    assert fresh(0, SymbolType.INTERVAL).size == 0


def test_first_signed_batch_encodes_counter_and_type():
    # counter values 1,2,3 with type code 2 -> ids 6, 10, 14
    with fresh_provider() as prov:
        ids = prov.fresh(3, SymbolType.SIGNED)
        assert ids.tolist() == [6, 10, 14]
        assert all(i % 4 == 2 for i in ids)


def test_boolean_after_signed_continues_counter():
    # counter 4 with type code 3 -> id 19
    with fresh_provider() as prov:
        prov.fresh(3, SymbolType.SIGNED)
        assert prov.fresh(1, SymbolType.BOOLEAN).tolist() == [19]


@pytest.mark.parametrize(
    "symbol_id,expected",
    [
        (6, SymbolType.SIGNED),
        (1, SymbolType.INTERVAL),
        (0, SymbolType.UNSPECIFIED),
        (19, SymbolType.BOOLEAN),
    ],
)
def test_type_decoding(symbol_id, expected):
    assert type_of(symbol_id) == expected


def test_type_round_trip_over_all_types():
    with fresh_provider() as prov:
        for t in SymbolType:
            for i in prov.fresh(5, t):
                assert type_of(int(i)) == t


def test_ids_strictly_increase_and_never_repeat():
    with fresh_provider() as prov:
        seen = []
        for t in (SymbolType.INTERVAL, SymbolType.BOOLEAN, SymbolType.SIGNED):
            seen.extend(prov.fresh(17, t).tolist())
        counters = [i >> 2 for i in seen]
        assert len(set(seen)) == len(seen)
        assert counters == sorted(counters)


def test_concurrent_allocations_are_disjoint():
    prov = SymbolProvider()
    chunks = [[] for _ in range(8)]

    def worker(out):
        for _ in range(50):
            out.extend(prov.fresh(7, SymbolType.INTERVAL).tolist())

    threads = [threading.Thread(target=worker, args=(c,)) for c in chunks]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    allocated = [i for c in chunks for i in c]
    assert len(set(allocated)) == len(allocated) == 8 * 50 * 7


def test_counter_overflow_is_fatal():
    prov = SymbolProvider()
    prov._counter = 2**62 - 2
    prov.fresh(1, SymbolType.INTERVAL)  # exactly at the limit is fine
    with pytest.raises(AllocationError):
        prov.fresh(1, SymbolType.INTERVAL)


def test_negative_count_rejected():
    with pytest.raises(ValueError):
        fresh(-1, SymbolType.INTERVAL)


def test_memo_tables_are_stable():
    prov = SymbolProvider()
    b = prov.fresh_one(SymbolType.BOOLEAN)
    s1 = prov.memo_bool_to_signed(b)
    s2 = prov.memo_bool_to_signed(b)
    assert s1 == s2 and type_of(s1) == SymbolType.SIGNED
    key = ((5, 1), (9, 2))
    i1 = prov.memo_monomial(key)
    i2 = prov.memo_monomial(key)
    assert i1 == i2 and type_of(i1) == SymbolType.INTERVAL
    assert prov.memo_monomial(((5, 1),)) != i1
