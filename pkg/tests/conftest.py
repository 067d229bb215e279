"""Shared helpers: random mixed polynotopes, canonical-form checks."""

import numpy as np
import pytest

from polymix import polynotope as pn
from polymix.symbols import SymbolType, fresh_provider

# id residues mod 4 encode the type: 1 interval, 2 signed, 3 boolean
IV, SG, BL = 1, 2, 3


def ids_of(*spec):
    """Literal typed ids, e.g. ids_of(IV, IV, SG) -> [1, 5, 2]."""
    counts = {IV: 0, SG: 0, BL: 0}
    out = []
    for t in spec:
        out.append(t + 4 * counts[t])
        counts[t] += 1
    return out


def typed_id(t, k):
    """The k-th literal id of residue class t (k = 0, 1, ...)."""
    return t + 4 * k


def assert_canonical(p):
    """Re-check every structural invariant of the canonical form."""
    n, m = p.R.shape
    assert p.c.shape == (n,)
    assert p.E.shape == (p.I.size, m)
    assert np.all(p.I[1:] > p.I[:-1]), "symbol ids not strictly increasing"
    if m:
        cols = {tuple(p.E[:, j]) for j in range(m)}
        assert len(cols) == m, "duplicate exponent columns"
        assert (p.E.sum(axis=0) > 0).all(), "constant column not folded"
        assert ((p.R != 0).any(axis=0)).all(), "zero generator column kept"
    if p.I.size:
        assert ((p.E != 0).any(axis=1)).all(), "unused symbol row kept"
    types = p.I % 4
    assert np.all(p.E[types == SymbolType.SIGNED] <= 1)
    assert np.all(p.E[types == SymbolType.BOOLEAN] <= 1)
    assert np.all(p.E >= 0)


def random_polynotope(rng, dim=2, n_interval=2, n_signed=1, n_boolean=1,
                      m=5, max_exp=3, base=0):
    """A random canonical mixed polynotope over literal typed ids."""
    ids = (
        [typed_id(IV, base + k) for k in range(n_interval)]
        + [typed_id(SG, base + k) for k in range(n_signed)]
        + [typed_id(BL, base + k) for k in range(n_boolean)]
    )
    p = len(ids)
    E = rng.integers(0, max_exp + 1, size=(p, m))
    c = rng.normal(size=dim)
    R = rng.normal(size=(dim, m))
    return pn.make(c, R, ids, E)


def coeff_map(p):
    """{(monomial as ((id, exp), ...)): generator column tuple} plus center."""
    entries = {}
    for j in range(p.gen_count):
        key = tuple(
            (int(i), int(e)) for i, e in zip(p.I, p.E[:, j]) if e
        )
        entries[key] = tuple(p.R[:, j])
    return tuple(p.c), entries


def assert_contained(points, box, tol=1e-9):
    points = np.atleast_2d(points)
    assert np.all(points >= box.lo[None, :] - tol), "below lower bound"
    assert np.all(points <= box.hi[None, :] + tol), "above upper bound"


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def isolated_provider():
    with fresh_provider() as prov:
        # keep fresh ids clear of the small literal ids tests write by hand
        prov._counter = 1_000_000
        yield prov
