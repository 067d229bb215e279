"""Enclosures of exp/log/sqrt/abs and the switching-function compositions.

Oracles: dense grid sweeps for containment and remainder-sign checks,
punctual evaluation for exactness.
"""

import itertools
import math

import numpy as np
import pytest

from polymix import polynotope as pn
from polymix.errors import DomainError
from polymix.nonlinear import (
    EXP,
    LOG,
    SQRT,
    ConvexFn,
    apply_scalar,
    deadzone,
    enclose_abs,
    enclose_c1,
    maximum,
    minimum,
    relu,
    saturation,
    unit_map,
)
from polymix.symbols import SymbolType


def sweep_contained(enc, fn, lo, hi, points=10_000, tol=1e-9):
    """Every f(x) on the grid lies in g0 + g1*mu(x) +/- g2."""
    xs = np.linspace(lo, hi, points)
    mid, rad = 0.5 * (hi + lo), 0.5 * (hi - lo)
    delta = (xs - mid) / rad if rad else np.zeros_like(xs)
    center = enc.g0 + enc.g1 * delta
    vals = np.array([fn(x) for x in xs])
    return bool(np.all(np.abs(vals - center) <= enc.g2 + tol))


def remainder(fn, lo, hi, points=10_000):
    xs = np.linspace(lo, hi, points)
    ylo, yhi = fn(lo), fn(hi)
    ymid, yrad = 0.5 * (yhi + ylo), 0.5 * (yhi - ylo)
    mid, rad = 0.5 * (hi + lo), 0.5 * (hi - lo)
    delta = (xs - mid) / rad
    return np.array([fn(x) for x in xs]) - (ymid + yrad * delta)


class TestUnitMap:
    def test_basic(self):
        u = unit_map(-1.0, 3.0)
        assert (u.mid, u.rad) == (1.0, 2.0)

    def test_degenerate_maps_to_zero(self):
        u = unit_map(2.0, 2.0)
        assert u.forward(2.0) == 0.0

    def test_bijective_on_unit_range(self):
        u = unit_map(-1.0, 3.0)
        for d in np.linspace(-1, 1, 11):
            assert abs(u.forward(u.inverse(d)) - d) < 1e-15

    def test_inverted_box_rejected(self):
        with pytest.raises(DomainError):
            unit_map(1.0, 0.0)


class TestEncloseC1:
    def test_exp_reference_box(self):
        enc = enclose_c1(EXP, 0.5, 1.5)
        yrad = 0.5 * (math.exp(1.5) - math.exp(0.5))
        assert abs(enc.g1 - yrad) < 1e-12
        # the touch point solves f'(x) = secant slope
        xs = math.log(enc.g1 / 0.5)
        delta_star = (xs - 1.0) / 0.5
        assert abs(delta_star - 0.0826497092) < 1e-9
        assert abs(enc.g2 - 0.1746546767) < 1e-9
        assert abs(EXP.dfn(xs) - enc.g1 / 0.5) < 1e-9
        assert sweep_contained(enc, math.exp, 0.5, 1.5)

    def test_punctual_box_short_circuits(self):
        enc = enclose_c1(EXP, 1.2, 1.2)
        assert (enc.g0, enc.g1, enc.g2) == (math.exp(1.2), 0.0, 0.0)

    def test_decreasing_function_accepted(self):
        # exp(-x) is convex and decreasing: negative secant slope is fine
        f = ConvexFn("expneg", lambda x: math.exp(-x),
                     lambda x: -math.exp(-x), convex=True)
        enc = enclose_c1(f, -0.5, 2.0)
        assert enc.g1 < 0
        assert sweep_contained(enc, f.fn, -0.5, 2.0)

    @pytest.mark.parametrize("f,fn", [(EXP, math.exp), (LOG, math.log),
                                      (SQRT, math.sqrt)])
    def test_named_functions_random_boxes(self, f, fn, rng):
        for _ in range(25):
            lo = rng.uniform(0.05, 3.0)
            hi = lo + rng.uniform(1e-3, 2.0)
            enc = enclose_c1(f, lo, hi)
            assert sweep_contained(enc, fn, lo, hi)
            r = remainder(fn, lo, hi)
            rstar = 2.0 * enc.g2 * (-1.0 if f.convex else 1.0)
            lo_r, hi_r = min(rstar, 0.0), max(rstar, 0.0)
            assert np.all(r >= lo_r - 1e-12) and np.all(r <= hi_r + 1e-12)

    def test_bisection_agrees_with_explicit_form(self):
        blind = ConvexFn("exp-blind", math.exp, math.exp, convex=True)
        for lo, hi in [(0.5, 1.5), (-2.0, -0.5), (0.0, 3.0)]:
            a, b = enclose_c1(EXP, lo, hi), enclose_c1(blind, lo, hi)
            assert abs(a.g0 - b.g0) < 1e-9
            assert abs(a.g2 - b.g2) < 1e-9

    def test_domain_violation(self):
        with pytest.raises(DomainError):
            enclose_c1(LOG, -1.0, 2.0)
        with pytest.raises(DomainError):
            enclose_c1(SQRT, -0.5, 1.0)


class TestEncloseAbs:
    def test_negative_box_is_exact_negation(self):
        enc = enclose_abs(-2.0, -1.0)
        assert (enc.g0, enc.g1, enc.g2) == (1.5, -0.5, 0.0)
        assert sweep_contained(enc, abs, -2.0, -1.0, tol=0.0)

    def test_positive_box_is_exact_identity(self):
        enc = enclose_abs(1.0, 4.0)
        assert (enc.g0, enc.g1, enc.g2) == (2.5, 1.5, 0.0)

    def test_straddling_reference_box(self):
        enc = enclose_abs(-1.0, 3.0)
        # slope mid/rad = 0.5 and offset/radius (rad^2 - mid^2)/(2 rad) = 0.75
        assert (enc.g1 / 2.0, enc.g2) == (0.5, 0.75)
        assert sweep_contained(enc, abs, -1.0, 3.0)
        # hull at x = 3 is [1.5, 3]
        top = enc.g0 + enc.g1 + enc.g2
        bot = enc.g0 + enc.g1 - enc.g2
        assert (bot, top) == (1.5, 3.0)

    def test_symmetric_unit_box(self):
        enc = enclose_abs(-1.0, 1.0)
        assert (enc.g0, enc.g1, enc.g2) == (0.5, 0.0, 0.5)

    def test_hull_touches_endpoints_exactly_on_dyadic_boxes(self):
        # dyadic mid/rad keep all formula terms on a binary grid
        for rad in (0.25, 0.5, 1.0, 2.0, 4.0):
            for k in range(-7, 8):
                mid = k * rad / 8.0
                lo, hi = mid - rad, mid + rad
                if not (lo < 0.0 < hi):
                    continue
                enc = enclose_abs(lo, hi)
                assert enc.g0 - enc.g1 + enc.g2 == abs(lo)
                assert enc.g0 + enc.g1 + enc.g2 == abs(hi)

    def test_random_boxes_touch_within_float_error(self, rng):
        for _ in range(200):
            mid = rng.uniform(-5, 5)
            rad = rng.uniform(1e-6, 10)
            lo, hi = mid - rad, mid + rad
            enc = enclose_abs(lo, hi)
            scale = max(abs(lo), abs(hi), 1.0)
            assert abs(enc.g0 - enc.g1 + enc.g2 - abs(lo)) <= 1e-12 * scale
            assert abs(enc.g0 + enc.g1 + enc.g2 - abs(hi)) <= 1e-12 * scale


def eps_slice_contains(y, x, fn_vals, sigma, tol=1e-9):
    """f(x(sigma)) must lie within the epsilon-slice of y at sigma."""
    eps_ids = sorted(set(y.I.tolist()) - set(x.I.tolist()))
    eps_cols = np.zeros((y.dim, 0))
    if eps_ids:
        cols = []
        for e in eps_ids:
            r = int(np.searchsorted(y.I, e))
            col_idx = np.flatnonzero(y.E[r] == 1)
            g = np.zeros(y.dim)
            for j in col_idx:
                g += np.abs(y.R[:, j])
            cols.append(g)
        eps_cols = np.array(cols).T
    slack = eps_cols.sum(axis=1) if eps_ids else np.zeros(y.dim)
    full = {**{int(i): v for i, v in zip(x.I, sigma)},
            **{int(e): 0.0 for e in eps_ids}}
    center = pn.evaluate(y, full)
    return np.all(np.abs(fn_vals - center) <= slack + tol)


class TestApplyScalar:
    def test_punctual_input_is_exact(self, isolated_provider):
        x = pn.punctual([1.3])
        y = apply_scalar("exp", x, isolated_provider)
        assert y.is_punctual and y.c[0] == math.exp(1.3)

    def test_unit_interval_abs(self, rng, isolated_provider):
        iota = isolated_provider.fresh_one(SymbolType.INTERVAL)
        x = pn.from_symbol(iota)
        y = apply_scalar("abs", x, isolated_provider)
        box = pn.box_hull(y)
        assert (box.lo[0], box.hi[0]) == (0.0, 1.0)
        sliced = pn.substitute(y, {iota: 0.7})
        b = pn.box_hull(sliced)
        assert b.lo[0] <= 0.7 <= b.hi[0]

    def test_dependencies_preserved_through_signed_symbol(self, isolated_provider):
        s = isolated_provider.fresh_one(SymbolType.SIGNED)
        x = pn.make([0.5], [[0.25]], [s], [[1]])
        y = apply_scalar("exp", x, isolated_provider)
        assert int(s) in y.I.tolist()  # the signed dependency survives
        types = set((y.I % 4).tolist())
        assert types <= {SymbolType.INTERVAL, SymbolType.SIGNED}

    @pytest.mark.parametrize("name,fn", [("exp", math.exp), ("abs", abs),
                                         ("sqrt", math.sqrt), ("log", math.log)])
    def test_containment_over_sampled_valuations(self, name, fn, rng,
                                                 isolated_provider):
        iv = isolated_provider.fresh(2, SymbolType.INTERVAL)
        sg = isolated_provider.fresh(1, SymbolType.SIGNED)
        ids = np.concatenate([iv, sg])
        offset = 3.0 if name in ("sqrt", "log") else 0.0
        x = pn.make([offset], [[0.8, 0.3, 0.4]], np.sort(ids),
                    [[1, 0, 0], [0, 2, 0], [0, 0, 1]])
        y = apply_scalar(name, x, isolated_provider)
        sigma = pn.sample_valuations(x.I, 1000, rng)
        vals = pn.evaluate_batch(x, sigma)[:, 0]
        fvals = np.array([fn(v) for v in vals])
        for k in range(sigma.shape[0]):
            assert eps_slice_contains(y, x, fvals[k], sigma[k])


class TestSwitching:
    def test_punctual_identities_exhaustive(self, isolated_provider):
        pts = [-3.0, -1.0, 0.0, 2.0, 5.0]
        for a, b in itertools.product(pts, repeat=2):
            m = minimum(pn.punctual([a]), pn.punctual([b]),
                        prov=isolated_provider)
            M = maximum(pn.punctual([a]), pn.punctual([b]),
                        prov=isolated_provider)
            assert m.is_punctual and m.c[0] == min(a, b)
            assert M.is_punctual and M.c[0] == max(a, b)
        for v in pts:
            s = saturation(pn.punctual([v]), -1.0, 1.0, prov=isolated_provider)
            d = deadzone(pn.punctual([v]), -1.0, 1.0, prov=isolated_provider)
            r = relu(pn.punctual([v]), prov=isolated_provider)
            assert s.c[0] == min(max(v, -1.0), 1.0)
            assert d.c[0] == v - min(max(v, -1.0), 1.0)
            assert r.c[0] == max(v, 0.0)

    def test_min_of_constants(self, isolated_provider):
        out = minimum(pn.punctual([3.0]), pn.punctual([5.0]),
                      prov=isolated_provider)
        assert out.c[0] == 3.0

    def test_sat_punctual_above(self, isolated_provider):
        out = saturation(pn.punctual([2.0]), -1.0, 1.0, prov=isolated_provider)
        assert out.c[0] == 1.0

    def test_relu_of_unit_interval(self, isolated_provider):
        iota = isolated_provider.fresh_one(SymbolType.INTERVAL)
        y = relu(pn.from_symbol(iota), isolated_provider)
        box = pn.box_hull(y)
        # affine remainder enclosure: hull [-1/2, 1] covering the true [0, 1]
        assert box.lo[0] <= 0.0 and box.hi[0] >= 1.0
        assert (box.lo[0], box.hi[0]) == (-0.5, 1.0)
        xs = np.linspace(-1, 1, 500)
        for xv in xs:
            sl = pn.box_hull(pn.substitute(y, {iota: float(xv)}))
            assert sl.lo[0] - 1e-9 <= max(xv, 0.0) <= sl.hi[0] + 1e-9

    def test_nary_minimum_matches_scalar_oracle(self, rng, isolated_provider):
        ids = isolated_provider.fresh(3, SymbolType.INTERVAL)
        x = pn.make([1.0, -0.5, 2.0, 0.3],
                    rng.normal(size=(4, 3)), ids, np.eye(3, dtype=np.int16))
        y = minimum(x[0], x[1], x[2], x[3], prov=isolated_provider)
        sigma = pn.sample_valuations(x.I, 500, rng)
        vals = pn.evaluate_batch(x, sigma)
        for k in range(500):
            expect = vals[k].min()
            full = {int(i): v for i, v in zip(x.I, sigma[k])}
            for e in y.I:
                full.setdefault(int(e), 0.0)
            box = pn.box_hull(pn.substitute(y, {i: full[i] for i in map(int, x.I)}))
            assert box.lo[0] - 1e-9 <= expect <= box.hi[0] + 1e-9

    def test_componentwise_switching_containment(self, rng, isolated_provider):
        ids = isolated_provider.fresh(2, SymbolType.INTERVAL)
        x = pn.make([0.5, -1.0], rng.normal(size=(2, 2)), ids,
                    np.eye(2, dtype=np.int16))
        yv = pn.make([0.0, 1.0], rng.normal(size=(2, 2)),
                     isolated_provider.fresh(2, SymbolType.INTERVAL),
                     np.eye(2, dtype=np.int16))
        out = {
            "max": (maximum(x, yv, prov=isolated_provider), np.maximum),
            "min": (minimum(x, yv, prov=isolated_provider), np.minimum),
        }
        all_ids = np.union1d(x.I, yv.I)
        sigma = pn.sample_valuations(all_ids, 400, rng)
        vx = pn.evaluate_batch(x, sigma[:, np.searchsorted(all_ids, x.I)])
        vy = pn.evaluate_batch(yv, sigma[:, np.searchsorted(all_ids, yv.I)])
        for name, (poly, fn) in out.items():
            expect = fn(vx, vy)
            for k in range(0, 400, 7):
                sub = {int(i): sigma[k, j] for j, i in enumerate(all_ids)}
                keepable = {i: sub[i] for i in map(int, poly.I) if i in sub}
                box = pn.box_hull(pn.substitute(poly, keepable))
                assert np.all(expect[k] >= box.lo - 1e-9), name
                assert np.all(expect[k] <= box.hi + 1e-9), name
