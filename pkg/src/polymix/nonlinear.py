"""Dependency-preserving enclosures of non-polynomial scalar functions.

For a C1 convex or concave f on a box [lo, hi] with midpoint mid and radius
rad > 0, write delta = (x - mid)/rad in [-1, 1] and consider the secant
approximation ymid + yrad * delta through the endpoint values.  Its
remainder r(delta) = f(mid + rad*delta) - (ymid + yrad*delta) vanishes at
delta = +-1 and is one-signed in between, extremized where the derivative
matches the secant slope yrad/rad, at delta*.  Folding the remainder range
into half offset plus half radius gives the affine-in-(delta, epsilon)
enclosure

    f(x)  in  g0 + g1 * delta + g2 * epsilon,    epsilon in [-1, 1],
    g0 = ymid + r(delta*)/2,   g1 = yrad,   g2 = |r(delta*)|/2,

tight at both endpoints.  Because delta is affine in x, substituting a
polynotope for x keeps all of its symbol dependencies; only the remainder
enters through one fresh interval symbol.  The absolute value gets the same
treatment with the kink playing the role of delta*, and the usual switching
functions (max, min, saturation, deadzone, relu) are exact arithmetic
combinations of abs, so they inherit the enclosure componentwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import polynotope as pn
from .errors import DimensionError, DomainError
from .symbols import SymbolProvider, SymbolType, provider

__all__ = [
    "UnitMap",
    "Enclosure",
    "ConvexFn",
    "EXP",
    "LOG",
    "SQRT",
    "unit_map",
    "enclose_c1",
    "enclose_abs",
    "apply_scalar",
    "vabs",
    "maximum",
    "minimum",
    "saturation",
    "deadzone",
    "relu",
]


@dataclass(frozen=True)
class UnitMap:
    """Affine chart mapping a box onto [-1, 1]; degenerate when rad = 0."""

    mid: float
    rad: float

    def forward(self, x: float) -> float:
        return 0.0 if self.rad == 0.0 else (x - self.mid) / self.rad

    def inverse(self, delta: float) -> float:
        return self.mid + self.rad * delta


def unit_map(lo: float, hi: float) -> UnitMap:
    if lo > hi:
        raise DomainError("box lower bound exceeds upper bound")
    return UnitMap(0.5 * (hi + lo), 0.5 * (hi - lo))


@dataclass(frozen=True)
class Enclosure:
    """Coefficients of the affine enclosure g0 + g1*delta + g2*epsilon."""

    g0: float
    g1: float
    g2: float

    def __post_init__(self):
        if self.g2 < 0:
            raise DomainError("enclosure radius must be nonnegative")


@dataclass(frozen=True)
class ConvexFn:
    """A C1 function convex or concave on every queried box.

    ``xstar`` optionally returns the x solving f'(x) = slope in closed
    form; otherwise a bisection on the monotone derivative is used.
    """

    name: str
    fn: Callable[[float], float]
    dfn: Callable[[float], float]
    convex: bool
    domain_lo: float = -math.inf
    xstar: Callable[[float, float, float], float] | None = None  # (lo, hi, slope)


EXP = ConvexFn("exp", math.exp, math.exp, convex=True,
               xstar=lambda lo, hi, slope: math.log(slope))
LOG = ConvexFn("log", math.log, lambda x: 1.0 / x, convex=False,
               domain_lo=0.0, xstar=lambda lo, hi, slope: 1.0 / slope)
SQRT = ConvexFn("sqrt", math.sqrt, lambda x: 0.5 / math.sqrt(x), convex=False,
                domain_lo=0.0,
                xstar=lambda lo, hi, slope: 0.25 / (slope * slope))

_NAMED = {"exp": EXP, "log": LOG, "sqrt": SQRT}

_BISECT_TOL = 1e-12
_BISECT_MAX = 200


def _solve_xstar(f: ConvexFn, lo: float, hi: float, slope: float) -> float:
    """Point where f' equals the secant slope, by closed form or bisection."""
    if f.xstar is not None:
        return f.xstar(lo, hi, slope)
    # f' is monotone under convexity/concavity, so bisection applies
    a, b = lo, hi
    ga = f.dfn(a) - slope
    for _ in range(_BISECT_MAX):
        m = 0.5 * (a + b)
        gm = f.dfn(m) - slope
        if gm == 0.0 or (b - a) <= _BISECT_TOL:
            return m
        if (ga < 0) == (gm < 0):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b)


def enclose_c1(f: ConvexFn | str, lo: float, hi: float) -> Enclosure:
    """Affine enclosure of a convex/concave C1 function on [lo, hi]."""
    if isinstance(f, str):
        f = _NAMED[f]
    if lo > hi:
        raise DomainError("box lower bound exceeds upper bound")
    if lo < f.domain_lo or (lo == f.domain_lo and f.name == "log"):
        raise DomainError(f"box [{lo}, {hi}] outside the domain of {f.name}")
    mid, rad = 0.5 * (hi + lo), 0.5 * (hi - lo)
    if rad == 0.0:
        y = f.fn(mid)
        if not math.isfinite(y):
            raise DomainError(f"{f.name} not finite at {mid}")
        return Enclosure(y, 0.0, 0.0)
    ylo, yhi = f.fn(lo), f.fn(hi)
    if not (math.isfinite(ylo) and math.isfinite(yhi)):
        raise DomainError(f"{f.name} not finite on [{lo}, {hi}]")
    ymid, yrad = 0.5 * (yhi + ylo), 0.5 * (yhi - ylo)
    xs = _solve_xstar(f, lo, hi, yrad / rad)
    xs = min(max(xs, lo), hi)
    rstar = f.fn(xs) - (ymid + yrad * (xs - mid) / rad)
    return Enclosure(ymid + 0.5 * rstar, yrad, 0.5 * abs(rstar))


def enclose_abs(lo: float, hi: float) -> Enclosure:
    """Enclosure of |x| on [lo, hi]; exact (g2 = 0) when 0 is not interior."""
    if lo > hi:
        raise DomainError("box lower bound exceeds upper bound")
    mid, rad = 0.5 * (hi + lo), 0.5 * (hi - lo)
    if rad == 0.0:
        return Enclosure(abs(mid), 0.0, 0.0)
    if hi <= 0.0:  # |x| = -x exactly
        return Enclosure(-mid, -rad, 0.0)
    if lo >= 0.0:  # |x| = +x exactly
        return Enclosure(mid, rad, 0.0)
    # kink inside: secant slope mid/rad, remainder extremum at x = 0
    return Enclosure(
        (rad * rad + mid * mid) / (2.0 * rad),
        mid,
        (rad * rad - mid * mid) / (2.0 * rad),
    )


def _compose_rows(x: pn.Polynotope, encs: list[Enclosure],
                  prov: SymbolProvider) -> pn.Polynotope:
    """Assemble g0 + g1 * mu(x_i) + g2 * eps_i componentwise over rows."""
    n = x.dim
    box = pn.box_hull(x)
    mid, rad = box.mid, box.rad
    scale = np.array([
        0.0 if rad[i] == 0.0 else encs[i].g1 / rad[i] for i in range(n)
    ])
    c = np.array([
        encs[i].g0 + scale[i] * (x.c[i] - mid[i]) for i in range(n)
    ])
    R_lin = scale[:, None] * x.R
    g2 = np.array([e.g2 for e in encs])
    live = np.flatnonzero(g2 > 0.0)
    if live.size == 0:
        return pn._prune(c, R_lin, x.I, x.E)
    eps = prov.fresh(live.size, SymbolType.INTERVAL)
    while x.I.size and np.isin(eps, x.I).any():
        eps = prov.fresh(live.size, SymbolType.INTERVAL)
    R = np.hstack([R_lin, np.zeros((n, live.size))])
    R[live, x.gen_count + np.arange(live.size)] = g2[live]
    I = np.concatenate([x.I, eps])
    E = np.zeros((I.size, R.shape[1]), dtype=np.int16)
    E[: x.symbol_count, : x.gen_count] = x.E
    E[x.symbol_count :, x.gen_count :] = np.eye(live.size, dtype=np.int16)
    if x.I.size == 0 or eps[0] > x.I[-1]:
        return pn._prune(c, R, I, E)
    return pn._canon(c, R, I, E)


def apply_scalar(f, x: pn.Polynotope,
                 prov: SymbolProvider | None = None) -> pn.Polynotope:
    """Enclose f applied componentwise to a polynotope.

    ``f`` is 'abs', one of the named convex/concave functions ('exp',
    'log', 'sqrt'), or a :class:`ConvexFn`.  The output keeps every symbol
    of ``x`` (the secant part is affine in ``x``) and adds at most one
    fresh interval symbol per component for the remainder, never reused
    across calls: each remainder is an independent unknown.
    """
    prov = prov or provider()
    box = pn.box_hull(x)
    if isinstance(f, str) and f == "abs":
        encs = [enclose_abs(lo, hi) for lo, hi in zip(box.lo, box.hi)]
    else:
        encs = [enclose_c1(f, lo, hi) for lo, hi in zip(box.lo, box.hi)]
    return _compose_rows(x, encs, prov)


def vabs(x: pn.Polynotope, prov: SymbolProvider | None = None) -> pn.Polynotope:
    """Componentwise absolute-value enclosure."""
    return apply_scalar("abs", x, prov)


def _broadcast_pair(x, y):
    if isinstance(x, (int, float)):
        x = pn.punctual(np.full(y.dim, float(x)))
    if isinstance(y, (int, float)):
        y = pn.punctual(np.full(x.dim, float(y)))
    if x.dim != y.dim:
        if x.dim == 1:
            x = pn.linear_image(np.ones((y.dim, 1)), x)
        elif y.dim == 1:
            y = pn.linear_image(np.ones((x.dim, 1)), y)
        else:
            raise DimensionError(f"dimension mismatch: {x.dim} vs {y.dim}")
    return x, y


def maximum(*args, prov: SymbolProvider | None = None) -> pn.Polynotope:
    """max(x, y, ...) = (x+y)/2 + |x-y|/2, folded as a balanced tree."""
    return _fold_minmax(list(args), +1.0, prov)


def minimum(*args, prov: SymbolProvider | None = None) -> pn.Polynotope:
    """min(x, y, ...) = (x+y)/2 - |x-y|/2, folded as a balanced tree."""
    return _fold_minmax(list(args), -1.0, prov)


def _fold_minmax(args, sign, prov):
    if not args:
        raise DimensionError("need at least one operand")
    if len(args) == 1:
        x = args[0]
        return x if isinstance(x, pn.Polynotope) else pn.punctual([float(x)])
    if len(args) == 2:
        x, y = _broadcast_pair(args[0], args[1])
        return 0.5 * (x + y) + (0.5 * sign) * vabs(x - y, prov)
    half = len(args) // 2
    return _fold_minmax(
        [_fold_minmax(args[:half], sign, prov),
         _fold_minmax(args[half:], sign, prov)],
        sign, prov,
    )


def saturation(x: pn.Polynotope, lo: float, hi: float,
               prov: SymbolProvider | None = None) -> pn.Polynotope:
    """Clip to [lo, hi]:  (lo + hi + |lo - x| - |x - hi|) / 2."""
    if lo > hi:
        raise DomainError("saturation bounds inverted")
    return 0.5 * ((lo + hi) + vabs(lo - x, prov) - vabs(x - hi, prov))


def deadzone(x: pn.Polynotope, lo: float, hi: float,
             prov: SymbolProvider | None = None) -> pn.Polynotope:
    """x - sat(x, lo, hi)."""
    return x - saturation(x, lo, hi, prov)


def relu(x: pn.Polynotope, prov: SymbolProvider | None = None) -> pn.Polynotope:
    """max(0, x) = (x + |x|) / 2."""
    return 0.5 * (x + vabs(x, prov))
