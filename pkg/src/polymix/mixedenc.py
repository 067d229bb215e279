"""Hierarchical dyadic encodings of intervals with discrete symbols.

An n-level encoding splits an interval into 2^n congruent cells addressed
by n discrete symbols, plus one interval symbol covering the remainder
inside a cell.  The coefficient row is

    rho(n) = [(1/2)^1, ..., (1/2)^n, (1/2)^n],      rho(0) = [1],

whose entries sum to one.  With signed symbols, ``0 + rho(n) . s`` ranges
over [-1, +1] exactly and fixing the discrete part selects one of 2^n
subintervals of width 2 * (1/2)^n that tile [-1, +1]; scaling and shifting
then encodes any c +/- r.  The boolean flavor encodes [0, 1]: the discrete
terms reuse the dyadic weights and the remainder enters as
(1/2)^n * (1 + iota)/2, keeping both the unit range and the exact tiling.

Every encode call draws fresh symbols, so separately encoded quantities
share no symbols and are independent by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import polynotope as pn
from .errors import DomainError
from .symbols import SymbolProvider, SymbolType, provider

__all__ = ["EncodingSpec", "rho", "encode_unit", "encode_interval", "encode_bounds"]


@dataclass(frozen=True)
class EncodingSpec:
    """Level (number of discrete symbols) and discrete flavor."""

    level: int
    flavor: SymbolType = SymbolType.SIGNED

    def __post_init__(self):
        if self.level < 0:
            raise DomainError("encoding level must be nonnegative")
        if self.flavor not in (SymbolType.SIGNED, SymbolType.BOOLEAN):
            raise DomainError("encoding flavor must be signed or boolean")


def rho(n: int) -> np.ndarray:
    """Dyadic weight row [(1/2)^1, ..., (1/2)^n, (1/2)^n]; sums to 1 exactly."""
    if n < 0:
        raise DomainError("level must be nonnegative")
    if n == 0:
        return np.ones(1)
    w = 0.5 ** np.arange(1, n + 1)
    return np.concatenate([w, w[-1:]])


def encode_unit(spec: EncodingSpec, prov: SymbolProvider | None = None) -> pn.Polynotope:
    """Unit-range encoding: [-1, 1] for signed flavor, [0, 1] for boolean.

    Allocates ``level`` discrete symbols plus one interval symbol.
    """
    prov = prov or provider()
    n = spec.level
    discrete = prov.fresh(n, spec.flavor)
    remainder = prov.fresh(1, SymbolType.INTERVAL)
    ids = np.concatenate([discrete, remainder])
    weights = rho(n)
    if spec.flavor == SymbolType.BOOLEAN:
        # remainder recoded onto [0, 1]: (1/2)^n * (1 + iota) / 2
        center = np.array([0.5 * weights[-1]])
        weights = weights.copy()
        weights[-1] *= 0.5
    else:
        center = np.zeros(1)
    return pn.make(center, weights[None, :], ids, np.eye(n + 1, dtype=np.int16))


def encode_interval(center: float, radius: float, spec: EncodingSpec,
                    prov: SymbolProvider | None = None) -> pn.Polynotope:
    """Encoding of ``center +/- radius`` (signed flavor recommended)."""
    if radius < 0:
        raise DomainError("radius must be nonnegative")
    if spec.flavor == SymbolType.BOOLEAN:
        return encode_bounds(center - radius, center + radius, spec, prov)
    unit = encode_unit(spec, prov)
    return float(radius) * unit + float(center)


def encode_bounds(lower: float, upper: float, spec: EncodingSpec,
                  prov: SymbolProvider | None = None) -> pn.Polynotope:
    """Encoding of ``[lower, upper]``."""
    if lower > upper:
        raise DomainError("lower bound exceeds upper bound")
    if spec.flavor == SymbolType.SIGNED:
        return encode_interval(0.5 * (lower + upper), 0.5 * (upper - lower),
                               spec, prov)
    unit = encode_unit(spec, prov)
    return float(upper - lower) * unit + float(lower)
