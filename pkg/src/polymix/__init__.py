"""Mixed polynotopes: set computation with typed symbols.

Sets are represented as polynomial images ``c + R * s^E`` of typed symbol
domains (interval, signed, boolean) and manipulated symbolically, so
dependent uncertainty cancels exactly, logic circuits become polynomials,
nonlinear maps get dependency-preserving affine enclosures, and a
set-membership Kalman filter falls out of the same algebra.
"""

from . import logic, mixedenc, mlc, nonlinear, pkf, reach, symbols
from .errors import (
    AllocationError,
    BlowUpError,
    ConfigError,
    DimensionError,
    DomainError,
    PolymixError,
)
from .polynotope import (
    IntervalVec,
    Polynotope,
    add,
    box_hull,
    covariation,
    evaluate,
    from_json,
    from_symbol,
    linear_image,
    make,
    monomial_range,
    multiply,
    punctual,
    reduce,
    row_product,
    substitute,
    to_json,
    translate,
    vcat,
    zono_hull,
)
from .symbols import SymbolProvider, SymbolType, fresh, type_of

__version__ = "0.1.0"
