"""Logic over bi-valued real domains as polynomial algebra.

Propositional operators become polynomials once truth values are embedded
in the reals, either as the signed pair {-1, +1} or the boolean pair
{0, 1}.  Composition of gate polynomials plus the typed power rewrites
(signed squares vanish, boolean powers cap at one) keeps every circuit a
multi-affine polynomial over its input symbols, so entire combinational
netlists collapse into a single polynotope whose monomial count measures
the intrinsic complexity of the function.

The two embeddings are exchangeable through the affine re-scaling
r(x) = (1 + x)/2 from signed onto boolean truth values.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import polynotope as pn
from .errors import DimensionError, DomainError
from .symbols import SymbolProvider, SymbolType, provider, type_of

__all__ = [
    "GateKind",
    "TruthTable",
    "gate",
    "compare",
    "decompose",
    "nand_synthesis",
    "adder",
    "adder_census",
    "verify_adder",
]


class GateKind(Enum):
    NOT = "not"
    AND = "and"
    OR = "or"
    NAND = "nand"
    NOR = "nor"
    IMP = "imp"
    EQV = "eqv"
    XOR = "xor"
    TRUE = "true"
    FALSE = "false"


_BINARY = {GateKind.AND, GateKind.OR, GateKind.NAND, GateKind.NOR,
           GateKind.IMP, GateKind.EQV, GateKind.XOR}


def _domain(flavor: SymbolType) -> tuple[float, float]:
    if flavor == SymbolType.SIGNED:
        return -1.0, 1.0
    if flavor == SymbolType.BOOLEAN:
        return 0.0, 1.0
    raise DomainError("logic flavor must be signed or boolean")


def _check_operand(x: pn.Polynotope, flavor: SymbolType, name: str) -> None:
    if x.dim != 1:
        raise DimensionError(f"gate operand {name} must be scalar")
    if x.symbol_count:
        types = x.I % 4
        if np.any(types != int(flavor)):
            raise DomainError(
                f"operand {name} mixes symbol types with the {flavor.name} flavor"
            )
    else:
        lo, hi = _domain(flavor)
        if float(x.c[0]) not in (lo, hi):
            raise DomainError(
                f"punctual operand {name}={x.c[0]} outside {flavor.name} domain"
            )


def gate(kind: GateKind, a: pn.Polynotope | None = None,
         b: pn.Polynotope | None = None,
         flavor: SymbolType = SymbolType.SIGNED) -> pn.Polynotope:
    """Apply a logic operator to polynotope truth values.

    Binary kinds need both operands, NOT needs one, TRUE/FALSE none.  The
    returned polynomial agrees with the classical operator on every
    punctual input of the flavor's domain and interpolates in between.
    """
    kind = GateKind(kind)
    signed = flavor == SymbolType.SIGNED
    if kind == GateKind.TRUE:
        return pn.punctual([1.0])
    if kind == GateKind.FALSE:
        return pn.punctual([-1.0 if signed else 0.0])
    if a is None:
        raise DomainError(f"{kind.value} needs an operand")
    _check_operand(a, flavor, "a")
    if kind == GateKind.NOT:
        return (-1.0 * a) if signed else (1.0 - a)
    if kind not in _BINARY:
        raise DomainError(f"unknown gate kind {kind}")
    if b is None:
        raise DomainError(f"{kind.value} needs two operands")
    _check_operand(b, flavor, "b")
    ab = a * b
    if signed:
        if kind == GateKind.AND:
            return 0.5 * (a + b + ab - 1.0)
        if kind == GateKind.OR:
            return 0.5 * (a + b - ab + 1.0)
        if kind == GateKind.NAND:
            return 0.5 * (1.0 - a - b - ab)
        if kind == GateKind.NOR:
            return 0.5 * (ab - a - b - 1.0)
        if kind == GateKind.IMP:
            return 0.5 * (1.0 - a + b + ab)
        if kind == GateKind.EQV:
            return ab
        return -1.0 * ab  # XOR
    if kind == GateKind.AND:
        return ab
    if kind == GateKind.OR:
        return a + b - ab
    if kind == GateKind.NAND:
        return 1.0 - ab
    if kind == GateKind.NOR:
        return 1.0 - a - b + ab
    if kind == GateKind.IMP:
        return 1.0 - a + ab
    if kind == GateKind.EQV:
        return 1.0 - a - b + 2.0 * ab
    return a + b - 2.0 * ab  # XOR


_COMPARE = {"<=", "<", ">", ">="}


def compare(op: str, a: pn.Polynotope, b: pn.Polynotope,
            flavor: SymbolType = SymbolType.SIGNED) -> pn.Polynotope:
    """Order relations on truth values: ``a <= b`` is implication."""
    if op not in _COMPARE:
        raise DomainError(f"unknown comparison {op!r}")
    if op == "<=":
        return gate(GateKind.IMP, a, b, flavor)
    if op == ">=":
        return gate(GateKind.IMP, b, a, flavor)
    if op == ">":
        return gate(GateKind.NOT, gate(GateKind.IMP, a, b, flavor), flavor=flavor)
    return gate(GateKind.NOT, gate(GateKind.IMP, b, a, flavor), flavor=flavor)


@dataclass(frozen=True)
class TruthTable:
    """Outputs of a p-ary function on the full grid of its domain.

    Row order: inputs enumerated lexicographically with the first variable
    as the most significant digit and each variable running over its
    domain low-to-high ({-1,+1} signed, {0,1} boolean).
    """

    arity: int
    outputs: tuple

    def __post_init__(self):
        if self.arity < 0 or len(self.outputs) != 2**self.arity:
            raise DimensionError("truth table must list 2^arity outputs")

    @classmethod
    def from_function(cls, arity: int, fn, flavor: SymbolType) -> "TruthTable":
        lo, hi = _domain(flavor)
        outs = []
        for idx in range(2**arity):
            bits = [(idx >> (arity - 1 - k)) & 1 for k in range(arity)]
            outs.append(float(fn(*[hi if b else lo for b in bits])))
        return cls(arity, tuple(outs))

    def validate(self, flavor: SymbolType) -> None:
        lo, hi = _domain(flavor)
        if any(v not in (lo, hi) for v in self.outputs):
            raise DomainError(f"outputs must lie in the {flavor.name} domain")


def decompose(tt: TruthTable, flavor: SymbolType = SymbolType.SIGNED,
              ids=None, prov: SymbolProvider | None = None) -> pn.Polynotope:
    """Multi-affine polynomial reproducing ``tt`` exactly on its grid.

    Peels variables left to right.  Signed flavor splits each level into
    the average of the two branches plus the variable times their half
    gap; boolean flavor uses the zero branch plus the variable times the
    branch difference.  Either way every exponent stays in {0, 1}.
    """
    tt.validate(flavor)
    if ids is None:
        prov = prov or provider()
        ids = prov.fresh(tt.arity, flavor).tolist()
    ids = [int(i) for i in ids]
    if len(ids) != tt.arity:
        raise DimensionError("need one symbol per truth-table input")
    for i in ids:
        if type_of(i) != flavor:
            raise DomainError(f"symbol {i} is not of the {flavor.name} type")
    outputs = np.asarray(tt.outputs, dtype=float)

    def build(values: np.ndarray, syms: list[int]) -> pn.Polynotope:
        if not syms:
            return pn.punctual([values[0]])
        half = values.size // 2
        low = build(values[:half], syms[1:])   # first variable at domain low
        high = build(values[half:], syms[1:])
        x = pn.from_symbol(syms[0])
        if flavor == SymbolType.SIGNED:
            return 0.5 * (high + low) + x * (0.5 * (high - low))
        return low + x * (high - low)

    return build(outputs, ids)


def nand_synthesis(tt: TruthTable, flavor: SymbolType = SymbolType.SIGNED,
                   ids=None, prov: SymbolProvider | None = None) -> pn.Polynotope:
    """Synthesize ``tt`` as a sum-of-minterms circuit built only from NAND.

    Witnesses functional completeness: the result agrees with
    :func:`decompose` on the whole grid.
    """
    tt.validate(flavor)
    if ids is None:
        prov = prov or provider()
        ids = prov.fresh(tt.arity, flavor).tolist()
    ids = [int(i) for i in ids]
    lo, hi = _domain(flavor)

    def nand(x, y):
        return gate(GateKind.NAND, x, y, flavor)

    def neg(x):
        return nand(x, x)

    def conj(x, y):
        return neg(nand(x, y))

    def disj(x, y):
        return nand(neg(x), neg(y))

    minterms = []
    for idx, out in enumerate(tt.outputs):
        if out != hi:
            continue
        term = None
        for k, sym in enumerate(ids):
            bit = (idx >> (tt.arity - 1 - k)) & 1
            lit = pn.from_symbol(sym)
            if not bit:
                lit = neg(lit)
            term = lit if term is None else conj(term, lit)
        if term is None:  # zero-ary constant-true table
            term = gate(GateKind.TRUE, flavor=flavor)
        minterms.append(term)
    if not minterms:
        return gate(GateKind.FALSE, flavor=flavor)
    acc = minterms[0]
    for term in minterms[1:]:
        acc = disj(acc, term)
    return acc


# --------------------------------------------------------------------------
# adders built purely from nand gates
# --------------------------------------------------------------------------


def _half_adder(a, b, flavor):
    def nand(x, y):
        return gate(GateKind.NAND, x, y, flavor)

    t1 = nand(a, b)
    t2 = nand(a, t1)
    t3 = nand(t1, b)
    s = nand(t2, t3)
    c = nand(t1, t1)
    return s, c


def _full_adder(a, b, cin, flavor):
    def nand(x, y):
        return gate(GateKind.NAND, x, y, flavor)

    r, c1 = _half_adder(a, b, flavor)
    s, c2 = _half_adder(r, cin, flavor)
    cout = nand(nand(c1, c1), nand(c2, c2))
    return s, cout


def adder(n: int, flavor: SymbolType = SymbolType.SIGNED,
          prov: SymbolProvider | None = None) -> pn.Polynotope:
    """Ripple-carry n-bit adder over 2n+1 fresh symbols, nand gates only.

    Symbols are allocated in the order A bits, B bits, input carry, so the
    sorted symbol vector of the result recovers the circuit inputs.  Rows
    0..n-1 are the sum bits (least significant first), row n the carry out.
    """
    if n < 1:
        raise DomainError("adder needs at least one bit")
    prov = prov or provider()
    a_ids = prov.fresh(n, flavor)
    b_ids = prov.fresh(n, flavor)
    carry_id = prov.fresh(1, flavor)
    carry = pn.from_symbol(int(carry_id[0]))
    sum_bits = []
    for i in range(n):
        s, carry = _full_adder(
            pn.from_symbol(int(a_ids[i])), pn.from_symbol(int(b_ids[i])),
            carry, flavor,
        )
        sum_bits.append(s)
    return pn.vcat(*sum_bits, carry)


def adder_census(n: int, flavor: SymbolType = SymbolType.SIGNED,
                 prov: SymbolProvider | None = None) -> int:
    """Distinct monomials of the n-bit adder, the constant one included."""
    return adder(n, flavor, prov).gen_count + 1


def verify_adder(n: int, flavor: SymbolType = SymbolType.SIGNED,
                 prov: SymbolProvider | None = None,
                 chunk: int = 4096) -> bool:
    """Exhaustively check the adder against integer addition (n <= 8)."""
    if n > 8:
        raise DomainError("exhaustive verification supported up to 8 bits")
    circuit = adder(n, flavor, prov)
    p = circuit.symbol_count
    assert p == 2 * n + 1
    lo, hi = _domain(flavor)
    total = 2**p
    # circuit.I is sorted = allocation order: A bits, B bits, carry-in
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = (idx[:, None] >> np.arange(p)[None, :]) & 1
        sigma = np.where(bits == 1, hi, lo).astype(float)
        out = pn.evaluate_batch(circuit, sigma)
        out_bits = (out - lo) / (hi - lo)
        if not np.allclose(out_bits, np.round(out_bits), atol=1e-9):
            return False
        out_bits = np.round(out_bits).astype(np.int64)
        a = (bits[:, :n] << np.arange(n)[None, :]).sum(axis=1)
        b = (bits[:, n : 2 * n] << np.arange(n)[None, :]).sum(axis=1)
        cin = bits[:, 2 * n]
        got = (out_bits[:, :n] << np.arange(n)[None, :]).sum(axis=1)
        got += out_bits[:, n] << n
        if not np.array_equal(got, a + b + cin):
            return False
    return True
