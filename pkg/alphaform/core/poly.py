"""
Exact sparse multivariate polynomials over a named variable registry.

Polynomials are sympy ``PolyElement`` values in a ``PolyRing`` over QQ with
graded-lex order; the registry fixes the variable order and the class of
each variable. Determinants are fraction-free (Bareiss) with exact divisions.
"""
import logging
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, model_validator
from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

from .errors import NonExactDivision, RegistryMismatch

logger = logging.getLogger(__name__)

MPoly = PolyElement
Rational = Union[int, Fraction]


class VarClass(str, Enum):
    """Variable classes of a registry."""
    SCHWINGER = "schwinger"
    POSITION = "position"
    DODGSON = "dodgson"
    MOMENTUM = "momentum"
    MASS = "mass"


class ArithOp(str, Enum):
    """Operations accepted by ``poly_arith``."""
    ADD = "add"
    MUL = "mul"
    NEG = "neg"
    SCALAR_MUL = "scalar_mul"


def schwinger_name(edge: int) -> str:
    return f"a{edge}"


def position_name(vertex: int) -> str:
    return f"x{vertex}"


def dodgson_symbol_name(i: int, j: int) -> str:
    i, j = sorted((i, j))
    return f"D{i}_{j}"


def momentum_name(i: int, j: int) -> str:
    i, j = sorted((i, j))
    return f"s{i}_{j}"


def mass_name(edge: int) -> str:
    return f"mu{edge}"


@lru_cache(maxsize=None)
def _build_ring(names: Tuple[str, ...]) -> PolyRing:
    return PolyRing(names, QQ, grlex)


class VarRegistry(BaseModel):
    """Ordered, classified variable names and the polynomial ring over them."""
    model_config = ConfigDict(frozen=True)

    names: Tuple[str, ...]
    classes: Tuple[VarClass, ...]

    @model_validator(mode="after")
    def _check_names(self) -> "VarRegistry":
        if len(self.names) != len(self.classes):
            raise ValueError("every variable needs exactly one class")
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be unique")
        return self

    @property
    def ring(self) -> PolyRing:
        return _build_ring(self.names)

    def gen(self, name: str) -> MPoly:
        try:
            return self.ring.gens[self.names.index(name)]
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def class_of(self, name: str) -> VarClass:
        return self.classes[self.names.index(name)]

    def names_of(self, var_class: VarClass) -> Tuple[str, ...]:
        return tuple(n for n, c in zip(self.names, self.classes) if c == var_class)

    @classmethod
    def build(cls, groups: Iterable[Tuple[VarClass, Iterable[str]]]) -> "VarRegistry":
        names: List[str] = []
        classes: List[VarClass] = []
        for var_class, group in groups:
            for name in group:
                names.append(name)
                classes.append(var_class)
        return cls(names=tuple(names), classes=tuple(classes))

    @classmethod
    def for_edges(
        cls,
        edge_count: int,
        position_vertices: Sequence[int] = (),
        momentum_vertices: Sequence[int] = (),
        masses: bool = False,
    ) -> "VarRegistry":
        """Schwinger variables a1..am, then positions, then s_ij and mu_e."""
        edges = range(1, edge_count + 1)
        momenta = [
            momentum_name(i, j)
            for k, i in enumerate(momentum_vertices)
            for j in momentum_vertices[k:]
        ]
        return cls.build([
            (VarClass.SCHWINGER, [schwinger_name(e) for e in edges]),
            (VarClass.POSITION, [position_name(v) for v in position_vertices]),
            (VarClass.MOMENTUM, momenta),
            (VarClass.MASS, [mass_name(e) for e in edges] if masses else []),
        ])

    @classmethod
    def formal_dodgson(cls, labels: int) -> "VarRegistry":
        """Commuting symbols D_{i,j}, 1 <= i < j <= labels."""
        return cls.build([(VarClass.DODGSON, [
            dodgson_symbol_name(i, j)
            for i in range(1, labels + 1)
            for j in range(i + 1, labels + 1)
        ])])


def check_same_ring(*polys: MPoly) -> PolyRing:
    rings = {p.ring for p in polys}
    if len(rings) != 1:
        raise RegistryMismatch(
            "operands use different registries: "
            + ", ".join(str(r.symbols) for r in rings)
        )
    return rings.pop()


def to_qq(value: Rational) -> Any:
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def to_fraction(value: Any) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def poly_arith(op: ArithOp, p: MPoly, q: Optional[Union[MPoly, Rational]] = None) -> MPoly:
    """Exact ring arithmetic with a registry check on polynomial operands."""
    if op == ArithOp.NEG:
        return -p
    if op == ArithOp.SCALAR_MUL:
        if isinstance(q, PolyElement):
            check_same_ring(p, q)
            if not q.is_ground:
                raise ValueError("scalar_mul expects a constant polynomial or a rational")
            return p * q
        return p.mul_ground(to_qq(q))
    check_same_ring(p, q)
    if op == ArithOp.ADD:
        return p + q
    if op == ArithOp.MUL:
        return p * q
    raise ValueError(f"Unsupported operation: {op}")


def exact_div(dividend: MPoly, divisor: MPoly) -> MPoly:
    """Exact quotient; a nonzero remainder raises with the remainder attached."""
    check_same_ring(dividend, divisor)
    if not divisor:
        raise ZeroDivisionError("polynomial division by zero")
    quotient, remainder = dividend.div(divisor)
    if remainder:
        raise NonExactDivision(dividend, divisor, remainder)
    return quotient


def divides(divisor: MPoly, dividend: MPoly) -> bool:
    try:
        exact_div(dividend, divisor)
    except NonExactDivision:
        return False
    return True


def eval_int(p: MPoly, assignment: Mapping[str, Rational]) -> Fraction:
    """Evaluate at rational values; every variable present in ``p`` must be assigned."""
    ring = p.ring
    present = {
        str(ring.symbols[i])
        for monom in p.monoms()
        for i, exponent in enumerate(monom)
        if exponent
    }
    missing = sorted(present - set(assignment))
    if missing:
        raise KeyError(f"no value for variables: {', '.join(missing)}")
    if not p:
        return Fraction(0)
    if ring.ngens == 0:
        return to_fraction(p.LC)
    values = [to_qq(assignment.get(str(s), 0)) for s in ring.symbols]
    return to_fraction(p(*values))


def monomial(ring: PolyRing, exponents: Mapping[str, int], coeff: Rational = 1) -> MPoly:
    names = [str(s) for s in ring.symbols]
    expv = tuple(exponents.get(n, 0) for n in names)
    return ring.from_dict({expv: to_qq(coeff)})


def relabel(p: MPoly, target: PolyRing, name_map: Mapping[str, str]) -> MPoly:
    """Move ``p`` into ``target``, renaming variables through ``name_map``."""
    source_names = [str(s) for s in p.ring.symbols]
    target_names = [str(s) for s in target.symbols]
    terms: Dict[Tuple[int, ...], Any] = {}
    for monom, coeff in p.terms():
        expv = [0] * target.ngens
        for source_index, exponent in enumerate(monom):
            if exponent:
                name = source_names[source_index]
                expv[target_names.index(name_map.get(name, name))] += exponent
        terms[tuple(expv)] = coeff
    return target.from_dict(terms)


def homogeneous_degree(p: MPoly, names: Iterable[str]) -> Optional[int]:
    """Common degree of all terms in the given variables, or None."""
    symbols = [str(s) for s in p.ring.symbols]
    indices = [symbols.index(n) for n in names if n in symbols]
    degrees = {sum(monom[i] for i in indices) for monom in p.monoms()}
    if not degrees:
        return 0
    return degrees.pop() if len(degrees) == 1 else None


def rational_content(polys: Iterable[MPoly]) -> Fraction:
    """Positive rational gcd of every coefficient; 1 for the zero family."""
    content = QQ.zero
    for p in polys:
        for coeff in p.coeffs():
            content = QQ.gcd(content, coeff)
    return to_fraction(content) if content else Fraction(1)


def _format_rational(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def poly_to_text(p: MPoly) -> str:
    """Canonical text: ``c*a1^e1*...`` terms in graded-lex order."""
    if not p:
        return "0"
    names = [str(s) for s in p.ring.symbols]
    parts: List[str] = []
    for monom, coeff in p.terms():
        value = to_fraction(coeff)
        factors = [
            name if exponent == 1 else f"{name}^{exponent}"
            for name, exponent in zip(names, monom)
            if exponent
        ]
        magnitude = abs(value)
        if factors and magnitude == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_format_rational(magnitude)] + factors)
        sign = "-" if value < 0 else "+"
        parts.append(f"{sign} {body}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


def poly_to_json(p: MPoly) -> List[List[Any]]:
    """``[[exponents], numerator, denominator]`` per term, canonical order."""
    return [
        [list(monom), int(coeff.numerator), int(coeff.denominator)]
        for monom, coeff in p.terms()
    ]


def poly_from_json(ring: PolyRing, data: Sequence[Sequence[Any]]) -> MPoly:
    terms = {}
    for exponents, numerator, denominator in data:
        if len(exponents) != ring.ngens:
            raise ValueError(f"expected {ring.ngens} exponents, got {len(exponents)}")
        terms[tuple(exponents)] = QQ(numerator, denominator)
    return ring.from_dict(terms)


class PolyMatrix(BaseModel):
    """Dense rectangular matrix of polynomials over one ring."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    ring: Any
    rows: Tuple[Tuple[Any, ...], ...]

    @model_validator(mode="after")
    def _check_shape(self) -> "PolyMatrix":
        if not isinstance(self.ring, PolyRing):
            raise TypeError("matrix ring must be a PolyRing")
        widths = {len(r) for r in self.rows}
        if len(widths) > 1:
            raise ValueError("matrix rows differ in length")
        for row in self.rows:
            for entry in row:
                if not isinstance(entry, PolyElement) or entry.ring != self.ring:
                    raise RegistryMismatch("matrix entry outside the matrix ring")
        return self

    @classmethod
    def from_rows(cls, ring: PolyRing, rows: Sequence[Sequence[Any]]) -> "PolyMatrix":
        return cls(ring=ring, rows=tuple(tuple(ring(v) for v in row) for row in rows))

    @property
    def shape(self) -> Tuple[int, int]:
        if not self.rows:
            return (0, 0)
        return (len(self.rows), len(self.rows[0]))

    def minor(self, drop_rows: Iterable[int] = (), drop_cols: Iterable[int] = ()) -> "PolyMatrix":
        """Remove the given 0-based rows and columns."""
        drop_rows, drop_cols = set(drop_rows), set(drop_cols)
        return PolyMatrix(ring=self.ring, rows=tuple(
            tuple(v for j, v in enumerate(row) if j not in drop_cols)
            for i, row in enumerate(self.rows)
            if i not in drop_rows
        ))


def _require_square(matrix: PolyMatrix) -> int:
    rows, cols = matrix.shape
    if rows != cols:
        raise ValueError(f"determinant of a non-square {rows}x{cols} matrix")
    return rows


def det_laplace(matrix: PolyMatrix) -> MPoly:
    """Cofactor expansion along the first row."""
    n = _require_square(matrix)
    ring = matrix.ring
    if n == 0:
        return ring.one
    if n == 1:
        return matrix.rows[0][0]
    total = ring.zero
    for j, entry in enumerate(matrix.rows[0]):
        if not entry:
            continue
        cofactor = det_laplace(matrix.minor([0], [j]))
        total += entry * cofactor if j % 2 == 0 else -(entry * cofactor)
    return total


LAPLACE_MAX_DIM = 4


def det_bareiss(matrix: PolyMatrix) -> MPoly:
    """Fraction-free determinant; Laplace expansion up to dimension 4."""
    n = _require_square(matrix)
    if n <= LAPLACE_MAX_DIM:
        return det_laplace(matrix)

    ring = matrix.ring
    work = [list(row) for row in matrix.rows]
    sign = 1
    previous = ring.one
    for k in range(n - 1):
        candidates = [i for i in range(k, n) if work[i][k]]
        if not candidates:
            return ring.zero
        # sparsest nonzero pivot, lowest row on ties
        pivot = min(candidates, key=lambda i: (len(work[i][k]), i))
        if pivot != k:
            work[k], work[pivot] = work[pivot], work[k]
            sign = -sign
        pivot_entry = work[k][k]
        for i in range(k + 1, n):
            lead = work[i][k]
            for j in range(k + 1, n):
                numerator = pivot_entry * work[i][j] - lead * work[k][j]
                work[i][j] = exact_div(numerator, previous) if numerator else ring.zero
            work[i][k] = ring.zero
        previous = pivot_entry
    result = work[n - 1][n - 1]
    return result if sign > 0 else -result
