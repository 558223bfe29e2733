"""
Exterior algebra over polynomial coefficients and the scalar prefactor algebra.

Words are strictly ascending tuples of generators; every da_e sorts before
every dx_v. Half-integer powers of π, ψ and a_e live in ``ScalarPrefactor``
as doubled integer exponents.
"""
import logging
from enum import IntEnum
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict
from sympy.combinatorics import Permutation
from sympy.polys.rings import PolyRing

from .poly import MPoly, check_same_ring, poly_to_text

logger = logging.getLogger(__name__)


class GenKind(IntEnum):
    DA = 0
    DX = 1


class Generator(NamedTuple):
    """da_e or dx_v; tuple order is the canonical generator order."""
    kind: GenKind
    index: int

    def __str__(self) -> str:
        return f"{'da' if self.kind == GenKind.DA else 'dx'}{self.index}"


Word = Tuple[Generator, ...]


def da(edge: int) -> Generator:
    return Generator(GenKind.DA, edge)


def dx(vertex: int) -> Generator:
    return Generator(GenKind.DX, vertex)


def permutation_sign(items: Sequence[Any]) -> int:
    """Sign of the permutation sorting ``items``; 0 when an item repeats."""
    items = list(items)
    if len(set(items)) != len(items):
        return 0
    if len(items) < 2:
        return 1
    order = sorted(range(len(items)), key=items.__getitem__)
    return Permutation(order).signature()


def shuffle_sign(first: Sequence[Any], second: Sequence[Any]) -> int:
    """sgn(E1⊕E2) = sgn_perm(E1⊕E2)·sgn_perm(E1)·sgn_perm(E2); 0 on a shared item."""
    if set(first) & set(second):
        return 0
    return (
        permutation_sign(list(first) + list(second))
        * permutation_sign(first)
        * permutation_sign(second)
    )


def canonicalize_mixed_term(factors: Sequence[Tuple[int, Generator]]) -> Tuple[int, Word]:
    """Sort a signed product of generators into canonical order."""
    sign = 1
    for factor_sign, _ in factors:
        sign *= factor_sign
    generators = [g for _, g in factors]
    parity = permutation_sign(generators)
    if parity == 0 or sign == 0:
        return 0, ()
    return sign * parity, tuple(sorted(generators))


def perfect_matchings(items: Sequence[Any]) -> Iterator[List[Tuple[Any, Any]]]:
    """Yield every partition of ``items`` into ordered pairs (first element leads)."""
    items = list(items)
    if not items:
        yield []
        return
    first = items.pop(0)
    for i, partner in enumerate(items):
        for rest in perfect_matchings(items[:i] + items[i + 1:]):
            yield [(first, partner)] + rest


class DiffForm:
    """Sparse map from canonical word to nonzero polynomial coefficient."""

    __slots__ = ("ring", "_terms")

    def __init__(self, ring: PolyRing, terms: Optional[Mapping[Word, MPoly]] = None):
        self.ring = ring
        cleaned: Dict[Word, MPoly] = {}
        for word, coeff in (terms or {}).items():
            word = tuple(word)
            if list(word) != sorted(set(word)):
                raise ValueError(f"word {format_word(word)} is not strictly ascending")
            if coeff.ring != ring:
                check_same_ring(coeff, ring.zero)
            if coeff:
                cleaned[word] = coeff
        self._terms = dict(sorted(cleaned.items()))

    @classmethod
    def zero(cls, ring: PolyRing) -> "DiffForm":
        return cls(ring)

    @classmethod
    def scalar(cls, coeff: MPoly) -> "DiffForm":
        return cls(coeff.ring, {(): coeff})

    @classmethod
    def generator(cls, gen: Generator, coeff: MPoly) -> "DiffForm":
        return cls(coeff.ring, {(gen,): coeff})

    @classmethod
    def from_terms(cls, ring: PolyRing, terms: Iterable[Tuple[Word, MPoly]]) -> "DiffForm":
        """Accumulate (word, coeff) pairs; words may repeat but must be canonical."""
        acc: Dict[Word, MPoly] = {}
        for word, coeff in terms:
            acc[word] = acc.get(word, ring.zero) + coeff
        return cls(ring, acc)

    def items(self) -> List[Tuple[Word, MPoly]]:
        return list(self._terms.items())

    def words(self) -> List[Word]:
        return list(self._terms)

    def coefficient(self, word: Iterable[Generator]) -> MPoly:
        return self._terms.get(tuple(word), self.ring.zero)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiffForm):
            return NotImplemented
        return self.ring == other.ring and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.ring, tuple(self._terms.items())))

    def degrees(self) -> List[int]:
        return sorted({len(w) for w in self._terms})

    @property
    def degree(self) -> Optional[int]:
        """Common degree of all terms; None for mixed or zero forms."""
        degrees = self.degrees()
        return degrees[0] if len(degrees) == 1 else None

    def term_count(self) -> int:
        """Number of monomial terms summed over all words."""
        return sum(len(c) for c in self._terms.values())

    def __add__(self, other: "DiffForm") -> "DiffForm":
        check_same_ring(self.ring.zero, other.ring.zero)
        return DiffForm.from_terms(self.ring, list(self.items()) + other.items())

    def __neg__(self) -> "DiffForm":
        return DiffForm(self.ring, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other: "DiffForm") -> "DiffForm":
        return self + (-other)

    def scale(self, factor: MPoly) -> "DiffForm":
        return DiffForm(self.ring, {w: c * factor for w, c in self._terms.items()})

    def map_coefficients(self, func: Callable[[MPoly], MPoly], ring: Optional[PolyRing] = None) -> "DiffForm":
        return DiffForm(ring or self.ring, {w: func(c) for w, c in self._terms.items()})

    def map_words(self, func: Callable[[Word], Word]) -> "DiffForm":
        """Rename words; the image words must stay canonical."""
        return DiffForm.from_terms(self.ring, [(func(w), c) for w, c in self._terms.items()])

    def select(self, predicate: Callable[[Word], bool]) -> "DiffForm":
        return DiffForm(self.ring, {w: c for w, c in self._terms.items() if predicate(w)})

    def __repr__(self) -> str:
        return f"DiffForm({format_form(self)})"


def wedge(left: DiffForm, right: DiffForm) -> DiffForm:
    """Bilinear wedge product with shuffle signs; repeated generators annihilate."""
    check_same_ring(left.ring.zero, right.ring.zero)
    acc: Dict[Word, MPoly] = {}
    for w1, c1 in left.items():
        for w2, c2 in right.items():
            sign = shuffle_sign(w1, w2)
            if not sign:
                continue
            word = tuple(sorted(w1 + w2))
            product = c1 * c2
            acc[word] = acc.get(word, left.ring.zero) + (product if sign > 0 else -product)
    return DiffForm(left.ring, acc)


def wedge_all(forms: Sequence[DiffForm], ring: PolyRing) -> DiffForm:
    result = DiffForm.scalar(ring.one)
    for form in forms:
        result = wedge(result, form)
    return result


def format_word(word: Sequence[Generator], separator: str = "∧") -> str:
    return separator.join(str(g) for g in word) if word else "1"


def format_form(form: DiffForm) -> str:
    if not form:
        return "0"
    return " + ".join(f"({poly_to_text(c)})·{format_word(w)}" for w, c in form.items())


class ScalarPrefactor(BaseModel):
    """q · π^{p/2} · ψ^{s/2} · Π a_e^{t_e/2} with doubled exponents."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coefficient: Fraction = Fraction(1)
    pi_half: int = 0
    psi_half: int = 0
    a_half: Tuple[int, ...] = ()

    def _a_pad(self, other: "ScalarPrefactor") -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        size = max(len(self.a_half), len(other.a_half))
        pad = lambda t: tuple(t) + (0,) * (size - len(t))
        return pad(self.a_half), pad(other.a_half)

    def mul(self, other: "ScalarPrefactor") -> "ScalarPrefactor":
        mine, theirs = self._a_pad(other)
        return ScalarPrefactor(
            coefficient=self.coefficient * other.coefficient,
            pi_half=self.pi_half + other.pi_half,
            psi_half=self.psi_half + other.psi_half,
            a_half=tuple(x + y for x, y in zip(mine, theirs)),
        )

    def square(self) -> "ScalarPrefactor":
        return self.mul(self)

    def scaled(self, factor: Fraction) -> "ScalarPrefactor":
        return self.model_copy(update={"coefficient": self.coefficient * Fraction(factor)})

    def render(self, with_pi: bool = False) -> str:
        parts = [f"({self.coefficient})"]
        if with_pi and self.pi_half:
            parts.append(f"π^{_half(self.pi_half)}")
        if self.psi_half:
            parts.append(f"ψ^{_half(self.psi_half)}")
        for edge, exponent in enumerate(self.a_half, start=1):
            if exponent:
                parts.append(f"a{edge}^{_half(exponent)}")
        return " · ".join(parts)


def prefactor_mul(left: ScalarPrefactor, right: ScalarPrefactor) -> ScalarPrefactor:
    return left.mul(right)


def prefactor_square(prefactor: ScalarPrefactor) -> ScalarPrefactor:
    return prefactor.square()


def _half(doubled: int) -> str:
    return str(doubled // 2) if doubled % 2 == 0 else f"({doubled}/2)"
