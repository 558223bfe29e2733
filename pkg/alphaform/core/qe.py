"""
Q_E sums and their pairwise cancellation.

``qe_graph`` evaluates the Q_E sum with the Dodgson polynomials of a real
graph. ``qe_formal`` replaces every ψ^{i,j} by a commuting symbol D_{i,j} and
shows that the sum cancels independently of any graph. The certificate makes
that cancellation explicit as a sign-reversing involution on the terms.
"""
import logging
import math
from collections import Counter
from itertools import combinations, permutations
from typing import Dict, Iterator, List, NamedTuple, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict
from sympy.combinatorics import Permutation

from .alpha import edge_matching_sum, matching_multiplicity
from .dodgson import edge_dodgson
from .errors import CertificateFailure, GuardExceeded
from .forms import perfect_matchings, shuffle_sign
from .graph import Graph, loop_number
from .poly import MPoly, VarRegistry, dodgson_symbol_name

logger = logging.getLogger(__name__)

FORMAL_MAX_LOOPS = 4

Pair = Tuple[int, int]


def _check_even_loops(loops: int) -> None:
    if loops < 2 or loops % 2:
        raise ValueError(f"Q_E is defined for even loop number L >= 2, got L={loops}")


def _signed_bijection_sum(graph: Graph, first: Sequence[int], second: Sequence[int]) -> MPoly:
    """Σ_m sgn(m) Π ψ^{a_i, b_m(i)}, the Leibniz expansion of det[ψ^{a_i,b_j}]."""
    ring = graph.registry.ring
    total = ring.zero
    for perm in permutations(range(len(first))):
        term = ring.one
        for i, j in enumerate(perm):
            term *= edge_dodgson(graph, first[i], second[j])
            if not term:
                break
        total += term if Permutation(list(perm)).signature() > 0 else -term
    return total


def qe_graph(graph: Graph, edges: Sequence[int]) -> MPoly:
    """Q_E with the graph's own edge Dodgson polynomials."""
    loops = loop_number(graph)
    _check_even_loops(loops)
    chosen = sorted(edges)
    if len(set(chosen)) != len(chosen):
        raise ValueError(f"edge set {list(edges)} repeats an edge")
    if len(chosen) != 2 * loops:
        raise ValueError(f"expected {2 * loops} edges for L={loops}, got {len(chosen)}")
    for e in chosen:
        if not 1 <= e <= graph.edge_count:
            raise ValueError(f"edge {e} outside [1, {graph.edge_count}]")

    ring = graph.registry.ring
    multiplicity = matching_multiplicity(loops) ** 2
    total = ring.zero
    for first in combinations(chosen, loops):
        second = tuple(e for e in chosen if e not in first)
        cross = _signed_bijection_sum(graph, first, second)
        if not cross:
            continue
        intra_one, _ = edge_matching_sum(graph, first)
        intra_two, _ = edge_matching_sum(graph, second)
        total += cross * intra_one * intra_two * (shuffle_sign(first, second) * multiplicity)
    return total


def qe_formal(loops: int, quotient: bool = True) -> MPoly:
    """Full signed Q_E sum over permutations S of 1..2L in formal symbols D_{i,j}.

    With ``quotient`` the first half of S is kept ascending and each term is
    weighted by L!, the number of simultaneous reorderings of both halves.
    """
    _check_even_loops(loops)
    if loops > FORMAL_MAX_LOOPS:
        raise GuardExceeded("formal Q_E loop number", loops, FORMAL_MAX_LOOPS)
    labels = list(range(1, 2 * loops + 1))
    registry = VarRegistry.formal_dodgson(2 * loops)
    index = {name: i for i, name in enumerate(registry.names)}
    weight = matching_multiplicity(loops) ** 2 * (math.factorial(loops) if quotient else 1)

    counts: Counter = Counter()
    for word in _formal_words(labels, loops, quotient):
        sign = Permutation([s - 1 for s in word]).signature()
        first, second = word[:loops], word[loops:]
        cross = [(first[i], second[i]) for i in range(loops)]
        for solid_one in perfect_matchings(first):
            for solid_two in perfect_matchings(second):
                key = tuple(sorted(
                    index[dodgson_symbol_name(i, j)] for i, j in cross + solid_one + solid_two
                ))
                counts[key] += sign * weight

    ring = registry.ring
    terms = {}
    for key, coeff in counts.items():
        if coeff:
            exponents = [0] * ring.ngens
            for i in key:
                exponents[i] += 1
            terms[tuple(exponents)] = coeff
    logger.debug("formal Q_E for L=%d: %d monomials survive", loops, len(terms))
    return ring.from_dict(terms) if terms else ring.zero


def _formal_words(labels: Sequence[int], loops: int, quotient: bool) -> Iterator[Tuple[int, ...]]:
    if not quotient:
        yield from permutations(labels)
        return
    for first in combinations(labels, loops):
        rest = [v for v in labels if v not in first]
        for second in permutations(rest):
            yield tuple(first) + second


class FormalTerm(NamedTuple):
    """One summand of the formal Q_E: S = first ⊕ second and the solid matchings."""
    first: Tuple[int, ...]
    second: Tuple[int, ...]
    solid: Tuple[Pair, ...]

    @property
    def sign(self) -> int:
        return Permutation([s - 1 for s in self.first + self.second]).signature()

    @property
    def dashed(self) -> Tuple[Pair, ...]:
        return tuple(_pair(a, b) for a, b in zip(self.first, self.second))

    def factors(self) -> Tuple[Pair, ...]:
        """The multiset of D_{i,j} factors, sorted."""
        return tuple(sorted(self.dashed + self.solid))

    def canonical(self) -> "FormalTerm":
        """Lowest label in the first half, first half ascending, second half in tandem."""
        first, second = self.first, self.second
        if min(first + second) not in first:
            first, second = second, first
        order = sorted(range(len(first)), key=first.__getitem__)
        return FormalTerm(
            first=tuple(first[i] for i in order),
            second=tuple(second[i] for i in order),
            solid=tuple(sorted(_pair(a, b) for a, b in self.solid)),
        )

    def relabel(self, mapping: Dict[int, int]) -> "FormalTerm":
        return FormalTerm(
            first=tuple(mapping.get(v, v) for v in self.first),
            second=tuple(mapping.get(v, v) for v in self.second),
            solid=tuple(_pair(mapping.get(a, a), mapping.get(b, b)) for a, b in self.solid),
        )

    def __str__(self) -> str:
        sign = "+" if self.sign > 0 else "-"
        solid = ",".join(f"{{{a},{b}}}" for a, b in self.solid)
        return (
            f"{sign}({','.join(map(str, self.first))})⊕({','.join(map(str, self.second))})"
            f" solid {solid}"
        )


def _pair(a: int, b: int) -> Pair:
    return (a, b) if a < b else (b, a)


class AuxiliaryGraph(BaseModel):
    """Vertices are the labels of E; dashed edges cross the halves, solid edges stay inside."""
    model_config = ConfigDict(frozen=True)

    labels: Tuple[int, ...]
    white: Tuple[int, ...]
    black: Tuple[int, ...]
    dashed: Tuple[Pair, ...]
    solid: Tuple[Pair, ...]

    @classmethod
    def of(cls, term: FormalTerm) -> "AuxiliaryGraph":
        return cls(
            labels=tuple(sorted(term.first + term.second)),
            white=tuple(sorted(term.first)),
            black=tuple(sorted(term.second)),
            dashed=tuple(sorted(term.dashed)),
            solid=tuple(sorted(term.solid)),
        )

    def _partners(self, pairs: Sequence[Pair]) -> Dict[int, int]:
        partner = {}
        for a, b in pairs:
            partner[a], partner[b] = b, a
        return partner

    def cycle_from(self, start: int) -> List[int]:
        """Walk dashed, solid, dashed, … from ``start`` until it closes."""
        dashed, solid = self._partners(self.dashed), self._partners(self.solid)
        cycle = [start]
        current, use_dashed = start, True
        while True:
            current = (dashed if use_dashed else solid)[current]
            use_dashed = not use_dashed
            if current == start:
                return cycle
            cycle.append(current)

    def cycles(self) -> List[List[int]]:
        seen: Set[int] = set()
        found = []
        for v in self.labels:
            if v not in seen:
                cycle = self.cycle_from(v)
                seen.update(cycle)
                found.append(cycle)
        return found


class CertificateEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    term: str
    partner: str
    sign: int
    partner_sign: int
    fixed: Pair
    swapped: Tuple[Pair, ...]
    factors: Tuple[Pair, ...]


class CancellationCertificate(BaseModel):
    loops: int
    term_count: int
    pair_count: int
    entries: List[CertificateEntry]

    def entry_for(self, term: FormalTerm) -> CertificateEntry:
        text = str(term.canonical())
        for entry in self.entries:
            if entry.term == text:
                return entry
        raise KeyError(f"no certificate entry for {text}")


def involution(term: FormalTerm) -> Tuple[FormalTerm, Pair, Tuple[Pair, ...]]:
    """Reflect the cycle through the lowest label across the anchor–antipode axis."""
    graph = AuxiliaryGraph.of(term)
    anchor = min(graph.labels)
    cycle = graph.cycle_from(anchor)
    length = len(cycle)
    if length % 4:
        raise CertificateFailure(f"cycle of length {length} is not a multiple of four", term)
    antipode = cycle[length // 2]
    swaps = tuple(_pair(cycle[j], cycle[length - j]) for j in range(1, length // 2))
    mapping: Dict[int, int] = {}
    for a, b in swaps:
        mapping[a], mapping[b] = b, a
    return term.relabel(mapping).canonical(), (anchor, antipode), swaps


def formal_terms(loops: int) -> List[FormalTerm]:
    """Every canonical term: label 1 leads the first half, halves paired in tandem."""
    _check_even_loops(loops)
    labels = list(range(1, 2 * loops + 1))
    terms = []
    for rest in combinations(labels[1:], loops - 1):
        first = (1,) + rest
        remaining = [v for v in labels if v not in first]
        for second in permutations(remaining):
            for solid_one in perfect_matchings(first):
                for solid_two in perfect_matchings(second):
                    terms.append(FormalTerm(first, second, tuple(solid_one + solid_two)).canonical())
    return terms


def cancellation_certificate(loops: int) -> CancellationCertificate:
    """Pair every term with a partner of equal factors and opposite sign."""
    _check_even_loops(loops)
    if loops > FORMAL_MAX_LOOPS:
        raise GuardExceeded("certificate loop number", loops, FORMAL_MAX_LOOPS)
    terms = formal_terms(loops)
    known = set(terms)
    if len(known) != len(terms):
        raise CertificateFailure("term enumeration produced duplicates")

    entries = []
    for term in terms:
        partner, fixed, swaps = involution(term)
        if partner not in known:
            raise CertificateFailure("partner is not a term of the sum", term)
        if partner == term:
            raise CertificateFailure("term is its own partner", term)
        if partner.factors() != term.factors():
            raise CertificateFailure("partner has a different factor multiset", term)
        if partner.sign != -term.sign:
            raise CertificateFailure("partner has the same sign", term)
        if involution(partner)[0] != term:
            raise CertificateFailure("pairing is not an involution", term)
        entries.append(CertificateEntry(
            term=str(term),
            partner=str(partner),
            sign=term.sign,
            partner_sign=partner.sign,
            fixed=fixed,
            swapped=swaps,
            factors=term.factors(),
        ))
    logger.info("certificate L=%d: %d terms in %d pairs", loops, len(terms), len(terms) // 2)
    return CancellationCertificate(
        loops=loops,
        term_count=len(terms),
        pair_count=len(terms) // 2,
        entries=entries,
    )
