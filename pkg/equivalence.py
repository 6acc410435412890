"""Exact equivalence checking for mixtures of product distributions.

P = Q iff P^{<=j} = Q^{<=j} for every prefix length j. For each j the checker keeps a
basis B_j of the coefficient vectors

    c_j(x) = (w_1 P_1^{<=j}(x), ..., w_kP P_kP^{<=j}(x), -v_1 Q_1^{<=j}(x), ..., -v_kQ Q_kQ^{<=j}(x))

over x in Σ^j, each basis vector tagged with the prefix x that produced it. The equation
of c_j(x) holds at z = (1, ..., 1) exactly when P^{<=j}(x) = Q^{<=j}(x). Every c_{j+1}(x, y)
is a linear combination of the one-coordinate extensions of B_j, so only those |B_j|·|Σ|
candidates need testing, and B_{j+1} is chosen among them.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from errors import InputError
from guards import Guard, check_enumeration
from linalg import RationalVector, holds_at_ones, independent_subset
from messages import format_text
from models import (Assignment, Mixture, ProductDistribution, mixture_prob,
                    require_valid_mixture)

logger = logging.getLogger(__name__)


class VerdictKind(Enum):
    """Outcome of an equivalence check"""
    EQUAL = "equal"
    NOT_EQUAL = "not_equal"


@dataclass(frozen=True)
class Verdict:
    """Equal, or NotEqual with a prefix witness x in Σ^depth where P and Q differ."""

    kind: VerdictKind
    depth: Optional[int] = None
    witness: Optional[Assignment] = None

    @classmethod
    def equal(cls) -> "Verdict":
        return cls(VerdictKind.EQUAL)

    @classmethod
    def not_equal(cls, witness: Sequence[str]) -> "Verdict":
        witness = tuple(witness)
        return cls(VerdictKind.NOT_EQUAL, len(witness), witness)

    @property
    def is_equal(self) -> bool:
        return self.kind == VerdictKind.EQUAL

    def to_dict(self) -> dict:
        if self.is_equal:
            return {"verdict": self.kind.value}
        return {"verdict": self.kind.value, "witness": {"i": self.depth, "x": list(self.witness)}}


@dataclass(frozen=True)
class TaggedBasisVector:
    """A basis coefficient vector and the prefix assignment that generated it."""

    coeffs: RationalVector
    tag: Assignment


@dataclass(frozen=True)
class TaggedBasis:
    """Linearly independent tagged coefficient vectors at prefix depth j."""

    depth: int
    vectors: Tuple[TaggedBasisVector, ...]

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def tags(self) -> List[Assignment]:
        return [vector.tag for vector in self.vectors]


StepResult = Tuple[Optional[Verdict], TaggedBasis]


def check_compatible(p: Mixture, q: Mixture):
    """Raise InputError unless P and Q share alphabet and coordinate count."""
    if p.alphabet != q.alphabet:
        raise InputError(format_text('alphabet_mismatch', left=list(p.alphabet.symbols),
                                     right=list(q.alphabet.symbols)))
    if p.n != q.n:
        raise InputError(format_text('length_mismatch', left=p.n, right=q.n))


def _scaled_weights(p: Mixture, q: Mixture) -> RationalVector:
    """(w_1, ..., w_kP, -v_1, ..., -v_kQ): the coefficient vector at depth 0."""
    return tuple(p.weights) + tuple(-v for v in q.weights)


def _column_factors(p: Mixture, q: Mixture, coordinate: int, position: int) -> RationalVector:
    """Per-component Pr[X_coordinate = symbol] in coefficient-vector order."""
    return (tuple(component.table[coordinate][position] for component in p.components)
            + tuple(component.table[coordinate][position] for component in q.components))


def coefficient_vector(p: Mixture, q: Mixture, x: Sequence[str]) -> RationalVector:
    """Recompute c_j(x) directly from the mixtures (used to check tag consistency)."""
    check_compatible(p, q)
    if not 1 <= len(x) <= p.n:
        raise InputError(format_text('prefix_length', length=len(x), n=p.n))
    vector = list(_scaled_weights(p, q))
    for coordinate, position in enumerate(p.alphabet.indices(x)):
        factors = _column_factors(p, q, coordinate, position)
        vector = [entry * factor for entry, factor in zip(vector, factors)]
    return tuple(vector)


def _screen_and_select(candidates: List[RationalVector], tags: List[Assignment],
                       depth: int) -> StepResult:
    """Test every candidate at z = 1, then keep an independent subset as the next basis."""
    for vector, tag in zip(candidates, tags):
        if not holds_at_ones(vector):
            logger.info(f"Prefix marginals differ at depth {depth}: witness {tag}")
            return Verdict.not_equal(tag), TaggedBasis(depth, ())

    chosen = independent_subset(candidates)
    basis = TaggedBasis(depth, tuple(TaggedBasisVector(candidates[i], tags[i]) for i in chosen))
    return None, basis


def _check_basis_bound(basis: TaggedBasis, p: Mixture, q: Mixture):
    limit = min(p.k + q.k, len(p.alphabet) ** basis.depth)
    if len(basis) > limit:
        raise AssertionError(
            f"basis at depth {basis.depth} has {len(basis)} vectors, bound is {limit}")


def initial_basis(p: Mixture, q: Mixture) -> StepResult:
    """Depth-1 step: compare first-coordinate marginals and build B_1.

    Returns:
        (Verdict, empty basis) if some symbol y has P^{<=1}(y) != Q^{<=1}(y);
        (None, B_1) otherwise
    """
    check_compatible(p, q)
    weights = _scaled_weights(p, q)
    candidates = []
    tags = []
    for position, symbol in enumerate(p.alphabet.symbols):
        factors = _column_factors(p, q, 0, position)
        candidates.append(tuple(w * f for w, f in zip(weights, factors)))
        tags.append((symbol,))

    verdict, basis = _screen_and_select(candidates, tags, 1)
    if verdict is None:
        _check_basis_bound(basis, p, q)
    return verdict, basis


def extend_basis(basis: TaggedBasis, p: Mixture, q: Mixture) -> StepResult:
    """Depth j -> j+1 step.

    Candidates are b ⊙ (Pr[X_{j+1} = y | component]) for every b in B_j and y in Σ, in
    basis order then alphabet order, tagged (x_b, y). A candidate whose entries do not sum
    to zero is a witness; otherwise an independent subset of the candidates is B_{j+1}.
    """
    depth = basis.depth
    if not 1 <= depth < p.n:
        raise InputError(format_text('prefix_length', length=depth + 1, n=p.n))

    column_factors = [_column_factors(p, q, depth, position)
                      for position in range(len(p.alphabet))]
    candidates = []
    tags = []
    for vector in basis.vectors:
        for position, symbol in enumerate(p.alphabet.symbols):
            factors = column_factors[position]
            candidates.append(tuple(b * f for b, f in zip(vector.coeffs, factors)))
            tags.append(vector.tag + (symbol,))

    verdict, extended = _screen_and_select(candidates, tags, depth + 1)
    if verdict is not None:
        return verdict, extended

    _check_basis_bound(extended, p, q)
    parents = set(basis.tags)
    for vector in extended.vectors:
        if vector.tag[:-1] not in parents:
            raise AssertionError(f"basis vector {vector.tag} does not extend a vector of B_{depth}")
    return None, extended


def check_equivalence(p: Mixture, q: Mixture,
                      on_step: Optional[Callable[[TaggedBasis], None]] = None) -> Verdict:
    """Decide whether two mixtures define the same distribution over Σ^n.

    Args:
        p: First mixture
        q: Second mixture (its component count may differ from p's)
        on_step: Optional callback receiving each basis B_1, ..., B_n

    Returns:
        Verdict.equal(), or NotEqual with the shallowest failing prefix witness

    Raises:
        InputError: if either mixture is invalid or they are incompatible
    """
    require_valid_mixture(p, label="P")
    require_valid_mixture(q, label="Q")
    check_compatible(p, q)

    if p.n == 0 or len(p.alphabet) == 1:
        logger.info("Degenerate instance (n = 0 or |Σ| = 1): single point mass, Equal")
        return Verdict.equal()

    verdict, basis = initial_basis(p, q)
    if verdict is not None:
        return verdict
    if on_step:
        on_step(basis)
    logger.debug(f"B_1 has {len(basis)} vectors")

    while basis.depth < p.n:
        verdict, basis = extend_basis(basis, p, q)
        if verdict is not None:
            return verdict
        if on_step:
            on_step(basis)
        logger.debug(f"B_{basis.depth} has {len(basis)} vectors")

    logger.info(f"Mixtures are equal (n={p.n}, k_P={p.k}, k_Q={q.k}, |Σ|={len(p.alphabet)})")
    return Verdict.equal()


def verify_witness(p: Mixture, q: Mixture, depth: int, x: Sequence[str]) -> bool:
    """True iff P^{<=depth}(x) != Q^{<=depth}(x), by direct exact evaluation."""
    check_compatible(p, q)
    if len(x) != depth:
        raise InputError(format_text('prefix_length', length=len(x), n=depth))
    return mixture_prob(p, x) != mixture_prob(q, x)


def _weighted_components(mixture: Mixture) -> List[Tuple[Fraction, ProductDistribution]]:
    return [(w, c) for w, c in zip(mixture.weights, mixture.components) if w]


def brute_force_equivalence(p: Mixture, q: Mixture) -> Verdict:
    """Enumeration oracle: compare P(x) and Q(x) on every x in Σ^n.

    Points are visited depth-first in lexicographic order, carrying each component's
    prefix probability, so every point costs O(k) multiplications.

    Returns:
        Equal, or NotEqual with the lexicographically first full-length differing point
    """
    check_compatible(p, q)
    if p.n == 0:
        return Verdict.equal()
    check_enumeration(Guard.MIXTURE, len(p.alphabet) ** p.n)

    terms_p = _weighted_components(p)
    terms_q = _weighted_components(q)
    symbols = p.alphabet.symbols

    def descend(depth: int, prefix: Assignment, mass_p: List[Fraction],
                mass_q: List[Fraction]) -> Optional[Assignment]:
        if depth == p.n:
            return None if sum(mass_p, Fraction(0)) == sum(mass_q, Fraction(0)) else prefix
        for position, symbol in enumerate(symbols):
            next_p = [m * c.table[depth][position] for m, (_, c) in zip(mass_p, terms_p)]
            next_q = [m * c.table[depth][position] for m, (_, c) in zip(mass_q, terms_q)]
            found = descend(depth + 1, prefix + (symbol,), next_p, next_q)
            if found is not None:
                return found
        return None

    witness = descend(0, (), [w for w, _ in terms_p], [w for w, _ in terms_q])
    if witness is None:
        return Verdict.equal()
    logger.debug(f"Brute force found a differing point {witness}")
    return Verdict.not_equal(witness)


def tag_consistent(basis: TaggedBasis, p: Mixture, q: Mixture) -> bool:
    """True iff every basis vector equals c_j(tag) recomputed from the mixtures."""
    return all(vector.coeffs == coefficient_vector(p, q, vector.tag) for vector in basis.vectors)
