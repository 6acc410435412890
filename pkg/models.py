"""Domain models: product distributions, mixtures of products, and Ising models.

Mixture parameters are exact rationals (fractions.Fraction); Ising parameters are binary64
floats. Both file formats are handled here as well:

    Mixture:  {"alphabet": ["0","1"], "n": 3,
               "components": [{"weight": "1/2", "rows": [["1/3","2/3"], ...]}, ...]}
    Ising:    {"n": 3, "pairs": [{"i": 0, "j": 1, "w": 0.5}, ...], "fields": [0.1, -0.2, 0.0]}

Indices in files are zero-based.
"""
import itertools
import json
import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple, Union

import numpy as np

from errors import InputError
from guards import Guard, check_enumeration
from messages import format_text

logger = logging.getLogger(__name__)

Assignment = Tuple[str, ...]

_RATIONAL_PATTERN = re.compile(r'^\s*([+-]?\d+)\s*(?:/\s*([+-]?\d+))?\s*$')


# ---------------------------------------------------------------------------
# Rationals
# ---------------------------------------------------------------------------

def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """Parse a "p/q" (or integer) string into an exact Fraction.

    Args:
        text: Rational in "p/q" form; ints and Fractions pass through

    Returns:
        Fraction in lowest terms

    Raises:
        InputError: on malformed text or a zero denominator
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise InputError(format_text('bad_rational', text=text))
    match = _RATIONAL_PATTERN.match(text)
    if not match:
        raise InputError(format_text('bad_rational', text=text))
    numerator, denominator = match.group(1), match.group(2)
    if denominator is None:
        return Fraction(int(numerator))
    if int(denominator) == 0:
        raise InputError(format_text('zero_denominator', text=text))
    return Fraction(int(numerator), int(denominator))


def format_rational(value: Fraction) -> str:
    """Canonical lowest-terms "p/q" form (integers keep the "/1")."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


# ---------------------------------------------------------------------------
# Mixtures of product distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct symbols; the order fixes iteration and serialization."""

    symbols: Tuple[str, ...]
    _positions: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        symbols = tuple(str(symbol) for symbol in self.symbols)
        if not symbols:
            raise InputError(format_text('alphabet_empty'))
        if len(set(symbols)) != len(symbols):
            raise InputError(format_text('alphabet_duplicate', symbols=list(symbols)))
        object.__setattr__(self, 'symbols', symbols)
        object.__setattr__(self, '_positions', {s: i for i, s in enumerate(symbols)})

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def index(self, symbol: str) -> int:
        """Position of a symbol, InputError if it is not in the alphabet."""
        try:
            return self._positions[symbol]
        except KeyError:
            raise InputError(format_text('unknown_symbol', symbol=symbol,
                                         alphabet=list(self.symbols)))

    def indices(self, assignment: Sequence[str]) -> Tuple[int, ...]:
        return tuple(self.index(symbol) for symbol in assignment)


@dataclass(frozen=True)
class ProductDistribution:
    """n independent coordinates; table[i][y] = Pr[X_i = symbol y]."""

    alphabet: Alphabet
    table: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, 'table', tuple(
            tuple(parse_rational(entry) for entry in row) for row in self.table))

    @property
    def n(self) -> int:
        return len(self.table)


@dataclass(frozen=True)
class Mixture:
    """Mixture P(x) = Σ_i w_i P_i(x) of k product distributions over alphabet^n.

    Construction does not check the probability invariants; validate_mixture reports
    every violation at once.
    """

    alphabet: Alphabet
    n: int
    weights: Tuple[Fraction, ...]
    components: Tuple[ProductDistribution, ...]

    def __post_init__(self):
        object.__setattr__(self, 'weights', tuple(parse_rational(w) for w in self.weights))
        object.__setattr__(self, 'components', tuple(self.components))

    @property
    def k(self) -> int:
        return len(self.components)


def enumerate_assignments(alphabet: Alphabet, length: int) -> Iterator[Assignment]:
    """All assignments in alphabet^length, lexicographic in alphabet order."""
    return itertools.product(alphabet.symbols, repeat=length)


def _prefix_indices(alphabet: Alphabet, n: int, x: Sequence[str]) -> Tuple[int, ...]:
    if not 1 <= len(x) <= n:
        raise InputError(format_text('prefix_length', length=len(x), n=n))
    return alphabet.indices(x)


def product_prefix_prob(distribution: ProductDistribution, x: Sequence[str]) -> Fraction:
    """R^{<=j}(x) = Π_{i<j} Pr[X_i = x_i], exactly.

    Args:
        distribution: Product distribution R
        x: Prefix assignment of length 1..n

    Returns:
        Exact probability of the prefix
    """
    positions = _prefix_indices(distribution.alphabet, distribution.n, x)
    probability = Fraction(1)
    for row, position in zip(distribution.table, positions):
        probability *= row[position]
        if not probability:
            break
    return probability


def mixture_prob(mixture: Mixture, x: Sequence[str]) -> Fraction:
    """P^{<=j}(x) = Σ_i w_i P_i^{<=j}(x), exactly."""
    _prefix_indices(mixture.alphabet, mixture.n, x)
    total = Fraction(0)
    for weight, component in zip(mixture.weights, mixture.components):
        if weight:
            total += weight * product_prefix_prob(component, x)
    return total


def validate_mixture(mixture: Mixture) -> List[str]:
    """Report every violated mixture invariant.

    Args:
        mixture: Mixture to check

    Returns:
        List of violation messages; empty means the mixture is valid
    """
    violations = []
    size = len(mixture.alphabet)

    if mixture.n < 0:
        violations.append(format_text('negative_n', n=mixture.n))
    if not mixture.components:
        violations.append(format_text('empty_mixture'))
    if len(mixture.weights) != len(mixture.components):
        violations.append(format_text('weights_count', weights=len(mixture.weights),
                                      components=len(mixture.components)))

    for index, weight in enumerate(mixture.weights):
        if not 0 <= weight <= 1:
            violations.append(format_text('weight_range', index=index, value=weight))
    total = sum(mixture.weights, Fraction(0))
    if mixture.weights and total != 1:
        violations.append(format_text('weights_sum', total=total))

    for c, component in enumerate(mixture.components):
        if component.alphabet != mixture.alphabet:
            violations.append(format_text('component_alphabet', component=c))
        if component.n != mixture.n:
            violations.append(format_text('component_rows', component=c,
                                          rows=component.n, n=mixture.n))
        for r, row in enumerate(component.table):
            if len(row) != size:
                violations.append(format_text('row_width', component=c, row=r,
                                              width=len(row), size=size))
            for e, entry in enumerate(row):
                if entry < 0:
                    violations.append(format_text('entry_negative', component=c, row=r,
                                                  entry=e, value=entry))
                elif entry > 1:
                    violations.append(format_text('entry_above_one', component=c, row=r,
                                                  entry=e, value=entry))
            row_total = sum(row, Fraction(0))
            if row_total != 1:
                violations.append(format_text('row_sum_component', component=c, row=r,
                                              total=row_total))

    if violations:
        logger.debug(f"Mixture failed validation with {len(violations)} violation(s)")
    return violations


def require_valid_mixture(mixture: Mixture, label: str = "") -> Mixture:
    """Raise InputError listing the violations if the mixture is invalid."""
    violations = validate_mixture(mixture)
    if violations:
        raise InputError(format_text('invalid_mixture', label=label or "",
                                     violations="; ".join(violations)))
    return mixture


def point_mass_mixture(distribution: Mapping[Sequence[str], Fraction],
                       alphabet: Alphabet, n: int) -> Mixture:
    """Re-express an explicit distribution over alphabet^n as a mixture of point masses.

    Component i is the deterministic product distribution concentrated on the i-th point
    of alphabet^n (lexicographic order) and carries weight D(x_i); points absent from the
    table get weight 0.

    Args:
        distribution: Mapping from full assignments to probabilities
        alphabet: Alphabet of the distribution
        n: Coordinate count

    Returns:
        Mixture with k = |alphabet|^n components

    Raises:
        InputError: if the table is not a probability distribution over alphabet^n
        EnumerationGuardError: if |alphabet|^n exceeds the point-mass guard
    """
    size = len(alphabet) ** n
    check_enumeration(Guard.POINT_MASS, size)

    table: Dict[Assignment, Fraction] = {}
    for point, probability in distribution.items():
        point = tuple(str(symbol) for symbol in point)
        if len(point) != n:
            raise InputError(format_text('prefix_length', length=len(point), n=n))
        alphabet.indices(point)
        probability = parse_rational(probability)
        if probability < 0:
            raise InputError(format_text('point_mass_negative', point=point))
        table[point] = table.get(point, Fraction(0)) + probability

    total = sum(table.values(), Fraction(0))
    if total != 1:
        raise InputError(format_text('point_mass_total', total=total))

    rows_for = {}
    for position, symbol in enumerate(alphabet.symbols):
        rows_for[symbol] = tuple(Fraction(int(other == position)) for other in range(len(alphabet)))

    weights = []
    components = []
    for point in enumerate_assignments(alphabet, n):
        weights.append(table.get(point, Fraction(0)))
        components.append(ProductDistribution(alphabet, tuple(rows_for[s] for s in point)))

    logger.debug(f"Point-mass re-expression with {size} components")
    return Mixture(alphabet, n, tuple(weights), tuple(components))


# ---------------------------------------------------------------------------
# Ising models
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=True)
class IsingModel:
    """P(x) ∝ exp(Σ_{i<j} w_ij x_i x_j + Σ_i h_i x_i) over x in {-1,+1}^n.

    Pairs are sparse; an absent pair has weight 0.
    """

    n: int
    pair_weights: Mapping[Tuple[int, int], float]
    fields: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'pair_weights', {
            (int(i), int(j)): float(w) for (i, j), w in sorted(self.pair_weights.items())})
        object.__setattr__(self, 'fields', tuple(float(h) for h in self.fields))

    __hash__ = None

    @property
    def W(self) -> float:
        """max |w_ij| (0 for a model without pairs)."""
        return max((abs(w) for w in self.pair_weights.values()), default=0.0)

    @property
    def H(self) -> float:
        """max |h_i| (0 for a model without spins)."""
        return max((abs(h) for h in self.fields), default=0.0)

    def weight(self, i: int, j: int) -> float:
        """w_ij for an unordered pair, 0 when absent."""
        if i > j:
            i, j = j, i
        return self.pair_weights.get((i, j), 0.0)

    def coupling_matrix(self) -> np.ndarray:
        """Strictly upper-triangular n×n matrix of pair weights."""
        matrix = np.zeros((self.n, self.n), dtype=np.float64)
        for (i, j), w in self.pair_weights.items():
            matrix[i, j] = w
        return matrix

    def field_vector(self) -> np.ndarray:
        return np.asarray(self.fields, dtype=np.float64)

    def violations(self) -> List[str]:
        """Report every violated model invariant (empty list means valid)."""
        problems = []
        if self.n < 1:
            problems.append(format_text('spin_count', n=self.n))
        if len(self.fields) != self.n:
            problems.append(format_text('field_count', fields=len(self.fields), n=self.n))
        for index, h in enumerate(self.fields):
            if not math.isfinite(h):
                problems.append(format_text('not_finite', what=f"field {index}", value=h))
        for (i, j), w in self.pair_weights.items():
            if i == j:
                problems.append(format_text('pair_self', i=i))
            elif i > j:
                problems.append(format_text('pair_order', i=i, j=j))
            if not (0 <= i < self.n and 0 <= j < self.n):
                problems.append(format_text('pair_range', i=i, j=j, n=self.n))
            if not math.isfinite(w):
                problems.append(format_text('not_finite', what=f"pair ({i}, {j})", value=w))
        return problems

    def require_valid(self) -> "IsingModel":
        problems = self.violations()
        if problems:
            raise InputError(format_text('invalid_model', violations="; ".join(problems)))
        return self


# ---------------------------------------------------------------------------
# JSON formats
# ---------------------------------------------------------------------------

def _require(condition: bool, name: str, reason: str):
    if not condition:
        raise InputError(format_text('parameter', name=name, reason=reason))


def mixture_from_dict(data: Mapping) -> Mixture:
    """Build a Mixture from its JSON document (structure checked, invariants not)."""
    _require(isinstance(data, Mapping), "document", "expected a JSON object")
    _require(isinstance(data.get("alphabet"), list), "alphabet", "expected a list of symbols")
    _require(isinstance(data.get("n"), int) and not isinstance(data.get("n"), bool),
             "n", "expected an integer")
    _require(isinstance(data.get("components"), list), "components", "expected a list")

    alphabet = Alphabet(tuple(str(symbol) for symbol in data["alphabet"]))
    weights = []
    components = []
    for index, entry in enumerate(data["components"]):
        _require(isinstance(entry, Mapping) and "weight" in entry and "rows" in entry,
                 f"components[{index}]", "expected {\"weight\": ..., \"rows\": [...]}")
        _require(isinstance(entry["rows"], list) and all(isinstance(r, list) for r in entry["rows"]),
                 f"components[{index}].rows", "expected a list of lists")
        weights.append(parse_rational(entry["weight"]))
        components.append(ProductDistribution(alphabet, tuple(
            tuple(parse_rational(value) for value in row) for row in entry["rows"])))
    return Mixture(alphabet, data["n"], tuple(weights), tuple(components))


def mixture_to_dict(mixture: Mixture) -> Dict:
    return {
        "alphabet": list(mixture.alphabet.symbols),
        "n": mixture.n,
        "components": [
            {"weight": format_rational(weight),
             "rows": [[format_rational(value) for value in row] for row in component.table]}
            for weight, component in zip(mixture.weights, mixture.components)
        ],
    }


def _finite_number(value, name: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             name, "expected a number")
    _require(math.isfinite(value), name, "must be finite")
    return float(value)


def ising_from_dict(data: Mapping) -> IsingModel:
    """Build an IsingModel from its JSON document."""
    _require(isinstance(data, Mapping), "document", "expected a JSON object")
    _require(isinstance(data.get("n"), int) and not isinstance(data.get("n"), bool),
             "n", "expected an integer")
    _require(isinstance(data.get("fields"), list), "fields", "expected a list of numbers")
    pairs = data.get("pairs", [])
    _require(isinstance(pairs, list), "pairs", "expected a list")

    weights: Dict[Tuple[int, int], float] = {}
    for index, pair in enumerate(pairs):
        _require(isinstance(pair, Mapping) and {"i", "j", "w"} <= set(pair),
                 f"pairs[{index}]", "expected {\"i\": ..., \"j\": ..., \"w\": ...}")
        i, j = pair["i"], pair["j"]
        _require(isinstance(i, int) and isinstance(j, int), f"pairs[{index}]",
                 "indices must be integers")
        key = (min(i, j), max(i, j))
        if key in weights:
            raise InputError(format_text('pair_duplicate', i=key[0], j=key[1]))
        if i > j:
            raise InputError(format_text('pair_order', i=i, j=j))
        weights[key] = _finite_number(pair["w"], f"pairs[{index}].w")

    fields = tuple(_finite_number(h, f"fields[{index}]") for index, h in enumerate(data["fields"]))
    return IsingModel(data["n"], weights, fields).require_valid()


def ising_to_dict(model: IsingModel) -> Dict:
    return {
        "n": model.n,
        "pairs": [{"i": i, "j": j, "w": w} for (i, j), w in model.pair_weights.items()],
        "fields": list(model.fields),
    }


def _read_json(path: Union[str, Path]) -> Mapping:
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(format_text('file_unreadable', path=path, reason=e))


def load_mixture(path: Union[str, Path], validate: bool = True) -> Mixture:
    """Read a mixture file; with validate=True invalid mixtures raise InputError."""
    mixture = mixture_from_dict(_read_json(path))
    if validate:
        require_valid_mixture(mixture, label=str(path))
    logger.debug(f"Loaded mixture from {path}: n={mixture.n}, k={mixture.k}, |Σ|={len(mixture.alphabet)}")
    return mixture


def load_ising(path: Union[str, Path]) -> IsingModel:
    model = ising_from_dict(_read_json(path))
    logger.debug(f"Loaded Ising model from {path}: n={model.n}, {len(model.pair_weights)} pairs")
    return model
