"""Exact linear algebra over the rationals.

Only what the equivalence checker needs: extraction of a maximal linearly independent
subset by Gaussian elimination, and the all-ones evaluation of a coefficient vector.
No floating point value ever enters this module.
"""
import logging
import numbers
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple
from errors import InputError
from messages import format_text

logger = logging.getLogger(__name__)

RationalVector = Tuple[Fraction, ...]


def as_rational_vector(values: Iterable) -> RationalVector:
    """Convert integers, Fractions or "p/q" strings into an exact rational vector.

    Args:
        values: Iterable of exact numbers

    Returns:
        Tuple of Fractions

    Raises:
        InputError: if a float (or any inexact number) is present
    """
    vector = []
    for value in values:
        if isinstance(value, Fraction):
            vector.append(value)
        elif isinstance(value, numbers.Rational):
            vector.append(Fraction(value))
        elif isinstance(value, str):
            try:
                vector.append(Fraction(value))
            except (ValueError, ZeroDivisionError):
                raise InputError(format_text('bad_rational', text=value))
        else:
            raise InputError(format_text('float_in_exact', value=value))
    return tuple(vector)


def _common_dimension(vectors: Sequence[Sequence[Fraction]]) -> int:
    if not vectors:
        return 0
    expected = len(vectors[0])
    if expected < 1:
        raise InputError(format_text('dimension_mismatch', index=0, found=0, expected=">= 1"))
    for index, vector in enumerate(vectors):
        if len(vector) != expected:
            raise InputError(format_text('dimension_mismatch', index=index,
                                         found=len(vector), expected=expected))
    return expected


def independent_subset(vectors: Sequence[Sequence[Fraction]]) -> List[int]:
    """Select a maximal linearly independent subset, first seen first kept.

    Each vector is reduced against the pivot rows kept so far; it is selected when a
    nonzero entry survives, and its first surviving nonzero column becomes a new pivot.
    Fractions stay in lowest terms after every operation.

    Args:
        vectors: Ordered vectors of one common dimension (may be empty)

    Returns:
        Indices (ascending) of the selected vectors

    Raises:
        InputError: on a dimension mismatch
    """
    dimension = _common_dimension(vectors)
    pivots: List[Tuple[int, List[Fraction]]] = []
    selected: List[int] = []

    for index, vector in enumerate(vectors):
        if len(pivots) == dimension:
            break
        row = [Fraction(entry) for entry in vector]
        for column, pivot_row in pivots:
            factor = row[column]
            if factor:
                for c in range(dimension):
                    if pivot_row[c]:
                        row[c] -= factor * pivot_row[c]

        lead = next((c for c in range(dimension) if row[c]), None)
        if lead is None:
            continue

        scale = row[lead]
        pivots.append((lead, [entry / scale for entry in row]))
        selected.append(index)

    logger.debug(f"independent_subset: {len(selected)} of {len(vectors)} vectors in dimension {dimension}")
    return selected


def rank(vectors: Sequence[Sequence[Fraction]]) -> int:
    """Rank of the matrix whose rows are `vectors`."""
    return len(independent_subset(vectors))


def holds_at_ones(vector: Sequence[Fraction]) -> bool:
    """True iff the equation with this coefficient vector holds at z = (1, ..., 1).

    For the equivalence checker this is exactly the statement that the two mixtures
    assign the same probability to the vector's prefix.
    """
    return sum(vector, Fraction(0)) == 0
