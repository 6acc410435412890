"""Tests for exact rational linear algebra."""
import random
from fractions import Fraction

import pytest

from errors import InputError
from linalg import as_rational_vector, holds_at_ones, independent_subset, rank


def bareiss_rank(rows):
    """Fraction-free rank by Bareiss elimination over integers."""
    matrix = [[int(value) for value in row] for row in rows]
    if not matrix:
        return 0
    height, width = len(matrix), len(matrix[0])
    result = 0
    previous = 1
    for column in range(width):
        pivot = next((r for r in range(result, height) if matrix[r][column] != 0), None)
        if pivot is None:
            continue
        matrix[result], matrix[pivot] = matrix[pivot], matrix[result]
        for r in range(result + 1, height):
            for c in range(column + 1, width):
                matrix[r][c] = (matrix[r][c] * matrix[result][column]
                                - matrix[r][column] * matrix[result][c]) // previous
            matrix[r][column] = 0
        previous = matrix[result][column]
        result += 1
        if result == height:
            break
    return result


def test_sum_of_first_two_is_dependent():
    vectors = [as_rational_vector(v) for v in [(1, 0), (0, 1), (1, 1)]]
    assert independent_subset(vectors) == [0, 1]


def test_zero_vector_is_dependent():
    assert independent_subset([as_rational_vector((0, 0, 0))]) == []


def test_empty_input():
    assert independent_subset([]) == []
    assert rank([]) == 0


def test_first_seen_vectors_are_kept():
    vectors = [as_rational_vector(v) for v in [(0, 0), (2, 4), (1, 2), (0, 1), (5, 5)]]
    assert independent_subset(vectors) == [1, 3]


@pytest.mark.parametrize("seed", range(20))
def test_selection_size_matches_fraction_free_rank(seed):
    rng = random.Random(seed)
    vectors = [tuple(Fraction(rng.randint(-2, 2)) for _ in range(4)) for _ in range(6)]
    selected = independent_subset(vectors)
    assert len(selected) == bareiss_rank(vectors)
    assert bareiss_rank([vectors[i] for i in selected]) == len(selected)


@pytest.mark.parametrize("seed", range(10))
def test_appending_span_member_keeps_selection(seed):
    rng = random.Random(seed)
    vectors = [tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 4)) for _ in range(5)) for _ in range(4)]
    selected = independent_subset(vectors)
    coefficients = [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in selected]
    combination = tuple(sum((c * vectors[i][d] for c, i in zip(coefficients, selected)), Fraction(0))
                        for d in range(5))
    assert independent_subset(vectors + [combination]) == selected
    assert independent_subset(vectors + [combination, combination]) == selected


def test_rational_entries():
    vectors = [as_rational_vector(v) for v in [("1/2", "1/3"), ("3/2", "1"), ("1/3", "1/2")]]
    assert independent_subset(vectors) == [0, 2]


def test_dimension_mismatch():
    with pytest.raises(InputError):
        independent_subset([(Fraction(1), Fraction(0)), (Fraction(1),)])


def test_floats_rejected():
    with pytest.raises(InputError):
        as_rational_vector([0.5, Fraction(1, 2)])


def test_bad_rational_string_rejected():
    with pytest.raises(InputError):
        as_rational_vector(["1/0"])


def test_holds_at_ones():
    assert holds_at_ones(as_rational_vector((1, -1)))
    assert holds_at_ones(as_rational_vector(("1/2", "1/3", "-5/6")))
    assert not holds_at_ones(as_rational_vector(("1/2", "-1/3")))
