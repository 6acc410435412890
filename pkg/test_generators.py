"""Tests for instance generators."""
import random
from fractions import Fraction

import pytest

from config import Config
from equivalence import brute_force_equivalence, check_equivalence
from errors import InputError
from generators import (RewriteOp, composition, equivalent_rewrite, perturbed_pair, random_ising,
                        random_mixture)
from models import Alphabet, Mixture, ProductDistribution, validate_mixture


def test_composition_sums_to_total():
    rng = random.Random(0)
    for parts in range(1, 6):
        values = composition(rng, 12, parts)
        assert len(values) == parts
        assert sum(values) == 12
        assert min(values) >= 0


def test_random_mixture_is_valid_and_bounded():
    for seed in range(10):
        m = random_mixture(3, 4, ["a", "b", "c"], seed=seed, denominator_bound=7)
        assert validate_mixture(m) == []
        assert m.n == 3 and m.k == 4
        for component in m.components:
            for row in component.table:
                assert all(entry.denominator <= 7 for entry in row)
        assert all(w.denominator <= 7 for w in m.weights)


def test_random_mixture_is_deterministic():
    assert random_mixture(4, 3, ["0", "1"], seed=99) == random_mixture(4, 3, ["0", "1"], seed=99)
    assert random_mixture(4, 3, ["0", "1"], seed=99) != random_mixture(4, 3, ["0", "1"], seed=100)


def test_random_mixture_parameter_errors():
    with pytest.raises(InputError):
        random_mixture(0, 1, ["0", "1"], seed=1)
    with pytest.raises(InputError):
        random_mixture(1, 1, ["0", "1"], seed=-1)
    with pytest.raises(InputError):
        random_mixture(1, 1, ["0", "1"], seed=1, denominator_bound=1)


@pytest.mark.parametrize("seed", range(15))
def test_rewrite_preserves_distribution(seed):
    m = random_mixture(3, 2, ["0", "1", "2"], seed=seed)
    rewritten = equivalent_rewrite(m, seed=seed)
    assert validate_mixture(rewritten) == []
    assert check_equivalence(m, rewritten).is_equal
    assert brute_force_equivalence(m, rewritten).is_equal


@pytest.mark.parametrize("op", list(RewriteOp))
def test_each_rewrite_operation(op):
    m = random_mixture(2, 2, ["0", "1"], seed=3)
    rewritten = equivalent_rewrite(m, seed=4, operations=[op])
    assert check_equivalence(m, rewritten).is_equal
    if op == RewriteOp.SPLIT or op == RewriteOp.APPEND_ZERO:
        assert rewritten.k == m.k + 1
    if op == RewriteOp.POINT_MASS:
        assert rewritten.k == 4


def test_point_mass_rewrite_respects_limit():
    m = random_mixture(3, 2, ["0", "1"], seed=3)
    with pytest.raises(InputError):
        equivalent_rewrite(m, seed=1, point_mass_limit=4, operations=[RewriteOp.POINT_MASS])


def test_rewrite_is_deterministic():
    Config.DENOMINATOR_BOUND = 12
    m = random_mixture(3, 3, ["0", "1"], seed=8)
    assert equivalent_rewrite(m, seed=5) == equivalent_rewrite(m, seed=5)


def test_zero_magnitude_perturbation_is_equal():
    m = random_mixture(2, 2, ["0", "1"], seed=1)
    perturbed, verdict = perturbed_pair(m, seed=0, magnitude=0)
    assert perturbed == m
    assert verdict.is_equal


def test_perturbing_zero_weight_component_keeps_distribution():
    binary = Alphabet(("0", "1"))
    half = ProductDistribution(binary, (("1/2", "1/2"),))
    third = ProductDistribution(binary, (("2/3", "1/3"),))
    m = Mixture(binary, 1, ("1/1", "0/1"), (half, third))
    perturbed, verdict = perturbed_pair(m, seed=0, magnitude="1/6", component=1)
    assert perturbed.components[1] != third
    assert verdict.is_equal


def test_perturbation_changes_distribution():
    binary = Alphabet(("0", "1"))
    m = Mixture(binary, 1, ("1/1",), (ProductDistribution(binary, (("1/2", "1/2"),)),))
    perturbed, verdict = perturbed_pair(m, seed=0, magnitude="1/7")
    assert not verdict.is_equal
    assert verdict.depth == 1
    assert validate_mixture(perturbed) == []
    assert perturbed.components[0].table[0] in (
        (Fraction(9, 14), Fraction(5, 14)), (Fraction(5, 14), Fraction(9, 14)))


def test_infeasible_perturbation():
    binary = Alphabet(("0", "1"))
    m = Mixture(binary, 1, ("1/1",), (ProductDistribution(binary, (("1/2", "1/2"),)),))
    with pytest.raises(InputError, match="no entry"):
        perturbed_pair(m, seed=0, magnitude="2/3")


def test_random_ising_density_extremes():
    empty = random_ising(5, 0.0, (-1.0, 1.0), (-1.0, 1.0), seed=1)
    assert empty.pair_weights == {}
    full = random_ising(5, 1.0, (-1.0, 1.0), (-1.0, 1.0), seed=1)
    assert len(full.pair_weights) == 10
    assert all(-1.0 <= w <= 1.0 for w in full.pair_weights.values())
    assert all(-1.0 <= h <= 1.0 for h in full.fields)


def test_random_ising_is_deterministic():
    first = random_ising(6, 0.5, (-2.0, 2.0), (-0.5, 0.5), seed=123)
    assert first == random_ising(6, 0.5, (-2.0, 2.0), (-0.5, 0.5), seed=123)


def test_random_ising_parameter_errors():
    with pytest.raises(InputError):
        random_ising(0, 0.5, (-1.0, 1.0), (-1.0, 1.0), seed=1)
    with pytest.raises(InputError):
        random_ising(3, 1.5, (-1.0, 1.0), (-1.0, 1.0), seed=1)
    with pytest.raises(InputError):
        random_ising(3, 0.5, (1.0, -1.0), (-1.0, 1.0), seed=1)
