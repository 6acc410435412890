"""Tests for the pluggable oracle layer."""
import math

import pytest

from errors import InputError
from generators import random_ising
from ising import marginal_brute, partition_brute, partition_via_marginals, tv_brute
from oracles import (BruteForceMarginalOracle, BruteForceTVOracle, MarginalOracle,
                     PerturbedMarginalOracle, TVReductionMarginalOracle, create_marginal_oracle)


@pytest.fixture
def model():
    return random_ising(4, 0.8, (-1.0, 1.0), (-1.0, 1.0), seed=21)


def test_factory_creates_each_oracle():
    assert isinstance(create_marginal_oracle("brute"), BruteForceMarginalOracle)
    assert isinstance(create_marginal_oracle("tv"), TVReductionMarginalOracle)
    perturbed = create_marginal_oracle("perturbed", factor=2.0)
    assert isinstance(perturbed, PerturbedMarginalOracle)
    assert perturbed.name == "perturbed(brute)"


def test_factory_rejects_unknown_type():
    with pytest.raises(InputError, match="unknown oracle type"):
        create_marginal_oracle("mcmc")


def test_abstract_oracle_cannot_be_instantiated():
    with pytest.raises(TypeError):
        MarginalOracle()


def test_brute_oracles_count_calls(model):
    oracle = BruteForceMarginalOracle()
    assert oracle(model, 2, -1, 0.1, 0.1) == marginal_brute(model, 2, -1)
    assert oracle.calls == 1
    tv = BruteForceTVOracle()
    other = random_ising(4, 0.8, (-1.0, 1.0), (-1.0, 1.0), seed=22)
    assert tv(model, other, 0.1, 0.1) == tv_brute(model, other)
    assert tv.calls == 1


def test_tv_reduction_oracle_uses_one_tv_query_per_marginal(model):
    oracle = TVReductionMarginalOracle()
    estimate = oracle(model, 1, 1, 0.05, 0.1)
    assert oracle.calls == 1
    assert oracle.tv_oracle.calls == 1
    assert oracle.name == "tv(brute)"
    truth = marginal_brute(model, 1, 1)
    assert truth / 1.05 <= estimate <= truth * 1.05


def test_perturbed_oracle_defaults_to_one_plus_eps(model):
    oracle = PerturbedMarginalOracle()
    assert oracle(model, 0, 1, 0.25, 0.1) == pytest.approx(1.25 * marginal_brute(model, 0, 1))
    assert oracle.inner.calls == 1


def test_perturbed_oracle_rejects_nonpositive_factor():
    with pytest.raises(InputError):
        PerturbedMarginalOracle(factor=0.0)


def test_partition_through_tv_oracle(model):
    oracle = create_marginal_oracle("tv")
    eps = 0.1
    estimate = partition_via_marginals(model, oracle, eps=eps)
    assert oracle.calls == model.n - 1
    assert oracle.tv_oracle.calls == model.n - 1
    assert abs(estimate - partition_brute(model)) <= math.log1p(eps)
