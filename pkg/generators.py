"""Instance generators for tests and the acceptance harness.

Every generator is a pure function of its parameters and seed. Mixtures are drawn with
exact rationals of bounded denominator; Ising models use numpy's seeded Generator.
"""
import logging
import math
import random
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from equivalence import Verdict, brute_force_equivalence
from errors import InputError
from messages import format_text
from models import (Alphabet, IsingModel, Mixture, ProductDistribution,
                    enumerate_assignments, mixture_prob, parse_rational,
                    point_mass_mixture, require_valid_mixture)

logger = logging.getLogger(__name__)

SEED_LIMIT = 2 ** 64


class RewriteOp(Enum):
    """Distribution-preserving edits applied by equivalent_rewrite"""
    PERMUTE = "permute"
    SPLIT = "split"
    APPEND_ZERO = "append_zero"
    POINT_MASS = "point_mass"


def _check_seed(seed: int):
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < SEED_LIMIT:
        raise InputError(format_text('parameter', name='seed', reason="expected an integer in [0, 2^64)"))


def composition(rng: random.Random, total: int, parts: int) -> List[int]:
    """Uniformly random weak composition of `total` into `parts` nonnegative integers."""
    if parts < 1 or total < 0:
        raise InputError(format_text('parameter', name='composition',
                                     reason=f"cannot split {total} into {parts} parts"))
    cuts = sorted(rng.randint(0, total) for _ in range(parts - 1))
    bounds = [0] + cuts + [total]
    return [bounds[i + 1] - bounds[i] for i in range(parts)]


def _random_row(rng: random.Random, size: int, denominator_bound: int) -> Tuple[Fraction, ...]:
    denominator = rng.randint(1, denominator_bound)
    return tuple(Fraction(part, denominator) for part in composition(rng, denominator, size))


def _random_component(rng: random.Random, alphabet: Alphabet, n: int,
                      denominator_bound: int) -> ProductDistribution:
    return ProductDistribution(alphabet, tuple(
        _random_row(rng, len(alphabet), denominator_bound) for _ in range(n)))


def random_mixture(n: int, k: int, alphabet: Sequence[str], seed: int,
                   denominator_bound: Optional[int] = None) -> Mixture:
    """Random valid mixture with every rational's denominator at most the bound.

    Args:
        n: Coordinate count (>= 1)
        k: Component count (>= 1)
        alphabet: Symbols
        seed: Generator seed
        denominator_bound: Largest denominator (Config.DENOMINATOR_BOUND if None)

    Returns:
        Mixture
    """
    bound = denominator_bound if denominator_bound is not None else Config.DENOMINATOR_BOUND
    if n < 1 or k < 1:
        raise InputError(format_text('parameter', name='n/k', reason="both must be at least 1"))
    if bound < 2:
        raise InputError(format_text('parameter', name='denominator_bound', reason="must be at least 2"))
    _check_seed(seed)
    alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(tuple(alphabet))

    rng = random.Random(seed)
    weights = _random_row(rng, k, bound)
    components = tuple(_random_component(rng, alphabet, n, bound) for _ in range(k))
    mixture = Mixture(alphabet, n, weights, components)
    logger.debug(f"random_mixture(n={n}, k={k}, |Σ|={len(alphabet)}, seed={seed})")
    return require_valid_mixture(mixture, label="generated")


def _explicit_distribution(mixture: Mixture) -> Dict[Tuple[str, ...], Fraction]:
    return {x: mixture_prob(mixture, x) for x in enumerate_assignments(mixture.alphabet, mixture.n)}


def _split(rng: random.Random, weights: List[Fraction], components: List[ProductDistribution]):
    index = rng.randrange(len(components))
    denominator = rng.randint(2, max(2, Config.DENOMINATOR_BOUND))
    alpha = Fraction(rng.randint(1, denominator - 1), denominator)
    weight = weights[index]
    weights[index] = alpha * weight
    weights.insert(index + 1, (1 - alpha) * weight)
    components.insert(index + 1, components[index])


def equivalent_rewrite(mixture: Mixture, seed: int, point_mass_limit: Optional[int] = None,
                       operations: Optional[Sequence[RewriteOp]] = None) -> Mixture:
    """Describe the same distribution with different parameters.

    Without explicit operations a random program is drawn: an optional point-mass
    re-expression (only when |Σ|^n <= point_mass_limit), one or two component splits
    w -> (αw, (1-α)w), an optional zero-weight component, then a permutation.

    Args:
        mixture: Valid mixture
        seed: Generator seed
        point_mass_limit: Largest |Σ|^n for point-mass re-expression (Config.POINT_MASS_LIMIT if None)
        operations: Apply exactly these edits in order instead of a random program

    Returns:
        Mixture equal to the input as a distribution
    """
    require_valid_mixture(mixture, label="rewrite input")
    _check_seed(seed)
    limit = point_mass_limit if point_mass_limit is not None else Config.POINT_MASS_LIMIT
    rng = random.Random(seed)
    size = len(mixture.alphabet) ** mixture.n

    if operations is None:
        program = []
        if size <= limit and rng.random() < 1 / 3:
            program.append(RewriteOp.POINT_MASS)
        program.extend([RewriteOp.SPLIT] * rng.randint(1, 2))
        if rng.random() < 0.5:
            program.append(RewriteOp.APPEND_ZERO)
        program.append(RewriteOp.PERMUTE)
    else:
        program = [RewriteOp(op) for op in operations]

    current = mixture
    weights = list(current.weights)
    components = list(current.components)
    for op in program:
        if op == RewriteOp.POINT_MASS:
            if size > limit:
                raise InputError(format_text('parameter', name='operations',
                                             reason=f"point-mass rewrite needs |Σ|^n <= {limit}, got {size}"))
            current = point_mass_mixture(_explicit_distribution(
                Mixture(mixture.alphabet, mixture.n, tuple(weights), tuple(components))),
                mixture.alphabet, mixture.n)
            weights = list(current.weights)
            components = list(current.components)
        elif op == RewriteOp.SPLIT:
            _split(rng, weights, components)
        elif op == RewriteOp.APPEND_ZERO:
            weights.append(Fraction(0))
            components.append(_random_component(rng, mixture.alphabet, mixture.n,
                                                max(2, Config.DENOMINATOR_BOUND)))
        elif op == RewriteOp.PERMUTE:
            order = list(range(len(components)))
            rng.shuffle(order)
            weights = [weights[i] for i in order]
            components = [components[i] for i in order]

    logger.debug(f"equivalent_rewrite seed={seed}: {[op.value for op in program]}, "
                 f"k {mixture.k} -> {len(components)}")
    return Mixture(mixture.alphabet, mixture.n, tuple(weights), tuple(components))


def perturbed_pair(mixture: Mixture, seed: int, magnitude,
                   component: Optional[int] = None) -> Tuple[Mixture, Verdict]:
    """Shift one marginal entry by +magnitude, compensating another entry of the same row.

    The ground-truth verdict comes from brute-force enumeration: a perturbation can leave
    the distribution unchanged (zero weight, or a coincidental cancellation).

    Args:
        mixture: Valid mixture
        seed: Generator seed
        magnitude: Nonnegative rational shift
        component: Restrict the edit to this component

    Returns:
        (perturbed mixture, brute-force verdict for the pair)

    Raises:
        InputError: if no entry can absorb the shift within [0, 1]
    """
    require_valid_mixture(mixture, label="perturb input")
    _check_seed(seed)
    magnitude = parse_rational(magnitude)
    if magnitude < 0:
        raise InputError(format_text('parameter', name='magnitude', reason="must be nonnegative"))
    if magnitude == 0:
        return mixture, brute_force_equivalence(mixture, mixture)

    indices = range(mixture.k) if component is None else [component]
    size = len(mixture.alphabet)
    candidates = []
    for c in indices:
        if not 0 <= c < mixture.k:
            raise InputError(format_text('parameter', name='component', reason=f"no component {c}"))
        for r, row in enumerate(mixture.components[c].table):
            for up in range(size):
                for down in range(size):
                    if up != down and row[up] + magnitude <= 1 and row[down] - magnitude >= 0:
                        candidates.append((c, r, up, down))
    if not candidates:
        raise InputError(format_text('perturb_infeasible', magnitude=magnitude))

    rng = random.Random(seed)
    c, r, up, down = rng.choice(candidates)
    table = [list(row) for row in mixture.components[c].table]
    table[r][up] += magnitude
    table[r][down] -= magnitude
    components = list(mixture.components)
    components[c] = ProductDistribution(mixture.alphabet, tuple(tuple(row) for row in table))
    perturbed = Mixture(mixture.alphabet, mixture.n, mixture.weights, tuple(components))

    verdict = brute_force_equivalence(mixture, perturbed)
    logger.debug(f"perturbed_pair seed={seed}: component {c} row {r} entries {up}->{down} "
                 f"by {magnitude}, ground truth {verdict.kind.value}")
    return perturbed, verdict


def random_ising(n: int, pair_density: float, weight_range: Tuple[float, float],
                 field_range: Tuple[float, float], seed: int) -> IsingModel:
    """Random Ising model: each pair i<j present with probability pair_density.

    Weights and fields are uniform on their ranges.
    """
    if n < 1:
        raise InputError(format_text('spin_count', n=n))
    if not 0 <= pair_density <= 1:
        raise InputError(format_text('parameter', name='pair_density', reason="must lie in [0, 1]"))
    for name, (low, high) in (('weight_range', weight_range), ('field_range', field_range)):
        if not (math.isfinite(low) and math.isfinite(high) and low <= high):
            raise InputError(format_text('parameter', name=name, reason="need finite low <= high"))
    _check_seed(seed)

    rng = np.random.default_rng(seed)
    pairs = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < pair_density:
                pairs[(i, j)] = float(rng.uniform(*weight_range))
    fields = [float(h) for h in rng.uniform(field_range[0], field_range[1], size=n)]
    return IsingModel(n, pairs, fields).require_valid()
