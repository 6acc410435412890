"""Acceptance suite for mixv.

Runs the twelve acceptance criteria as phases over generated instances and reports
PASS/FAIL per criterion. `scale` multiplies every instance count (1.0 is the full suite);
the runtime budgets quoted in the phase titles refer to the full suite.
"""
import logging
import math
import random
import time
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from equivalence import brute_force_equivalence, check_equivalence, tag_consistent, verify_witness
from generators import equivalent_rewrite, perturbed_pair, random_ising, random_mixture
from ising import (GadgetParams, build_marginal_gadget, tv_identity_rhs, first_variable_identity_residual,
                   gadget_error_bound, marginal_brute, marginal_via_tv, partition_brute,
                   partition_chain, partition_via_marginals, per_call_eps, sign_property_holds,
                   tv_brute, tv_brute_detail, tv_max_over_events)
from models import Alphabet, Mixture, ProductDistribution
from oracles import (BruteForceMarginalOracle, BruteForceTVOracle, PerturbedMarginalOracle,
                     TVReductionMarginalOracle)

logger = logging.getLogger(__name__)

# Timing samples per size for the scaling criterion; the median is compared
SCALING_REPEATS = 5

PASS = "PASS"
FAIL = "FAIL"

# Point-mass rewrites produce |Σ|^n components; keep them small inside the suite
SUITE_POINT_MASS_LIMIT = 32


def one_bit_fixture() -> Tuple[Mixture, Mixture]:
    """P = 1·Bern(1/2) + 0·Bern(1/2) and Q = ½·Bern(1/3) + ½·Bern(2/3), both equal to Bern(1/2)."""
    alphabet = Alphabet(("0", "1"))

    def bern(p: Fraction) -> ProductDistribution:
        return ProductDistribution(alphabet, ((1 - p, p),))

    half = Fraction(1, 2)
    p = Mixture(alphabet, 1, (Fraction(1), Fraction(0)), (bern(half), bern(half)))
    q = Mixture(alphabet, 1, (half, half), (bern(Fraction(1, 3)), bern(Fraction(2, 3))))
    return p, q


class AcceptanceSuite:
    """Phased acceptance harness with a PASS/FAIL report."""

    def __init__(self, scale: float = 1.0, seed: int = 20240101):
        """Initialize the suite.

        Args:
            scale: Multiplier for instance counts
            seed: Master seed; every instance seed is derived from it
        """
        self.scale = scale
        self.seed = seed
        self.results: Dict[int, str] = {}
        self.details: Dict[int, Dict] = {}
        self.elapsed: Dict[int, float] = {}
        self._pair_stats: Optional[Dict] = None

    def _count(self, base: int) -> int:
        return max(1, int(round(base * self.scale)))

    def _rng(self, criterion: int) -> random.Random:
        return random.Random(self.seed * 1000 + criterion)

    def _get_phases(self) -> Dict[int, tuple]:
        return {
            1: ("Oracle agreement on generated mixture pairs (<60s)", self._oracle_agreement),
            2: ("Witness validity for every NotEqual verdict", self._witness_validity),
            3: ("One-bit fixture pair is Equal", self._one_bit_fixture),
            4: ("Basis size bound at every depth", self._basis_bound),
            5: ("Runtime grows at most quasi-linearly in n (<120s)", self._scaling),
            6: ("Partition function from exact marginals (<60s)", self._partition_identity),
            7: ("Gadget TV identity", self._tv_identity),
            8: ("Gadget sign property", self._sign_property),
            9: ("Gadget error-bound dominance", self._bound_dominance),
            10: ("End-to-end reduction through TV (<120s)", self._end_to_end),
            11: ("TV definition consistency", self._tv_consistency),
            12: ("Perturbation-injection robustness", self._perturbation_robustness),
        }

    def run(self, only: Optional[List[int]] = None) -> Dict:
        """Run all (or the selected) criteria and return the report."""
        phases = self._get_phases()
        selected = sorted(only) if only else sorted(phases)
        for number in selected:
            title, method = phases[number]
            logger.info(f"Criterion {number}: {title}")
            started = time.perf_counter()
            try:
                passed, details = method()
            except Exception as e:
                logger.error(f"Criterion {number} raised {type(e).__name__}: {e}")
                passed, details = False, {"exception": f"{type(e).__name__}: {e}"}
            self.elapsed[number] = time.perf_counter() - started
            self.results[number] = PASS if passed else FAIL
            self.details[number] = details
            logger.info(f"Criterion {number}: {self.results[number]} ({self.elapsed[number]:.2f}s)")
        return self.generate_report(phases)

    def generate_report(self, phases: Dict[int, tuple]) -> Dict:
        """Generate the acceptance report."""
        passed = sum(1 for r in self.results.values() if r == PASS)
        failed = sum(1 for r in self.results.values() if r == FAIL)
        logger.info(f"Acceptance: {passed} passed, {failed} failed of {len(self.results)}")
        for number, result in sorted(self.results.items()):
            logger.info(f"  [{result}] {number}: {phases[number][0]}")
        return {
            "passed": failed == 0,
            "scale": self.scale,
            "seed": self.seed,
            "summary": {"total": len(self.results), "passed": passed, "failed": failed},
            "criteria": [
                {"id": number, "title": phases[number][0], "result": result,
                 "elapsed_s": self.elapsed[number], "details": self.details[number]}
                for number, result in sorted(self.results.items())
            ],
        }

    # ==================== MIXTURES ====================

    def _generated_pairs(self) -> Dict:
        """Criterion 1 run, shared with criteria 2 and 4."""
        if self._pair_stats is not None:
            return self._pair_stats
        rng = self._rng(1)
        stats = {"pairs": 0, "equal_built": 0, "perturbed": 0, "agree": 0, "not_equal": 0,
                 "witness_ok": 0, "bound_violations": 0, "tag_mismatches": 0, "max_basis": 0,
                 "disagreements": []}

        for index in range(self._count(1000)):
            n = rng.randint(1, 6)
            k = rng.randint(1, 4)
            symbols = ["a", "b", "c"][:rng.randint(2, 3)]
            mixture = random_mixture(n, k, symbols, seed=rng.getrandbits(32))
            if index % 2 == 0:
                other = equivalent_rewrite(mixture, rng.getrandbits(32), SUITE_POINT_MASS_LIMIT)
                truth = brute_force_equivalence(mixture, other)
                stats["equal_built"] += 1
            else:
                magnitude = Fraction(1, rng.randint(3, 12))
                other, truth = perturbed_pair(mixture, rng.getrandbits(32), magnitude)
                stats["perturbed"] += 1
            p, q = (mixture, other) if rng.random() < 0.5 else (other, mixture)

            def observe(basis, p=p, q=q):
                limit = min(p.k + q.k, len(p.alphabet) ** basis.depth)
                stats["max_basis"] = max(stats["max_basis"], len(basis))
                if len(basis) > limit:
                    stats["bound_violations"] += 1
                if not tag_consistent(basis, p, q):
                    stats["tag_mismatches"] += 1

            verdict = check_equivalence(p, q, on_step=observe)
            stats["pairs"] += 1
            if verdict.is_equal == truth.is_equal:
                stats["agree"] += 1
            elif len(stats["disagreements"]) < 5:
                stats["disagreements"].append({"index": index, "basis": verdict.kind.value,
                                               "brute": truth.kind.value})
            if not verdict.is_equal:
                stats["not_equal"] += 1
                if verify_witness(p, q, verdict.depth, verdict.witness):
                    stats["witness_ok"] += 1

        self._pair_stats = stats
        return stats

    def _oracle_agreement(self):
        stats = self._generated_pairs()
        return stats["agree"] == stats["pairs"], {
            key: stats[key] for key in ("pairs", "equal_built", "perturbed", "agree", "disagreements")}

    def _witness_validity(self):
        stats = self._generated_pairs()
        return stats["witness_ok"] == stats["not_equal"], {
            "not_equal": stats["not_equal"], "verified": stats["witness_ok"]}

    def _one_bit_fixture(self):
        p, q = one_bit_fixture()
        verdict = check_equivalence(p, q)
        return verdict.is_equal, {"verdict": verdict.kind.value}

    def _basis_bound(self):
        stats = self._generated_pairs()
        # The checker itself raises AssertionError on a violation; this re-counts from outside
        ok = stats["bound_violations"] == 0 and stats["tag_mismatches"] == 0
        return ok, {"violations": stats["bound_violations"], "tag_mismatches": stats["tag_mismatches"],
                    "max_basis": stats["max_basis"]}

    def _scaling(self):
        rng = self._rng(5)
        timings = {}
        for n in (50, 100, 200):
            mixture = random_mixture(n, 3, ["0", "1"], seed=rng.getrandbits(32))
            other = equivalent_rewrite(mixture, rng.getrandbits(32), point_mass_limit=0)
            samples = []
            for _ in range(SCALING_REPEATS):
                started = time.perf_counter()
                verdict = check_equivalence(mixture, other)
                samples.append(time.perf_counter() - started)
                if not verdict.is_equal:
                    return False, {"n": n, "error": "rewrite reported NotEqual"}
            timings[n] = float(np.median(samples))
        ratio = timings[200] / max(timings[100], 1e-9)
        return ratio <= 3.0, {"seconds": {str(n): t for n, t in timings.items()}, "ratio_200_100": ratio}

    # ==================== ISING ====================

    def _random_model(self, rng: random.Random, low: int, high: int):
        return random_ising(rng.randint(low, high), pair_density=rng.random(),
                            weight_range=(-1.0, 1.0), field_range=(-1.0, 1.0),
                            seed=rng.getrandbits(32))

    def _partition_identity(self):
        rng = self._rng(6)
        worst_error = 0.0
        worst_residual = 0.0
        call_budget_ok = True
        for _ in range(self._count(100)):
            model = self._random_model(rng, 1, 10)
            oracle = BruteForceMarginalOracle()
            estimate = partition_via_marginals(model, oracle, eps=0.1, conf=0.1)
            reference = partition_brute(model)
            worst_error = max(worst_error, abs(math.expm1(estimate - reference)))
            call_budget_ok &= oracle.calls == model.n - 1
            for step in partition_chain(model)[:-1]:
                worst_residual = max(worst_residual, first_variable_identity_residual(step))
        ok = worst_error <= 1e-6 and worst_residual <= 1e-10 and call_budget_ok
        return ok, {"max_relative_error": worst_error, "max_identity_residual": worst_residual,
                    "call_budget_ok": call_budget_ok}

    def _gadget_instances(self):
        rng = self._rng(7)
        for _ in range(self._count(100)):
            model = self._random_model(rng, 1, 8)
            params = GadgetParams(k=rng.randrange(model.n), h0=rng.uniform(-12.0, -2.0),
                                  delta=30.0 - 29.0 * rng.random())
            yield model, params

    def _tv_identity(self):
        worst = 0.0
        for model, params in self._gadget_instances():
            p0, q0 = build_marginal_gadget(model, params)
            worst = max(worst, abs(tv_brute(p0, q0) - tv_identity_rhs(model, params)))
        return worst <= 1e-9, {"max_residual": worst}

    def _sign_property(self):
        failures = 0
        total = 0
        for model, params in self._gadget_instances():
            p0, q0 = build_marginal_gadget(model, params)
            total += 1
            failures += not sign_property_holds(p0, q0, params.k + 1)
        return failures == 0, {"instances": total, "failures": failures}

    def _bound_dominance(self):
        failures = 0
        tightest = math.inf
        for model, params in self._gadget_instances():
            p0, q0 = build_marginal_gadget(model, params)
            observed = abs(tv_brute(p0, q0) - marginal_brute(model, params.k, 1))
            bound = gadget_error_bound(model, params)
            tightest = min(tightest, bound - observed)
            failures += observed > bound
        return failures == 0, {"failures": failures, "min_slack": tightest}

    def _end_to_end(self):
        rng = self._rng(10)
        eps = 0.05
        worst_marginal = 0.0
        worst_partition = 0.0
        failures = 0
        for _ in range(self._count(50)):
            model = self._random_model(rng, 1, 6)
            k = rng.randrange(model.n)
            for s in (1, -1):
                estimate = marginal_via_tv(model, k, s, eps, tv_oracle=BruteForceTVOracle())
                ratio = estimate / marginal_brute(model, k, s)
                worst_marginal = max(worst_marginal, abs(math.log(ratio)))
                failures += not (1 / (1 + eps) <= ratio <= 1 + eps)
            log_z = partition_via_marginals(model, TVReductionMarginalOracle(), eps=eps, conf=0.1)
            gap = abs(log_z - partition_brute(model))
            worst_partition = max(worst_partition, gap)
            failures += gap > math.log1p(eps)
        return failures == 0, {"failures": failures, "max_log_ratio_marginal": worst_marginal,
                               "max_log_ratio_partition": worst_partition, "eps": eps}

    def _tv_consistency(self):
        rng = self._rng(11)
        worst = 0.0
        for _ in range(self._count(100)):
            n = rng.randint(1, 6)
            first = random_ising(n, rng.random(), (-1.0, 1.0), (-1.0, 1.0), rng.getrandbits(32))
            second = random_ising(n, rng.random(), (-1.0, 1.0), (-1.0, 1.0), rng.getrandbits(32))
            detail = tv_brute_detail(first, second)
            worst = max(worst, detail.disagreement)
            if n <= 3:
                worst = max(worst, abs(detail.half_l1 - tv_max_over_events(first, second)))
        return worst <= 1e-10, {"max_disagreement": worst}

    def _perturbation_robustness(self):
        rng = self._rng(12)
        failures = 0
        linear_worst = 0.0
        for eps in (0.1, 0.5):
            for _ in range(self._count(20)):
                model = self._random_model(rng, 2, 8)
                reference = partition_brute(model)
                eps0 = per_call_eps(eps, model.n, 'geometric')
                for factor in (1 + eps0, 1 / (1 + eps0)):
                    oracle = PerturbedMarginalOracle(factor=factor)
                    estimate = partition_via_marginals(model, oracle, eps=eps, split='geometric')
                    failures += abs(estimate - reference) > math.log1p(eps) + 1e-9
                linear = partition_via_marginals(model, PerturbedMarginalOracle(factor=1 + eps / model.n),
                                                 eps=eps, split='linear')
                linear_worst = max(linear_worst, abs(linear - reference) / math.log1p(eps))
        return failures == 0, {"failures": failures,
                               "linear_split_worst_fraction_of_budget": linear_worst}


def run_acceptance(scale: float = 1.0, seed: int = 20240101,
                   only: Optional[List[int]] = None) -> Dict:
    """Run the suite and return its report."""
    return AcceptanceSuite(scale=scale, seed=seed).run(only=only)
