"""CLI commands for mixv: one class per subcommand."""
import argparse
import json
import logging
import math
from typing import Any, Dict, List, Tuple

from config import Config
from database import Database
from equivalence import Verdict, brute_force_equivalence, check_equivalence, verify_witness
from errors import InputError, MixvError, WitnessError
from generators import equivalent_rewrite, perturbed_pair, random_ising, random_mixture
from ising import (GadgetParams, build_marginal_gadget, dummy_marginal, tv_identity_rhs,
                   first_variable_identity_residual, gadget_error_bound, marginal_brute,
                   marginal_via_tv, partition_brute, partition_chain, partition_via_marginals,
                   sign_property_holds, size_gadget, tv_brute, tv_brute_detail,
                   tv_max_over_events)
from messages import format_text
from models import (format_rational, ising_to_dict, load_ising, load_mixture, mixture_prob,
                    mixture_to_dict)
from oracles import BruteForceTVOracle, create_marginal_oracle

logger = logging.getLogger(__name__)

CommandResult = Tuple[int, Dict[str, Any]]

EXIT_OK = 0
EXIT_NOT_EQUAL = 1


class Command:
    """Base class for CLI subcommands."""

    # False for commands whose stdout is a bare document (generated models, history)
    wraps_report = True

    def __init__(self, name: str, description: str):
        """Initialize command.

        Args:
            name: Subcommand name
            description: What this command does
        """
        self.name = name
        self.description = description

    def configure_parser(self, subparsers) -> argparse.ArgumentParser:
        parser = subparsers.add_parser(self.name, help=self.description, description=self.description)
        parser.set_defaults(command=self.name)
        return parser

    def input_paths(self, args: argparse.Namespace) -> List[str]:
        """Files whose bytes go into the report's inputs digest."""
        return []

    def parameters(self, args: argparse.Namespace) -> Dict[str, Any]:
        """Parameter echo for the report (everything except global flags and paths)."""
        skip = {'command', 'log_level', 'record', 'db', 'no_timing'}
        return {key: value for key, value in sorted(vars(args).items())
                if key not in skip and key not in ('p', 'q', 'model', 'models', 'input')}

    def execute(self, args: argparse.Namespace) -> CommandResult:
        """Execute the command.

        Args:
            args: Parsed arguments

        Returns:
            (exit code, result document)
        """
        raise NotImplementedError("Subclasses must implement execute()")


# ==================== EQUIVALENCE ====================

class EqCheckCommand(Command):
    """Decides whether two mixture files describe the same distribution."""

    def __init__(self):
        super().__init__(
            name="eq-check",
            description="Check two mixtures of product distributions for equality"
        )

    def configure_parser(self, subparsers) -> argparse.ArgumentParser:
        parser = super().configure_parser(subparsers)
        parser.add_argument("p", help="first mixture (JSON)")
        parser.add_argument("q", help="second mixture (JSON)")
        parser.add_argument("--brute", action="store_true",
                            help="also run brute-force enumeration and cross-check the verdicts")
        parser.add_argument("--emit-witness", action="store_true",
                            help="include the prefix probabilities of both mixtures at the witness")
        return parser

    def input_paths(self, args) -> List[str]:
        return [args.p, args.q]

    def _witness_document(self, p, q, verdict: Verdict, emit: bool) -> Dict:
        if not verify_witness(p, q, verdict.depth, verdict.witness):
            raise WitnessError(format_text('witness_unverified', depth=verdict.depth,
                                           witness=list(verdict.witness)))
        document = {"i": verdict.depth, "x": list(verdict.witness), "verified": True}
        if emit:
            document["p_prefix"] = format_rational(mixture_prob(p, verdict.witness))
            document["q_prefix"] = format_rational(mixture_prob(q, verdict.witness))
        return document

    def execute(self, args) -> CommandResult:
        p = load_mixture(args.p)
        q = load_mixture(args.q)

        basis_sizes = []
        verdict = check_equivalence(p, q, on_step=lambda basis: basis_sizes.append(len(basis)))
        result: Dict[str, Any] = {
            "verdict": verdict.kind.value,
            "method": "basis",
            "stats": {"n": p.n, "k_p": p.k, "k_q": q.k, "alphabet_size": len(p.alphabet),
                      "basis_sizes": basis_sizes},
        }
        if not verdict.is_equal:
            result["witness"] = self._witness_document(p, q, verdict, args.emit_witness)

        if args.brute:
            brute = brute_force_equivalence(p, q)
            if brute.is_equal != verdict.is_equal:
                raise MixvError(format_text('brute_mismatch', brute=brute.kind.value,
                                            basis=verdict.kind.value))
            result["method"] = "basis+brute"
            result["brute"] = {"verdict": brute.kind.value}
            if not brute.is_equal:
                result["brute"]["witness"] = self._witness_document(p, q, brute, args.emit_witness)

        return (EXIT_OK if verdict.is_equal else EXIT_NOT_EQUAL), result


# ==================== ISING ====================

def _relative_error(log_estimate: float, log_reference: float) -> float:
    return abs(math.expm1(log_estimate - log_reference))


class IsingCommand(Command):
    """Ising oracles, the dummy-spin gadget and the reduction chains."""

    def __init__(self):
        super().__init__(
            name="ising",
            description="Partition functions, marginals, TV distance and reductions for Ising models"
        )

    def configure_parser(self, subparsers) -> argparse.ArgumentParser:
        parser = super().configure_parser(subparsers)
        operations = parser.add_subparsers(dest="operation", required=True)

        partition = operations.add_parser("partition", help="log Z")
        partition.add_argument("model")
        partition.add_argument("--via", choices=["brute", "marginals", "tv"], default="brute")
        self._add_accuracy(partition)

        marginal = operations.add_parser("marginal", help="Pr[x_k = s]")
        marginal.add_argument("model")
        self._add_spin(marginal)
        marginal.add_argument("--via", choices=["brute", "tv"], default="brute")
        self._add_accuracy(marginal)

        tv = operations.add_parser("tv", help="TV distance between two models")
        tv.add_argument("models", nargs=2)
        tv.add_argument("--method", choices=["half_l1", "events"], default="half_l1")

        gadget = operations.add_parser("gadget", help="build and audit the dummy-spin gadget")
        gadget.add_argument("model")
        self._add_spin(gadget)
        gadget.add_argument("--h0", type=float, help="dummy field (auto-sized from --eps if omitted)")
        gadget.add_argument("--delta", type=float, help="coupling boost (auto-sized from --eps if omitted)")
        gadget.add_argument("--tol", type=float, default=None, help="identity tolerance")
        self._add_accuracy(gadget)

        reduce = operations.add_parser("reduce", help="run a reduction chain against brute force")
        reduce.add_argument("target", choices=["partition", "marginal"])
        reduce.add_argument("model")
        self._add_spin(reduce)
        reduce.add_argument("--oracle", choices=["brute", "tv"], default="tv",
                            help="marginal oracle for the partition chain")
        reduce.add_argument("--split", choices=["linear", "geometric"], default=None)
        self._add_accuracy(reduce)
        return parser

    @staticmethod
    def _add_spin(parser):
        parser.add_argument("--k", type=int, default=0, help="target spin (zero-based)")
        parser.add_argument("--s", type=int, choices=[1, -1], default=1, help="target value")

    @staticmethod
    def _add_accuracy(parser):
        parser.add_argument("--eps", type=float, default=0.1)
        parser.add_argument("--conf", type=float, default=0.1)

    def input_paths(self, args) -> List[str]:
        return list(args.models) if getattr(args, 'models', None) else [args.model]

    def execute(self, args) -> CommandResult:
        handler = getattr(self, f"_{args.operation}")
        return EXIT_OK, handler(args)

    def _partition(self, args) -> Dict:
        model = load_ising(args.model)
        if args.via == "brute":
            return {"log_Z": partition_brute(model), "method": "brute"}
        oracle = create_marginal_oracle("brute" if args.via == "marginals" else "tv")
        log_z = partition_via_marginals(model, oracle, eps=args.eps, conf=args.conf)
        return {"log_Z": log_z, "method": f"marginals({oracle.name})", "oracle_calls": oracle.calls,
                "eps": args.eps, "conf": args.conf, "split": Config.EPS_SPLIT}

    def _marginal(self, args) -> Dict:
        model = load_ising(args.model)
        if args.via == "brute":
            value = marginal_brute(model, args.k, args.s)
        else:
            value = marginal_via_tv(model, args.k, args.s, args.eps, tv_oracle=BruteForceTVOracle(),
                                    conf=args.conf)
        return {"marginal": value, "k": args.k, "s": args.s, "method": args.via}

    def _tv(self, args) -> Dict:
        first, second = (load_ising(path) for path in args.models)
        if args.method == "events":
            return {"tv": tv_max_over_events(first, second), "method": "max_over_events"}
        detail = tv_brute_detail(first, second)
        return {"tv": tv_brute(first, second), "method": "half_l1",
                "positive_part": detail.positive_part}

    def _gadget(self, args) -> Dict:
        model = load_ising(args.model)
        sized = size_gadget(model, args.k, args.s, args.eps) if args.h0 is None or args.delta is None else None
        params = GadgetParams(k=args.k,
                              h0=args.h0 if args.h0 is not None else sized.h0,
                              delta=args.delta if args.delta is not None else sized.delta)
        tolerance = args.tol if args.tol is not None else Config.IDENTITY_TOL
        p0, q0 = build_marginal_gadget(model, params)

        dtv = tv_brute(p0, q0)
        marginal = marginal_brute(model, params.k, params.target_sign)
        bound = gadget_error_bound(model, params)
        rhs = tv_identity_rhs(model, params)
        dummy_observed = marginal_brute(p0, 0, 1)
        return {
            "gadget": {"k": params.k, "h0": params.h0, "delta": params.delta,
                       "target_sign": params.target_sign, "W": model.W, "H": model.H,
                       "auto_sized": sized is not None},
            "dtv": dtv,
            "marginal": marginal,
            "observed_error": abs(dtv - marginal),
            "error_bound": bound,
            "bound_informative": bound < 1.0,
            "bound_holds": abs(dtv - marginal) <= bound,
            "tv_identity_rhs": rhs,
            "tv_identity_residual": abs(dtv - rhs),
            "tv_identity_holds": abs(dtv - rhs) <= tolerance,
            "dummy_marginal_residual": abs(dummy_observed - dummy_marginal(params.h0)),
            "sign_property": sign_property_holds(p0, q0, params.k + 1),
            "tolerance": tolerance,
        }

    def _reduce(self, args) -> Dict:
        model = load_ising(args.model)
        if args.target == "marginal":
            tv_oracle = BruteForceTVOracle()
            estimate = marginal_via_tv(model, args.k, args.s, args.eps, tv_oracle=tv_oracle, conf=args.conf)
            reference = marginal_brute(model, args.k, args.s)
            ratio = estimate / reference
            return {"target": "marginal", "k": args.k, "s": args.s, "estimate": estimate,
                    "reference": reference, "relative_error": abs(ratio - 1.0),
                    "within_eps": 1.0 / (1.0 + args.eps) <= ratio <= 1.0 + args.eps,
                    "eps": args.eps, "oracle_calls": tv_oracle.calls}

        oracle = create_marginal_oracle(args.oracle)
        split = args.split or Config.EPS_SPLIT
        estimate = partition_via_marginals(model, oracle, eps=args.eps, conf=args.conf, split=split)
        reference = partition_brute(model)
        residuals = [first_variable_identity_residual(step) for step in partition_chain(model)[:-1]]
        return {"target": "partition", "log_Z_estimate": estimate, "log_Z_reference": reference,
                "relative_error": _relative_error(estimate, reference),
                "within_eps": abs(estimate - reference) <= math.log1p(args.eps),
                "eps": args.eps, "conf": args.conf, "split": split,
                "oracle": oracle.name, "oracle_calls": oracle.calls,
                "max_identity_residual": max(residuals, default=0.0)}


# ==================== GENERATORS ====================

def _parse_alphabet(text: str) -> List[str]:
    symbols = [symbol.strip() for symbol in text.split(',')]
    if not all(symbols):
        raise InputError(format_text('parameter', name='alphabet', reason=f"cannot parse {text!r}"))
    return symbols


class GenCommand(Command):
    """Generates models; stdout is the model document itself."""

    wraps_report = False

    def __init__(self):
        super().__init__(
            name="gen",
            description="Generate random mixtures, rewrites, perturbations and Ising models"
        )

    def configure_parser(self, subparsers) -> argparse.ArgumentParser:
        parser = super().configure_parser(subparsers)
        kinds = parser.add_subparsers(dest="kind", required=True)

        mixture = kinds.add_parser("mixture", help="random mixture")
        mixture.add_argument("-n", type=int, required=True)
        mixture.add_argument("-k", type=int, required=True)
        mixture.add_argument("--alphabet", default="0,1", help="comma-separated symbols")
        mixture.add_argument("--denominator-bound", type=int, default=None)

        rewrite = kinds.add_parser("rewrite", help="same distribution, different parameters")
        rewrite.add_argument("input")
        rewrite.add_argument("--point-mass-limit", type=int, default=None)

        perturb = kinds.add_parser("perturb", help="shift one marginal entry")
        perturb.add_argument("input")
        perturb.add_argument("--magnitude", default="1/7", help="rational shift, e.g. 1/7")
        perturb.add_argument("--component", type=int, default=None)
        perturb.add_argument("--truth", default=None, help="write the brute-force verdict here")

        ising = kinds.add_parser("ising", help="random Ising model")
        ising.add_argument("-n", type=int, required=True)
        ising.add_argument("--density", type=float, default=0.5)
        ising.add_argument("--weight-range", type=float, nargs=2, default=[-1.0, 1.0])
        ising.add_argument("--field-range", type=float, nargs=2, default=[-1.0, 1.0])

        for sub in (mixture, rewrite, perturb, ising):
            sub.add_argument("--seed", type=int, default=0)
            sub.add_argument("-o", "--output", default=None, help="write to a file instead of stdout")
        return parser

    def input_paths(self, args) -> List[str]:
        return [args.input] if getattr(args, 'input', None) else []

    def execute(self, args) -> CommandResult:
        if args.kind == "mixture":
            document = mixture_to_dict(random_mixture(args.n, args.k, _parse_alphabet(args.alphabet),
                                                      args.seed, args.denominator_bound))
        elif args.kind == "rewrite":
            document = mixture_to_dict(equivalent_rewrite(load_mixture(args.input), args.seed,
                                                          args.point_mass_limit))
        elif args.kind == "perturb":
            perturbed, verdict = perturbed_pair(load_mixture(args.input), args.seed, args.magnitude,
                                                args.component)
            logger.info(f"Perturbed pair ground truth: {verdict.kind.value}")
            if args.truth:
                with open(args.truth, 'w', encoding='utf-8') as handle:
                    json.dump(verdict.to_dict(), handle, indent=2)
            document = mixture_to_dict(perturbed)
        else:
            document = ising_to_dict(random_ising(args.n, args.density, tuple(args.weight_range),
                                                  tuple(args.field_range), args.seed))

        if args.output:
            with open(args.output, 'w', encoding='utf-8') as handle:
                json.dump(document, handle, indent=2)
                handle.write("\n")
            return EXIT_OK, {"written": args.output}
        return EXIT_OK, document


# ==================== HARNESS AND LEDGER ====================

class AcceptanceCommand(Command):
    """Runs the acceptance criteria and reports PASS/FAIL per criterion."""

    def __init__(self):
        super().__init__(
            name="acceptance",
            description="Run the acceptance suite (exit 0 only if every criterion passes)"
        )

    def configure_parser(self, subparsers) -> argparse.ArgumentParser:
        parser = super().configure_parser(subparsers)
        parser.add_argument("--scale", type=float, default=1.0,
                            help="multiply instance counts (e.g. 0.1 for a quick run)")
        parser.add_argument("--seed", type=int, default=20240101)
        parser.add_argument("--only", type=int, nargs="*", default=None, help="criterion numbers to run")
        return parser

    def execute(self, args) -> CommandResult:
        from acceptance import AcceptanceSuite

        suite = AcceptanceSuite(scale=args.scale, seed=args.seed)
        report = suite.run(only=args.only)
        return (EXIT_OK if report["passed"] else 3), {"acceptance": report}


class HistoryCommand(Command):
    """Lists runs stored in the ledger."""

    wraps_report = False

    def __init__(self, db_factory=None):
        super().__init__(
            name="history",
            description="Show recorded runs from the run ledger"
        )
        self.db_factory = db_factory or Database

    def configure_parser(self, subparsers) -> argparse.ArgumentParser:
        parser = super().configure_parser(subparsers)
        parser.add_argument("--limit", type=int, default=20)
        parser.add_argument("--run", default=None, help="show one run by id (prefix accepted)")
        parser.add_argument("--digest", default=None, help="list every run over inputs with this sha256")
        return parser

    def execute(self, args) -> CommandResult:
        db = self.db_factory(args.db)
        try:
            if args.run:
                run = db.get_run(args.run)
                if run is None:
                    raise InputError(format_text('parameter', name='run',
                                                 reason=f"no unique run matches {args.run!r}"))
                return EXIT_OK, run
            if args.digest:
                return EXIT_OK, {"runs": db.get_runs_by_digest(args.digest)}
            return EXIT_OK, {"runs": db.get_recent_runs(args.limit)}
        finally:
            db.close()


def get_all_commands(db_factory=None) -> Dict[str, Command]:
    """Get all available CLI commands.

    Args:
        db_factory: Optional callable path -> Database for the history command

    Returns:
        Dictionary of command_name -> command_instance
    """
    commands = [EqCheckCommand(), IsingCommand(), GenCommand(), AcceptanceCommand(),
                HistoryCommand(db_factory)]
    return {command.name: command for command in commands}
