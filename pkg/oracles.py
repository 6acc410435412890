"""Oracle abstraction layer: pluggable approximate-counting oracles for the reductions.

An oracle answers one kind of query with an (eps, conf) accuracy request. Desk-scale
oracles are deterministic and ignore conf; the argument is carried so that randomized
oracles can be plugged into the same reductions.
"""
from abc import ABC, abstractmethod
from typing import Optional
import logging

from errors import InputError
from ising import marginal_brute, marginal_via_tv, tv_brute
from messages import format_text
from models import IsingModel

logger = logging.getLogger(__name__)


class MarginalOracle(ABC):
    """Abstract base class for atomic-marginal oracles: estimates of Pr[x_k = s]."""

    def __init__(self):
        self.calls = 0

    @abstractmethod
    def estimate(self, model: IsingModel, k: int, s: int, eps: float, conf: float) -> float:
        """Return a (1+eps)-multiplicative estimate with probability at least 1-conf."""
        pass

    @abstractmethod
    def get_oracle_name(self) -> str:
        """Return oracle name (brute, tv, perturbed)."""
        pass

    @property
    def name(self) -> str:
        return self.get_oracle_name()

    def __call__(self, model: IsingModel, k: int, s: int, eps: float, conf: float) -> float:
        self.calls += 1
        return self.estimate(model, k, s, eps, conf)


class TVOracle(ABC):
    """Abstract base class for total-variation oracles."""

    def __init__(self):
        self.calls = 0

    @abstractmethod
    def estimate(self, first: IsingModel, second: IsingModel, eps: float, conf: float) -> float:
        """Return a (1+eps)-multiplicative estimate of dtv(first, second)."""
        pass

    @abstractmethod
    def get_oracle_name(self) -> str:
        pass

    @property
    def name(self) -> str:
        return self.get_oracle_name()

    def __call__(self, first: IsingModel, second: IsingModel, eps: float, conf: float) -> float:
        self.calls += 1
        return self.estimate(first, second, eps, conf)


class BruteForceTVOracle(TVOracle):
    """Exact TV by enumeration"""

    def estimate(self, first: IsingModel, second: IsingModel, eps: float, conf: float) -> float:
        return tv_brute(first, second)

    def get_oracle_name(self) -> str:
        return "brute"


class BruteForceMarginalOracle(MarginalOracle):
    """Exact marginals by enumeration"""

    def estimate(self, model: IsingModel, k: int, s: int, eps: float, conf: float) -> float:
        return marginal_brute(model, k, s)

    def get_oracle_name(self) -> str:
        return "brute"


class TVReductionMarginalOracle(MarginalOracle):
    """Marginals answered with one TV query each, through the dummy-spin gadget."""

    def __init__(self, tv_oracle: Optional[TVOracle] = None):
        super().__init__()
        self.tv_oracle = tv_oracle or BruteForceTVOracle()

    def estimate(self, model: IsingModel, k: int, s: int, eps: float, conf: float) -> float:
        return marginal_via_tv(model, k, s, eps, tv_oracle=self.tv_oracle, conf=conf)

    def get_oracle_name(self) -> str:
        return f"tv({self.tv_oracle.name})"


class PerturbedMarginalOracle(MarginalOracle):
    """Scales an inner oracle's answers by a fixed factor, or by (1+eps) when factor is None.

    Used to inject the worst case an accuracy-eps oracle is allowed to return.
    """

    def __init__(self, inner: Optional[MarginalOracle] = None, factor: Optional[float] = None):
        super().__init__()
        if factor is not None and not factor > 0:
            raise InputError(format_text('parameter', name='factor', reason="must be positive"))
        self.inner = inner or BruteForceMarginalOracle()
        self.factor = factor

    def estimate(self, model: IsingModel, k: int, s: int, eps: float, conf: float) -> float:
        scale = self.factor if self.factor is not None else 1.0 + eps
        return self.inner(model, k, s, eps, conf) * scale

    def get_oracle_name(self) -> str:
        return f"perturbed({self.inner.name})"


def create_marginal_oracle(oracle_type: str, **kwargs) -> MarginalOracle:
    """Factory function to create a marginal oracle"""
    if oracle_type == "brute":
        oracle = BruteForceMarginalOracle()
    elif oracle_type == "tv":
        oracle = TVReductionMarginalOracle(kwargs.get('tv_oracle'))
    elif oracle_type == "perturbed":
        oracle = PerturbedMarginalOracle(kwargs.get('inner'), kwargs.get('factor'))
    else:
        raise InputError(format_text('parameter', name='oracle',
                                     reason=f"unknown oracle type {oracle_type!r}"))
    logger.debug(f"Created marginal oracle {oracle.name}")
    return oracle
