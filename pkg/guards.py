"""Enumeration guards: how many configurations a brute-force routine may visit."""
import logging
from enum import Enum
from config import Config
from errors import EnumerationGuardError
from messages import format_text

logger = logging.getLogger(__name__)


class Guard(Enum):
    """Kinds of enumeration, each with its default configuration-count limit."""
    ISING = "ising"                  # partition function and marginals, 2^24 spins configurations
    ISING_PAIR = "ising_pair"        # TV between two models, 2^20
    EVENTS = "events"                # max-over-events TV, n <= 3 (fixed, counts subsets)
    MIXTURE = "mixture"              # brute-force mixture comparison, |Σ|^n <= 2^16
    POINT_MASS = "point_mass"        # point-mass re-expression, |Σ|^n <= 2^20


DEFAULT_LIMITS = {
    Guard.ISING: 2 ** 24,
    Guard.ISING_PAIR: 2 ** 20,
    Guard.EVENTS: 2 ** 3,
    Guard.MIXTURE: 2 ** 16,
    Guard.POINT_MASS: 2 ** 20,
}

# Guards that MIXV_MAX_ENUM may replace
OVERRIDABLE = {Guard.ISING, Guard.ISING_PAIR, Guard.MIXTURE, Guard.POINT_MASS}

_warned = set()


def resolve_limit(guard: Guard) -> int:
    """Determine the configuration-count limit for a guard.

    Args:
        guard: Kind of enumeration

    Returns:
        MIXV_MAX_ENUM when set and the guard is overridable, the default otherwise
    """
    default = DEFAULT_LIMITS[guard]
    if Config.MAX_ENUM is not None and guard in OVERRIDABLE:
        if (guard, Config.MAX_ENUM) not in _warned:
            _warned.add((guard, Config.MAX_ENUM))
            logger.warning(format_text('enum_override', limit=Config.MAX_ENUM,
                                       guard=guard.value, default=default))
        return Config.MAX_ENUM
    return default


def check_enumeration(guard: Guard, size: int) -> int:
    """Raise EnumerationGuardError if enumerating `size` configurations is not allowed.

    Args:
        guard: Kind of enumeration
        size: Number of configurations (or spins-space points) to be visited

    Returns:
        The limit that was applied
    """
    limit = resolve_limit(guard)
    if size > limit:
        logger.info(f"Guard {guard.value} refused enumeration of {size} > {limit}")
        raise EnumerationGuardError(
            format_text('enum_guard', guard=guard.value, size=size, limit=limit),
            guard=guard.value, size=size, limit=limit)
    return limit
