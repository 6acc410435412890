"""Ising model oracles and reductions, all magnitudes kept in log space.

Brute force: partition function, atomic marginals and TV distance by enumerating
{-1,+1}^n in fixed-size blocks (configuration index c has x_i = +1 iff bit i of c is 0).
Blocks may be evaluated by worker threads; their partial results are always combined
in the same tree order, so results do not depend on the worker count.

Reductions:
  * partition function -> atomic marginals: fixing x_1 = +1 folds w_{1,i} into h_i, giving
    Z_1 = Z_2 · exp(h_1) / Pr[x_1 = 1 | P_1]; telescoping down to one spin.
  * atomic marginal -> TV distance: the dummy-spin gadget. P0 adds an isolated spin x_0
    with field h0; Q0 additionally couples x_0 to x_k with weight delta. For h0 -> -inf and
    delta -> inf, dtv(P0, Q0) -> Pr[x_k = 1].
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from errors import GadgetInfeasibleError, InputError, NumericGuardError, OracleError, MixvError
from guards import Guard, check_enumeration
from messages import format_text
from models import IsingModel

logger = logging.getLogger(__name__)

# A log-domain magnitude: log Z, log of an unnormalized weight, ...
LogWeight = float

TV_AGREEMENT_TOL = 1e-10

MarginalOracleFn = Callable[[IsingModel, int, int, float, float], float]
TVOracleFn = Callable[[IsingModel, IsingModel, float, float], float]


# ---------------------------------------------------------------------------
# Log-space helpers and enumeration engine
# ---------------------------------------------------------------------------

def logsumexp(values) -> LogWeight:
    """log Σ exp(values) with max shifting; -inf for an empty or all -inf input."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return -math.inf
    top = np.max(values)
    if not np.isfinite(top):
        return float(top)
    return float(top + np.log(np.sum(np.exp(values - top))))


def _tree_logaddexp(parts: List[float]) -> LogWeight:
    """Pairwise log-add in a fixed tree order (bit-stable for a given block split)."""
    if not parts:
        return -math.inf
    while len(parts) > 1:
        merged = [float(np.logaddexp(parts[i], parts[i + 1])) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            merged.append(parts[-1])
        parts = merged
    return parts[0]


def spin_block(n: int, start: int, stop: int) -> np.ndarray:
    """Spin configurations with indices start..stop-1 as a float array of shape (m, n)."""
    indices = np.arange(start, stop, dtype=np.int64)
    bits = (indices[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.float64)


def _block_energies(model: IsingModel, spins: np.ndarray) -> np.ndarray:
    coupling = model.coupling_matrix()
    return spins @ model.field_vector() + np.einsum('ij,ij->i', spins @ coupling, spins)


def _map_blocks(n: int, guard: Guard, work: Callable[[np.ndarray], tuple]) -> list:
    """Apply `work` to every spin block of {-1,+1}^n, results in block order."""
    size = 2 ** n
    check_enumeration(guard, size)
    chunk = max(1, Config.ENUM_CHUNK)
    ranges = [(start, min(start + chunk, size)) for start in range(0, size, chunk)]

    def run(bounds):
        return work(spin_block(n, *bounds))

    if Config.ENUM_WORKERS > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=Config.ENUM_WORKERS) as pool:
            return list(pool.map(run, ranges))
    return [run(bounds) for bounds in ranges]


def _check_spin(model: IsingModel, k: int, s: int):
    if not 0 <= k < model.n:
        raise InputError(format_text('spin_index', k=k, last=model.n - 1))
    if s not in (1, -1):
        raise InputError(format_text('spin_sign', s=s))


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------

def log_config_weight(model: IsingModel, x: Sequence[int]) -> LogWeight:
    """Σ_{i<j} w_ij x_i x_j + Σ_i h_i x_i for one spin vector."""
    if len(x) != model.n or any(value not in (1, -1) for value in x):
        raise InputError(format_text('spin_vector', n=model.n, x=list(x)))
    energy = sum(h * value for h, value in zip(model.fields, x))
    energy += sum(w * x[i] * x[j] for (i, j), w in model.pair_weights.items())
    return float(energy)


def partition_brute(model: IsingModel) -> LogWeight:
    """log Z by enumeration of all 2^n configurations."""
    model.require_valid()
    parts = _map_blocks(model.n, Guard.ISING,
                        lambda spins: logsumexp(_block_energies(model, spins)))
    return _tree_logaddexp(parts)


def _log_mass_where(model: IsingModel, predicate: Callable[[np.ndarray], np.ndarray],
                    guard: Guard = Guard.ISING) -> Tuple[LogWeight, LogWeight]:
    """(log Z, log Σ_{x: predicate} E(x)) in one pass."""
    model.require_valid()

    def work(spins):
        energies = _block_energies(model, spins)
        return logsumexp(energies), logsumexp(energies[predicate(spins)])

    parts = _map_blocks(model.n, guard, work)
    return _tree_logaddexp([p[0] for p in parts]), _tree_logaddexp([p[1] for p in parts])


def marginal_brute(model: IsingModel, k: int, s: int) -> float:
    """Pr[x_k = s] by enumeration."""
    _check_spin(model, k, s)
    log_z, log_mass = _log_mass_where(model, lambda spins: spins[:, k] == s)
    return float(math.exp(log_mass - log_z))


def _log_probabilities(model: IsingModel, log_z: LogWeight, spins: np.ndarray) -> np.ndarray:
    return _block_energies(model, spins) - log_z


def _check_same_shape(first: IsingModel, second: IsingModel):
    if first.n != second.n:
        raise InputError(format_text('model_shape', left=first.n, right=second.n))


@dataclass(frozen=True)
class TVResult:
    """Both enumeration forms of the TV distance."""

    half_l1: float
    positive_part: float

    @property
    def disagreement(self) -> float:
        return abs(self.half_l1 - self.positive_part)


def tv_brute_detail(first: IsingModel, second: IsingModel) -> TVResult:
    """½ Σ |P(x) - Q(x)| and Σ max(0, P(x) - Q(x)) over {-1,+1}^n."""
    _check_same_shape(first, second)
    check_enumeration(Guard.ISING_PAIR, 2 ** first.n)
    log_z1 = partition_brute(first)
    log_z2 = partition_brute(second)

    def work(spins):
        difference = (np.exp(_log_probabilities(first, log_z1, spins))
                      - np.exp(_log_probabilities(second, log_z2, spins)))
        return float(np.sum(np.abs(difference))), float(np.sum(np.maximum(difference, 0.0)))

    parts = _map_blocks(first.n, Guard.ISING_PAIR, work)
    return TVResult(half_l1=0.5 * math.fsum(p[0] for p in parts),
                    positive_part=math.fsum(p[1] for p in parts))


def tv_brute(first: IsingModel, second: IsingModel) -> float:
    """TV distance by enumeration (half-L1 form, cross-checked against the positive part).

    Raises:
        NumericGuardError: if the two forms disagree by more than 1e-10
    """
    result = tv_brute_detail(first, second)
    if result.disagreement > TV_AGREEMENT_TOL:
        raise NumericGuardError(
            f"TV forms disagree: half-L1 {result.half_l1!r} vs positive part {result.positive_part!r}")
    return min(1.0, max(0.0, result.half_l1))


def probability_vector(model: IsingModel) -> np.ndarray:
    """P(x) for every configuration, in configuration-index order (small n only)."""
    log_z = partition_brute(model)
    spins = spin_block(model.n, 0, 2 ** model.n)
    return np.exp(_log_probabilities(model, log_z, spins))


def tv_max_over_events(first: IsingModel, second: IsingModel) -> float:
    """max over all events S ⊆ {-1,+1}^n of |P(S) - Q(S)| (n <= 3)."""
    _check_same_shape(first, second)
    check_enumeration(Guard.EVENTS, 2 ** first.n)
    difference = probability_vector(first) - probability_vector(second)
    points = len(difference)
    best = 0.0
    for event in range(2 ** points):
        members = [(event >> i) & 1 for i in range(points)]
        best = max(best, abs(math.fsum(d for d, m in zip(difference, members) if m)))
    return best


# ---------------------------------------------------------------------------
# Partition function via atomic marginals
# ---------------------------------------------------------------------------

def eliminate_first_variable(model: IsingModel) -> IsingModel:
    """Model over variables 2..n with w'_ij = w_ij and h'_i = w_{1,i} + h_i.

    Spins are renumbered so that old spin i becomes spin i-1.
    """
    model.require_valid()
    if model.n < 2:
        raise InputError(format_text('too_few_spins', minimum=2, n=model.n))
    pairs = {(i - 1, j - 1): w for (i, j), w in model.pair_weights.items() if i >= 1}
    fields = [model.fields[i] + model.weight(0, i) for i in range(1, model.n)]
    return IsingModel(model.n - 1, pairs, fields)


def partition_chain(model: IsingModel) -> List[IsingModel]:
    """[P_1, P_2, ..., P_n]: the model and its successive first-variable eliminations."""
    chain = [model.require_valid()]
    while chain[-1].n > 1:
        chain.append(eliminate_first_variable(chain[-1]))
    return chain


def first_variable_identity_residual(model: IsingModel) -> float:
    """|log Σ_{x: x_1 = +1} E_1(x) - (h_1 + log Z_2)|, both sides by enumeration."""
    _, log_mass = _log_mass_where(model, lambda spins: spins[:, 0] == 1)
    reduced = partition_brute(eliminate_first_variable(model))
    return abs(log_mass - (model.fields[0] + reduced))


def single_spin_log_partition(h: float) -> LogWeight:
    """log(exp(h) + exp(-h))."""
    return float(np.logaddexp(h, -h))


def per_call_eps(eps: float, n: int, split: Optional[str] = None) -> float:
    """Accuracy requested from each of the n-1 marginal calls.

    linear: eps/n. geometric: (1+eps)^{1/(n-1)} - 1, whose (n-1)-fold product is exactly 1+eps.
    """
    split = (split or Config.EPS_SPLIT).lower()
    if split not in ('linear', 'geometric'):
        raise InputError(format_text('parameter', name='split', reason="expected linear or geometric"))
    if split == 'linear' or n < 2:
        return eps / max(n, 1)
    return math.expm1(math.log1p(eps) / (n - 1))


def _brute_marginal_oracle(model: IsingModel, k: int, s: int, eps: float, conf: float) -> float:
    return marginal_brute(model, k, s)


def partition_via_marginals(model: IsingModel, marginal_oracle: Optional[MarginalOracleFn] = None,
                            eps: float = 0.1, conf: float = 0.1,
                            split: Optional[str] = None) -> LogWeight:
    """Estimate log Z from n-1 atomic-marginal queries.

    log Z = Σ_{t=1}^{n-1} (h_1^{(t)} - log m_t) + log Z_n, where m_t estimates
    Pr[x_1 = +1] under the t-th reduced model and Z_n is the single-spin closed form.

    Args:
        model: Ising model
        marginal_oracle: Callable (model, k, s, eps, conf) -> estimate; exact brute force if None
        eps: Target accuracy of the Z estimate
        conf: Target failure probability (split as conf/n across calls)
        split: Accuracy split, 'linear' or 'geometric' (Config.EPS_SPLIT if None)

    Returns:
        Estimate of log Z

    Raises:
        OracleError: if the oracle fails or returns a non-positive estimate
    """
    model.require_valid()
    if not eps > 0 or not 0 < conf < 1:
        raise InputError(format_text('parameter', name='eps/conf', reason="need eps > 0 and 0 < conf < 1"))
    oracle = marginal_oracle or _brute_marginal_oracle
    eps0 = per_call_eps(eps, model.n, split)
    conf0 = conf / model.n

    log_z = 0.0
    current = model
    for step in range(1, model.n):
        try:
            estimate = oracle(current, 0, 1, eps0, conf0)
        except MixvError:
            raise
        except Exception as e:
            raise OracleError(format_text('oracle_failed', oracle=getattr(oracle, 'name', oracle), reason=e))
        if estimate is None or not math.isfinite(estimate) or estimate <= 0:
            raise OracleError(format_text('oracle_nonpositive', value=estimate, step=step))
        log_z += current.fields[0] - math.log(estimate)
        logger.debug(f"Step {step}: h_1={current.fields[0]:.6g}, m={estimate:.6g}, eps0={eps0:.3g}")
        current = eliminate_first_variable(current)

    log_z += single_spin_log_partition(current.fields[0])
    logger.info(f"Partition estimate via {model.n - 1} marginal call(s): log Z ≈ {log_z:.12g}")
    return log_z


# ---------------------------------------------------------------------------
# Atomic marginals via TV distance: the dummy-spin gadget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GadgetParams:
    """Target spin k (of the original model), dummy field h0 and coupling boost delta.

    h0 < 0 targets Pr[x_k = +1]; h0 > 0 targets Pr[x_k = -1].
    """

    k: int
    h0: float
    delta: float

    def __post_init__(self):
        if not math.isfinite(self.h0) or not math.isfinite(self.delta):
            raise InputError(format_text('parameter', name='h0/delta', reason="must be finite"))
        if not self.delta > 1:
            raise InputError(format_text('gadget_delta', delta=self.delta))
        limit = Config.GADGET_MAX_MAGNITUDE
        if abs(self.h0) > limit or self.delta > limit:
            raise GadgetInfeasibleError(
                format_text('gadget_infeasible', eps="(given)", h0=abs(self.h0),
                            delta=self.delta, limit=limit),
                required_h0=abs(self.h0), required_delta=self.delta)

    @property
    def target_sign(self) -> int:
        return 1 if self.h0 <= 0 else -1

    @property
    def dummy_tail(self) -> float:
        """exp(-2|h0|): probability scale of the dummy spin's unlikely value."""
        return math.exp(-2.0 * abs(self.h0))


def build_marginal_gadget(model: IsingModel, params: GadgetParams) -> Tuple[IsingModel, IsingModel]:
    """(P0, Q0) over spins 0..n: spin 0 is the dummy, original spin i becomes spin i+1.

    P0 leaves spin 0 isolated with field h0; Q0 is P0 plus the pair (0, k+1) with weight
    delta (w_{0,k} is 0 in P0, so w'_{0,k} = w_{0,k} + delta = delta).
    """
    model.require_valid()
    _check_spin(model, params.k, 1)
    pairs = {(i + 1, j + 1): w for (i, j), w in model.pair_weights.items()}
    fields = (params.h0,) + tuple(model.fields)
    p0 = IsingModel(model.n + 1, pairs, fields)
    q0 = IsingModel(model.n + 1, {**pairs, (0, params.k + 1): params.delta}, fields)
    return p0, q0


def gadget_error_bound(model: IsingModel, params: GadgetParams) -> float:
    """2·exp(-2|h0|) + exp(-delta)·Z_P0/Z_Q0, with the partition ratio computed exactly."""
    p0, q0 = build_marginal_gadget(model, params)
    log_ratio = partition_brute(p0) - partition_brute(q0)
    bound = 2.0 * params.dummy_tail + math.exp(log_ratio - params.delta)
    if bound >= 1.0:
        logger.warning(format_text('bound_vacuous', bound=bound))
    return bound


def _expit(t: float) -> float:
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def dummy_marginal(h0: float) -> float:
    """Pr[x_0 = +1 | P0] = exp(2h0) / (exp(2h0) + 1)."""
    return _expit(2.0 * h0)


def tv_identity_rhs(model: IsingModel, params: GadgetParams) -> float:
    """exp(2h0)/(exp(2h0)+1) - Σ_{x: x_0 x_k = -1} Q0(x) + (1-exp(2h0))/(exp(2h0)+1)·Pr[x_k = 1]."""
    p0, q0 = build_marginal_gadget(model, params)
    target = params.k + 1
    log_z, log_mass = _log_mass_where(q0, lambda spins: spins[:, 0] * spins[:, target] == -1)
    q_mass = math.exp(log_mass - log_z)
    return dummy_marginal(params.h0) - q_mass + math.tanh(-params.h0) * marginal_brute(model, params.k, 1)


def tv_identity_residual(model: IsingModel, params: GadgetParams) -> float:
    """|dtv(P0, Q0) - tv_identity_rhs|, both by enumeration."""
    p0, q0 = build_marginal_gadget(model, params)
    return abs(tv_brute(p0, q0) - tv_identity_rhs(model, params))


def sign_property_holds(p0: IsingModel, q0: IsingModel, target: int) -> bool:
    """P0(x) >= Q0(x) iff x_0 x_target = -1, strictly on that side, for every x."""
    _check_same_shape(p0, q0)
    log_zp = partition_brute(p0)
    log_zq = partition_brute(q0)

    def work(spins):
        lp = _log_probabilities(p0, log_zp, spins)
        lq = _log_probabilities(q0, log_zq, spins)
        opposed = spins[:, 0] * spins[:, target] == -1
        return bool(np.all(lp[opposed] > lq[opposed]) and np.all(lp[~opposed] < lq[~opposed]))

    return all(_map_blocks(p0.n, Guard.ISING, work))


def log_marginal_lower_bound(model: IsingModel) -> float:
    """log of exp(-W(n+1)^2 - (n+1)H) / (4·exp(W(n+1)^2 + (n+1)H)), a floor for Pr[x_k = ±1]."""
    size = model.n + 1
    return -2.0 * model.W * size ** 2 - 2.0 * size * model.H - math.log(4.0)


def size_gadget(model: IsingModel, k: int, s: int, eps: float) -> GadgetParams:
    """Choose h0 and delta so that (4/eps)(2exp(-2|h0|) + exp(-delta) Z_P0/Z_Q0) <= L.

    The gadget bias budget eps·L/4 is split equally between the two terms; the other
    quarter of eps goes to the TV oracle. The partition ratio obeys
    exp(-delta)·Z_P0/Z_Q0 <= 2·exp(-2·delta)/L, which sizes delta without enumeration.

    Raises:
        GadgetInfeasibleError: if the required |h0| or delta exceeds GADGET_MAX_MAGNITUDE
    """
    _check_spin(model, k, s)
    if not 0 < eps <= 1:
        raise InputError(format_text('parameter', name='eps', reason="need 0 < eps <= 1"))
    log_floor = log_marginal_lower_bound(model)
    magnitude = 0.5 * (math.log(16.0) - math.log(eps) - log_floor)
    delta = max(2.0, 0.5 * (math.log(16.0) - math.log(eps) - 2.0 * log_floor))
    limit = Config.GADGET_MAX_MAGNITUDE
    if magnitude > limit or delta > limit:
        raise GadgetInfeasibleError(
            format_text('gadget_infeasible', eps=eps, h0=magnitude, delta=delta, limit=limit),
            required_h0=magnitude, required_delta=delta)
    h0 = -magnitude if s == 1 else magnitude
    logger.debug(f"Gadget sizing for k={k}, s={s:+d}, eps={eps}: h0={h0:.6g}, delta={delta:.6g}")
    return GadgetParams(k=k, h0=h0, delta=delta)


def _brute_tv_oracle(first: IsingModel, second: IsingModel, eps: float, conf: float) -> float:
    return tv_brute(first, second)


def oracle_eps(eps: float) -> float:
    """Accuracy requested from the TV oracle inside marginal_via_tv.

    With gadget bias at most eps/4 and oracle error at most eps/4, the estimate lies in
    [m(1-eps/4)/(1+eps/4), m(1+eps/4)^2], inside [m/(1+eps), m(1+eps)] for every eps <= 1.
    """
    return eps / 4.0


def tv_resolution(n: int) -> float:
    """Smallest TV value enumeration over {-1,+1}^n resolves: 2^n binary64 ulps of 1."""
    return float(2.0 ** n * np.finfo(np.float64).eps)


def marginal_via_tv(model: IsingModel, k: int, s: int, eps: float,
                    tv_oracle: Optional[TVOracleFn] = None, conf: float = 0.1,
                    h0: Optional[float] = None, delta: Optional[float] = None) -> float:
    """Estimate Pr[x_k = s] with a single TV query on the dummy-spin gadget.

    Args:
        model: Ising model
        k: Target spin
        s: +1 or -1
        eps: Target multiplicative accuracy
        tv_oracle: Callable (P0, Q0, eps, conf) -> TV estimate; brute force if None
        conf: Failure probability handed to the TV oracle
        h0: Override the auto-sized dummy field (sign is forced to match s)
        delta: Override the auto-sized coupling boost

    Returns:
        Estimate of Pr[x_k = s]

    Raises:
        GadgetInfeasibleError: if the auto-sized gadget exceeds the supported magnitude
        NumericGuardError: if the estimate is too small for the oracle's eps share to
            dominate binary64 cancellation in the TV sum
    """
    model.require_valid()
    params = size_gadget(model, k, s, eps)
    if h0 is not None or delta is not None:
        magnitude = abs(h0) if h0 is not None else abs(params.h0)
        params = GadgetParams(k=k, h0=-magnitude if s == 1 else magnitude,
                              delta=delta if delta is not None else params.delta)
    p0, q0 = build_marginal_gadget(model, params)
    oracle = tv_oracle or _brute_tv_oracle
    try:
        estimate = oracle(p0, q0, oracle_eps(eps), conf)
    except MixvError:
        raise
    except Exception as e:
        raise OracleError(format_text('oracle_failed', oracle=getattr(oracle, 'name', oracle), reason=e))
    if estimate is None or not math.isfinite(estimate):
        raise OracleError(format_text('oracle_failed', oracle=getattr(oracle, 'name', oracle),
                                      reason=f"returned {estimate!r}"))
    resolution = tv_resolution(p0.n) / oracle_eps(eps)
    if estimate < resolution:
        raise NumericGuardError(format_text('tv_unresolvable', value=estimate, resolution=resolution,
                                            size=2 ** p0.n, eps=eps))
    logger.debug(f"marginal_via_tv: Pr[x_{k} = {s:+d}] ≈ {estimate:.12g}")
    return float(estimate)
