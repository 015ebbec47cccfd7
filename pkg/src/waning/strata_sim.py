"""Principal-strata simulator for two-period trials, with closed-form oracles.

Each participant has a response type at each period: doomed (event when
exposed, either arm), helped (event only on placebo), harmed (event only on
vaccine) or immune (never). Waning moves participants from helped to doomed
and/or from immune to harmed between the periods; placebo responses never
change, so every simulated (T1, T2) pair is reachable under sharp no waning
of the placebo.

Stratum codes follow the 1-based ordering doomed=1, helped=2, harmed=3,
immune=4.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._rng import ordered_map, stream
from .errors import DomainError, Infeasible, MalformedInput, ZeroDenominator, ZeroStratum
from .trial_data import RecordArray

DOOMED, HELPED, HARMED, IMMUNE = 1, 2, 3, 4
HELPED_TO_DOOMED = "helped_to_doomed"
IMMUNE_TO_HARMED = "immune_to_harmed"
EQUAL_MIX = "equal_mix"
SCENARIOS = (HELPED_TO_DOOMED, IMMUNE_TO_HARMED, EQUAL_MIX)

CHUNK = 1 << 16  # participants per RNG substream


@dataclass(frozen=True)
class StratumDist:
    p_doomed: float
    p_helped: float
    p_harmed: float
    p_immune: float

    def __post_init__(self):
        probs = self.as_array()
        if not np.all(np.isfinite(probs)) or probs.min() < 0 or probs.max() > 1:
            raise DomainError(f"stratum probabilities must lie in [0, 1], got {tuple(probs)}")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise DomainError(f"stratum probabilities must sum to 1, got {probs.sum()!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.p_doomed, self.p_helped, self.p_harmed, self.p_immune], dtype=float)

    @classmethod
    def of(cls, value) -> "StratumDist":
        """Accept a StratumDist, a 4-sequence, or a dict with the field names."""
        if isinstance(value, StratumDist):
            return value
        if isinstance(value, dict):
            return cls(**{k: float(v) for k, v in value.items()})
        return cls(*(float(v) for v in value))


@dataclass(frozen=True)
class Confounding:
    """Binary exposure-seeking trait: half the population uses ``p_e_high``, half ``p_e_low``."""

    p_e_high: float
    p_e_low: float


@dataclass(frozen=True)
class TransitionRates:
    w_star_helped: float
    w_star_immune: float


@dataclass(frozen=True)
class SimConfig:
    n: int
    dist: StratumDist
    p_e1: float = 0.9
    p_e2: float = 0.9
    w: float = 1.0
    scenario: str = HELPED_TO_DOOMED
    p_treat: float = 0.5
    confounding: Confounding | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dist", StratumDist.of(self.dist))
        if isinstance(self.confounding, dict):
            object.__setattr__(self, "confounding", Confounding(**self.confounding))
        if not (isinstance(self.n, (int, np.integer)) and self.n > 0):
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 < self.p_treat < 1.0:
            raise DomainError(f"p_treat must lie in (0, 1), got {self.p_treat!r}")
        probs = [self.p_e1, self.p_e2]
        if self.confounding is not None:
            probs += [self.confounding.p_e_high, self.confounding.p_e_low]
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise DomainError("exposure probabilities must lie in [0, 1]")
        if not self.w >= 1.0:
            raise DomainError(f"waning factor w must be >= 1, got {self.w!r}")
        if self.scenario not in SCENARIOS:
            raise DomainError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")

    def to_dict(self) -> dict:
        doc = asdict(self)
        if self.confounding is None:
            doc.pop("confounding")
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "SimConfig":
        if not isinstance(doc, dict) or "n" not in doc or "dist" not in doc:
            raise MalformedInput("simulation config needs at least 'n' and 'dist'")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise MalformedInput(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise MalformedInput(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


def transition_rates(dist: StratumDist, w: float, scenario: str) -> TransitionRates:
    """Per-period probabilities of helped->doomed and immune->harmed moves.

    Solves ``w_h * p_helped + w_i * p_immune = (w - 1) * (p_doomed + p_harmed)``,
    which multiplies the challenge incidence ratio by ``w``. The scenario
    pins ``w_i = 0``, ``w_h = 0``, or ``w_h = w_i``.
    """
    dist = StratumDist.of(dist)
    if scenario not in SCENARIOS:
        raise DomainError(f"unknown scenario {scenario!r}")
    if not w >= 1.0:
        raise DomainError(f"waning factor w must be >= 1, got {w!r}")
    if w == 1.0:
        return TransitionRates(0.0, 0.0)
    target = (w - 1.0) * (dist.p_doomed + dist.p_harmed)
    pool = {
        HELPED_TO_DOOMED: dist.p_helped,
        IMMUNE_TO_HARMED: dist.p_immune,
        EQUAL_MIX: dist.p_helped + dist.p_immune,
    }[scenario]
    if pool <= 0:
        raise ZeroStratum(f"scenario {scenario} has no participants to transition")
    rate = target / pool
    if rate > 1.0 + 1e-12:
        w_max = 1.0 + pool / (dist.p_doomed + dist.p_harmed)
        raise Infeasible(f"w={w} needs transition rate {rate:.4g} > 1; largest feasible w is {w_max:.6g}", w_max)
    rate = min(rate, 1.0)  # round-off at the cap
    if scenario == HELPED_TO_DOOMED:
        return TransitionRates(rate, 0.0)
    if scenario == IMMUNE_TO_HARMED:
        return TransitionRates(0.0, rate)
    return TransitionRates(rate, rate)


def challenge_ir(dist: StratumDist) -> float:
    """Period-1 challenge incidence ratio ``(doomed + harmed) / (doomed + helped)``."""
    dist = StratumDist.of(dist)
    denom = dist.p_doomed + dist.p_helped
    if denom <= 0:
        raise ZeroDenominator("p_doomed + p_helped must be positive")
    return (dist.p_doomed + dist.p_harmed) / denom


def period2_dist(dist: StratumDist, rates: TransitionRates) -> StratumDist:
    """Marginal stratum distribution after the waning transitions."""
    dist = StratumDist.of(dist)
    moved_h = rates.w_star_helped * dist.p_helped
    moved_i = rates.w_star_immune * dist.p_immune
    p = np.array(
        [dist.p_doomed + moved_h, dist.p_helped - moved_h, dist.p_harmed + moved_i, dist.p_immune - moved_i]
    )
    p = np.clip(p, 0.0, 1.0)
    return StratumDist(*(p / p.sum()))


def challenge_ir2(dist: StratumDist, w: float, scenario: str) -> float:
    """Period-2 challenge incidence ratio (isolated in period 1, exposed in period 2)."""
    return challenge_ir(period2_dist(dist, transition_rates(dist, w, scenario)))


def hr2_bias_factor(dist: StratumDist, p_e1: float) -> float:
    """Factor by which HR2 departs from HR1 under the null from depletion alone."""
    dist = StratumDist.of(dist)
    if not 0.0 <= p_e1 <= 1.0:
        raise DomainError(f"p_e1 must lie in [0, 1], got {p_e1!r}")
    s0 = 1.0 - (dist.p_doomed + dist.p_helped)
    s1 = 1.0 - (dist.p_doomed + dist.p_harmed)
    return (s0 * p_e1 + (1.0 - p_e1)) / (s1 * p_e1 + (1.0 - p_e1))


# --------------------------------------------------------------------------
# expected observed quantities


def _exposure_groups(config: SimConfig):
    """(weight, P(E1=1), P(E2=1 | event-free)) for each exposure behaviour group."""
    if config.confounding is None:
        return [(1.0, config.p_e1, config.p_e2)]
    c = config.confounding
    return [(0.5, c.p_e_high, c.p_e_high), (0.5, c.p_e_low, c.p_e_low)]


def joint_strata(dist: StratumDist, rates: TransitionRates) -> np.ndarray:
    """4x4 matrix of P(T1 = i, T2 = j), 0-based in doomed/helped/harmed/immune order."""
    p = StratumDist.of(dist).as_array()
    joint = np.diag(p)
    joint[1, 1] -= rates.w_star_helped * p[1]
    joint[1, 0] += rates.w_star_helped * p[1]
    joint[3, 3] -= rates.w_star_immune * p[3]
    joint[3, 2] += rates.w_star_immune * p[3]
    return joint


def expected_outcome_probs(config: SimConfig) -> np.ndarray:
    """Exact P(outcome = k | arm = a) as a 2x3 array, for the configured mechanism.

    Derived by summing over exposure groups and (T1, T2) pairs; an event in
    period 2 needs survival of period 1 (unexposed, or not susceptible under
    the arm), exposure in period 2, and susceptibility under the arm at T2.
    """
    rates = transition_rates(config.dist, config.w, config.scenario)
    joint = joint_strata(config.dist, rates)
    out = np.zeros((2, 3))
    for arm in (0, 1):
        # doomed always susceptible; helped only on placebo; harmed only on vaccine
        sus = np.array([1.0, 1.0 - arm, float(arm), 0.0])
        p_sus1 = joint.sum(axis=1) @ sus
        p_sus2 = joint.sum(axis=0) @ sus
        p_sus2_not1 = (1.0 - sus) @ joint @ sus
        for weight, pe1, pe2 in _exposure_groups(config):
            out[arm, 1] += weight * pe1 * p_sus1
            out[arm, 2] += weight * pe2 * ((1.0 - pe1) * p_sus2 + pe1 * p_sus2_not1)
        out[arm, 0] = 1.0 - out[arm, 1] - out[arm, 2]
    return out


def expected_ir(config: SimConfig, period: int) -> float:
    probs = expected_outcome_probs(config)
    return probs[1, period] / probs[0, period]


def expected_hr2(config: SimConfig) -> float:
    probs = expected_outcome_probs(config)
    h1 = probs[1, 2] / (1.0 - probs[1, 1])
    h0 = probs[0, 2] / (1.0 - probs[0, 1])
    return h1 / h0


def true_p12(config: SimConfig) -> float:
    """P(E2 = 1 | E1 = 1, event-free after period 1), pooled over arms.

    Exposure does not depend on arm or stratum in the simulator, so this is
    the exposure-group mixture of ``P(E2=1 | E1=1)``.
    """
    groups = _exposure_groups(config)
    num = sum(w * pe1 * pe2 for w, pe1, pe2 in groups)
    den = sum(w * pe1 for w, pe1, _ in groups)
    return num / den if den > 0 else math.nan


# --------------------------------------------------------------------------
# simulation


@dataclass
class SimulatedTrial:
    records: RecordArray
    t1: np.ndarray = field(repr=False)
    t2: np.ndarray = field(repr=False)

    def strata_tally(self) -> np.ndarray:
        """4x4 counts of (T1, T2) pairs."""
        idx = (self.t1.astype(np.int64) - 1) * 4 + (self.t2.astype(np.int64) - 1)
        return np.bincount(idx, minlength=16).reshape(4, 4)


def _exposure(rng: np.random.Generator, u: np.ndarray | None, p: float, conf: Confounding | None, size: int):
    if conf is None:
        return rng.random(size) < p
    draw = rng.random(size)
    return np.where(u, draw < conf.p_e_high, draw < conf.p_e_low)


def _simulate_chunk(config: SimConfig, rates: TransitionRates, chunk: int):
    start = chunk * CHUNK
    size = min(CHUNK, config.n - start)
    rng = stream(config.seed, "sim", chunk)
    arm = (rng.random(size) < config.p_treat).astype(np.int8)
    cum = np.cumsum(config.dist.as_array())[:3]
    t1 = (np.searchsorted(cum, rng.random(size), side="right") + 1).astype(np.int8)
    conf = config.confounding
    u = rng.random(size) < 0.5 if conf is not None else None
    e1 = _exposure(rng, u, config.p_e1, conf, size)

    move = rng.random(size)
    t2 = t1.copy()
    t2[(t1 == HELPED) & (move < rates.w_star_helped)] = DOOMED
    t2[(t1 == IMMUNE) & (move < rates.w_star_immune)] = HARMED

    def susceptible(t):
        return (t == DOOMED) | ((arm == 0) & (t == HELPED)) | ((arm == 1) & (t == HARMED))

    dy1 = e1 & susceptible(t1)
    e2 = ~dy1 & _exposure(rng, u, config.p_e2, conf, size)
    dy2 = e2 & susceptible(t2)
    outcome = np.where(dy1, 1, np.where(dy2, 2, 0)).astype(np.int8)
    return arm, outcome, t1, t2


def simulate_strata(config: SimConfig, workers: int = 1) -> SimulatedTrial:
    """Simulate a trial and keep the latent strata of every participant.

    Participants are generated in chunks of :data:`CHUNK`; chunk ``j`` draws
    from substream ``(seed, "sim", j)`` so the output is identical for any
    ``workers``.
    """
    rates = transition_rates(config.dist, config.w, config.scenario)
    n_chunks = -(-config.n // CHUNK)
    parts = ordered_map(lambda j: _simulate_chunk(config, rates, j), range(n_chunks), workers)
    arm, outcome, t1, t2 = (np.concatenate(col) for col in zip(*parts))
    return SimulatedTrial(RecordArray(arm, outcome), t1, t2)


def simulate_trial(config: SimConfig, workers: int = 1) -> RecordArray:
    """Individual records ``(arm, outcome)`` for one simulated trial."""
    return simulate_strata(config, workers).records


def simulate_table(config: SimConfig, workers: int = 1) -> np.ndarray:
    """2x3 arm-by-outcome table of one simulated trial."""
    return simulate_trial(config, workers).cell_counts()
