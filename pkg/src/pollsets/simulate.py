"""Synthetic populations with known latent votes, plus brute-force oracles.

Generated respondents draw a latent vote from a covariate-conditional
multinomial; a coarsened respondent reports a set that always contains
that vote, so the latent population shares are one admissible
completion of the survey and must fall inside every Dempster interval.

The oracles re-derive interval bounds the expensive way: by enumerating
every completion of the undecided, or by grid-searching within-set
allocation vectors.  They share no arithmetic shortcuts with the
closed-form bounds they are used to check, beyond the effective
allocation box that defines the constrained semantics.

Randomness comes from numpy's default PCG64 generator, explicitly
seeded, so runs reproduce across platforms.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bounds import AllocationConstraint, Interval, dempster_bounds, effective_allocation_limits, event_bounds
from .data import Covariates, PartyRegistry, PartySet, Respondent, Survey

COMPLETION_BUDGET = 1_000_000
GRID_BUDGET = 2_000_000


class CoarsenStyle(enum.Enum):
    ADD_RANDOM = "add_random"
    NEIGHBOR = "neighbor"


@dataclass(frozen=True)
class SimConfig:
    registry: PartyRegistry
    n: int
    coefficients: tuple[tuple[float, ...], ...]
    covariate_names: tuple[str, ...] = ()
    coarsen_prob: float = 0.2
    style: CoarsenStyle = CoarsenStyle.ADD_RANDOM
    seed: int = 0
    weight_range: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= self.coarsen_prob <= 1.0:
            raise ValueError("coarsen_prob must lie in [0, 1]")
        coef = tuple(tuple(float(v) for v in row) for row in self.coefficients)
        object.__setattr__(self, "coefficients", coef)
        k, p = len(coef), len(coef[0]) if coef else 0
        if k != len(self.registry) or p != 1 + len(self.covariate_names):
            raise ValueError("coefficient matrix must be (registry size) x (1 + covariates)")
        lo, hi = self.weight_range
        if not 0 < lo <= hi:
            raise ValueError("weight_range must satisfy 0 < low <= high")


@dataclass(frozen=True)
class GroundTruth:
    """Latent vote per respondent and the resulting weighted population shares."""

    votes: tuple[int, ...]
    shares: dict[str, float]


@dataclass(frozen=True)
class CoverageReport:
    violations: tuple[str, ...]
    margins: dict[str, float]

    @property
    def ok(self) -> bool:
        return not self.violations


def default_true_coefficients(k_categories: int, n_covariates: int) -> tuple[tuple[float, ...], ...]:
    """A fixed, centered coefficient pattern used when none is supplied."""
    coef = np.zeros((k_categories, 1 + n_covariates))
    coef[:, 0] = np.linspace(0.8, -0.8, k_categories)
    for j in range(1, 1 + n_covariates):
        for k in range(k_categories):
            coef[k, j] = 0.5 * ((-1) ** (k + j)) / j
    coef -= coef.mean(axis=0, keepdims=True)
    return tuple(tuple(float(v) for v in row) for row in coef)


def generate_population(config: SimConfig) -> tuple[Survey, GroundTruth]:
    """Draw a survey and its latent votes; deterministic given the seed."""
    rng = np.random.default_rng(config.seed)
    k = len(config.registry)
    n_cov = len(config.covariate_names)
    x = np.ones((config.n, 1 + n_cov))
    if n_cov:
        x[:, 1:] = rng.integers(0, 2, size=(config.n, n_cov))
    coef = np.array(config.coefficients)
    scores = x @ coef.T
    scores -= scores.max(axis=1, keepdims=True)
    probs = np.exp(scores)
    probs /= probs.sum(axis=1, keepdims=True)

    cumulative = probs.cumsum(axis=1)
    votes = (rng.random((config.n, 1)) > cumulative).sum(axis=1)
    votes = np.minimum(votes, k - 1)

    lo, hi = config.weight_range
    weights = rng.uniform(lo, hi, size=config.n) if hi > lo else np.full(config.n, lo)
    coarsen = rng.random(config.n) < config.coarsen_prob

    respondents = []
    latent = []
    for i in range(config.n):
        vote = int(votes[i])
        latent.append(vote)
        mask = 1 << vote
        if coarsen[i]:
            others = [j for j in range(k) if j != vote]
            n_extra = min(int(rng.integers(1, 3)), len(others))
            if config.style is CoarsenStyle.NEIGHBOR:
                p = probs[i, others]
                p = p / p.sum()
                extras = rng.choice(others, size=n_extra, replace=False, p=p)
            else:
                extras = rng.choice(others, size=n_extra, replace=False)
            for j in extras:
                mask |= 1 << int(j)
        cov = None
        if n_cov:
            cov = Covariates(tuple(int(v) for v in x[i, 1:]), config.covariate_names)
        respondents.append(Respondent(float(weights[i]), PartySet(mask), cov))

    survey = Survey(config.registry, config.covariate_names, tuple(respondents), wave=f"sim-seed-{config.seed}")
    shares = {}
    for idx, code in enumerate(config.registry.options):
        selected = [respondents[i].weight for i in range(config.n) if latent[i] == idx]
        shares[code] = min(math.fsum(selected) / survey.total_weight, 1.0)
    return survey, GroundTruth(tuple(latent), shares)


def truth_to_csv(s: Survey, g: GroundTruth) -> str:
    lines = ["vote"]
    lines.extend(s.registry.options[v] for v in g.votes)
    return "\n".join(lines) + "\n"


def oracle_completion_bounds(s: Survey, event: PartySet) -> Interval:
    """Event bounds by exhaustive enumeration of all completions.

    Every undecided respondent is assigned, in turn, to each member of
    their set; the extremal weighted event shares over all assignments
    are returned.  Weight sums are exactly rounded, so the result is
    bit-identical to the closed-form bounds.
    """
    if not s.respondents:
        raise ValueError("oracle on an empty survey")
    undecided = [r for r in s.respondents if not r.decided]
    budget = 1
    for r in undecided:
        budget *= r.set.size
        if budget > COMPLETION_BUDGET:
            raise ValueError(
                f"completion budget exceeded ({budget} > {COMPLETION_BUDGET}); use a smaller instance"
            )
    base = [r.weight for r in s.respondents if r.decided and r.set.issubset(event)]
    choice_weights = [
        tuple(r.weight if event.contains_index(i) else None for i in r.set.indices())
        for r in undecided
    ]
    w_total = s.total_weight
    best_lo = None
    best_hi = None
    for combo in itertools.product(*(range(len(c)) for c in choice_weights)):
        selected = list(base)
        for j, pick in enumerate(combo):
            w = choice_weights[j][pick]
            if w is not None:
                selected.append(w)
        share = min(math.fsum(selected) / w_total, 1.0)
        if best_lo is None or share < best_lo:
            best_lo = share
        if best_hi is None or share > best_hi:
            best_hi = share
    return Interval(best_lo, best_hi)


@lru_cache(maxsize=4096)
def _grid_extremes(k: int, m: int, lo_units: int, hi_units: int, total_units: int) -> tuple[int, int]:
    """Extremal in-event unit mass over all grid allocations of a k-set.

    Enumerates every vector of k coordinates in [lo_units, hi_units]
    summing to total_units, where the first m coordinates belong to the
    event.  Returns (min, max) of the in-event unit sum.
    """
    best: list[int | None] = [None, None]
    leaves = [0]

    def recurse(depth: int, remaining: int, in_event_units: int):
        coords_left = k - depth
        if remaining < coords_left * lo_units or remaining > coords_left * hi_units:
            return
        if depth == k:
            leaves[0] += 1
            if leaves[0] > GRID_BUDGET:
                raise ValueError("allocation grid budget exceeded; use a coarser step")
            if best[0] is None or in_event_units < best[0]:
                best[0] = in_event_units
            if best[1] is None or in_event_units > best[1]:
                best[1] = in_event_units
            return
        for units in range(lo_units, hi_units + 1):
            recurse(depth + 1, remaining - units, in_event_units + (units if depth < m else 0))

    recurse(0, total_units, 0)
    if best[0] is None:
        raise ValueError("no grid allocation satisfies the box; refine the step")
    return best[0], best[1]


def oracle_constrained_bounds(
    s: Survey, event: PartySet, c: AllocationConstraint, step: float = 0.01
) -> Interval:
    """Constrained event bounds by grid search over within-set allocations."""
    if not 0 < step <= 0.5:
        raise ValueError("grid step must lie in (0, 0.5]")
    total_units = round(1.0 / step)
    w_total = s.total_weight
    lo_terms = []
    hi_terms = []
    for r in s.respondents:
        k = r.set.size
        m = r.set.intersection_size(event)
        if k == 1:
            if m:
                lo_terms.append(r.weight)
                hi_terms.append(r.weight)
            continue
        alpha_eff, beta_eff = effective_allocation_limits(k, c)
        lo_units = math.ceil(alpha_eff * total_units - 1e-9)
        hi_units = math.floor(beta_eff * total_units + 1e-9)
        units_lo, units_hi = _grid_extremes(k, m, lo_units, hi_units, total_units)
        if units_lo:
            lo_terms.append(r.weight * (units_lo / total_units))
        if units_hi:
            hi_terms.append(r.weight * (units_hi / total_units))
    lower = min(math.fsum(lo_terms) / w_total, 1.0)
    upper = min(math.fsum(hi_terms) / w_total, 1.0)
    return Interval(lower, upper)


def coverage_check(s: Survey, g: GroundTruth, coalitions=()) -> CoverageReport:
    """Verify the latent shares fall inside the Dempster intervals.

    Checks every option and every supplied coalition; a violation would
    contradict the construction and is reported rather than raised.
    """
    if len(g.votes) != len(s.respondents):
        raise ValueError("ground truth does not align with the survey")
    forecast = dempster_bounds(s)
    violations = []
    margins = {}
    for code in s.registry.options:
        iv = forecast[code]
        share = g.shares[code]
        margins[code] = min(share - iv.lower, iv.upper - share)
        if not iv.contains(share):
            violations.append(code)
    for spec in coalitions:
        iv = event_bounds(s, spec.members)
        selected = [
            s.respondents[i].weight for i, v in enumerate(g.votes) if spec.members.contains_index(v)
        ]
        share = min(math.fsum(selected) / s.total_weight, 1.0)
        margins[spec.name] = min(share - iv.lower, iv.upper - share)
        if not iv.contains(share):
            violations.append(spec.name)
    return CoverageReport(tuple(violations), margins)
