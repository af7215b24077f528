"""Point forecasts from set-valued polls.

Two estimators are provided.  The conventional forecast simply drops
every undecided respondent and reports weighted shares among the
decided.  The homogeneity forecast instead keeps the undecided: a
choice model fitted on the decided predicts each undecided respondent's
affinity to every party, the prediction is restricted to their
consideration set and renormalized, and those per-respondent transition
rows are aggregated together with the decided votes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import mnl
from .bounds import Interval, IntervalForecast
from .data import PartySet, Respondent, Survey

_ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ProbabilityVector:
    """Per-option shares summing to one."""

    shares: dict[str, float]

    def __post_init__(self):
        total = math.fsum(self.shares.values())
        if abs(total - 1.0) > _ROW_SUM_TOL:
            raise ValueError(f"shares sum to {total}, expected 1")
        if any(v < 0 or v > 1 for v in self.shares.values()):
            raise ValueError("shares must lie in [0, 1]")

    def __getitem__(self, option: str) -> float:
        return self.shares[option]


@dataclass(frozen=True)
class TransitionTable:
    """Per-respondent choice distributions restricted to each consideration set.

    ``rows[i]`` maps option code to probability for respondent i; options
    outside the respondent's set are omitted and implicitly zero.
    ``fallback_rows`` lists respondents predicted without covariates.
    """

    rows: tuple[dict[str, float], ...]
    fallback_rows: tuple[int, ...] = ()

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            if abs(math.fsum(row.values()) - 1.0) > _ROW_SUM_TOL:
                raise ValueError(f"transition row {i} does not sum to 1")


def conventional_forecast(s: Survey) -> ProbabilityVector:
    """Weighted shares among decided respondents only."""
    decided = [r for r in s.respondents if r.decided]
    if not decided:
        raise ValueError("no decided respondents")
    w_total = math.fsum(r.weight for r in decided)
    shares = {}
    for i, code in enumerate(s.registry.options):
        shares[code] = math.fsum(r.weight for r in decided if r.set.contains_index(i)) / w_total
    return ProbabilityVector(shares)


def _design_row(r: Respondent, n_predictors: int) -> np.ndarray:
    x = np.zeros(n_predictors)
    x[0] = 1.0
    if r.covariates is not None:
        x[1:] = r.covariates.values
    return x


def _restricted_row(probs: np.ndarray, member_indices, registry) -> dict[str, float]:
    denom = float(np.sum(probs[list(member_indices)]))
    if denom < 1e-12:
        raise ValueError("restricted prediction mass vanished; model is degenerate")
    return {registry.options[i]: float(probs[i]) / denom for i in member_indices}


def transition_probabilities(m: mnl.MnlModel, s: Survey) -> TransitionTable:
    """Model predictions restricted to each respondent's set and renormalized.

    Decided respondents get a degenerate row.  Respondents without
    covariates fall back to the model's intercept-only prediction and
    are listed in ``fallback_rows``.
    """
    if m.n_categories != len(s.registry):
        raise ValueError("model categories do not match the registry")
    if m.n_predictors != 1 + len(s.schema):
        raise ValueError("model predictors do not match the survey covariate schema")
    rows = []
    fallbacks = []
    intercept_probs = None
    for i, r in enumerate(s.respondents):
        if r.decided:
            rows.append({s.registry.options[r.set.indices()[0]]: 1.0})
            continue
        if r.covariates is None and m.n_predictors > 1:
            if intercept_probs is None:
                scores = m.coefficients[:, 0] - m.coefficients[:, 0].max()
                intercept_probs = np.exp(scores)
                intercept_probs /= intercept_probs.sum()
            probs = intercept_probs
            fallbacks.append(i)
        else:
            probs = mnl.predict_proba(m, _design_row(r, m.n_predictors))
        rows.append(_restricted_row(probs, r.set.indices(), s.registry))
    return TransitionTable(tuple(rows), tuple(fallbacks))


def decided_design(s: Survey) -> mnl.DesignData:
    """Design data over decided respondents, categories in registry order."""
    decided = [r for r in s.respondents if r.decided]
    if not decided:
        raise ValueError("no decided respondents")
    p = 1 + len(s.schema)
    x = np.ones((len(decided), p))
    y = np.empty(len(decided), dtype=int)
    w = np.empty(len(decided))
    for i, r in enumerate(decided):
        if s.schema:
            if r.covariates is None:
                raise ValueError("decided respondent lacks covariates required by the schema")
            x[i, 1:] = r.covariates.values
        y[i] = r.set.indices()[0]
        w[i] = r.weight
    return mnl.DesignData(x, y, w, len(s.registry))


def homogeneity_forecast(
    s: Survey,
    options: mnl.FitOptions = mnl.FitOptions(),
    penalty: mnl.PenaltySpec | None = None,
    constraint: mnl.Constraint | None = None,
) -> tuple[ProbabilityVector, TransitionTable, mnl.FitReport]:
    """Forecast assuming the undecided choose within their sets like the decided.

    Fits the choice model on decided respondents, builds the transition
    table, and aggregates decided votes with undecided transition rows,
    all weighted.
    """
    design = decided_design(s)
    if penalty is None:
        penalty = mnl.PenaltySpec.none()
    if constraint is None:
        constraint = mnl.Constraint.symmetric()
    model, report = mnl.fit(design, penalty, constraint, options)
    table = transition_probabilities(model, s)
    w_total = s.total_weight
    shares = {}
    for code in s.registry.options:
        terms = []
        for r, row in zip(s.respondents, table.rows):
            p = row.get(code, 0.0)
            if p:
                terms.append(r.weight * p)
        shares[code] = math.fsum(terms) / w_total
    # Exact renormalization absorbs accumulated float error in the row products.
    total = math.fsum(shares.values())
    shares = {code: v / total for code, v in shares.items()}
    return ProbabilityVector(shares), table, report


def seat_share(p: ProbabilityVector | IntervalForecast, included: PartySet, registry) -> ProbabilityVector | IntervalForecast:
    """Renormalize shares over the included parties.

    For a point vector this is plain renormalization.  For intervals,
    each bound is divided by the extreme attainable total of the other
    included parties, capped by simplex feasibility, which is the exact
    image of the interval credal set and keeps lower <= upper.
    """
    codes = registry.codes_of(included)
    if not codes:
        raise ValueError("included set is empty")
    if isinstance(p, ProbabilityVector):
        total = math.fsum(p.shares[c] for c in codes)
        if total <= 0:
            raise ValueError("included shares sum to zero")
        return ProbabilityVector({c: p.shares[c] / total for c in codes})

    excluded = [c for c in p.intervals if c not in set(codes)]
    out = {}
    for code in codes:
        iv = p.intervals[code]
        rest_upper = math.fsum(p.intervals[c].upper for c in codes if c != code)
        rest_lower = math.fsum(p.intervals[c].lower for c in codes if c != code)
        out_lower = math.fsum(p.intervals[c].lower for c in excluded)
        out_upper = math.fsum(p.intervals[c].upper for c in excluded)
        rest_max = min(rest_upper, 1.0 - iv.lower - out_lower)
        rest_min = max(rest_lower, 1.0 - iv.upper - out_upper)
        denom_lo = iv.lower + rest_max
        denom_hi = iv.upper + rest_min
        if denom_lo <= 0 or denom_hi <= 0:
            raise ValueError("seat renormalization denominator vanished")
        lo = iv.lower / denom_lo
        hi = iv.upper / denom_hi
        out[code] = Interval(min(lo, hi), max(lo, hi))
    return IntervalForecast(out, p.total_weight)


def forecast_to_json(method: str, p: ProbabilityVector, n_decided: int, n_undecided: int) -> str:
    doc = {
        "method": method,
        "shares": dict(p.shares),
        "n_decided": n_decided,
        "n_undecided": n_undecided,
    }
    return json.dumps(doc, indent=2) + "\n"
