"""End-to-end walk through the pipeline on the bundled fixture.

Prints the descriptive summary, both point forecasts, Dempster and
20/80-constrained bounds, and the coalition analysis, roughly in the
order an analyst would produce them for one poll wave.

Usage: python scripts/run_demo.py
"""

from __future__ import annotations

from pathlib import Path

from pollsets import (
    AllocationConstraint,
    coalition_report,
    constrained_bounds,
    conventional_forecast,
    dempster_bounds,
    group_counts,
    homogeneity_forecast,
    parse_survey,
    undecided_share,
)
from pollsets.bounds import parse_coalitions
from pollsets.data import PartyRegistry

ROOT = Path(__file__).resolve().parents[1]
REGISTRY = PartyRegistry(("SPD", "CDU_CSU", "GRUENE", "FDP", "AFD", "LINKE"))
SCHEMA = ("female", "age_65plus", "east", "high_income", "urban")


def main() -> int:
    survey = parse_survey((ROOT / "data" / "wave3_synthetic.csv").read_text(), REGISTRY, SCHEMA)
    unweighted, weighted = undecided_share(survey)
    print(f"respondents: {len(survey)}  undecided: {survey.n_undecided}")
    print(f"undecided share: {unweighted:.4f} unweighted / {weighted:.4f} weighted\n")

    print("largest undecided groups:")
    for ps, (count, _) in group_counts(survey, top=8).items():
        if not ps.is_singleton:
            print(f"  {REGISTRY.label_of(ps):<24} {count}")

    conv = conventional_forecast(survey)
    hom, _, _ = homogeneity_forecast(survey)
    print("\nforecast        conventional   homogeneity")
    for code in REGISTRY.options:
        print(f"  {code:<12} {conv[code]:>10.4f} {hom[code]:>13.4f}")

    wide = dempster_bounds(survey)
    narrow = constrained_bounds(survey, AllocationConstraint(0.2, 0.8))
    print("\nbounds              dempster          20/80")
    for code in REGISTRY.options:
        w, n = wide[code], narrow[code]
        print(f"  {code:<10} [{w.lower:.4f}, {w.upper:.4f}]  [{n.lower:.4f}, {n.upper:.4f}]")

    specs = parse_coalitions((ROOT / "data" / "coalitions_2021.csv").read_text(), REGISTRY)
    print("\ncoalitions (dempster, majority at 50%):")
    for name, interval, status in coalition_report(survey, specs):
        print(f"  {name:<16} [{interval.lower:.4f}, {interval.upper:.4f}]  {status.value}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
