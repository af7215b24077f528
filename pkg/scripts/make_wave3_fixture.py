"""Regenerate the bundled wave-3 shaped synthetic fixture.

The fixture mimics the shape of a late pre-election poll wave: 4730
respondents of whom exactly 533 are undecided, six parties, five binary
covariates, and at least 15 distinct undecided groups.  Everything is
drawn from a seeded PCG64 generator, so the output is reproducible.

Usage: python scripts/make_wave3_fixture.py [OUTPUT]
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

PARTIES = ("SPD", "CDU_CSU", "GRUENE", "FDP", "AFD", "LINKE")
SCHEMA = ("female", "age_65plus", "east", "high_income", "urban")
N_TOTAL = 4730
N_UNDECIDED = 533
SEED = 20210926

# Undecided groups and their sizes; 16 distinct sets summing to 533.
UNDECIDED_GROUPS = [
    (("SPD", "GRUENE"), 120),
    (("CDU_CSU", "FDP"), 90),
    (("SPD", "CDU_CSU"), 60),
    (("GRUENE", "LINKE"), 45),
    (("SPD", "LINKE"), 40),
    (("CDU_CSU", "GRUENE"), 35),
    (("FDP", "AFD"), 30),
    (("SPD", "FDP"), 25),
    (("CDU_CSU", "AFD"), 22),
    (("GRUENE", "FDP"), 18),
    (("SPD", "GRUENE", "LINKE"), 15),
    (("CDU_CSU", "FDP", "AFD"), 12),
    (("SPD", "GRUENE", "FDP"), 8),
    (("SPD", "CDU_CSU", "FDP"), 6),
    (("SPD", "CDU_CSU", "GRUENE"), 4),
    (("FDP", "LINKE"), 3),
]

# Intercepts approximate late-2021 shares; covariate effects are mild
# and made up, but give the choice models real structure to find.
INTERCEPTS = np.log(np.array([0.26, 0.23, 0.15, 0.12, 0.11, 0.13]))
EFFECTS = np.array(
    [
        # female, age_65plus, east, high_income, urban
        [0.10, 0.25, -0.10, -0.15, 0.05],   # SPD
        [-0.05, 0.45, -0.20, 0.25, -0.20],  # CDU_CSU
        [0.25, -0.50, -0.25, 0.10, 0.45],   # GRUENE
        [-0.15, -0.20, -0.10, 0.40, 0.10],  # FDP
        [-0.35, -0.05, 0.55, -0.10, -0.30], # AFD
        [0.05, -0.10, 0.45, -0.30, 0.15],   # LINKE
    ]
)


def build_rows(rng: np.random.Generator) -> list[str]:
    coef = np.hstack([INTERCEPTS[:, None], EFFECTS])
    rows = []

    def covariates():
        return rng.integers(0, 2, size=len(SCHEMA))

    def weight():
        return round(float(np.clip(rng.lognormal(mean=0.0, sigma=0.35), 0.25, 4.0)), 4)

    n_decided = N_TOTAL - N_UNDECIDED
    for _ in range(n_decided):
        x = covariates()
        scores = coef @ np.concatenate(([1.0], x))
        scores -= scores.max()
        p = np.exp(scores)
        p /= p.sum()
        vote = rng.choice(len(PARTIES), p=p)
        rows.append(f"{weight()},{PARTIES[vote]},{','.join(map(str, x))}")

    for parties, count in UNDECIDED_GROUPS:
        for _ in range(count):
            x = covariates()
            rows.append(f"{weight()},{';'.join(parties)},{','.join(map(str, x))}")

    order = rng.permutation(len(rows))
    return [rows[i] for i in order]


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "data" / "wave3_synthetic.csv"
    rng = np.random.default_rng(SEED)
    rows = build_rows(rng)
    header = "weight,parties," + ",".join(SCHEMA)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
    print(f"wrote {len(rows)} rows to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
