#!/usr/bin/env python3
"""Regenerate the bundled synthetic loan dataset (seeded, committed output).

Segments are constructed so the bundled fixture trees tell a coherent story
on this data: regional defaults cluster in ZIP 99901, which v1.1 prices in
and v1.0 cannot see.
"""

from __future__ import annotations

import csv
import random
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "hada" / "data" / "sample_loans.csv"

COLUMNS = [
    "Loan_ID",
    "Gender",
    "Married",
    "Dependents",
    "Education",
    "SelfEmployed",
    "ApplicantIncome",
    "CoapplicantIncome",
    "LoanAmount",
    "LoanTerm",
    "CreditHistory",
    "PropertyArea",
    "ZIP_Code",
    "Loan_Status",
]

GOOD_ZIPS = ["75201", "75202", "76309", "73301"]
RISKY_ZIP = "99901"
AREAS = ["Urban", "Semiurban", "Rural"]


def base_row(rng: random.Random, i: int) -> dict:
    return {
        "Loan_ID": f"LP{i:06d}",
        "Gender": rng.choice(["Male", "Female"]),
        "Married": rng.choice(["Yes", "No"]),
        "Dependents": rng.choice([0, 0, 1, 2, 3]),
        "Education": rng.choice(["Graduate", "Graduate", "Not Graduate"]),
        "SelfEmployed": rng.choice(["No", "No", "No", "Yes"]),
        "CoapplicantIncome": rng.choice([0, 0, 0, 800, 1500, 2200]),
        "LoanTerm": rng.choice([12, 24, 30, 36, 48, 60]),
        "PropertyArea": rng.choice(AREAS),
    }


def main() -> None:
    rng = random.Random(20250106)
    rows = []
    i = 0

    def add(segment_size, credit, income_range, amount_range, zip_pool, label):
        nonlocal i
        for _ in range(segment_size):
            i += 1
            row = base_row(rng, i)
            row["CreditHistory"] = credit
            row["ApplicantIncome"] = rng.randint(*income_range)
            row["LoanAmount"] = rng.randint(*amount_range)
            row["ZIP_Code"] = rng.choice(zip_pool)
            row["Loan_Status"] = label
            rows.append(row)

    # No credit history: declined across the board.
    add(30, "No", (1200, 6000), (4000, 25000), GOOD_ZIPS + [RISKY_ZIP], "N")
    # Good history but thin income: declined.
    add(20, "Yes", (900, 2400), (4000, 18000), GOOD_ZIPS, "N")
    # Solid applicants in stable regions: approved.
    add(44, "Yes", (2800, 7500), (5000, 19500), GOOD_ZIPS, "Y")
    # Solid-looking applicants in the distressed region: defaulted.
    add(15, "Yes", (2800, 6500), (9000, 19500), [RISKY_ZIP], "N")
    # Oversized requests that later defaulted.
    add(3, "Yes", (3000, 7000), (22000, 30000), GOOD_ZIPS, "N")
    # A handful of approved ZIP-99901 applicants (the region is risky, not hopeless).
    add(2, "Yes", (5200, 7800), (6000, 12000), [RISKY_ZIP], "Y")

    # Sprinkle missing values for the imputation path.
    for idx in rng.sample(range(len(rows)), 6):
        field = rng.choice(["Dependents", "LoanTerm", "SelfEmployed"])
        rows[idx][field] = ""

    with OUT.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {OUT}")


if __name__ == "__main__":
    main()
