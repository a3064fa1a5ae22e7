"""Writes data/ten_industry_fixture.csv: 120 synthetic monthly returns (in percent)
whose sample means and standard deviations equal the published 10-industry
summary for 2003-2012 and whose sample correlations all equal 0.6.

The published summary lists no covariances, so the correlation structure here is
an assumption of this fixture, not data.
"""

import argparse
import pathlib

import numpy as np

LABELS = ["NoDur", "Durbl", "Manuf", "Enrgy", "HiTec", "Telcm", "Shops", "Hlth", "Utils", "Other"]
MEANS = np.array([0.85, 0.75, 0.98, 1.25, 0.87, 0.76, 0.89, 0.65, 0.98, 0.45])
STDEVS = np.array([3.44, 8.53, 5.41, 6.19, 5.52, 4.66, 4.24, 3.66, 3.79, 5.62])
CORRELATION = 0.6
MONTHS = 120


def build(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = len(LABELS)
    z = rng.standard_normal((MONTHS, n))
    z -= z.mean(axis=0)
    # whiten so the sample covariance (K - 1 denominator) is exactly the identity
    cov = z.T @ z / (MONTHS - 1)
    z = z @ np.linalg.inv(np.linalg.cholesky(cov)).T
    corr = np.full((n, n), CORRELATION)
    np.fill_diagonal(corr, 1.0)
    x = z @ np.linalg.cholesky(corr).T
    return MEANS + x * STDEVS


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=2003)
    parser.add_argument("--out", type=pathlib.Path,
                        default=pathlib.Path(__file__).resolve().parent.parent / "data" / "ten_industry_fixture.csv")
    args = parser.parse_args()
    returns = build(args.seed)
    lines = ["," + ",".join(LABELS)]
    for k in range(MONTHS):
        year, month = 2003 + k // 12, k % 12 + 1
        lines.append(f"{year}{month:02d}," + ",".join(f"{v:.8f}" for v in returns[k]))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(lines) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
