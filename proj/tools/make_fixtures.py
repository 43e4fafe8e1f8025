"""Regenerate the synthetic fixtures under data/.

    python tools/make_fixtures.py [--out data]

gamma_interarrival.csv
    20 interarrival times (days) drawn from Gamma(shape 5, mean 2.6), rounded
    to 0.01 and shifted on the last value so the sample mean is exactly 2.61.
    Its own stream (seed 706) was picked so the fitted shape lands near 5.22.
b38_synthetic.csv
    31 monthly recruitment counts for a staggered multi-site trial. Sites open
    on a ramp (3 per month, capped at 45); the study-level monthly mean is
    5 ln(month) + 20 scaled by days in the month / 30, and counts are
    negative binomial with dispersion 1.6.
weibull_tot.csv
    200 time-on-treatment values (months) from a Weibull with shape 1.3 and
    scale 10, with uniform administrative censoring tuned to roughly 20%.
future_sites.csv
    Active-site schedule and days per month for months 32 to 40, used with
    the b38 fixture.
"""

import argparse
import pathlib

import numpy as np


def gamma_interarrival(rng):
    y = np.round(rng.gamma(5.0, 2.6 / 5.0, size=20), 2)
    y[-1] = round(y[-1] + (2.61 * 20 - y.sum()), 2)
    assert y[-1] > 0
    return y


MONTH_DAYS = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]


def b38(rng):
    months = np.arange(1, 32)
    days = np.array(MONTH_DAYS * 3)[:31]
    sites = np.minimum(3 * months, 45)
    mean = (5.0 * np.log(months) + 20.0) * days / 30.0
    phi = 1.6
    # negative binomial with variance phi * mean
    p = 1.0 / phi
    r = mean * p / (1.0 - p)
    events = rng.negative_binomial(r, p)
    return months, events, days, sites


def weibull(rng):
    n, k, lam = 200, 1.3, 10.0
    t = lam * rng.weibull(k, size=n)
    c = rng.uniform(0.0, 48.0, size=n)
    time = np.round(np.minimum(t, c), 3)
    event = (t <= c).astype(int)
    time = np.maximum(time, 0.001)
    return time, event


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--seed", type=int, default=20240611)
    a = ap.parse_args()
    out = pathlib.Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(a.seed)

    y = gamma_interarrival(np.random.default_rng(706))
    with open(out / "gamma_interarrival.csv", "w") as f:
        f.write("interarrival_days\n")
        f.writelines(f"{v:.2f}\n" for v in y)

    months, events, days, sites = b38(rng)
    with open(out / "b38_synthetic.csv", "w") as f:
        f.write("period,events,exposure_days,active_sites\n")
        for row in zip(months, events, days, sites):
            f.write("{},{},{},{}\n".format(*row))

    with open(out / "future_sites.csv", "w") as f:
        f.write("period,active_sites,exposure_days\n")
        for m in range(32, 41):
            f.write(f"{m},45,{MONTH_DAYS[(m - 1) % 12]}\n")

    time, event = weibull(rng)
    with open(out / "weibull_tot.csv", "w") as f:
        f.write("time,event\n")
        f.writelines(f"{t:.3f},{e}\n" for t, e in zip(time, event))


if __name__ == "__main__":
    main()
