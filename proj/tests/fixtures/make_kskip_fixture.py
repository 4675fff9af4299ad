"""Regenerates trades_kskip.csv: three days of two tickers observed at
Poisson times on a correlated Brownian log-price (clock timestamps)."""
import numpy as np

rng = np.random.default_rng(20190502)
rows = []
s1, s2, rho = 0.1 / 28200, 0.2 / 28200, 0.65
for day in ["2019-06-03", "2019-06-04", "2019-06-05"]:
    n = 28800
    z1 = rng.standard_normal(n)
    z2 = rho * z1 + np.sqrt(1 - rho**2) * rng.standard_normal(n)
    x1 = np.log(50) + np.cumsum(np.sqrt(s1) * z1)
    x2 = np.log(20) + np.cumsum(np.sqrt(s2) * z2)
    for tick, x, mean in (("AAA", x1, 8.0), ("BBB", x2, 10.0)):
        t = np.cumsum(rng.exponential(mean, size=int(n / mean * 1.3)))
        t = np.unique(np.round(t[t < n - 1], 3))
        for ti in t:
            sec = 32400 + ti
            h, m = int(sec // 3600), int(sec % 3600 // 60)
            s = sec - 3600 * h - 60 * m
            rows.append(f"{day},{tick},{h:02d}:{m:02d}:{s:06.3f},{np.exp(x[int(ti)]):.4f},"
                        f"{int(rng.integers(1, 500))}")
with open("trades_kskip.csv", "w") as f:
    f.write("date,ticker,timestamp,price,volume\n" + "\n".join(rows) + "\n")
