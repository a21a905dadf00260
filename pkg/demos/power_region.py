"""Scan prod (k/(k+1))^(x^k) across x; the boundary x = 1 is the telescoping product."""
from prodkit.powerprod import power_region_scan

rep = power_region_scan("n/(n+1)", [-1, -0.5, 0, 0.5, 0.9, 0.99, 1.0])
for row in rep["rows"]:
    v = row["verdict"]
    print(f"x = {row['x']:5}: {v['kind']:15s} {v['limit_estimate']}")
