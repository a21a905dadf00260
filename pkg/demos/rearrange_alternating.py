"""Steer exp((-1)^(n+1)/n) to a chosen liminf and limsup by reordering its factors."""
import sys

from prodkit.rearrange import riemann_rearrange

alpha = float(sys.argv[1]) if len(sys.argv) > 1 else 1.0
beta = float(sys.argv[2]) if len(sys.argv) > 2 else 2.0

view, plan = riemann_rearrange("exp((-1)^(n+1)/n)", alpha, beta, 10**6)
v = plan.verdict()
print(f"targets ({alpha}, {beta}) -> {v.kind.value}")
print(f"  liminf ~ {v.liminf_estimate}, limsup ~ {v.limsup_estimate}, limit ~ {v.limit_estimate}")
print(f"  {len(plan.milestones)} milestones, {plan.emitted} factors emitted")
print("  first factors:", [round(float(x), 4) for x in view.head(8)])
