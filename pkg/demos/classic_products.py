"""Verdicts for a handful of classic products, next to their known limits."""
import math

from prodkit import estimate_convergence, m_absolute_verdict

CASES = [
    ("(1+1/n)^((-1)^(n+1))", math.pi / 2),
    ("exp((-1)^(n+1)/n)", 2.0),
    ("1-1/(n+1)^2", 0.5),
    ("1+1/n", None),
    ("2^((-1)^n)", None),
]

for text, known in CASES:
    v = estimate_convergence(text)
    m, _ = m_absolute_verdict(text)
    print(f"{text:24s} {v.kind.value:20s} {v.limit_estimate!s:22s} known={known}  modulus: {m.kind.value}")
