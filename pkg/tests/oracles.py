"""Reference values for the test suite.

Every constant below was computed once with mpmath at 30 digits and frozen
here. ``test_oracles.py`` recomputes them so a typo cannot slip through, but
the tests themselves only ever compare against these literals.
"""
import math

N_DEFAULT = 10**6

# limits of the corpus products
BASEL = 5.18066831789711574841662620112          # exp(pi^2/6)
ALT_BASEL = 2.27610815162573409479106141203      # exp(pi^2/12)
NEG_BASEL = 0.193025289139898043248910176728     # exp(-pi^2/6)
HALF_PI = 1.57079632679489661923132169164
TWO_OVER_PI = 0.63661977236758134307553505349
E_E = 15.1542622414792641897604302726
E_SQUARED = 7.38905609893065022723042746058
E_FOURTH = 54.5981500331442390781102612029
INV_SQRT2 = 0.707106781186547524400844362105

# partial sums at N = 10^6
BASEL_LOGSUM_1E6 = 1.64493306684872643630574849998   # sum_{k<=N} 1/k^2
ALT_LOGSUM_1E6 = 0.693146680560195309417231996458    # sum_{k<=N} (-1)^(k+1)/k
ALT_PARTIAL_1E6 = 1.99999900000074999970833321354

# Cesaro row of x_n = 1 + 1/n at m = 10^6, closed form (m+1)^(1/m)
CESARO_Y_1E6 = 1.00001381560699258307040907651

# least n0 with expm1(sum_{k>n0} 1/k^2) < 1e-3
TAIL_N0_1E3 = 1000


def _alt_sign(n):
    return 1.0 if n % 2 else -1.0


# the corpus: name -> (expression, expected kind, expected limit or None)
CORPUS = {
    "exp(1/n)": ("exp(1/n)", "DivergesToInfinity", None),
    "exp(-1/n)": ("exp(-1/n)", "DivergesToZero", None),
    "exp(1/n^2)": ("exp(1/n^2)", "Converges", BASEL),
    "exp(-1/n^2)": ("exp(-1/n^2)", "Converges", NEG_BASEL),
    "alt-harmonic": ("exp((-1)^(n+1)/n)", "Converges", 2.0),
    "alt-basel": ("exp((-1)^(n+1)/n^2)", "Converges", ALT_BASEL),
    "1+1/n": ("1+1/n", "DivergesToInfinity", None),
    "telescoping": ("n/(n+1)", "DivergesToZero", None),
    "half-two": ("2^((-1)^n)", "Oscillates", None),
    "wallis": ("(1+1/n)^((-1)^(n+1))", "Converges", HALF_PI),
    "const-1": ("1", "Converges", 1.0),
    "const-2": ("2", "DivergesToInfinity", None),
}
