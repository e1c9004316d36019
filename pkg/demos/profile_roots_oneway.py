"""
Certified one-way fit, step by step
===================================

A five-group layout whose profile criterion has three stationary
points. Everything below is exact until the final float printout:
the equation coefficients are integers, the roots live in rational
enclosures, and the winner is decided by comparing rigorous
log-likelihood brackets, not by eyeballing floats.
"""

from fractions import Fraction

from exactvc.oneway import ml_fit, reml_fit, ml_equation
from exactvc.stats import OneWayStats, ml_degree

# Singleton group sizes 2, 5, 10, 20, 50 and means spread far apart.
# With one group per size class there is no within-class replication,
# so every between-class sum is zero and only the pooled within-group
# sum of squares remains.
stats = OneWayStats(
    sizes=(2, 5, 10, 20, 50),
    mults=(1, 1, 1, 1, 1),
    means=(Fraction("-73571/14273"), Fraction("13781/78326"),
           Fraction("-13277/92152"), Fraction("31207/202567"),
           Fraction("-15713/24121")),
    betweenSS=(Fraction(0),) * 5,
    withinSS=Fraction("116487/421"),
)

# The cancelled stationarity numerator is a single integer polynomial
# in the variance ratio. Its degree is known in advance from the size
# profile alone: 3M + M2 - 3 with M distinct sizes, M2 repeated.
eq = ml_equation(stats)
print("ML equation degree:", eq.observed_degree,
      "(predicted", ml_degree(stats.M, stats.M2), ")")
print("leading coefficient:", eq.numerator.leading_coeff())

rep = ml_fit(stats)
print("\nML stationary points:")
for iv, label in rep.stationary_points:
    print(f"  theta ~ {float(iv.midpoint()):.8f}  ({label}), "
          f"enclosure width {float(iv.width()):.1e}")

g = rep.global_estimates
print("\ncertified global maximum:")
print("  theta ~", float(g.theta.midpoint()))
print("  mu    ~", float(g.mu.midpoint()))
print("  omega ~", float(g.omega.midpoint()))
print("  tau   ~", float(g.tau.midpoint()))

# The restricted criterion for the same data has a single root.
rrep = reml_fit(stats)
print("\nREML stationary points:", len(rrep.stationary_points))
iv, label = rrep.stationary_points[0]
print(f"  theta ~ {float(iv.midpoint()):.6f}  ({label})")
