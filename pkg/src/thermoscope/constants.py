"""Closed-form constants of the line-case stability analysis (x0 = 1 units)."""
import math

# omega_1 * x0**2 : first Popov-set frequency on the line
B_PI = 9.0 * math.pi**2 / 8.0
# beta_1 * x0 : critical feedback gain on the line
C_PI = 3.0 * math.pi / math.sqrt(2.0) * math.exp(3.0 * math.pi / 4.0)
# x0**2 / q : slope of the tangent Popov line
D_PI = 9.0 * math.pi**3 / (8.0 * math.pi + 32.0 / 3.0)
# omega_1 * q, independent of x0
HOPF_PRODUCT = (3.0 * math.pi + 4.0) / (3.0 * math.pi)
