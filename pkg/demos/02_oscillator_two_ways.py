"""Integrate the harmonic oscillator on the chart (t, q) from both sides of
the Legendre map and compare against the closed-form solution.

The reference anchor is the clock (rho0 = (1, 0)) and the single fibre
coordinate y1 is the velocity along q, so the Euler-Lagrange flow lives on
(t, q, y1) and the Hamilton flow on (t, q, p1).
"""

import math

import numpy as np

from affgebroid.catalog import oscillator
from affgebroid.flow import integrate_rk4
from affgebroid.hamiltonian import hamilton_vector_field
from affgebroid.lagrangian import el_vector_field
from affgebroid.legendre import leg, leg_inverse
from affgebroid.model import APoint

entry = oscillator()

el = integrate_rk4(el_vector_field(entry.lag), np.array([0.0, 1.0, 0.0]), 0.0, 1.0, 1e-3)
ha = integrate_rk4(hamilton_vector_field(entry.ham), np.array([0.0, 1.0, 0.0]), 0.0, 1.0, 1e-3)

print("steps:", len(el) - 1)
print("%8s  %18s  %18s  %18s" % ("t", "q (EL side)", "q (Hamilton side)", "cos t"))
for k in range(0, len(el), 250):
    t = el.times[k]
    print(
        "%8.3f  %18.12f  %18.12f  %18.12f"
        % (t, el.states[k][1], ha.states[k][1], math.cos(t))
    )

print("final gap to cos(1):  EL %.3e, Hamilton %.3e" % (
    abs(el.states[-1][1] - math.cos(1.0)),
    abs(ha.states[-1][1] - math.cos(1.0)),
))

# the two flows are the same motion seen through the fibre derivative of L
a = APoint([0.0, 1.0], [0.5])
v = leg(entry.lag, a)
back = leg_inverse(entry.lag, v)
print("velocity 0.5 maps to momentum %.3f and back to %.3f" % (v.p[0], back.y[0]))
