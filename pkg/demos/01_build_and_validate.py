"""Define a model from scratch, check its structure, and watch a bad bracket
get rejected.

A model is a chart (base coordinate names plus a fibre dimension) together
with structure functions given as expression strings: the reference anchor
rho0, the fibre anchors rho, and optionally the bracket coefficients c0 and
c.  Validation samples the base box and measures two residuals, one for the
anchor compatibility of the bracket and one for the Jacobi identity.
"""

import numpy as np

from affgebroid.model import AffgebroidModel, Chart, validate_structure

chart = Chart(
    ["x"],
    2,
    base_box=[(0.5, 0.9)],
    fibre_box=[(-1.0, 1.0)] * 2,
)

# anchors d/dx and x d/dx with [e1, e2] = e1: closed, and visibly so below
model = AffgebroidModel(
    chart,
    rho0=["0"],
    rho=[["1"], ["x"]],
    c={(1, 2): ["1", "0"]},
)

report = validate_structure(model, samples=100, seed=0)
print(report.summary())
print("worst anchor point:", report.worst_anchor_point)

x = np.array([0.7])
s = model.structure_at(x)
print("anchors at x = 0.7:", s.rho[:, 0])
print("bracket coefficient C_12 at x = 0.7:", s.c[0, 1])

# flip the bracket sign and the anchor relation breaks
bad = AffgebroidModel(
    chart,
    rho0=["0"],
    rho=[["1"], ["x"]],
    c={(1, 2): ["-1", "0"]},
)
bad_report = validate_structure(bad, samples=100, seed=0)
print(bad_report.summary())
