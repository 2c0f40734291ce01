"""Free rigid body as a bracket-only model: zero anchors, so(3) constants,
and the two classical invariants staying put over a long run.

With all anchors zero the base never moves and the momentum equation is the
pure coadjoint motion p' = c(dH/dp, p).  Half the squared momentum norm is a
Casimir of that bracket, so it is conserved for every Hamiltonian, while the
energy is conserved along its own flow only.
"""

import numpy as np

from affgebroid.catalog import rigid_body
from affgebroid.flow import integrate_rk4
from affgebroid.hamiltonian import hamilton_vector_field

entry = rigid_body(lams=(1.0, 2.0, 3.0))

state0 = np.array([0.0, 1.0, 2.0, 3.0])  # clock then p1, p2, p3
traj = integrate_rk4(hamilton_vector_field(entry.ham), state0, 0.0, 10.0, 1e-3)

momenta = traj.states[:, 1:]
casimir = 0.5 * np.sum(momenta**2, axis=1)
energy = np.array([entry.ham.value(s[:1], s[1:]) for s in traj.states])

print("%8s  %14s  %14s  %40s" % ("t", "casimir", "energy", "p"))
for k in range(0, len(traj), 2000):
    print(
        "%8.2f  %14.10f  %14.10f  %40s"
        % (traj.times[k], casimir[k], energy[k], np.array2string(momenta[k], precision=6))
    )

print("casimir drift: %.3e" % np.max(np.abs(casimir - casimir[0])))
print("energy drift:  %.3e" % np.max(np.abs(energy - energy[0])))
