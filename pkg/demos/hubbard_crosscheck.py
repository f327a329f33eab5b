"""
Hubbard ring, 4 sites at half filling.  Growing U pushes the weight of the
singly occupied sector toward 1.  The normalized spin state is the Heisenberg
ring ground state for every U > 0: ring symmetry leaves only one singlet.
"""
import numpy as np

from fermispin.extraction import dense_spin_state
from fermispin.measures import gme_concurrence
from fermispin.models import SpinSystemSpec, heisenberg_ground_state, hubbard_ground_state, ring, tight_binding_determinant

ref = heisenberg_ground_state(SpinSystemSpec.ring(4)).state
print("   U    weight   fidelity  C_GME")
for u in (0.5, 1, 2, 4, 8, 16, 100):
    gs = hubbard_ground_state(ring(4, -1.0, u), 4, 0)
    psi, weight = dense_spin_state(gs.state, range(4))
    f = abs(np.vdot(ref, psi)) ** 2
    print(f"{u:5g}  {weight:7.4f}  {f:9.6f}  {gme_concurrence(psi)[0]:.4f}")

# the U = 0 4-ring is open shell; a 6-site ring is not, and there Hubbard and
# the Slater determinant coincide
gs = hubbard_ground_state(ring(6, -1.0, 0.0), 6, 0)
sd, _ = tight_binding_determinant(ring(6), 6)
c_hub = gme_concurrence(dense_spin_state(gs.state, range(6))[0])[0]
c_sd = gme_concurrence(dense_spin_state(sd, range(6))[0])[0]
print("6-ring, U = 0:", round(c_hub, 10), round(c_sd, 10))
