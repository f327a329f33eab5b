"""
Four electrons on four sites, rotated by the 4-point discrete Fourier
transform, then read out as four spin qubits.

Run: python demos/ring4_fourier.py
"""
import numpy as np

from fermispin import OrbitalRotation, build_closed_shell
from fermispin.extraction import dense_spin_state, nbrdm
from fermispin.fock import UP, DOWN, det_from_occupations
from fermispin.measures import analyze
from fermispin.models import SpinSystemSpec, heisenberg_ground_state

U = OrbitalRotation.dft(4)
print(np.round(U.matrix * 2, 3))  # rows are the delocalized orbitals, times 2

# two electrons in each of the two lowest rotated orbitals
state = build_closed_shell(U, 4)
print("determinants:", len(state.dets), " norm:", round(state.norm(), 12))

# only configurations with one electron per site contribute to the spin state
neel = det_from_occupations([(0, UP), (1, DOWN), (2, UP), (3, DOWN)])
print("amplitude on |u d u d>:", np.round(state.amplitude(neel), 6))

gamma = nbrdm(state, [0, 1, 2, 3])
print("extraction weight:", gamma.weight)  # 48/256

psi, _ = dense_spin_state(state, [0, 1, 2, 3])
rep = analyze(psi)
print("C_GME =", round(rep.gme_concurrence, 6), "(sqrt(5/6) =", round(np.sqrt(5 / 6), 6), ")")
for bp in rep.argmin_bipartitions:
    print("   minimizing cut", bp)

# the same state is the Heisenberg ground state of a 4-spin ring
ref = heisenberg_ground_state(SpinSystemSpec.ring(4)).state
print("overlap with Heisenberg ring:", round(abs(np.vdot(ref, psi)), 12))

# each neighbouring pair is a Werner state with p = 2/3
print("pair (s1,s2): C =", round(rep.pair_concurrences[(0, 1)], 6), " p =", round(rep.werner_p[(0, 1)], 6))
print("pair (s1,s3): C =", round(rep.pair_concurrences[(0, 2)], 6), " p =", round(rep.werner_p[(0, 2)], 6))
