"""
Bond alternation on an open six-site chain.  As the weak bond t2 shrinks the
electrons pair up into local singlets, pair entanglement on the strong bonds
grows and genuine multipartite entanglement vanishes.
"""
import numpy as np

from fermispin.extraction import dense_spin_state
from fermispin.measures import analyze
from fermispin.models import ssh_chain, tight_binding_determinant

print(" t2/t1   C_GME   A*_xi      max C   A*")
for ratio in (1.0, 0.75, 0.5, 0.25, 0.1, 0.0):
    state, _ = tight_binding_determinant(ssh_chain(6, -1.0, -ratio), 6)
    rep = analyze(dense_spin_state(state, range(6))[0])
    (i, j), c = rep.max_pair()
    cut = rep.argmin_bipartitions[0].label()
    print(f"{ratio:6.2f}  {rep.gme_concurrence:6.3f}   {cut:<9}  {c:6.3f}  {{s{i + 1},s{j + 1}}}")
