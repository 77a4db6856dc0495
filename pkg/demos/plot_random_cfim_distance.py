"""
How close is a random-basis CFIM to the QFIM?
=============================================

For an 8-qubit, 3-layer RyRz-CNOT state we draw random measurement bases
of increasing depth and measure ||F_C - F_Q / 2|| in Frobenius norm.
Deeper basis circuits scramble the state more and pull the classical
matrix toward half the quantum one.
"""

import numpy as np

from vqa_natgrad import experiments as ex
from vqa_natgrad.circuits import AnsatzSpec, build_ansatz

circuit = build_ansatz(AnsatzSpec("RyRz-CNOT", 8, 3))
theta = np.random.default_rng([0, 0]).uniform(0, 2 * np.pi, circuit.n_params)

hist = ex.distance_histogram(circuit, theta, n_bases=100, measurement_layers=(1, 2, 3), seed=0)
for depth, h in hist.items():
    print(f"basis depth {depth}: mean {h['mean']:.3f}  std {h['std']:.3f}")

###############################################################################
# Ranks: the Z basis loses directions that a random basis keeps.

for row in ex.rank_table(ex.AnalysisConfig(rank_layers=(1, 2, 3))):
    print(row)
