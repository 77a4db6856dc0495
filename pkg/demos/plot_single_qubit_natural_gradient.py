"""
Natural gradient on one qubit
=============================

With a single Ry rotation every information matrix collapses to the
scalar 1, so gradient descent and the quantum natural gradient trace the
same path. This is the smallest sanity check of the whole stack.
"""

import numpy as np

from vqa_natgrad import fisher
from vqa_natgrad.circuits import ParameterizedCircuit, Rotation
from vqa_natgrad.hamiltonians import PauliHamiltonian
from vqa_natgrad.optimizers import OptimizerConfig, run

circuit = ParameterizedCircuit(1, (Rotation("Y", 0, 0),), 1)
h = PauliHamiltonian.from_list([(1.0, "Z")])

###############################################################################
# Both Fisher matrices equal [[1]] away from the poles.

for theta in (0.4, 1.3, 2.8):
    fq = fisher.qfim_parameter_shift(circuit, [theta]).matrix
    fc = fisher.cfim(circuit, [theta]).matrix
    print(f"theta={theta:.1f}  F_Q={fq[0, 0]:.12f}  F_C(Z)={fc[0, 0]:.12f}")

###############################################################################
# Hence the two optimizers agree step for step: theta <- theta + eta sin(theta).

gd = run(OptimizerConfig("GD", 0.1, 50), circuit, h, [np.pi / 2])
qng = run(OptimizerConfig("QNG", 0.1, 50), circuit, h, [np.pi / 2])
print("max |GD - QNG| loss gap:", np.abs(gd.losses - qng.losses).max())
print("final loss:", gd.final_loss)
