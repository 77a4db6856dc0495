"""
A small MaxCut campaign
=======================

Three random weighted 3-regular graphs on 6 vertices, optimized by GD,
QNG and RNG from shared starting angles. Reports the probability of
sampling an optimal cut.
"""

from vqa_natgrad import experiments as ex
from vqa_natgrad.optimizers import OptimizerConfig

cfg = ex.ExperimentConfig(
    problem=ex.ProblemConfig("MaxCut", 6, count=3, seed=0),
    ansatz={"family": "Ry-CZ", "layers": 3, "connectivity": "ring"},
    methods=[OptimizerConfig(m, 0.05, 100, basis_layers=2) for m in ("GD", "QNG", "RNG")],
)
summary = ex.run_benchmark(cfg)
for r in summary.runs:
    print(f"instance {r.instance} {r.method:3s} overlap {r.overlap:.3f}  rel. error {r.relative_error:.4f}"
          f"  preparations {r.preparations}")
for method, agg in summary.aggregates().items():
    print(method, {k: round(v, 4) for k, v in agg.items()})
