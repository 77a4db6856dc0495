"""Benchmark campaigns and Fisher-information analyses at desk scale.

Outputs are plain data: CSV traces (one row per iteration) and JSON
summaries. Plot rendering is left to the caller.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import fisher, linalg
from .circuits import AnsatzSpec, build_ansatz, evaluate, sample_random_measurement
from .hamiltonians import ProblemInstance, random_instance
from .optimizers import OptimizerConfig, OptimizerTrace, run
from .statevector import MAX_QUBITS, Statevector, probabilities


def overlap_with_optimal(state: Statevector, ground_indices=None, ground_vector=None) -> float:
    """Probability of sampling an optimal solution.

    Diagonal problems sum the outcome probabilities over the whole ground
    set; otherwise pass ``ground_vector`` to get ``|<g|psi>|^2``.
    """
    if ground_vector is not None:
        g = np.asarray(ground_vector, dtype=complex)
        return float(min(1.0, abs(np.vdot(g, state.amplitudes)) ** 2))
    if not ground_indices:
        raise ValueError("empty ground set")
    p = probabilities(state)
    return float(min(1.0, p[sorted(ground_indices)].sum()))


def relative_error(loss_value: float, e_opt: float) -> tuple[float, bool]:
    """``(loss - e_opt) / |e_opt|`` and a flag that is True when it fell back to absolute error."""
    if e_opt == 0:
        return float(loss_value - e_opt), True
    return float((loss_value - e_opt) / abs(e_opt)), False


def instance_overlap(inst: ProblemInstance, state: Statevector) -> float:
    if inst.hamiltonian.is_diagonal:
        return overlap_with_optimal(state, inst.ground_indices)
    return overlap_with_optimal(state, ground_vector=inst.ground_vector)


@dataclass
class ProblemConfig:
    kind: str = "MaxCut"
    size: int = 8
    count: int = 10
    seed: int = 0
    weighted: bool = True
    J: float = 1.0
    h: float = 1.0


@dataclass
class ExperimentConfig:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    ansatz: dict = field(default_factory=lambda: {"family": "Ry-CZ", "layers": 4, "connectivity": "ring"})
    methods: list[OptimizerConfig] = field(default_factory=lambda: [
        OptimizerConfig(m, 0.05, 200) for m in ("GD", "QNG", "RNG")
    ])
    degeneracy_tol: float = 1e-9
    out_dir: str | None = None

    def __post_init__(self):
        if not 1 <= self.problem.size <= MAX_QUBITS:
            raise ValueError(f"problem size must lie in [1, {MAX_QUBITS}]")
        if self.problem.count < 1:
            raise ValueError("count must be >= 1")

    def ansatz_spec(self) -> AnsatzSpec:
        return AnsatzSpec(n_qubits=self.problem.size, **self.ansatz)

    def instance_seed(self, i: int) -> int:
        return self.problem.seed + i

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        problem = ProblemConfig(**d.pop("problem", {}))
        methods = [OptimizerConfig(**m) for m in d.pop("methods")] if "methods" in d else None
        cfg = cls(problem=problem, **d)
        if methods is not None:
            cfg.methods = methods
        return cfg


def initial_theta(m: int, seed: int) -> np.ndarray:
    """Shared starting angles for one instance, uniform on [0, 2 pi)."""
    return np.random.default_rng([seed, 1]).uniform(0.0, 2 * np.pi, size=m)


def make_instance(cfg: ProblemConfig, seed: int) -> ProblemInstance:
    return random_instance(cfg.kind, cfg.size, seed, weighted=cfg.weighted, J=cfg.J, h=cfg.h)


@dataclass
class RunRecord:
    instance: int
    seed: int
    method: str
    initial_loss: float
    final_loss: float
    e_opt: float
    relative_error: float
    absolute_fallback: bool
    overlap: float
    iterations: int
    preparations: int


@dataclass
class RunSummary:
    runs: list[RunRecord] = field(default_factory=list)
    traces: dict = field(default_factory=dict, repr=False)  # (instance, method) -> OptimizerTrace

    def methods(self) -> list[str]:
        return list(dict.fromkeys(r.method for r in self.runs))

    def aggregates(self) -> dict:
        out = {}
        for method in self.methods():
            rows = [r for r in self.runs if r.method == method]
            k = len(rows)
            out[method] = {
                "mean_overlap": sum(r.overlap for r in rows) / k,
                "mean_relative_error": sum(r.relative_error for r in rows) / k,
                "mean_final_loss": sum(r.final_loss for r in rows) / k,
                "mean_preparations": sum(r.preparations for r in rows) / k,
                "instances": k,
            }
        return out

    def to_dict(self) -> dict:
        return {"runs": [asdict(r) for r in self.runs], "aggregates": self.aggregates()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def trace_filename(kind: str, size: int, seed: int, method: str) -> str:
    return f"{kind}-n{size}-s{seed}-{method}.csv"


def run_benchmark(config: ExperimentConfig) -> RunSummary:
    """Run every method on every instance from shared starting angles.

    Writes traces, instances and ``summary.json`` when ``config.out_dir`` is set.
    """
    circuit = build_ansatz(config.ansatz_spec())
    summary = RunSummary()
    for i in range(config.problem.count):
        seed = config.instance_seed(i)
        inst = make_instance(config.problem, seed).solve(config.degeneracy_tol)
        theta0 = initial_theta(circuit.n_params, seed)
        for oc in config.methods:
            # random bases are shallower than the ansatz unless configured
            layers = oc.basis_layers or max(1, config.ansatz.get("layers", 1) - 1)
            oc = OptimizerConfig(**{**asdict(oc), "seed": seed, "basis_layers": layers})
            trace = run(oc, circuit, inst.hamiltonian, theta0)
            state = evaluate(circuit, trace.theta)
            rel, fallback = relative_error(trace.final_loss, inst.ground_energy)
            summary.runs.append(RunRecord(
                i, seed, oc.method, trace.records[0].loss, trace.final_loss, inst.ground_energy,
                rel, fallback, instance_overlap(inst, state), oc.iterations, trace.records[-1].preparations,
            ))
            summary.traces[(i, oc.method)] = trace
        if config.out_dir:
            _write_instance(config, inst, seed, summary)
    if config.out_dir:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(summary.to_json())
        doc = {k: v for k, v in config.to_dict().items() if k != "out_dir"}
        (out / "config.json").write_text(json.dumps(doc, indent=2, sort_keys=True))
    return summary


def _write_instance(config: ExperimentConfig, inst: ProblemInstance, seed: int, summary: RunSummary) -> None:
    out = Path(config.out_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    (out / "instances").mkdir(parents=True, exist_ok=True)
    p = config.problem
    (out / "instances" / f"{p.kind}-n{p.size}-s{seed}.json").write_text(inst.to_json())
    for (i, method), trace in summary.traces.items():
        if config.instance_seed(i) == seed:
            (out / "traces" / trace_filename(p.kind, p.size, seed, method)).write_text(trace.to_csv())


def compare_traces(paths) -> dict:
    """Aggregate existing CSV traces by method: mean final loss and preparations."""
    groups: dict[str, list[OptimizerTrace]] = {}
    for path in sorted(Path(p) for p in paths):
        method = path.stem.rsplit("-", 1)[-1]
        groups.setdefault(method, []).append(OptimizerTrace.from_csv(path.read_text(), method))
    out = {}
    for method, traces in groups.items():
        k = len(traces)
        out[method] = {
            "runs": k,
            "mean_final_loss": sum(t.final_loss for t in traces) / k,
            "mean_initial_loss": sum(t.records[0].loss for t in traces) / k,
            "mean_preparations": sum(t.records[-1].preparations for t in traces) / k,
        }
    return out


# ---- Fisher analyses ----

@dataclass
class AnalysisConfig:
    n_qubits: int = 8
    layers: int = 3
    family: str = "RyRz-CNOT"
    connectivity: str = "ring"
    n_bases: int = 200
    measurement_layers: tuple[int, ...] = (1, 2, 3)
    rank_layers: tuple[int, ...] = (1, 2, 3, 4, 5)
    rank_trials: int = 50
    bins: int = 20
    heisenberg_qubits: int = 6
    heisenberg_layers: int = 3
    heisenberg_eta: float = 0.01
    heisenberg_iterations: int = 300
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisConfig":
        d = dict(d)
        for k in ("measurement_layers", "rank_layers"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)


def distance_histogram(circuit, theta, n_bases: int, measurement_layers, seed: int = 0,
                       family: str = "RyRz-CNOT", connectivity: str = "ring", bins: int = 20) -> dict:
    """Distances ||F_C - F_Q/2||_F over random bases, per basis depth.

    Basis ``b`` at depth ``d`` is drawn from the seed triple ``(seed, d, b)``.
    """
    states = fisher.shifted_states(circuit, theta)
    fq = fisher.qfim_parameter_shift(circuit, theta)
    out = {}
    for d in measurement_layers:
        dist = np.empty(n_bases)
        for b in range(n_bases):
            basis = sample_random_measurement(circuit.n_qubits, d, (seed, d, b), family, connectivity)
            fc = fisher.cfim_from_jacobian(*fisher.jacobian_from_states(states, basis))
            dist[b] = fisher.fisher_distance(fc, fq)
        counts, edges = np.histogram(dist, bins=bins)
        out[d] = {"mean": float(dist.mean()), "std": float(dist.std()), "distances": dist.tolist(),
                  "counts": counts.tolist(), "edges": edges.tolist()}
    return out


def rank_trial(circuit, theta, basis_layers: int, basis_seed, family: str = "RyRz-CNOT",
               connectivity: str = "ring", tol: float = 1e-8) -> dict:
    """Ranks of F_Q, the Z-basis CFIM and one random-basis CFIM at ``theta``."""
    states = fisher.shifted_states(circuit, theta)
    fz = fisher.cfim_from_jacobian(*fisher.jacobian_from_states(states, None))
    basis = sample_random_measurement(circuit.n_qubits, basis_layers, basis_seed, family, connectivity)
    fr = fisher.cfim_from_jacobian(*fisher.jacobian_from_states(states, basis))
    fq = fisher.qfim_parameter_shift(circuit, theta)
    return {"m": circuit.n_params, "rank_q": linalg.rank_tol(fq, tol), "rank_z": linalg.rank_tol(fz, tol),
            "rank_random": linalg.rank_tol(fr, tol)}


def rank_table(cfg: AnalysisConfig) -> list[dict]:
    rows = []
    for p in cfg.rank_layers:
        circ = build_ansatz(AnsatzSpec(cfg.family, cfg.n_qubits, p, cfg.connectivity))
        theta = np.random.default_rng([cfg.seed, p]).uniform(0, 2 * np.pi, circ.n_params)
        row = rank_trial(circ, theta, max(1, p - 1), (cfg.seed, p), cfg.family, cfg.connectivity)
        rows.append({"layers": p, **row})
    return rows


def rank_trials(cfg: AnalysisConfig) -> list[dict]:
    """Repeated rank comparison at random angles on the main ansatz."""
    circ = build_ansatz(AnsatzSpec(cfg.family, cfg.n_qubits, cfg.layers, cfg.connectivity))
    rows = []
    for t in range(cfg.rank_trials):
        theta = np.random.default_rng([cfg.seed, 7, t]).uniform(0, 2 * np.pi, circ.n_params)
        rows.append(rank_trial(circ, theta, max(1, cfg.layers - 1), (cfg.seed, 7, t), cfg.family, cfg.connectivity))
    return rows


def z_basis_failure(cfg: AnalysisConfig) -> dict[str, OptimizerTrace]:
    """RNG, QNG and the fixed Z-basis natural gradient on a Heisenberg chain."""
    inst = random_instance("HeisenbergXXX", cfg.heisenberg_qubits, cfg.seed).solve()
    circ = build_ansatz(AnsatzSpec("RyRz-CNOT", cfg.heisenberg_qubits, cfg.heisenberg_layers, "ring"))
    theta0 = initial_theta(circ.n_params, cfg.seed)
    traces = {}
    for method in ("RNG", "QNG", "NGZ", "GD"):
        oc = OptimizerConfig(method, cfg.heisenberg_eta, cfg.heisenberg_iterations,
                             basis_layers=max(1, cfg.heisenberg_layers - 1), seed=cfg.seed)
        traces[method] = run(oc, circ, inst.hamiltonian, theta0)
    traces["e_opt"] = inst.ground_energy
    return traces


def analyze_fisher(cfg: AnalysisConfig, out_dir: str | None = None) -> dict:
    circ = build_ansatz(AnsatzSpec(cfg.family, cfg.n_qubits, cfg.layers, cfg.connectivity))
    theta = np.random.default_rng([cfg.seed, 0]).uniform(0, 2 * np.pi, circ.n_params)
    hist = distance_histogram(circ, theta, cfg.n_bases, cfg.measurement_layers, cfg.seed,
                              cfg.family, cfg.connectivity, cfg.bins)
    failure = z_basis_failure(cfg)
    e_opt = failure.pop("e_opt")
    result = {
        "distance": {str(k): v for k, v in hist.items()},
        "rank_table": rank_table(cfg),
        "rank_trials": rank_trials(cfg),
        "z_failure": {
            "e_opt": e_opt,
            **{m: {"final_loss": t.final_loss, "max_step": float(t.step_norms.max(initial=0.0)),
                   "median_step": float(np.median(t.step_norms)) if t.step_norms.size else math.nan,
                   "preparations": int(t.records[-1].preparations)} for m, t in failure.items()},
        },
    }
    if out_dir:
        out = Path(out_dir)
        (out / "traces").mkdir(parents=True, exist_ok=True)
        (out / "analysis.json").write_text(json.dumps(result, indent=2, sort_keys=True))
        for m, t in failure.items():
            (out / "traces" / trace_filename("HeisenbergXXX", cfg.heisenberg_qubits, cfg.seed, m)).write_text(t.to_csv())
    return result
