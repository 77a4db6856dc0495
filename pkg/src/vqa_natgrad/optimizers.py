"""Gradient descent and the natural-gradient family.

* ``GD``    plain gradient descent
* ``QNG``   pseudoinverse of the full QFIM
* ``RNG``   pseudoinverse of a CFIM measured in a freshly drawn random basis
* ``SCQNG`` pseudoinverse of the QFIM restricted to a random parameter subset
* ``NGZ``   pseudoinverse of the CFIM in the fixed computational basis

Per-iteration preparation counts: GD ``2m``, RNG and NGZ ``4m + 1``,
QNG ``2m + 2m(m+1)``, SCQNG ``2l + 2l(l+1)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import fisher, linalg
from .circuits import ParameterizedCircuit, evaluate, sample_random_measurement
from .hamiltonians import PauliHamiltonian, loss

METHODS = ("GD", "QNG", "RNG", "SCQNG", "NGZ")


@dataclass
class OptimizerConfig:
    method: str
    eta: float
    iterations: int
    pinv_cutoff: float = linalg.DEFAULT_CUTOFF
    basis_layers: int | None = None  # None: one layer, or ansatz depth - 1 in campaigns
    basis_family: str = "RyRz-CNOT"
    basis_connectivity: str = "ring"
    subset_size: int | None = None  # None means ceil(m/2)
    full_gradient: bool = False  # SCQNG: measure all gradient components
    normalize_step: bool = False
    qfim_method: str = "sweep"
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; pick one of {METHODS}")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


@dataclass
class IterationRecord:
    iteration: int
    loss: float
    grad_norm: float
    step_norm: float
    preparations: int
    diagnostics: str = ""


@dataclass
class OptimizerTrace:
    method: str
    records: list[IterationRecord] = field(default_factory=list)
    theta: np.ndarray | None = None

    @property
    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.records])

    @property
    def preparations(self) -> np.ndarray:
        return np.array([r.preparations for r in self.records])

    @property
    def step_norms(self) -> np.ndarray:
        return np.array([r.step_norm for r in self.records[1:]])

    @property
    def final_loss(self) -> float:
        return self.records[-1].loss

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(IterationRecord.__dataclass_fields__)
        w = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
        w.writeheader()
        for r in self.records:
            row = asdict(r)
            for k in ("loss", "grad_norm", "step_norm"):
                row[k] = repr(float(row[k]))
            w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, method: str = "") -> "OptimizerTrace":
        rows = csv.DictReader(io.StringIO(text))
        recs = [
            IterationRecord(int(r["iteration"]), float(r["loss"]), float(r["grad_norm"]),
                            float(r["step_norm"]), int(r["preparations"]), r["diagnostics"])
            for r in rows
        ]
        return cls(method, recs)


def compute_step(method: str, gradient, info_matrix=None, eta: float = 0.1,
                 cutoff: float = linalg.DEFAULT_CUTOFF, normalize: bool = False) -> np.ndarray:
    """Update vector for one iteration.

    GD: ``-eta * g``. Natural-gradient methods: ``-eta * F^+ g`` with the
    cutoff pseudoinverse. ``normalize`` divides by ``||F^{+1/2} g||`` (by
    ``||g||`` for GD), giving the unit-length steepest-descent direction in
    the metric of ``F``.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    g = np.asarray(gradient, dtype=float)
    if method == "GD":
        step = -eta * g
        if normalize:
            norm = np.linalg.norm(g)
            step = step / norm if norm > 0 else step
        return step
    if info_matrix is None:
        raise ValueError(f"{method} needs an information matrix")
    f = fisher.as_matrix(info_matrix)
    if f.shape != (g.size, g.size):
        raise ValueError(f"information matrix shape {f.shape} does not match gradient length {g.size}")
    dec = linalg.eigh(f)
    keep = dec.eigenvalues > cutoff
    q = dec.eigenvectors[:, keep]
    lam = dec.eigenvalues[keep]
    coords = q.T @ g
    step = -eta * (q @ (coords / lam))
    if normalize:
        norm = math.sqrt(float(np.sum(coords**2 / lam)))
        if norm > 0:
            step = step / norm
    return step


def sample_subsets(m: int, l: int, count: int, seed=None) -> np.ndarray:
    """``count`` independent uniform size-``l`` subsets of range(m), one sorted row each."""
    if not 1 <= l <= m:
        raise ValueError(f"subset size must lie in [1, {m}], got {l}")
    rng = np.random.default_rng(seed)
    # the first l entries of a uniform random permutation
    keys = rng.random((count, m))
    return np.sort(np.argsort(keys, axis=1)[:, :l], axis=1)


def sample_subset(m: int, l: int, seed=None) -> np.ndarray:
    """Uniformly random size-``l`` subset of range(m), sorted."""
    return sample_subsets(m, l, 1, seed)[0]


def subset_coverage_fraction(m: int, l: int, k: int) -> Fraction:
    """Exact probability that a uniform (l+k)-subset of [m] contains a fixed l-subset."""
    if l < 0 or k < 0 or l + k > m:
        raise ValueError("need 0 <= l, 0 <= k and l + k <= m")
    return Fraction(math.comb(l + k, l), math.comb(m, l))


def subset_coverage_probability(m: int, l: int, k: int) -> float:
    """(l+k)!/(k! l!) * l!(m-l)!/m!, evaluated through log-factorials."""
    if l < 0 or k < 0 or l + k > m:
        raise ValueError("need 0 <= l, 0 <= k and l + k <= m")
    lf = math.lgamma
    return math.exp(lf(l + k + 1) - lf(k + 1) - lf(m + 1) + lf(m - l + 1))


def run(config: OptimizerConfig, circuit: ParameterizedCircuit, h: PauliHamiltonian, theta0) -> OptimizerTrace:
    """Iterate ``config.iterations`` updates from ``theta0``.

    Random draws for iteration ``k`` use the seed pair ``(config.seed, k)``,
    so runs are reproducible and iterations independent.
    """
    theta = np.array(theta0, dtype=float)
    m = circuit.n_params
    if theta.shape != (m,):
        raise ValueError(f"theta0 must have length {m}")
    if h.n_qubits != circuit.n_qubits:
        raise ValueError("Hamiltonian and circuit qubit counts differ")
    l = config.subset_size if config.subset_size is not None else math.ceil(m / 2)
    if config.method == "SCQNG" and not 1 <= l <= m:
        raise ValueError(f"subset size must lie in [1, {m}]")

    counter = fisher.ResourceCounter()
    trace = OptimizerTrace(config.method)
    trace.records.append(IterationRecord(0, loss(h, evaluate(circuit, theta)), math.nan, math.nan, 0))
    for k in range(1, config.iterations + 1):
        diag = ""
        info = None
        method = config.method
        if method == "SCQNG":
            subset = sample_subset(m, l, (config.seed, k))
            diag = " ".join(map(str, subset.tolist()))
            grad_idx = None if config.full_gradient else subset
            grad = fisher.gradient_parameter_shift(circuit, h, theta, counter, grad_idx)
            info = fisher.reduced_qfim(circuit, theta, subset, counter, config.qfim_method)
        else:
            grad = fisher.gradient_parameter_shift(circuit, h, theta, counter)
            if method == "QNG":
                info = fisher.qfim_parameter_shift(circuit, theta, counter, config.qfim_method)
            elif method == "RNG":
                basis = sample_random_measurement(circuit.n_qubits, config.basis_layers or 1, (config.seed, k),
                                                  config.basis_family, config.basis_connectivity)
                diag = f"basis_seed={config.seed}:{k}"
                info = fisher.cfim(circuit, theta, basis, counter)
            elif method == "NGZ":
                info = fisher.cfim(circuit, theta, None, counter)
        step = compute_step(method, grad, info, config.eta, config.pinv_cutoff, config.normalize_step)
        theta = theta + step
        trace.records.append(IterationRecord(
            k, loss(h, evaluate(circuit, theta)), float(np.linalg.norm(grad)),
            float(np.linalg.norm(step)), counter.state_preparations, diag,
        ))
    trace.theta = theta
    return trace


def preparations_per_iteration(method: str, m: int, l: int | None = None, full_gradient: bool = False) -> int:
    if method == "GD":
        return 2 * m
    if method in ("RNG", "NGZ"):
        return 4 * m + 1
    if method == "QNG":
        return 2 * m + 2 * m * (m + 1)
    if method == "SCQNG":
        l = math.ceil(m / 2) if l is None else l
        return (2 * m if full_gradient else 2 * l) + 2 * l * (l + 1)
    raise ValueError(f"unknown method {method!r}")
