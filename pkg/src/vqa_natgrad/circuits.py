"""Parameterized circuits, hardware-efficient ansatz builders and measurement bases."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import statevector as sv
from .statevector import Statevector

# eigenvalue magnitude of sigma/2; all rotations are exp(-i theta sigma / 2)
GENERATOR_EIGENVALUE = 0.5

# bound on amplitudes held at once during batched evaluation
_BATCH_AMPLITUDES = 1 << 22


@dataclass(frozen=True)
class Rotation:
    axis: str
    qubit: int
    param: int

    @property
    def generator_eigenvalue(self) -> float:
        return GENERATOR_EIGENVALUE


@dataclass(frozen=True)
class Fixed:
    kind: str  # "CNOT" (control, target), "CZ", or "H"
    qubits: tuple[int, ...]


Gate = Union[Rotation, Fixed]


@dataclass(frozen=True)
class ParameterizedCircuit:
    n_qubits: int
    gates: tuple[Gate, ...]
    n_params: int
    # gate position of each parameter, for prefix/suffix reasoning
    param_gate: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        owner = [-1] * self.n_params
        for pos, g in enumerate(self.gates):
            qs = (g.qubit,) if isinstance(g, Rotation) else g.qubits
            for q in qs:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate {g} addresses qubit outside [0, {self.n_qubits})")
            if isinstance(g, Rotation):
                if g.axis not in "XYZ" or len(g.axis) != 1:
                    raise ValueError(f"bad rotation axis {g.axis!r}")
                if not 0 <= g.param < self.n_params:
                    raise ValueError(f"parameter index {g.param} out of range")
                if owner[g.param] != -1:
                    raise ValueError(f"parameter {g.param} is shared between gates")
                owner[g.param] = pos
            elif g.kind in ("CNOT", "CZ"):
                if len(g.qubits) != 2 or g.qubits[0] == g.qubits[1]:
                    raise ValueError(f"{g.kind} needs two distinct qubits")
            elif g.kind == "H":
                if len(g.qubits) != 1:
                    raise ValueError("H acts on one qubit")
            else:
                raise ValueError(f"unknown fixed gate {g.kind!r}")
        if -1 in owner:
            raise ValueError(f"parameter {owner.index(-1)} is not used by any gate")
        object.__setattr__(self, "param_gate", tuple(owner))

    @property
    def m(self) -> int:
        return self.n_params

    def rotation(self, param: int) -> Rotation:
        return self.gates[self.param_gate[param]]

    def apply(self, psi: np.ndarray, thetas: np.ndarray, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Apply gates[start:stop] in place to a (batch, 2**n) array.

        ``thetas`` is (m,) shared by all rows or (batch, m) per row.
        """
        n = self.n_qubits
        per_row = thetas.ndim == 2
        for g in self.gates[start:stop]:
            if isinstance(g, Rotation):
                ang = thetas[:, g.param] if per_row else thetas[g.param]
                sv.rotation_inplace(psi, n, g.qubit, g.axis, ang)
            elif g.kind == "CNOT":
                sv.cnot_inplace(psi, n, *g.qubits)
            elif g.kind == "CZ":
                sv.cz_inplace(psi, n, *g.qubits)
            else:
                sv.apply_1q_inplace(psi, n, g.qubits[0], sv.HADAMARD)
        return psi

    def evaluate_batch(self, thetas: np.ndarray) -> np.ndarray:
        """States U(theta_b)|0> for every row of a (batch, m) parameter array."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if thetas.shape[1] != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {thetas.shape[1]}")
        out = np.empty((thetas.shape[0], 2**self.n_qubits), dtype=complex)
        chunk = max(1, _BATCH_AMPLITUDES // 2**self.n_qubits)
        for lo in range(0, thetas.shape[0], chunk):
            block = thetas[lo:lo + chunk]
            psi = sv.zero_batch(self.n_qubits, block.shape[0])
            out[lo:lo + chunk] = self.apply(psi, block)
        return out

    def to_dict(self) -> dict:
        gates = []
        for g in self.gates:
            if isinstance(g, Rotation):
                gates.append({"kind": "R" + g.axis.lower(), "qubits": [g.qubit], "param": g.param})
            else:
                gates.append({"kind": g.kind, "qubits": list(g.qubits)})
        return {"n_qubits": self.n_qubits, "n_params": self.n_params, "gates": gates}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ParameterizedCircuit":
        gates = []
        for g in d["gates"]:
            if g["kind"] in ("Rx", "Ry", "Rz"):
                gates.append(Rotation(g["kind"][1].upper(), g["qubits"][0], g["param"]))
            else:
                gates.append(Fixed(g["kind"], tuple(g["qubits"])))
        return cls(d["n_qubits"], tuple(gates), d["n_params"])

    @classmethod
    def from_json(cls, text: str) -> "ParameterizedCircuit":
        return cls.from_dict(json.loads(text))


def evaluate(circuit: ParameterizedCircuit, theta) -> Statevector:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_params,):
        raise ValueError(f"expected {circuit.n_params} parameters, got shape {theta.shape}")
    return Statevector(circuit.n_qubits, circuit.evaluate_batch(theta[None, :])[0])


FAMILIES = ("RyRz-CNOT", "Ry-CZ")
CONNECTIVITIES = ("ring", "all-to-all")


@dataclass(frozen=True)
class AnsatzSpec:
    family: str
    n_qubits: int
    layers: int
    connectivity: str = "ring"
    # second rotation of the RyRz-CNOT layer; "X" gives the Ry-Rx variant
    second_axis: str = "Z"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown ansatz family {self.family!r}")
        if self.connectivity not in CONNECTIVITIES:
            raise ValueError(f"unknown connectivity {self.connectivity!r}")
        if self.n_qubits < 1 or self.layers < 1:
            raise ValueError("need n_qubits >= 1 and layers >= 1")

    @property
    def param_count(self) -> int:
        if self.family == "RyRz-CNOT":
            return 2 * self.n_qubits * self.layers
        return (self.layers + 1) * self.n_qubits


def entangler_pairs(n: int, connectivity: str) -> list[tuple[int, int]]:
    if n < 2:
        return []
    if connectivity == "ring":
        pairs = [(q, q + 1) for q in range(n - 1)]
        if n > 2:
            pairs.append((n - 1, 0))
        return pairs
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _layered_circuit(family: str, n: int, layers: int, connectivity: str, axes) -> ParameterizedCircuit:
    """Shared builder; ``axes`` yields the rotation axis for each new parameter."""
    gates: list[Gate] = []
    p = 0
    pairs = entangler_pairs(n, connectivity)
    if family == "RyRz-CNOT":
        for _ in range(layers):
            for q in range(n):
                for _slot in range(2):
                    gates.append(Rotation(next(axes), q, p))
                    p += 1
            gates.extend(Fixed("CNOT", pair) for pair in pairs)
    else:
        for q in range(n):
            gates.append(Rotation(next(axes), q, p))
            p += 1
        for _ in range(layers):
            gates.extend(Fixed("CZ", pair) for pair in pairs)
            for q in range(n):
                gates.append(Rotation(next(axes), q, p))
                p += 1
    return ParameterizedCircuit(n, tuple(gates), p)


def build_ansatz(spec: AnsatzSpec) -> ParameterizedCircuit:
    """Hardware-efficient ansatz.

    RyRz-CNOT: per layer, Ry then Rz on every qubit followed by a CNOT ladder.
    Ry-CZ: an initial Ry column, then per layer a CZ ladder and another Ry column.
    """
    if spec.family == "RyRz-CNOT":
        def axes():
            while True:
                yield "Y"
                yield spec.second_axis
    else:
        def axes():
            while True:
                yield "Y"
    circ = _layered_circuit(spec.family, spec.n_qubits, spec.layers, spec.connectivity, axes())
    assert circ.n_params == spec.param_count
    return circ


@dataclass(frozen=True)
class MeasurementBasis:
    circuit: ParameterizedCircuit
    angles: np.ndarray

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float)
        if angles.shape != (self.circuit.n_params,):
            raise ValueError("angle count does not match the basis circuit")
        object.__setattr__(self, "angles", angles)

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    def rotate(self, psi: np.ndarray) -> np.ndarray:
        """Apply V(phi) in place to every row of ``psi``."""
        return self.circuit.apply(psi, self.angles)

    def to_dict(self) -> dict:
        return {"circuit": self.circuit.to_dict(), "angles": self.angles.tolist()}


def identity_basis(n: int) -> MeasurementBasis:
    """Computational-basis measurement (V = identity)."""
    return MeasurementBasis(ParameterizedCircuit(n, (), 0), np.zeros(0))


def sample_random_measurement(n: int, layers: int, seed=None, family: str = "RyRz-CNOT",
                              connectivity: str = "ring") -> MeasurementBasis:
    """Random hardware-efficient basis change.

    Every rotation axis is drawn uniformly from {X, Y, Z} and every angle
    uniformly from [0, 2 pi).
    """
    if layers < 1:
        raise ValueError("random measurement needs at least one layer")
    rng = np.random.default_rng(seed)
    spec = AnsatzSpec(family, n, layers, connectivity)
    drawn = rng.choice(np.array(list("XYZ")), size=spec.param_count)
    circ = _layered_circuit(family, n, layers, connectivity, iter(drawn.tolist()))
    angles = rng.uniform(0.0, 2 * np.pi, size=circ.n_params)
    return MeasurementBasis(circ, angles)


def probabilities_under_measurement(circuit: ParameterizedCircuit, theta, basis: MeasurementBasis) -> np.ndarray:
    """Outcome distribution of V(phi) U(theta)|0> in the computational basis."""
    if basis.n_qubits != circuit.n_qubits:
        raise ValueError("basis and circuit act on different qubit counts")
    psi = evaluate(circuit, theta).amplitudes[None, :].copy()
    basis.rotate(psi)
    return sv.batch_probabilities(psi)[0]
