"""Pauli-string Hamiltonians, the energy loss, and the benchmark problems.

Pauli strings are written qubit 0 first: ``"XZI"`` puts X on qubit 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .statevector import Statevector

MAX_DIAG_QUBITS = 14
_DENSE_LIMIT = 10


@dataclass(frozen=True)
class PauliString:
    coefficient: float
    ops: str

    def __post_init__(self):
        if not math.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")
        if not self.ops or set(self.ops) - set("IXYZ"):
            raise ValueError(f"invalid Pauli string {self.ops!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.ops)

    @property
    def x_mask(self) -> int:
        return sum(1 << q for q, o in enumerate(self.ops) if o in "XY")

    @property
    def z_mask(self) -> int:
        return sum(1 << q for q, o in enumerate(self.ops) if o in "ZY")

    @property
    def n_y(self) -> int:
        return self.ops.count("Y")

    def phase_vector(self) -> np.ndarray:
        """Complex phase f(b) with P|b> = f(b)|b ^ x_mask>, coefficient included.

        Uses Y = i X Z qubitwise.
        """
        idx = np.arange(2**self.n_qubits)
        sign = 1 - 2 * (np.bitwise_count(idx & self.z_mask) & 1).astype(np.int64)
        return self.coefficient * (1j**self.n_y) * sign

    def expectation_batch(self, psi: np.ndarray) -> np.ndarray:
        return _grouped_expectation(psi, {self.x_mask: self.phase_vector()})


def _grouped_expectation(psi: np.ndarray, groups: dict[int, np.ndarray]) -> np.ndarray:
    idx = np.arange(psi.shape[1])
    total = np.zeros(psi.shape[0], dtype=complex)
    for x_mask, phase in groups.items():
        if x_mask == 0:
            total += (psi.real**2 + psi.imag**2) @ phase
        else:
            total += np.einsum("bi,bi->b", psi[:, idx ^ x_mask].conj(), phase * psi)
    if np.max(np.abs(total.imag), initial=0.0) > 1e-10:
        raise ArithmeticError("Pauli expectation has a non-negligible imaginary part")
    return total.real


@dataclass
class PauliHamiltonian:
    n_qubits: int
    terms: list[PauliString]
    offset: float = 0.0
    _groups: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("Hamiltonian needs at least one term")
        for t in self.terms:
            if t.n_qubits != self.n_qubits:
                raise ValueError(f"term {t.ops!r} does not act on {self.n_qubits} qubits")

    @classmethod
    def from_list(cls, pairs: Sequence[tuple[float, str]], offset: float = 0.0) -> "PauliHamiltonian":
        terms = [PauliString(float(c), s) for c, s in pairs]
        return cls(terms[0].n_qubits, terms, float(offset))

    @property
    def groups(self) -> dict[int, np.ndarray]:
        # terms sharing an X-mask collapse to one phase vector
        if self._groups is None:
            groups: dict[int, np.ndarray] = {}
            for t in self.terms:
                groups[t.x_mask] = groups.get(t.x_mask, 0) + t.phase_vector()
            self._groups = groups
        return self._groups

    @property
    def is_diagonal(self) -> bool:
        return all(t.x_mask == 0 for t in self.terms)

    def diagonal(self) -> np.ndarray:
        """Energies of all basis states (diagonal Hamiltonians only)."""
        if not self.is_diagonal:
            raise ValueError("Hamiltonian is not diagonal")
        return self.groups[0].real + self.offset

    def expectation_batch(self, psi: np.ndarray) -> np.ndarray:
        return _grouped_expectation(psi, self.groups) + self.offset

    def to_sparse(self) -> sp.csr_matrix:
        dim = 2**self.n_qubits
        idx = np.arange(dim)
        mat = sp.csr_matrix((dim, dim), dtype=complex)
        for x_mask, phase in self.groups.items():
            # column b maps to row b ^ x_mask
            mat = mat + sp.csr_matrix((phase, (idx ^ x_mask, idx)), shape=(dim, dim))
        if self.offset:
            mat = mat + self.offset * sp.identity(dim, dtype=complex, format="csr")
        return mat.tocsr()

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "offset": self.offset,
            "terms": [[t.coefficient, t.ops] for t in self.terms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PauliHamiltonian":
        return cls.from_list([tuple(t) for t in d["terms"]], d.get("offset", 0.0))


def loss(h: PauliHamiltonian, state: Statevector) -> float:
    """Energy expectation <psi|H|psi>."""
    if h.n_qubits != state.n_qubits:
        raise ValueError("Hamiltonian and state qubit counts differ")
    return float(h.expectation_batch(state.amplitudes[None, :])[0])


@dataclass
class GroundState:
    energy: float
    indices: frozenset[int]
    vector: np.ndarray | None = None

    def __iter__(self):
        # allows ``e_min, ground = exact_ground(h)``
        yield self.energy
        yield self.indices


def exact_ground(h: PauliHamiltonian, degeneracy_tol: float = 1e-9) -> GroundState:
    """Exact minimum energy.

    Diagonal Hamiltonians return the full degenerate set of ground basis
    indices; otherwise ``indices`` is empty and ``vector`` holds a ground
    eigenvector.
    """
    if h.n_qubits > MAX_DIAG_QUBITS:
        raise ValueError(f"exact diagonalization capped at {MAX_DIAG_QUBITS} qubits")
    if h.is_diagonal:
        diag = h.diagonal()
        e_min = float(diag.min())
        ground = np.flatnonzero(diag <= e_min + degeneracy_tol)
        return GroundState(e_min, frozenset(int(i) for i in ground))
    if h.n_qubits <= _DENSE_LIMIT:
        w, v = np.linalg.eigh(h.to_dense())
        return GroundState(float(w[0]), frozenset(), v[:, 0])
    w, v = spla.eigsh(h.to_sparse(), k=1, which="SA", tol=1e-12)
    return GroundState(float(w[0]), frozenset(), v[:, 0])


def _zz(n: int, i: int, j: int) -> str:
    ops = ["I"] * n
    ops[i] = ops[j] = "Z"
    return "".join(ops)


def _two_site(n: int, i: int, j: int, p: str) -> str:
    ops = ["I"] * n
    ops[i] = ops[j] = p
    return "".join(ops)


def _single(n: int, i: int, p: str) -> str:
    ops = ["I"] * n
    ops[i] = p
    return "".join(ops)


def maxcut_hamiltonian(n: int, edges: Sequence[tuple[int, int, float]]) -> PauliHamiltonian:
    """-sum_{(i,j)} w_ij/2 (1 - Z_i Z_j); energy of a bitstring is minus its cut weight."""
    terms = [PauliString(w / 2.0, _zz(n, i, j)) for i, j, w in edges]
    offset = -sum(w for _, _, w in edges) / 2.0
    return PauliHamiltonian(n, terms, offset)


def number_partitioning_hamiltonian(numbers: Sequence[int]) -> PauliHamiltonian:
    """sum_{i != j} n_i n_j Z_i Z_j + sum_i n_i^2, ordered pairs (each unordered pair twice)."""
    n = len(numbers)
    terms = [
        PauliString(2.0 * numbers[i] * numbers[j], _zz(n, i, j))
        for i in range(n)
        for j in range(i + 1, n)
    ]
    return PauliHamiltonian(n, terms, float(sum(x * x for x in numbers)))


def heisenberg_hamiltonian(n: int, J: float = 1.0, h: float = 1.0) -> PauliHamiltonian:
    """Open-chain XXX model with a transverse X field."""
    terms = []
    for i in range(n - 1):
        for p in "XYZ":
            terms.append(PauliString(J, _two_site(n, i, i + 1, p)))
    terms.extend(PauliString(h, _single(n, i, "X")) for i in range(n))
    return PauliHamiltonian(n, terms)


KINDS = ("MaxCut", "NumberPartitioning", "HeisenbergXXX")


@dataclass
class ProblemInstance:
    kind: str
    payload: dict
    hamiltonian: PauliHamiltonian
    seed: int | None = None
    ground_energy: float | None = None
    ground_indices: frozenset[int] | None = None
    ground_vector: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits

    def solve(self, degeneracy_tol: float = 1e-9) -> "ProblemInstance":
        g = exact_ground(self.hamiltonian, degeneracy_tol)
        self.ground_energy = g.energy
        self.ground_indices = g.indices
        self.ground_vector = g.vector
        return self

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "payload": self.payload}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemInstance":
        inst = build_problem(d["kind"], d["payload"])
        inst.seed = d.get("seed")
        return inst


def build_problem(kind: str, payload: dict) -> ProblemInstance:
    """Build a problem from its payload.

    MaxCut: ``{"n": int, "edges": [[i, j, w], ...]}``;
    NumberPartitioning: ``{"numbers": [...]}``;
    HeisenbergXXX: ``{"n": int, "J": float, "h": float}``.
    """
    if kind == "MaxCut":
        n = int(payload["n"])
        edges = [(int(i), int(j), float(w)) for i, j, w in payload["edges"]]
        if n < 2:
            raise ValueError("MaxCut needs at least 2 vertices")
        seen = set()
        for i, j, w in edges:
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"invalid edge ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            if w == 0:
                raise ValueError("edge weights must be nonzero")
            seen.add(key)
        h = maxcut_hamiltonian(n, edges)
        payload = {"n": n, "edges": [[i, j, w] for i, j, w in edges]}
    elif kind == "NumberPartitioning":
        numbers = [int(x) for x in payload["numbers"]]
        if len(numbers) < 2 or min(numbers) < 0:
            raise ValueError("need at least 2 nonnegative integers")
        h = number_partitioning_hamiltonian(numbers)
        payload = {"numbers": numbers}
    elif kind == "HeisenbergXXX":
        n = int(payload["n"])
        if n < 2:
            raise ValueError("Heisenberg chain needs at least 2 sites")
        J = float(payload.get("J", 1.0))
        hx = float(payload.get("h", 1.0))
        h = heisenberg_hamiltonian(n, J, hx)
        payload = {"n": n, "J": J, "h": hx}
    else:
        raise ValueError(f"unknown problem kind {kind!r}")
    return ProblemInstance(kind, payload, h)


def random_regular_graph(n: int, d: int, rng: np.random.Generator, max_tries: int = 10_000):
    """Uniform simple d-regular graph by the pairing model with rejection."""
    if (n * d) % 2 or not 0 <= d < n:
        raise ValueError(f"no simple {d}-regular graph on {n} vertices")
    stubs = np.repeat(np.arange(n), d)
    for _ in range(max_tries):
        perm = rng.permutation(stubs).reshape(-1, 2)
        a, b = perm.min(axis=1), perm.max(axis=1)
        if np.any(a == b):
            continue
        pairs = set(zip(a.tolist(), b.tolist()))
        if len(pairs) == len(a):
            return sorted(pairs)
    raise RuntimeError("pairing model failed to produce a simple graph")


def random_instance(kind: str, size: int, seed: int, weighted: bool = True,
                    J: float = 1.0, h: float = 1.0, max_int: int = 25) -> ProblemInstance:
    rng = np.random.default_rng(seed)
    if kind == "MaxCut":
        if size % 2:
            raise ValueError("3-regular graphs need an even vertex count")
        edges = random_regular_graph(size, 3, rng)
        # uniform on (0, 1]
        weights = 1.0 - rng.random(len(edges)) if weighted else np.ones(len(edges))
        payload = {"n": size, "edges": [[i, j, float(w)] for (i, j), w in zip(edges, weights)]}
    elif kind == "NumberPartitioning":
        if size < 2:
            raise ValueError("need at least 2 integers")
        payload = {"numbers": rng.integers(1, max_int + 1, size=size).tolist()}
    elif kind == "HeisenbergXXX":
        payload = {"n": size, "J": J, "h": h}
    else:
        raise ValueError(f"unknown problem kind {kind!r}")
    inst = build_problem(kind, payload)
    inst.seed = seed
    return inst
