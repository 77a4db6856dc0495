"""Parameter-shift gradients, classical and quantum Fisher information, and diagnostics.

Every routine that stands for a hardware measurement takes an optional
:class:`ResourceCounter` and adds the number of distinct state preparations
that measurement would need:

* loss gradient: ``2m``
* probability Jacobian / CFIM: ``2m + 1``
* QFIM via overlaps: four preparations per unordered pair ``i <= j``, so
  ``2m(m + 1)``; a subset of size ``l`` costs ``2l(l + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .circuits import MeasurementBasis, ParameterizedCircuit, Rotation, sample_random_measurement
from .hamiltonians import PauliHamiltonian
from .statevector import PAULI, apply_1q_inplace, batch_probabilities

HALF_PI = np.pi / 2
DEFAULT_PROB_FLOOR = 1e-12


@dataclass
class ResourceCounter:
    state_preparations: int = 0

    def add(self, k: int) -> None:
        if k < 0:
            raise ValueError("preparation counts cannot decrease")
        self.state_preparations += int(k)


def _count(counter: ResourceCounter | None, k: int) -> None:
    if counter is not None:
        counter.add(k)


@dataclass
class FisherMatrix:
    """Symmetric information matrix tagged with how it was obtained.

    ``kind`` is ``"quantum"``, ``"classical"`` (``basis`` describes the
    measurement) or ``"reduced"`` (``subset`` lists the kept parameters).
    """

    matrix: np.ndarray
    kind: str
    basis: dict | None = None
    subset: tuple[int, ...] | None = None

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def to_dict(self) -> dict:
        d = {"m": self.m, "kind": self.kind, "entries": self.matrix.ravel().tolist()}
        if self.subset is not None:
            d["subset"] = list(self.subset)
        if self.basis is not None:
            d["basis"] = self.basis
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FisherMatrix":
        m = d["m"]
        mat = np.asarray(d["entries"], dtype=float).reshape(m, m)
        subset = tuple(d["subset"]) if "subset" in d else None
        return cls(mat, d["kind"], d.get("basis"), subset)


def as_matrix(f) -> np.ndarray:
    return f.matrix if isinstance(f, FisherMatrix) else np.asarray(f, dtype=float)


def _check_theta(circuit: ParameterizedCircuit, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_params,):
        raise ValueError(f"expected {circuit.n_params} parameters, got shape {theta.shape}")
    return theta


def _axis_shifts(theta: np.ndarray, indices: np.ndarray, shift: float) -> np.ndarray:
    """Rows theta + shift*e_i for each i, then theta - shift*e_i."""
    l = len(indices)
    rows = np.repeat(theta[None, :], 2 * l, axis=0)
    rows[np.arange(l), indices] += shift
    rows[l + np.arange(l), indices] -= shift
    return rows


def _subset(m: int, indices) -> np.ndarray:
    if indices is None:
        return np.arange(m)
    idx = np.unique(np.asarray(indices, dtype=int))
    if idx.size == 0 or idx[0] < 0 or idx[-1] >= m:
        raise ValueError(f"subset must be a nonempty subset of range({m})")
    return idx


def gradient_parameter_shift(circuit: ParameterizedCircuit, h: PauliHamiltonian, theta,
                             counter: ResourceCounter | None = None, indices=None) -> np.ndarray:
    """dL/dtheta_j = (L(theta + pi/2 e_j) - L(theta - pi/2 e_j)) / 2.

    With ``indices`` only those components are measured; the rest are zero.
    """
    theta = _check_theta(circuit, theta)
    if h.n_qubits != circuit.n_qubits:
        raise ValueError("Hamiltonian and circuit qubit counts differ")
    idx = _subset(circuit.n_params, indices)
    grad = np.zeros(circuit.n_params)
    if circuit.n_params:
        energies = h.expectation_batch(circuit.evaluate_batch(_axis_shifts(theta, idx, HALF_PI)))
        grad[idx] = 0.5 * (energies[: len(idx)] - energies[len(idx):])
    _count(counter, 2 * len(idx) if circuit.n_params else 0)
    return grad


def shifted_states(circuit: ParameterizedCircuit, theta) -> np.ndarray:
    """Rows: psi(theta), psi(theta + pi/2 e_j) for all j, psi(theta - pi/2 e_j) for all j."""
    theta = _check_theta(circuit, theta)
    rows = np.vstack([theta[None, :], _axis_shifts(theta, np.arange(circuit.n_params), HALF_PI)])
    return circuit.evaluate_batch(rows)


def jacobian_from_states(states: np.ndarray, basis: MeasurementBasis | None) -> tuple[np.ndarray, np.ndarray]:
    """Probability Jacobian (2**n, m) and base distribution from :func:`shifted_states` output."""
    psi = states.copy()
    if basis is not None:
        basis.rotate(psi)
    probs = batch_probabilities(psi)
    m = (len(probs) - 1) // 2
    jac = 0.5 * (probs[1:m + 1] - probs[m + 1:]).T
    return jac, probs[0]


def probability_jacobian(circuit: ParameterizedCircuit, theta, basis: MeasurementBasis | None = None,
                         counter: ResourceCounter | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Shift-rule derivatives of the full outcome distribution under ``basis``.

    Returns ``(jac, p)`` with ``jac[l, j] = dp_l/dtheta_j``.
    """
    if basis is not None and basis.n_qubits != circuit.n_qubits:
        raise ValueError("basis and circuit act on different qubit counts")
    jac, p = jacobian_from_states(shifted_states(circuit, theta), basis)
    _count(counter, 2 * circuit.n_params + 1)
    return jac, p


def cfim_from_jacobian(jac: np.ndarray, p: np.ndarray, prob_floor: float = DEFAULT_PROB_FLOOR) -> np.ndarray:
    if prob_floor <= 0:
        raise ValueError("prob_floor must be positive")
    keep = p >= prob_floor
    w = jac[keep] / np.sqrt(p[keep])[:, None]
    f = w.T @ w
    return 0.5 * (f + f.T)


def _basis_descriptor(basis: MeasurementBasis | None) -> dict:
    return {"name": "Z"} if basis is None or basis.circuit.n_params == 0 else basis.to_dict()


def cfim(circuit: ParameterizedCircuit, theta, basis: MeasurementBasis | None = None,
         counter: ResourceCounter | None = None, prob_floor: float = DEFAULT_PROB_FLOOR) -> FisherMatrix:
    """Classical Fisher information sum_l (1/p_l) dp_l/dtheta_i dp_l/dtheta_j.

    ``basis=None`` measures in the computational (Z) basis. Outcomes with
    ``p_l < prob_floor`` are left out.
    """
    jac, p = probability_jacobian(circuit, theta, basis, counter)
    return FisherMatrix(cfim_from_jacobian(jac, p, prob_floor), "classical", _basis_descriptor(basis))


def qfim_exact(circuit: ParameterizedCircuit, theta) -> FisherMatrix:
    """Simulator-only QFIM from exact derivative states.

    For exp(-i theta sigma/2), d|psi>/dtheta_i = (|psi(theta + pi e_i)> - |psi(theta - pi e_i)>) / 4.
    No preparations are counted.
    """
    theta = _check_theta(circuit, theta)
    m = circuit.n_params
    rows = np.vstack([theta[None, :], _axis_shifts(theta, np.arange(m), np.pi)])
    states = circuit.evaluate_batch(rows)
    psi = states[0]
    d = 0.25 * (states[1:m + 1] - states[m + 1:])
    gram = d.conj() @ d.T
    proj = d.conj() @ psi
    f = 4.0 * (gram - np.outer(proj, proj.conj())).real
    return FisherMatrix(0.5 * (f + f.T), "quantum")


_PAIR_SIGNS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _fidelities_direct(circuit: ParameterizedCircuit, theta: np.ndarray, idx: np.ndarray):
    """Shifted fidelities by preparing every shifted state explicitly.

    Returns ``(pair, diag)``: ``pair[k]`` holds f(theta + s_i pi/2 e_i + s_j pi/2 e_j)
    for sign pattern ``_PAIR_SIGNS[k]`` over the upper-triangle pairs of
    ``idx``; ``diag`` is (2, l) with the +pi and -pi single-parameter shifts.
    """
    l = len(idx)
    iu, ju = np.triu_indices(l, k=1)
    n_off = len(iu)
    rows = np.repeat(theta[None, :], 4 * n_off + 2 * l + 1, axis=0)
    r = np.arange(n_off)
    for k, (si, sj) in enumerate(_PAIR_SIGNS):
        rows[k * n_off + r, idx[iu]] += si * HALF_PI
        rows[k * n_off + r, idx[ju]] += sj * HALF_PI
    base = 4 * n_off
    rows[base + np.arange(l), idx] += np.pi
    rows[base + l + np.arange(l), idx] -= np.pi
    # last row is the unshifted reference state
    states = circuit.evaluate_batch(rows)
    amp = states[:-1] @ states[-1].conj()
    fid = amp.real**2 + amp.imag**2
    return fid[:base].reshape(4, n_off), fid[base:].reshape(2, l)


def _fidelities_sweep(circuit: ParameterizedCircuit, theta: np.ndarray, idx: np.ndarray):
    """Same fidelities as :func:`_fidelities_direct` from one forward pass.

    With f_j the unshifted state right after the gate of parameter j and
    R(s) = exp(-i s sigma/2) = (I - i sign(s) sigma)/sqrt(2) for s = +-pi/2,
    the overlap for parameters i before j in gate order is

        <psi|psi'> = (1 - i a A_ij - i b B_j - a b C_ij) / 2

    where h_ij is sigma_i f_i carried forward to just after gate j,
    A_ij = <f_j|h_ij>, B_j = <f_j|sigma_j|f_j>, C_ij = <f_j|sigma_j|h_ij>.
    A shift of +-pi gives overlap -+i B_i.
    """
    n, m = circuit.n_qubits, circuit.n_params
    l = len(idx)
    slot = np.full(m, -1)
    slot[idx] = np.arange(l)
    psi = np.zeros((1, 2**n), dtype=complex)
    psi[0, 0] = 1.0
    carried = np.zeros((l, 2**n), dtype=complex)
    a_mat = np.zeros((l, l), dtype=complex)
    c_mat = np.zeros((l, l), dtype=complex)
    b_vec = np.zeros(l)
    order = np.zeros(l, dtype=int)
    seen = 0
    for pos, g in enumerate(circuit.gates):
        circuit.apply(psi, theta, pos, pos + 1)
        if seen:
            circuit.apply(carried[:seen], theta, pos, pos + 1)
        if isinstance(g, Rotation) and slot[g.param] >= 0:
            sig = psi.copy()
            apply_1q_inplace(sig, n, g.qubit, PAULI[g.axis])
            k = slot[g.param]
            f_conj, s_conj = psi[0].conj(), sig[0].conj()
            b_vec[k] = float(np.dot(s_conj, psi[0]).real)
            # rows already carried are the parameters earlier in gate order
            prev = order[:seen]
            a_mat[prev, k] = carried[:seen] @ f_conj
            c_mat[prev, k] = carried[:seen] @ s_conj
            carried[seen] = sig[0]
            order[seen] = k
            seen += 1
    iu, ju = np.triu_indices(l, k=1)
    # orient each pair so the first index is earlier in gate order
    rank = np.empty(l, dtype=int)
    rank[order] = np.arange(l)
    first = np.where(rank[iu] < rank[ju], iu, ju)
    second = np.where(rank[iu] < rank[ju], ju, iu)
    swapped = first != iu
    a, c, b = a_mat[first, second], c_mat[first, second], b_vec[second]
    pair = np.empty((4, len(iu)))
    for k, (si, sj) in enumerate(_PAIR_SIGNS):
        s_first = np.where(swapped, sj, si)
        s_second = np.where(swapped, si, sj)
        amp = 0.5 * (1 - 1j * s_first * a - 1j * s_second * b - s_first * s_second * c)
        pair[k] = amp.real**2 + amp.imag**2
    diag = np.vstack([b_vec**2, b_vec**2])
    return pair, diag


QFIM_METHODS = {"sweep": _fidelities_sweep, "direct": _fidelities_direct}


def _overlap_block(circuit: ParameterizedCircuit, theta: np.ndarray, idx: np.ndarray,
                   method: str = "sweep") -> np.ndarray:
    """QFIM block on ``idx`` from shifted fidelities |<psi(theta)|psi(theta')>|^2.

    Off-diagonal: F_ij = -1/2 [f(++) - f(+-) - f(-+) + f(--)] with pi/2 shifts on i and j.
    Diagonal: F_ii = -1/2 [f(theta + pi e_i) - 2 + f(theta - pi e_i)].
    """
    try:
        fidelities = QFIM_METHODS[method]
    except KeyError:
        raise ValueError(f"unknown QFIM method {method!r}") from None
    l = len(idx)
    iu, ju = np.triu_indices(l, k=1)
    (pp, pm, mp, mm), (dp, dm) = fidelities(circuit, theta, idx)
    block = np.zeros((l, l))
    off = -0.5 * (pp - pm - mp + mm)
    block[iu, ju] = off
    block[ju, iu] = off
    block[np.arange(l), np.arange(l)] = -0.5 * (dp - 2.0 + dm)
    return block


def reduced_qfim(circuit: ParameterizedCircuit, theta, subset: Sequence[int],
                 counter: ResourceCounter | None = None, method: str = "sweep") -> FisherMatrix:
    """QFIM entries on ``subset`` x ``subset``, zero elsewhere.

    ``method="direct"`` prepares each shifted state; ``"sweep"`` obtains the
    identical overlaps from a single forward pass. Both count the same
    preparations.
    """
    theta = _check_theta(circuit, theta)
    idx = _subset(circuit.n_params, subset)
    f = np.zeros((circuit.n_params, circuit.n_params))
    f[np.ix_(idx, idx)] = _overlap_block(circuit, theta, idx, method)
    l = len(idx)
    _count(counter, 2 * l * (l + 1))
    return FisherMatrix(f, "reduced", subset=tuple(int(i) for i in idx))


def qfim_parameter_shift(circuit: ParameterizedCircuit, theta,
                         counter: ResourceCounter | None = None, method: str = "sweep") -> FisherMatrix:
    """Full QFIM from four shifted fidelities per entry."""
    f = reduced_qfim(circuit, theta, range(circuit.n_params), counter, method)
    return FisherMatrix(f.matrix, "quantum")


def hessian_finite_difference(circuit: ParameterizedCircuit, h: PauliHamiltonian, theta,
                              step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian of the loss, symmetrized."""
    if step <= 0:
        raise ValueError("step must be positive")
    theta = _check_theta(circuit, theta)
    m = circuit.n_params
    iu, ju = np.triu_indices(m, k=1)
    n_off = len(iu)
    rows = np.repeat(theta[None, :], 4 * n_off + 2 * m + 1, axis=0)
    r = np.arange(n_off)
    for k, (si, sj) in enumerate(((1, 1), (1, -1), (-1, 1), (-1, -1))):
        rows[k * n_off + r, iu] += si * step
        rows[k * n_off + r, ju] += sj * step
    base = 4 * n_off
    rows[base + np.arange(m), np.arange(m)] += step
    rows[base + m + np.arange(m), np.arange(m)] -= step
    e = h.expectation_batch(circuit.evaluate_batch(rows))
    hess = np.zeros((m, m))
    pp, pm, mp, mm = (e[k * n_off:(k + 1) * n_off] for k in range(4))
    off = (pp - pm - mp + mm) / (4 * step**2)
    hess[iu, ju] = off
    hess[ju, iu] = off
    hess[np.arange(m), np.arange(m)] = (e[base:base + m] - 2 * e[-1] + e[base + m:base + 2 * m]) / step**2
    return 0.5 * (hess + hess.T)


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def null_space_containment(fq, fc, tol: float = 1e-8) -> tuple[bool, float]:
    """Check that every near-null eigenvector v of ``fq`` has v^T fc v < tol.

    Returns ``(holds, max_violation)``; with no null directions the check is
    vacuous and the violation is 0.
    """
    q, c = as_matrix(fq), as_matrix(fc)
    _same_shape(q, c)
    dec = linalg.eigh(q)
    kernel = dec.eigenvectors[:, dec.eigenvalues < tol]
    if kernel.shape[1] == 0:
        return True, 0.0
    worst = float(np.max(np.einsum("ik,ij,jk->k", kernel, linalg.symmetrize(c), kernel)))
    return worst < tol, worst


def loewner_leq(a, b, tol: float = 1e-8) -> bool:
    """a <= b in the Loewner order, i.e. b - a is PSD up to ``tol``."""
    x, y = as_matrix(a), as_matrix(b)
    _same_shape(x, y)
    return linalg.is_psd(y - x, tol)


def fisher_distance(fc, fq) -> float:
    """Frobenius norm of fc - fq/2."""
    c, q = as_matrix(fc), as_matrix(fq)
    _same_shape(c, q)
    return float(np.linalg.norm(c - 0.5 * q, "fro"))


@dataclass
class TraceSearchResult:
    basis: MeasurementBasis
    trace: float
    history: list[float] = field(default_factory=list)

    def __iter__(self):
        yield self.basis
        yield self.trace


def trace_objective_search(circuit: ParameterizedCircuit, theta, layers: int = 1, trials: int = 10,
                           seed: int = 0, family: str = "RyRz-CNOT", connectivity: str = "ring",
                           prob_floor: float = DEFAULT_PROB_FLOOR) -> TraceSearchResult:
    """Random search for the basis maximizing tr(CFIM).

    Trial ``t`` draws its basis from the seed pair ``(seed, t)``; ``history``
    is the running maximum after each trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    states = shifted_states(circuit, theta)
    best, best_tr, history = None, -np.inf, []
    for t in range(trials):
        basis = sample_random_measurement(circuit.n_qubits, layers, (seed, t), family, connectivity)
        tr = float(np.trace(cfim_from_jacobian(*jacobian_from_states(states, basis), prob_floor)))
        if tr > best_tr:
            best, best_tr = basis, tr
        history.append(best_tr)
    return TraceSearchResult(best, best_tr, history)


def descent_condition(f, hessian, eta: float, cutoff: float = linalg.DEFAULT_CUTOFF,
                      atol: float = 1e-9) -> bool:
    """Second-order descent test  eta F+ H F+ <= 2 F+  on the range of F+."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    fm = as_matrix(f)
    hm = linalg.symmetrize(hessian)
    _same_shape(fm, hm)
    dec = linalg.eigh(fm)
    keep = dec.eigenvalues > cutoff
    q = dec.eigenvectors[:, keep]
    if q.shape[1] == 0:
        return True
    p_plus = (q / dec.eigenvalues[keep]) @ q.T
    gap = 2 * p_plus - eta * p_plus @ hm @ p_plus
    return linalg.min_eigenvalue(q.T @ gap @ q) >= -atol

