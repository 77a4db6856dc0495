"""Dense pure-state simulator.

Basis convention: qubit ``q`` is bit ``q`` of the basis index (little endian),
so ``|01>`` written as (qubit1, qubit0) is index 1.

Gate kernels operate on 2D batches of shape ``(batch, 2**n)`` in place, by
viewing the amplitude axis as ``(2**(n-q-1), 2, 2**q)`` and mixing the
amplitude pairs that differ only in bit ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 20


class SimulatorSizeError(ValueError):
    """Raised when a requested register exceeds the simulator cap."""


@dataclass
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes, got shape {self.amplitudes.shape}"
            )
        norm = np.vdot(self.amplitudes, self.amplitudes).real
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())


def _check_qubits(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise SimulatorSizeError(f"n_qubits must lie in [1, {MAX_QUBITS}], got {n}")


def new_zero_state(n: int) -> Statevector:
    _check_qubits(n)
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0
    return Statevector(n, amps)


def zero_batch(n: int, batch: int) -> np.ndarray:
    """``batch`` copies of |0...0> as a (batch, 2**n) array."""
    _check_qubits(n)
    out = np.zeros((batch, 2**n), dtype=complex)
    out[:, 0] = 1.0
    return out


def _pair_view(psi: np.ndarray, n: int, q: int) -> np.ndarray:
    return psi.reshape(psi.shape[0], 2 ** (n - q - 1), 2, 2**q)


def apply_1q_inplace(psi: np.ndarray, n: int, q: int, u: np.ndarray) -> None:
    """Apply one 2x2 matrix ``u`` to qubit ``q`` of every row of ``psi``.

    ``u`` may also have shape (batch, 2, 2) for per-row matrices.
    """
    v = _pair_view(psi, n, q)
    a0 = v[:, :, 0, :].copy()
    a1 = v[:, :, 1, :]
    if u.ndim == 2:
        v[:, :, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
        v[:, :, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
    else:
        u = u[:, None, None]
        v[:, :, 0, :] = u[..., 0, 0] * a0 + u[..., 0, 1] * a1
        v[:, :, 1, :] = u[..., 1, 0] * a0 + u[..., 1, 1] * a1


def rotation_inplace(psi: np.ndarray, n: int, q: int, axis: str, angles) -> None:
    """Apply exp(-i angle sigma_axis / 2) on qubit ``q``; ``angles`` is scalar or per-row."""
    angles = np.asarray(angles, dtype=float)
    half = angles / 2.0
    c = np.cos(half)
    s = np.sin(half)
    if angles.ndim:
        c = c[:, None, None]
        s = s[:, None, None]
    v = _pair_view(psi, n, q)
    a0 = v[:, :, 0, :].copy()
    a1 = v[:, :, 1, :]
    if axis == "Y":
        v[:, :, 0, :] = c * a0 - s * a1
        v[:, :, 1, :] = s * a0 + c * a1
    elif axis == "X":
        v[:, :, 0, :] = c * a0 - 1j * s * a1
        v[:, :, 1, :] = -1j * s * a0 + c * a1
    elif axis == "Z":
        v[:, :, 0, :] = (c - 1j * s) * a0
        v[:, :, 1, :] = (c + 1j * s) * a1
    else:
        raise ValueError(f"unknown rotation axis {axis!r}")


def _tensor_view(psi: np.ndarray, n: int) -> np.ndarray:
    # axis 1 + (n - 1 - q) holds qubit q
    return psi.reshape((psi.shape[0],) + (2,) * n)


def _axis(n: int, q: int) -> int:
    return 1 + (n - 1 - q)


def controlled_1q_inplace(psi: np.ndarray, n: int, control: int, target: int, u: np.ndarray) -> None:
    t = _tensor_view(psi, n)
    idx = [slice(None)] * (n + 1)
    idx[_axis(n, control)] = 1
    sub = t[tuple(idx)]
    # the target axis shifts left by one if it sat after the removed control axis
    tax = _axis(n, target)
    if tax > _axis(n, control):
        tax -= 1
    sub = np.moveaxis(sub, tax, -1)
    a0 = sub[..., 0].copy()
    a1 = sub[..., 1].copy()
    sub[..., 0] = u[0, 0] * a0 + u[0, 1] * a1
    sub[..., 1] = u[1, 0] * a0 + u[1, 1] * a1


def cnot_inplace(psi: np.ndarray, n: int, control: int, target: int) -> None:
    t = _tensor_view(psi, n)
    ca, ta = _axis(n, control), _axis(n, target)
    i0 = [slice(None)] * (n + 1)
    i1 = [slice(None)] * (n + 1)
    i0[ca] = i1[ca] = 1
    i0[ta] = 0
    i1[ta] = 1
    tmp = t[tuple(i0)].copy()
    t[tuple(i0)] = t[tuple(i1)]
    t[tuple(i1)] = tmp


def cz_inplace(psi: np.ndarray, n: int, a: int, b: int) -> None:
    t = _tensor_view(psi, n)
    idx = [slice(None)] * (n + 1)
    idx[_axis(n, a)] = 1
    idx[_axis(n, b)] = 1
    t[tuple(idx)] *= -1


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"single-qubit gate must be 2x2, got {u.shape}")
    if not np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12, rtol=0):
        raise ValueError("gate matrix is not unitary")
    return u


def apply_gate(state: Statevector, u, target: int, control: int | None = None) -> Statevector:
    """Return ``state`` with the 2x2 unitary ``u`` applied to ``target``.

    With ``control`` given the gate acts only where the control qubit is 1.
    """
    n = state.n_qubits
    u = _check_unitary(u)
    for q in (target,) if control is None else (target, control):
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
    psi = state.amplitudes.copy()[None, :]
    if control is None:
        apply_1q_inplace(psi, n, target, u)
    else:
        if control == target:
            raise ValueError("control and target must differ")
        controlled_1q_inplace(psi, n, control, target, u)
    return Statevector(n, psi[0])


def inner_product(a: Statevector, b: Statevector) -> complex:
    """<a|b>, conjugating the left argument."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("states have different qubit counts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def probabilities(state: Statevector) -> np.ndarray:
    amps = state.amplitudes
    return amps.real**2 + amps.imag**2


def batch_probabilities(psi: np.ndarray) -> np.ndarray:
    return psi.real**2 + psi.imag**2


def sample_counts(state: Statevector, shots: int, seed=None) -> dict[int, int]:
    """Draw ``shots`` computational-basis outcomes; returns {index: count} for nonzero counts."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    p = probabilities(state)
    counts = rng.multinomial(shots, p / p.sum())
    return {int(i): int(c) for i, c in enumerate(counts) if c}


def expectation_pauli_string(state: Statevector, p) -> float:
    """c <psi|P|psi> for a :class:`~vqa_natgrad.hamiltonians.PauliString`."""
    if len(p.ops) != state.n_qubits:
        raise ValueError("Pauli string length does not match qubit count")
    val = p.expectation_batch(state.amplitudes[None, :])[0]
    return float(val)
