"""
Exact statevector simulation with seeded shot sampling.

Conventions
-----------
Qubit 0 is the least-significant bit of a basis-outcome index. A k-qubit gate
acting on ``qubits = (q_0, ..., q_{k-1})`` reads bit ``i`` of its matrix index
from qubit ``q_i``. For a multiplexed gate the select value is
``sum(bit(select[i]) << i)``; ancillas used as select lines sit above the
system register, so the outcome index is ``select_value * 2**n_target + j``.

Sampling draws a multinomial from a ``numpy`` Philox generator keyed by a
64-bit seed, which gives the same counts for the same ``(probabilities,
shots, seed)`` on any schedule.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .linalg import DimensionError, ParameterError, as_vector, unitarity_residual

INPUT_NORM_TOL = 1e-9
NORM_TOL = 1e-12
GATE_UNITARY_TOL = 1e-12


@dataclass(frozen=True)
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p


def _normalized(amplitudes, what: str) -> np.ndarray:
    v = as_vector(amplitudes)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError(f"{what}: zero vector cannot be normalized")
    if abs(norm - 1) > INPUT_NORM_TOL:
        raise ValueError(f"{what}: norm {norm!r} differs from 1 by more than {INPUT_NORM_TOL}")
    return v / norm


def _n_qubits_for(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise DimensionError(f"length {dim} is not a power of two")
    return n


def prepare_state(amplitudes) -> Statevector:
    """Statevector with the given amplitudes, renormalized against float drift."""
    v = _normalized(amplitudes, "prepare_state")
    return Statevector(n_qubits=_n_qubits_for(v.size), amplitudes=v)


def preparation_unitary(amplitudes) -> np.ndarray:
    """
    A unitary whose first column is ``amplitudes``.

    Built as a phase times a Householder reflection, so it is deterministic and
    exactly unitary up to rounding.
    """
    a = _normalized(amplitudes, "preparation_unitary")
    phase = a[0] / abs(a[0]) if abs(a[0]) > 0 else 1.0
    b = a * np.conj(phase)
    u = -b
    u[0] += 1.0
    nu = np.vdot(u, u).real
    w = np.eye(a.size, dtype=complex)
    if nu > 1e-30:
        w -= 2.0 * np.outer(u, np.conj(u)) / nu
    return phase * w


# --- gate descriptors -------------------------------------------------------


@dataclass(frozen=True)
class Prepare:
    """Map ``|0...0>`` on ``qubits`` to ``amplitudes``."""

    qubits: tuple[int, ...]
    amplitudes: np.ndarray
    kind: str = field(default="prepare", init=False)


@dataclass(frozen=True)
class UnitaryGate:
    qubits: tuple[int, ...]
    matrix: np.ndarray
    kind: str = field(default="unitary", init=False)


@dataclass(frozen=True)
class Multiplexed:
    """Uniformly controlled gate: ``unitaries[k]`` acts on the targets when select reads ``k``."""

    select_qubits: tuple[int, ...]
    target_qubits: tuple[int, ...]
    unitaries: tuple[np.ndarray, ...]
    kind: str = field(default="multiplexed", init=False)


Gate = Union[Prepare, UnitaryGate, Multiplexed]


def _check_qubits(qubits: Sequence[int], n: int) -> None:
    if len(set(qubits)) != len(qubits):
        raise DimensionError(f"repeated qubit in {tuple(qubits)}")
    for q in qubits:
        if not 0 <= q < n:
            raise DimensionError(f"qubit index {q} out of range for {n} qubits")


def _check_unitary(u: np.ndarray, dim: int) -> None:
    if u.shape != (dim, dim):
        raise DimensionError(f"gate matrix has shape {u.shape}, expected {(dim, dim)}")
    resid = unitarity_residual(u)
    if resid > GATE_UNITARY_TOL:
        raise ValueError(f"gate matrix is not unitary (residual {resid:.3e})")


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))

    def validate(self) -> None:
        n = self.n_qubits
        if n < 1:
            raise DimensionError("a circuit needs at least one qubit")
        for op in self.ops:
            if isinstance(op, Prepare):
                _check_qubits(op.qubits, n)
                if op.amplitudes.size != 2 ** len(op.qubits):
                    raise DimensionError("prepare amplitudes do not match qubit count")
            elif isinstance(op, UnitaryGate):
                _check_qubits(op.qubits, n)
                _check_unitary(op.matrix, 2 ** len(op.qubits))
            elif isinstance(op, Multiplexed):
                _check_qubits(op.select_qubits + op.target_qubits, n)
                if len(op.unitaries) != 2 ** len(op.select_qubits):
                    raise DimensionError(
                        f"{len(op.unitaries)} unitaries for {len(op.select_qubits)} select qubits"
                    )
                for u in op.unitaries:
                    _check_unitary(u, 2 ** len(op.target_qubits))
            else:
                raise TypeError(f"unknown gate {op!r}")


# --- kernels ----------------------------------------------------------------


def _axes(qubits: Sequence[int], n: int) -> list[int]:
    # tensor axis of qubit q in a C-ordered reshape([2]*n) is n-1-q;
    # listed most-significant matrix bit first
    return [n - 1 - q for q in reversed(qubits)]


def apply_matrix(amplitudes: np.ndarray, qubits: Sequence[int], matrix: np.ndarray, n: int) -> np.ndarray:
    k = len(qubits)
    axes = _axes(qubits, n)
    psi = np.moveaxis(amplitudes.reshape([2] * n), axes, list(range(k)))
    shape = psi.shape
    psi = (matrix @ psi.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(psi, list(range(k)), axes).reshape(-1)


def _apply_multiplexed_raw(amplitudes, select, target, unitaries, n) -> np.ndarray:
    s, t = len(select), len(target)
    axes = _axes(select, n) + _axes(target, n)
    psi = np.moveaxis(amplitudes.reshape([2] * n), axes, list(range(s + t)))
    shape = psi.shape
    blocks = np.stack(unitaries)
    psi = np.einsum("kij,kjr->kir", blocks, psi.reshape(2**s, 2**t, -1)).reshape(shape)
    return np.moveaxis(psi, list(range(s + t)), axes).reshape(-1)


def _check_norm(v: np.ndarray) -> None:
    norm2 = np.vdot(v, v).real
    if abs(norm2 - 1) > NORM_TOL:
        raise RuntimeError(f"norm drifted to {norm2!r}")


def apply_multiplexed(
    state: Statevector,
    select_qubits: Sequence[int],
    target_qubits: Sequence[int],
    unitaries: Sequence,
) -> Statevector:
    """Apply ``unitaries[k]`` to the target register on the select-``k`` subspace."""
    gate = Multiplexed(
        tuple(select_qubits), tuple(target_qubits), tuple(np.asarray(u, dtype=complex) for u in unitaries)
    )
    Circuit(state.n_qubits, (gate,)).validate()
    out = _apply_multiplexed_raw(
        state.amplitudes, gate.select_qubits, gate.target_qubits, gate.unitaries, state.n_qubits
    )
    _check_norm(out)
    return Statevector(state.n_qubits, out)


def apply_gate(amplitudes: np.ndarray, op: Gate, n: int) -> np.ndarray:
    if isinstance(op, Prepare):
        return apply_matrix(amplitudes, op.qubits, preparation_unitary(op.amplitudes), n)
    if isinstance(op, UnitaryGate):
        return apply_matrix(amplitudes, op.qubits, op.matrix, n)
    return _apply_multiplexed_raw(amplitudes, op.select_qubits, op.target_qubits, op.unitaries, n)


def run_statevector(circuit: Circuit) -> Statevector:
    """Evolve ``|0...0>`` through the circuit."""
    circuit.validate()
    n = circuit.n_qubits
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    for op in circuit.ops:
        psi = apply_gate(psi, op, n)
        _check_norm(psi)
    return Statevector(n, psi)


def run_exact(circuit: Circuit) -> np.ndarray:
    """Outcome probabilities of the final state (infinite-shot limit)."""
    return run_statevector(circuit).probabilities()


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of all non-``Prepare`` gates (preparations are expanded to their unitaries)."""
    circuit.validate()
    n = circuit.n_qubits
    cols = np.eye(2**n, dtype=complex)
    out = np.empty_like(cols)
    for c in range(2**n):
        psi = cols[:, c]
        for op in circuit.ops:
            psi = apply_gate(psi, op, n)
        out[:, c] = psi
    return out


# --- sampling ---------------------------------------------------------------


@dataclass(frozen=True)
class ShotResult:
    shots: int
    counts: dict[int, int]
    seed: int

    def frequencies(self, n_outcomes: int) -> np.ndarray:
        f = np.zeros(n_outcomes)
        for k, c in self.counts.items():
            f[k] = c
        return f / self.shots


def make_rng(seed: int) -> np.random.Generator:
    """Philox generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & 0xFFFFFFFFFFFFFFFF))


def sample_counts(probabilities, shots: int, seed: int) -> ShotResult:
    """Multinomial shot counts; deterministic in ``(probabilities, shots, seed)``."""
    shots = int(shots)
    if shots <= 0:
        raise ParameterError(f"shots must be positive, got {shots}")
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be a finite non-negative vector")
    total = p.sum()
    if abs(total - 1) > INPUT_NORM_TOL:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    p = p / total
    draws = make_rng(seed).multinomial(shots, p)
    counts = {int(k): int(c) for k, c in enumerate(draws) if c}
    return ShotResult(shots=shots, counts=counts, seed=int(seed))


# --- serialization ----------------------------------------------------------


def _mat_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(m)]


def _vec_to_json(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in v]


def _from_pairs(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def circuit_to_json(circuit: Circuit) -> str:
    """One JSON object per gate; complex entries are ``[re, im]`` pairs, matrices row-major."""
    gates = []
    for op in circuit.ops:
        if isinstance(op, Prepare):
            gates.append({"kind": "prepare", "qubits": list(op.qubits), "amplitudes": _vec_to_json(op.amplitudes)})
        elif isinstance(op, UnitaryGate):
            gates.append({"kind": "unitary", "qubits": list(op.qubits), "matrix": _mat_to_json(op.matrix)})
        else:
            gates.append(
                {
                    "kind": "multiplexed",
                    "select_qubits": list(op.select_qubits),
                    "target_qubits": list(op.target_qubits),
                    "unitaries": [_mat_to_json(u) for u in op.unitaries],
                }
            )
    return json.dumps({"n_qubits": circuit.n_qubits, "gates": gates}, indent=1)


def circuit_from_json(text: str) -> Circuit:
    doc = json.loads(text)
    ops: list[Gate] = []
    for g in doc["gates"]:
        kind = g["kind"]
        if kind == "prepare":
            ops.append(Prepare(tuple(g["qubits"]), _from_pairs(g["amplitudes"])))
        elif kind == "unitary":
            ops.append(UnitaryGate(tuple(g["qubits"]), _from_pairs(g["matrix"])))
        elif kind == "multiplexed":
            ops.append(
                Multiplexed(
                    tuple(g["select_qubits"]),
                    tuple(g["target_qubits"]),
                    tuple(_from_pairs(u) for u in g["unitaries"]),
                )
            )
        else:
            raise ValueError(f"unknown gate kind {kind!r}")
    return Circuit(int(doc["n_qubits"]), tuple(ops))
